//! Dense reference integrator for the collided moments: the same Lie splitting,
//! RK4 streaming and implicit/explicit Euler scattering as the low-rank solver,
//! applied to the full n×m matrix.

use alloc::format;

use nalgebra::DMatrix;

use crate::collided::{ScatteringContext, StreamingContext};
use crate::spatial::{apply_streaming, check_finite};
use crate::{Error, Result};

/// Growth factor of the Frobenius norm over one step treated as instability.
const BLOWUP: f64 = 1e6;

/// Transformed moments `u` (cells × moments).
#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub u: DMatrix<f64>,
}

impl FullState {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { u: DMatrix::zeros(n, m) }
    }

    /// Stored numbers n·m.
    pub fn memory(&self) -> usize {
        self.u.len()
    }
}

/// One RK4 step of `u̇ = F_S(u)` with 𝓢⁻¹ taken at the stage times.
pub fn streaming_step(state: &FullState, dt: f64, ctx: &StreamingContext<'_>) -> Result<FullState> {
    let u0 = &state.u;
    let f = |k: usize, u: &DMatrix<f64>| apply_streaming(u, ctx.stage_inv_stopping(k), ctx.stencils, ctx.flux);
    let k1 = f(0, u0)?;
    let k2 = f(1, &(u0 + &k1 * (0.5 * dt)))?;
    let k3 = f(2, &(u0 + &k2 * (0.5 * dt)))?;
    let k4 = f(3, &(u0 + &k3 * dt))?;
    let u = u0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    check_finite("full-rank streaming", &u)?;
    let (before, after) = (u0.norm(), u.norm());
    if after > BLOWUP * before.max(f64::MIN_POSITIVE) && before > 0.0 {
        return Err(Error::Numerical(format!(
            "streaming step grew the solution norm from {before:e} to {after:e}; reduce the CFL number"
        )));
    }
    Ok(FullState { u })
}

/// Implicit Euler for self-scattering (a scalar division per cell and moment), then
/// explicit Euler for the first-collision source.
pub fn scattering_step(state: &FullState, dt: f64, ctx: &ScatteringContext) -> Result<FullState> {
    let (n, m) = state.u.shape();
    ctx.validate(n, m)?;
    let mut u = state.u.clone();
    for q in 0..m {
        for j in 0..n {
            let mut denom = 1.0;
            for t in &ctx.removal {
                denom += dt * t.cell_weight[j] * t.moment_rate[q];
            }
            if denom == 0.0 {
                return Err(Error::Numerical(format!(
                    "implicit scattering update is singular for moment column {q}; reduce the energy step"
                )));
            }
            u[(j, q)] /= denom;
        }
    }
    u.gemm(dt, &ctx.source.cell, &ctx.source.moment.transpose(), 1.0);
    check_finite("full-rank scattering", &u)?;
    Ok(FullState { u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{FluxMatrices, PnBasis};
    use crate::collided::{RemovalTerm, SourceTerm};
    use crate::spatial::{Boundary, Grid3D, UpwindStencils};
    use alloc::vec;

    #[test]
    fn zero_state_stays_zero() {
        let grid = Grid3D::new([4, 4, 4], [0.1; 3], [0.0; 3]).unwrap();
        let stencils = UpwindStencils::new(&grid, Boundary::Vacuum).unwrap();
        let flux = FluxMatrices::new(&PnBasis::new(2));
        let inv = vec![0.1; 64];
        let ctx = StreamingContext { stencils: &stencils, flux: &flux, inv_stopping: [&inv, &inv, &inv] };
        let out = streaming_step(&FullState::zeros(64, 9), 0.1, &ctx).unwrap();
        assert_eq!(out.u.norm(), 0.0);
    }

    #[test]
    fn pure_decay_matches_implicit_euler() {
        let st = FullState { u: DMatrix::from_element(3, 2, 2.0) };
        let ctx = ScatteringContext {
            removal: vec![RemovalTerm { cell_weight: vec![1.0, 2.0, 0.5], moment_rate: vec![0.0, 0.8] }],
            source: SourceTerm::zeros(3, 2),
        };
        let out = scattering_step(&st, 0.5, &ctx).unwrap();
        for j in 0..3 {
            assert_eq!(out.u[(j, 0)], 2.0);
            let sigma = [1.0, 2.0, 0.5][j] * 0.8;
            assert!((out.u[(j, 1)] - 2.0 / (1.0 + 0.5 * sigma)).abs() < 1e-15);
        }
    }

    #[test]
    fn source_is_added_after_the_implicit_update() {
        let st = FullState { u: DMatrix::from_element(2, 2, 1.0) };
        let ctx = ScatteringContext {
            removal: vec![RemovalTerm { cell_weight: vec![1.0; 2], moment_rate: vec![1.0; 2] }],
            source: SourceTerm { cell: DMatrix::from_element(2, 1, 3.0), moment: DMatrix::from_element(2, 1, 1.0) },
        };
        let out = scattering_step(&st, 1.0, &ctx).unwrap();
        assert!((out.u[(0, 0)] - (0.5 + 3.0)).abs() < 1e-15);
    }
}

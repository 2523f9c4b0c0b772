use nalgebra::DMatrix;

use super::state::LowRankState;
use crate::collided::StreamingContext;
use crate::linalg::augment;
use crate::spatial::check_finite;
use crate::Result;

/// Augmented BUG streaming substep: K and L updates by RK4, basis augmentation with the
/// old bases, and a Galerkin RK4 update of the coefficient. Returns the augmented state
/// (rank up to 2r) before truncation.
pub fn streaming_step(state: &LowRankState, dt: f64, ctx: &StreamingContext<'_>) -> Result<LowRankState> {
    let axes: alloc::vec::Vec<usize> = ctx.active_axes().collect();
    let (u0, s0, v0) = (&state.u, &state.s, &state.v);

    // K-step: K̇ = −Σ_d [D⁺(𝓢⁻¹K)(VᵀA⁺V) + D⁻(𝓢⁻¹K)(VᵀA⁻V)]
    let flux_v = projected_flux(ctx, v0, &axes);
    let k1 = rk4(&(u0 * s0), dt, |stage, k| {
        let x = scale_rows(k, ctx.stage_inv_stopping(stage));
        let mut out = DMatrix::zeros(k.nrows(), k.ncols());
        for (a, &d) in axes.iter().enumerate() {
            let (plus, minus) = &flux_v[a];
            out.gemm(-1.0, &ctx.stencils.plus[d].apply_columns(&x), plus, 1.0);
            out.gemm(-1.0, &ctx.stencils.minus[d].apply_columns(&x), minus, 1.0);
        }
        out
    });

    // L-step: L̇ = −Σ_d [A⁺ L C⁺ᵀ + A⁻ L C⁻ᵀ] with C^± = Uᵀ D^± 𝓢⁻¹ U
    let coupling_u = stage_couplings(ctx, u0, &axes);
    let l1 = rk4(&(v0 * s0.transpose()), dt, |stage, l| {
        let mut out = DMatrix::zeros(l.nrows(), l.ncols());
        for (a, &d) in axes.iter().enumerate() {
            let (cp, cm) = &coupling_u[stage_slot(stage)][a];
            out.gemm(-1.0, &(&ctx.flux.a_plus[d] * l), &cp.transpose(), 1.0);
            out.gemm(-1.0, &(&ctx.flux.a_minus[d] * l), &cm.transpose(), 1.0);
        }
        out
    });
    check_finite("streaming K-step", &k1)?;
    check_finite("streaming L-step", &l1)?;

    let u_hat = augment(u0, &k1);
    let v_hat = augment(v0, &l1);

    // S-step on the augmented bases: Ṡ = −Σ_d [Ĉ⁺ S (V̂ᵀA⁺V̂) + Ĉ⁻ S (V̂ᵀA⁻V̂)]
    let s_start = u_hat.tr_mul(u0) * s0 * v0.tr_mul(&v_hat);
    let flux_hat = projected_flux(ctx, &v_hat, &axes);
    let coupling_hat = stage_couplings(ctx, &u_hat, &axes);
    let s1 = rk4(&s_start, dt, |stage, s| {
        let mut out = DMatrix::zeros(s.nrows(), s.ncols());
        for (a, _) in axes.iter().enumerate() {
            let (cp, cm) = &coupling_hat[stage_slot(stage)][a];
            let (pp, pm) = &flux_hat[a];
            out.gemm(-1.0, &(cp * s), pp, 1.0);
            out.gemm(-1.0, &(cm * s), pm, 1.0);
        }
        out
    });
    check_finite("streaming S-step", &s1)?;
    LowRankState::new(u_hat, s1, v_hat)
}

/// Classical RK4 for a linear right-hand side evaluated at stage index 0..4.
pub(crate) fn rk4<F>(y0: &DMatrix<f64>, h: f64, f: F) -> DMatrix<f64>
where
    F: Fn(usize, &DMatrix<f64>) -> DMatrix<f64>,
{
    let k1 = f(0, y0);
    let k2 = f(1, &(y0 + &k1 * (0.5 * h)));
    let k3 = f(2, &(y0 + &k2 * (0.5 * h)));
    let k4 = f(3, &(y0 + &k3 * h));
    y0 + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Stage 0 → start, 1 and 2 → midpoint, 3 → end.
fn stage_slot(stage: usize) -> usize {
    match stage {
        0 => 0,
        1 | 2 => 1,
        _ => 2,
    }
}

pub(crate) fn scale_rows(m: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let mut out = m.clone();
    for (mut row, &s) in out.row_iter_mut().zip(w) {
        row *= s;
    }
    out
}

/// (VᵀA⁺V, VᵀA⁻V) per active axis.
fn projected_flux(ctx: &StreamingContext<'_>, v: &DMatrix<f64>, axes: &[usize]) -> alloc::vec::Vec<(DMatrix<f64>, DMatrix<f64>)> {
    axes.iter()
        .map(|&d| (v.tr_mul(&(&ctx.flux.a_plus[d] * v)), v.tr_mul(&(&ctx.flux.a_minus[d] * v))))
        .collect()
}

/// (UᵀD⁺𝓢⁻¹U, UᵀD⁻𝓢⁻¹U) per active axis at the start, midpoint and end of the step.
fn stage_couplings(
    ctx: &StreamingContext<'_>,
    u: &DMatrix<f64>,
    axes: &[usize],
) -> [alloc::vec::Vec<(DMatrix<f64>, DMatrix<f64>)>; 3] {
    core::array::from_fn(|slot| {
        let x = scale_rows(u, ctx.inv_stopping[slot]);
        axes.iter()
            .map(|&d| {
                (
                    u.tr_mul(&ctx.stencils.plus[d].apply_columns(&x)),
                    u.tr_mul(&ctx.stencils.minus[d].apply_columns(&x)),
                )
            })
            .collect()
    })
}

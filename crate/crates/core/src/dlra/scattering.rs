use alloc::format;

use nalgebra::DMatrix;

use super::state::LowRankState;
use crate::collided::ScatteringContext;
use crate::linalg::{augment, thin_qr};
use crate::spatial::check_finite;
use crate::{Error, Result};

use super::streaming::scale_rows;

/// Scattering substep on `U S Vᵀ`:
///
/// 1. self-scattering on L = V Sᵀ by implicit Euler, one r×r solve per moment
///    (the collision operator is diagonal in moments), then L = Ṽ S̃ᵀ by QR;
/// 2. K = U S̃ + Δt Q Ṽ by explicit Euler, Û from [K, U];
/// 3. L = Ṽ S̃ᵀ + Δt Qᵀ U by explicit Euler, V̂ from [L, Ṽ];
/// 4. Ŝ = (ÛᵀU) S̃ (ṼᵀV̂) + Δt Ûᵀ Q V̂.
///
/// Returns the augmented state before truncation.
pub fn scattering_step(state: &LowRankState, dt: f64, ctx: &ScatteringContext) -> Result<LowRankState> {
    let (n, m) = (state.cells(), state.moments());
    ctx.validate(n, m)?;
    let (u, s, v) = (&state.u, &state.s, &state.v);
    let r = u.ncols();

    // 1. Collided L-step: [I + Δt Σ_i B_i rate_i(q)] L_q⁺ = L_q with B_i = Uᵀ diag(w_i) U.
    let blocks: alloc::vec::Vec<DMatrix<f64>> =
        ctx.removal.iter().map(|t| u.tr_mul(&scale_rows(u, &t.cell_weight))).collect();
    let l0 = v * s.transpose();
    let mut l1 = DMatrix::zeros(m, r);
    for q in 0..m {
        let mut sys = DMatrix::identity(r, r);
        for (b, t) in blocks.iter().zip(&ctx.removal) {
            let c = dt * t.moment_rate[q];
            if c != 0.0 {
                sys += b * c;
            }
        }
        let rhs = l0.row(q).transpose();
        let sol = sys.lu().solve(&rhs).ok_or_else(|| {
            Error::Numerical(format!("implicit scattering solve is singular for moment column {q}; reduce the energy step"))
        })?;
        l1.row_mut(q).copy_from(&sol.transpose());
    }
    check_finite("collided L-step", &l1)?;
    let (v_tilde, r_fac) = thin_qr(&l1);
    let s_tilde = r_fac.transpose();

    // 2-4. Uncollided source on the updated factors.
    let src = &ctx.source;
    let k1 = u * &s_tilde + &src.cell * (src.moment.tr_mul(&v_tilde)) * dt;
    let u_hat = augment(u, &k1);
    let l1 = &v_tilde * s_tilde.transpose() + &src.moment * (src.cell.tr_mul(u)) * dt;
    let v_hat = augment(&v_tilde, &l1);
    let s_hat = u_hat.tr_mul(u) * &s_tilde * v_tilde.tr_mul(&v_hat)
        + u_hat.tr_mul(&src.cell) * src.moment.tr_mul(&v_hat) * dt;
    check_finite("scattering S-step", &s_hat)?;
    LowRankState::new(u_hat, s_hat, v_hat)
}

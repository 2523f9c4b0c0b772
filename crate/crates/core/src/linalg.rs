//! Small dense helpers shared by the low-rank and reference solvers.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math::{ln, sqrt, cos};

/// Relative size below which a new direction is treated as already spanned.
pub const RANGE_TOL: f64 = 1e-12;

/// Largest entry of |QᵀQ − I|.
pub fn orthonormality_deviation(q: &DMatrix<f64>) -> f64 {
    let g = q.tr_mul(q);
    let mut dev = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let e = if i == j { g[(i, j)] - 1.0 } else { g[(i, j)] };
            dev = dev.max(e.abs());
        }
    }
    dev
}

/// Orthonormal basis of range([base, extra]) whose first columns are `base`.
///
/// `base` must be orthonormal. The part of `extra` outside range(base) is projected
/// out twice (classical Gram–Schmidt with reorthogonalisation) and then orthonormalised
/// with a column-pivoted QR; directions whose pivot falls below
/// `RANGE_TOL · ‖extra‖_F` are dropped as numerically dependent. The cut is relative to
/// `extra` alone: the factors carry physical units and may be tiny next to a unit basis.
pub fn augment(base: &DMatrix<f64>, extra: &DMatrix<f64>) -> DMatrix<f64> {
    let n = base.nrows();
    let mut w = extra.clone();
    for _ in 0..2 {
        let coeff = base.tr_mul(&w);
        w.gemm(-1.0, base, &coeff, 1.0);
    }
    let room = n.saturating_sub(base.ncols());
    let scale = extra.norm();
    let mut kept = 0;
    let mut q_new = DMatrix::zeros(n, 0);
    if room > 0 && w.ncols() > 0 && scale > 0.0 {
        let qr = w.clone().col_piv_qr();
        let r = qr.r();
        let diag = r.nrows().min(r.ncols());
        while kept < diag.min(room) && r[(kept, kept)].abs() > RANGE_TOL * scale {
            kept += 1;
        }
        if kept > 0 {
            q_new = qr.q().columns(0, kept).into_owned();
            // One more projection keeps the new block orthogonal to `base` to roundoff.
            let coeff = base.tr_mul(&q_new);
            q_new.gemm(-1.0, base, &coeff, 1.0);
            q_new = q_new.qr().q();
        }
    }
    let mut out = DMatrix::zeros(n, base.ncols() + kept);
    out.columns_mut(0, base.ncols()).copy_from(base);
    if kept > 0 {
        out.columns_mut(base.ncols(), kept).copy_from(&q_new);
    }
    out
}

/// Householder thin QR `a = Q R` with Q: rows × min(rows, cols).
pub fn thin_qr(a: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let qr = a.clone().qr();
    (qr.q(), qr.r())
}

/// SVD with singular values in descending order: `a = P diag(σ) Qᵀ`.
pub fn sorted_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let vt = svd.v_t.expect("right singular vectors requested");
    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let p = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let q = DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]);
    let s = DVector::from_fn(order.len(), |i, _| sigma[order[i]]);
    (p, s, q)
}

/// Deterministic random matrix with orthonormal columns (Gaussian entries, then QR).
pub fn random_orthonormal(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = || ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64;
    let g = DMatrix::from_fn(rows, cols, |_, _| {
        // Box–Muller
        let (a, b) = (uniform(), uniform());
        sqrt(-2.0 * ln(a)) * cos(2.0 * core::f64::consts::PI * b)
    });
    thin_qr(&g).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn random_bases_are_orthonormal_and_reproducible() {
        let a = random_orthonormal(40, 6, 7);
        let b = random_orthonormal(40, 6, 7);
        assert_eq!(a, b);
        assert!(orthonormality_deviation(&a) < 1e-14);
    }

    #[test]
    fn augment_keeps_base_and_spans_extra() {
        let base = random_orthonormal(30, 4, 1);
        let extra = DMatrix::from_fn(30, 3, |i, j| ((i * (j + 2)) as f64).sin());
        let out = augment(&base, &extra);
        assert_eq!(out.ncols(), 7);
        assert!(orthonormality_deviation(&out) < 1e-13);
        assert_eq!(out.columns(0, 4), base.columns(0, 4));
        let resid = &extra - &out * out.tr_mul(&extra);
        assert!(resid.norm() < 1e-12 * extra.norm());
    }

    #[test]
    fn augment_is_invariant_to_the_scale_of_extra() {
        let base = random_orthonormal(30, 4, 1);
        let extra = DMatrix::from_fn(30, 3, |i, j| ((i * (j + 2)) as f64).sin());
        for scale in [1e-16, 1e-8, 1e8] {
            let tiny = &extra * scale;
            let out = augment(&base, &tiny);
            assert_eq!(out.ncols(), 7, "scale {scale}");
            let resid = &tiny - &out * out.tr_mul(&tiny);
            assert!(resid.norm() < 1e-12 * tiny.norm());
        }
    }

    #[test]
    fn augment_drops_dependent_directions() {
        let base = random_orthonormal(20, 3, 2);
        let extra = &base * DMatrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(augment(&base, &extra).ncols(), 3);
        assert_eq!(augment(&base, &DMatrix::zeros(20, 3)).ncols(), 3);
        // Never more columns than the ambient dimension.
        let base = random_orthonormal(5, 4, 3);
        let extra = DMatrix::from_fn(5, 4, |i, j| ((i + 1) * (j + 3)) as f64 + (i * j) as f64 * 0.1);
        assert_eq!(augment(&base, &extra).ncols(), 5);
    }

    proptest! {
        #[test]
        fn sorted_svd_reconstructs(vals in proptest::collection::vec(-5.0f64..5.0, 12)) {
            let a = DMatrix::from_vec(4, 3, vals);
            let (p, s, q) = sorted_svd(&a);
            for i in 1..s.len() {
                prop_assert!(s[i - 1] >= s[i]);
            }
            let rec = &p * DMatrix::from_diagonal(&s) * q.transpose();
            prop_assert!((rec - &a).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}

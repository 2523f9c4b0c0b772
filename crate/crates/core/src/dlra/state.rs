use alloc::format;

use nalgebra::{DMatrix, DVector};

use crate::linalg::{orthonormality_deviation, random_orthonormal};
use crate::{Error, Result};

/// `U S Vᵀ` with orthonormal U (n×r), V (m×r) and a dense coefficient S.
/// During a step the two bases may have different widths (augmented state).
#[derive(Debug, Clone, PartialEq)]
pub struct LowRankState {
    pub u: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub v: DMatrix<f64>,
}

impl LowRankState {
    pub fn new(u: DMatrix<f64>, s: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != s.nrows() || v.ncols() != s.ncols() {
            return Err(Error::Shape(format!(
                "low-rank factors {}x{}, {}x{}, {}x{} do not chain",
                u.nrows(),
                u.ncols(),
                s.nrows(),
                s.ncols(),
                v.nrows(),
                v.ncols()
            )));
        }
        Ok(Self { u, s, v })
    }

    /// Zero state of rank `r` on deterministic random orthonormal bases.
    pub fn zero(n: usize, m: usize, r: usize, seed: u64) -> Result<Self> {
        if r == 0 || r > n.min(m) {
            return Err(Error::Config(format!("initial rank {r} must lie in 1..={}", n.min(m))));
        }
        let u = random_orthonormal(n, r, seed);
        let v = random_orthonormal(m, r, seed.wrapping_add(1));
        Ok(Self { u, s: DMatrix::zeros(r, r), v })
    }

    pub fn cells(&self) -> usize {
        self.u.nrows()
    }

    pub fn moments(&self) -> usize {
        self.v.nrows()
    }

    /// Rank of the representation (width of the narrower basis).
    pub fn rank(&self) -> usize {
        self.u.ncols().min(self.v.ncols())
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.u * &self.s * self.v.transpose()
    }

    /// Column `q` of `U S Vᵀ` without forming the full matrix.
    pub fn moment_column(&self, q: usize) -> DVector<f64> {
        let coeff = &self.s * self.v.row(q).transpose();
        &self.u * coeff
    }

    /// max(‖UᵀU − I‖_max, ‖VᵀV − I‖_max)
    pub fn orthonormality_deviation(&self) -> f64 {
        orthonormality_deviation(&self.u).max(orthonormality_deviation(&self.v))
    }

    /// Stored numbers: n·r_U + r_U·r_V + m·r_V.
    pub fn memory(&self) -> usize {
        self.u.len() + self.s.len() + self.v.len()
    }
}

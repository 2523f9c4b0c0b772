use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Block3 = [[f64; 3]; 3];

const ZERO: Block3 = [[0.0; 3]; 3];

fn mul(a: &Block3, b: &Block3) -> Block3 {
    let mut c = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    c
}

#[inline]
fn mul_vec(a: &Block3, x: &[f64]) -> [f64; 3] {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + a[0][2] * x[2],
        a[1][0] * x[0] + a[1][1] * x[1] + a[1][2] * x[2],
        a[2][0] * x[0] + a[2][1] * x[1] + a[2][2] * x[2],
    ]
}

/// Inverse by Gauss–Jordan elimination with partial pivoting.
fn invert(a: &Block3) -> Option<Block3> {
    let mut m = *a;
    let mut inv = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.iter().flatten().fold(0.0f64, |s, v| s.max(v.abs()));
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if !(m[piv][col].abs() > 1e-14 * scale) {
            return None;
        }
        m.swap(col, piv);
        inv.swap(col, piv);
        let p = m[col][col];
        for j in 0..3 {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..3 {
            if i != col {
                let f = m[i][col];
                for j in 0..3 {
                    m[i][j] -= f * m[col][j];
                    inv[i][j] -= f * inv[col][j];
                }
            }
        }
    }
    Some(inv)
}

/// Block-tridiagonal matrix with 3×3 blocks: `lower[g]` couples row g to g−1,
/// `upper[g]` couples row g to g+1 (`lower[0]` and `upper[last]` are unused).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiag {
    pub lower: Vec<Block3>,
    pub diag: Vec<Block3>,
    pub upper: Vec<Block3>,
}

impl BlockTridiag {
    pub fn zeros(blocks: usize) -> Self {
        Self { lower: vec![ZERO; blocks], diag: vec![ZERO; blocks], upper: vec![ZERO; blocks] }
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    /// Block-diagonal matrix with the given diagonals.
    pub fn diagonal(diag: &[[f64; 3]]) -> Self {
        let mut out = Self::zeros(diag.len());
        for (b, d) in out.diag.iter_mut().zip(diag) {
            for i in 0..3 {
                b[i][i] = d[i];
            }
        }
        out
    }

    /// self += s · other
    pub fn axpy(&mut self, s: f64, other: &BlockTridiag) {
        for (dst, src) in [
            (&mut self.lower, &other.lower),
            (&mut self.diag, &other.diag),
            (&mut self.upper, &other.upper),
        ] {
            for (a, b) in dst.iter_mut().zip(src) {
                for i in 0..3 {
                    for j in 0..3 {
                        a[i][j] += s * b[i][j];
                    }
                }
            }
        }
    }

    /// y = A x
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nb = self.blocks();
        for g in 0..nb {
            let mut acc = mul_vec(&self.diag[g], &x[3 * g..3 * g + 3]);
            if g > 0 {
                let l = mul_vec(&self.lower[g], &x[3 * (g - 1)..3 * g]);
                acc.iter_mut().zip(l).for_each(|(a, b)| *a += b);
            }
            if g + 1 < nb {
                let u = mul_vec(&self.upper[g], &x[3 * (g + 1)..3 * (g + 2)]);
                acc.iter_mut().zip(u).for_each(|(a, b)| *a += b);
            }
            y[3 * g..3 * g + 3].copy_from_slice(&acc);
        }
    }

    /// Block LU (Thomas) factorisation.
    pub fn factor(&self) -> Result<FactoredBlockTridiag> {
        let nb = self.blocks();
        let mut inv_diag = Vec::with_capacity(nb);
        let mut multipliers = vec![ZERO; nb];
        let mut d = self.diag[0];
        for g in 0..nb {
            if g > 0 {
                let m = mul(&self.lower[g], &inv_diag[g - 1]);
                let mu = mul(&m, &self.upper[g - 1]);
                d = self.diag[g];
                for i in 0..3 {
                    for j in 0..3 {
                        d[i][j] -= mu[i][j];
                    }
                }
                multipliers[g] = m;
            }
            let inv = invert(&d)
                .ok_or_else(|| Error::Numerical(format!("singular pivot block {g} in energy solve")))?;
            inv_diag.push(inv);
        }
        Ok(FactoredBlockTridiag { inv_diag, multipliers, upper: self.upper.clone() })
    }
}

#[derive(Debug, Clone)]
pub struct FactoredBlockTridiag {
    inv_diag: Vec<Block3>,
    multipliers: Vec<Block3>,
    upper: Vec<Block3>,
}

impl FactoredBlockTridiag {
    /// Solves A x = b in place.
    pub fn solve(&self, b: &mut [f64]) {
        let nb = self.inv_diag.len();
        for g in 1..nb {
            let (prev, cur) = b.split_at_mut(3 * g);
            let t = mul_vec(&self.multipliers[g], &prev[3 * (g - 1)..]);
            for i in 0..3 {
                cur[i] -= t[i];
            }
        }
        for g in (0..nb).rev() {
            let mut r = [b[3 * g], b[3 * g + 1], b[3 * g + 2]];
            if g + 1 < nb {
                let t = mul_vec(&self.upper[g], &b[3 * (g + 1)..3 * (g + 2)]);
                for i in 0..3 {
                    r[i] -= t[i];
                }
            }
            let x = mul_vec(&self.inv_diag[g], &r);
            b[3 * g..3 * g + 3].copy_from_slice(&x);
        }
    }
}

use alloc::format;
use alloc::vec::Vec;

use super::basis::PnBasis;
use crate::physics::ScatteringMoments;
use crate::{Error, Result};

/// Diagonal collision operator of one element, stored per degree ℓ = 0..=N.
///
/// `in_scatter[ℓ]` is the diagonal of G at degree ℓ, `total` is Σ_t, and
/// `removal[ℓ] = total − in_scatter[ℓ]` is kept separately because it is
/// formed without cancellation from the moment differences.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionDiagonal {
    pub in_scatter: Vec<f64>,
    pub total: f64,
    pub removal: Vec<f64>,
}

impl CollisionDiagonal {
    pub fn degree(&self) -> usize {
        self.in_scatter.len() - 1
    }

    /// Degree values repeated over the 2ℓ+1 orders of each degree.
    pub fn expand(per_degree: &[f64], basis: &PnBasis) -> Vec<f64> {
        basis.degrees().iter().map(|&l| per_degree[l]).collect()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            in_scatter: self.in_scatter.iter().map(|v| v * factor).collect(),
            total: self.total * factor,
            removal: self.removal.iter().map(|v| v * factor).collect(),
        }
    }
}

/// Boltzmann operator from moments g_0..g_{N+1}. With `corrected`, applies the
/// extended transport correction g_ℓ ← g_ℓ − g_{N+1}, Σ_t ← Σ_t − g_{N+1}.
pub fn boltzmann_diagonal(moments: &ScatteringMoments, n: usize, corrected: bool) -> Result<CollisionDiagonal> {
    if moments.max_degree() < n + 1 {
        return Err(Error::Shape(format!(
            "scattering moments up to degree {} supplied, degree {} required",
            moments.max_degree(),
            n + 1
        )));
    }
    let removal: Vec<f64> = moments.d[..=n].to_vec();
    if corrected {
        // g_ℓ − g_{N+1} = d_{N+1} − d_ℓ, Σ_t − g_{N+1} = d_{N+1}
        let dn1 = moments.d[n + 1];
        Ok(CollisionDiagonal {
            in_scatter: removal.iter().map(|d| dn1 - d).collect(),
            total: dn1,
            removal,
        })
    } else {
        Ok(CollisionDiagonal { in_scatter: moments.g[..=n].to_vec(), total: moments.g[0], removal })
    }
}

/// Fokker–Planck operator (ξ₁/2)Δ_S: degree-ℓ entry −(ξ₁/2)ℓ(ℓ+1), no out-scatter term.
/// `strength` ∈ [0, 1] scales the shift by the degree-(N+1) eigenvalue.
pub fn fp_diagonal(xi1: f64, n: usize, strength: f64) -> Result<CollisionDiagonal> {
    if !(xi1 >= 0.0) {
        return Err(Error::Numerical(format!("negative transport coefficient {xi1}")));
    }
    if !(0.0..=1.0).contains(&strength) {
        return Err(Error::Config(format!("correction strength must lie in [0, 1], got {strength}")));
    }
    let eig = |l: usize| -0.5 * xi1 * (l * (l + 1)) as f64;
    let base = CollisionDiagonal {
        in_scatter: (0..=n).map(eig).collect(),
        total: 0.0,
        removal: (0..=n).map(|l| -eig(l)).collect(),
    };
    Ok(transport_correction(&base, strength * eig(n + 1)))
}

/// Shifts every diagonal entry and Σ_t by `shift`; the net operator Σ_t − G is unchanged.
pub fn transport_correction(op: &CollisionDiagonal, shift: f64) -> CollisionDiagonal {
    CollisionDiagonal {
        in_scatter: op.in_scatter.iter().map(|g| g - shift).collect(),
        total: op.total - shift,
        removal: op.removal.clone(),
    }
}

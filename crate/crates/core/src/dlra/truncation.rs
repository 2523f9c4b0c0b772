use alloc::format;

use nalgebra::DMatrix;

use super::state::LowRankState;
use crate::linalg::sorted_svd;
use crate::{Error, Result};

/// Rank-adaptive truncation: keep the smallest rank whose discarded singular-value
/// tail sum is at most `threshold`, never below `min_rank`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPolicy {
    pub threshold: f64,
    pub min_rank: usize,
    pub max_rank: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self { threshold: 0.01, min_rank: 2, max_rank: 100 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(Error::Config(format!("truncation threshold must be finite and >= 0, got {}", self.threshold)));
        }
        if self.min_rank == 0 || self.min_rank > self.max_rank {
            return Err(Error::Config(format!(
                "ranks must satisfy 1 <= r_min <= r_max, got r_min = {}, r_max = {}",
                self.min_rank, self.max_rank
            )));
        }
        if self.max_rank > n.min(m) {
            return Err(Error::Config(format!(
                "r_max = {} exceeds min(cells, moments) = {}",
                self.max_rank,
                n.min(m)
            )));
        }
        Ok(())
    }
}

/// Outcome of one truncation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationReport {
    pub rank: usize,
    /// Σ of the discarded singular values.
    pub discarded: f64,
    /// Tolerance the tail was measured against (ϑ, or k·ε·σ₁ for ϑ = 0).
    pub tolerance: f64,
}

impl TruncationReport {
    pub fn within_bound(&self) -> bool {
        self.discarded <= self.tolerance
    }
}

/// SVD of the augmented coefficient and rank selection per `policy`.
/// A rank above `max_rank` is an error: clamping would break the tail bound.
pub fn truncate(state: &LowRankState, policy: &TruncationPolicy) -> Result<(LowRankState, TruncationReport)> {
    let (p, sigma, q) = sorted_svd(&state.s);
    let avail = sigma.len();
    let tolerance = if policy.threshold > 0.0 {
        policy.threshold
    } else {
        let dim = state.s.nrows().max(state.s.ncols()) as f64;
        dim * f64::EPSILON * sigma.get(0).copied().unwrap_or(0.0)
    };
    // tail[r] = Σ_{i ≥ r} σ_i
    let mut rank = avail;
    let mut tail = 0.0;
    while rank > 0 && tail + sigma[rank - 1] <= tolerance {
        tail += sigma[rank - 1];
        rank -= 1;
    }
    if rank > policy.max_rank {
        return Err(Error::Numerical(format!(
            "rank {rank} needed for truncation threshold {} exceeds r_max = {}; increase the threshold or r_max",
            policy.threshold, policy.max_rank
        )));
    }
    let rank = rank.max(policy.min_rank).min(avail);
    let discarded: f64 = sigma.iter().skip(rank).sum();
    let u = &state.u * p.columns(0, rank);
    let v = &state.v * q.columns(0, rank);
    let s = DMatrix::from_diagonal(&sigma.rows(0, rank).into_owned());
    Ok((LowRankState::new(u, s, v)?, TruncationReport { rank, discarded, tolerance }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_orthonormal;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn diag_state(vals: &[f64]) -> LowRankState {
        let r = vals.len();
        LowRankState::new(
            random_orthonormal(20, r, 3),
            DMatrix::from_diagonal(&DVector::from_column_slice(vals)),
            random_orthonormal(10, r, 4),
        )
        .unwrap()
    }

    #[test]
    fn keeps_two_of_four() {
        let st = diag_state(&[5.0, 3.0, 1e-9, 1e-12]);
        let policy = TruncationPolicy { threshold: 0.01, min_rank: 1, max_rank: 10 };
        let (out, rep) = truncate(&st, &policy).unwrap();
        assert_eq!(rep.rank, 2);
        assert!((rep.discarded - 1.001e-9).abs() < 1e-14, "{}", rep.discarded);
        assert!(rep.within_bound());
        assert_eq!(out.u.ncols(), 2);
    }

    #[test]
    fn zero_threshold_gives_numerical_rank() {
        let st = diag_state(&[2.0, 1.0, 0.0, 0.0]);
        let policy = TruncationPolicy { threshold: 0.0, min_rank: 1, max_rank: 10 };
        assert_eq!(truncate(&st, &policy).unwrap().1.rank, 2);
    }

    #[test]
    fn respects_min_and_max_rank() {
        let st = diag_state(&[2.0, 1e-6, 1e-7]);
        let (_, rep) = truncate(&st, &TruncationPolicy { threshold: 0.1, min_rank: 2, max_rank: 3 }).unwrap();
        assert_eq!(rep.rank, 2);
        let st = diag_state(&[2.0, 1.0, 0.5]);
        assert!(truncate(&st, &TruncationPolicy { threshold: 0.1, min_rank: 1, max_rank: 2 }).is_err());
    }

    proptest! {
        #[test]
        fn frobenius_error_bounded_by_tail(vals in proptest::collection::vec(-1.0f64..1.0, 16), theta in 0.0f64..0.5) {
            let s = DMatrix::from_vec(4, 4, vals);
            let st = LowRankState::new(random_orthonormal(12, 4, 9), s, random_orthonormal(7, 4, 8)).unwrap();
            let (out, rep) = truncate(&st, &TruncationPolicy { threshold: theta, min_rank: 1, max_rank: 4 }).unwrap();
            prop_assert!(rep.within_bound());
            let err = (out.reconstruct() - st.reconstruct()).norm();
            prop_assert!(err <= rep.discarded + 1e-12);
        }
    }
}

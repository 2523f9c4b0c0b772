use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::settings::TruncateAfter;
use crate::collided::{ScatteringContext, StreamingContext};
use crate::dlra::{self, LowRankState, TruncationPolicy, TruncationReport};
use crate::fullrank::{self, FullState};
use crate::Result;

/// A collided-flux integrator driven by the pseudo-time loop.
pub trait CollidedSolver {
    fn streaming(&mut self, dt: f64, ctx: &StreamingContext<'_>) -> Result<()>;
    fn scattering(&mut self, dt: f64, ctx: &ScatteringContext) -> Result<()>;
    /// Degree-0 column ũ₀ of the transformed moments.
    fn scalar_moment(&self) -> DVector<f64>;
    fn reconstruct(&self) -> DMatrix<f64>;
    fn rank(&self) -> usize;
    /// Numbers held by the state at a step boundary.
    fn memory(&self) -> usize;
}

/// Diagnostics collected by the low-rank solver over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LowRankDiagnostics {
    pub truncations: Vec<TruncationReport>,
    /// Truncations whose discarded tail exceeded the tolerance.
    pub violations: usize,
    pub max_orthonormality_deviation: f64,
    /// Largest memory of a truncated state.
    pub peak_memory: usize,
    /// Largest memory of an augmented (pre-truncation) state.
    pub peak_augmented_memory: usize,
}

/// Rank-adaptive augmented-BUG solver.
#[derive(Debug, Clone)]
pub struct LowRankSolver {
    pub state: LowRankState,
    pub policy: TruncationPolicy,
    pub truncate_after: TruncateAfter,
    pub diagnostics: LowRankDiagnostics,
}

impl LowRankSolver {
    /// Zero initial state of rank r_min on seeded random bases.
    pub fn new(n: usize, m: usize, policy: TruncationPolicy, truncate_after: TruncateAfter, seed: u64) -> Result<Self> {
        policy.validate(n, m)?;
        let state = LowRankState::zero(n, m, policy.min_rank, seed)?;
        let mut solver = Self { state, policy, truncate_after, diagnostics: LowRankDiagnostics::default() };
        solver.observe();
        Ok(solver)
    }

    fn absorb(&mut self, augmented: LowRankState, truncate: bool) -> Result<()> {
        self.diagnostics.peak_augmented_memory = self.diagnostics.peak_augmented_memory.max(augmented.memory());
        if truncate {
            let (state, report) = dlra::truncate(&augmented, &self.policy)?;
            if !report.within_bound() {
                self.diagnostics.violations += 1;
            }
            self.diagnostics.truncations.push(report);
            self.state = state;
        } else {
            self.state = augmented;
        }
        self.observe();
        Ok(())
    }

    fn observe(&mut self) {
        let d = &mut self.diagnostics;
        d.max_orthonormality_deviation = d.max_orthonormality_deviation.max(self.state.orthonormality_deviation());
        d.peak_memory = d.peak_memory.max(self.state.memory());
    }
}

impl CollidedSolver for LowRankSolver {
    fn streaming(&mut self, dt: f64, ctx: &StreamingContext<'_>) -> Result<()> {
        let aug = dlra::streaming_step(&self.state, dt, ctx)?;
        self.absorb(aug, self.truncate_after == TruncateAfter::Both)
    }

    fn scattering(&mut self, dt: f64, ctx: &ScatteringContext) -> Result<()> {
        let aug = dlra::scattering_step(&self.state, dt, ctx)?;
        self.absorb(aug, true)
    }

    fn scalar_moment(&self) -> DVector<f64> {
        self.state.moment_column(0)
    }

    fn reconstruct(&self) -> DMatrix<f64> {
        self.state.reconstruct()
    }

    fn rank(&self) -> usize {
        self.state.rank()
    }

    fn memory(&self) -> usize {
        self.state.memory()
    }
}

/// Dense reference solver.
#[derive(Debug, Clone)]
pub struct FullRankSolver {
    pub state: FullState,
}

impl FullRankSolver {
    pub fn new(n: usize, m: usize) -> Self {
        Self { state: FullState::zeros(n, m) }
    }
}

impl CollidedSolver for FullRankSolver {
    fn streaming(&mut self, dt: f64, ctx: &StreamingContext<'_>) -> Result<()> {
        self.state = fullrank::streaming_step(&self.state, dt, ctx)?;
        Ok(())
    }

    fn scattering(&mut self, dt: f64, ctx: &ScatteringContext) -> Result<()> {
        self.state = fullrank::scattering_step(&self.state, dt, ctx)?;
        Ok(())
    }

    fn scalar_moment(&self) -> DVector<f64> {
        self.state.u.column(0).into_owned()
    }

    fn reconstruct(&self) -> DMatrix<f64> {
        self.state.u.clone()
    }

    fn rank(&self) -> usize {
        self.state.u.nrows().min(self.state.u.ncols())
    }

    fn memory(&self) -> usize {
        self.state.memory()
    }
}

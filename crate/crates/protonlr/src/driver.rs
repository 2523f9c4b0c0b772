//! Problem assembly and the end-to-end run: tables → phantom → ray trace → pseudo-time sweep.

use std::time::{Duration, Instant};

use log::{debug, info};
use protonlr_core::pipeline::{
    CollidedSolver, DoseGrid, EnergyGrid, FullRankSolver, LowRankDiagnostics, LowRankSolver, Negativity, Problem,
    RankRecord, RayExecutor, SolverSettings, Simulation,
};
use protonlr_core::raytracer::{BeamSource, RaySpectra};
use protonlr_core::Result as CoreResult;
use rayon::prelude::*;

use crate::config::{Axis, LineConfig, ProblemConfig};
use crate::error::AppResult;
use crate::phantom;
use crate::tables::{resolve_data_dir, PhysicsData};

/// Marches the rays of a bundle on the rayon pool; results keep ray order, so the
/// deposition that follows is bit-identical to a sequential run.
#[derive(Debug, Clone, Copy, Default)]
pub struct RayonRays;

impl RayExecutor for RayonRays {
    fn run(&self, count: usize, task: &(dyn Fn(usize) -> CoreResult<RaySpectra> + Sync)) -> CoreResult<Vec<RaySpectra>> {
        (0..count).into_par_iter().map(task).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    LowRank,
    FullRank,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::LowRank => "low-rank",
            SolverKind::FullRank => "full-rank",
        }
    }
}

/// A validated config with its tables loaded and the problem assembled.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: ProblemConfig,
    pub data: PhysicsData,
    pub hu: Vec<f64>,
    pub problem: Problem,
    pub settings: SolverSettings,
}

pub fn prepare(config: &ProblemConfig) -> AppResult<Prepared> {
    config.validate()?;
    let data = PhysicsData::load(&resolve_data_dir(config.data.dir.as_deref()))?;
    let grid = config.grid()?;
    let hu = phantom::hu_volume(&config.phantom, &grid)?;
    let materials = phantom::materials(&hu, &data.schneider)?;
    let problem = Problem { grid, materials, beams: config.beam_sources()? };
    let settings = config.solver_settings();
    problem.validate()?;
    settings.validate(grid.len())?;
    Ok(Prepared { config: config.clone(), data, hu, problem, settings })
}

/// Numbers held by the collided state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryReport {
    /// Largest state at a step boundary.
    pub peak_state: usize,
    /// Largest augmented state inside a step (low-rank only).
    pub peak_augmented: usize,
    /// n·m, the dense state.
    pub full_rank: usize,
}

impl MemoryReport {
    pub fn ratio(&self) -> f64 {
        self.peak_state as f64 / self.full_rank as f64
    }
}

/// A sampled line through the dose grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub name: String,
    /// CSV header of the coordinate column (`depth_cm` or `lateral_cm`).
    pub coordinate: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct RunResults {
    pub solver: SolverKind,
    pub dose: DoseGrid,
    pub ranks: Vec<RankRecord>,
    pub diagnostics: Option<LowRankDiagnostics>,
    pub memory: MemoryReport,
    pub energy_grid: EnergyGrid,
    pub negativity: Negativity,
    pub profiles: Vec<Profile>,
    /// Largest relative negative undershoot of the ray-traced spectra.
    pub uncollided_undershoot: f64,
    pub elapsed: Duration,
}

impl RunResults {
    pub fn mean_rank(&self) -> f64 {
        if self.ranks.is_empty() {
            return 0.0;
        }
        self.ranks.iter().map(|r| r.rank as f64).sum::<f64>() / self.ranks.len() as f64
    }
}

/// Runs the sweep with the chosen collided solver. `observer` sees the state after every step.
pub fn simulate_with(
    prepared: &Prepared,
    kind: SolverKind,
    mut observer: impl FnMut(&RankRecord, &dyn CollidedSolver),
) -> AppResult<RunResults> {
    let start = Instant::now();
    let Prepared { problem, settings, data, .. } = prepared;
    let sim = Simulation::new(problem, settings, &data.stopping, &RayonRays)?;
    let grid = sim.energy_grid();
    let (n, m) = (sim.cells(), sim.moments());
    info!(
        "{}: {n} cells x {m} moments, {} steps of {:.4} MeV from {:.3} MeV, traced in {:.2?}",
        kind.name(),
        grid.steps,
        grid.step,
        grid.e_max,
        start.elapsed()
    );
    let every = (grid.steps / 10).max(1);
    let mut progress = |r: &RankRecord, s: &dyn CollidedSolver| {
        if r.step.is_multiple_of(every) || r.step == grid.steps {
            debug!("step {}/{} at {:.3} MeV, rank {}", r.step, grid.steps, r.energy_mev, r.rank);
        }
        observer(r, s);
    };
    let (out, diagnostics, memory) = match kind {
        SolverKind::LowRank => {
            let mut solver = LowRankSolver::new(n, m, settings.truncation, settings.truncate_after, settings.seed)?;
            let out = sim.run(&mut solver, |r, s| progress(r, s))?;
            let d = solver.diagnostics.clone();
            let memory =
                MemoryReport { peak_state: d.peak_memory, peak_augmented: d.peak_augmented_memory, full_rank: n * m };
            (out, Some(d), memory)
        }
        SolverKind::FullRank => {
            let mut solver = FullRankSolver::new(n, m);
            let out = sim.run(&mut solver, |r, s| progress(r, s))?;
            (out, None, MemoryReport { peak_state: n * m, peak_augmented: n * m, full_rank: n * m })
        }
    };
    let uncollided_undershoot = sim.uncollided().iter().map(|u| u.relative_undershoot()).fold(0.0, f64::max);
    let negativity = out.dose.negativity();
    let profiles = profiles(&prepared.config, &problem.beams, &out.dose);
    let results = RunResults {
        solver: kind,
        dose: out.dose,
        ranks: out.ranks,
        diagnostics,
        memory,
        energy_grid: grid,
        negativity,
        profiles,
        uncollided_undershoot,
        elapsed: start.elapsed(),
    };
    info!(
        "{} finished in {:.2?}: mean rank {:.2}, state memory {:.3}% of dense, {} negative cells (min {:.3e})",
        kind.name(),
        results.elapsed,
        results.mean_rank(),
        100.0 * results.memory.ratio(),
        results.negativity.count,
        results.negativity.min
    );
    Ok(results)
}

pub fn simulate(prepared: &Prepared, kind: SolverKind) -> AppResult<RunResults> {
    simulate_with(prepared, kind, |_, _| {})
}

/// Configured profiles, or one central-axis depth profile per beam when none are configured.
pub fn profiles(config: &ProblemConfig, beams: &[BeamSource], dose: &DoseGrid) -> Vec<Profile> {
    let values = dose.dose();
    let mut out = Vec::new();
    let depth: Vec<LineConfig> = if config.output.depth_profile.is_empty() {
        let h = dose.grid.spacing().iter().copied().fold(f64::INFINITY, f64::min);
        beams
            .iter()
            .map(|b| LineConfig {
                point_cm: std::array::from_fn(|d| b.entry[d] + 0.5 * h * b.direction[d]),
                axis: Axis::dominant(b.direction),
            })
            .collect()
    } else {
        config.output.depth_profile.clone()
    };
    for (k, line) in depth.iter().enumerate() {
        out.push(Profile { name: format!("depth_{k}"), coordinate: "depth_cm", points: depth_profile(dose, &values, line) });
    }
    for (k, line) in config.output.lateral_profile.iter().enumerate() {
        let a = line.axis.index();
        let points = dose
            .line_profile(&values, line.point_cm, a)
            .into_iter()
            .map(|(x, v)| (line.axis.sign() * (x - line.point_cm[a]), v))
            .collect::<Vec<_>>();
        let mut points = points;
        points.sort_by(|p, q| p.0.total_cmp(&q.0));
        out.push(Profile { name: format!("lateral_{k}"), coordinate: "lateral_cm", points });
    }
    out
}

/// Dose along a grid line; depth is measured from the face the signed axis enters through.
pub fn depth_profile(dose: &DoseGrid, values: &[f64], line: &LineConfig) -> Vec<(f64, f64)> {
    let a = line.axis.index();
    let lower = dose.grid.origin()[a];
    let upper = dose.grid.upper()[a];
    let mut points: Vec<(f64, f64)> = dose
        .line_profile(values, line.point_cm, a)
        .into_iter()
        .map(|(x, v)| (if line.axis.sign() > 0.0 { x - lower } else { upper - x }, v))
        .collect();
    points.sort_by(|p, q| p.0.total_cmp(&q.0));
    points
}

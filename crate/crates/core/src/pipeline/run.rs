use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::dose::DoseGrid;
use super::media::{ElementPhysics, Media};
use super::settings::{Problem, SolverSettings};
use super::solver::CollidedSolver;
use crate::angular::{CollisionDiagonal, FluxMatrices, PnBasis};
use crate::collided::{RemovalTerm, ScatteringContext, SourceTerm, StreamingContext};
use crate::constants::FOUR_PI;
use crate::math::{ceil, sqrt};
use crate::physics::StoppingPowers;
use crate::raytracer::{assemble_energy_operator, BlockTridiag, EnergyDgSpace, RaySpectra, UncollidedFlux};
use crate::spatial::UpwindStencils;
use crate::{Error, Result};

/// Largest number of energy groups the spectrum may travel in one march step.
pub const ENERGY_COURANT: f64 = 1.0;

/// Runs the independent per-ray marches of a bundle; implementations may parallelise
/// but must return the spectra in ray order.
pub trait RayExecutor {
    fn run(&self, count: usize, task: &(dyn Fn(usize) -> Result<RaySpectra> + Sync)) -> Result<Vec<RaySpectra>>;
}

/// Marches rays one after another.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialRays;

impl RayExecutor for SequentialRays {
    fn run(&self, count: usize, task: &(dyn Fn(usize) -> Result<RaySpectra> + Sync)) -> Result<Vec<RaySpectra>> {
        (0..count).map(task).collect()
    }
}

/// Uniform pseudo-time grid E_n = E_max − n ΔE, n = 0..=steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyGrid {
    pub e_max: f64,
    pub e_min: f64,
    pub step: f64,
    pub steps: usize,
}

impl EnergyGrid {
    pub fn energy(&self, n: usize) -> f64 {
        if n == self.steps {
            self.e_min
        } else {
            self.e_max - n as f64 * self.step
        }
    }
}

/// Rank after each pseudo-time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRecord {
    pub step: usize,
    pub energy_mev: f64,
    pub rank: usize,
}

/// Result of a pseudo-time sweep.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub dose: DoseGrid,
    pub ranks: Vec<RankRecord>,
}

/// Operator data of one pseudo-time step.
#[derive(Debug, Clone)]
pub struct StepData {
    pub inv_stopping: [Vec<f64>; 3],
    pub scattering: ScatteringContext,
}

/// Assembled problem: media, P_N operators, stencils, energy grid and the ray-traced
/// uncollided flux of every beam.
pub struct Simulation<'a> {
    problem: &'a Problem,
    settings: &'a SolverSettings,
    physics: ElementPhysics<'a>,
    media: Media,
    present: Vec<usize>,
    partial_density: Vec<Vec<f64>>,
    basis: PnBasis,
    flux: FluxMatrices,
    stencils: UpwindStencils,
    energy: EnergyGrid,
    space: EnergyDgSpace,
    uncollided: Vec<UncollidedFlux>,
    beam_moments: Vec<Vec<f64>>,
    uncollided_dose: Vec<f64>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        problem: &'a Problem,
        settings: &'a SolverSettings,
        stopping: &'a StoppingPowers,
        rays: &dyn RayExecutor,
    ) -> Result<Self> {
        problem.validate()?;
        settings.validate(problem.grid.len())?;
        let physics = ElementPhysics {
            stopping,
            scattering: &settings.scattering,
            model: settings.model,
            degree: settings.degree,
        };
        let media = Media::new(&problem.materials);
        let present = media.present_elements();
        let partial_density = present.iter().map(|&i| problem.materials.partial_density_column(i)).collect();
        let basis = PnBasis::new(settings.degree);
        let flux = FluxMatrices::new(&basis);
        let stencils = UpwindStencils::new(&problem.grid, settings.boundary)?;

        let e_max = problem.beams.iter().map(|b| b.max_energy()).fold(0.0, f64::max);
        let (table_lo, table_hi) = stopping.common_range();
        if settings.energy_min < table_lo || e_max > table_hi {
            return Err(Error::OutOfRange { quantity: "beam energy range (MeV)", value: e_max, min: table_lo, max: table_hi });
        }
        if !(e_max > settings.energy_min) {
            return Err(Error::Config(format!("beam energies must exceed energy_min_mev = {}", settings.energy_min)));
        }
        let energy = energy_grid(problem, settings, &physics, &media, &flux, e_max)?;
        let space = EnergyDgSpace::new(settings.energy_min, e_max, settings.energy_groups)?;

        let mut sim = Self {
            problem,
            settings,
            physics,
            media,
            present,
            partial_density,
            basis,
            flux,
            stencils,
            energy,
            space,
            uncollided: Vec::new(),
            beam_moments: Vec::new(),
            uncollided_dose: Vec::new(),
        };
        sim.trace_beams(rays)?;
        Ok(sim)
    }

    fn trace_beams(&mut self, rays: &dyn RayExecutor) -> Result<()> {
        let space = self.space;
        let element_ops: Vec<BlockTridiag> = self
            .present
            .iter()
            .map(|&i| assemble_energy_operator(&space, &self.physics.energy_coefficients(i)))
            .collect::<Result<_>>()?;
        let media_ops: Vec<BlockTridiag> = self
            .media
            .materials
            .iter()
            .map(|mat| {
                let mut op = BlockTridiag::zeros(space.groups());
                for (g, &i) in element_ops.iter().zip(&self.present) {
                    let rho = mat.partial_density(i);
                    if rho > 0.0 {
                        op.axpy(rho, g);
                    }
                }
                op
            })
            .collect();
        let max_step = self.march_step()?;
        let grid = &self.problem.grid;
        let cell_medium = &self.media.cell_medium;
        let lookup = |cell: usize| &media_ops[cell_medium[cell]];
        for (b, beam) in self.problem.beams.iter().enumerate() {
            let plan = self.settings.bundle.plan(beam, grid)?;
            let initial = space.project(|e| beam.spectrum(e));
            let task = |k: usize| plan.march_request(k, &space, grid, lookup, &initial, max_step);
            let spectra = rays.run(plan.requests().len(), &task).map_err(|e| e.with_context(&format!("beam {b}")))?;
            self.uncollided.push(plan.deposit(space.groups(), &spectra)?);
            self.beam_moments.push(self.basis.nodal_to_modal(beam.direction)?);
        }
        self.uncollided_dose = self.tally_uncollided()?;
        Ok(())
    }

    /// Depth step of the ray march: the configured maximum, shortened so that no medium
    /// moves the spectrum by more than `ENERGY_COURANT` groups per step. Crank–Nicolson
    /// does not damp the modes a larger energy Courant number excites.
    pub fn march_step(&self) -> Result<f64> {
        let mut s_max = 0.0f64;
        for mat in &self.media.materials {
            s_max = s_max.max(self.physics.stopping_power(mat, self.space.e_min())?);
            for g in 0..self.space.groups() {
                s_max = s_max.max(self.physics.stopping_power(mat, self.space.center(g))?);
            }
        }
        let limit = if s_max > 0.0 { ENERGY_COURANT * self.space.width() / s_max } else { f64::INFINITY };
        Ok(self.settings.max_march_step.min(limit))
    }

    /// ∫ S ψ_u dE over the groups plus E_min·S(E_min)·ψ_u(E_min) for protons reaching the cut-off.
    fn tally_uncollided(&self) -> Result<Vec<f64>> {
        let groups = self.space.groups();
        let h = self.space.width();
        let e_min = self.space.e_min();
        let mut per_medium = Vec::with_capacity(self.media.len());
        for mat in &self.media.materials {
            let s: Vec<f64> =
                (0..groups).map(|g| self.physics.stopping_power(mat, self.space.center(g))).collect::<Result<_>>()?;
            per_medium.push((s, self.physics.stopping_power(mat, e_min)?));
        }
        let n = self.problem.grid.len();
        let mut out = vec![0.0; n];
        for flux in &self.uncollided {
            for (cell, o) in out.iter_mut().enumerate() {
                let (s, s_min) = &per_medium[self.media.cell_medium[cell]];
                let spec = flux.spectrum(cell);
                *o += h * spec.iter().zip(s).map(|(p, s)| p * s).sum::<f64>() + e_min * s_min * flux.cutoff(cell);
            }
        }
        Ok(out)
    }

    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn settings(&self) -> &SolverSettings {
        self.settings
    }

    pub fn media(&self) -> &Media {
        &self.media
    }

    pub fn basis(&self) -> &PnBasis {
        &self.basis
    }

    pub fn flux(&self) -> &FluxMatrices {
        &self.flux
    }

    pub fn stencils(&self) -> &UpwindStencils {
        &self.stencils
    }

    pub fn energy_grid(&self) -> EnergyGrid {
        self.energy
    }

    pub fn energy_space(&self) -> EnergyDgSpace {
        self.space
    }

    pub fn uncollided(&self) -> &[UncollidedFlux] {
        &self.uncollided
    }

    pub fn uncollided_dose(&self) -> &[f64] {
        &self.uncollided_dose
    }

    pub fn cells(&self) -> usize {
        self.problem.grid.len()
    }

    pub fn moments(&self) -> usize {
        self.basis.len()
    }

    /// Operator data for step `n` (E_n → E_{n+1}).
    pub fn step_data(&self, n: usize) -> Result<StepData> {
        let (e0, e1) = (self.energy.energy(n), self.energy.energy(n + 1));
        let e_mid = 0.5 * (e0 + e1);
        let inv_stopping = [e0, e_mid, e1].map(|e| self.inv_stopping(e));
        let [a, b, c] = inv_stopping;
        let inv_stopping = [a?, b?, c?];
        let n_cells = self.cells();
        let m = self.moments();

        let mut removal = Vec::with_capacity(self.present.len());
        let mut in_scatter = Vec::with_capacity(self.present.len());
        for (k, &i) in self.present.iter().enumerate() {
            let rates = self.physics.collision(i, e1)?;
            removal.push(RemovalTerm {
                cell_weight: self.partial_density[k].iter().zip(&inv_stopping[2]).map(|(r, s)| r * s).collect(),
                moment_rate: CollisionDiagonal::expand(&rates.removal, &self.basis),
            });
            in_scatter.push(CollisionDiagonal::expand(&self.physics.collision(i, e_mid)?.in_scatter, &self.basis));
        }
        let cols = self.uncollided.len() * self.present.len();
        let mut cell = DMatrix::zeros(n_cells, cols);
        let mut moment = DMatrix::zeros(m, cols);
        let mut col = 0;
        for (flux, t_m) in self.uncollided.iter().zip(&self.beam_moments) {
            let avg: Vec<f64> = (0..n_cells).map(|j| self.interval_average(flux, j, e1, e0)).collect();
            for (k, g) in in_scatter.iter().enumerate() {
                for j in 0..n_cells {
                    cell[(j, col)] = self.partial_density[k][j] * avg[j];
                }
                for q in 0..m {
                    moment[(q, col)] = g[q] * t_m[q];
                }
                col += 1;
            }
        }
        Ok(StepData { inv_stopping, scattering: ScatteringContext { removal, source: SourceTerm { cell, moment } } })
    }

    fn inv_stopping(&self, e: f64) -> Result<Vec<f64>> {
        let per_medium: Vec<f64> = self
            .media
            .materials
            .iter()
            .map(|m| self.physics.stopping_power(m, e).map(|s| 1.0 / s))
            .collect::<Result<_>>()?;
        Ok(self.media.spread(&per_medium))
    }

    /// Mean of the group-averaged uncollided spectrum over [lo, hi].
    fn interval_average(&self, flux: &UncollidedFlux, cell: usize, lo: f64, hi: f64) -> f64 {
        let spec = flux.spectrum(cell);
        let mut acc = 0.0;
        for (g, v) in spec.iter().enumerate() {
            let (a, b) = self.space.bounds(g);
            let overlap = b.min(hi) - a.max(lo);
            if overlap > 0.0 {
                acc += overlap * v;
            }
        }
        acc / (hi - lo)
    }

    /// Advances `solver` over step `n`: streaming, then scattering (Lie splitting).
    pub fn advance<S: CollidedSolver + ?Sized>(&self, solver: &mut S, n: usize) -> Result<()> {
        let data = self.step_data(n)?;
        let ctx = StreamingContext {
            stencils: &self.stencils,
            flux: &self.flux,
            inv_stopping: [&data.inv_stopping[0], &data.inv_stopping[1], &data.inv_stopping[2]],
        };
        let dt = self.energy.step;
        let context = |e: Error| e.with_context(&format!("step {n} at {:.4} MeV", self.energy.energy(n)));
        solver.streaming(dt, &ctx).map_err(context)?;
        solver.scattering(dt, &data.scattering).map_err(context)?;
        Ok(())
    }

    /// Full pseudo-time sweep from E_max to E_min with dose accumulation.
    /// `observer` sees the solver after every step.
    pub fn run<S: CollidedSolver + ?Sized>(
        &self,
        solver: &mut S,
        mut observer: impl FnMut(&RankRecord, &S),
    ) -> Result<RunOutput> {
        let grid = self.problem.grid;
        let density = self.problem.materials.cells().iter().map(|c| c.density()).collect();
        let mut dose = DoseGrid::new(grid, density);
        dose.uncollided.copy_from_slice(&self.uncollided_dose);
        let norm = sqrt(FOUR_PI);
        let dt = self.energy.step;
        let mut ranks = Vec::with_capacity(self.energy.steps);
        let mut before = solver.scalar_moment();
        for n in 0..self.energy.steps {
            self.advance(solver, n)?;
            let after = solver.scalar_moment();
            for (d, (a, b)) in dose.collided.iter_mut().zip(before.iter().zip(after.iter())) {
                *d += 0.5 * dt * norm * (a + b);
            }
            before = after;
            let record = RankRecord { step: n + 1, energy_mev: self.energy.energy(n + 1), rank: solver.rank() };
            observer(&record, solver);
            ranks.push(record);
        }
        // Collided protons reaching the cut-off deposit their remaining energy locally.
        let e_min = self.energy.e_min;
        for (d, u) in dose.collided.iter_mut().zip(before.iter()) {
            *d += e_min * norm * u;
        }
        Ok(RunOutput { dose, ranks })
    }
}

/// ΔE = cfl · min Δ · min_cells S(E_max) / ρ(A), shrunk to divide the energy range evenly.
fn energy_grid(
    problem: &Problem,
    settings: &SolverSettings,
    physics: &ElementPhysics<'_>,
    media: &Media,
    flux: &FluxMatrices,
    e_max: f64,
) -> Result<EnergyGrid> {
    let range = e_max - settings.energy_min;
    let target = match settings.energy_step {
        Some(de) => de,
        None => {
            let mut s_min = f64::INFINITY;
            for m in &media.materials {
                s_min = s_min.min(physics.stopping_power(m, e_max)?);
            }
            settings.cfl * problem.grid.min_used_spacing() * s_min / flux.spectral_radius()
        }
    };
    let steps = (ceil(range / target) as usize).max(1);
    Ok(EnergyGrid { e_max, e_min: settings.energy_min, step: range / steps as f64, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlra::TruncationPolicy;
    use crate::physics::{CellMaterial, ElementId, MaterialField, ScatteringModel, StoppingPowerTable, NUM_ELEMENTS};
    use crate::pipeline::{FullRankSolver, LowRankSolver, TruncateAfter};
    use crate::raytracer::BeamSource;
    use crate::spatial::Grid3D;

    fn stopping() -> StoppingPowers {
        let energies: Vec<f64> = (0..40).map(|k| 0.5 * 1.2f64.powi(k)).collect();
        let values: Vec<f64> = energies.iter().map(|e| 250.0 * e.powf(-0.78)).collect();
        let table = StoppingPowerTable::new(energies, values).unwrap();
        StoppingPowers::new((0..NUM_ELEMENTS).map(|_| table.clone()).collect()).unwrap()
    }

    fn water() -> CellMaterial {
        let mut w = [0.0; NUM_ELEMENTS];
        w[ElementId::H.index()] = 0.111894;
        w[ElementId::O.index()] = 0.888106;
        CellMaterial::new(1.0, w).unwrap()
    }

    fn problem(weight: f64) -> Problem {
        let grid = Grid3D::new([9, 9, 32], [0.2, 0.2, 0.05], [0.0; 3]).unwrap();
        let materials = MaterialField::uniform(water(), grid.len());
        let beam = BeamSource::new([0.0, 0.0, 1.0], 30.0, [0.9, 0.9, 0.0], weight).unwrap();
        Problem { grid, materials, beams: vec![beam] }
    }

    fn settings() -> SolverSettings {
        SolverSettings {
            degree: 3,
            energy_groups: 64,
            truncation: TruncationPolicy { max_rank: 16, ..TruncationPolicy::default() },
            scattering: ScatteringModel { rutherford_prefactor: true, ..ScatteringModel::default() },
            ..SolverSettings::default()
        }
    }


    fn full_run(problem: &Problem, settings: &SolverSettings, sp: &StoppingPowers) -> RunOutput {
        let sim = Simulation::new(problem, settings, sp, &SequentialRays).unwrap();
        let mut solver = FullRankSolver::new(sim.cells(), sim.moments());
        sim.run(&mut solver, |_, _| {}).unwrap()
    }

    #[test]
    fn energy_grid_is_uniform_and_ends_at_cutoff() {
        let (p, s, sp) = (problem(1.0), settings(), stopping());
        let sim = Simulation::new(&p, &s, &sp, &SequentialRays).unwrap();
        let g = sim.energy_grid();
        assert!((g.e_max - 30.0 * 1.06).abs() < 1e-12);
        assert!((g.energy(g.steps - 1) - g.step - g.e_min).abs() < 1e-9);
        assert_eq!(g.energy(g.steps), s.energy_min);
    }

    #[test]
    fn zero_weight_beam_deposits_nothing() {
        let (p, s, sp) = (problem(0.0), settings(), stopping());
        let out = full_run(&p, &s, &sp);
        assert!(out.dose.energy().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dose_is_linear_in_beam_weight() {
        let (s, sp) = (settings(), stopping());
        let one = full_run(&problem(1.0), &s, &sp);
        let three = full_run(&problem(3.0), &s, &sp);
        let scale = one.dose.energy().iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in one.dose.energy().iter().zip(three.dose.energy().iter()) {
            assert!((3.0 * a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn deposited_energy_matches_beam_energy() {
        let (p, s, sp) = (problem(1.0), settings(), stopping());
        let out = full_run(&p, &s, &sp);
        let total = out.dose.total_energy();
        assert!(out.dose.collided.iter().any(|v| *v > 0.0));
        // The beam stops well inside the phantom; only the far lateral Gaussian tail leaks.
        assert!((total / 30.0 - 1.0).abs() < 0.03, "deposited {total} MeV of 30");
    }

    fn rank_gap(energy_step: f64) -> f64 {
        let (p, sp) = (problem(1.0), stopping());
        let mut s = settings();
        s.energy_step = Some(energy_step);
        s.truncation = TruncationPolicy { threshold: 1e-12, min_rank: 2, max_rank: 16 };
        let full = full_run(&p, &s, &sp);
        let sim = Simulation::new(&p, &s, &sp, &SequentialRays).unwrap();
        let mut solver =
            LowRankSolver::new(sim.cells(), sim.moments(), s.truncation, TruncateAfter::Both, s.seed).unwrap();
        let mut ranks = Vec::new();
        let low = sim.run(&mut solver, |r, _| ranks.push(r.rank)).unwrap();
        assert_eq!(ranks.len(), sim.energy_grid().steps);
        assert_eq!(solver.diagnostics.violations, 0);
        let scale = full.dose.collided.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let err = full.dose.collided.iter().zip(&low.dose.collided).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
        err / scale
    }

    #[test]
    fn low_rank_with_tight_tolerance_converges_to_full_rank() {
        // With nothing truncated the remaining gap is the splitting error of the
        // basis-update integrator, which vanishes with the step.
        let coarse = rank_gap(0.5);
        let fine = rank_gap(0.25);
        assert!(fine < 5e-4, "relative collided-dose gap {fine}");
        assert!(coarse > 1.5 * fine, "gap {coarse} -> {fine} does not shrink with the step");
    }
}

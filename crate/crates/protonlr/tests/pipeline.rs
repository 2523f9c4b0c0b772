use std::path::{Path, PathBuf};
use std::process::Command;

use protonlr::config::{Axis, LineConfig};
use protonlr::driver::depth_profile;
use protonlr::{prepare, simulate, Prepared, ProblemConfig, SolverKind};
use protonlr_core::physics::{CellMaterial, ElementId, MaterialField, StoppingPowerTable, StoppingPowers, NUM_ELEMENTS};
use protonlr_core::dlra::TruncationPolicy;
use protonlr_core::pipeline::{
    CollidedSolver, FullRankSolver, LowRankSolver, Problem, SequentialRays, Simulation, SolverSettings, TruncateAfter,
};
use protonlr_core::raytracer::{BeamSource, RayBundle};
use protonlr_core::spatial::Grid3D;

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn smoke() -> ProblemConfig {
    ProblemConfig::load(&repo().join("configs/smoke.toml")).unwrap()
}

fn relative_max_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn cli_run(config: &Path, out: &Path, envs: &[(&str, &Path)]) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_protonlr"));
    cmd.env("RUST_LOG", "warn").args(["run", config.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let status = cmd.status().unwrap();
    assert!(status.success());
}

#[test]
fn repeated_runs_write_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo().join("configs/smoke.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cli_run(&cfg, &a, &[]);
    cli_run(&cfg, &b, &[]);
    for f in ["depth_0.csv", "ranks.csv", "dose.vtk", "manifest.toml"] {
        let (x, y) = (std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap());
        assert!(x == y, "{f} differs between runs");
    }
}

#[test]
fn half_weight_beam_pair_equals_one_beam() {
    let one = smoke();
    let mut two = smoke();
    two.beams[0].weight = 0.5;
    two.beams.push(two.beams[0].clone());
    // The full-rank pipeline is linear in the source. Rank truncation is not: it rotates
    // within near-degenerate singular subspaces, so round-off differences in the source
    // survive at a level far below the truncation tolerance.
    for (kind, tol) in [(SolverKind::FullRank, 1e-10), (SolverKind::LowRank, 1e-6)] {
        let a = simulate(&prepare(&one).unwrap(), kind).unwrap();
        let b = simulate(&prepare(&two).unwrap(), kind).unwrap();
        let err = relative_max_diff(&b.dose.energy(), &a.dose.energy());
        assert!(err <= tol, "{}: {err:e}", kind.name());
    }
}

#[test]
fn beam_weight_scales_dose() {
    let one = smoke();
    let mut heavy = smoke();
    heavy.beams[0].weight = 2.5;
    let a = simulate(&prepare(&one).unwrap(), SolverKind::FullRank).unwrap();
    let b = simulate(&prepare(&heavy).unwrap(), SolverKind::FullRank).unwrap();
    let scaled: Vec<f64> = a.dose.energy().iter().map(|v| 2.5 * v).collect();
    assert!(relative_max_diff(&b.dose.energy(), &scaled) <= 1e-12);
}

#[test]
fn depth_profile_is_the_dose_column() {
    let cfg = smoke();
    let res = simulate(&prepare(&cfg).unwrap(), SolverKind::LowRank).unwrap();
    let dose = res.dose.dose();
    let grid = res.dose.grid;
    // Default profile: central axis of the only beam, entering at z = 0 through cell (4, 4).
    let profile = &res.profiles[0];
    assert_eq!(profile.coordinate, "depth_cm");
    assert_eq!(profile.points.len(), 8);
    for (k, &(depth, value)) in profile.points.iter().enumerate() {
        assert!((depth - (k as f64 + 0.5) * 0.1).abs() < 1e-12);
        assert_eq!(value, dose[grid.index(4, 4, k)]);
    }
    // Entering through the far face reverses the depth axis.
    let line = LineConfig { point_cm: [0.45, 0.45, 0.3], axis: Axis::NegZ };
    let reversed = depth_profile(&res.dose, &dose, &line);
    for (k, &(_, value)) in reversed.iter().enumerate() {
        assert_eq!(value, dose[grid.index(4, 4, 7 - k)]);
    }
}

fn manifest_tables(dir: &Path) -> toml::Table {
    let text = std::fs::read_to_string(dir.join("manifest.toml")).unwrap();
    text.parse::<toml::Table>().unwrap()["tables"].as_table().unwrap().clone()
}

fn copy_dir(from: &Path, to: &Path) {
    std::fs::create_dir_all(to).unwrap();
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            std::fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn manifest_checksums_track_table_contents() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    copy_dir(&repo().join("data"), &data);
    let cfg = repo().join("configs/smoke.toml");
    let env = [("PROTONLR_DATA_DIR", data.as_path())];

    cli_run(&cfg, &dir.path().join("bundled"), &[]);
    cli_run(&cfg, &dir.path().join("copy"), &env);
    let bundled = manifest_tables(&dir.path().join("bundled"));
    assert_eq!(bundled, manifest_tables(&dir.path().join("copy")));
    assert_eq!(bundled.len(), 14);

    // Perturb one stopping-power value of an element absent from water.
    let ar = data.join("stopping/Ar.csv");
    let text = std::fs::read_to_string(&ar).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let (e, s) = lines[10].split_once(',').unwrap();
    lines[10] = format!("{e},{}", s.trim().parse::<f64>().unwrap() * 1.001);
    std::fs::write(&ar, lines.join("\n") + "\n").unwrap();

    cli_run(&cfg, &dir.path().join("edited"), &env);
    let edited = manifest_tables(&dir.path().join("edited"));
    for (name, sum) in &bundled {
        if name == "stopping/Ar.csv" {
            assert_ne!(&edited[name], sum);
        } else {
            assert_eq!(&edited[name], sum, "{name}");
        }
    }
    // Identical physics: the dose volume is unchanged.
    let a = std::fs::read(dir.path().join("bundled/dose.vtk")).unwrap();
    let b = std::fs::read(dir.path().join("edited/dose.vtk")).unwrap();
    assert!(a == b);
}

fn water() -> CellMaterial {
    let mut w = [0.0; NUM_ELEMENTS];
    w[ElementId::H.index()] = 0.111894;
    w[ElementId::O.index()] = 0.888106;
    CellMaterial::new(1.0, w).unwrap()
}

#[test]
fn uncollided_energy_balance_with_constant_stopping() {
    // A single ray through a water column with S = 10 MeV/cm: a 30 MeV beam leaves
    // 2 cm later at 10 MeV and must deposit 20 MeV per unit weight.
    let s = 10.0;
    let energies: Vec<f64> = (0..50).map(|k| 0.5 * 1.2f64.powi(k)).collect();
    let table = StoppingPowerTable::new(energies.clone(), vec![s; energies.len()]).unwrap();
    let stopping = StoppingPowers::new(vec![table; NUM_ELEMENTS]).unwrap();
    let grid = Grid3D::new([1, 1, 40], [0.1, 0.1, 0.05], [0.0; 3]).unwrap();
    let weight = 2.0;
    let beam = BeamSource::new([0.0, 0.0, 1.0], 30.0, [0.05, 0.05, 0.0], weight).unwrap();
    let settings = SolverSettings {
        degree: 1,
        energy_groups: 256,
        // One ray whose lattice cell is exactly the 1 mm column.
        bundle: RayBundle { rays_per_axis: 1, extent_sigmas: 0.05 / beam.lateral_sigma },
        truncation: TruncationPolicy { max_rank: 4, ..Default::default() },
        ..SolverSettings::default()
    };
    let problem = Problem { grid, materials: MaterialField::uniform(water(), grid.len()), beams: vec![beam] };
    let sim = Simulation::new(&problem, &settings, &stopping, &SequentialRays).unwrap();
    let deposited: f64 = sim.uncollided_dose().iter().sum::<f64>() * grid.cell_volume();
    let expect = weight * s * 2.0;
    assert!((deposited / expect - 1.0).abs() < 0.01, "deposited {deposited} MeV, expected {expect}");
    // The beam never reaches the cut-off: nothing is tallied there.
    assert!(sim.uncollided().iter().all(|f| (0..grid.len()).all(|c| f.cutoff(c).abs() < 1e-9)));
}

#[test]
fn strong_scattering_low_rank_tracks_oracle() {
    // Physically sized Coulomb scattering raises the collided share of the dose by
    // orders of magnitude. ϑ bounds an absolute tail, so it is set against the small
    // collided state; the remaining gap is the integrator's splitting error.
    let mut cfg = smoke();
    cfg.physics.rutherford_prefactor = true;
    cfg.solver.energy_step_mev = Some(0.5);
    let plain = simulate(&prepare(&smoke()).unwrap(), SolverKind::FullRank).unwrap();
    let full = simulate(&prepare(&cfg).unwrap(), SolverKind::FullRank).unwrap();
    let share = |d: &protonlr_core::pipeline::DoseGrid| d.collided.iter().sum::<f64>() / d.energy().iter().sum::<f64>();
    assert!(share(&full.dose) > 10.0 * share(&plain.dose), "{} vs {}", share(&full.dose), share(&plain.dose));

    let mut gaps = Vec::new();
    for threshold in [1e-6, 1e-10] {
        cfg.solver.threshold = threshold;
        let low = simulate(&prepare(&cfg).unwrap(), SolverKind::LowRank).unwrap();
        let d = low.diagnostics.as_ref().unwrap();
        assert_eq!(d.violations, 0);
        assert!(d.max_orthonormality_deviation <= 1e-10);
        gaps.push(protonlr::compare::compare(&low.dose.collided, &full.dose.collided).relative_l2);
    }
    assert!(gaps[0] <= 0.02, "{gaps:?}");
    assert!(gaps[1] < 0.5 * gaps[0], "{gaps:?}");
}

/// Relative Frobenius gap between the rank-min(n, m) low-rank and the dense trajectory,
/// maximised over the first `steps` pseudo-time steps.
fn max_rank_gap(cfg: &ProblemConfig, steps: usize) -> f64 {
    let mut prepared = prepare(cfg).unwrap();
    let r = cfg.cells().min(cfg.moments());
    prepared.settings.truncation = TruncationPolicy { threshold: 0.0, min_rank: r, max_rank: r };
    let Prepared { problem, settings, data, .. } = &prepared;
    let sim = Simulation::new(problem, settings, &data.stopping, &SequentialRays).unwrap();
    let (n, m) = (sim.cells(), sim.moments());
    let mut low = LowRankSolver::new(n, m, settings.truncation, TruncateAfter::Both, settings.seed).unwrap();
    let mut full = FullRankSolver::new(n, m);
    let mut gap = 0.0f64;
    for step in 0..steps.min(sim.energy_grid().steps) {
        sim.advance(&mut low, step).unwrap();
        sim.advance(&mut full, step).unwrap();
        let (a, b) = (low.reconstruct(), full.reconstruct());
        gap = gap.max((a - &b).norm() / b.norm());
    }
    gap
}

#[test]
fn low_rank_is_exact_when_augmented_bases_span_the_cells() {
    // 27 cells and rank 16: the doubled bases cover every cell, so the Galerkin
    // coefficient step loses nothing. The beam enters the corner cell, whose collided
    // state is tiny in absolute terms.
    let mut cfg = smoke();
    cfg.grid.cells = [3, 3, 3];
    cfg.beams[0].entry_cm = [0.1, 0.1, 0.0];
    let gap = max_rank_gap(&cfg, usize::MAX);
    assert!(gap <= 1e-12, "{gap:e}");
}

#[test]
fn max_rank_gap_on_a_larger_grid_vanishes_with_the_energy_step() {
    // With more cells than basis columns, the coefficient step is a projection whose
    // error falls off at high order in the step size.
    let mut cfg = smoke();
    let coarse = max_rank_gap(&cfg, 4);
    cfg.solver.energy_step_mev = Some(0.25);
    let fine = max_rank_gap(&cfg, 4);
    assert!(fine < 1e-4 && fine < 1e-2 * coarse, "{coarse:e} {fine:e}");
}

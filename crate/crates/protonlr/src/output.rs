//! Result files: legacy-ASCII VTK volume, CSV profiles, rank history and run manifest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use protonlr_core::pipeline::RankRecord;
use protonlr_core::spatial::Grid3D;

use crate::config::ProblemConfig;
use crate::driver::{Profile, RunResults};
use crate::error::{AppError, AppResult};

pub const DOSE_FILE: &str = "dose.vtk";
pub const RANK_FILE: &str = "ranks.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";

/// Creates `dir` and proves it is writable, so a bad path fails before any compute.
pub fn ensure_writable(dir: &Path) -> AppResult<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    let probe = dir.join(".protonlr-write-test");
    fs::write(&probe, b"").map_err(|e| AppError::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| AppError::io(&probe, e))
}

/// Cell-data volume as stored in a VTK file.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkVolume {
    pub cells: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
    pub fields: BTreeMap<String, Vec<f64>>,
}

/// Writes cell-centred scalars as STRUCTURED_POINTS; the point lattice is the cell corners.
pub fn write_vtk(path: &Path, grid: &Grid3D, fields: &[(&str, &[f64])]) -> AppResult<()> {
    let c = grid.cells();
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nprotonlr dose\nASCII\nDATASET STRUCTURED_POINTS\n");
    let _ = writeln!(s, "DIMENSIONS {} {} {}", c[0] + 1, c[1] + 1, c[2] + 1);
    let [ox, oy, oz] = grid.origin();
    let [hx, hy, hz] = grid.spacing();
    let _ = writeln!(s, "ORIGIN {ox:e} {oy:e} {oz:e}");
    let _ = writeln!(s, "SPACING {hx:e} {hy:e} {hz:e}");
    let _ = writeln!(s, "CELL_DATA {}", grid.len());
    for (name, values) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in values.iter() {
            let _ = writeln!(s, "{v:.9e}");
        }
    }
    fs::write(path, s).map_err(|e| AppError::io(path, e))
}

pub fn read_vtk(path: &Path) -> AppResult<VtkVolume> {
    let text = fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
    let bad = |m: &str| AppError::format(path, m.to_string());
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if !lines.next().is_some_and(|l| l.starts_with("# vtk DataFile")) {
        return Err(bad("missing VTK header"));
    }
    let _title = lines.next();
    if lines.next() != Some("ASCII") || lines.next() != Some("DATASET STRUCTURED_POINTS") {
        return Err(bad("expected an ASCII STRUCTURED_POINTS dataset"));
    }
    let triple = |line: Option<&str>, key: &str| -> AppResult<[f64; 3]> {
        let line = line.ok_or_else(|| bad("truncated header"))?;
        let mut it = line.split_whitespace();
        if it.next() != Some(key) {
            return Err(bad(&format!("expected {key}")));
        }
        let v: Vec<f64> = it.map(|t| t.parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad(key))?;
        v.try_into().map_err(|_| bad(&format!("{key} needs three values")))
    };
    let dims = triple(lines.next(), "DIMENSIONS")?;
    let origin = triple(lines.next(), "ORIGIN")?;
    let spacing = triple(lines.next(), "SPACING")?;
    let cells = dims.map(|d| (d as usize).saturating_sub(1));
    let n: usize = cells.iter().product();
    let count = lines.next().and_then(|l| l.strip_prefix("CELL_DATA ")).and_then(|l| l.trim().parse::<usize>().ok());
    if count != Some(n) {
        return Err(bad("CELL_DATA count does not match DIMENSIONS"));
    }
    let mut fields = BTreeMap::new();
    while let Some(line) = lines.next() {
        let name = line
            .strip_prefix("SCALARS ")
            .and_then(|r| r.split_whitespace().next())
            .ok_or_else(|| bad("expected SCALARS"))?
            .to_string();
        if lines.next() != Some("LOOKUP_TABLE default") {
            return Err(bad("expected LOOKUP_TABLE default"));
        }
        let values = (0..n)
            .map(|_| lines.next().and_then(|l| l.parse::<f64>().ok()).ok_or_else(|| bad("truncated or bad scalar data")))
            .collect::<AppResult<Vec<f64>>>()?;
        fields.insert(name, values);
    }
    Ok(VtkVolume { cells, spacing, origin, fields })
}

pub fn write_profile(path: &Path, profile: &Profile) -> AppResult<()> {
    let mut s = format!("{},dose\n", profile.coordinate);
    for (x, v) in &profile.points {
        let _ = writeln!(s, "{x:.6},{v:.9e}");
    }
    fs::write(path, s).map_err(|e| AppError::io(path, e))
}

pub fn write_ranks(path: &Path, ranks: &[RankRecord]) -> AppResult<()> {
    let mut s = String::from("step,E_MeV,rank\n");
    for r in ranks {
        let _ = writeln!(s, "{},{:.9},{}", r.step, r.energy_mev, r.rank);
    }
    fs::write(path, s).map_err(|e| AppError::io(path, e))
}

/// Resolved config, table checksums and run summary. Carries no timings, so repeated
/// runs produce identical manifests.
pub fn manifest(config: &ProblemConfig, checksums: &BTreeMap<String, String>, results: &RunResults) -> String {
    let mut s = String::from("# protonlr run manifest\n");
    let _ = writeln!(s, "version = \"{}\"", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "solver = \"{}\"\n", results.solver.name());
    s.push_str("[tables]\n");
    for (file, digest) in checksums {
        let _ = writeln!(s, "\"{file}\" = \"sha256:{digest}\"");
    }
    let g = results.energy_grid;
    s.push_str("\n[summary]\n");
    let _ = writeln!(s, "energy_max_mev = {:e}", g.e_max);
    let _ = writeln!(s, "energy_step_mev = {:e}", g.step);
    let _ = writeln!(s, "steps = {}", g.steps);
    let _ = writeln!(s, "mean_rank = {:e}", results.mean_rank());
    let _ = writeln!(s, "peak_state_numbers = {}", results.memory.peak_state);
    let _ = writeln!(s, "peak_augmented_numbers = {}", results.memory.peak_augmented);
    let _ = writeln!(s, "dense_state_numbers = {}", results.memory.full_rank);
    let _ = writeln!(s, "memory_ratio = {:e}", results.memory.ratio());
    let _ = writeln!(s, "total_deposited_mev = {:e}", results.dose.total_energy());
    let _ = writeln!(s, "negative_cells = {}", results.negativity.count);
    let _ = writeln!(s, "min_deposited_mev_per_cm3 = {:e}", results.negativity.min);
    if let Some(d) = &results.diagnostics {
        let _ = writeln!(s, "truncation_violations = {}", d.violations);
        let _ = writeln!(s, "max_orthonormality_deviation = {:e}", d.max_orthonormality_deviation);
    }
    s.push_str("\n# resolved configuration\n[config]\n");
    // Nest the config tables under [config.*].
    for line in config.to_toml().lines() {
        if let Some(rest) = line.strip_prefix("[[") {
            let _ = writeln!(s, "[[config.{rest}");
        } else if let Some(rest) = line.strip_prefix('[') {
            let _ = writeln!(s, "[config.{rest}");
        } else {
            s.push_str(line);
            s.push('\n');
        }
    }
    s
}

/// Writes every output file into `dir` and returns their paths.
pub fn write_outputs(
    dir: &Path,
    config: &ProblemConfig,
    checksums: &BTreeMap<String, String>,
    results: &RunResults,
) -> AppResult<Vec<PathBuf>> {
    ensure_writable(dir)?;
    let mut files = Vec::new();
    let dose = results.dose.dose();
    let energy = results.dose.energy();
    let path = dir.join(DOSE_FILE);
    write_vtk(&path, &results.dose.grid, &[("dose", &dose), ("deposited_energy", &energy)])?;
    files.push(path);
    for p in &results.profiles {
        let path = dir.join(format!("{}.csv", p.name));
        write_profile(&path, p)?;
        files.push(path);
    }
    let path = dir.join(RANK_FILE);
    write_ranks(&path, &results.ranks)?;
    files.push(path);
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, manifest(config, checksums, results)).map_err(|e| AppError::io(&path, e))?;
    files.push(path);
    Ok(files)
}

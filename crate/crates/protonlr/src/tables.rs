//! Physics data on disk: per-element stopping-power CSVs and the HU conversion tables.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use protonlr_core::physics::{
    straggling_t, CellMaterial, CompositionBin, DensitySection, ElementId, SchneiderConversion, ScatteringModel,
    StoppingPowerTable, StoppingPowers, NUM_ELEMENTS,
};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{AppError, AppResult};

/// Environment variable overriding the data directory.
pub const DATA_DIR_ENV: &str = "PROTONLR_DATA_DIR";

/// Largest tolerated deviation of a composition row from 100 %.
const COMPOSITION_SUM_TOL_PERCENT: f64 = 0.1;

/// Data directory shipped with the sources.
pub fn bundled_data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Data directory: the environment override, else `configured`, else the bundled tables.
pub fn resolve_data_dir(configured: Option<&Path>) -> PathBuf {
    match std::env::var_os(DATA_DIR_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => configured.map(Path::to_path_buf).unwrap_or_else(bundled_data_dir),
    }
}

/// All tables a run needs, with the SHA-256 of every file read.
#[derive(Debug, Clone)]
pub struct PhysicsData {
    pub dir: PathBuf,
    pub stopping: StoppingPowers,
    pub schneider: SchneiderConversion,
    /// File name relative to `dir` → hex digest.
    pub checksums: BTreeMap<String, String>,
}

impl PhysicsData {
    pub fn load(dir: &Path) -> AppResult<Self> {
        let mut checksums = BTreeMap::new();
        let mut tables = Vec::with_capacity(NUM_ELEMENTS);
        for id in ElementId::ALL {
            let rel = format!("stopping/{}.csv", id.data().symbol);
            let text = read_tracked(dir, &rel, &mut checksums)?;
            tables.push(parse_stopping(&dir.join(&rel), &text)?);
        }
        let stopping = StoppingPowers::new(tables)?;
        let density = read_tracked(dir, "schneider/density.csv", &mut checksums)?;
        let composition = read_tracked(dir, "schneider/composition.csv", &mut checksums)?;
        let schneider = SchneiderConversion::new(
            parse_density(&dir.join("schneider/density.csv"), &density)?,
            parse_composition(&dir.join("schneider/composition.csv"), &composition)?,
        )?;
        Ok(Self { dir: dir.to_path_buf(), stopping, schneider, checksums })
    }
}

fn read_tracked(dir: &Path, rel: &str, checksums: &mut BTreeMap<String, String>) -> AppResult<String> {
    let path = dir.join(rel);
    let bytes = fs::read(&path).map_err(|e| AppError::io(&path, e))?;
    checksums.insert(rel.to_string(), sha256_hex(&bytes));
    String::from_utf8(bytes).map_err(|_| AppError::format(&path, "not valid UTF-8"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_rows<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> AppResult<Vec<T>> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| AppError::format(path, e.to_string()))
}

fn expect_header(path: &Path, text: &str, expected: &[&str]) -> AppResult<()> {
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    if header != expected {
        return Err(AppError::format(path, format!("expected header {}, found {}", expected.join(","), header.join(","))));
    }
    Ok(())
}

#[derive(Deserialize)]
struct StoppingRow {
    #[serde(rename = "E_MeV")]
    energy: f64,
    #[serde(rename = "S_MeV_cm2_per_g")]
    stopping: f64,
}

pub fn parse_stopping(path: &Path, text: &str) -> AppResult<StoppingPowerTable> {
    expect_header(path, text, &["E_MeV", "S_MeV_cm2_per_g"])?;
    let rows: Vec<StoppingRow> = csv_rows(path, text)?;
    let (e, s) = rows.into_iter().map(|r| (r.energy, r.stopping)).unzip();
    StoppingPowerTable::new(e, s).map_err(|err| AppError::format(path, err.to_string()))
}

#[derive(Deserialize)]
struct DensityRow {
    hu_min: f64,
    hu_max: f64,
    offset_g_cm3: f64,
    factor_g_cm3_per_hu: f64,
    factor_offset_hu: f64,
}

pub fn parse_density(path: &Path, text: &str) -> AppResult<Vec<DensitySection>> {
    let rows: Vec<DensityRow> = csv_rows(path, text)?;
    Ok(rows
        .into_iter()
        .map(|r| DensitySection {
            hu_min: r.hu_min,
            hu_max: r.hu_max,
            offset: r.offset_g_cm3,
            factor: r.factor_g_cm3_per_hu,
            factor_offset: r.factor_offset_hu,
        })
        .collect())
}

/// Composition rows in percent, one column per base element (`H_percent`, ...).
/// Rows are renormalised; a raw sum further than 0.1 % from 100 % is rejected.
pub fn parse_composition(path: &Path, text: &str) -> AppResult<Vec<CompositionBin>> {
    let mut expected = vec!["hu_min".to_string(), "hu_max".to_string()];
    expected.extend(ElementId::ALL.iter().map(|id| format!("{}_percent", id.data().symbol)));
    expect_header(path, text, &expected.iter().map(String::as_str).collect::<Vec<_>>())?;
    let rows: Vec<Vec<f64>> = csv_rows(path, text)?;
    rows.into_iter()
        .enumerate()
        .map(|(k, row)| {
            let mut weights = [0.0; NUM_ELEMENTS];
            weights.copy_from_slice(&row[2..]);
            let sum: f64 = weights.iter().sum();
            if (sum - 100.0).abs() > COMPOSITION_SUM_TOL_PERCENT {
                return Err(AppError::format(path, format!("row {}: composition sums to {sum} %", k + 1)));
            }
            weights.iter_mut().for_each(|w| *w /= sum);
            Ok(CompositionBin { hu_min: row[0], hu_max: row[1], weights })
        })
        .collect()
}

/// Outcome of one data invariant.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Invariant suite over loaded tables, for the energy window `[e_min, e_max]` MeV.
pub fn check_tables(data: &PhysicsData, e_min: f64, e_max: f64) -> Vec<Check> {
    let mut out = Vec::new();
    let (lo, hi) = data.stopping.common_range();
    out.push(Check::new(
        "stopping tables cover the energy window",
        lo <= e_min && hi >= e_max,
        format!("common range [{lo}, {hi}] MeV vs [{e_min}, {e_max}]"),
    ));
    for id in ElementId::ALL {
        let t = data.stopping.table(id);
        let falling = t
            .energies()
            .iter()
            .zip(t.values())
            .filter(|(e, _)| **e >= e_min)
            .map(|(_, s)| *s)
            .collect::<Vec<_>>()
            .windows(2)
            .all(|w| w[1] < w[0]);
        out.push(Check::new(
            format!("{} stopping power decreases above {e_min} MeV", id.data().symbol),
            falling,
            format!("{} rows", t.energies().len()),
        ));
    }
    let (hu_lo, hu_hi) = data.schneider.hu_range();
    out.push(Check::new(
        "HU conversion covers air to dense bone",
        hu_lo <= -1000.0 && hu_hi >= 2000.0,
        format!("[{hu_lo}, {hu_hi}] HU"),
    ));
    let water = data.schneider.hu_to_material(0.0);
    out.push(match &water {
        Ok(m) => Check::new(
            "0 HU maps to water-like density",
            (m.density() - 1.0).abs() < 0.05,
            format!("{:.4} g/cm3", m.density()),
        ),
        Err(e) => Check::new("0 HU maps to water-like density", false, e.to_string()),
    });
    let model = ScatteringModel::default();
    let mut straggling_ok = true;
    let mut scattering_ok = true;
    let mut detail = String::new();
    for bin in data.schneider.composition_bins() {
        let hu = 0.5 * (bin.hu_min + bin.hu_max);
        let Ok(mat) = data.schneider.hu_to_material(hu) else { continue };
        for e in [e_min, 0.5 * (e_min + e_max), e_max] {
            if let Err(err) = straggling_t(&mat, e) {
                straggling_ok = false;
                detail = format!("{hu} HU at {e} MeV: {err}");
            }
        }
        for (i, _) in mat.weights().iter().enumerate().filter(|(_, w)| **w > 0.0) {
            match model.moments_per_gram(i, e_max, 2) {
                Ok(m) if m.total() > 0.0 && m.xi1() > 0.0 => {}
                Ok(m) => {
                    scattering_ok = false;
                    detail = format!("element {i}: g0 = {}, xi1 = {}", m.total(), m.xi1());
                }
                Err(err) => {
                    scattering_ok = false;
                    detail = err.to_string();
                }
            }
        }
    }
    out.push(Check::new("straggling valid for every tissue bin", straggling_ok, detail.clone()));
    out.push(Check::new("scattering moments positive for every element", scattering_ok, detail));
    if let Ok(water) = water {
        out.push(csda_check(data, &water, e_min));
    }
    out
}

fn csda_check(data: &PhysicsData, water: &CellMaterial, e_min: f64) -> Check {
    match data.stopping.csda_range(water, e_min, 100.0) {
        // Water: ~7.7 g/cm² at 100 MeV.
        Ok(r) => Check::new(
            "CSDA range of 100 MeV in water is plausible",
            (6.5..9.0).contains(&(r * water.density())),
            format!("{:.3} cm", r),
        ),
        Err(e) => Check::new("CSDA range of 100 MeV in water is plausible", false, e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_load_and_pass_checks() {
        let data = PhysicsData::load(&bundled_data_dir()).unwrap();
        assert_eq!(data.checksums.len(), NUM_ELEMENTS + 2);
        for c in check_tables(&data, 1.0, 250.0) {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn header_is_enforced() {
        let err = parse_stopping(Path::new("x.csv"), "E,S\n1,2\n2,1\n").unwrap_err();
        assert!(err.to_string().contains("expected header"));
    }

    #[test]
    fn composition_rows_are_renormalised() {
        let mut text = String::from("hu_min,hu_max");
        for id in ElementId::ALL {
            text += &format!(",{}_percent", id.data().symbol);
        }
        text += "\n-10,10,11.2,0,0,88.85,0,0,0,0,0,0,0,0\n";
        let bins = parse_composition(Path::new("c.csv"), &text).unwrap();
        assert!((bins[0].weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let bad = text.replace("88.85", "80");
        assert!(parse_composition(Path::new("c.csv"), &bad).is_err());
    }

    #[test]
    fn checksum_is_stable_and_sensitive() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert_ne!(sha256_hex(b"abc"), sha256_hex(b"abd"));
    }
}

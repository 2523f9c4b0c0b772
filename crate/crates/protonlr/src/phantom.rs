//! HU volumes: analytic box phantoms and a minimal binary volume format.
//!
//! Volume file layout (little endian): magic `PLRV`, `u32` cell counts `nx ny nz`,
//! then `nx·ny·nz` `f32` HU values with x fastest.

use std::fs;
use std::path::Path;

use protonlr_core::physics::{MaterialField, SchneiderConversion};
use protonlr_core::spatial::Grid3D;

use crate::config::PhantomConfig;
use crate::error::{AppError, AppResult};

const MAGIC: &[u8; 4] = b"PLRV";

/// HU per cell, indexed like the grid.
pub fn hu_volume(phantom: &PhantomConfig, grid: &Grid3D) -> AppResult<Vec<f64>> {
    if let Some(path) = &phantom.volume {
        let (cells, hu) = read_volume(path)?;
        if cells != grid.cells() {
            return Err(AppError::format(
                path,
                format!("volume has {cells:?} cells but the grid has {:?}", grid.cells()),
            ));
        }
        return Ok(hu);
    }
    let mut hu = vec![phantom.background_hu; grid.len()];
    for b in &phantom.boxes {
        for (idx, v) in hu.iter_mut().enumerate() {
            let c = grid.center(idx);
            if (0..3).all(|d| c[d] >= b.min_cm[d] && c[d] < b.max_cm[d]) {
                *v = b.hu;
            }
        }
    }
    Ok(hu)
}

pub fn materials(hu: &[f64], schneider: &SchneiderConversion) -> AppResult<MaterialField> {
    let cells = hu.iter().map(|&h| schneider.hu_to_material(h)).collect::<Result<Vec<_>, _>>()?;
    Ok(MaterialField::new(cells))
}

pub fn write_volume(path: &Path, cells: [usize; 3], hu: &[f64]) -> AppResult<()> {
    let mut bytes = Vec::with_capacity(16 + 4 * hu.len());
    bytes.extend_from_slice(MAGIC);
    for c in cells {
        let c = u32::try_from(c).map_err(|_| AppError::format(path, "cell count exceeds u32"))?;
        bytes.extend_from_slice(&c.to_le_bytes());
    }
    for &v in hu {
        bytes.extend_from_slice(&(v as f32).to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| AppError::io(path, e))
}

pub fn read_volume(path: &Path) -> AppResult<([usize; 3], Vec<f64>)> {
    let bytes = fs::read(path).map_err(|e| AppError::io(path, e))?;
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(AppError::format(path, "not a PLRV volume file"));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap()) as usize;
    let cells = [word(0), word(1), word(2)];
    let n = cells.iter().product::<usize>();
    let body = &bytes[16..];
    if body.len() != 4 * n {
        return Err(AppError::format(path, format!("expected {n} HU values, found {} bytes", body.len())));
    }
    let hu = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect();
    Ok((cells, hu))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BoxConfig;

    #[test]
    fn boxes_are_composited_in_order() {
        let grid = Grid3D::new([4, 1, 1], [1.0; 3], [0.0; 3]).unwrap();
        let phantom = PhantomConfig {
            background_hu: 0.0,
            boxes: vec![
                BoxConfig { min_cm: [1.0, 0.0, 0.0], max_cm: [4.0, 1.0, 1.0], hu: -400.0 },
                BoxConfig { min_cm: [2.0, 0.0, 0.0], max_cm: [3.0, 1.0, 1.0], hu: 800.0 },
            ],
            volume: None,
        };
        assert_eq!(hu_volume(&phantom, &grid).unwrap(), vec![0.0, -400.0, 800.0, -400.0]);
    }

    #[test]
    fn volume_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.plrv");
        let hu = vec![-1000.0, 0.0, 40.5, 1200.0, 3.0, -7.25];
        write_volume(&path, [3, 2, 1], &hu).unwrap();
        let (cells, back) = read_volume(&path).unwrap();
        assert_eq!(cells, [3, 2, 1]);
        assert_eq!(back, hu);
        let grid = Grid3D::new([3, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
        let phantom = PhantomConfig { volume: Some(path), ..PhantomConfig::default() };
        assert!(hu_volume(&phantom, &grid).is_err());
    }
}

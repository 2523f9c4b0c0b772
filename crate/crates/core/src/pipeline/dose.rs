use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::raytracer::BeamSource;
use crate::spatial::Grid3D;

/// Deposited energy per cell, split into collided and uncollided parts.
#[derive(Debug, Clone, PartialEq)]
pub struct DoseGrid {
    pub grid: Grid3D,
    /// Mass density per cell (g/cm³).
    pub density: Vec<f64>,
    /// Energy deposited by uncollided protons (MeV/cm³).
    pub uncollided: Vec<f64>,
    /// Energy deposited by collided protons (MeV/cm³).
    pub collided: Vec<f64>,
}

/// Most negative value and number of negative cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Negativity {
    pub min: f64,
    pub count: usize,
}

/// One point of a depth–dose curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthPoint {
    pub depth_cm: f64,
    /// Energy deposited in the layer (MeV).
    pub value: f64,
}

impl DoseGrid {
    pub fn new(grid: Grid3D, density: Vec<f64>) -> Self {
        let n = grid.len();
        Self { grid, density, uncollided: vec![0.0; n], collided: vec![0.0; n] }
    }

    /// Total deposited energy density (MeV/cm³).
    pub fn energy(&self) -> Vec<f64> {
        self.uncollided.iter().zip(&self.collided).map(|(a, b)| a + b).collect()
    }

    /// Deposited energy per mass (MeV/g), proportional to dose.
    pub fn dose(&self) -> Vec<f64> {
        self.energy().iter().zip(&self.density).map(|(e, rho)| e / rho).collect()
    }

    /// Integral of the deposited energy over the domain (MeV).
    pub fn total_energy(&self) -> f64 {
        self.energy().iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn negativity(&self) -> Negativity {
        let e = self.energy();
        Negativity {
            min: e.iter().copied().fold(0.0, f64::min),
            count: e.iter().filter(|v| **v < 0.0).count(),
        }
    }

    /// Depth–dose curve along the dominant axis of `beam`: per layer, the deposited
    /// energy of cells within `radius` (cm) of the beam axis (all cells if `None`).
    /// Depth is the distance of the layer centre from the entry point along that axis.
    pub fn depth_dose(&self, beam: &BeamSource, radius: Option<f64>) -> Vec<DepthPoint> {
        let (axis, sign) = dominant_axis(beam.direction);
        let cells = self.grid.cells();
        let mut values = vec![0.0; cells[axis]];
        let energy = self.energy();
        let vol = self.grid.cell_volume();
        for (idx, e) in energy.iter().enumerate() {
            if let Some(r) = radius {
                if lateral_distance(beam, self.grid.center(idx)) > r {
                    continue;
                }
            }
            values[self.grid.coords(idx)[axis]] += e * vol;
        }
        let origin = self.grid.origin()[axis];
        let h = self.grid.spacing()[axis];
        let mut out: Vec<DepthPoint> = values
            .iter()
            .enumerate()
            .map(|(l, &value)| {
                let centre = origin + (l as f64 + 0.5) * h;
                DepthPoint { depth_cm: (centre - beam.entry[axis]) * sign, value }
            })
            .collect();
        out.sort_by(|a, b| a.depth_cm.total_cmp(&b.depth_cm));
        out
    }

    /// Depth of the maximum of [`depth_dose`](Self::depth_dose).
    pub fn bragg_peak_depth(&self, beam: &BeamSource, radius: Option<f64>) -> f64 {
        let curve = self.depth_dose(beam, radius);
        curve
            .iter()
            .fold((f64::NAN, f64::NEG_INFINITY), |acc, p| if p.value > acc.1 { (p.depth_cm, p.value) } else { acc })
            .0
    }

    /// Values along the grid line through the cell containing `point`, along `axis`.
    pub fn line_profile(&self, values: &[f64], point: [f64; 3], axis: usize) -> Vec<(f64, f64)> {
        let Some(c) = self.grid.locate(point) else { return Vec::new() };
        let (o, h) = (self.grid.origin()[axis], self.grid.spacing()[axis]);
        (0..self.grid.cells()[axis])
            .map(|l| {
                let mut cc = c;
                cc[axis] = l;
                (o + (l as f64 + 0.5) * h, values[self.grid.index(cc[0], cc[1], cc[2])])
            })
            .collect()
    }
}

/// Index and sign of the largest direction component.
pub fn dominant_axis(dir: [f64; 3]) -> (usize, f64) {
    let mut axis = 0;
    for d in 1..3 {
        if dir[d].abs() > dir[axis].abs() {
            axis = d;
        }
    }
    (axis, if dir[axis] >= 0.0 { 1.0 } else { -1.0 })
}

fn lateral_distance(beam: &BeamSource, x: [f64; 3]) -> f64 {
    let r: [f64; 3] = core::array::from_fn(|d| x[d] - beam.entry[d]);
    let t: f64 = (0..3).map(|d| r[d] * beam.direction[d]).sum();
    sqrt((0..3).map(|d| {
        let q = r[d] - t * beam.direction[d];
        q * q
    }).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_dose_of_downward_beam() {
        let grid = Grid3D::new([3, 4, 3], [1.0; 3], [0.0; 3]).unwrap();
        let mut dose = DoseGrid::new(grid, vec![1.0; grid.len()]);
        for idx in 0..grid.len() {
            dose.uncollided[idx] = grid.coords(idx)[1] as f64;
        }
        let beam = BeamSource::new([0.0, -1.0, 0.0], 50.0, [1.5, 4.0, 1.5], 1.0).unwrap();
        let curve = dose.depth_dose(&beam, None);
        assert_eq!(curve.len(), 4);
        assert!((curve[0].depth_cm - 0.5).abs() < 1e-15);
        assert!((curve[0].value - 27.0).abs() < 1e-12);
        assert!((dose.bragg_peak_depth(&beam, None) - 0.5).abs() < 1e-15);
        let narrow = dose.depth_dose(&beam, Some(0.1));
        assert!((narrow[0].value - 3.0).abs() < 1e-12);
        assert_eq!(dose.negativity(), Negativity { min: 0.0, count: 0 });
    }

    #[test]
    fn line_profile_matches_indexing() {
        let grid = Grid3D::new([4, 2, 2], [0.5; 3], [0.0; 3]).unwrap();
        let values: Vec<f64> = (0..grid.len()).map(|i| i as f64).collect();
        let dose = DoseGrid::new(grid, vec![1.0; grid.len()]);
        let line = dose.line_profile(&values, [0.1, 0.6, 0.2], 0);
        for (i, (_, v)) in line.iter().enumerate() {
            assert_eq!(*v, values[grid.index(i, 1, 0)]);
        }
    }
}

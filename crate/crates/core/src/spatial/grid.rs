use alloc::format;

use crate::math::floor;
use crate::{Error, Result};

/// Cell-centred structured grid. Flat index `i + n_x (j + n_y k)`, 0-based.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid3D {
    cells: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

const AXES: [&str; 3] = ["x", "y", "z"];

impl Grid3D {
    pub fn new(cells: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        for d in 0..3 {
            if cells[d] == 0 {
                return Err(Error::Config(format!("grid needs at least one cell along {}", AXES[d])));
            }
            if !(spacing[d] > 0.0 && spacing[d].is_finite()) {
                return Err(Error::Config(format!("spacing along {} must be positive, got {}", AXES[d], spacing[d])));
            }
            if !origin[d].is_finite() {
                return Err(Error::Config(format!("origin along {} is not finite", AXES[d])));
            }
        }
        Ok(Self { cells, spacing, origin })
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.cells[0] * self.cells[1] * self.cells[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Upper corner of the domain.
    pub fn upper(&self) -> [f64; 3] {
        core::array::from_fn(|d| self.origin[d] + self.cells[d] as f64 * self.spacing[d])
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Axes with more than one cell.
    pub fn is_used(&self, d: usize) -> bool {
        self.cells[d] > 1
    }

    /// Smallest spacing over the used axes (all axes if none is used).
    pub fn min_used_spacing(&self) -> f64 {
        let used = (0..3).filter(|&d| self.is_used(d)).map(|d| self.spacing[d]);
        let min = used.fold(f64::INFINITY, f64::min);
        if min.is_finite() {
            min
        } else {
            self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
        }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.cells[0] * (j + self.cells[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let i = idx % self.cells[0];
        let rest = idx / self.cells[0];
        [i, rest % self.cells[1], rest / self.cells[1]]
    }

    pub fn center(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        core::array::from_fn(|d| self.origin[d] + (c[d] as f64 + 0.5) * self.spacing[d])
    }

    /// Cell containing `point`; points on the upper boundary belong to the last cell.
    pub fn locate(&self, point: [f64; 3]) -> Option<[usize; 3]> {
        let mut out = [0; 3];
        for d in 0..3 {
            let t = (point[d] - self.origin[d]) / self.spacing[d];
            if !(t >= 0.0 && t <= self.cells[d] as f64) {
                return None;
            }
            out[d] = (floor(t) as usize).min(self.cells[d] - 1);
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_spacing() {
        assert!(Grid3D::new([2, 2, 2], [0.1, 0.0, 0.1], [0.0; 3]).is_err());
        assert!(Grid3D::new([0, 2, 2], [0.1; 3], [0.0; 3]).is_err());
    }

    #[test]
    fn centers_and_locate() {
        let g = Grid3D::new([4, 3, 2], [0.5, 1.0, 2.0], [-1.0, 0.0, 0.0]).unwrap();
        let idx = g.index(1, 2, 1);
        assert_eq!(g.center(idx), [-0.25, 2.5, 3.0]);
        assert_eq!(g.locate([-0.25, 2.5, 3.0]), Some([1, 2, 1]));
        assert_eq!(g.locate([1.0, 3.0, 4.0]), Some([3, 2, 1]));
        assert_eq!(g.locate([1.01, 0.0, 0.0]), None);
    }

    proptest! {
        #[test]
        fn index_is_bijective(nx in 1usize..6, ny in 1usize..6, nz in 1usize..6) {
            let g = Grid3D::new([nx, ny, nz], [1.0; 3], [0.0; 3]).unwrap();
            let mut seen = alloc::vec![false; g.len()];
            for k in 0..nz { for j in 0..ny { for i in 0..nx {
                let idx = g.index(i, j, k);
                prop_assert!(!seen[idx]);
                seen[idx] = true;
                prop_assert_eq!(g.coords(idx), [i, j, k]);
            }}}
        }
    }
}

use alloc::format;
use alloc::vec::Vec;

use super::grid::Grid3D;
use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Closure of the difference stencils at the domain faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Zero ghost values on inflow faces; first-order differences on the two
    /// cell layers next to the inflow face.
    #[default]
    Vacuum,
    /// Wrap-around indexing (used for verification).
    Periodic,
}

/// Second-order upwind derivative matrices per axis.
///
/// `plus[d]` is biased towards lower indices and serves characteristics moving
/// in +d (positive eigenvalues); `minus[d]` is biased towards higher indices.
#[derive(Debug, Clone)]
pub struct UpwindStencils {
    pub plus: [CsrMatrix; 3],
    pub minus: [CsrMatrix; 3],
    pub boundary: Boundary,
}

impl UpwindStencils {
    pub fn new(grid: &Grid3D, boundary: Boundary) -> Result<Self> {
        let n = grid.len();
        let cells = grid.cells();
        let mut plus: [CsrMatrix; 3] = core::array::from_fn(|_| CsrMatrix::zeros(n, n));
        let mut minus: [CsrMatrix; 3] = core::array::from_fn(|_| CsrMatrix::zeros(n, n));
        for d in 0..3 {
            if !grid.is_used(d) {
                continue;
            }
            if cells[d] < 3 {
                return Err(Error::Config(format!(
                    "axis {} has {} cells; the upwind stencil needs at least 3 (or exactly 1 to leave the axis unused)",
                    ["x", "y", "z"][d],
                    cells[d]
                )));
            }
            let h = grid.spacing()[d];
            let mut rows_p: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
            let mut rows_m: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
            for idx in 0..n {
                let c = grid.coords(idx);
                let shifted = |offset: isize| -> Option<usize> {
                    let len = cells[d] as isize;
                    let mut pos = c[d] as isize + offset;
                    match boundary {
                        Boundary::Periodic => pos = pos.rem_euclid(len),
                        Boundary::Vacuum if pos < 0 || pos >= len => return None,
                        Boundary::Vacuum => {}
                    }
                    let mut cc = c;
                    cc[d] = pos as usize;
                    Some(grid.index(cc[0], cc[1], cc[2]))
                };
                rows_p.push(one_sided(idx, &shifted, -1, h, boundary));
                rows_m.push(one_sided(idx, &shifted, 1, h, boundary));
            }
            plus[d] = CsrMatrix::from_rows(n, &rows_p);
            minus[d] = CsrMatrix::from_rows(n, &rows_m);
        }
        Ok(Self { plus, minus, boundary })
    }
}

/// Row of the derivative stencil reaching into direction `dir` (−1: backward, +1: forward).
fn one_sided(
    idx: usize,
    shifted: &dyn Fn(isize) -> Option<usize>,
    dir: isize,
    h: f64,
    boundary: Boundary,
) -> Vec<(usize, f64)> {
    // Derivative sign: backward differences are (f_i − f_{i−1})/h, forward (f_{i+1} − f_i)/h.
    let s = -(dir as f64);
    let one = shifted(dir);
    let two = shifted(2 * dir);
    match (boundary, one, two) {
        (Boundary::Vacuum, None, _) => alloc::vec![(idx, s / h)],
        (Boundary::Vacuum, Some(j), None) => alloc::vec![(idx, s / h), (j, -s / h)],
        (_, Some(j), Some(k)) => alloc::vec![
            (idx, s * 3.0 / (2.0 * h)),
            (j, -s * 4.0 / (2.0 * h)),
            (k, s / (2.0 * h))
        ],
        (Boundary::Periodic, _, _) => unreachable!("periodic neighbours always exist"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{cos, sin};
    use core::f64::consts::PI;

    fn line(n: usize, h: f64, b: Boundary) -> (Grid3D, UpwindStencils) {
        let g = Grid3D::new([n, 1, 1], [h, 1.0, 1.0], [0.0; 3]).unwrap();
        let s = UpwindStencils::new(&g, b).unwrap();
        (g, s)
    }

    #[test]
    fn interior_coefficients() {
        let (_, s) = line(6, 0.5, Boundary::Vacuum);
        let row: Vec<_> = s.plus[0].row(4).collect();
        assert_eq!(row, alloc::vec![(2, 1.0), (3, -4.0), (4, 3.0)]);
        let row: Vec<_> = s.minus[0].row(1).collect();
        assert_eq!(row, alloc::vec![(1, -3.0), (2, 4.0), (3, -1.0)]);
    }

    #[test]
    fn rows_sum_to_zero_except_inflow_face() {
        let g = Grid3D::new([4, 5, 3], [0.1, 0.2, 0.3], [0.0; 3]).unwrap();
        let s = UpwindStencils::new(&g, Boundary::Vacuum).unwrap();
        for d in 0..3 {
            for idx in 0..g.len() {
                let c = g.coords(idx)[d];
                let sp: f64 = s.plus[d].row(idx).map(|e| e.1).sum();
                let sm: f64 = s.minus[d].row(idx).map(|e| e.1).sum();
                if c != 0 {
                    assert!(sp.abs() < 1e-12);
                }
                if c != g.cells()[d] - 1 {
                    assert!(sm.abs() < 1e-12);
                }
            }
        }
        let sp = UpwindStencils::new(&g, Boundary::Periodic).unwrap();
        for d in 0..3 {
            for idx in 0..g.len() {
                assert!(sp.plus[d].row(idx).map(|e| e.1).sum::<f64>().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_on_quadratics() {
        let (g, s) = line(10, 0.3, Boundary::Vacuum);
        let f: Vec<f64> = (0..10).map(|i| {
            let x = g.center(i)[0];
            2.0 * x * x - x + 1.0
        }).collect();
        let mut y = alloc::vec![0.0; 10];
        s.plus[0].apply(&f, &mut y);
        for i in 2..10 {
            let x = g.center(i)[0];
            assert!((y[i] - (4.0 * x - 1.0)).abs() < 1e-12);
        }
        s.minus[0].apply(&f, &mut y);
        for i in 0..8 {
            let x = g.center(i)[0];
            assert!((y[i] - (4.0 * x - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let g = Grid3D::new([2, 4, 4], [0.1; 3], [0.0; 3]).unwrap();
        assert!(matches!(UpwindStencils::new(&g, Boundary::Vacuum), Err(Error::Config(_))));
    }

    #[test]
    fn second_order_convergence_on_sine() {
        let err = |n: usize| {
            let h = 2.0 * PI / n as f64;
            let (g, s) = line(n, h, Boundary::Periodic);
            let f: Vec<f64> = (0..n).map(|i| sin(g.center(i)[0])).collect();
            let mut y = alloc::vec![0.0; n];
            s.plus[0].apply(&f, &mut y);
            (0..n).map(|i| (y[i] - cos(g.center(i)[0])).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        let order = (e1 / e2).log2();
        assert!(order >= 1.9, "order {order}");
    }
}

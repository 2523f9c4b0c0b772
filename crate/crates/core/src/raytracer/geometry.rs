use alloc::vec::Vec;

use crate::spatial::Grid3D;

/// Portion of a ray inside one voxel, as distances along the ray from its origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub start: f64,
    pub end: f64,
    pub cell: usize,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        self.end - self.start
    }
}

const MIN_SEGMENT: f64 = 1e-12;

/// Voxels crossed by the ray `origin + t·dir`, t ≥ 0, in order of increasing t.
/// `dir` must be a unit vector. Slivers shorter than 1e-12 cm are dropped.
pub fn traverse(grid: &Grid3D, origin: [f64; 3], dir: [f64; 3]) -> Vec<PathSegment> {
    let lo = grid.origin();
    let hi = grid.upper();
    let (mut t_in, mut t_out) = (0.0f64, f64::INFINITY);
    for d in 0..3 {
        if dir[d] == 0.0 {
            if origin[d] < lo[d] || origin[d] > hi[d] {
                return Vec::new();
            }
            continue;
        }
        let a = (lo[d] - origin[d]) / dir[d];
        let b = (hi[d] - origin[d]) / dir[d];
        t_in = t_in.max(a.min(b));
        t_out = t_out.min(a.max(b));
    }
    if !(t_out > t_in + MIN_SEGMENT) {
        return Vec::new();
    }
    // Every plane crossing strictly inside (t_in, t_out).
    let spacing = grid.spacing();
    let cells = grid.cells();
    let mut breaks = Vec::new();
    breaks.push(t_in);
    for d in 0..3 {
        if dir[d] == 0.0 {
            continue;
        }
        for p in 1..cells[d] {
            let plane = lo[d] + p as f64 * spacing[d];
            let t = (plane - origin[d]) / dir[d];
            if t > t_in && t < t_out {
                breaks.push(t);
            }
        }
    }
    breaks.push(t_out);
    breaks.sort_by(f64::total_cmp);
    let mut out: Vec<PathSegment> = Vec::with_capacity(breaks.len());
    for w in breaks.windows(2) {
        if w[1] - w[0] < MIN_SEGMENT {
            continue;
        }
        let tm = 0.5 * (w[0] + w[1]);
        let p = core::array::from_fn(|d| origin[d] + tm * dir[d]);
        let Some(c) = grid.locate(p) else { continue };
        let cell = grid.index(c[0], c[1], c[2]);
        match out.last_mut() {
            Some(last) if last.cell == cell && (last.end - w[0]).abs() < MIN_SEGMENT => last.end = w[1],
            _ => out.push(PathSegment { start: w[0], end: w[1], cell }),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn axis_aligned_ray_visits_column() {
        let g = Grid3D::new([3, 3, 4], [1.0, 1.0, 0.5], [0.0; 3]).unwrap();
        let segs = traverse(&g, [1.5, 0.5, -2.0], [0.0, 0.0, 1.0]);
        assert_eq!(segs.len(), 4);
        for (k, s) in segs.iter().enumerate() {
            assert_eq!(s.cell, g.index(1, 0, k));
            assert!((s.start - (2.0 + 0.5 * k as f64)).abs() < 1e-14);
            assert!((s.length() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn missing_ray_is_empty() {
        let g = Grid3D::new([2, 2, 2], [1.0; 3], [0.0; 3]).unwrap();
        assert!(traverse(&g, [5.0, 0.5, 0.5], [0.0, 0.0, 1.0]).is_empty());
        assert!(traverse(&g, [0.5, 0.5, 3.0], [0.0, 0.0, 1.0]).is_empty());
    }

    proptest! {
        #[test]
        fn segments_tile_the_chord(
            ox in -1.0f64..3.0, oy in -1.0f64..3.0,
            th in 0.0f64..1.2, ph in 0.0f64..core::f64::consts::TAU,
        ) {
            let g = Grid3D::new([4, 5, 3], [0.5, 0.4, 0.7], [0.0; 3]).unwrap();
            let dir = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            let origin = [ox, oy, -1.0];
            let segs = traverse(&g, origin, dir);
            for w in segs.windows(2) {
                prop_assert!((w[0].end - w[1].start).abs() < 1e-12);
                prop_assert!(w[0].cell != w[1].cell);
            }
            for s in &segs {
                let tm = 0.5 * (s.start + s.end);
                let p = core::array::from_fn(|d| origin[d] + tm * dir[d]);
                let c = g.locate(p).unwrap();
                prop_assert_eq!(g.index(c[0], c[1], c[2]), s.cell);
            }
            // Total length equals the analytic chord of the box.
            let total: f64 = segs.iter().map(|s| s.length()).sum();
            let (mut a, mut b) = (0.0f64, f64::INFINITY);
            let hi = g.upper();
            for d in 0..3 {
                if dir[d].abs() < 1e-300 { continue; }
                let t1 = (0.0 - origin[d]) / dir[d];
                let t2 = (hi[d] - origin[d]) / dir[d];
                a = a.max(t1.min(t2));
                b = b.min(t1.max(t2));
            }
            let chord = (b - a).max(0.0);
            prop_assert!((total - chord).abs() < 1e-9 || chord < 1e-12);
        }
    }
}

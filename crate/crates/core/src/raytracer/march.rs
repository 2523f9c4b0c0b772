use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::blocks::BlockTridiag;
use super::energy::EnergyDgSpace;
use super::geometry::PathSegment;
use crate::math::ceil;
use crate::{Error, Result};

/// Largest Crank–Nicolson depth step (cm).
pub const DEFAULT_MAX_STEP_CM: f64 = 0.01;

/// DG coefficients of the uncollided energy spectrum at requested depths.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySolution {
    dofs: usize,
    depths: Vec<f64>,
    values: Vec<f64>,
}

impl RaySolution {
    pub fn depths(&self) -> &[f64] {
        &self.depths
    }

    pub fn len(&self) -> usize {
        self.depths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depths.is_empty()
    }

    pub fn coefficients(&self, sample: usize) -> &[f64] {
        &self.values[sample * self.dofs..(sample + 1) * self.dofs]
    }
}

/// Marches `initial` along `path` with Crank–Nicolson, `(M + h/2 G) ψ⁺ = (M − h/2 G) ψ`,
/// where `operator(cell)` gives G for the voxel. Steps are uniform inside every piece
/// between voxel faces and sample depths, at most `max_step` long. Outside the path the
/// spectrum is carried unchanged (vacuum). `samples` must be ascending.
pub fn march_ray<'a, F>(
    space: &EnergyDgSpace,
    path: &[PathSegment],
    operator: F,
    initial: &[f64],
    samples: &[f64],
    max_step: f64,
) -> Result<RaySolution>
where
    F: Fn(usize) -> &'a BlockTridiag,
{
    let dofs = space.dofs();
    if initial.len() != dofs {
        return Err(Error::Shape(format!("initial spectrum has {} coefficients, expected {dofs}", initial.len())));
    }
    if !(max_step > 0.0) {
        return Err(Error::Config(format!("march step must be positive, got {max_step}")));
    }
    if samples.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::Shape("sample depths must be ascending".into()));
    }
    let mass: Vec<[f64; 3]> = vec![space.mass_diagonal(); space.groups()];
    let mass_op = BlockTridiag::diagonal(&mass);

    let mut psi = initial.to_vec();
    let mut rhs = vec![0.0; dofs];
    let mut work = vec![0.0; dofs];
    let mut values = Vec::with_capacity(samples.len() * dofs);
    let mut next = 0;
    let mut depth = path.first().map_or(f64::INFINITY, |s| s.start);

    // Samples in front of the medium see the incident spectrum.
    while next < samples.len() && samples[next] <= depth {
        values.extend_from_slice(&psi);
        next += 1;
    }
    for seg in path {
        let g = operator(seg.cell);
        let mut cached: Option<(f64, super::blocks::FactoredBlockTridiag)> = None;
        depth = seg.start;
        while depth < seg.end {
            let stop = if next < samples.len() && samples[next] < seg.end { samples[next] } else { seg.end };
            let len = stop - depth;
            if len > 0.0 {
                let n = ceil(len / max_step).max(1.0);
                let h = len / n;
                let reuse = matches!(&cached, Some((hc, _)) if (*hc - h).abs() <= 1e-12 * h);
                if !reuse {
                    let mut lhs = mass_op.clone();
                    lhs.axpy(0.5 * h, g);
                    cached = Some((h, lhs.factor()?));
                }
                let (_, fac) = cached.as_ref().expect("factor cached above");
                for _ in 0..n as usize {
                    g.apply(&psi, &mut work);
                    mass_op.apply(&psi, &mut rhs);
                    for (r, w) in rhs.iter_mut().zip(&work) {
                        *r -= 0.5 * h * w;
                    }
                    fac.solve(&mut rhs);
                    core::mem::swap(&mut psi, &mut rhs);
                }
            }
            depth = stop;
            while next < samples.len() && samples[next] <= depth {
                values.extend_from_slice(&psi);
                next += 1;
            }
        }
    }
    while next < samples.len() {
        values.extend_from_slice(&psi);
        next += 1;
    }
    if psi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value in ray march".into()));
    }
    Ok(RaySolution { dofs, depths: samples.to_vec(), values })
}

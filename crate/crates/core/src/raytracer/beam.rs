use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::blocks::BlockTridiag;
use super::energy::EnergyDgSpace;
use super::geometry::traverse;
use super::march::march_ray;
use crate::math::{exp, floor, sqrt};
use crate::spatial::Grid3D;
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-9;

/// Pencil beam with Gaussian energy spectrum and Gaussian lateral profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSource {
    pub direction: [f64; 3],
    pub energy_mean: f64,
    pub energy_sigma: f64,
    /// A point on the beam axis; depth is measured from the plane through it normal to `direction`.
    pub entry: [f64; 3],
    pub lateral_sigma: f64,
    /// Number of particles.
    pub weight: f64,
}

impl BeamSource {
    /// Beam with the default spreads: σ_E = 1% of the mean energy, σ_xy = 0.3 cm.
    pub fn new(direction: [f64; 3], energy_mean: f64, entry: [f64; 3], weight: f64) -> Result<Self> {
        let beam = Self {
            direction,
            energy_mean,
            energy_sigma: 0.01 * energy_mean,
            entry,
            lateral_sigma: 0.3,
            weight,
        };
        beam.validate()?;
        Ok(beam)
    }

    pub fn validate(&self) -> Result<()> {
        let norm = sqrt(self.direction.iter().map(|d| d * d).sum());
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Config(format!("beam direction must be a unit vector, norm is {norm}")));
        }
        if !(self.energy_mean > 0.0) || !(self.energy_sigma > 0.0) {
            return Err(Error::Config(format!(
                "beam energy needs positive mean and spread, got {} ± {}",
                self.energy_mean, self.energy_sigma
            )));
        }
        if !(self.lateral_sigma > 0.0) {
            return Err(Error::Config(format!("lateral spread must be positive, got {}", self.lateral_sigma)));
        }
        if !(self.weight >= 0.0 && self.weight.is_finite()) {
            return Err(Error::Config(format!("beam weight must be finite and nonnegative, got {}", self.weight)));
        }
        if self.entry.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("beam entry point is not finite".into()));
        }
        Ok(())
    }

    /// Upper end of the energy range the beam needs: mean + 6σ_E.
    pub fn max_energy(&self) -> f64 {
        self.energy_mean + 6.0 * self.energy_sigma
    }

    /// Normalised Gaussian energy spectrum (1/MeV).
    pub fn spectrum(&self, e: f64) -> f64 {
        let z = (e - self.energy_mean) / self.energy_sigma;
        exp(-0.5 * z * z) / (self.energy_sigma * sqrt(2.0 * core::f64::consts::PI))
    }

    /// Orthonormal lateral axes completing `direction` to a right-handed frame.
    pub fn lateral_axes(&self) -> ([f64; 3], [f64; 3]) {
        let w = self.direction;
        // Least-aligned coordinate axis keeps the cross product well conditioned.
        let mut k = 0;
        for d in 1..3 {
            if w[d].abs() < w[k].abs() {
                k = d;
            }
        }
        let mut a = [0.0; 3];
        a[k] = 1.0;
        let e1 = normalize(cross(a, w));
        let e2 = cross(w, e1);
        (e1, e2)
    }
}

/// Deterministic stratified sampling of the lateral profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayBundle {
    pub rays_per_axis: usize,
    pub extent_sigmas: f64,
}

impl Default for RayBundle {
    fn default() -> Self {
        Self { rays_per_axis: 21, extent_sigmas: 3.0 }
    }
}

/// One ray to march: start point on the source plane and the depths its spectrum is needed at.
#[derive(Debug, Clone, PartialEq)]
pub struct RayRequest {
    pub origin: [f64; 3],
    pub direction: [f64; 3],
    pub weight: f64,
    pub depths: Vec<f64>,
}

/// Group averages and E_min values of one ray's spectrum at its requested depths.
#[derive(Debug, Clone, PartialEq)]
pub struct RaySpectra {
    groups: usize,
    averages: Vec<f64>,
    cutoff: Vec<f64>,
}

impl RaySpectra {
    pub fn averages(&self, sample: usize) -> &[f64] {
        &self.averages[sample * self.groups..(sample + 1) * self.groups]
    }

    pub fn cutoff(&self, sample: usize) -> f64 {
        self.cutoff[sample]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Contribution {
    ray: u32,
    sample: u32,
    factor: f64,
}

/// Everything needed to march a bundle and deposit it on a grid, in a fixed order.
#[derive(Debug, Clone)]
pub struct BundlePlan {
    beam: BeamSource,
    requests: Vec<RayRequest>,
    cell_offsets: Vec<usize>,
    contributions: Vec<Contribution>,
    cells: usize,
}

impl RayBundle {
    pub fn validate(&self) -> Result<()> {
        if self.rays_per_axis == 0 || !(self.extent_sigmas > 0.0) {
            return Err(Error::Config(format!(
                "ray bundle needs rays and a positive extent, got {} rays over ±{}σ",
                self.rays_per_axis, self.extent_sigmas
            )));
        }
        Ok(())
    }

    /// Lattice pitch (cm).
    pub fn pitch(&self, beam: &BeamSource) -> f64 {
        2.0 * self.extent_sigmas * beam.lateral_sigma / self.rays_per_axis as f64
    }

    /// Lateral offset of lattice index i.
    fn offset(&self, beam: &BeamSource, i: usize) -> f64 {
        -self.extent_sigmas * beam.lateral_sigma + (i as f64 + 0.5) * self.pitch(beam)
    }

    /// Ray weights: Gaussian density at the lattice points, normalised to the beam weight.
    pub fn weights(&self, beam: &BeamSource) -> Vec<f64> {
        let n = self.rays_per_axis;
        let s = beam.lateral_sigma;
        let mut w = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b) = (self.offset(beam, i), self.offset(beam, j));
                w.push(exp(-0.5 * (a * a + b * b) / (s * s)));
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x *= beam.weight / total);
        w
    }

    /// Maps every cell midpoint to its four neighbouring rays and collects per-ray sample depths.
    pub fn plan(&self, beam: &BeamSource, grid: &Grid3D) -> Result<BundlePlan> {
        self.validate()?;
        beam.validate()?;
        let n = self.rays_per_axis;
        let h = self.pitch(beam);
        let lo = -self.extent_sigmas * beam.lateral_sigma;
        let (e1, e2) = beam.lateral_axes();
        let w = self.weights(beam);
        let dir = beam.direction;

        let mut requests: Vec<RayRequest> = (0..n * n)
            .map(|k| {
                let (a, b) = (self.offset(beam, k % n), self.offset(beam, k / n));
                let origin = core::array::from_fn(|d| beam.entry[d] + a * e1[d] + b * e2[d]);
                RayRequest { origin, direction: dir, weight: w[k], depths: Vec::new() }
            })
            .collect();

        // (cell, ray, depth, factor) in cell order.
        let mut raw: Vec<(usize, usize, f64, f64)> = Vec::new();
        for cell in 0..grid.len() {
            let x = grid.center(cell);
            let r: [f64; 3] = core::array::from_fn(|d| x[d] - beam.entry[d]);
            let t = dot(r, dir);
            if t < 0.0 {
                continue;
            }
            let u = (dot(r, e1) - lo) / h - 0.5;
            let v = (dot(r, e2) - lo) / h - 0.5;
            let (iu, fu) = lattice_split(u);
            let (iv, fv) = lattice_split(v);
            for (di, wu) in [(0i64, 1.0 - fu), (1, fu)] {
                for (dj, wv) in [(0i64, 1.0 - fv), (1, fv)] {
                    let (i, j) = (iu as i64 + di, iv as i64 + dj);
                    let f = wu * wv;
                    if i < 0 || j < 0 || i >= n as i64 || j >= n as i64 || f == 0.0 {
                        continue;
                    }
                    let k = j as usize * n + i as usize;
                    raw.push((cell, k, t, f * w[k] / (h * h)));
                }
            }
        }
        for &(_, k, t, _) in &raw {
            requests[k].depths.push(t);
        }
        for req in &mut requests {
            req.depths.sort_by(f64::total_cmp);
            req.depths.dedup();
        }
        let mut cell_offsets = vec![0usize; grid.len() + 1];
        let mut contributions = Vec::with_capacity(raw.len());
        for &(cell, k, t, factor) in &raw {
            let sample = requests[k].depths.binary_search_by(|d| d.total_cmp(&t)).expect("depth registered above");
            contributions.push(Contribution { ray: k as u32, sample: sample as u32, factor });
            cell_offsets[cell + 1] += 1;
        }
        for c in 0..grid.len() {
            cell_offsets[c + 1] += cell_offsets[c];
        }
        Ok(BundlePlan { beam: *beam, requests, cell_offsets, contributions, cells: grid.len() })
    }
}

impl BundlePlan {
    pub fn beam(&self) -> &BeamSource {
        &self.beam
    }

    pub fn requests(&self) -> &[RayRequest] {
        &self.requests
    }

    /// Rays that contribute to no cell midpoint (outside the grid's lateral extent).
    pub fn idle_rays(&self) -> usize {
        self.requests.iter().filter(|r| r.depths.is_empty()).count()
    }

    /// Marches ray `k` through `grid`; `operator(cell)` returns the energy operator of the voxel.
    pub fn march_request<'a, F>(
        &self,
        k: usize,
        space: &EnergyDgSpace,
        grid: &Grid3D,
        operator: F,
        initial: &[f64],
        max_step: f64,
    ) -> Result<RaySpectra>
    where
        F: Fn(usize) -> &'a BlockTridiag,
    {
        let req = &self.requests[k];
        let groups = space.groups();
        if req.depths.is_empty() {
            return Ok(RaySpectra { groups, averages: Vec::new(), cutoff: Vec::new() });
        }
        let path = traverse(grid, req.origin, req.direction);
        let sol = march_ray(space, &path, operator, initial, &req.depths, max_step)?;
        let mut averages = Vec::with_capacity(sol.len() * groups);
        let mut cutoff = Vec::with_capacity(sol.len());
        for s in 0..sol.len() {
            let c = sol.coefficients(s);
            averages.extend((0..groups).map(|g| c[3 * g]));
            cutoff.push(space.value_at_min(c));
        }
        Ok(RaySpectra { groups, averages, cutoff })
    }

    /// Marches all rays in order.
    pub fn march_all<'a, F>(
        &self,
        space: &EnergyDgSpace,
        grid: &Grid3D,
        operator: F,
        max_step: f64,
    ) -> Result<Vec<RaySpectra>>
    where
        F: Fn(usize) -> &'a BlockTridiag + Copy,
    {
        let initial = space.project(|e| self.beam.spectrum(e));
        (0..self.requests.len())
            .map(|k| self.march_request(k, space, grid, operator, &initial, max_step))
            .collect()
    }

    /// Bilinear deposition of per-ray spectra (scaled by W_k/h²) at every cell midpoint.
    /// The summation order is fixed by the plan, so results are bit-reproducible.
    pub fn deposit(&self, groups: usize, spectra: &[RaySpectra]) -> Result<UncollidedFlux> {
        if spectra.len() != self.requests.len() {
            return Err(Error::Shape(format!(
                "expected spectra for {} rays, got {}",
                self.requests.len(),
                spectra.len()
            )));
        }
        let mut averages = vec![0.0; self.cells * groups];
        let mut cutoff = vec![0.0; self.cells];
        for cell in 0..self.cells {
            let row = &mut averages[cell * groups..(cell + 1) * groups];
            for c in &self.contributions[self.cell_offsets[cell]..self.cell_offsets[cell + 1]] {
                let sp = &spectra[c.ray as usize];
                if sp.groups != groups {
                    return Err(Error::Shape(format!("ray spectra carry {} groups, expected {groups}", sp.groups)));
                }
                for (r, v) in row.iter_mut().zip(sp.averages(c.sample as usize)) {
                    *r += c.factor * v;
                }
                cutoff[cell] += c.factor * sp.cutoff(c.sample as usize);
            }
        }
        Ok(UncollidedFlux { groups, averages, cutoff, direction: self.beam.direction })
    }
}

/// Ray-traced uncollided flux of one beam at cell midpoints (particles / (cm² MeV)).
#[derive(Debug, Clone, PartialEq)]
pub struct UncollidedFlux {
    groups: usize,
    averages: Vec<f64>,
    cutoff: Vec<f64>,
    direction: [f64; 3],
}

impl UncollidedFlux {
    /// Flux that is zero everywhere.
    pub fn zeros(cells: usize, groups: usize, direction: [f64; 3]) -> Self {
        Self { groups, averages: vec![0.0; cells * groups], cutoff: vec![0.0; cells], direction }
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn cells(&self) -> usize {
        self.cutoff.len()
    }

    pub fn direction(&self) -> [f64; 3] {
        self.direction
    }

    /// Group averages of the spectrum in one cell.
    pub fn spectrum(&self, cell: usize) -> &[f64] {
        &self.averages[cell * self.groups..(cell + 1) * self.groups]
    }

    pub fn group_average(&self, cell: usize, group: usize) -> f64 {
        self.averages[cell * self.groups + group]
    }

    /// Flux density at E_min.
    pub fn cutoff(&self, cell: usize) -> f64 {
        self.cutoff[cell]
    }

    /// Most negative group average relative to the largest one (DG undershoot diagnostic).
    pub fn relative_undershoot(&self) -> f64 {
        let max = self.averages.iter().copied().fold(0.0, f64::max);
        let min = self.averages.iter().copied().fold(0.0, f64::min);
        if max > 0.0 {
            -min / max
        } else {
            0.0
        }
    }
}

/// Integer part and fraction, snapping roundoff-sized fractions onto the lattice.
fn lattice_split(u: f64) -> (f64, f64) {
    const SNAP: f64 = 1e-9;
    let i = floor(u);
    let f = u - i;
    if f < SNAP {
        (i, 0.0)
    } else if f > 1.0 - SNAP {
        (i + 1.0, 0.0)
    } else {
        (i, f)
    }
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = sqrt(dot(a, a));
    [a[0] / n, a[1] / n, a[2] / n]
}

//! Per-step operator data of the collided moment system `u̇ = F_S(u) + F_C(u) + Q`,
//! shared by the low-rank and the reference integrators.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::angular::FluxMatrices;
use crate::spatial::UpwindStencils;
use crate::{Error, Result};

/// Streaming data for one pseudo-time step: 𝓢⁻¹ at the step start, midpoint and end
/// (the three RK4 stage times).
#[derive(Debug, Clone, Copy)]
pub struct StreamingContext<'a> {
    pub stencils: &'a UpwindStencils,
    pub flux: &'a FluxMatrices,
    pub inv_stopping: [&'a [f64]; 3],
}

impl StreamingContext<'_> {
    pub fn cells(&self) -> usize {
        self.inv_stopping[0].len()
    }

    pub fn moments(&self) -> usize {
        self.flux.len()
    }

    /// 𝓢⁻¹ at RK4 stage `k` ∈ 0..4.
    pub fn stage_inv_stopping(&self, k: usize) -> &[f64] {
        match k {
            0 => self.inv_stopping[0],
            1 | 2 => self.inv_stopping[1],
            _ => self.inv_stopping[2],
        }
    }

    /// Axes that carry a derivative.
    pub fn active_axes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..3).filter(|&d| self.stencils.plus[d].nnz() > 0)
    }
}

/// Self-scattering removal of one element: `F_C(u) = −Σ_i diag(cell_weight_i) u diag(moment_rate_i)`,
/// with cell weight ρ_i 𝓢⁻¹ and moment rate Σ_t;i − g_{i,ℓ} (1/(g/cm²)).
#[derive(Debug, Clone, PartialEq)]
pub struct RemovalTerm {
    pub cell_weight: Vec<f64>,
    pub moment_rate: Vec<f64>,
}

/// Low-rank first-collision source `Q = cell · momentᵀ` (n×k times k×m).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    pub cell: DMatrix<f64>,
    pub moment: DMatrix<f64>,
}

impl SourceTerm {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { cell: DMatrix::zeros(n, 0), moment: DMatrix::zeros(m, 0) }
    }

    pub fn dense(&self) -> DMatrix<f64> {
        &self.cell * self.moment.transpose()
    }
}

/// Scattering data for one pseudo-time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringContext {
    pub removal: Vec<RemovalTerm>,
    pub source: SourceTerm,
}

impl ScatteringContext {
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        for (i, t) in self.removal.iter().enumerate() {
            if t.cell_weight.len() != n || t.moment_rate.len() != m {
                return Err(Error::Shape(format!(
                    "removal term {i}: {} cell weights and {} moment rates for a {n}x{m} state",
                    t.cell_weight.len(),
                    t.moment_rate.len()
                )));
            }
        }
        let s = &self.source;
        if s.cell.nrows() != n || s.moment.nrows() != m || s.cell.ncols() != s.moment.ncols() {
            return Err(Error::Shape(format!(
                "source factors {}x{} and {}x{} do not fit a {n}x{m} state",
                s.cell.nrows(),
                s.cell.ncols(),
                s.moment.nrows(),
                s.moment.ncols()
            )));
        }
        Ok(())
    }
}

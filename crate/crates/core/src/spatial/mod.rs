//! Structured grid, second-order upwind differences and the streaming operator.

mod grid;
mod sparse;
mod stencil;
mod streaming;

pub use grid::Grid3D;
pub use sparse::CsrMatrix;
pub use stencil::{Boundary, UpwindStencils};
pub use streaming::{apply_streaming, check_finite};

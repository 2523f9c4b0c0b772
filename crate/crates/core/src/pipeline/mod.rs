//! Problem assembly and the pseudo-time loop: ray-traced uncollided flux, Lie-split
//! collided sweep from E_max down to the cut-off, truncation and dose tally.

mod dose;
mod media;
mod run;
mod settings;
mod solver;

pub use dose::{dominant_axis, DepthPoint, DoseGrid, Negativity};
pub use media::{ElementEnergyCoefficients, ElementPhysics, Media};
pub use run::{EnergyGrid, ENERGY_COURANT, RankRecord, RayExecutor, RunOutput, SequentialRays, Simulation, StepData};
pub use settings::{CollisionModel, Problem, SolverSettings, TruncateAfter};
pub use solver::{CollidedSolver, FullRankSolver, LowRankDiagnostics, LowRankSolver};

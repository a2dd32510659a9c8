//! Ultrafunction spaces at a fixed level: grid, pointwise integral, delta
//! basis, embeddings and the generalized derivative.

mod axioms;
mod derivative;
mod embed;
mod grid;
mod ultrafunction;

pub use axioms::{battery_error, battery_threshold, check_axioms, AxiomEntry, AxiomReport, AxiomThresholds};
pub use derivative::{build_derivative, fornberg_first_derivative, DerivativeOperator, Diagnostics, KERNEL_FLOOR};
pub use embed::{embed_continuous, embed_real, embed_weak, WeakSource, WithBreaks};
pub use grid::{build_grid, Grid};
pub use ultrafunction::Ultrafunction;

pub(crate) use ultrafunction::{same_grid, weighted_dot};

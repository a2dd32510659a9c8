//! Finite-level numerical laboratory for ultrafunctions.
//!
//! Euclidean numbers are modelled as truncated power series in one infinite
//! unit `α` ([`scalar`]). Λ-limits are replaced by extrapolation along a
//! fixed chain of refinement levels ([`levels`]). At each level the
//! hyperfinite grid, the pointwise integral and the generalized derivative
//! are concrete finite objects ([`space`]), and the quantum layer
//! ([`quantum`], [`evolution`]) works with weighted-Hermitian matrices on
//! that grid.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod banded;
pub mod error;
pub mod evolution;
pub mod io;
pub mod levels;
pub mod quadrature;
pub mod quantum;
pub mod scalar;
pub mod space;
mod tridiag;

pub use error::{Error, Result};
pub use evolution::{conservation_traces, evolve, EvolutionMode, EvolutionResult, TraceRow};
pub use levels::{asymptotic_profile, numerosity, standard_limit_check, LevelChain, Net, Profile, SetSpec};
pub use num_complex::Complex64;
pub use quantum::{
    classify_state, commutator, expectation, hamiltonian, measure, momentum_operator, neumann_hamiltonian,
    position_operator, spectrum, MeasurementDistribution, Observable, Operator, PotentialSpec, SpectrumResult,
    StateClass,
};
pub use scalar::{ComplexEuclidean, EuclideanScalar, Exponent, OrderClass, OrderTag, Relation};
pub use space::{
    build_derivative, build_grid, check_axioms, embed_continuous, embed_weak, AxiomReport, AxiomThresholds,
    DerivativeOperator, Grid, Ultrafunction,
};

//! Finite-dimensional quantum probability: operators, projections, states,
//! subalgebras, lattice operations, commutants and conditional expectations.

pub mod algebra;
pub mod lattice;
pub mod operators;

pub use algebra::{algebras_commute, JointFactors, MatrixAlgebra, TensorSplit};
pub use lattice::{
    commutant, commuting_meet, conditional_expectation, correlation, is_product_state,
    lattice_join, lattice_meet, logical_independence_check, meet_power_limit, product_defect,
    IndependenceMode, IndependenceVerdict,
};
pub use operators::{commutator_norm, state_eval, weight, DensityState, HermitianOperator, Projection};

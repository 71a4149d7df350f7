//! A desk-scale workbench for Reichenbachian common causes in finite
//! quantum and classical probability spaces.
//!
//! * [`qprob`]: projections, states, subalgebras and the projection lattice.
//! * [`commoncause`]: verification and synthesis of common causes.
//! * [`bell`]: Bell correlation by see-saw ascent, two-qubit closed form,
//!   correlated-pair finder.
//! * [`geometry`]: exact 1+1 Minkowski region calculus in null coordinates.
//! * [`toynet`]: a qubit-chain net of local algebras driven by a brickwork
//!   circuit, with an end-to-end weak common-cause demonstration.

pub mod bell;
pub mod commoncause;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod qprob;
pub mod report;
pub mod states;
pub mod tol;
pub mod toynet;

pub use error::{Error, Result};
pub use tol::Tolerances;

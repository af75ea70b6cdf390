//! Constructions of mixed polynomials with isolated singularities from
//! symmetric braids, together with grid-certified checks of the conditions
//! that make those constructions work.
//!
//! The pipeline runs braid → loop of polynomials → mixed polynomial:
//!
//! * [`braid`]: braid words, sampled geometric braids, symmetry detection.
//! * [`trigpoly`]: finite Fourier series, the coefficient ring of loops.
//! * [`looppoly`]: loops `g(u, e^{it})` of polynomials, synthesis from braids
//!   and root tracking back to braids.
//! * [`mixedpoly`]: polynomials in `u, ū, v, v̄`, Newton boundaries, face
//!   functions and non-degeneracy certificates.
//! * [`pfibered`]: fibration certificates for braids with multiplicity and
//!   coefficient data, compatible sequences and their realization.
//! * [`obstruction`]: Alexander polynomial tests for the symmetry classes.

pub mod braid;
pub mod certificate;
pub mod config;
pub mod looppoly;
pub mod mixedpoly;
pub mod obstruction;
pub mod pfibered;
pub mod roots;
pub mod trigpoly;

pub use braid::{BraidWord, GeometricBraid, Symmetry};
pub use certificate::{Certificate, Status};
pub use config::Config;
pub use looppoly::LoopPoly;
pub use mixedpoly::{MixedPoly, WeightVector};
pub use trigpoly::TrigPoly;

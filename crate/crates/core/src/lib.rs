//! Pair production of spin-(±1) atoms from a spin-0 spinor condensate.
//!
//! * [`model`] – unit system, parameter records, momentum arithmetic
//! * [`form_factor`] – Fourier transform of the condensate density squared
//! * [`gain`] – directional gain from the energy-shell integral
//! * [`dynamics`] – linearized populations, pair correlation, two-mode squeezing
//! * [`fock`] – exact pump + pair-mode evolution used as an oracle
//! * [`quasi_spin`] – Lz statistics of the two-trap anticorrelated state
//! * [`cli`] – configuration and CSV commands behind the `spinor-pairs` binary
//!
//! The continuum-model modules are generic over [`Real`]; the aliases below
//! fix the scalar to `f64`.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fock;
pub mod form_factor;
pub mod gain;
pub mod model;
pub mod quadrature;
pub mod quasi_spin;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Momentum = model::MomentumVector<f64>;
pub type Geometry = model::CondensateGeometry<f64>;
pub type Params = model::ModelParams<f64>;
pub type Scan = gain::GainScan<f64>;
pub type Covariance = dynamics::SqueezeCovariance<f64>;

//! A laboratory for solitary wave / mean flow interaction in the
//! Serre-Green-Naghdi (SGN) shallow water model.
//!
//! The crate has two independent routes to the same physics:
//!
//! * an analytic route ([`modulation`]) built on the solitonic Whitham
//!   modulation system: Riemann invariants, transmission and trapping
//!   classification, dispersive shock wave (DSW) edge amplitudes;
//! * a direct route ([`solver`]): a finite-volume SGN solver using a
//!   hyperbolic-elliptic splitting of the equations.
//!
//! [`experiments`] cross-validates the two at desk scale, and the `sgnlab`
//! binary exposes predict / simulate / sweep / compare commands.
//!
//! All quantities are non-dimensionalized so the gravitational
//! acceleration is 1.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod modulation;
pub mod quad;
pub mod roots;
pub mod solver;
pub mod specfun;
pub mod waves;

pub use error::{Error, Result};

/// Scalar type used by the concrete wave/solver layers.
///
/// The special-function kernel ([`specfun`]) is generic over
/// [`num_traits::Float`]; everything downstream is instantiated at `Real`
/// because the stated accuracy contracts (1e-10 .. 1e-12) require f64.
pub type Real = f64;

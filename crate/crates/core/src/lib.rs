//! Exact simulation of coherent-probe entanglement generation between
//! quantum memories of neighbouring hybrid-repeater nodes.
//!
//! States are superpositions of memory bitstrings times products of coherent
//! states ([`states::BranchState`]), which stay closed under every optical
//! element used here. Detector statistics come from closed-form POVM matrix
//! elements between coherent states ([`detectors`]). [`protocols`] runs the
//! two-probe protocol and two single-probe comparators; [`analytics`] holds
//! the closed forms and the optimal frontier the runs are checked against;
//! [`fock`] is an independent truncated Fock-space simulation used as a
//! cross-check.
//!
//! All numerics are generic over [`Real`] (`f32`/`f64`); the `*64` aliases
//! below fix the double-precision instantiation used by the CLI and tests.

// `!(x >= 0)` rejects NaN along with negatives; small dense matrices read best indexed.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytics;
pub mod density;
pub mod detectors;
pub mod error;
pub mod fock;
pub mod params;
pub mod protocols;
pub mod scalar;
pub mod states;
pub mod validation;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type BranchState64 = states::BranchState<f64>;
pub type QubitPairDensity64 = density::QubitPairDensity<f64>;
pub type BellWeights64 = density::BellWeights<f64>;
pub type DetectorModel64 = detectors::DetectorModel<f64>;
pub type Outcome64 = detectors::Outcome<f64>;
pub type ProtocolParams64 = params::ProtocolParams<f64>;
pub type ProtocolResult64 = protocols::ProtocolResult<f64>;
pub type PerformancePoint64 = analytics::PerformancePoint<f64>;

pub type BranchState32 = states::BranchState<f32>;
pub type ProtocolParams32 = params::ProtocolParams<f32>;
pub type ProtocolResult32 = protocols::ProtocolResult<f32>;

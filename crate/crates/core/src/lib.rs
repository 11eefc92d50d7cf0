//! Physical-layer security toolkit for indoor visible-light downlinks.
//!
//! The library models an indoor VLC downlink with one legitimate receiver
//! and eavesdroppers scattered according to a Poisson point process. It
//! provides:
//!
//! - Lambertian line-of-sight channel gains ([`channel`]),
//! - room/fixture geometry and point-process sampling ([`geometry`]),
//! - amplitude-constrained secrecy beamformers driven by the eigenmode of
//!   the eavesdropper Gram matrix ([`beamform`]),
//! - the nearest-fixture selection scheme ([`selection`]),
//! - closed-form SNR distributions and secrecy-outage bounds ([`secrecy`]),
//! - a Monte Carlo oracle that cross-checks every closed form
//!   ([`montecarlo`]).
//!
//! All quantities are linear (no dB) and SI units throughout; dB
//! conversions belong at the application boundary.

// parameter guards are written `!(x > 0.0)` on purpose: unlike `x <= 0.0`
// they also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamform;
pub mod channel;
pub mod geometry;
pub mod montecarlo;
pub mod quadrature;
pub mod secrecy;
pub mod selection;
pub mod special;

mod error;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

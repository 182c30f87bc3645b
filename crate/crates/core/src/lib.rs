//! Exact and numerical evaluation of multiple-recurrence quantities for
//! tuples of measure-preserving transformations.
//!
//! The crate is organised by backend:
//!
//! * [`sym`]: shift-type systems on sequence spaces with exact rational
//!   measures of relational cylinder sets.
//! * [`torus`]: rotations of the circle with exact arc arithmetic,
//!   orbit diameters and simultaneous Diophantine checks.
//! * [`analysis`]: correlation series, threshold hit sets, gap reports,
//!   windowed averages and empirical joinings over any exact backend.
//! * [`spectral`]: Fourier and grid realisations of the compact /
//!   weakly-mixing splitting for rotations and the doubling map.
//! * [`montecarlo`]: seeded orbit-sampling estimators with confidence
//!   intervals, reproducible across thread counts.
//!
//! Sweeps over `n` run on rayon when the `parallel` feature is enabled
//! (default) and fall back to plain iterators otherwise; see [`par`].

pub mod analysis;
pub mod error;
pub mod montecarlo;
pub mod par;
pub mod rational;
pub mod report;
pub mod spectral;
pub mod sym;
pub mod torus;

pub use error::{Error, ErrorKind, Result};
pub use rational::Rational;

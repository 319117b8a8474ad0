//! Dynamical-decoupling schedule compiler and decoupling-order verifier.
//!
//! Build a mutually orthogonal operation set with [`operators::build_moos`],
//! compile a schedule with one of the builders in [`sequences`], and measure
//! the order it achieves against random baths with [`simulate::order_scan`].
//! [`pulseshape`] designs finite-duration pulses that stand in for the ideal
//! instantaneous ones up to second order in the pulse length.
//!
//! ```
//! use ddkit::operators::{build_moos, MoosSpec};
//! use ddkit::sequences::nudd;
//!
//! let moos = build_moos(MoosSpec::QubitFull(1)).unwrap();
//! let schedule = nudd(&moos, &[2, 3], false).unwrap();
//! assert_eq!(schedule.intervals, 12);
//! ```

pub mod acceptance;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod pulseshape;
pub mod sequences;
pub mod simulate;
pub mod tolerance;

pub use linalg::{CMatrix, C64};
pub use model::{random_model, HamiltonianModel, Structure};
pub use operators::{build_moos, Moos, MoosSpec, Operator};
pub use pulseshape::{design_pulse, Family, PulseShape};
pub use sequences::Schedule;
pub use simulate::{order_scan, RunConfig, ScalingResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/moos.md")]
    mod moos {}
    #[doc = include_str!("../../../book/src/sequences.md")]
    mod sequences {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}

//! Sub-Riemannian mean curvature flow in step-2 Carnot groups and SE(2).
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! * [`group`]: group structures, left-invariant frames, exponential
//!   increments and the anisotropic pseudo-distances `d_β`, `d_0`, `d_3`;
//! * [`field`]: sampled scalar fields on structured grids and finite-difference
//!   application of the frames;
//! * [`flow`]: the ε-regularized, δ-approximated level-set flow, the
//!   vanishing-viscosity sweep and comparison checks;
//! * [`barriers`]: the cubic and exponential barrier functions together with
//!   their residual checkers, confinement radius and decay fits;
//! * [`phi`]: the doubling-of-variables test function, its exact derivatives
//!   and sampling audits of the derivative bounds.
//!
//! Enable the `parallel` feature to evaluate grid maps and sample batches
//! on a rayon pool. Results are bitwise independent of the thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod barriers;
mod error;
pub mod field;
pub mod flow;
pub mod group;
mod math;
mod par;
pub mod phi;
mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use field::{Axis, GridSpec, MaskedField, ScalarField};
pub use flow::{Boundary, FlowProblem, SweepReport, Trajectory};
pub use group::{DistanceTriple, GroupSpec, IncrementVector, Point, ThetaPolicy, ValidatedGroup};

//! Angle-constrained planar random walks.
//!
//! A walk starts with a uniformly random unit step and turns each following
//! step by a random angle. Three angle laws are provided: iid uniform on a
//! fixed interval, iid uniform on an interval that shrinks with the step
//! count, and a Markov law whose *increments* are iid uniform. Alongside the
//! walks live direct simulators of their scaling limits, closed-form
//! evaluators for the second-moment and total-variation constants, discrete
//! curvature estimators, and a reproducible Monte Carlo harness that ties the
//! pieces together in the [`verify`] suites.

pub mod analysis;
pub mod error;
pub mod io;
pub mod limits;
pub mod montecarlo;
pub mod plane;
pub mod sampling;
pub mod verify;
pub mod walks;

pub use error::{Error, Result};
pub use limits::{LimitKind, LimitRealization, LimitSpec};
pub use montecarlo::{ExperimentPlan, KsResult, SummaryStats};
pub use plane::{Point2, UnitVec2};
pub use sampling::{derive_stream, Angle, RandomSource, Seed};
pub use walks::{AngleSeq, Construction, Polyline, RescaleMode, StepSeq, WalkSpec};

/// Format version written into every output file header.
pub const FORMAT_TAG: &str = "anglewalk v1";

/// Crate version, embedded in output files next to the format tag.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

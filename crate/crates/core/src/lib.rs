//! Numerical verification of statistical-manifold structure under affine and
//! conformal submersions.
//!
//! Every geometric object is a field evaluated over [`Jet`]s (truncated Taylor
//! expansions), so derivatives of metrics, connections and projector fields
//! are exact to rounding. Checks sample a chart box and report the largest
//! residual of an identity against a tolerance.

pub mod builtins;
pub mod check;
pub mod error;
pub mod expr;
pub mod fd;
pub mod field;
pub mod geodesics;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod sampling;
pub mod submersion;
pub mod suite;
pub mod tangent_bundle;

pub use error::{Error, Result};
pub use field::{Christoffel, Connection, DiffMode, MetricField, ScalarField};
pub use jet::{jet_seed, Jet};
pub use linalg::{solve_linear, Matrix};
pub use sampling::{sample, BoxDomain, SampleSet};

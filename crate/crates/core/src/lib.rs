//! Parallel transport by geodesic ladders on affine connection spaces.
//!
//! The crate provides a point/tangent data model and a connection-space
//! contract ([`geometry`]), a numerical engine for connections given by
//! Christoffel symbols ([`chart`]), closed-form model manifolds
//! ([`manifolds`]), the ladder schemes ([`ladders`]), series evaluators and
//! error meters ([`analysis`]) and the experiment harness behind the
//! `poleladder` binary ([`experiments`]).

pub mod analysis;
pub mod chart;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod ladders;
pub mod linalg;
pub mod manifolds;
pub mod ode;
pub mod tolerance;

pub use error::{GeometryError, Result};
pub use geometry::{Capabilities, ConnectionSpace, GeodesicSegment, Point, TangentVector};
pub use ladders::{LadderScheme, RungDiagnostics, SchemeKind};
pub use tolerance::ToleranceConfig;

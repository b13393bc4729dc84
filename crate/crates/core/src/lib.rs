//! Numerical laboratory for the semilinear Dirichlet problem `-Δu = f(u)` on
//! planar convex domains.
//!
//! The crate solves the problem on cut-cell grids, checks when concavity of the
//! solution propagates from the boundary into the interior, compares the
//! solution against its symmetric decreasing rearrangement on the equal-area
//! disk, and verifies the stochastic representation of second directional
//! derivatives with a walk-on-spheres engine.

pub mod analysis;
pub mod cli;
pub mod contour;
pub mod error;
pub mod fdsolver;
pub mod geometry;
pub mod io;
pub mod nonlinearity;
pub mod radial;
pub mod rearrange;
pub mod stochastic;

pub use error::{Error, Result};
pub use geometry::{Domain, DomainSpec, GeometryStats, Point};
pub use nonlinearity::{Nonlinearity, NonlinearitySpec};

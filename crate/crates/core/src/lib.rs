//! Capacity–torsion shape functionals.
//!
//! Exact evaluation on ellipsoids, certified bounds on convex bodies via the
//! John sandwich, walk-on-spheres estimators for general bodies, the extremal
//! families that drive the regime theorems, and an ellipsoid optimizer.

pub mod bounds;
pub mod constructions;
pub mod error;
pub mod exact;
pub mod geometry;
pub mod john;
pub mod montecarlo;
pub mod optimize;
pub mod quadrature;
pub mod special;
pub mod verify;

pub use error::{Error, Result};

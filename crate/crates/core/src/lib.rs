//! Sampling positive-dimensional solution sets of polynomial systems.
//!
//! A witness set stores a polynomial system, a random affine plane of
//! complementary dimension, and the finitely many points where the plane
//! meets the solution set. Moving the plane moves the points; this crate
//! tracks those moves in three coordinate regimes (extrinsic, global
//! intrinsic and local intrinsic), bootstraps witness sets by total-degree
//! homotopy, and measures how each regime affects numerical conditioning.

pub mod conditioning;
pub mod error;
pub mod linalg;
pub mod polysys;
pub mod rng;
pub mod solver;
pub mod tracker;
pub mod witness;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, ComplexVector};
pub use num_complex::Complex64;
pub use polysys::{PolySystem, Polynomial, RestrictedSystem};
pub use witness::{AffinePlane, ExtrinsicPlane, WitnessSet};
pub use tracker::{PathStats, TrackerConfig, TrackingMode};

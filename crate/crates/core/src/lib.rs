//! Point-cloud scene expansion primitives.
//!
//! This crate is `no_std` (it needs `alloc`) and holds the pure parts of the
//! pipeline: geometry on labeled point clouds, seeded random streams,
//! procedural object generators, the centroid-overlay placement procedure
//! used to expand scenes with synthetic instances, and instance-segmentation
//! evaluation (AP, AP50, AP25). File formats, parallel execution and the
//! command-line tool live in the `pcx` crate.

#![no_std]
#![warn(clippy::std_instead_of_alloc)]
#![warn(clippy::std_instead_of_core)]

extern crate alloc;

mod error;
pub mod expansion;
pub mod geometry;
pub mod metrics;
pub mod rng;
pub mod scene;
pub mod synthesis;

pub use error::{Error, Result};
pub use geometry::{Aabb, Point3, PointCloud, Rgb};
pub use rng::Stream;
pub use scene::{InstanceId, LabeledScene, ObjectAsset, Provenance, SemanticClass, Violation};

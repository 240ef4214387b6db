//! Planar reconstruction of streets and facades from terrestrial LiDAR scans,
//! grouping into street scenes, and global/local urban-morphology metrics.
//!
//! The processing chain is:
//!
//! 1. [`pointcloud`]: load, voxel-downsample and (when needed) estimate normals.
//! 2. [`detection`]: randomized shape detection splits the cloud into planar
//!    fragments plus residual clutter.
//! 3. [`geometry`]: per-fragment plane regression, 2D projection, convex hull
//!    and orientation class, yielding [`geometry::PlaneEntity`] values.
//! 4. [`scene`]: noise filtering and street/facade grouping into
//!    [`scene::StreetScene`]s.
//! 5. [`metrics`]: five per-scene metrics and four per-band metrics.
//! 6. [`map`]: per-band pixels for morphological maps (SVG, GeoJSON).
//!
//! [`synth`] generates labeled synthetic scenes with closed-form ground truth
//! and hosts the brute-force oracles used by the test suites.
//!
//! With the default `parallel` feature the data-parallel loops run on rayon;
//! without it every loop runs sequentially. Results do not depend on which
//! path or how many threads are used.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detection;
pub mod error;
pub mod export;
pub mod geometry;
pub mod linalg;
pub mod map;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod pointcloud;
pub mod rng;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
pub use pointcloud::{Point3, PointCloud, Vector3};

//! Distortion-aware deformable super-resolution for equirectangular
//! (360-degree) images.
//!
//! The crate is organized around a small dense-tensor substrate with
//! hand-derived backward rules ([`numerics`]), bilinear sampling at
//! offset-perturbed coordinates ([`sampling`]), the deformable blocks that
//! make up the network ([`layers`]), the assembled model with checkpoint
//! serialization ([`model`]), data loading and degradation ([`data`]),
//! the training loop ([`training`]), and spherical quality metrics
//! ([`metrics`]). Projection math lives in [`geometry`].

pub mod data;
pub mod error;
pub mod geometry;
pub mod layers;
pub mod metrics;
pub mod model;
pub mod numerics;
pub mod sampling;
pub mod training;

pub use error::{Error, Result};
pub use geometry::{distortion_map, DistortionMap, ErpGeometry};

pub use numerics::{Parameter, Scalar, Tensor};

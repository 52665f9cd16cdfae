//! Toolkit for omnidirectional image quality assessment under non-uniform
//! distortion: equirectangular geometry and viewports, lens-local distortion
//! synthesis, spherical full-reference metrics, subjective-score screening and
//! the PLCC/SRCC/RMSE evaluation protocol.

pub mod distortion;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod image;
pub mod io;
pub mod metrics;
pub mod subjective;
pub mod viewport;

pub use error::{Error, Result};
pub use image::{ErpDims, ErpImage, Raster};

//! Rotationally symmetric shrinkers of mean curvature flow: profile curves,
//! Fourier-mode stability spectra, second-variation certificates for
//! F-index at least 3, and F-functional / entropy evaluation.

pub mod banded;
pub mod error;
pub mod functional;
pub mod geometry;
pub mod numerics;
pub mod operator;
pub mod profiles;
pub mod spectra;
pub mod variation;

pub use error::{Error, Result};

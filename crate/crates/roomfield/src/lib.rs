//! Narrowband field maps for rectangular rooms.
//!
//! The model is a vertical Hertzian dipole plus one specular image per wall,
//! each image weighted by a complex reflection coefficient. On top of that
//! sit map operations (magnitude, normalization, frequency averaging,
//! attenuation in dB), Pearson similarity with an optional integer pixel
//! shift search, and a derivative-free calibration loop that fits the six
//! reflection coefficients to a reference magnitude map.
//!
//! Conventions used throughout:
//! * time dependence `exp(+j w t)`, outward propagation `exp(-j k r)`
//! * the dipole axis is z; walls are the six faces of an axis-aligned box
//! * reflection coefficients are ordered right, left, ceiling, ground,
//!   back wall behind the receive grid, back wall behind the transmitter
//! * maps are row-major over a receive grid: index `j * n_u + i`, where
//!   `i` runs along the grid u axis and `j` along the v axis

pub mod calibrate;
pub mod error;
pub mod fields;
pub mod forward;
pub mod geom;
pub mod io;
pub mod mapops;
pub mod optim;
pub mod scene;
pub mod similarity;
pub mod synth;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

//! Closed-form field of a vertical Hertzian dipole.
//!
//! Conventions: time dependence `exp(+j w t)`, so an outward-traveling wave
//! carries `exp(-j k r)`. The full near-plus-far field is kept; no far-field
//! approximation is made anywhere.

use crate::error::Error;
use crate::geom::Point3;
use crate::Result;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wave impedance, ohm.
pub const FREE_SPACE_IMPEDANCE: f64 = 376.730;

/// Free-space wavenumber `k = 2 pi f / c` for a frequency in Hz.
pub fn wavenumber(f_hz: f64) -> Result<f64> {
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(Error::NonpositiveFrequency(f_hz));
    }
    Ok(2.0 * PI * f_hz / SPEED_OF_LIGHT)
}

/// Free-space wavelength `c / f` for a frequency in Hz.
pub fn wavelength(f_hz: f64) -> Result<f64> {
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(Error::NonpositiveFrequency(f_hz));
    }
    Ok(SPEED_OF_LIGHT / f_hz)
}

/// Vertical (z) component of the electric field of a z-oriented Hertzian
/// dipole with complex moment `p0`, evaluated at `obs` for a source at `src`.
///
/// With `r` the separation, `theta` the polar angle from the dipole axis,
/// `eta` the wave impedance, and `ph = exp(-j k r)`:
///
/// ```text
/// E_r     = eta p0 cos(theta) / (2 pi r^2) (1 + 1/(j k r)) ph
/// E_theta = j eta k p0 sin(theta) / (4 pi r) (1 + 1/(j k r) - 1/(k r)^2) ph
/// E_z     = E_r cos(theta) - E_theta sin(theta)
/// ```
///
/// The result is exactly symmetric under exchanging `src` and `obs`: the
/// sign flips of the direction vector cancel pairwise in `E_r cos(theta)`,
/// and `sin(theta)` is unchanged.
pub fn dipole_ez(src: Point3, obs: Point3, k: f64, p0: Complex64) -> Result<Complex64> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::NonpositiveWavenumber(k));
    }
    let d = obs - src;
    let r = (d.x * d.x + d.y * d.y + d.z * d.z).sqrt();
    if r == 0.0 {
        return Err(Error::ZeroSeparation);
    }
    let kr = k * r;
    let cost = d.z / r;
    // Clamp guards the sqrt against cost rounding just past 1 on-axis.
    let sint = (1.0 - cost * cost).max(0.0).sqrt();

    let eta = FREE_SPACE_IMPEDANCE;
    let ph = Complex64::new(kr.cos(), -kr.sin());
    let inv_jkr = Complex64::new(0.0, -1.0 / kr);

    let er_geo = eta * cost / (2.0 * PI * r * r) * (Complex64::new(1.0, 0.0) + inv_jkr) * ph;
    let eth_geo = Complex64::new(0.0, eta * k * sint / (4.0 * PI * r))
        * Complex64::new(1.0 - 1.0 / (kr * kr), -1.0 / kr)
        * ph;

    Ok((er_geo * cost - eth_geo * sint) * p0)
}

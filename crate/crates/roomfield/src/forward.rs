//! Image-source forward model: direct dipole field plus one weighted
//! specular image per wall.
//!
//! The total field at a grid point is
//!
//! ```text
//! E = E_direct + sum_i gamma_i E_image_i        (i in coefficient order)
//! ```
//!
//! and is linear in the six coefficients. [`FieldBasis`] exploits that:
//! the seven per-source maps are computed once, after which any coefficient
//! set can be composed in a few multiply-adds per cell. [`FieldBasis::compose`]
//! performs the sum in the same fixed order as [`total_field_map`], so the
//! two agree bitwise.

use crate::error::Error;
use crate::fields::{dipole_ez, wavenumber};
use crate::scene::{
    grid_points, image_sources, validate_scene, GridMeta, SceneConfig, WallId, WALL_COUNT,
};
use crate::Result;
use num_complex::Complex64;
use rayon::prelude::*;

/// Slack for magnitude checks: `from_polar(1, phase)` may land an ulp above 1.
const MAG_TOL: f64 = 1e-12;

/// Origin of a map's values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Produced by the forward model.
    Simulated,
    /// Imported from instrument data.
    Measured,
    /// Produced by the synthetic-reference generator.
    Synthetic,
}

impl Provenance {
    /// Stable lowercase token used in files.
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Simulated => "simulated",
            Provenance::Measured => "measured",
            Provenance::Synthetic => "synthetic",
        }
    }

    /// Inverse of [`Provenance::name`].
    pub fn from_name(name: &str) -> Option<Provenance> {
        match name {
            "simulated" => Some(Provenance::Simulated),
            "measured" => Some(Provenance::Measured),
            "synthetic" => Some(Provenance::Synthetic),
            _ => None,
        }
    }
}

/// One complex reflection coefficient per wall, in the fixed wall order.
/// Magnitudes are constrained to the passive range `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionSet {
    gammas: [Complex64; WALL_COUNT],
}

impl ReflectionSet {
    /// Builds a set from coefficients in wall order, rejecting magnitudes
    /// above 1 and non-finite values.
    pub fn new(gammas: [Complex64; WALL_COUNT]) -> Result<Self> {
        for (wall, g) in WallId::ALL.iter().zip(gammas.iter()) {
            if !(g.re.is_finite() && g.im.is_finite()) {
                return Err(Error::ReflectionMagnitude {
                    wall: wall.name(),
                    magnitude: f64::NAN,
                });
            }
            let mag = g.norm();
            if mag > 1.0 + MAG_TOL {
                return Err(Error::ReflectionMagnitude {
                    wall: wall.name(),
                    magnitude: mag,
                });
            }
        }
        Ok(ReflectionSet { gammas })
    }

    /// The same coefficient on every wall.
    pub fn uniform(gamma: Complex64) -> Result<Self> {
        Self::new([gamma; WALL_COUNT])
    }

    /// All-zero coefficients: the forward model reduces to the direct field.
    pub fn zero() -> Self {
        ReflectionSet {
            gammas: [Complex64::ZERO; WALL_COUNT],
        }
    }

    /// Builds a set from `(magnitude, phase in degrees)` pairs in wall order.
    pub fn from_polar_deg(pairs: [(f64, f64); WALL_COUNT]) -> Result<Self> {
        let mut gammas = [Complex64::ZERO; WALL_COUNT];
        for (slot, (mag, deg)) in gammas.iter_mut().zip(pairs) {
            *slot = Complex64::from_polar(mag, deg.to_radians());
        }
        Self::new(gammas)
    }

    /// Coefficient for one wall.
    pub fn get(&self, wall: WallId) -> Complex64 {
        self.gammas[wall.index()]
    }

    /// All coefficients in wall order.
    pub fn as_array(&self) -> &[Complex64; WALL_COUNT] {
        &self.gammas
    }

    /// `(magnitude, phase in degrees)` pairs in wall order, phases in `[0, 360)`.
    pub fn to_polar_deg(&self) -> [(f64, f64); WALL_COUNT] {
        self.gammas.map(|g| {
            let mag = g.norm();
            let mut deg = g.arg().to_degrees();
            if deg < 0.0 {
                deg += 360.0;
            }
            if deg >= 360.0 {
                deg = 0.0;
            }
            (mag, deg)
        })
    }
}

/// Complex field samples over a receive grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMap {
    pub data: Vec<Complex64>,
    pub meta: GridMeta,
    pub frequency_hz: f64,
    pub provenance: Provenance,
}

impl ComplexMap {
    /// Builds a map, checking cell count and finiteness.
    pub fn new(
        data: Vec<Complex64>,
        meta: GridMeta,
        frequency_hz: f64,
        provenance: Provenance,
    ) -> Result<Self> {
        if data.len() != meta.cells() {
            return Err(Error::InvalidMap(format!(
                "expected {} cells, got {}",
                meta.cells(),
                data.len()
            )));
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidMap("non-finite cell value".into()));
        }
        Ok(ComplexMap {
            data,
            meta,
            frequency_hz,
            provenance,
        })
    }

    /// Value at cell `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[self.meta.idx(i, j)]
    }
}

/// Evaluates the forward model over the scene grid at one frequency.
///
/// The per-cell sum runs in the fixed order: direct field first, then the
/// wall images in coefficient order.
pub fn total_field_map(
    scene: &SceneConfig,
    gammas: &ReflectionSet,
    f_hz: f64,
) -> Result<ComplexMap> {
    validate_scene(scene)?;
    let k = wavenumber(f_hz)?;
    let images = image_sources(&scene.room, &scene.tx);
    let points = grid_points(&scene.grid);
    let tx = scene.tx.position;
    let p0 = scene.tx.dipole_moment;
    let g = gammas.as_array();

    let data = points
        .par_iter()
        .map(|&p| -> Result<Complex64> {
            let mut e = dipole_ez(tx, p, k, p0)?;
            for (idx, (_, img)) in images.iter().enumerate() {
                e += g[idx] * dipole_ez(*img, p, k, p0)?;
            }
            Ok(e)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ComplexMap {
        data,
        meta: scene.grid.meta(),
        frequency_hz: f_hz,
        provenance: Provenance::Simulated,
    })
}

/// One forward map per scene frequency, in frequency order.
pub fn sweep_maps(scene: &SceneConfig, gammas: &ReflectionSet) -> Result<Vec<ComplexMap>> {
    validate_scene(scene)?;
    scene
        .freqs
        .frequencies
        .iter()
        .map(|&f| total_field_map(scene, gammas, f))
        .collect()
}

/// Per-source field maps at one frequency: the direct map and the six
/// unweighted image maps. Composing with a coefficient set is then linear.
#[derive(Debug, Clone)]
pub struct FieldBasis {
    pub frequency_hz: f64,
    pub meta: GridMeta,
    pub direct: Vec<Complex64>,
    pub images: [Vec<Complex64>; WALL_COUNT],
}

/// Computes the per-source basis maps for one frequency.
pub fn field_basis(scene: &SceneConfig, f_hz: f64) -> Result<FieldBasis> {
    validate_scene(scene)?;
    let k = wavenumber(f_hz)?;
    let images = image_sources(&scene.room, &scene.tx);
    let points = grid_points(&scene.grid);
    let tx = scene.tx.position;
    let p0 = scene.tx.dipole_moment;

    let rows = points
        .par_iter()
        .map(|&p| -> Result<[Complex64; WALL_COUNT + 1]> {
            let mut row = [Complex64::ZERO; WALL_COUNT + 1];
            row[0] = dipole_ez(tx, p, k, p0)?;
            for (idx, (_, img)) in images.iter().enumerate() {
                row[idx + 1] = dipole_ez(*img, p, k, p0)?;
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let cells = rows.len();
    let mut direct = Vec::with_capacity(cells);
    let mut image_maps: [Vec<Complex64>; WALL_COUNT] =
        std::array::from_fn(|_| Vec::with_capacity(cells));
    for row in rows {
        direct.push(row[0]);
        for (idx, map) in image_maps.iter_mut().enumerate() {
            map.push(row[idx + 1]);
        }
    }

    Ok(FieldBasis {
        frequency_hz: f_hz,
        meta: scene.grid.meta(),
        direct,
        images: image_maps,
    })
}

/// One basis per scene frequency, in frequency order.
pub fn basis_set(scene: &SceneConfig) -> Result<Vec<FieldBasis>> {
    scene
        .freqs
        .frequencies
        .iter()
        .map(|&f| field_basis(scene, f))
        .collect()
}

impl FieldBasis {
    /// Total field for a coefficient set, summed in the same fixed order as
    /// [`total_field_map`]; the two agree bitwise for equal inputs.
    pub fn compose(&self, gammas: &ReflectionSet) -> ComplexMap {
        let g = gammas.as_array();
        let data = (0..self.direct.len())
            .map(|m| {
                let mut e = self.direct[m];
                for (idx, img) in self.images.iter().enumerate() {
                    e += g[idx] * img[m];
                }
                e
            })
            .collect();
        ComplexMap {
            data,
            meta: self.meta,
            frequency_hz: self.frequency_hz,
            provenance: Provenance::Simulated,
        }
    }
}

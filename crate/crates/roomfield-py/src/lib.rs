//! Python bindings: thin wrappers around the `roomfield` crate.
//!
//! Scenes, coefficient sets, and maps are exposed as frozen classes; all
//! operations return new objects. Complex values cross the boundary as
//! Python `complex`.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyModule;
use roomfield::calibrate::{calibrate as run_calibration, CalibrationConfig, CalibrationResult};
use roomfield::forward::{total_field_map, ComplexMap, ReflectionSet};
use roomfield::io::{
    read_gammas, read_map, read_scene, write_complex_map, write_gammas, write_real_map,
    write_scene, MapData,
};
use roomfield::mapops::{self, attenuation_map, normalize_max, RealMap, DEFAULT_NOISE_FLOOR};
use roomfield::scene::{FrequencySpec, SceneConfig};
use roomfield::similarity::{self, ShiftSearch};
use roomfield::synth::{shift_map, synth_reference, SynthSpec};
use std::path::PathBuf;

fn py_err(e: roomfield::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Room, transmitter, receive grid, and frequency list.
#[pyclass(frozen, module = "roomfield_py")]
struct Scene {
    inner: SceneConfig,
}

#[pymethods]
impl Scene {
    /// The measured 162 x 80 laboratory scene at 2.48 GHz.
    #[staticmethod]
    fn lab_room() -> Self {
        Scene {
            inner: SceneConfig::lab_room(),
        }
    }

    /// The same room on the coarser 81 x 40 grid.
    #[staticmethod]
    fn lab_room_reduced() -> Self {
        Scene {
            inner: SceneConfig::lab_room_reduced(),
        }
    }

    /// The full grid swept from 2.40 to 2.50 GHz in 10 MHz steps.
    #[staticmethod]
    fn lab_room_sweep() -> Self {
        Scene {
            inner: SceneConfig::lab_room_sweep(),
        }
    }

    /// Reads a scene file; returns `(scene, gammas_or_none)`.
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<(Scene, Option<Gammas>)> {
        let (scene, gammas) = read_scene(&path).map_err(py_err)?;
        Ok((Scene { inner: scene }, gammas.map(|g| Gammas { inner: g })))
    }

    /// Writes the scene, optionally embedding a coefficient set.
    #[pyo3(signature = (path, gammas=None))]
    fn save(&self, path: PathBuf, gammas: Option<&Gammas>) -> PyResult<()> {
        write_scene(&self.inner, gammas.map(|g| &g.inner), &path).map_err(py_err)
    }

    /// Copy of this scene with a different receive grid resolution.
    fn with_grid(&self, n_u: usize, n_v: usize, step: f64) -> Scene {
        let mut scene = self.inner.clone();
        scene.grid.n_u = n_u;
        scene.grid.n_v = n_v;
        scene.grid.step_u = step;
        scene.grid.step_v = step;
        Scene { inner: scene }
    }

    /// Copy of this scene restricted to one frequency.
    fn at_frequency(&self, f_hz: f64) -> Scene {
        let mut scene = self.inner.clone();
        scene.freqs = FrequencySpec::single(f_hz);
        Scene { inner: scene }
    }

    #[getter]
    fn room_size(&self) -> (f64, f64, f64) {
        let r = &self.inner.room;
        (r.size_x, r.size_y, r.size_z)
    }

    #[getter]
    fn tx_position(&self) -> (f64, f64, f64) {
        let p = self.inner.tx.position;
        (p.x, p.y, p.z)
    }

    #[getter]
    fn grid_shape(&self) -> (usize, usize) {
        (self.inner.grid.n_u, self.inner.grid.n_v)
    }

    #[getter]
    fn frequencies(&self) -> Vec<f64> {
        self.inner.freqs.frequencies.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scene({} x {} grid, {} frequency(ies))",
            self.inner.grid.n_u,
            self.inner.grid.n_v,
            self.inner.freqs.frequencies.len()
        )
    }
}

/// One complex reflection coefficient per wall, in the fixed order
/// right, left, ceiling, ground, back_rx, back_tx.
#[pyclass(frozen, module = "roomfield_py")]
struct Gammas {
    inner: ReflectionSet,
}

#[pymethods]
impl Gammas {
    /// Builds a set from six `(magnitude, phase_degrees)` pairs.
    #[staticmethod]
    fn from_polar(pairs: Vec<(f64, f64)>) -> PyResult<Self> {
        let arr: [(f64, f64); 6] = pairs
            .try_into()
            .map_err(|_| PyValueError::new_err("expected exactly six (mag, deg) pairs"))?;
        Ok(Gammas {
            inner: ReflectionSet::from_polar_deg(arr).map_err(py_err)?,
        })
    }

    /// The same coefficient on every wall.
    #[staticmethod]
    fn uniform(gamma: Complex64) -> PyResult<Self> {
        Ok(Gammas {
            inner: ReflectionSet::uniform(gamma).map_err(py_err)?,
        })
    }

    /// All-zero coefficients (free space, direct field only).
    #[staticmethod]
    fn zero() -> Self {
        Gammas {
            inner: ReflectionSet::zero(),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Gammas {
            inner: read_gammas(&path).map_err(py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_gammas(&self.inner, &path).map_err(py_err)
    }

    /// The six coefficients as Python complex numbers, in wall order.
    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.as_array().to_vec()
    }

    /// `(magnitude, phase_degrees)` pairs in wall order, phases in [0, 360).
    fn to_polar(&self) -> Vec<(f64, f64)> {
        self.inner.to_polar_deg().to_vec()
    }

    fn __repr__(&self) -> String {
        let polar = self.inner.to_polar_deg();
        let parts: Vec<String> = polar
            .iter()
            .map(|(m, d)| format!("{m:.3}@{d:.1}"))
            .collect();
        format!("Gammas({})", parts.join(", "))
    }
}

/// Complex field samples over the receive grid, row-major.
#[pyclass(frozen, module = "roomfield_py")]
struct FieldMap {
    inner: ComplexMap,
}

#[pymethods]
impl FieldMap {
    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.data.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.meta.n_u, self.inner.meta.n_v)
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    /// Per-cell linear magnitude.
    fn magnitude(&self) -> MagnitudeMap {
        MagnitudeMap {
            inner: mapops::magnitude(&self.inner),
        }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_complex_map(&self.inner, &path).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "FieldMap({} x {} at {:.4} GHz)",
            self.inner.meta.n_u,
            self.inner.meta.n_v,
            self.inner.frequency_hz / 1e9
        )
    }
}

/// Real-valued map (linear magnitude, dB, or normalized), row-major.
#[pyclass(frozen, module = "roomfield_py")]
struct MagnitudeMap {
    inner: RealMap,
}

#[pymethods]
impl MagnitudeMap {
    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.data.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.meta.n_u, self.inner.meta.n_v)
    }

    #[getter]
    fn unit(&self) -> &'static str {
        self.inner.unit.name()
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    /// Map scaled so its peak is 1.
    fn normalized(&self) -> PyResult<MagnitudeMap> {
        Ok(MagnitudeMap {
            inner: normalize_max(&self.inner).map_err(py_err)?,
        })
    }

    /// Copy with the content moved by `(du, dv)` cells; vacated cells are 0.
    fn shifted(&self, du: i64, dv: i64) -> PyResult<MagnitudeMap> {
        Ok(MagnitudeMap {
            inner: shift_map(&self.inner, du, dv).map_err(py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_real_map(&self.inner, &path).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MagnitudeMap({} x {}, {})",
            self.inner.meta.n_u,
            self.inner.meta.n_v,
            self.inner.unit.name()
        )
    }
}

/// Calibration outcome: fitted coefficients plus diagnostics.
#[pyclass(frozen, module = "roomfield_py")]
struct Report {
    inner: CalibrationResult,
}

#[pymethods]
impl Report {
    #[getter]
    fn gammas(&self) -> Gammas {
        Gammas {
            inner: self.inner.gammas,
        }
    }

    #[getter]
    fn rho(&self) -> f64 {
        self.inner.rho_achieved
    }

    #[getter]
    fn evals(&self) -> usize {
        self.inner.evals_used
    }

    #[getter]
    fn best_restart(&self) -> usize {
        self.inner.best_restart
    }

    #[getter]
    fn stalled(&self) -> bool {
        self.inner.stalled
    }

    /// Relative image-field strength per wall; low values mean the wall
    /// barely influences the map and its coefficient is poorly determined.
    #[getter]
    fn sensitivity(&self) -> Vec<f64> {
        self.inner.sensitivity.to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "Report(rho={:.6}, evals={}, stalled={})",
            self.inner.rho_achieved, self.inner.evals_used, self.inner.stalled
        )
    }
}

/// Simulates the complex field at one frequency.
#[pyfunction]
#[pyo3(signature = (scene, gammas, freq_hz=None))]
fn simulate(scene: &Scene, gammas: &Gammas, freq_hz: Option<f64>) -> PyResult<FieldMap> {
    let f = match freq_hz {
        Some(f) => f,
        None if scene.inner.freqs.is_single() => scene.inner.freqs.frequencies[0],
        None => {
            return Err(PyValueError::new_err(
                "scene lists several frequencies; pass freq_hz or use simulate_sweep",
            ))
        }
    };
    Ok(FieldMap {
        inner: total_field_map(&scene.inner, &gammas.inner, f).map_err(py_err)?,
    })
}

/// Simulates every frequency in the scene's list.
#[pyfunction]
fn simulate_sweep(scene: &Scene, gammas: &Gammas) -> PyResult<Vec<FieldMap>> {
    scene
        .inner
        .freqs
        .frequencies
        .iter()
        .map(|&f| {
            Ok(FieldMap {
                inner: total_field_map(&scene.inner, &gammas.inner, f).map_err(py_err)?,
            })
        })
        .collect()
}

/// Averages per-frequency magnitudes into one real map.
#[pyfunction]
fn freq_average(maps: Vec<PyRef<FieldMap>>) -> PyResult<MagnitudeMap> {
    let inner: Vec<ComplexMap> = maps.iter().map(|m| m.inner.clone()).collect();
    Ok(MagnitudeMap {
        inner: mapops::freq_average(&inner).map_err(py_err)?,
    })
}

/// Per-cell attenuation `20 log10(fp / tar)` in dB.
#[pyfunction]
#[pyo3(signature = (fp, tar, noise_floor=DEFAULT_NOISE_FLOOR))]
fn attenuation(fp: &MagnitudeMap, tar: &MagnitudeMap, noise_floor: f64) -> PyResult<MagnitudeMap> {
    Ok(MagnitudeMap {
        inner: attenuation_map(&fp.inner, &tar.inner, noise_floor)
            .map_err(py_err)?
            .map,
    })
}

/// Pearson correlation between two same-shaped maps.
#[pyfunction]
fn pearson(a: &MagnitudeMap, b: &MagnitudeMap) -> PyResult<f64> {
    similarity::pearson(&a.inner, &b.inner).map_err(py_err)
}

/// Maximum Pearson correlation over integer shifts; returns
/// `(rho, (du, dv), overlap_cells)`.
#[pyfunction]
#[pyo3(signature = (a, b, max_shift_u, max_shift_v, min_overlap=0.5))]
fn pearson_max_shift(
    a: &MagnitudeMap,
    b: &MagnitudeMap,
    max_shift_u: usize,
    max_shift_v: usize,
    min_overlap: f64,
) -> PyResult<(f64, (i64, i64), usize)> {
    let search = ShiftSearch {
        max_shift_u,
        max_shift_v,
        min_overlap_fraction: min_overlap,
    };
    let res = similarity::pearson_max_shift(&a.inner, &b.inner, &search).map_err(py_err)?;
    Ok((res.rho, res.shift, res.overlap_cells))
}

/// Synthetic reference magnitude map: forward model, optional dB-domain
/// noise, optional pixel shift.
#[pyfunction]
#[pyo3(signature = (scene, gammas_true, noise_db=0.0, shift=(0, 0), seed=0))]
fn synth(
    scene: &Scene,
    gammas_true: &Gammas,
    noise_db: f64,
    shift: (i64, i64),
    seed: u64,
) -> PyResult<MagnitudeMap> {
    let spec = SynthSpec {
        scene: scene.inner.clone(),
        gammas_true: gammas_true.inner,
        noise_sigma_db: noise_db,
        pixel_shift: shift,
        rng_seed: seed,
    };
    Ok(MagnitudeMap {
        inner: synth_reference(&spec).map_err(py_err)?,
    })
}

/// Fits the six reflection coefficients to a reference magnitude map by
/// maximizing Pearson correlation.
#[pyfunction]
#[pyo3(signature = (scene, reference, restarts=8, max_evals=20_000, seed=0,
                    init_magnitude=0.2, init_phase_deg=0.0,
                    shift_max=false, max_shift=(5, 5), min_overlap=0.5))]
#[allow(clippy::too_many_arguments)]
fn calibrate(
    scene: &Scene,
    reference: &MagnitudeMap,
    restarts: usize,
    max_evals: usize,
    seed: u64,
    init_magnitude: f64,
    init_phase_deg: f64,
    shift_max: bool,
    max_shift: (usize, usize),
    min_overlap: f64,
) -> PyResult<Report> {
    let cfg = CalibrationConfig {
        init_magnitude,
        init_phase_deg,
        restarts,
        max_objective_evals: max_evals,
        use_shift_max: shift_max,
        shift_search: ShiftSearch {
            max_shift_u: max_shift.0,
            max_shift_v: max_shift.1,
            min_overlap_fraction: min_overlap,
        },
        rng_seed: seed,
        ..CalibrationConfig::default()
    };
    Ok(Report {
        inner: run_calibration(&scene.inner, &reference.inner, &cfg).map_err(py_err)?,
    })
}

/// Reads a map file; returns a `FieldMap` or a `MagnitudeMap` depending on
/// the stored kind.
#[pyfunction]
fn load_map(py: Python<'_>, path: PathBuf) -> PyResult<Py<PyAny>> {
    match read_map(&path).map_err(py_err)? {
        MapData::Complex(m) => Ok(FieldMap { inner: m }.into_pyobject(py)?.into_any().unbind()),
        MapData::Real(m) => Ok(MagnitudeMap { inner: m }
            .into_pyobject(py)?
            .into_any()
            .unbind()),
    }
}

#[pymodule]
fn roomfield_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scene>()?;
    m.add_class::<Gammas>()?;
    m.add_class::<FieldMap>()?;
    m.add_class::<MagnitudeMap>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(freq_average, m)?)?;
    m.add_function(wrap_pyfunction!(attenuation, m)?)?;
    m.add_function(wrap_pyfunction!(pearson, m)?)?;
    m.add_function(wrap_pyfunction!(pearson_max_shift, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    m.add_function(wrap_pyfunction!(calibrate, m)?)?;
    m.add_function(wrap_pyfunction!(load_map, m)?)?;
    m.add(
        "WALL_ORDER",
        ["right", "left", "ceiling", "ground", "back_rx", "back_tx"],
    )?;
    Ok(())
}

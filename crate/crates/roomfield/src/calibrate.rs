//! Fits the six wall reflection coefficients to a reference magnitude map
//! by maximizing Pearson correlation with the forward model.
//!
//! The model is linear in the coefficients, so the seven per-source basis
//! maps are computed once per frequency and every objective evaluation is a
//! handful of multiply-adds per cell. The search runs a projected
//! Nelder-Mead over 12 parameters (six magnitudes in `[0, 1]`, six phases
//! in degrees, unbounded during the search and wrapped on output) with
//! multiple restarts; restarts are independent and run in parallel, and the
//! whole procedure is deterministic for a fixed seed.

use crate::error::Error;
use crate::forward::{basis_set, FieldBasis, ReflectionSet};
use crate::mapops::{normalize_max, MapUnit, RealMap};
use crate::optim::{nelder_mead, NmOptions};
use crate::scene::{validate_scene, GridMeta, SceneConfig, WALL_COUNT};
use crate::similarity::{pearson_max_shift, ShiftSearch};
use crate::Result;
use num_complex::Complex64;
use rayon::prelude::*;

/// Objective value reported for degenerate (zero-variance) model maps;
/// the worst possible value, since the objective is the negated correlation.
const WORST_OBJECTIVE: f64 = 1.0;

/// Initial simplex steps: coefficient magnitude and phase in degrees.
const MAG_STEP: f64 = 0.08;
const PHASE_STEP_DEG: f64 = 30.0;
/// Per-round step shrink for the iterated restarts, with floors.
const STEP_SHRINK: f64 = 0.3;
const MIN_MAG_STEP: f64 = 1e-4;
const MIN_PHASE_STEP_DEG: f64 = 0.05;

/// Settings for [`calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrationConfig {
    /// Magnitude of every coefficient at the first restart's start point.
    pub init_magnitude: f64,
    /// Phase (degrees) of every coefficient at the first restart's start point.
    pub init_phase_deg: f64,
    /// Number of independent optimizer starts. The first uses the
    /// configured start point; the rest draw random starts from the seed.
    pub restarts: usize,
    /// Total objective-evaluation budget, split evenly across restarts.
    pub max_objective_evals: usize,
    /// Simplex f-spread at which one optimizer run stops.
    pub convergence_tol: f64,
    /// Score candidates with the shift-maximized correlation instead of the
    /// plain one. Costs one shift search per objective evaluation.
    pub use_shift_max: bool,
    /// Shift search settings, used only when `use_shift_max` is set.
    pub shift_search: ShiftSearch,
    /// Seed for the random restart start points.
    pub rng_seed: u64,
    /// Record every objective evaluation in [`CalibrationResult::trace`].
    pub collect_trace: bool,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            init_magnitude: 0.2,
            init_phase_deg: 0.0,
            restarts: 8,
            max_objective_evals: 20_000,
            convergence_tol: 1e-6,
            use_shift_max: false,
            shift_search: ShiftSearch::default(),
            rng_seed: 0,
            collect_trace: false,
        }
    }
}

/// One objective evaluation, for convergence inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    /// Restart the evaluation belongs to.
    pub restart: usize,
    /// 1-based evaluation index within that restart.
    pub eval: usize,
    /// Correlation of the candidate (negated objective).
    pub rho: f64,
}

/// Start point and outcome of one restart.
#[derive(Debug, Clone)]
pub struct RestartRecord {
    /// Coefficients the restart started from.
    pub init: ReflectionSet,
    /// Best correlation the restart reached.
    pub rho: f64,
    /// Objective evaluations the restart spent.
    pub evals: usize,
}

/// Outcome of [`calibrate`].
#[derive(Debug, Clone)]
pub struct CalibrationResult {
    /// Best coefficient set found.
    pub gammas: ReflectionSet,
    /// Correlation achieved by [`CalibrationResult::gammas`].
    pub rho_achieved: f64,
    /// Total objective evaluations across restarts.
    pub evals_used: usize,
    /// Index of the winning restart.
    pub best_restart: usize,
    /// Per-restart start points and outcomes, in restart order.
    pub restarts: Vec<RestartRecord>,
    /// Mean image-to-direct field magnitude ratio per wall, a measure of
    /// how visible each wall is in the data.
    pub sensitivity: [f64; WALL_COUNT],
    /// True when the budget ran out without improving on the configured
    /// start point; the result is still the best point seen.
    pub stalled: bool,
    /// Every objective evaluation, when trace collection was enabled.
    pub trace: Vec<TracePoint>,
}

fn gammas_from_x(x: &[f64]) -> ReflectionSet {
    let mut g = [Complex64::ZERO; WALL_COUNT];
    for (i, slot) in g.iter_mut().enumerate() {
        *slot = Complex64::from_polar(x[i], x[WALL_COUNT + i].to_radians());
    }
    ReflectionSet::new(g).expect("magnitudes are clamped to [0, 1]")
}

/// Clamp magnitudes to the passive range; phases roam freely during the
/// search (the polar form wraps them implicitly) and are normalized on output.
fn project(x: &mut [f64]) {
    for m in x.iter_mut().take(WALL_COUNT) {
        *m = m.clamp(0.0, 1.0);
    }
}

fn check_reference(reference: &RealMap, meta: &GridMeta) -> Result<()> {
    if reference.meta.n_u != meta.n_u || reference.meta.n_v != meta.n_v {
        return Err(Error::DimensionMismatch {
            a_nu: reference.meta.n_u,
            a_nv: reference.meta.n_v,
            b_nu: meta.n_u,
            b_nv: meta.n_v,
        });
    }
    if reference.meta.step_u != meta.step_u || reference.meta.step_v != meta.step_v {
        return Err(Error::InvalidMap("grid pitch differs between maps".into()));
    }
    if reference.unit == MapUnit::Decibels {
        return Err(Error::InvalidMap(
            "reference must be a linear or normalized magnitude map".into(),
        ));
    }
    Ok(())
}

fn check_config(cfg: &CalibrationConfig) -> Result<()> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidCalibration(
            "restarts must be at least 1".into(),
        ));
    }
    if cfg.max_objective_evals < cfg.restarts {
        return Err(Error::InvalidCalibration(
            "max_objective_evals must be at least the restart count".into(),
        ));
    }
    if !(cfg.convergence_tol > 0.0 && cfg.convergence_tol.is_finite()) {
        return Err(Error::InvalidCalibration(
            "convergence_tol must be positive".into(),
        ));
    }
    if !(0.0..=1.0).contains(&cfg.init_magnitude) {
        return Err(Error::InvalidCalibration(
            "init_magnitude must be in [0, 1]".into(),
        ));
    }
    if !cfg.init_phase_deg.is_finite() {
        return Err(Error::InvalidCalibration(
            "init_phase_deg must be finite".into(),
        ));
    }
    Ok(())
}

/// How candidates are scored against the reference.
enum Scoring<'a> {
    /// Precentered reference for a fast plain-Pearson path.
    Plain { ref_dev: Vec<f64>, ref_norm: f64 },
    /// Full shift search per evaluation.
    ShiftMax {
        reference: &'a RealMap,
        search: ShiftSearch,
    },
}

/// Shared state for objective evaluations: the basis maps and the scoring
/// mode. Read-only during the search, so restarts can share it across
/// threads.
struct Evaluator<'a> {
    basis: &'a [FieldBasis],
    cells: usize,
    scoring: Scoring<'a>,
}

impl<'a> Evaluator<'a> {
    fn new(
        reference: &'a RealMap,
        basis: &'a [FieldBasis],
        cfg: &CalibrationConfig,
    ) -> Result<Self> {
        let first = basis
            .first()
            .ok_or_else(|| Error::InvalidCalibration("empty basis".into()))?;
        for fb in basis {
            if fb.meta != first.meta {
                return Err(Error::InvalidCalibration(
                    "basis maps disagree on the grid".into(),
                ));
            }
        }
        check_reference(reference, &first.meta)?;
        if reference.data.windows(2).all(|w| w[0] == w[1]) {
            return Err(Error::ConstantMap);
        }
        let cells = first.meta.cells();
        let scoring = if cfg.use_shift_max {
            if cfg.shift_search.max_shift_u >= first.meta.n_u
                || cfg.shift_search.max_shift_v >= first.meta.n_v
            {
                return Err(Error::InvalidShiftSearch(
                    "shift radius reaches the grid size".into(),
                ));
            }
            if !(cfg.shift_search.min_overlap_fraction > 0.0
                && cfg.shift_search.min_overlap_fraction <= 1.0)
            {
                return Err(Error::InvalidShiftSearch(
                    "min_overlap_fraction must be in (0, 1]".into(),
                ));
            }
            Scoring::ShiftMax {
                reference,
                search: cfg.shift_search,
            }
        } else {
            let n = cells as f64;
            let mean = reference.data.iter().sum::<f64>() / n;
            let ref_dev: Vec<f64> = reference.data.iter().map(|v| v - mean).collect();
            let ref_norm = ref_dev.iter().map(|d| d * d).sum::<f64>().sqrt();
            Scoring::Plain { ref_dev, ref_norm }
        };
        Ok(Evaluator {
            basis,
            cells,
            scoring,
        })
    }

    /// Model magnitude map for a coefficient set, averaged over frequencies,
    /// written into `model`. Matches the `compose` + `freq_average` map
    /// pipeline operation for operation.
    fn model_magnitudes(&self, gammas: &ReflectionSet, model: &mut [f64]) {
        let g = gammas.as_array();
        model.fill(0.0);
        for fb in self.basis {
            for (m, slot) in model.iter_mut().enumerate() {
                let mut e = fb.direct[m];
                for (idx, img) in fb.images.iter().enumerate() {
                    e += g[idx] * img[m];
                }
                *slot += e.norm();
            }
        }
        if self.basis.len() > 1 {
            let nf = self.basis.len() as f64;
            for slot in model.iter_mut() {
                *slot /= nf;
            }
        }
    }

    /// Negated correlation of a candidate; `WORST_OBJECTIVE` when the model
    /// map is degenerate for scoring.
    fn eval(&self, gammas: &ReflectionSet, scratch: &mut [f64]) -> f64 {
        self.model_magnitudes(gammas, scratch);
        match &self.scoring {
            Scoring::Plain { ref_dev, ref_norm } => {
                let n = self.cells as f64;
                let mean = scratch.iter().sum::<f64>() / n;
                let mut num = 0.0;
                let mut var = 0.0;
                for (&v, &rd) in scratch.iter().zip(ref_dev.iter()) {
                    let d = v - mean;
                    num += d * rd;
                    var += d * d;
                }
                if var == 0.0 || *ref_norm == 0.0 {
                    return WORST_OBJECTIVE;
                }
                -(num / (var.sqrt() * ref_norm)).clamp(-1.0, 1.0)
            }
            Scoring::ShiftMax { reference, search } => {
                let model = RealMap {
                    data: scratch.to_vec(),
                    meta: reference.meta,
                    unit: MapUnit::LinearMagnitude,
                    frequency_hz: self.basis[0].frequency_hz,
                    provenance: crate::forward::Provenance::Simulated,
                };
                match pearson_max_shift(reference, &model, search) {
                    Ok(res) => -res.rho,
                    Err(_) => WORST_OBJECTIVE,
                }
            }
        }
    }
}

/// Mean image-to-direct magnitude ratio per wall, over all cells and
/// frequencies of the basis.
pub fn wall_sensitivity(basis: &[FieldBasis]) -> [f64; WALL_COUNT] {
    let mut direct_sum = 0.0;
    let mut image_sums = [0.0; WALL_COUNT];
    for fb in basis {
        direct_sum += fb.direct.iter().map(|z| z.norm()).sum::<f64>();
        for (idx, img) in fb.images.iter().enumerate() {
            image_sums[idx] += img.iter().map(|z| z.norm()).sum::<f64>();
        }
    }
    if direct_sum == 0.0 {
        return [0.0; WALL_COUNT];
    }
    image_sums.map(|s| s / direct_sum)
}

/// The value [`calibrate`] minimizes: the negated correlation between the
/// reference and the model composed from `basis` with `gammas`. Returns
/// `+1.0` (the worst value) for candidates whose model map is degenerate.
pub fn objective(
    reference: &RealMap,
    basis: &[FieldBasis],
    gammas: &ReflectionSet,
    cfg: &CalibrationConfig,
) -> Result<f64> {
    let ev = Evaluator::new(reference, basis, cfg)?;
    let mut scratch = vec![0.0; ev.cells];
    Ok(ev.eval(gammas, &mut scratch))
}

struct RestartOutcome {
    x: Vec<f64>,
    f: f64,
    evals: usize,
    init_f: f64,
    init: ReflectionSet,
    trace: Vec<TracePoint>,
}

fn run_restart(
    ev: &Evaluator<'_>,
    restart: usize,
    init_x: Vec<f64>,
    budget: usize,
    cfg: &CalibrationConfig,
) -> RestartOutcome {
    let mut scratch = vec![0.0; ev.cells];
    let mut trace = Vec::new();
    let mut spent = 0usize;
    let collect = cfg.collect_trace;

    let mut best_x = init_x;
    project(&mut best_x);
    let init = gammas_from_x(&best_x);

    let mut objective = |x: &[f64], spent: &mut usize, trace: &mut Vec<TracePoint>| -> f64 {
        *spent += 1;
        let f = ev.eval(&gammas_from_x(x), &mut scratch);
        if collect {
            trace.push(TracePoint {
                restart,
                eval: *spent,
                rho: -f,
            });
        }
        f
    };

    let mut best_f = objective(&best_x, &mut spent, &mut trace);
    let init_f = best_f;

    // Iterated runs from the incumbent with shrinking steps; stop after two
    // rounds without a tolerance-sized gain or when the budget is gone.
    let mut mag_step = MAG_STEP;
    let mut phase_step = PHASE_STEP_DEG;
    let mut flat_rounds = 0;
    while spent < budget && flat_rounds < 2 {
        let mut steps = vec![mag_step; WALL_COUNT];
        steps.extend(std::iter::repeat_n(phase_step, WALL_COUNT));
        let opts = NmOptions {
            max_evals: budget - spent,
            ftol: cfg.convergence_tol,
        };
        let mut f = |x: &[f64]| objective(x, &mut spent, &mut trace);
        let out = nelder_mead(&mut f, &project, &best_x, &steps, &opts);
        let gained = best_f - out.f > cfg.convergence_tol;
        if out.f < best_f {
            best_f = out.f;
            best_x = out.x;
        }
        flat_rounds = if gained { 0 } else { flat_rounds + 1 };
        mag_step = (mag_step * STEP_SHRINK).max(MIN_MAG_STEP);
        phase_step = (phase_step * STEP_SHRINK).max(MIN_PHASE_STEP_DEG);
    }

    RestartOutcome {
        x: best_x,
        f: best_f,
        evals: spent,
        init_f,
        init,
        trace,
    }
}

/// Fits the reflection coefficients so the forward model's magnitude map
/// correlates best with `reference` (any positive rescaling of the
/// reference gives the same fit; it is peak-normalized internally).
///
/// When the scene has several frequencies, model magnitudes are averaged
/// over all of them, matching a frequency-averaged reference.
pub fn calibrate(
    scene: &SceneConfig,
    reference: &RealMap,
    cfg: &CalibrationConfig,
) -> Result<CalibrationResult> {
    validate_scene(scene)?;
    check_config(cfg)?;
    check_reference(reference, &scene.grid.meta())?;
    let reference_n = normalize_max(reference)?;

    let basis = basis_set(scene)?;
    let sensitivity = wall_sensitivity(&basis);
    let ev = Evaluator::new(&reference_n, &basis, cfg)?;

    let budget = (cfg.max_objective_evals / cfg.restarts).max(1);

    // Start points: the configured one, then seeded random draws with
    // magnitudes in [0, 0.5) and free phases.
    let mut inits: Vec<Vec<f64>> = Vec::with_capacity(cfg.restarts);
    let mut first = vec![cfg.init_magnitude; WALL_COUNT];
    first.extend(std::iter::repeat_n(cfg.init_phase_deg, WALL_COUNT));
    inits.push(first);
    {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.rng_seed);
        for _ in 1..cfg.restarts {
            let mut x = Vec::with_capacity(2 * WALL_COUNT);
            for _ in 0..WALL_COUNT {
                x.push(rng.random_range(0.0..0.5));
            }
            for _ in 0..WALL_COUNT {
                x.push(rng.random_range(0.0..360.0));
            }
            inits.push(x);
        }
    }

    let outcomes: Vec<RestartOutcome> = inits
        .into_par_iter()
        .enumerate()
        .map(|(r, init_x)| run_restart(&ev, r, init_x, budget, cfg))
        .collect();

    let mut best_idx = 0;
    for (i, out) in outcomes.iter().enumerate() {
        if out.f < outcomes[best_idx].f {
            best_idx = i;
        }
    }
    let evals_used: usize = outcomes.iter().map(|o| o.evals).sum();
    let init0_f = outcomes[0].init_f;
    let best = &outcomes[best_idx];
    let stalled = best.f >= init0_f && evals_used >= cfg.max_objective_evals;

    let restarts = outcomes
        .iter()
        .map(|o| RestartRecord {
            init: o.init,
            rho: -o.f,
            evals: o.evals,
        })
        .collect();
    let trace = if cfg.collect_trace {
        outcomes
            .iter()
            .flat_map(|o| o.trace.iter().copied())
            .collect()
    } else {
        Vec::new()
    };

    Ok(CalibrationResult {
        gammas: gammas_from_x(&best.x),
        rho_achieved: -best.f,
        evals_used,
        best_restart: best_idx,
        restarts,
        sensitivity,
        stalled,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{field_basis, total_field_map, Provenance};
    use crate::mapops::{freq_average, magnitude};
    use crate::scene::RxGrid;
    use crate::similarity::pearson;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Lab geometry shrunk to a coarse grid so tests stay fast.
    fn tiny_scene() -> SceneConfig {
        let mut scene = SceneConfig::lab_room();
        scene.grid = RxGrid {
            n_u: 20,
            n_v: 12,
            step_u: 0.25,
            step_v: 0.2,
            ..scene.grid.clone()
        };
        scene
    }

    fn truth() -> ReflectionSet {
        ReflectionSet::from_polar_deg([
            (0.19, 95.0),
            (0.15, 55.0),
            (0.11, 0.0),
            (0.17, 17.0),
            (0.11, 243.0),
            (0.70, 287.0),
        ])
        .unwrap()
    }

    fn reference_for(scene: &SceneConfig, gammas: &ReflectionSet) -> RealMap {
        let f = scene.freqs.frequencies[0];
        magnitude(&total_field_map(scene, gammas, f).unwrap())
    }

    #[test]
    fn objective_at_the_truth_is_minus_one() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let basis = vec![field_basis(&scene, scene.freqs.frequencies[0]).unwrap()];
        let f = objective(&reference, &basis, &truth(), &CalibrationConfig::default()).unwrap();
        assert!((f + 1.0).abs() < 1e-12, "{f}");
    }

    #[test]
    fn objective_matches_the_map_pipeline() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let basis = vec![field_basis(&scene, scene.freqs.frequencies[0]).unwrap()];
        let cfg = CalibrationConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let mut pairs = [(0.0, 0.0); WALL_COUNT];
            for p in pairs.iter_mut() {
                *p = (rng.random_range(0.0..1.0), rng.random_range(0.0..360.0));
            }
            let gam = ReflectionSet::from_polar_deg(pairs).unwrap();
            let fast = objective(&reference, &basis, &gam, &cfg).unwrap();
            let model = magnitude(&basis[0].compose(&gam));
            let slow = -pearson(&reference, &model).unwrap();
            assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
        }
    }

    #[test]
    fn objective_averages_frequencies_like_the_map_pipeline() {
        let mut scene = tiny_scene();
        scene.freqs.frequencies = vec![2.40e9, 2.45e9, 2.50e9];
        let maps = crate::forward::sweep_maps(&scene, &truth()).unwrap();
        let reference = freq_average(&maps).unwrap();
        let basis = basis_set(&scene).unwrap();
        let cfg = CalibrationConfig::default();
        let gam = ReflectionSet::uniform(Complex64::from_polar(0.3, 1.2)).unwrap();
        let fast = objective(&reference, &basis, &gam, &cfg).unwrap();
        let modeled: Vec<_> = basis.iter().map(|b| b.compose(&gam)).collect();
        let slow = -pearson(&reference, &freq_average(&modeled).unwrap()).unwrap();
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
    }

    #[test]
    fn degenerate_model_scores_worst() {
        let meta = GridMeta {
            n_u: 3,
            n_v: 2,
            step_u: 0.1,
            step_v: 0.1,
        };
        // A basis whose sources are all zero except a constant direct field
        // produces a constant model map for any coefficients.
        let basis = vec![FieldBasis {
            frequency_hz: 2.48e9,
            meta,
            direct: vec![Complex64::new(1.0, 0.0); 6],
            images: std::array::from_fn(|_| vec![Complex64::ZERO; 6]),
        }];
        let reference = RealMap::new(
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            meta,
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Measured,
        )
        .unwrap();
        let f = objective(
            &reference,
            &basis,
            &ReflectionSet::zero(),
            &CalibrationConfig::default(),
        )
        .unwrap();
        assert_eq!(f, WORST_OBJECTIVE);
    }

    #[test]
    fn recovers_planted_coefficients_on_a_coarse_grid() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let cfg = CalibrationConfig {
            max_objective_evals: 24_000,
            convergence_tol: 1e-9,
            rng_seed: 1,
            ..CalibrationConfig::default()
        };
        let result = calibrate(&scene, &reference, &cfg).unwrap();
        assert!(result.rho_achieved > 0.999, "rho {}", result.rho_achieved);
        let got = result.gammas.to_polar_deg();
        let want = truth().to_polar_deg();
        for (wall, (&(gm, gp), &(wm, wp))) in got.iter().zip(want.iter()).enumerate() {
            assert!((gm - wm).abs() <= 0.02, "wall {wall}: |gamma| {gm} vs {wm}");
            let dp = (gp - wp).abs();
            let dp = dp.min(360.0 - dp);
            assert!(dp <= 5.0, "wall {wall}: phase {gp} vs {wp}");
        }
        assert!(!result.stalled);
        assert_eq!(result.restarts.len(), cfg.restarts);
    }

    #[test]
    fn rho_achieved_matches_an_independent_recomputation() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let cfg = CalibrationConfig {
            max_objective_evals: 4_000,
            restarts: 2,
            ..CalibrationConfig::default()
        };
        let result = calibrate(&scene, &reference, &cfg).unwrap();
        let f = scene.freqs.frequencies[0];
        let model = magnitude(&total_field_map(&scene, &result.gammas, f).unwrap());
        let rho = pearson(&reference, &model).unwrap();
        assert!(
            (result.rho_achieved - rho).abs() < 1e-9,
            "{} vs {rho}",
            result.rho_achieved
        );
    }

    #[test]
    fn calibration_is_deterministic() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let cfg = CalibrationConfig {
            max_objective_evals: 3_000,
            restarts: 3,
            collect_trace: true,
            rng_seed: 9,
            ..CalibrationConfig::default()
        };
        let a = calibrate(&scene, &reference, &cfg).unwrap();
        let b = calibrate(&scene, &reference, &cfg).unwrap();
        assert_eq!(a.gammas, b.gammas);
        assert_eq!(a.rho_achieved, b.rho_achieved);
        assert_eq!(a.evals_used, b.evals_used);
        assert_eq!(a.best_restart, b.best_restart);
        assert_eq!(a.trace, b.trace);
    }

    #[test]
    fn halving_the_reference_changes_nothing() {
        // Positive rescaling cancels in the internal peak normalization;
        // a power-of-two factor cancels exactly, so the runs match bitwise.
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let halved = RealMap {
            data: reference.data.iter().map(|v| v * 0.5).collect(),
            ..reference.clone()
        };
        let cfg = CalibrationConfig {
            max_objective_evals: 2_000,
            restarts: 2,
            ..CalibrationConfig::default()
        };
        let a = calibrate(&scene, &reference, &cfg).unwrap();
        let b = calibrate(&scene, &halved, &cfg).unwrap();
        assert_eq!(a.gammas, b.gammas);
        assert_eq!(a.rho_achieved, b.rho_achieved);
    }

    #[test]
    fn a_one_eval_budget_stalls() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let cfg = CalibrationConfig {
            restarts: 1,
            max_objective_evals: 1,
            ..CalibrationConfig::default()
        };
        let result = calibrate(&scene, &reference, &cfg).unwrap();
        assert!(result.stalled);
        assert_eq!(result.evals_used, 1);
        // The returned set is the untouched start point.
        let expect = ReflectionSet::from_polar_deg([(0.2, 0.0); WALL_COUNT]).unwrap();
        assert_eq!(result.gammas, expect);
    }

    #[test]
    fn trace_covers_every_evaluation() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let cfg = CalibrationConfig {
            max_objective_evals: 600,
            restarts: 2,
            collect_trace: true,
            ..CalibrationConfig::default()
        };
        let result = calibrate(&scene, &reference, &cfg).unwrap();
        assert_eq!(result.trace.len(), result.evals_used);
        assert!(result.trace.iter().all(|t| t.restart < 2 && t.eval >= 1));
        let best = result.trace.iter().map(|t| t.rho).fold(f64::MIN, f64::max);
        assert!((best - result.rho_achieved).abs() < 1e-15);

        let without = calibrate(
            &scene,
            &reference,
            &CalibrationConfig {
                collect_trace: false,
                max_objective_evals: 600,
                restarts: 2,
                ..CalibrationConfig::default()
            },
        )
        .unwrap();
        assert!(without.trace.is_empty());
    }

    #[test]
    fn sensitivity_reflects_wall_visibility() {
        let scene = tiny_scene();
        let basis = basis_set(&scene).unwrap();
        let sens = wall_sensitivity(&basis);
        // Every wall's image lies farther from the grid than the source, so
        // ratios sit strictly between 0 and 1.
        for (i, &s) in sens.iter().enumerate() {
            assert!(s > 0.0 && s < 1.0, "wall {i}: {s}");
        }
        // The transmitter stands 0.1 m from its back wall, so that image is
        // barely farther from the grid than the source itself and dominates.
        let max = sens.iter().cloned().fold(f64::MIN, f64::max);
        assert_eq!(sens[5], max, "{sens:?}");
    }

    #[test]
    fn config_validation_rejects_nonsense() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        for cfg in [
            CalibrationConfig {
                restarts: 0,
                ..CalibrationConfig::default()
            },
            CalibrationConfig {
                max_objective_evals: 3,
                restarts: 8,
                ..CalibrationConfig::default()
            },
            CalibrationConfig {
                convergence_tol: 0.0,
                ..CalibrationConfig::default()
            },
            CalibrationConfig {
                init_magnitude: 1.5,
                ..CalibrationConfig::default()
            },
        ] {
            assert!(calibrate(&scene, &reference, &cfg).is_err());
        }
    }

    #[test]
    fn bad_references_are_rejected() {
        let scene = tiny_scene();
        let meta = scene.grid.meta();
        let constant = RealMap::new(
            vec![2.0; meta.cells()],
            meta,
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Measured,
        )
        .unwrap();
        assert!(matches!(
            calibrate(&scene, &constant, &CalibrationConfig::default()),
            Err(Error::ConstantMap)
        ));

        let zero = RealMap::new(
            vec![0.0; meta.cells()],
            meta,
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Measured,
        )
        .unwrap();
        assert!(matches!(
            calibrate(&scene, &zero, &CalibrationConfig::default()),
            Err(Error::DegenerateMap)
        ));

        let wrong = RealMap::new(
            vec![1.0, 2.0],
            GridMeta {
                n_u: 2,
                n_v: 1,
                step_u: 0.25,
                step_v: 0.2,
            },
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Measured,
        )
        .unwrap();
        assert!(matches!(
            calibrate(&scene, &wrong, &CalibrationConfig::default()),
            Err(Error::DimensionMismatch { .. })
        ));

        let db = RealMap::new(
            reference_for(&scene, &truth())
                .data
                .iter()
                .map(|v| 20.0 * v.log10())
                .collect(),
            meta,
            MapUnit::Decibels,
            2.48e9,
            Provenance::Measured,
        )
        .unwrap();
        assert!(calibrate(&scene, &db, &CalibrationConfig::default()).is_err());
    }

    #[test]
    fn shift_max_scoring_runs_and_scores_reasonably() {
        let scene = tiny_scene();
        let reference = reference_for(&scene, &truth());
        let shifted = crate::synth::shift_map(&reference, 1, 0).unwrap();
        let cfg = CalibrationConfig {
            use_shift_max: true,
            shift_search: ShiftSearch {
                max_shift_u: 2,
                max_shift_v: 1,
                min_overlap_fraction: 0.5,
            },
            restarts: 2,
            max_objective_evals: 1_200,
            ..CalibrationConfig::default()
        };
        let with_shift = calibrate(&scene, &shifted, &cfg).unwrap();
        let plain = calibrate(
            &scene,
            &shifted,
            &CalibrationConfig {
                use_shift_max: false,
                ..cfg.clone()
            },
        )
        .unwrap();
        assert!(
            with_shift.rho_achieved >= plain.rho_achieved - 1e-12,
            "{} vs {}",
            with_shift.rho_achieved,
            plain.rho_achieved
        );
        assert!(
            with_shift.rho_achieved > 0.99,
            "{}",
            with_shift.rho_achieved
        );
    }
}

//! Calibration reports, optimizer trace files, and the ground-truth sidecar
//! that accompanies synthetic references. Reports use the same `key = value`
//! format as scene files; the trace is a plain CSV.

use super::kv::{format_polar, KvDoc};
use crate::calibrate::{CalibrationResult, TracePoint};
use crate::error::Error;
use crate::forward::ReflectionSet;
use crate::scene::{WallId, WALL_COUNT};
use crate::synth::SynthSpec;
use crate::Result;
use num_complex::Complex64;
use std::path::Path;

fn push_polar_keys(out: &mut String, prefix: &str, gammas: &ReflectionSet) {
    for (wall, (mag, deg)) in WallId::ALL.iter().zip(gammas.to_polar_deg()) {
        out.push_str(&format!(
            "{prefix}.{} = {}\n",
            wall.name(),
            format_polar(mag, deg)
        ));
    }
}

fn gammas_from_keys(doc: &KvDoc, prefix: &str) -> Result<ReflectionSet> {
    let mut g = [Complex64::ZERO; WALL_COUNT];
    for wall in WallId::ALL {
        g[wall.index()] = doc.get_complex(&format!("{prefix}.{}", wall.name()))?;
    }
    ReflectionSet::new(g)
}

/// Write the calibration outcome: headline numbers, the fitted coefficients,
/// per-wall sensitivity, and one block per restart.
pub fn write_report(result: &CalibrationResult, path: &Path) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("rho = {}\n", result.rho_achieved));
    out.push_str(&format!("evals = {}\n", result.evals_used));
    out.push_str(&format!("restarts = {}\n", result.restarts.len()));
    out.push_str(&format!("best_restart = {}\n", result.best_restart));
    out.push_str(&format!("stalled = {}\n", result.stalled));
    push_polar_keys(&mut out, "gamma", &result.gammas);
    for (wall, s) in WallId::ALL.iter().zip(result.sensitivity) {
        out.push_str(&format!("sensitivity.{} = {s}\n", wall.name()));
    }
    for (r, rec) in result.restarts.iter().enumerate() {
        push_polar_keys(&mut out, &format!("restart.{r}.init"), &rec.init);
        out.push_str(&format!("restart.{r}.rho = {}\n", rec.rho));
        out.push_str(&format!("restart.{r}.evals = {}\n", rec.evals));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// The headline part of a report, read back.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSummary {
    pub rho: f64,
    pub evals: usize,
    pub restarts: usize,
    pub best_restart: usize,
    pub stalled: bool,
    pub gammas: ReflectionSet,
    pub sensitivity: [f64; WALL_COUNT],
}

pub fn read_report(path: &Path) -> Result<ReportSummary> {
    let doc = KvDoc::from_file(path)?;
    let restarts = doc.get_usize("restarts")?;

    let mut allowed: Vec<String> = ["rho", "evals", "restarts", "best_restart", "stalled"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for wall in WallId::ALL {
        allowed.push(format!("gamma.{}", wall.name()));
        allowed.push(format!("sensitivity.{}", wall.name()));
    }
    for r in 0..restarts {
        for wall in WallId::ALL {
            allowed.push(format!("restart.{r}.init.{}", wall.name()));
        }
        allowed.push(format!("restart.{r}.rho"));
        allowed.push(format!("restart.{r}.evals"));
    }
    let allowed_refs: Vec<&str> = allowed.iter().map(String::as_str).collect();
    doc.expect_only(&allowed_refs)?;

    let mut sensitivity = [0.0; WALL_COUNT];
    for wall in WallId::ALL {
        sensitivity[wall.index()] = doc.get_f64(&format!("sensitivity.{}", wall.name()))?;
    }
    Ok(ReportSummary {
        rho: doc.get_f64("rho")?,
        evals: doc.get_usize("evals")?,
        restarts,
        best_restart: doc.get_usize("best_restart")?,
        stalled: doc.get_bool("stalled")?,
        gammas: gammas_from_keys(&doc, "gamma")?,
        sensitivity,
    })
}

/// CSV of every objective evaluation: `restart,eval,rho`.
pub fn write_trace(trace: &[TracePoint], path: &Path) -> Result<()> {
    let mut out = String::from("restart,eval,rho\n");
    for t in trace {
        out.push_str(&format!("{},{},{}\n", t.restart, t.eval, t.rho));
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Ground truth behind a synthetic reference. Kept in a sidecar file so a
/// reference map never carries its own answer.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    pub gammas: ReflectionSet,
    pub noise_db: f64,
    pub shift: (i64, i64),
    pub seed: u64,
}

pub fn write_truth(spec: &SynthSpec, path: &Path) -> Result<()> {
    let mut out = String::new();
    push_polar_keys(&mut out, "truth.gamma", &spec.gammas_true);
    out.push_str(&format!("truth.noise_db = {}\n", spec.noise_sigma_db));
    out.push_str(&format!(
        "truth.shift = {}, {}\n",
        spec.pixel_shift.0, spec.pixel_shift.1
    ));
    out.push_str(&format!("truth.seed = {}\n", spec.rng_seed));
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<TruthRecord> {
    let doc = KvDoc::from_file(path)?;
    let mut allowed: Vec<String> = vec![
        "truth.noise_db".into(),
        "truth.shift".into(),
        "truth.seed".into(),
    ];
    for wall in WallId::ALL {
        allowed.push(format!("truth.gamma.{}", wall.name()));
    }
    let allowed_refs: Vec<&str> = allowed.iter().map(String::as_str).collect();
    doc.expect_only(&allowed_refs)?;

    let entry = doc.require("truth.shift")?;
    let parts: Vec<&str> = entry.value.split(',').map(str::trim).collect();
    let bad_shift = || Error::Parse {
        path: doc.path().to_string(),
        line: entry.line,
        message: format!("expected `du, dv`, got `{}`", entry.value),
    };
    if parts.len() != 2 {
        return Err(bad_shift());
    }
    let du: i64 = parts[0].parse().map_err(|_| bad_shift())?;
    let dv: i64 = parts[1].parse().map_err(|_| bad_shift())?;

    Ok(TruthRecord {
        gammas: gammas_from_keys(&doc, "truth.gamma")?,
        noise_db: doc.get_f64("truth.noise_db")?,
        shift: (du, dv),
        seed: doc.get_u64("truth.seed")?,
    })
}

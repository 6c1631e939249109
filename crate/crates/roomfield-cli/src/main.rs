//! Command-line front end. Each subcommand wraps one library operation;
//! all diagnostics go to stderr, results go to files or stdout.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numerical failure.

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use roomfield::calibrate::{calibrate, CalibrationConfig};
use roomfield::forward::{total_field_map, ReflectionSet};
use roomfield::io::{
    parse_inline_gammas, read_gammas, read_map, read_scene, write_complex_map, write_plot_data,
    write_real_map, write_report, write_trace, write_truth, MapData,
};
use roomfield::mapops::{
    attenuation_map, freq_average, freq_average_complex, magnitude, CellFlag, DEFAULT_NOISE_FLOOR,
};
use roomfield::similarity::{pearson, pearson_max_shift, ShiftSearch};
use roomfield::synth::{synth_reference, SynthSpec};
use roomfield::Error;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "roomfield",
    version,
    about = "Simulate, compare, and calibrate indoor field magnitude maps"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute complex field maps for a scene.
    Simulate {
        /// Scene configuration file.
        #[arg(long)]
        scene: PathBuf,
        /// Reflection coefficients: a file of gamma.* keys, a single
        /// `mag@deg`, or six comma-separated `mag@deg` values. Falls back
        /// to coefficients embedded in the scene file.
        #[arg(long)]
        gammas: Option<String>,
        /// Simulate this one frequency instead of the scene's list.
        #[arg(long)]
        freq: Option<f64>,
        /// Output map file; sweeps write one numbered file per frequency.
        #[arg(long)]
        out: PathBuf,
        /// Also write `u v magnitude` triplets for plotting.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
    },
    /// Per-cell dB ratio of a free-path map over a target map.
    Attenuate {
        /// Free-path (empty room) map, real or complex.
        #[arg(long)]
        fp: PathBuf,
        /// Target (perturbed) map, real or complex.
        #[arg(long)]
        tar: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Magnitudes below this count as noise and floor to 0 dB.
        #[arg(long, default_value_t = DEFAULT_NOISE_FLOOR)]
        noise_floor: f64,
        /// Also write `u v dB` triplets for plotting.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
    },
    /// Pearson correlation between two maps, optionally over pixel shifts.
    Correlate {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Search shifts up to +-U cells along u and +-V along v.
        #[arg(long, num_args = 2, value_names = ["U", "V"])]
        max_shift: Option<Vec<usize>>,
        /// Minimum admissible overlap as a fraction of the map.
        #[arg(long, default_value_t = 0.5)]
        min_overlap: f64,
    },
    /// Fit the six wall coefficients to a reference map.
    Calibrate {
        #[arg(long)]
        scene: PathBuf,
        /// Reference magnitude map (complex inputs are reduced to magnitude).
        #[arg(long)]
        reference: PathBuf,
        /// Average model magnitudes over the scene's whole frequency list.
        #[arg(long)]
        avg_freqs: bool,
        /// Calibrate at this single frequency.
        #[arg(long, conflicts_with = "avg_freqs")]
        freq: Option<f64>,
        #[arg(long)]
        restarts: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Total objective-evaluation budget across restarts.
        #[arg(long)]
        max_evals: Option<usize>,
        /// Start point for the first restart, `mag@deg`.
        #[arg(long)]
        init: Option<String>,
        /// Score candidates by shift-maximized correlation.
        #[arg(long)]
        shift_max: bool,
        /// Shift radius for --shift-max.
        #[arg(long, num_args = 2, value_names = ["U", "V"], requires = "shift_max")]
        max_shift: Option<Vec<usize>>,
        /// Report file to write.
        #[arg(long)]
        out: PathBuf,
        /// Also write a per-evaluation CSV trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Generate a synthetic reference map plus a ground-truth sidecar.
    Synth {
        #[arg(long)]
        scene: PathBuf,
        /// Ground-truth coefficients: file or inline, as for --gammas.
        #[arg(long)]
        gammas_true: String,
        /// Per-cell dB noise standard deviation.
        #[arg(long, default_value_t = 0.0)]
        noise_db: f64,
        /// Content shift in cells.
        #[arg(long, num_args = 2, value_names = ["DU", "DV"], allow_negative_numbers = true)]
        shift: Option<Vec<i64>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output map file; the sidecar lands next to it as `<out>.truth`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Average complex maps over frequency into one magnitude map.
    FreqAverage {
        /// Input complex map files, in frequency order.
        #[arg(long = "in", num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Average complex values (keeping interference) instead of
        /// magnitudes, and write a complex map.
        #[arg(long)]
        complex: bool,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    return 0;
                }
                _ => 1,
            };
            eprint!("{e}");
            return code;
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = std::error::Error::source(&err);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if err.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

/// Coefficients from `--gammas`-style flags: inline when the value contains
/// `@`, otherwise a file path. `embedded` supplies the scene-file fallback.
fn resolve_gammas(
    flag: Option<&str>,
    embedded: Option<ReflectionSet>,
    scene_path: &Path,
) -> roomfield::Result<ReflectionSet> {
    match flag {
        Some(text) if text.contains('@') => parse_inline_gammas(text),
        Some(path) => read_gammas(Path::new(path)),
        None => embedded.ok_or_else(|| Error::MissingKey {
            path: scene_path.display().to_string(),
            key: "gamma.right".to_string(),
        }),
    }
}

/// `stem.map` becomes `stem.N.map` for per-frequency outputs.
fn indexed_path(path: &Path, idx: usize) -> PathBuf {
    match path.extension() {
        Some(ext) => path.with_extension(format!("{idx}.{}", ext.to_string_lossy())),
        None => {
            let mut p = path.as_os_str().to_owned();
            p.push(format!(".{idx}"));
            PathBuf::from(p)
        }
    }
}

fn real_map_from(path: &Path) -> roomfield::Result<roomfield::mapops::RealMap> {
    read_map(path)?.into_magnitude()
}

fn shift_search_from(max_shift: &[usize], min_overlap: f64) -> ShiftSearch {
    ShiftSearch {
        max_shift_u: max_shift[0],
        max_shift_v: max_shift[1],
        min_overlap_fraction: min_overlap,
    }
}

fn dispatch(cmd: Cmd) -> roomfield::Result<()> {
    match cmd {
        Cmd::Simulate {
            scene,
            gammas,
            freq,
            out,
            emit_plot_data,
        } => {
            let (mut cfg, embedded) = read_scene(&scene)?;
            let gammas = resolve_gammas(gammas.as_deref(), embedded, &scene)?;
            if let Some(f) = freq {
                cfg.freqs.frequencies = vec![f];
            }
            let single = cfg.freqs.frequencies.len() == 1;
            for (idx, f) in cfg.freqs.frequencies.clone().into_iter().enumerate() {
                let map = total_field_map(&cfg, &gammas, f)?;
                let path = if single {
                    out.clone()
                } else {
                    indexed_path(&out, idx)
                };
                write_complex_map(&map, &path)?;
                if let Some(plot) = &emit_plot_data {
                    let path = if single {
                        plot.clone()
                    } else {
                        indexed_path(plot, idx)
                    };
                    write_plot_data(&magnitude(&map), &path)?;
                }
            }
            Ok(())
        }
        Cmd::Attenuate {
            fp,
            tar,
            out,
            noise_floor,
            emit_plot_data,
        } => {
            let fp_map = real_map_from(&fp)?;
            let tar_map = real_map_from(&tar)?;
            let att = attenuation_map(&fp_map, &tar_map, noise_floor)?;
            eprintln!(
                "cells: {} valid, {} floored, {} clamped high, {} clamped low",
                att.count(CellFlag::Valid),
                att.count(CellFlag::Floored),
                att.count(CellFlag::ClampedHigh),
                att.count(CellFlag::ClampedLow),
            );
            write_real_map(&att.map, &out)?;
            if let Some(plot) = emit_plot_data {
                write_plot_data(&att.map, &plot)?;
            }
            Ok(())
        }
        Cmd::Correlate {
            a,
            b,
            max_shift,
            min_overlap,
        } => {
            let a_map = real_map_from(&a)?;
            let b_map = real_map_from(&b)?;
            match max_shift {
                Some(radius) => {
                    let search = shift_search_from(&radius, min_overlap);
                    let res = pearson_max_shift(&a_map, &b_map, &search)?;
                    println!(
                        "rho={:.6} shift={},{} overlap={}",
                        res.rho, res.shift.0, res.shift.1, res.overlap_cells
                    );
                }
                None => {
                    let rho = pearson(&a_map, &b_map)?;
                    println!("rho={rho:.6}");
                }
            }
            Ok(())
        }
        Cmd::Calibrate {
            scene,
            reference,
            avg_freqs,
            freq,
            restarts,
            seed,
            max_evals,
            init,
            shift_max,
            max_shift,
            out,
            trace,
        } => {
            let (mut scene_cfg, _) = read_scene(&scene)?;
            if let Some(f) = freq {
                scene_cfg.freqs.frequencies = vec![f];
            } else if !avg_freqs && scene_cfg.freqs.frequencies.len() > 1 {
                return Err(Error::InvalidCalibration(
                    "scene lists several frequencies; pass --freq or --avg-freqs".into(),
                ));
            }
            let reference = real_map_from(&reference)?;

            let mut cfg = CalibrationConfig {
                collect_trace: trace.is_some(),
                use_shift_max: shift_max,
                ..CalibrationConfig::default()
            };
            if let Some(r) = restarts {
                cfg.restarts = r;
            }
            if let Some(s) = seed {
                cfg.rng_seed = s;
            }
            if let Some(e) = max_evals {
                cfg.max_objective_evals = e;
            }
            if let Some(radius) = max_shift {
                cfg.shift_search =
                    shift_search_from(&radius, cfg.shift_search.min_overlap_fraction);
            }
            if let Some(text) = init {
                let start = parse_inline_gammas(&text)?;
                let g = start.as_array()[0];
                cfg.init_magnitude = g.norm();
                cfg.init_phase_deg = g.arg().to_degrees();
            }

            let result = calibrate(&scene_cfg, &reference, &cfg)?;
            write_report(&result, &out)?;
            if let Some(path) = trace {
                write_trace(&result.trace, &path)?;
            }
            eprintln!(
                "rho={:.6} evals={} best_restart={}{}",
                result.rho_achieved,
                result.evals_used,
                result.best_restart,
                if result.stalled { " (stalled)" } else { "" }
            );
            Ok(())
        }
        Cmd::Synth {
            scene,
            gammas_true,
            noise_db,
            shift,
            seed,
            out,
        } => {
            let (scene_cfg, embedded) = read_scene(&scene)?;
            let gammas_true = resolve_gammas(Some(&gammas_true), embedded, &scene)?;
            let shift = shift.unwrap_or_else(|| vec![0, 0]);
            let spec = SynthSpec {
                scene: scene_cfg,
                gammas_true,
                noise_sigma_db: noise_db,
                pixel_shift: (shift[0], shift[1]),
                rng_seed: seed,
            };
            let map = synth_reference(&spec)?;
            write_real_map(&map, &out)?;
            let mut truth_path = out.as_os_str().to_owned();
            truth_path.push(".truth");
            write_truth(&spec, Path::new(&truth_path))?;
            Ok(())
        }
        Cmd::FreqAverage {
            inputs,
            out,
            complex,
        } => {
            let mut maps = Vec::with_capacity(inputs.len());
            for path in &inputs {
                match read_map(path)? {
                    MapData::Complex(m) => maps.push(m),
                    MapData::Real(_) => {
                        return Err(Error::InvalidMap(format!(
                            "{}: frequency averaging needs complex field maps",
                            path.display()
                        )))
                    }
                }
            }
            if complex {
                write_complex_map(&freq_average_complex(&maps)?, &out)
            } else {
                write_real_map(&freq_average(&maps)?, &out)
            }
        }
    }
}

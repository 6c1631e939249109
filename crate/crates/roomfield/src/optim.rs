//! Bounded derivative-free simplex minimizer (Nelder-Mead with a
//! projection step).
//!
//! The caller supplies a projection that maps any candidate point back into
//! the feasible set; it is applied to every point before evaluation, so the
//! objective only ever sees feasible points. The algorithm is deterministic:
//! equal inputs produce equal outputs bit for bit.

/// Standard Nelder-Mead coefficients.
const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Termination settings.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    /// Hard cap on objective evaluations; at least one is always spent.
    pub max_evals: usize,
    /// Stop when the simplex f-spread drops to this value or below.
    pub ftol: f64,
}

/// Result of one minimizer run.
#[derive(Debug, Clone)]
pub struct NmOutcome {
    /// Best point found (feasible).
    pub x: Vec<f64>,
    /// Objective at `x`.
    pub f: f64,
    /// Objective evaluations spent.
    pub evals: usize,
    /// True when the f-spread criterion was met before the budget ran out.
    pub converged: bool,
}

/// Minimizes `f` from `x0` with initial per-coordinate simplex steps
/// `steps`, projecting every candidate with `project` first.
///
/// If a positive step lands on the starting value after projection (start
/// at a bound), the negative step is tried instead.
pub fn nelder_mead<F, P>(
    f: &mut F,
    project: &P,
    x0: &[f64],
    steps: &[f64],
    opts: &NmOptions,
) -> NmOutcome
where
    F: FnMut(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = x0.len();
    assert_eq!(steps.len(), n, "one step per coordinate");
    assert!(n >= 1, "empty parameter vector");
    let budget = opts.max_evals.max(1);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut start = x0.to_vec();
    project(&mut start);

    // Initial simplex: the start plus one step along each coordinate.
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    verts.push(start.clone());
    for i in 0..n {
        let mut v = start.clone();
        v[i] += steps[i];
        project(&mut v);
        if (v[i] - start[i]).abs() < 0.5 * steps[i].abs() {
            v = start.clone();
            v[i] -= steps[i];
            project(&mut v);
        }
        verts.push(v);
    }

    let mut fvals: Vec<f64> = Vec::with_capacity(n + 1);
    for v in &verts {
        if evals >= budget {
            break;
        }
        fvals.push(eval(v, &mut evals));
    }
    if fvals.len() < verts.len() {
        // Budget exhausted during setup: report the best evaluated point.
        let best = argmin(&fvals);
        return NmOutcome {
            x: verts[best].clone(),
            f: fvals[best],
            evals,
            converged: false,
        };
    }

    let mut converged = false;
    loop {
        // Ascending by objective; stable sort keeps ties deterministic.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        verts = order.iter().map(|&i| verts[i].clone()).collect();
        fvals = order.iter().map(|&i| fvals[i]).collect();

        if fvals[n] - fvals[0] <= opts.ftol {
            converged = true;
            break;
        }
        if evals >= budget {
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = vec![0.0; n];
        for v in verts.iter().take(n) {
            for (c, &x) in centroid.iter_mut().zip(v.iter()) {
                *c += x;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let towards = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(verts[n].iter())
                .map(|(&c, &w)| c + coef * (c - w))
                .collect();
            project(&mut p);
            p
        };

        let xr = towards(REFLECT);
        let fr = eval(&xr, &mut evals);

        if fr < fvals[0] {
            // Try to expand past the reflection.
            if evals < budget {
                let xe = towards(EXPAND);
                let fe = eval(&xe, &mut evals);
                if fe < fr {
                    verts[n] = xe;
                    fvals[n] = fe;
                    continue;
                }
            }
            verts[n] = xr;
            fvals[n] = fr;
            continue;
        }
        if fr < fvals[n - 1] {
            verts[n] = xr;
            fvals[n] = fr;
            continue;
        }

        // Contract, outside or inside depending on the reflection.
        if evals >= budget {
            break;
        }
        if fr < fvals[n] {
            let xc = towards(CONTRACT);
            let fc = eval(&xc, &mut evals);
            if fc <= fr {
                verts[n] = xc;
                fvals[n] = fc;
                continue;
            }
        } else {
            let xc = towards(-CONTRACT);
            let fc = eval(&xc, &mut evals);
            if fc < fvals[n] {
                verts[n] = xc;
                fvals[n] = fc;
                continue;
            }
        }

        // Shrink toward the best vertex.
        for i in 1..=n {
            if evals >= budget {
                break;
            }
            let mut v: Vec<f64> = verts[0]
                .iter()
                .zip(verts[i].iter())
                .map(|(&b, &x)| b + SHRINK * (x - b))
                .collect();
            project(&mut v);
            fvals[i] = eval(&v, &mut evals);
            verts[i] = v;
        }
        if evals >= budget {
            break;
        }
    }

    let best = argmin(&fvals);
    NmOutcome {
        x: verts[best].clone(),
        f: fvals[best],
        evals,
        converged,
    }
}

fn argmin(fvals: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in fvals.iter().enumerate() {
        if v < fvals[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_bounds(_: &mut [f64]) {}

    #[test]
    fn minimizes_a_shifted_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2);
        let out = nelder_mead(
            &mut f,
            &no_bounds,
            &[0.0, 0.0],
            &[0.5, 0.5],
            &NmOptions {
                max_evals: 500,
                ftol: 1e-12,
            },
        );
        assert!(out.converged);
        assert!((out.x[0] - 3.0).abs() < 1e-5, "{:?}", out.x);
        assert!((out.x[1] + 1.0).abs() < 1e-5, "{:?}", out.x);
        assert!(out.f < 1e-10);
    }

    #[test]
    fn handles_a_banana_valley() {
        let mut f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let out = nelder_mead(
            &mut f,
            &no_bounds,
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &NmOptions {
                max_evals: 2000,
                ftol: 1e-14,
            },
        );
        assert!(out.f < 1e-6, "f = {:e}", out.f);
        assert!((out.x[0] - 1.0).abs() < 1e-2);
    }

    #[test]
    fn projection_keeps_iterates_feasible() {
        // Unconstrained minimum at x = 2 sits outside [0, 1].
        let project = |x: &mut [f64]| {
            for v in x.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        };
        let mut seen_out_of_bounds = false;
        let mut f = |x: &[f64]| {
            if !(0.0..=1.0).contains(&x[0]) {
                seen_out_of_bounds = true;
            }
            (x[0] - 2.0).powi(2)
        };
        let out = nelder_mead(
            &mut f,
            &project,
            &[0.2],
            &[0.3],
            &NmOptions {
                max_evals: 200,
                ftol: 1e-12,
            },
        );
        assert!(!seen_out_of_bounds);
        assert!((out.x[0] - 1.0).abs() < 1e-6, "{:?}", out.x);
        assert!((out.f - 1.0).abs() < 1e-6);
    }

    #[test]
    fn starting_at_a_bound_steps_inward() {
        let project = |x: &mut [f64]| {
            for v in x.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        };
        let mut f = |x: &[f64]| (x[0] - 0.25).powi(2);
        let out = nelder_mead(
            &mut f,
            &project,
            &[1.0],
            &[0.3],
            &NmOptions {
                max_evals: 200,
                ftol: 1e-12,
            },
        );
        assert!((out.x[0] - 0.25).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn respects_the_evaluation_budget() {
        for budget in [1, 2, 3, 7, 20] {
            let mut count = 0usize;
            let mut f = |x: &[f64]| {
                count += 1;
                x[0] * x[0] + x[1] * x[1]
            };
            let out = nelder_mead(
                &mut f,
                &no_bounds,
                &[5.0, -3.0],
                &[1.0, 1.0],
                &NmOptions {
                    max_evals: budget,
                    ftol: 1e-12,
                },
            );
            assert_eq!(out.evals, count);
            assert!(count <= budget, "budget {budget}, spent {count}");
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        let run = || {
            let mut f =
                |x: &[f64]| (x[0] - 0.7).powi(2) + 3.0 * (x[1] - 0.1).powi(2) + (x[0] * x[1]).abs();
            nelder_mead(
                &mut f,
                &no_bounds,
                &[0.0, 0.0],
                &[0.4, 0.4],
                &NmOptions {
                    max_evals: 333,
                    ftol: 1e-10,
                },
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.x, b.x);
        assert_eq!(a.f, b.f);
        assert_eq!(a.evals, b.evals);
        assert_eq!(a.converged, b.converged);
    }
}

//! Pearson correlation between maps, plain and maximized over small
//! integer pixel shifts.
//!
//! Correlation is affine-invariant, so maps may be compared across linear,
//! normalized, or otherwise rescaled representations; the caller chooses
//! meaningful pairings.

use crate::error::Error;
use crate::mapops::RealMap;
use crate::Result;

/// Search region and admissibility rule for [`pearson_max_shift`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftSearch {
    /// Maximum |shift| along u, in cells.
    pub max_shift_u: usize,
    /// Maximum |shift| along v, in cells.
    pub max_shift_v: usize,
    /// Minimum overlap, as a fraction of total cells, for a shift to count.
    pub min_overlap_fraction: f64,
}

impl Default for ShiftSearch {
    fn default() -> Self {
        ShiftSearch {
            max_shift_u: 5,
            max_shift_v: 5,
            min_overlap_fraction: 0.5,
        }
    }
}

/// Outcome of a shift search: the best correlation and where it occurred.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationResult {
    /// Highest correlation over admissible shifts.
    pub rho: f64,
    /// Winning shift `(du, dv)`: `b` is sampled at `(i - du, j - dv)`.
    pub shift: (i64, i64),
    /// Number of cells in the winning overlap region.
    pub overlap_cells: usize,
}

fn check_dims(a: &RealMap, b: &RealMap) -> Result<()> {
    if a.meta.n_u != b.meta.n_u || a.meta.n_v != b.meta.n_v {
        return Err(Error::DimensionMismatch {
            a_nu: a.meta.n_u,
            a_nv: a.meta.n_v,
            b_nu: b.meta.n_u,
            b_nv: b.meta.n_v,
        });
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// Pearson correlation over paired cells; `None` when either side has zero
/// variance. Accumulates in row-major order.
fn pearson_slices(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let mut sum_a = 0.0;
    let mut sum_b = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        sum_a += x;
        sum_b += y;
    }
    let mean_a = sum_a / n;
    let mean_b = sum_b / n;
    let mut num = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (&x, &y) in a.iter().zip(b.iter()) {
        let da = x - mean_a;
        let db = y - mean_b;
        num += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a == 0.0 || var_b == 0.0 {
        return None;
    }
    Some((num / (var_a.sqrt() * var_b.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation of two same-shape maps over all cells.
///
/// Errors with [`Error::ConstantMap`] when either map has zero variance.
/// Symmetric in its arguments bit for bit.
pub fn pearson(a: &RealMap, b: &RealMap) -> Result<f64> {
    check_dims(a, b)?;
    if is_constant(&a.data) || is_constant(&b.data) {
        return Err(Error::ConstantMap);
    }
    pearson_slices(&a.data, &b.data).ok_or(Error::ConstantMap)
}

/// Correlation over the overlap region for one shift, with the overlap size.
/// `None` when the overlap is degenerate for this shift.
fn shifted_pearson(a: &RealMap, b: &RealMap, du: i64, dv: i64) -> Option<(f64, usize)> {
    let n_u = a.meta.n_u as i64;
    let n_v = a.meta.n_v as i64;
    let iu0 = du.max(0);
    let iu1 = (n_u + du).min(n_u);
    let jv0 = dv.max(0);
    let jv1 = (n_v + dv).min(n_v);
    if iu0 >= iu1 || jv0 >= jv1 {
        return None;
    }
    let cells = ((iu1 - iu0) * (jv1 - jv0)) as usize;
    let mut av = Vec::with_capacity(cells);
    let mut bv = Vec::with_capacity(cells);
    for j in jv0..jv1 {
        for i in iu0..iu1 {
            av.push(a.data[a.meta.idx(i as usize, j as usize)]);
            bv.push(b.data[b.meta.idx((i - du) as usize, (j - dv) as usize)]);
        }
    }
    pearson_slices(&av, &bv).map(|rho| (rho, cells))
}

/// Maximizes Pearson correlation over integer shifts `|du| <= max_shift_u`,
/// `|dv| <= max_shift_v`, evaluated on the overlap region only (no padding).
///
/// The winning `(du, dv)` is the offset at which `b`, sampled at
/// `(i - du, j - dv)`, best matches `a` at `(i, j)`: a map whose content was
/// moved by `(+s_u, +s_v)` reports `(-s_u, -s_v)`. Shifts whose
/// overlap is below `min_overlap_fraction` of the full map, or whose overlap
/// region is constant on either side, are skipped. Ties prefer the smallest
/// `|du| + |dv|`, then the smaller `du`, then the smaller `dv`.
pub fn pearson_max_shift(
    a: &RealMap,
    b: &RealMap,
    search: &ShiftSearch,
) -> Result<CorrelationResult> {
    check_dims(a, b)?;
    if is_constant(&a.data) || is_constant(&b.data) {
        return Err(Error::ConstantMap);
    }
    if !(search.min_overlap_fraction > 0.0 && search.min_overlap_fraction <= 1.0) {
        return Err(Error::InvalidShiftSearch(
            "min_overlap_fraction must be in (0, 1]".into(),
        ));
    }
    if search.max_shift_u >= a.meta.n_u || search.max_shift_v >= a.meta.n_v {
        return Err(Error::InvalidShiftSearch(
            "shift radius reaches the grid size".into(),
        ));
    }

    let total = a.meta.cells() as f64;
    let ru = search.max_shift_u as i64;
    let rv = search.max_shift_v as i64;
    let mut best: Option<CorrelationResult> = None;
    for dv in -rv..=rv {
        for du in -ru..=ru {
            let Some((rho, cells)) = shifted_pearson(a, b, du, dv) else {
                continue;
            };
            if (cells as f64) < search.min_overlap_fraction * total {
                continue;
            }
            let candidate = CorrelationResult {
                rho,
                shift: (du, dv),
                overlap_cells: cells,
            };
            let replace = match &best {
                None => true,
                Some(cur) => {
                    if rho != cur.rho {
                        rho > cur.rho
                    } else {
                        let c_norm = du.abs() + dv.abs();
                        let b_norm = cur.shift.0.abs() + cur.shift.1.abs();
                        (c_norm, du, dv) < (b_norm, cur.shift.0, cur.shift.1)
                    }
                }
            };
            if replace {
                best = Some(candidate);
            }
        }
    }
    best.ok_or(Error::NoAdmissibleShift)
}

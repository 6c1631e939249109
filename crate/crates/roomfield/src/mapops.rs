//! Scalar map algebra: magnitude, peak normalization, frequency averaging,
//! and the attenuation (dB ratio) map.

use crate::error::Error;
use crate::forward::{ComplexMap, Provenance};
use crate::scene::GridMeta;
use crate::Result;
use num_complex::Complex64;

/// Hard limit for attenuation values; ratios beyond it are clamped.
pub const DB_CLAMP: f64 = 200.0;

/// Default floor below which both maps are treated as noise.
pub const DEFAULT_NOISE_FLOOR: f64 = 1e-12;

/// Physical unit of a [`RealMap`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapUnit {
    /// Linear field magnitude, nonnegative.
    LinearMagnitude,
    /// Ratio in dB; may be negative.
    Decibels,
    /// Linear magnitude divided by its peak, in `[0, 1]`.
    Normalized,
}

impl MapUnit {
    /// Stable lowercase token used in files.
    pub fn name(self) -> &'static str {
        match self {
            MapUnit::LinearMagnitude => "linear",
            MapUnit::Decibels => "db",
            MapUnit::Normalized => "normalized",
        }
    }

    /// Inverse of [`MapUnit::name`].
    pub fn from_name(name: &str) -> Option<MapUnit> {
        match name {
            "linear" => Some(MapUnit::LinearMagnitude),
            "db" => Some(MapUnit::Decibels),
            "normalized" => Some(MapUnit::Normalized),
            _ => None,
        }
    }
}

/// Real-valued samples over a receive grid, row-major, with a unit tag.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMap {
    pub data: Vec<f64>,
    pub meta: GridMeta,
    pub unit: MapUnit,
    pub frequency_hz: f64,
    pub provenance: Provenance,
}

impl RealMap {
    /// Builds a map, checking cell count, finiteness, and the unit's range.
    pub fn new(
        data: Vec<f64>,
        meta: GridMeta,
        unit: MapUnit,
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
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidMap("non-finite cell value".into()));
        }
        match unit {
            MapUnit::LinearMagnitude => {
                if data.iter().any(|&v| v < 0.0) {
                    return Err(Error::InvalidMap(
                        "negative value in a linear-magnitude map".into(),
                    ));
                }
            }
            MapUnit::Normalized => {
                if data.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                    return Err(Error::InvalidMap(
                        "value outside [0, 1] in a normalized map".into(),
                    ));
                }
            }
            MapUnit::Decibels => {}
        }
        Ok(RealMap {
            data,
            meta,
            unit,
            frequency_hz,
            provenance,
        })
    }

    /// Value at cell `(i, j)`.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[self.meta.idx(i, j)]
    }
}

/// Per-cell `|z|` of a complex map.
pub fn magnitude(map: &ComplexMap) -> RealMap {
    RealMap {
        data: map.data.iter().map(|z| z.norm()).collect(),
        meta: map.meta,
        unit: MapUnit::LinearMagnitude,
        frequency_hz: map.frequency_hz,
        provenance: map.provenance,
    }
}

/// Divides by the map maximum so the peak becomes exactly 1.
///
/// Idempotent bit for bit: a second application divides by 1. Errors on
/// decibel input and on an all-zero map.
pub fn normalize_max(map: &RealMap) -> Result<RealMap> {
    if map.unit == MapUnit::Decibels {
        return Err(Error::InvalidMap(
            "cannot peak-normalize a decibel map".into(),
        ));
    }
    let max = map.data.iter().cloned().fold(0.0_f64, f64::max);
    if max <= 0.0 {
        return Err(Error::DegenerateMap);
    }
    Ok(RealMap {
        data: map.data.iter().map(|v| v / max).collect(),
        meta: map.meta,
        unit: MapUnit::Normalized,
        frequency_hz: map.frequency_hz,
        provenance: map.provenance,
    })
}

fn check_same_grid(a: &GridMeta, b: &GridMeta) -> Result<()> {
    if a.n_u != b.n_u || a.n_v != b.n_v {
        return Err(Error::DimensionMismatch {
            a_nu: a.n_u,
            a_nv: a.n_v,
            b_nu: b.n_u,
            b_nv: b.n_v,
        });
    }
    if a.step_u != b.step_u || a.step_v != b.step_v {
        return Err(Error::InvalidMap("grid pitch differs between maps".into()));
    }
    Ok(())
}

/// Per-cell mean of `|z|` over a list of same-grid maps, e.g. a frequency
/// sweep. The output frequency tag is the mean input frequency; provenance
/// is taken from the first map.
pub fn freq_average(maps: &[ComplexMap]) -> Result<RealMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidMap("empty map list".into()))?;
    for m in &maps[1..] {
        check_same_grid(&first.meta, &m.meta)?;
    }
    let n = maps.len() as f64;
    let mut acc = vec![0.0_f64; first.meta.cells()];
    for m in maps {
        for (slot, z) in acc.iter_mut().zip(m.data.iter()) {
            *slot += z.norm();
        }
    }
    for slot in acc.iter_mut() {
        *slot /= n;
    }
    let mean_f = maps.iter().map(|m| m.frequency_hz).sum::<f64>() / n;
    Ok(RealMap {
        data: acc,
        meta: first.meta,
        unit: MapUnit::LinearMagnitude,
        frequency_hz: mean_f,
        provenance: first.provenance,
    })
}

/// Per-cell complex mean over a list of same-grid maps. Keeps phase, so
/// destructive interference between frequencies survives the average.
pub fn freq_average_complex(maps: &[ComplexMap]) -> Result<ComplexMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidMap("empty map list".into()))?;
    for m in &maps[1..] {
        check_same_grid(&first.meta, &m.meta)?;
    }
    let n = maps.len() as f64;
    let mut acc = vec![Complex64::ZERO; first.meta.cells()];
    for m in maps {
        for (slot, z) in acc.iter_mut().zip(m.data.iter()) {
            *slot += z;
        }
    }
    for slot in acc.iter_mut() {
        *slot /= n;
    }
    let mean_f = maps.iter().map(|m| m.frequency_hz).sum::<f64>() / n;
    Ok(ComplexMap {
        data: acc,
        meta: first.meta,
        frequency_hz: mean_f,
        provenance: first.provenance,
    })
}

/// What happened to a cell while forming an attenuation map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellFlag {
    /// Plain ratio, no special handling.
    Valid,
    /// Both inputs below the noise floor; value forced to 0 dB.
    Floored,
    /// Ratio clamped at `+DB_CLAMP`.
    ClampedHigh,
    /// Ratio clamped at `-DB_CLAMP`.
    ClampedLow,
}

/// A decibel ratio map plus a per-cell record of floor and clamp events.
#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationMap {
    pub map: RealMap,
    pub flags: Vec<CellFlag>,
}

impl AttenuationMap {
    /// Number of cells carrying the given flag.
    pub fn count(&self, flag: CellFlag) -> usize {
        self.flags.iter().filter(|&&f| f == flag).count()
    }
}

/// Per-cell ratio map `20 log10(fp / tar)` in dB.
///
/// Cells where both inputs sit below `noise_floor` are forced to 0 dB and
/// flagged [`CellFlag::Floored`]; ratios past `+-DB_CLAMP` dB (including
/// division by zero) are clamped and flagged. Swapping the inputs negates
/// the map, flags included.
pub fn attenuation_map(fp: &RealMap, tar: &RealMap, noise_floor: f64) -> Result<AttenuationMap> {
    if fp.unit != MapUnit::LinearMagnitude || tar.unit != MapUnit::LinearMagnitude {
        return Err(Error::InvalidMap(
            "attenuation requires linear-magnitude maps".into(),
        ));
    }
    check_same_grid(&fp.meta, &tar.meta)?;
    if !(noise_floor >= 0.0 && noise_floor.is_finite()) {
        return Err(Error::InvalidMap(
            "noise floor must be nonnegative and finite".into(),
        ));
    }

    let mut data = Vec::with_capacity(fp.data.len());
    let mut flags = Vec::with_capacity(fp.data.len());
    for (&a, &b) in fp.data.iter().zip(tar.data.iter()) {
        let (value, flag) = if (a < noise_floor && b < noise_floor) || (a == 0.0 && b == 0.0) {
            (0.0, CellFlag::Floored)
        } else {
            let ratio = a / b;
            if ratio == 0.0 {
                (-DB_CLAMP, CellFlag::ClampedLow)
            } else if ratio.is_infinite() {
                (DB_CLAMP, CellFlag::ClampedHigh)
            } else {
                let db = 20.0 * ratio.log10();
                if db > DB_CLAMP {
                    (DB_CLAMP, CellFlag::ClampedHigh)
                } else if db < -DB_CLAMP {
                    (-DB_CLAMP, CellFlag::ClampedLow)
                } else {
                    (db, CellFlag::Valid)
                }
            }
        };
        data.push(value);
        flags.push(flag);
    }

    Ok(AttenuationMap {
        map: RealMap {
            data,
            meta: fp.meta,
            unit: MapUnit::Decibels,
            frequency_hz: fp.frequency_hz,
            provenance: fp.provenance,
        },
        flags,
    })
}

#[cfg(test)]
// Reference literals keep every digit of the independent evaluation.
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn meta(n_u: usize, n_v: usize) -> GridMeta {
        GridMeta {
            n_u,
            n_v,
            step_u: 0.031,
            step_v: 0.031,
        }
    }

    fn linear(data: Vec<f64>, n_u: usize, n_v: usize) -> RealMap {
        RealMap::new(
            data,
            meta(n_u, n_v),
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Simulated,
        )
        .unwrap()
    }

    #[test]
    fn magnitude_of_three_four_is_five() {
        let map = ComplexMap::new(
            vec![Complex64::new(3.0, 4.0), Complex64::new(0.0, -2.0)],
            meta(2, 1),
            2.48e9,
            Provenance::Simulated,
        )
        .unwrap();
        let mag = magnitude(&map);
        assert_eq!(mag.data, vec![5.0, 2.0]);
        assert_eq!(mag.unit, MapUnit::LinearMagnitude);
        assert_eq!(mag.frequency_hz, 2.48e9);
    }

    #[test]
    fn normalize_divides_by_the_peak() {
        let map = linear(vec![2.0, 4.0, 8.0, 1.0], 4, 1);
        let n = normalize_max(&map).unwrap();
        assert_eq!(n.data, vec![0.25, 0.5, 1.0, 0.125]);
        assert_eq!(n.unit, MapUnit::Normalized);
        // Idempotent bit for bit.
        let nn = normalize_max(&n).unwrap();
        assert_eq!(nn.data, n.data);
    }

    #[test]
    fn normalize_rejects_degenerate_and_db_maps() {
        let zero = linear(vec![0.0, 0.0], 2, 1);
        assert!(matches!(normalize_max(&zero), Err(Error::DegenerateMap)));
        let db = RealMap::new(
            vec![-3.0],
            meta(1, 1),
            MapUnit::Decibels,
            2.48e9,
            Provenance::Simulated,
        )
        .unwrap();
        assert!(normalize_max(&db).is_err());
    }

    #[test]
    fn real_map_unit_ranges_are_enforced() {
        assert!(RealMap::new(
            vec![-1.0],
            meta(1, 1),
            MapUnit::LinearMagnitude,
            2.48e9,
            Provenance::Measured
        )
        .is_err());
        assert!(RealMap::new(
            vec![1.5],
            meta(1, 1),
            MapUnit::Normalized,
            2.48e9,
            Provenance::Measured
        )
        .is_err());
        // Decibels may be negative.
        assert!(RealMap::new(
            vec![-40.0],
            meta(1, 1),
            MapUnit::Decibels,
            2.48e9,
            Provenance::Measured
        )
        .is_ok());
        assert!(RealMap::new(
            vec![f64::INFINITY],
            meta(1, 1),
            MapUnit::Decibels,
            2.48e9,
            Provenance::Measured
        )
        .is_err());
    }

    #[test]
    fn average_of_one_map_is_its_magnitude() {
        let map = ComplexMap::new(
            vec![Complex64::new(3.0, 4.0), Complex64::new(1.0, 0.0)],
            meta(2, 1),
            2.45e9,
            Provenance::Simulated,
        )
        .unwrap();
        let avg = freq_average(std::slice::from_ref(&map)).unwrap();
        assert_eq!(avg.data, magnitude(&map).data);
        assert_eq!(avg.frequency_hz, 2.45e9);
    }

    #[test]
    fn average_of_two_constant_maps() {
        let a = ComplexMap::new(
            vec![Complex64::new(2.0, 0.0); 4],
            meta(2, 2),
            2.40e9,
            Provenance::Simulated,
        )
        .unwrap();
        let b = ComplexMap::new(
            vec![Complex64::new(0.0, 4.0); 4],
            meta(2, 2),
            2.50e9,
            Provenance::Simulated,
        )
        .unwrap();
        let avg = freq_average(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(avg.data, vec![3.0; 4]);
        assert_eq!(avg.frequency_hz, 2.45e9);

        // The complex mean keeps phase: 2 + 4j halved per map pair.
        let cavg = freq_average_complex(&[a, b]).unwrap();
        assert_eq!(cavg.data, vec![Complex64::new(1.0, 2.0); 4]);
    }

    #[test]
    fn average_rejects_bad_input_lists() {
        assert!(freq_average(&[]).is_err());
        let a = ComplexMap::new(
            vec![Complex64::ZERO; 4],
            meta(2, 2),
            2.40e9,
            Provenance::Simulated,
        )
        .unwrap();
        let b = ComplexMap::new(
            vec![Complex64::ZERO; 6],
            meta(3, 2),
            2.50e9,
            Provenance::Simulated,
        )
        .unwrap();
        let err = freq_average(&[a.clone(), b]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let mut c = a.clone();
        c.meta.step_u = 0.062;
        assert!(freq_average(&[a, c]).is_err());
    }

    #[test]
    fn attenuation_of_equal_maps_is_zero() {
        let m = linear(vec![1.0, 0.5, 3.0, 10.0], 4, 1);
        let att = attenuation_map(&m, &m, DEFAULT_NOISE_FLOOR).unwrap();
        assert_eq!(att.map.data, vec![0.0; 4]);
        assert!(att.flags.iter().all(|&f| f == CellFlag::Valid));
        assert_eq!(att.map.unit, MapUnit::Decibels);
    }

    #[test]
    fn attenuation_of_doubled_map_is_six_db() {
        let tar = linear(vec![1.0, 2.0, 5.0], 3, 1);
        let fp = linear(vec![2.0, 4.0, 10.0], 3, 1);
        let att = attenuation_map(&fp, &tar, DEFAULT_NOISE_FLOOR).unwrap();
        for &v in &att.map.data {
            assert!((v - 6.0205999132796239).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn attenuation_decade_is_twenty_db() {
        let tar = linear(vec![1.0], 1, 1);
        let fp = linear(vec![10.0], 1, 1);
        let att = attenuation_map(&fp, &tar, DEFAULT_NOISE_FLOOR).unwrap();
        assert!((att.map.data[0] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn attenuation_flags_floor_and_clamps() {
        let fp = linear(vec![0.0, 1.0, 0.0, 1e-13, 1e300], 5, 1);
        let tar = linear(vec![0.0, 0.0, 1.0, 1e-14, 1e-300], 5, 1);
        let att = attenuation_map(&fp, &tar, DEFAULT_NOISE_FLOOR).unwrap();
        assert_eq!(att.map.data[0], 0.0);
        assert_eq!(att.flags[0], CellFlag::Floored);
        assert_eq!(att.map.data[1], DB_CLAMP);
        assert_eq!(att.flags[1], CellFlag::ClampedHigh);
        assert_eq!(att.map.data[2], -DB_CLAMP);
        assert_eq!(att.flags[2], CellFlag::ClampedLow);
        // Both below the floor even though the ratio is finite.
        assert_eq!(att.map.data[3], 0.0);
        assert_eq!(att.flags[3], CellFlag::Floored);
        // Finite ratio beyond the clamp.
        assert_eq!(att.map.data[4], DB_CLAMP);
        assert_eq!(att.flags[4], CellFlag::ClampedHigh);
        assert_eq!(att.count(CellFlag::Floored), 2);
        assert_eq!(att.count(CellFlag::Valid), 0);
    }

    #[test]
    fn attenuation_is_antisymmetric() {
        let a = linear(vec![1.0, 3.5, 0.02, 700.0], 4, 1);
        let b = linear(vec![2.0, 0.7, 5.0, 0.001], 4, 1);
        let ab = attenuation_map(&a, &b, DEFAULT_NOISE_FLOOR).unwrap();
        let ba = attenuation_map(&b, &a, DEFAULT_NOISE_FLOOR).unwrap();
        for (x, y) in ab.map.data.iter().zip(ba.map.data.iter()) {
            assert!((x + y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn attenuation_rejects_bad_inputs() {
        let lin = linear(vec![1.0], 1, 1);
        let db = RealMap::new(
            vec![0.0],
            meta(1, 1),
            MapUnit::Decibels,
            2.48e9,
            Provenance::Simulated,
        )
        .unwrap();
        assert!(attenuation_map(&lin, &db, DEFAULT_NOISE_FLOOR).is_err());
        let other = linear(vec![1.0, 2.0], 2, 1);
        assert!(attenuation_map(&lin, &other, DEFAULT_NOISE_FLOOR).is_err());
        assert!(attenuation_map(&lin, &lin, -1.0).is_err());
    }
}

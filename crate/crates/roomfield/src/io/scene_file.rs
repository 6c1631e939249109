//! Scene configuration files and reflection-coefficient files, in the
//! dotted `key = value` format. A scene file may optionally embed a full
//! coefficient set under `gamma.*` keys.

use super::kv::{format_point, format_polar, parse_complex, KvDoc};
use crate::error::Error;
use crate::forward::ReflectionSet;
use crate::geom::Point3;
use crate::scene::{
    validate_scene, FrequencySpec, RoomBox, RxGrid, SceneConfig, Transmitter, WallId, WALL_COUNT,
};
use crate::Result;
use num_complex::Complex64;
use std::path::Path;

const SCENE_KEYS: [&str; 13] = [
    "room.size_x",
    "room.size_y",
    "room.size_z",
    "tx.pos",
    "tx.moment",
    "grid.origin",
    "grid.u_axis",
    "grid.v_axis",
    "grid.n_u",
    "grid.n_v",
    "grid.step_u",
    "grid.step_v",
    "freqs.list",
];

fn gamma_key(wall: WallId) -> String {
    format!("gamma.{}", wall.name())
}

fn scene_allowlist() -> Vec<&'static str> {
    let mut keys: Vec<&str> = SCENE_KEYS.to_vec();
    keys.extend(GAMMA_KEYS);
    keys
}

const GAMMA_KEYS: [&str; WALL_COUNT] = [
    "gamma.right",
    "gamma.left",
    "gamma.ceiling",
    "gamma.ground",
    "gamma.back_rx",
    "gamma.back_tx",
];

fn gammas_from_doc(doc: &KvDoc) -> Result<Option<ReflectionSet>> {
    let present = WallId::ALL
        .iter()
        .filter(|w| doc.get(&gamma_key(**w)).is_some())
        .count();
    match present {
        0 => Ok(None),
        WALL_COUNT => {
            let mut g = [Complex64::ZERO; WALL_COUNT];
            for wall in WallId::ALL {
                g[wall.index()] = doc.get_complex(&gamma_key(wall))?;
            }
            Ok(Some(ReflectionSet::new(g)?))
        }
        _ => Err(Error::InvalidScene(
            "gamma keys must cover all six walls or none".into(),
        )),
    }
}

/// Read a scene file; returns the embedded coefficient set when the file
/// carries `gamma.*` keys.
pub fn read_scene(path: &Path) -> Result<(SceneConfig, Option<ReflectionSet>)> {
    let doc = KvDoc::from_file(path)?;
    doc.expect_only(&scene_allowlist())?;

    let room = RoomBox {
        size_x: doc.get_f64("room.size_x")?,
        size_y: doc.get_f64("room.size_y")?,
        size_z: doc.get_f64("room.size_z")?,
    };
    let tx = Transmitter {
        position: doc.get_point("tx.pos")?,
        dipole_moment: match doc.get("tx.moment") {
            Some(_) => doc.get_complex("tx.moment")?,
            None => Complex64::new(1.0, 0.0),
        },
    };
    let grid = RxGrid {
        origin: doc.get_point("grid.origin")?,
        u_axis: match doc.get("grid.u_axis") {
            Some(_) => doc.get_point("grid.u_axis")?,
            None => Point3::new(1.0, 0.0, 0.0),
        },
        v_axis: match doc.get("grid.v_axis") {
            Some(_) => doc.get_point("grid.v_axis")?,
            None => Point3::new(0.0, 0.0, 1.0),
        },
        n_u: doc.get_usize("grid.n_u")?,
        n_v: doc.get_usize("grid.n_v")?,
        step_u: doc.get_f64("grid.step_u")?,
        step_v: doc.get_f64("grid.step_v")?,
    };
    let freqs = FrequencySpec {
        frequencies: doc.get_f64_list("freqs.list")?,
    };
    let scene = SceneConfig {
        room,
        tx,
        grid,
        freqs,
    };
    validate_scene(&scene)?;
    let gammas = gammas_from_doc(&doc)?;
    Ok((scene, gammas))
}

fn push_gammas(out: &mut String, gammas: &ReflectionSet) {
    for (wall, (mag, deg)) in WallId::ALL.iter().zip(gammas.to_polar_deg()) {
        out.push_str(&format!(
            "{} = {}\n",
            gamma_key(*wall),
            format_polar(mag, deg)
        ));
    }
}

pub fn write_scene(scene: &SceneConfig, gammas: Option<&ReflectionSet>, path: &Path) -> Result<()> {
    validate_scene(scene)?;
    let mut out = String::new();
    out.push_str(&format!("room.size_x = {}\n", scene.room.size_x));
    out.push_str(&format!("room.size_y = {}\n", scene.room.size_y));
    out.push_str(&format!("room.size_z = {}\n", scene.room.size_z));
    out.push_str(&format!("tx.pos = {}\n", format_point(scene.tx.position)));
    let m = scene.tx.dipole_moment;
    out.push_str(&format!(
        "tx.moment = {}\n",
        format_polar(m.norm(), m.arg().to_degrees())
    ));
    out.push_str(&format!(
        "grid.origin = {}\n",
        format_point(scene.grid.origin)
    ));
    out.push_str(&format!(
        "grid.u_axis = {}\n",
        format_point(scene.grid.u_axis)
    ));
    out.push_str(&format!(
        "grid.v_axis = {}\n",
        format_point(scene.grid.v_axis)
    ));
    out.push_str(&format!("grid.n_u = {}\n", scene.grid.n_u));
    out.push_str(&format!("grid.n_v = {}\n", scene.grid.n_v));
    out.push_str(&format!("grid.step_u = {}\n", scene.grid.step_u));
    out.push_str(&format!("grid.step_v = {}\n", scene.grid.step_v));
    let list: Vec<String> = scene
        .freqs
        .frequencies
        .iter()
        .map(|f| format!("{f}"))
        .collect();
    out.push_str(&format!("freqs.list = {}\n", list.join(", ")));
    if let Some(g) = gammas {
        push_gammas(&mut out, g);
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Read a standalone coefficient file: exactly the six `gamma.*` keys.
pub fn read_gammas(path: &Path) -> Result<ReflectionSet> {
    let doc = KvDoc::from_file(path)?;
    doc.expect_only(&GAMMA_KEYS)?;
    gammas_from_doc(&doc)?.ok_or_else(|| Error::MissingKey {
        path: doc.path().to_string(),
        key: GAMMA_KEYS[0].to_string(),
    })
}

pub fn write_gammas(gammas: &ReflectionSet, path: &Path) -> Result<()> {
    let mut out = String::new();
    push_gammas(&mut out, gammas);
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Inline coefficient syntax for CLI flags: one `mag@deg` applied to all
/// six walls, or six comma-separated `mag@deg` values in wall order.
pub fn parse_inline_gammas(text: &str) -> Result<ReflectionSet> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let invalid = |m: String| Error::InvalidCalibration(format!("coefficient list: {m}"));
    match parts.len() {
        1 => {
            let g = parse_complex(parts[0]).map_err(invalid)?;
            ReflectionSet::uniform(g)
        }
        WALL_COUNT => {
            let mut g = [Complex64::ZERO; WALL_COUNT];
            for (slot, part) in g.iter_mut().zip(parts) {
                *slot = parse_complex(part).map_err(invalid)?;
            }
            ReflectionSet::new(g)
        }
        n => Err(invalid(format!("expected 1 or 6 values, got {n}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn scene_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("lab.scene");
        let scene = SceneConfig::lab_room();
        let gammas = ReflectionSet::from_polar_deg([
            (0.19, 95.0),
            (0.15, 55.0),
            (0.11, 0.0),
            (0.17, 17.0),
            (0.11, 243.0),
            (0.70, 287.0),
        ])
        .unwrap();
        write_scene(&scene, Some(&gammas), &path).unwrap();
        let (back, got) = read_scene(&path).unwrap();
        assert_eq!(back, scene);
        let got = got.unwrap();
        // Phases pass through degrees -> radians -> degrees; magnitudes and
        // the reconstructed complex values stay within an ulp.
        for (a, b) in got.as_array().iter().zip(gammas.as_array()) {
            assert!((a - b).norm() < 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn sweep_scene_preserves_the_frequency_list() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sweep.scene");
        let scene = SceneConfig::lab_room_sweep();
        write_scene(&scene, None, &path).unwrap();
        let (back, gammas) = read_scene(&path).unwrap();
        assert_eq!(back.freqs.frequencies, scene.freqs.frequencies);
        assert!(gammas.is_none());
    }

    #[test]
    fn missing_and_unknown_keys_are_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.scene");
        std::fs::write(&path, "room.size_x = 5.6\n").unwrap();
        let err = read_scene(&path).unwrap_err();
        assert!(err.to_string().contains("room.size_y"), "{err}");

        std::fs::write(&path, "room.sizex = 5.6\n").unwrap();
        let err = read_scene(&path).unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
    }

    #[test]
    fn partial_gamma_sets_are_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("partial.scene");
        let scene = SceneConfig::lab_room();
        write_scene(&scene, None, &path).unwrap();
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("gamma.right = 0.2@10\n");
        std::fs::write(&path, text).unwrap();
        let err = read_scene(&path).unwrap_err();
        assert!(err.to_string().contains("all six walls"), "{err}");
    }

    #[test]
    fn defaults_fill_in_moment_and_axes() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("min.scene");
        std::fs::write(
            &path,
            "room.size_x = 5.6\nroom.size_y = 3.6\nroom.size_z = 2.8\n\
             tx.pos = 2.8, 0.1, 1.0\n\
             grid.origin = 0.3045, 3.317, 0.1755\n\
             grid.n_u = 4\ngrid.n_v = 3\ngrid.step_u = 0.031\ngrid.step_v = 0.031\n\
             freqs.list = 2480000000\n",
        )
        .unwrap();
        let (scene, _) = read_scene(&path).unwrap();
        assert_eq!(scene.tx.dipole_moment, Complex64::new(1.0, 0.0));
        assert_eq!(scene.grid.u_axis, Point3::new(1.0, 0.0, 0.0));
        assert_eq!(scene.grid.v_axis, Point3::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn gamma_file_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("walls.gammas");
        let gammas =
            ReflectionSet::uniform(Complex64::from_polar(0.203, (-13.5f64).to_radians())).unwrap();
        write_gammas(&gammas, &path).unwrap();
        let back = read_gammas(&path).unwrap();
        for (a, b) in back.as_array().iter().zip(gammas.as_array()) {
            assert!((a - b).norm() < 1e-15);
        }

        std::fs::write(&path, "gamma.right = 0.2@0\n").unwrap();
        assert!(read_gammas(&path).is_err());
    }

    #[test]
    fn inline_gammas_accept_one_or_six_values() {
        let one = parse_inline_gammas("0.203@-13.5").unwrap();
        let expect = Complex64::from_polar(0.203, (-13.5f64).to_radians());
        assert!(one.as_array().iter().all(|g| *g == expect));

        let six =
            parse_inline_gammas("0.19@95, 0.15@55, 0.11@0, 0.17@17, 0.11@243, 0.7@287").unwrap();
        assert!(
            (six.get(WallId::BackTx) - Complex64::from_polar(0.7, 287f64.to_radians()))
                .norm()
                .abs()
                < 1e-15
        );

        assert!(parse_inline_gammas("0.2@0, 0.3@0").is_err());
        assert!(parse_inline_gammas("1.5@0").is_err());
        assert!(parse_inline_gammas("nonsense").is_err());
    }
}

//! Regenerates the bundled scene files from the built-in presets, so the
//! files in `scenes/` always match what the library constructs.
//!
//! Usage: cargo run -p roomfield --example bundle_scenes -- <dir>

use num_complex::Complex64;
use roomfield::forward::ReflectionSet;
use roomfield::io::{write_gammas, write_scene};
use roomfield::scene::SceneConfig;
use std::path::Path;

fn main() {
    let arg = std::env::args().nth(1).unwrap_or_else(|| "scenes".into());
    let dir = Path::new(&arg);
    std::fs::create_dir_all(dir).expect("create output directory");

    write_scene(&SceneConfig::lab_room(), None, &dir.join("lab_room.scene")).unwrap();
    write_scene(
        &SceneConfig::lab_room_reduced(),
        None,
        &dir.join("lab_room_reduced.scene"),
    )
    .unwrap();
    write_scene(
        &SceneConfig::lab_room_sweep(),
        None,
        &dir.join("lab_room_sweep.scene"),
    )
    .unwrap();

    let calibrated = ReflectionSet::from_polar_deg([
        (0.19, 95.0),
        (0.15, 55.0),
        (0.11, 0.0),
        (0.17, 17.0),
        (0.11, 243.0),
        (0.70, 287.0),
    ])
    .unwrap();
    write_gammas(&calibrated, &dir.join("lab_calibrated.gammas")).unwrap();

    let initial =
        ReflectionSet::uniform(Complex64::from_polar(0.203, (-13.5f64).to_radians())).unwrap();
    write_gammas(&initial, &dir.join("lab_initial.gammas")).unwrap();

    println!("wrote scene bundle to {}", dir.display());
}

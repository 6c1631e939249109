//! Room, transmitter, receive grid, and frequency list, plus validation
//! and the specular image construction.
//!
//! The room is the axis-aligned box `[0, size_x] x [0, size_y] x [0, size_z]`.
//! Wall naming assumes the transmitter sits near `y = 0` and the receive grid
//! near `y = size_y`: "right" is the wall at `x = size_x`, "left" at `x = 0`,
//! "ceiling" at `z = size_z`, "ground" at `z = 0`, "back_rx" behind the grid
//! at `y = size_y`, and "back_tx" behind the transmitter at `y = 0`.

use crate::error::Error;
use crate::geom::Point3;
use crate::Result;
use num_complex::Complex64;

/// Number of walls of a box room.
pub const WALL_COUNT: usize = 6;

/// Tolerance for unit-length and orthogonality checks on grid axes.
const AXIS_TOL: f64 = 1e-9;

/// One wall of the room. The declaration order is the fixed ordering of the
/// reflection coefficients everywhere in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WallId {
    Right,
    Left,
    Ceiling,
    Ground,
    BackRx,
    BackTx,
}

impl WallId {
    /// All walls in coefficient order.
    pub const ALL: [WallId; WALL_COUNT] = [
        WallId::Right,
        WallId::Left,
        WallId::Ceiling,
        WallId::Ground,
        WallId::BackRx,
        WallId::BackTx,
    ];

    /// Position of this wall in the coefficient ordering.
    pub fn index(self) -> usize {
        self as usize
    }

    /// Stable lowercase token used in files and reports.
    pub fn name(self) -> &'static str {
        match self {
            WallId::Right => "right",
            WallId::Left => "left",
            WallId::Ceiling => "ceiling",
            WallId::Ground => "ground",
            WallId::BackRx => "back_rx",
            WallId::BackTx => "back_tx",
        }
    }

    /// Inverse of [`WallId::name`].
    pub fn from_name(name: &str) -> Option<WallId> {
        WallId::ALL.into_iter().find(|w| w.name() == name)
    }
}

/// Axis-aligned box room with one corner at the origin, sizes in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoomBox {
    pub size_x: f64,
    pub size_y: f64,
    pub size_z: f64,
}

impl RoomBox {
    /// True if `p` lies in the closed box.
    pub fn contains(&self, p: Point3) -> bool {
        (0.0..=self.size_x).contains(&p.x)
            && (0.0..=self.size_y).contains(&p.y)
            && (0.0..=self.size_z).contains(&p.z)
    }

    /// True if `p` lies strictly inside the box.
    pub fn contains_interior(&self, p: Point3) -> bool {
        p.x > 0.0
            && p.x < self.size_x
            && p.y > 0.0
            && p.y < self.size_y
            && p.z > 0.0
            && p.z < self.size_z
    }
}

/// Vertical dipole transmitter. The moment is complex so a source with a
/// phase offset can be expressed directly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmitter {
    pub position: Point3,
    pub dipole_moment: Complex64,
}

/// Shape and pitch of a map, carried by every map type so that operations
/// can reject mixed-grid inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub n_u: usize,
    pub n_v: usize,
    pub step_u: f64,
    pub step_v: f64,
}

impl GridMeta {
    /// Total number of cells.
    pub fn cells(&self) -> usize {
        self.n_u * self.n_v
    }

    /// Row-major linear index of cell `(i, j)`.
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n_u && j < self.n_v);
        j * self.n_u + i
    }

    /// True if both maps have identical shape and pitch.
    pub fn same_shape(&self, other: &GridMeta) -> bool {
        self == other
    }
}

/// Planar receive grid: `point(i, j) = origin + u_axis*(i*step_u) + v_axis*(j*step_v)`
/// with `0 <= i < n_u`, `0 <= j < n_v`. Axes must be unit length and orthogonal.
#[derive(Debug, Clone, PartialEq)]
pub struct RxGrid {
    pub origin: Point3,
    pub u_axis: Point3,
    pub v_axis: Point3,
    pub n_u: usize,
    pub n_v: usize,
    pub step_u: f64,
    pub step_v: f64,
}

impl RxGrid {
    /// Position of grid cell `(i, j)`.
    pub fn point(&self, i: usize, j: usize) -> Point3 {
        self.origin
            + self.u_axis * (i as f64 * self.step_u)
            + self.v_axis * (j as f64 * self.step_v)
    }

    /// Shape and pitch of maps sampled on this grid.
    pub fn meta(&self) -> GridMeta {
        GridMeta {
            n_u: self.n_u,
            n_v: self.n_v,
            step_u: self.step_u,
            step_v: self.step_v,
        }
    }
}

/// Ordered list of simulation frequencies in Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpec {
    pub frequencies: Vec<f64>,
}

impl FrequencySpec {
    pub fn single(f_hz: f64) -> Self {
        FrequencySpec {
            frequencies: vec![f_hz],
        }
    }

    pub fn is_single(&self) -> bool {
        self.frequencies.len() == 1
    }
}

/// Complete scene description consumed by the forward model.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneConfig {
    pub room: RoomBox,
    pub tx: Transmitter,
    pub grid: RxGrid,
    pub freqs: FrequencySpec,
}

/// Checks every structural invariant of a scene. Returns the first violation.
pub fn validate_scene(scene: &SceneConfig) -> Result<()> {
    let room = &scene.room;
    if !(room.size_x > 0.0 && room.size_x.is_finite()) {
        return Err(Error::InvalidScene("size_x must be positive".into()));
    }
    if !(room.size_y > 0.0 && room.size_y.is_finite()) {
        return Err(Error::InvalidScene("size_y must be positive".into()));
    }
    if !(room.size_z > 0.0 && room.size_z.is_finite()) {
        return Err(Error::InvalidScene("size_z must be positive".into()));
    }

    if !scene.tx.position.is_finite() {
        return Err(Error::InvalidScene("tx.pos must be finite".into()));
    }
    if !room.contains_interior(scene.tx.position) {
        return Err(Error::InvalidScene("tx.position outside room".into()));
    }
    let moment = scene.tx.dipole_moment;
    if !(moment.re.is_finite() && moment.im.is_finite()) || moment == Complex64::ZERO {
        return Err(Error::InvalidScene(
            "tx.moment must be finite and nonzero".into(),
        ));
    }

    let grid = &scene.grid;
    if !grid.origin.is_finite() {
        return Err(Error::InvalidScene("grid.origin must be finite".into()));
    }
    for (axis, name) in [(grid.u_axis, "grid.u_axis"), (grid.v_axis, "grid.v_axis")] {
        if !axis.is_finite() {
            return Err(Error::InvalidScene(format!("{name} must be finite")));
        }
        if (axis.norm() - 1.0).abs() > AXIS_TOL {
            return Err(Error::InvalidScene(format!("{name} must be unit length")));
        }
    }
    if grid.u_axis.dot(grid.v_axis).abs() > AXIS_TOL {
        return Err(Error::InvalidScene("grid axes must be orthogonal".into()));
    }
    if grid.n_u == 0 {
        return Err(Error::InvalidScene("grid.n_u must be at least 1".into()));
    }
    if grid.n_v == 0 {
        return Err(Error::InvalidScene("grid.n_v must be at least 1".into()));
    }
    if !(grid.step_u > 0.0 && grid.step_u.is_finite()) {
        return Err(Error::InvalidScene("grid.step_u must be positive".into()));
    }
    if !(grid.step_v > 0.0 && grid.step_v.is_finite()) {
        return Err(Error::InvalidScene("grid.step_v must be positive".into()));
    }
    // The grid is affine and the room convex, so corner containment implies
    // containment of every cell.
    for (i, j) in [
        (0, 0),
        (grid.n_u - 1, 0),
        (0, grid.n_v - 1),
        (grid.n_u - 1, grid.n_v - 1),
    ] {
        if !room.contains(grid.point(i, j)) {
            return Err(Error::InvalidScene(format!(
                "grid point ({i}, {j}) outside room"
            )));
        }
    }

    if scene.freqs.frequencies.is_empty() {
        return Err(Error::InvalidScene("freqs.list must not be empty".into()));
    }
    for &f in &scene.freqs.frequencies {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::NonpositiveFrequency(f));
        }
    }
    for pair in scene.freqs.frequencies.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidScene(
                "freqs.list must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Reflects `p` across the plane of `wall`.
pub fn mirror_across(wall: WallId, room: &RoomBox, p: Point3) -> Point3 {
    match wall {
        WallId::Right => Point3::new(2.0 * room.size_x - p.x, p.y, p.z),
        WallId::Left => Point3::new(-p.x, p.y, p.z),
        WallId::Ceiling => Point3::new(p.x, p.y, 2.0 * room.size_z - p.z),
        WallId::Ground => Point3::new(p.x, p.y, -p.z),
        WallId::BackRx => Point3::new(p.x, 2.0 * room.size_y - p.y, p.z),
        WallId::BackTx => Point3::new(p.x, -p.y, p.z),
    }
}

/// Positions of the six single-bounce image sources, in coefficient order.
pub fn image_sources(room: &RoomBox, tx: &Transmitter) -> [(WallId, Point3); WALL_COUNT] {
    WallId::ALL.map(|w| (w, mirror_across(w, room, tx.position)))
}

/// All grid cell positions in row-major order (`i` fastest).
pub fn grid_points(grid: &RxGrid) -> Vec<Point3> {
    let mut points = Vec::with_capacity(grid.n_u * grid.n_v);
    for j in 0..grid.n_v {
        for i in 0..grid.n_u {
            points.push(grid.point(i, j));
        }
    }
    points
}

impl SceneConfig {
    /// Bundled example scene: a 5.6 m x 3.6 m x 2.8 m room, transmitter
    /// 0.10 m in front of the back wall at 1.0 m height, and a vertical
    /// 162 x 80 receive grid at 31 mm pitch standing 0.283 m from the
    /// opposite wall. Single frequency, 2.48 GHz.
    pub fn lab_room() -> SceneConfig {
        Self::lab_geometry(162, 80, 0.031, FrequencySpec::single(2.48e9))
    }

    /// Same geometry as [`SceneConfig::lab_room`] with every second grid
    /// cell dropped (81 x 40 at 62 mm pitch). Useful where the full grid
    /// is too slow.
    pub fn lab_room_reduced() -> SceneConfig {
        Self::lab_geometry(81, 40, 0.062, FrequencySpec::single(2.48e9))
    }

    /// Same geometry as [`SceneConfig::lab_room`] with a 2.40 to 2.50 GHz
    /// sweep at 10 MHz steps (11 frequencies).
    pub fn lab_room_sweep() -> SceneConfig {
        let freqs = (0..11).map(|i| 2.40e9 + i as f64 * 1.0e7).collect();
        Self::lab_geometry(162, 80, 0.031, FrequencySpec { frequencies: freqs })
    }

    fn lab_geometry(n_u: usize, n_v: usize, step: f64, freqs: FrequencySpec) -> SceneConfig {
        let room = RoomBox {
            size_x: 5.6,
            size_y: 3.6,
            size_z: 2.8,
        };
        // Grid spans are centered horizontally and vertically; the plane
        // stands 0.283 m in front of the wall at y = size_y.
        let span_u = (n_u - 1) as f64 * step;
        let span_v = (n_v - 1) as f64 * step;
        let origin = Point3::new(
            (room.size_x - span_u) / 2.0,
            room.size_y - 0.283,
            (room.size_z - span_v) / 2.0,
        );
        SceneConfig {
            room,
            tx: Transmitter {
                position: Point3::new(2.8, 0.10, 1.0),
                dipole_moment: Complex64::new(1.0, 0.0),
            },
            grid: RxGrid {
                origin,
                u_axis: Point3::new(1.0, 0.0, 0.0),
                v_axis: Point3::new(0.0, 0.0, 1.0),
                n_u,
                n_v,
                step_u: step,
                step_v: step,
            },
            freqs,
        }
    }
}

//! Obstacle worlds, occupancy grids, ray queries and the global
//! shortest-path oracle.
//!
//! A [`WorldMap`] is a continuous scene of rectangles and circles generated
//! deterministically from a seed. All sensing and planning queries go
//! through its rasterized [`OccupancyGrid`]; the grid is also what the
//! A* oracle searches after obstacle inflation.

mod astar;
mod place;

pub use astar::{astar_on_inflated, astar_path, inflate, GridPath};
pub use place::{place_robots, TaskKind, TaskSpec};

use std::f64::consts::PI;
use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors produced by world construction and queries.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WorldError {
    /// The inflated grid admits no path between the two cells.
    #[error("no path from cell {from:?} to cell {to:?}")]
    NoPath {
        from: (usize, usize),
        to: (usize, usize),
    },
    /// Rejection sampling ran out of attempts while placing a robot.
    #[error("failed to place robot {robot} after {attempts} attempts")]
    PlacementFailed { robot: usize, attempts: usize },
    /// A map file could not be parsed.
    #[error("bad map file: {0}")]
    BadMapFile(String),
}

/// A single convex obstacle. Rectangles may be rotated; shapes may overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Obstacle {
    Rect {
        cx: f64,
        cy: f64,
        width: f64,
        height: f64,
        yaw: f64,
    },
    Circle {
        cx: f64,
        cy: f64,
        radius: f64,
    },
}

impl Obstacle {
    /// True iff the point lies strictly inside the shape (boundary counts as inside).
    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.signed_distance(x, y) <= 0.0
    }

    /// Signed distance to the obstacle surface: negative inside, positive outside.
    pub fn signed_distance(&self, x: f64, y: f64) -> f64 {
        match *self {
            Obstacle::Circle { cx, cy, radius } => (x - cx).hypot(y - cy) - radius,
            Obstacle::Rect {
                cx,
                cy,
                width,
                height,
                yaw,
            } => {
                // Rotate the point into the rectangle frame.
                let (s, c) = yaw.sin_cos();
                let dx = x - cx;
                let dy = y - cy;
                let lx = (c * dx + s * dy).abs() - width * 0.5;
                let ly = (-s * dx + c * dy).abs() - height * 0.5;
                if lx <= 0.0 && ly <= 0.0 {
                    lx.max(ly)
                } else {
                    lx.max(0.0).hypot(ly.max(0.0))
                }
            }
        }
    }

    /// Axis-aligned bounding box `(min_x, min_y, max_x, max_y)`.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        match *self {
            Obstacle::Circle { cx, cy, radius } => (cx - radius, cy - radius, cx + radius, cy + radius),
            Obstacle::Rect {
                cx,
                cy,
                width,
                height,
                yaw,
            } => {
                let (s, c) = yaw.sin_cos();
                let ex = (c * width * 0.5).abs() + (s * height * 0.5).abs();
                let ey = (s * width * 0.5).abs() + (c * height * 0.5).abs();
                (cx - ex, cy - ey, cx + ex, cy + ey)
            }
        }
    }
}

/// Obstacle mix of a generated map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MapKind {
    /// Rectangles only.
    A,
    /// Circles only.
    B,
    /// Random mix of both.
    C,
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapKind::A => write!(f, "A"),
            MapKind::B => write!(f, "B"),
            MapKind::C => write!(f, "C"),
        }
    }
}

impl std::str::FromStr for MapKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(MapKind::A),
            "B" | "b" => Ok(MapKind::B),
            "C" | "c" => Ok(MapKind::C),
            other => Err(format!("unknown map kind '{other}' (expected A, B or C)")),
        }
    }
}

/// Ranges used by [`generate_map`].
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub width: f64,
    pub height: f64,
    pub count_min: usize,
    pub count_max: usize,
    /// Rectangle edge length range, meters.
    pub edge_min: f64,
    pub edge_max: f64,
    /// Circle radius range, meters.
    pub radius_min: f64,
    pub radius_max: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            width: 20.0,
            height: 20.0,
            count_min: 10,
            count_max: 30,
            edge_min: 0.5,
            edge_max: 3.0,
            radius_min: 0.5,
            radius_max: 3.0,
        }
    }
}

/// A continuous obstacle scene.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub width: f64,
    pub height: f64,
    pub seed: u64,
    pub kind: MapKind,
    pub obstacles: Vec<Obstacle>,
}

impl WorldMap {
    /// Empty map, mostly useful in tests.
    pub fn empty(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            seed: 0,
            kind: MapKind::C,
            obstacles: Vec::new(),
        }
    }

    /// Distance from a point to the nearest obstacle surface
    /// (`f64::INFINITY` when the map has no obstacles).
    pub fn clearance(&self, x: f64, y: f64) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.signed_distance(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Generate a map deterministically from `seed`.
///
/// Obstacle count, positions, sizes and orientations are drawn from the
/// ranges in `params`; the shape mix follows `kind`.
pub fn generate_map(seed: u64, kind: MapKind, params: &GenParams) -> WorldMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = rng.random_range(params.count_min..=params.count_max);
    let mut obstacles = Vec::with_capacity(count);
    for _ in 0..count {
        let circle = match kind {
            MapKind::A => false,
            MapKind::B => true,
            MapKind::C => rng.random::<bool>(),
        };
        let cx = rng.random_range(0.0..params.width);
        let cy = rng.random_range(0.0..params.height);
        if circle {
            obstacles.push(Obstacle::Circle {
                cx,
                cy,
                radius: rng.random_range(params.radius_min..=params.radius_max),
            });
        } else {
            obstacles.push(Obstacle::Rect {
                cx,
                cy,
                width: rng.random_range(params.edge_min..=params.edge_max),
                height: rng.random_range(params.edge_min..=params.edge_max),
                yaw: rng.random_range(-PI..PI),
            });
        }
    }
    WorldMap {
        width: params.width,
        height: params.height,
        seed,
        kind,
        obstacles,
    }
}

/// Binary occupancy grid. A cell is occupied iff its center lies inside
/// some obstacle.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub resolution: f64,
    pub nx: usize,
    pub ny: usize,
    /// World coordinates of the lower-left corner of cell (0, 0).
    pub origin: (f64, f64),
    cells: Vec<bool>,
}

impl OccupancyGrid {
    pub fn new_free(nx: usize, ny: usize, resolution: f64, origin: (f64, f64)) -> Self {
        Self {
            resolution,
            nx,
            ny,
            origin,
            cells: vec![false; nx * ny],
        }
    }

    #[inline]
    pub fn occupied(&self, ix: usize, iy: usize) -> bool {
        self.cells[iy * self.nx + ix]
    }

    #[inline]
    pub fn set(&mut self, ix: usize, iy: usize, value: bool) {
        self.cells[iy * self.nx + ix] = value;
    }

    /// Center of a cell in world coordinates.
    #[inline]
    pub fn cell_center(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            self.origin.0 + (ix as f64 + 0.5) * self.resolution,
            self.origin.1 + (iy as f64 + 0.5) * self.resolution,
        )
    }

    /// Cell containing a world point, or `None` outside the grid.
    pub fn world_to_cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let gx = (x - self.origin.0) / self.resolution;
        let gy = (y - self.origin.1) / self.resolution;
        if gx < 0.0 || gy < 0.0 {
            return None;
        }
        let (ix, iy) = (gx.floor() as usize, gy.floor() as usize);
        (ix < self.nx && iy < self.ny).then_some((ix, iy))
    }

    pub fn occupied_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }
}

/// Rasterize a world at the given resolution (meters per cell).
pub fn rasterize(world: &WorldMap, resolution: f64) -> OccupancyGrid {
    assert!(resolution > 0.0, "resolution must be positive");
    let nx = (world.width / resolution).ceil() as usize;
    let ny = (world.height / resolution).ceil() as usize;
    let mut grid = OccupancyGrid::new_free(nx, ny, resolution, (0.0, 0.0));
    for obstacle in &world.obstacles {
        let (min_x, min_y, max_x, max_y) = obstacle.bbox();
        let ix0 = ((min_x / resolution).floor().max(0.0)) as usize;
        let iy0 = ((min_y / resolution).floor().max(0.0)) as usize;
        let ix1 = (((max_x / resolution).ceil() as usize).min(nx)).max(ix0);
        let iy1 = (((max_y / resolution).ceil() as usize).min(ny)).max(iy0);
        for iy in iy0..iy1 {
            for ix in ix0..ix1 {
                if !grid.occupied(ix, iy) {
                    let (cx, cy) = grid.cell_center(ix, iy);
                    if obstacle.contains(cx, cy) {
                        grid.set(ix, iy, true);
                    }
                }
            }
        }
    }
    grid
}

/// Distance along a ray to the first occupied cell, clamped to `max_range`.
///
/// Uses exact grid traversal; the returned distance is to the boundary at
/// which the ray enters the occupied cell. An origin inside an occupied
/// cell yields 0; leaving the grid yields `max_range`.
pub fn raycast(grid: &OccupancyGrid, origin: (f64, f64), angle: f64, max_range: f64) -> f64 {
    let (ox, oy) = origin;
    let gx = (ox - grid.origin.0) / grid.resolution;
    let gy = (oy - grid.origin.1) / grid.resolution;
    let mut ix = gx.floor() as i64;
    let mut iy = gy.floor() as i64;
    let inside = |ix: i64, iy: i64| ix >= 0 && iy >= 0 && (ix as usize) < grid.nx && (iy as usize) < grid.ny;
    if !inside(ix, iy) {
        return max_range;
    }
    if grid.occupied(ix as usize, iy as usize) {
        return 0.0;
    }

    let (dy, dx) = angle.sin_cos();
    let step_x: i64 = if dx > 0.0 { 1 } else { -1 };
    let step_y: i64 = if dy > 0.0 { 1 } else { -1 };
    // Parametric distance (in meters) to the next vertical/horizontal cell
    // boundary, and the distance between successive boundaries.
    let t_delta_x = if dx != 0.0 { (grid.resolution / dx).abs() } else { f64::INFINITY };
    let t_delta_y = if dy != 0.0 { (grid.resolution / dy).abs() } else { f64::INFINITY };
    let frac_x = if dx > 0.0 { 1.0 - (gx - gx.floor()) } else { gx - gx.floor() };
    let frac_y = if dy > 0.0 { 1.0 - (gy - gy.floor()) } else { gy - gy.floor() };
    let mut t_max_x = if dx != 0.0 { t_delta_x * frac_x } else { f64::INFINITY };
    let mut t_max_y = if dy != 0.0 { t_delta_y * frac_y } else { f64::INFINITY };

    loop {
        let t;
        if t_max_x < t_max_y {
            t = t_max_x;
            t_max_x += t_delta_x;
            ix += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            iy += step_y;
        }
        if t >= max_range {
            return max_range;
        }
        if !inside(ix, iy) {
            return max_range;
        }
        if grid.occupied(ix as usize, iy as usize) {
            return t;
        }
    }
}

/// Normalize an angle to `(-pi, pi]`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// A robot pose: position plus heading in `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self {
            x,
            y,
            heading: wrap_angle(heading),
        }
    }

    pub fn position(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Serialize a map to the structured-text format:
/// a header (seed, kind, size, obstacle count) followed by one obstacle
/// per line, floats with 6 decimals.
pub fn write_map(world: &WorldMap) -> String {
    let mut out = String::new();
    out.push_str(&format!("seed {}\n", world.seed));
    out.push_str(&format!("kind {}\n", world.kind));
    out.push_str(&format!("size {:.6} {:.6}\n", world.width, world.height));
    out.push_str(&format!("obstacles {}\n", world.obstacles.len()));
    for o in &world.obstacles {
        match *o {
            Obstacle::Rect {
                cx,
                cy,
                width,
                height,
                yaw,
            } => out.push_str(&format!(
                "rect {cx:.6} {cy:.6} {width:.6} {height:.6} {yaw:.6}\n"
            )),
            Obstacle::Circle { cx, cy, radius } => {
                out.push_str(&format!("circ {cx:.6} {cy:.6} {radius:.6}\n"))
            }
        }
    }
    out
}

/// Parse a map previously produced by [`write_map`].
pub fn read_map(text: &str) -> Result<WorldMap, WorldError> {
    let bad = |msg: &str| WorldError::BadMapFile(msg.to_string());
    let mut lines = text.lines();
    let mut header = |key: &str| -> Result<String, WorldError> {
        let line = lines.next().ok_or_else(|| bad("truncated header"))?;
        let rest = line
            .strip_prefix(key)
            .ok_or_else(|| WorldError::BadMapFile(format!("expected '{key}' line, got '{line}'")))?;
        Ok(rest.trim().to_string())
    };
    let seed: u64 = header("seed")?.parse().map_err(|_| bad("bad seed"))?;
    let kind: MapKind = header("kind")?.parse().map_err(WorldError::BadMapFile)?;
    let size = header("size")?;
    let mut it = size.split_whitespace();
    let width: f64 = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad size"))?;
    let height: f64 = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("bad size"))?;
    let count: usize = header("obstacles")?.parse().map_err(|_| bad("bad obstacle count"))?;
    let mut obstacles = Vec::with_capacity(count);
    for line in lines {
        let mut it = line.split_whitespace();
        let tag = match it.next() {
            Some(t) => t,
            None => continue,
        };
        let mut num = || -> Result<f64, WorldError> {
            it.next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad obstacle line"))
        };
        match tag {
            "rect" => obstacles.push(Obstacle::Rect {
                cx: num()?,
                cy: num()?,
                width: num()?,
                height: num()?,
                yaw: num()?,
            }),
            "circ" => obstacles.push(Obstacle::Circle {
                cx: num()?,
                cy: num()?,
                radius: num()?,
            }),
            other => return Err(WorldError::BadMapFile(format!("unknown obstacle tag '{other}'"))),
        }
    }
    if obstacles.len() != count {
        return Err(bad("obstacle count mismatch"));
    }
    Ok(WorldMap {
        width,
        height,
        seed,
        kind,
        obstacles,
    })
}

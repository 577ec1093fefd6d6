//! Simulated lidar, goal-aligned local maps, communication graphs and the
//! 7x7 positional grid encoding.
//!
//! Every perception product lives in the *goal-aligned frame*: +x points
//! from the robot to its goal, +y to the left of that (counterclockwise
//! positive). Fusing maps from several robots only makes sense once they
//! share this orientation.

use std::f64::consts::PI;

use crate::world::{raycast, wrap_angle, OccupancyGrid, Pose};

/// Sensor and local-map parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SensingConfig {
    /// Lidar maximum range, meters.
    pub r_fov: f64,
    /// Maximum teammate distance for communication, meters.
    pub r_com: f64,
    /// Number of evenly spaced beams over the full circle.
    pub n_beams: usize,
    /// Local map side length in cells (odd, robot at the center cell).
    pub local_map_cells: usize,
    /// Local map resolution, meters per cell.
    pub local_resolution: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self {
            r_fov: 2.5,
            r_com: 2.5,
            n_beams: 360,
            local_map_cells: 101,
            local_resolution: 0.05,
        }
    }
}

impl SensingConfig {
    /// Beam angle in the robot frame; beam `n_beams / 2` points along the
    /// heading.
    #[inline]
    pub fn beam_angle(&self, k: usize) -> f64 {
        -PI + 2.0 * PI * k as f64 / self.n_beams as f64
    }

    /// Index of the beam closest to a robot-frame angle.
    #[inline]
    pub fn beam_index(&self, theta: f64) -> usize {
        let n = self.n_beams as f64;
        let k = ((wrap_angle(theta) + PI) / (2.0 * PI) * n).round() as usize;
        k % self.n_beams
    }
}

/// One sweep of range readings in the robot frame.
///
/// `ranges[k] == max_range` means no return on that beam.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

impl LidarScan {
    /// A scan with no returns anywhere.
    pub fn open(cfg: &SensingConfig) -> Self {
        Self {
            ranges: vec![cfg.r_fov; cfg.n_beams],
            max_range: cfg.r_fov,
        }
    }
}

/// A teammate body rendered into scans as an occupied disc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyDisc {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Distance along a ray to a disc, or `None` if the ray misses it.
fn ray_disc_distance(origin: (f64, f64), angle: f64, disc: &BodyDisc) -> Option<f64> {
    let (dy, dx) = angle.sin_cos();
    let ox = disc.x - origin.0;
    let oy = disc.y - origin.1;
    let along = ox * dx + oy * dy;
    let perp2 = ox * ox + oy * oy - along * along;
    let r2 = disc.radius * disc.radius;
    if perp2 > r2 {
        return None;
    }
    let back = (r2 - perp2).sqrt();
    let t = along - back;
    if t >= 0.0 {
        Some(t)
    } else if along + back >= 0.0 {
        // Origin inside the disc.
        Some(0.0)
    } else {
        None
    }
}

/// Simulate a lidar sweep from `pose`. Obstacles come from the grid;
/// `bodies` (teammate discs) occlude exactly like obstacles.
pub fn scan(
    grid: &OccupancyGrid,
    pose: &Pose,
    bodies: &[BodyDisc],
    cfg: &SensingConfig,
) -> LidarScan {
    let mut ranges = Vec::with_capacity(cfg.n_beams);
    for k in 0..cfg.n_beams {
        let world_angle = pose.heading + cfg.beam_angle(k);
        let mut d = raycast(grid, (pose.x, pose.y), world_angle, cfg.r_fov);
        for body in bodies {
            if let Some(t) = ray_disc_distance((pose.x, pose.y), world_angle, body) {
                d = d.min(t);
            }
        }
        ranges.push(d.min(cfg.r_fov));
    }
    LidarScan {
        ranges,
        max_range: cfg.r_fov,
    }
}

/// Bearing of the goal in the robot frame, `(-pi, pi]`. Available at any
/// distance: the direction sensor works even when the goal is out of view.
pub fn goal_bearing(pose: &Pose, goal: (f64, f64)) -> f64 {
    wrap_angle((goal.1 - pose.y).atan2(goal.0 - pose.x) - pose.heading)
}

/// Ternary occupancy of one local-map cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

/// Goal-aligned rasterization of a scan.
///
/// Row-major from the top-left of the goal-aligned frame: +x (toward the
/// goal) grows along columns, +y (robot's left) up along rows. The robot
/// sits in the center cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMap {
    pub cells: Vec<CellState>,
    pub side: usize,
}

impl LocalMap {
    pub fn unknown(side: usize) -> Self {
        Self {
            cells: vec![CellState::Unknown; side * side],
            side,
        }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> CellState {
        self.cells[row * self.side + col]
    }

    #[inline]
    fn set(&mut self, row: usize, col: usize, state: CellState) {
        self.cells[row * self.side + col] = state;
    }

    /// Cell under a goal-frame point, or `None` outside the map square.
    /// Nearest-cell rasterization.
    #[inline]
    pub fn cell_at(&self, x: f64, y: f64, resolution: f64) -> Option<(usize, usize)> {
        let half = (self.side / 2) as i64;
        let col = (x / resolution).round() as i64 + half;
        let row = half - (y / resolution).round() as i64;
        (col >= 0 && row >= 0 && col < self.side as i64 && row < self.side as i64)
            .then_some((row as usize, col as usize))
    }

    /// The training/wire encoding: one byte per cell, row-major,
    /// occupied = 1, free or unknown = 0.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.cells
            .iter()
            .map(|&c| u8::from(c == CellState::Occupied))
            .collect()
    }

    /// Rebuild from the wire encoding (free/unknown collapse to free).
    pub fn from_bytes(bytes: &[u8], side: usize) -> Self {
        assert_eq!(bytes.len(), side * side, "local map byte length");
        Self {
            cells: bytes
                .iter()
                .map(|&b| if b != 0 { CellState::Occupied } else { CellState::Free })
                .collect(),
            side,
        }
    }
}

/// Rasterize a scan into the frame whose +x axis sits at robot-frame
/// bearing `align_bearing` (for a robot's own map this is its goal
/// bearing; for a teammate's shared map it is the bearing of the central
/// robot's goal direction).
///
/// Cells along each beam up to the return are free, the return cell is
/// occupied, everything else stays unknown.
pub fn build_local_map(scan: &LidarScan, align_bearing: f64, cfg: &SensingConfig) -> LocalMap {
    let mut map = LocalMap::unknown(cfg.local_map_cells);
    let res = cfg.local_resolution;
    let step = res * 0.5;
    for (k, &range) in scan.ranges.iter().enumerate() {
        let theta = cfg.beam_angle(k) - align_bearing;
        let (s, c) = theta.sin_cos();
        let hit = range < scan.max_range;
        // Free space up to (but not into) the return cell.
        let mut t = 0.0;
        while t < range - step * 0.5 {
            if let Some((row, col)) = map.cell_at(t * c, t * s, res) {
                map.set(row, col, CellState::Free);
            }
            t += step;
        }
        if hit {
            if let Some((row, col)) = map.cell_at(range * c, range * s, res) {
                map.set(row, col, CellState::Occupied);
            }
        }
    }
    map
}

/// One directed communication edge: teammate `j` seen from robot `i` at
/// distance `r` and bearing `theta` in i's goal-aligned frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommEdge {
    pub i: usize,
    pub j: usize,
    pub r: f64,
    pub theta: f64,
}

/// Communication graph over the team. Symmetric: the reverse of every
/// edge is present (with its own bearing); no self-edges.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CommGraph {
    pub n_robots: usize,
    pub edges: Vec<CommEdge>,
}

impl CommGraph {
    /// Directed edges out of robot `i`, ordered by neighbor id.
    pub fn neighbors_of(&self, i: usize) -> impl Iterator<Item = &CommEdge> {
        self.edges.iter().filter(move |e| e.i == i)
    }
}

/// Build the communication graph: an edge pair (i, j) exists iff the
/// robots are closer than `r_com`. Bearings are goal-aligned per endpoint.
pub fn comm_graph(poses: &[Pose], goals: &[(f64, f64)], cfg: &SensingConfig) -> CommGraph {
    assert_eq!(poses.len(), goals.len());
    let goal_dir = |i: usize| {
        let (gx, gy) = goals[i];
        (gy - poses[i].y).atan2(gx - poses[i].x)
    };
    let mut edges = Vec::new();
    for i in 0..poses.len() {
        for j in 0..poses.len() {
            if i == j {
                continue;
            }
            let dx = poses[j].x - poses[i].x;
            let dy = poses[j].y - poses[i].y;
            let r = dx.hypot(dy);
            if r < cfg.r_com {
                edges.push(CommEdge {
                    i,
                    j,
                    r,
                    theta: wrap_angle(dy.atan2(dx) - goal_dir(i)),
                });
            }
        }
    }
    CommGraph {
        n_robots: poses.len(),
        edges,
    }
}

/// Position identifier over the 7x7 grid covering the perception square
/// `[-r_fov, r_fov]^2` in the goal-aligned frame. The robot's own cell is
/// 24 (the center); out-of-square positions clamp to the border cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridCellId(pub u8);

pub const GRID_CELLS: usize = 49;
pub const CENTER_CELL: GridCellId = GridCellId(24);

/// Map a goal-frame polar position to its 7x7 grid cell.
pub fn grid_cell_id(r: f64, theta: f64, cfg: &SensingConfig) -> GridCellId {
    let (s, c) = theta.sin_cos();
    let x = r * c;
    let y = r * s;
    let side = 2.0 * cfg.r_fov / 7.0;
    let clamp = |v: f64| (v.floor() as i64).clamp(0, 6) as u8;
    let col = clamp((x + cfg.r_fov) / side);
    let row = clamp((cfg.r_fov - y) / side);
    GridCellId(7 * row + col)
}

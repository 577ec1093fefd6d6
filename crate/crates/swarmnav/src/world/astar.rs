//! 8-connected grid shortest paths with obstacle inflation.
//!
//! Move costs are `resolution` for straight steps and `resolution * sqrt(2)`
//! for diagonals. Internally a path cost is carried as an exact pair
//! (straight steps, diagonal steps); since sqrt(2) is irrational the optimal
//! pair is unique, which makes path lengths reproducible and exactly
//! comparable across search implementations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{OccupancyGrid, WorldError};

/// Result of a grid search: the cell path and its metric length.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPath {
    pub cells: Vec<(usize, usize)>,
    pub length: f64,
}

/// Exact octile cost: `straight + diag * sqrt(2)` cell steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Cost {
    straight: u32,
    diag: u32,
}

impl Cost {
    #[inline]
    fn value(self) -> f64 {
        self.straight as f64 + self.diag as f64 * std::f64::consts::SQRT_2
    }

    #[inline]
    fn add_step(self, diagonal: bool) -> Cost {
        if diagonal {
            Cost {
                straight: self.straight,
                diag: self.diag + 1,
            }
        } else {
            Cost {
                straight: self.straight + 1,
                diag: self.diag,
            }
        }
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value()
            .partial_cmp(&other.value())
            .unwrap()
            .then(self.straight.cmp(&other.straight))
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Octile distance heuristic in exact step counts; admissible and
/// consistent for 8-connected moves.
#[inline]
fn octile(from: (usize, usize), to: (usize, usize)) -> Cost {
    let dx = from.0.abs_diff(to.0) as u32;
    let dy = from.1.abs_diff(to.1) as u32;
    Cost {
        straight: dx.max(dy) - dx.min(dy),
        diag: dx.min(dy),
    }
}

#[derive(PartialEq, Eq)]
struct QueueEntry {
    f: Cost,
    h: Cost,
    cell: usize,
}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert for smallest-f first.
        // Ties break on smaller h, then smaller cell index, keeping
        // expansion order deterministic.
        other
            .f
            .cmp(&self.f)
            .then_with(|| other.h.cmp(&self.h))
            .then_with(|| other.cell.cmp(&self.cell))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dilate occupied cells by a metric radius: a cell becomes occupied iff
/// some originally occupied cell center lies within `radius` of its center.
pub fn inflate(grid: &OccupancyGrid, radius: f64) -> OccupancyGrid {
    if radius <= 0.0 {
        return grid.clone();
    }
    let r_cells = (radius / grid.resolution).floor() as i64;
    let r2 = (radius / grid.resolution) * (radius / grid.resolution);
    let mut offsets = Vec::new();
    for dy in -r_cells..=r_cells {
        for dx in -r_cells..=r_cells {
            if (dx * dx + dy * dy) as f64 <= r2 {
                offsets.push((dx, dy));
            }
        }
    }
    let mut out = grid.clone();
    for iy in 0..grid.ny {
        for ix in 0..grid.nx {
            if grid.occupied(ix, iy) {
                for &(dx, dy) in &offsets {
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    if jx >= 0 && jy >= 0 && (jx as usize) < grid.nx && (jy as usize) < grid.ny {
                        out.set(jx as usize, jy as usize, true);
                    }
                }
            }
        }
    }
    out
}

const DIRS: [(i64, i64, bool); 8] = [
    (1, 0, false),
    (-1, 0, false),
    (0, 1, false),
    (0, -1, false),
    (1, 1, true),
    (1, -1, true),
    (-1, 1, true),
    (-1, -1, true),
];

/// 8-connected A* on the grid after inflating obstacles by `inflation`
/// meters. Diagonal moves are allowed only when both adjacent straight
/// moves are free, so the path never cuts an obstacle corner.
pub fn astar_path(
    grid: &OccupancyGrid,
    start: (usize, usize),
    goal: (usize, usize),
    inflation: f64,
) -> Result<GridPath, WorldError> {
    let inflated = inflate(grid, inflation);
    astar_on_inflated(&inflated, start, goal)
}

/// A* on an already-inflated grid; see [`astar_path`].
pub fn astar_on_inflated(
    grid: &OccupancyGrid,
    start: (usize, usize),
    goal: (usize, usize),
) -> Result<GridPath, WorldError> {
    let no_path = WorldError::NoPath {
        from: start,
        to: goal,
    };
    if grid.occupied(start.0, start.1) || grid.occupied(goal.0, goal.1) {
        return Err(no_path);
    }
    let nx = grid.nx;
    let index = |c: (usize, usize)| c.1 * nx + c.0;
    let cell_of = |i: usize| (i % nx, i / nx);

    let mut g = vec![Cost { straight: u32::MAX, diag: 0 }; nx * grid.ny];
    let mut parent = vec![usize::MAX; nx * grid.ny];
    let mut closed = vec![false; nx * grid.ny];
    let mut heap = BinaryHeap::new();

    g[index(start)] = Cost::default();
    heap.push(QueueEntry {
        f: octile(start, goal),
        h: octile(start, goal),
        cell: index(start),
    });

    while let Some(QueueEntry { cell, .. }) = heap.pop() {
        if closed[cell] {
            continue;
        }
        closed[cell] = true;
        let (cx, cy) = cell_of(cell);
        if (cx, cy) == goal {
            let mut cells = vec![(cx, cy)];
            let mut cur = cell;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                cells.push(cell_of(cur));
            }
            cells.reverse();
            return Ok(GridPath {
                length: g[cell].value() * grid.resolution,
                cells,
            });
        }
        for &(dx, dy, diagonal) in &DIRS {
            let jx = cx as i64 + dx;
            let jy = cy as i64 + dy;
            if jx < 0 || jy < 0 || jx as usize >= nx || jy as usize >= grid.ny {
                continue;
            }
            let (jx, jy) = (jx as usize, jy as usize);
            if grid.occupied(jx, jy) {
                continue;
            }
            if diagonal
                && (grid.occupied(jx, cy) || grid.occupied(cx, jy))
            {
                continue;
            }
            let j = index((jx, jy));
            if closed[j] {
                continue;
            }
            let cand = g[cell].add_step(diagonal);
            if g[j].straight == u32::MAX || cand < g[j] {
                g[j] = cand;
                parent[j] = cell;
                let h = octile((jx, jy), goal);
                heap.push(QueueEntry {
                    f: Cost {
                        straight: cand.straight + h.straight,
                        diag: cand.diag + h.diag,
                    },
                    h,
                    cell: j,
                });
            }
        }
    }
    Err(no_path)
}

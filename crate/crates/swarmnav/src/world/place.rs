//! Start/goal placement for the two task layouts.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Pose, WorldError, WorldMap};

/// Which task layout robots are placed for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Starts and goals sampled uniformly from free space.
    I,
    /// Robots lined up along one side of the map, goals straight across.
    II,
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskKind::I => write!(f, "I"),
            TaskKind::II => write!(f, "II"),
        }
    }
}

impl std::str::FromStr for TaskKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "I" | "i" | "1" => Ok(TaskKind::I),
            "II" | "ii" | "2" => Ok(TaskKind::II),
            other => Err(format!("unknown task kind '{other}' (expected I or II)")),
        }
    }
}

/// Starts and goals for a team of robots. Start headings point at the
/// corresponding goal.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub starts: Vec<Pose>,
    pub goals: Vec<(f64, f64)>,
    pub task_kind: TaskKind,
    pub n_robots: usize,
}

const RETRY_BUDGET: usize = 1000;

fn usable(world: &WorldMap, p: (f64, f64), clearance: f64, taken: &[(f64, f64)]) -> bool {
    let border = clearance.max(0.1);
    if p.0 < border || p.1 < border || p.0 > world.width - border || p.1 > world.height - border {
        return false;
    }
    if world.clearance(p.0, p.1) < clearance {
        return false;
    }
    taken
        .iter()
        .all(|q| (p.0 - q.0).hypot(p.1 - q.1) >= 2.0 * clearance)
}

/// Place `n` robots deterministically. `clearance` is the minimum distance
/// a start or goal keeps from obstacle surfaces (and half the minimum
/// robot-robot spacing).
///
/// Task I samples starts and goals uniformly from free space. Task II puts
/// starts on the near side (`y = 1`) at equal spacing and goals straight
/// across (`y = height - 1`), jittering each robot's shared x coordinate
/// when its lane is blocked.
pub fn place_robots(
    world: &WorldMap,
    n: usize,
    task_kind: TaskKind,
    seed: u64,
    clearance: f64,
) -> Result<TaskSpec, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut goals: Vec<(f64, f64)> = Vec::with_capacity(n);

    match task_kind {
        TaskKind::I => {
            for robot in 0..n {
                let mut place = |taken: &[(f64, f64)]| -> Result<(f64, f64), WorldError> {
                    for _ in 0..RETRY_BUDGET {
                        let p = (
                            rng.random_range(0.0..world.width),
                            rng.random_range(0.0..world.height),
                        );
                        if usable(world, p, clearance, taken) {
                            return Ok(p);
                        }
                    }
                    Err(WorldError::PlacementFailed {
                        robot,
                        attempts: RETRY_BUDGET,
                    })
                };
                let s = place(&starts)?;
                starts.push(s);
                let g = place(&goals)?;
                goals.push(g);
            }
        }
        TaskKind::II => {
            let start_y = 1.0;
            let goal_y = world.height - 1.0;
            let spacing = world.width / (n as f64 + 1.0);
            for robot in 0..n {
                let base_x = spacing * (robot as f64 + 1.0);
                let mut placed = false;
                for attempt in 0..RETRY_BUDGET {
                    // Jitter widens as attempts fail, so a blocked lane can
                    // still borrow room from its neighbors.
                    let amp = 0.4 + 0.6 * attempt as f64 / RETRY_BUDGET as f64;
                    let x = if attempt == 0 {
                        base_x
                    } else {
                        base_x + rng.random_range(-amp..amp) * spacing
                    };
                    let s = (x, start_y);
                    let g = (x, goal_y);
                    if usable(world, s, clearance, &starts) && usable(world, g, clearance, &goals) {
                        starts.push(s);
                        goals.push(g);
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    return Err(WorldError::PlacementFailed {
                        robot,
                        attempts: RETRY_BUDGET,
                    });
                }
            }
        }
    }

    let poses = starts
        .iter()
        .zip(&goals)
        .map(|(&(sx, sy), &(gx, gy))| Pose::new(sx, sy, (gy - sy).atan2(gx - sx)))
        .collect();
    Ok(TaskSpec {
        starts: poses,
        goals,
        task_kind,
        n_robots: n,
    })
}

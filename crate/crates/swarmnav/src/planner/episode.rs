//! Episode simulation: the global step loop, priority-based collision
//! avoidance, decision recording and trajectory logs.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::giwt::TurnDir;
use crate::sensing::{
    build_local_map, comm_graph, goal_bearing, grid_cell_id, scan, BodyDisc, GridCellId, LocalMap,
    SensingConfig,
};
use crate::world::{OccupancyGrid, Pose, TaskSpec, WorldMap};

use super::{
    step_mode, HeadingTable, Mode, PlannerConfig, SafetyEnvelope, StepInput, VelocityCmd,
};

/// Kinematic and planner state of one robot in an episode.
#[derive(Debug, Clone)]
pub struct RobotState {
    pub id: usize,
    pub pose: Pose,
    pub mode: Mode,
    pub goal: (f64, f64),
    /// Unique; the larger number moves first in conflicts.
    pub priority: u32,
    pub waiting: bool,
    /// Current linear speed (acceleration-limited integration state).
    pub v: f64,
    /// Last commanded velocities, used for the closing test.
    pub cmd: VelocityCmd,
}

/// What a robot (and its teammates) perceives at a key point. This is the
/// whole interface between the planner and any turn-direction policy.
pub struct DecisionContext<'a> {
    pub step: usize,
    pub robot: usize,
    pub pose: Pose,
    pub goal: (f64, f64),
    /// The deciding robot's goal-aligned local map, teammate bodies
    /// excluded (matching the training data distribution).
    pub center_map: LocalMap,
    /// Communicating teammates, ordered by robot id.
    pub neighbors: Vec<NeighborObs>,
    /// Global ground truth; only privileged policies may look at it.
    pub grid: &'a OccupancyGrid,
    pub world: &'a WorldMap,
}

/// One teammate's shared observation, already rotated into the deciding
/// robot's goal-aligned frame.
pub struct NeighborObs {
    pub robot: usize,
    pub map: LocalMap,
    pub r: f64,
    pub theta: f64,
    pub cell: GridCellId,
}

/// A turn-direction policy consulted at key points.
pub trait AdviceProvider {
    fn advise(&mut self, ctx: &DecisionContext<'_>) -> TurnDir;
}

/// Always turns the same way.
#[derive(Debug, Clone, Copy)]
pub struct FixedAdvice(pub TurnDir);

impl AdviceProvider for FixedAdvice {
    fn advise(&mut self, _ctx: &DecisionContext<'_>) -> TurnDir {
        self.0
    }
}

/// Seeded coin flips.
#[derive(Debug, Clone)]
pub struct RandomAdvice {
    rng: ChaCha8Rng,
}

impl RandomAdvice {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl AdviceProvider for RandomAdvice {
    fn advise(&mut self, _ctx: &DecisionContext<'_>) -> TurnDir {
        if self.rng.random::<bool>() {
            TurnDir::Left
        } else {
            TurnDir::Right
        }
    }
}

/// Which robots actively pursue their goals; the rest stand as obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveSet {
    All,
    Only(usize),
}

impl ActiveSet {
    fn contains(&self, robot: usize) -> bool {
        match *self {
            ActiveSet::All => true,
            ActiveSet::Only(r) => r == robot,
        }
    }
}

/// Episode knobs.
#[derive(Debug, Clone)]
pub struct EpisodeOptions {
    /// Simulated time budget, seconds.
    pub budget_s: f64,
    pub active: ActiveSet,
    pub record_trajectories: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self {
            budget_s: 300.0,
            active: ActiveSet::All,
            record_trajectories: false,
        }
    }
}

/// One trajectory log row.
#[derive(Debug, Clone)]
pub struct TrajRow {
    pub step: usize,
    pub t: f64,
    pub robot: usize,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub mode: &'static str,
    pub v: f64,
    pub omega: f64,
    pub waiting: bool,
}

/// One key-point decision.
#[derive(Debug, Clone)]
pub struct DecisionEvent {
    pub step: usize,
    pub robot: usize,
    pub pose: Pose,
    pub neighbor_ids: Vec<usize>,
    pub advice: TurnDir,
    pub chosen: TurnDir,
}

/// Per-robot episode outcome.
#[derive(Debug, Clone)]
pub struct RobotOutcome {
    pub robot: usize,
    pub reached: bool,
    pub path_length: f64,
    pub sim_steps: usize,
    pub follow_steps: usize,
    /// Smallest obstacle-surface clearance seen at any step.
    pub min_clearance: f64,
}

/// Everything an episode produced.
#[derive(Debug, Clone, Default)]
pub struct EpisodeLog {
    pub outcomes: Vec<RobotOutcome>,
    pub decisions: Vec<DecisionEvent>,
    pub trajectories: Vec<TrajRow>,
    pub steps: usize,
}

impl EpisodeLog {
    /// Outcome of the only active robot in a single-active episode.
    pub fn focal(&self, robot: usize) -> &RobotOutcome {
        self.outcomes.iter().find(|o| o.robot == robot).unwrap()
    }
}

/// Conflict distance for priority arbitration: two protective radii plus
/// one planning step of travel for each robot, plus a small buffer.
pub fn conflict_distance(cfg: &PlannerConfig) -> f64 {
    2.0 * (cfg.r_protect + cfg.v_max * cfg.dt) + 0.05
}

const CONFLICT_HYSTERESIS: f64 = 0.1;

/// Apply the pairwise priority rule to the team.
///
/// A robot starts waiting when a higher-priority robot is inside the
/// conflict distance and the pair is closing; it resumes once every
/// higher-priority robot is farther than the conflict distance plus a
/// hysteresis band. Robots in `Standby`/`Done` are plain obstacles and
/// take no part.
pub fn priority_avoidance(states: &mut [RobotState], cfg: &PlannerConfig) {
    let d_conflict = conflict_distance(cfg);
    let participating =
        |s: &RobotState| !matches!(s.mode, Mode::Standby | Mode::Done);
    let velocity = |s: &RobotState| {
        if s.waiting {
            (0.0, 0.0)
        } else {
            (s.cmd.v * s.pose.heading.cos(), s.cmd.v * s.pose.heading.sin())
        }
    };
    for i in 0..states.len() {
        if !participating(&states[i]) {
            states[i].waiting = false;
            continue;
        }
        let mut any_near = false;
        let mut entering = false;
        for j in 0..states.len() {
            if i == j || !participating(&states[j]) || states[j].priority <= states[i].priority {
                continue;
            }
            let dx = states[j].pose.x - states[i].pose.x;
            let dy = states[j].pose.y - states[i].pose.y;
            let dist = dx.hypot(dy);
            if dist <= d_conflict + CONFLICT_HYSTERESIS {
                any_near = true;
            }
            if dist < d_conflict {
                let (vix, viy) = velocity(&states[i]);
                let (vjx, vjy) = velocity(&states[j]);
                // Closing iff the separation is currently shrinking.
                let closing = dx * (vjx - vix) + dy * (vjy - viy) < 0.0;
                if closing {
                    entering = true;
                }
            }
        }
        if states[i].waiting {
            states[i].waiting = any_near;
        } else {
            states[i].waiting = entering;
        }
    }
}

/// Run one episode on a global step loop with unicycle kinematics.
///
/// Active robots sense, step their mode machine and move; inactive ones
/// stand as obstacles. Terminates when every active robot is `Done` or the
/// simulated budget runs out. Deterministic for fixed inputs.
pub fn run_episode(
    world: &WorldMap,
    grid: &OccupancyGrid,
    task: &TaskSpec,
    advice: &mut dyn AdviceProvider,
    planner: &PlannerConfig,
    sensing: &SensingConfig,
    options: &EpisodeOptions,
) -> EpisodeLog {
    let n = task.n_robots;
    let env = SafetyEnvelope::from_config(planner);
    let table = HeadingTable::new(&env, planner, sensing);
    let max_steps = (options.budget_s / planner.dt).ceil() as usize;

    let mut states: Vec<RobotState> = (0..n)
        .map(|i| RobotState {
            id: i,
            pose: task.starts[i],
            mode: Mode::Standby,
            goal: task.goals[i],
            priority: i as u32,
            waiting: false,
            v: 0.0,
            cmd: VelocityCmd::STOP,
        })
        .collect();
    let active: Vec<usize> = (0..n).filter(|&i| options.active.contains(i)).collect();

    let mut log = EpisodeLog {
        outcomes: active
            .iter()
            .map(|&i| RobotOutcome {
                robot: i,
                reached: false,
                path_length: 0.0,
                sim_steps: 0,
                follow_steps: 0,
                min_clearance: f64::INFINITY,
            })
            .collect(),
        ..Default::default()
    };

    let mut step = 0;
    while step < max_steps {
        if active.iter().all(|&i| states[i].mode == Mode::Done) {
            break;
        }
        // Mode updates and commands, in robot id order.
        for idx in 0..active.len() {
            let i = active[idx];
            if states[i].mode == Mode::Done {
                continue;
            }
            let bodies: Vec<BodyDisc> = states
                .iter()
                .filter(|s| s.id != i)
                .map(|s| BodyDisc {
                    x: s.pose.x,
                    y: s.pose.y,
                    radius: planner.r_protect,
                })
                .collect();
            let pose = states[i].pose;
            let goal = states[i].goal;
            let robot_scan = scan(grid, &pose, &bodies, sensing);
            let gb = goal_bearing(&pose, goal);
            let dist = (goal.0 - pose.x).hypot(goal.1 - pose.y);
            let input = StepInput {
                scan: &robot_scan,
                goal_bearing: gb,
                goal_distance: dist,
                table: &table,
                planner,
                sensing,
            };
            let mut decision: Option<TurnDir> = None;
            let (next_mode, cmd) = {
                let mut ask = || {
                    let ctx = decision_context(step, i, &states, grid, world, sensing);
                    let dir = advice.advise(&ctx);
                    decision = Some(dir);
                    dir
                };
                step_mode(states[i].mode, &input, &mut ask)
            };
            if let Some(dir) = decision {
                let neighbor_ids = comm_neighbor_ids(i, &states, sensing);
                log.decisions.push(DecisionEvent {
                    step,
                    robot: i,
                    pose,
                    neighbor_ids,
                    advice: dir,
                    chosen: dir,
                });
            }
            states[i].mode = next_mode;
            states[i].cmd = cmd;
        }

        priority_avoidance(&mut states, planner);

        // Integrate, in robot id order.
        for (slot, &i) in active.iter().enumerate() {
            let braking = states[i].v > 1e-12 && states[i].cmd.v == 0.0;
            let (v_target, omega) = if states[i].waiting {
                (0.0, 0.0)
            } else if braking {
                // Brake along a straight line so the safe-zone bound
                // applies exactly; rotate only once stopped.
                (0.0, 0.0)
            } else {
                (states[i].cmd.v, states[i].cmd.omega)
            };
            let dv = planner.a_max * planner.dt;
            let v = v_target.clamp(states[i].v - dv, states[i].v + dv).max(0.0);
            states[i].v = v;
            if states[i].mode != Mode::Done {
                let h = states[i].pose.heading;
                let x = states[i].pose.x + v * h.cos() * planner.dt;
                let y = states[i].pose.y + v * h.sin() * planner.dt;
                states[i].pose = Pose::new(x, y, h + omega * planner.dt);
                let out = &mut log.outcomes[slot];
                out.path_length += v * planner.dt;
                out.sim_steps += 1;
                if matches!(states[i].mode, Mode::Follow(_)) {
                    out.follow_steps += 1;
                }
                let clearance = world.clearance(x, y);
                if clearance < out.min_clearance {
                    out.min_clearance = clearance;
                }
            }
            if options.record_trajectories {
                log.trajectories.push(TrajRow {
                    step,
                    t: step as f64 * planner.dt,
                    robot: i,
                    x: states[i].pose.x,
                    y: states[i].pose.y,
                    heading: states[i].pose.heading,
                    mode: states[i].mode.letter(),
                    v,
                    omega,
                    waiting: states[i].waiting,
                });
            }
        }
        step += 1;
    }

    for (slot, &i) in active.iter().enumerate() {
        log.outcomes[slot].reached = states[i].mode == Mode::Done;
    }
    log.steps = step;
    log
}

fn comm_neighbor_ids(i: usize, states: &[RobotState], sensing: &SensingConfig) -> Vec<usize> {
    let pose = states[i].pose;
    states
        .iter()
        .filter(|s| {
            s.id != i && (s.pose.x - pose.x).hypot(s.pose.y - pose.y) < sensing.r_com
        })
        .map(|s| s.id)
        .collect()
}

/// Assemble the fusion input for a deciding robot: its own body-free map
/// plus every communicating teammate's map rotated into the decider's
/// goal-aligned frame.
fn decision_context<'a>(
    step: usize,
    robot: usize,
    states: &[RobotState],
    grid: &'a OccupancyGrid,
    world: &'a WorldMap,
    sensing: &SensingConfig,
) -> DecisionContext<'a> {
    let poses: Vec<Pose> = states.iter().map(|s| s.pose).collect();
    let goals: Vec<(f64, f64)> = states.iter().map(|s| s.goal).collect();
    let graph = comm_graph(&poses, &goals, sensing);
    let pose = poses[robot];
    let goal = goals[robot];
    let gb = goal_bearing(&pose, goal);
    // Policy-input maps exclude robot bodies, matching the expert data.
    let center_scan = scan(grid, &pose, &[], sensing);
    let center_map = build_local_map(&center_scan, gb, sensing);
    let goal_dir_world = (goal.1 - pose.y).atan2(goal.0 - pose.x);

    let mut neighbors = Vec::new();
    for edge in graph.neighbors_of(robot) {
        let j = edge.j;
        let jpose = poses[j];
        let jscan = scan(grid, &jpose, &[], sensing);
        // Align the teammate map with the decider's goal direction.
        let align = crate::world::wrap_angle(goal_dir_world - jpose.heading);
        neighbors.push(NeighborObs {
            robot: j,
            map: build_local_map(&jscan, align, sensing),
            r: edge.r,
            theta: edge.theta,
            cell: grid_cell_id(edge.r, edge.theta, sensing),
        });
    }
    neighbors.sort_by_key(|n| n.robot);

    DecisionContext {
        step,
        robot,
        pose,
        goal,
        center_map,
        neighbors,
        grid,
        world,
    }
}

//! The planner's mode machine.
//!
//! `Standby -> A` (align) `-> B` (advance). A blocked frontal cone in B is
//! a key point: the advice callback picks a side, the robot turns in place
//! (`C`/`D`) until a safe heading opens, then follows the obstacle boundary
//! (`E`/`F`) keeping it on the side opposite the turn. Once obstacle and
//! goal sit on opposite sides the robot re-aligns (`A`), and any mode ends
//! in `Done` when the goal is in sight within the arrival radius.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::giwt::TurnDir;
use crate::sensing::{LidarScan, SensingConfig};

use super::{HeadingTable, PlannerConfig};

/// Planner mode. Turning and following carry the side chosen at the key
/// point: `Turn(Left)`/`Follow(Left)` are the C/E pair, `Turn(Right)`/
/// `Follow(Right)` the D/F pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Standby,
    Align,
    Advance,
    Turn(TurnDir),
    Follow(TurnDir),
    Done,
}

impl Mode {
    /// Single-letter label used in logs: the A-F scheme.
    pub fn letter(&self) -> &'static str {
        match self {
            Mode::Standby => "S",
            Mode::Align => "A",
            Mode::Advance => "B",
            Mode::Turn(TurnDir::Left) => "C",
            Mode::Turn(TurnDir::Right) => "D",
            Mode::Follow(TurnDir::Left) => "E",
            Mode::Follow(TurnDir::Right) => "F",
            Mode::Done => "G",
        }
    }
}

/// One control command: forward speed and angular velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCmd {
    pub v: f64,
    pub omega: f64,
}

impl VelocityCmd {
    pub const STOP: VelocityCmd = VelocityCmd { v: 0.0, omega: 0.0 };
}

/// Everything `step_mode` needs about the robot's current situation.
pub struct StepInput<'a> {
    pub scan: &'a LidarScan,
    /// Goal bearing in the robot frame.
    pub goal_bearing: f64,
    /// Euclidean distance to the goal.
    pub goal_distance: f64,
    pub table: &'a HeadingTable,
    pub planner: &'a PlannerConfig,
    pub sensing: &'a SensingConfig,
}

const OPPOSITE_SIDE_DEADBAND: f64 = 0.05;
/// Halfwidth of the side sector used to estimate wall distance.
const WALL_SECTOR: f64 = 0.7;
/// Gain mapping wall-distance error to steering, in units of `k` per meter.
const WALL_GAIN: f64 = 2.5;

fn sign(dir: TurnDir) -> f64 {
    match dir {
        TurnDir::Left => 1.0,
        TurnDir::Right => -1.0,
    }
}

fn turn_in_place(dir: TurnDir, cfg: &PlannerConfig) -> VelocityCmd {
    VelocityCmd {
        v: 0.0,
        omega: sign(dir) * cfg.k * FRAC_PI_4,
    }
}

/// Advance the mode machine by one tick and produce the command to
/// execute. At most one transition fires per tick; the command comes from
/// the mode being entered. `advice` is consulted exactly at key points.
pub fn step_mode(
    mode: Mode,
    input: &StepInput<'_>,
    advice: &mut dyn FnMut() -> TurnDir,
) -> (Mode, VelocityCmd) {
    let cfg = input.planner;
    let gb = input.goal_bearing;

    // Arrival wins over everything: goal in sight inside the arrival
    // radius.
    if mode != Mode::Done && input.goal_distance < cfg.r_goal {
        let beam = input.sensing.beam_index(gb);
        if input.scan.ranges[beam] >= input.goal_distance {
            return (Mode::Done, VelocityCmd::STOP);
        }
    }

    match mode {
        Mode::Done => (Mode::Done, VelocityCmd::STOP),
        Mode::Standby => (Mode::Align, align_cmd(gb, cfg)),
        Mode::Align => {
            if gb.abs() < cfg.theta_0 {
                // Enter B; if the cone is already blocked, hold one tick so
                // the key point is handled *in* B (one transition per tick).
                let cmd = match input.table.best_heading(input.scan, gb) {
                    Some((theta, _)) => steer_cmd(theta, input),
                    None => VelocityCmd::STOP,
                };
                (Mode::Advance, cmd)
            } else {
                (Mode::Align, align_cmd(gb, cfg))
            }
        }
        Mode::Advance => advance(input, advice),
        Mode::Turn(dir) => {
            if input.table.best_heading(input.scan, 0.0).is_some() {
                (Mode::Follow(dir), follow_cmd(dir, input))
            } else {
                (Mode::Turn(dir), turn_in_place(dir, cfg))
            }
        }
        Mode::Follow(dir) => {
            // Obstacle (on the side opposite the turn) and goal on opposite
            // sides: the obstacle is bypassed, re-align toward the goal.
            if sign(dir) * gb > OPPOSITE_SIDE_DEADBAND {
                (Mode::Align, align_cmd(gb, cfg))
            } else {
                (Mode::Follow(dir), follow_cmd(dir, input))
            }
        }
    }
}

fn align_cmd(gb: f64, cfg: &PlannerConfig) -> VelocityCmd {
    VelocityCmd {
        v: 0.0,
        omega: cfg.k * gb,
    }
}

/// Mode B: move toward the goal along the safe heading nearest the goal
/// bearing; a fully blocked cone is a key point and hands control to the
/// advice callback.
fn advance(input: &StepInput<'_>, advice: &mut dyn FnMut() -> TurnDir) -> (Mode, VelocityCmd) {
    let cfg = input.planner;
    let gb = input.goal_bearing;
    if gb.abs() >= FRAC_PI_2 {
        // Goal drifted behind the frontal cone; re-align in place.
        return (Mode::Align, align_cmd(gb, cfg));
    }
    match input.table.best_heading(input.scan, gb) {
        Some((theta, _)) => (Mode::Advance, steer_cmd(theta, input)),
        None => {
            let dir = advice();
            (Mode::Turn(dir), turn_in_place(dir, cfg))
        }
    }
}

/// Steer toward a chosen safe heading. The robot advances along its
/// *current* heading while rotating, so the speed bound must come from the
/// current motion direction, not from the heading being steered toward.
fn steer_cmd(theta: f64, input: &StepInput<'_>) -> VelocityCmd {
    let v = input
        .table
        .velocity(input.scan, input.sensing.beam_index(0.0));
    VelocityCmd {
        v,
        omega: input.planner.k * theta,
    }
}

/// Modes E/F: proportional control keeps the side-beam distance near
/// `r_safe + 0.1`; the frontal safe zone bounds speed, and a blocked front
/// degenerates to turning away from the wall (inside corners).
fn follow_cmd(dir: TurnDir, input: &StepInput<'_>) -> VelocityCmd {
    let cfg = input.planner;
    let wall_bearing = -sign(dir) * FRAC_PI_2;
    let front = input
        .table
        .velocity(input.scan, input.sensing.beam_index(0.0));
    if front <= 0.0 {
        return turn_in_place(dir, cfg);
    }
    let d_side = input.table.side_distance(input.scan, wall_bearing, WALL_SECTOR);
    let target = super::SafetyEnvelope::from_config(cfg).r_safe + 0.1;
    let error = d_side - target;
    let omega_max = cfg.k * FRAC_PI_2;
    let omega = (-sign(dir) * WALL_GAIN * cfg.k * error).clamp(-omega_max, omega_max);
    VelocityCmd { v: front, omega }
}

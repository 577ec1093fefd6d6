//! The fundamental reactive planner.
//!
//! A robot steers toward its goal at the highest speed that keeps a
//! protective *safe zone* clear, switching into boundary-following when the
//! frontal cone is blocked. The geometry here answers two questions every
//! control tick: how much clearance direction `theta` needs
//! ([`safe_boundary`]), and how fast the robot may advance toward a
//! candidate heading given the current scan ([`safe_velocity`]).

mod episode;
mod modes;

pub use episode::{
    priority_avoidance, run_episode, ActiveSet, AdviceProvider, DecisionContext, DecisionEvent,
    EpisodeLog, EpisodeOptions, FixedAdvice, NeighborObs, RandomAdvice, RobotOutcome, RobotState,
    TrajRow,
};
pub use modes::{step_mode, Mode, StepInput, VelocityCmd};

use std::f64::consts::FRAC_PI_2;

use crate::sensing::{LidarScan, SensingConfig};
use crate::world::wrap_angle;

/// Planner tunables. All angles in radians, distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    /// Maximum linear velocity, m/s.
    pub v_max: f64,
    /// Maximum linear acceleration, m/s^2.
    pub a_max: f64,
    /// Control period, s.
    pub dt: f64,
    /// Protective radius: obstacles never come closer than this.
    pub r_protect: f64,
    /// Heading error below which the robot stops aligning and starts moving.
    pub theta_0: f64,
    /// Margin keeping the safe heading cone inside (-pi/2, pi/2).
    pub theta_1: f64,
    /// Proportional gain mapping angle errors to angular velocity, 1/s.
    pub k: f64,
    /// Arrival radius around the goal.
    pub r_goal: f64,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            v_max: 0.5,
            a_max: 1.0,
            dt: 0.1,
            r_protect: 0.2,
            theta_0: 0.1,
            theta_1: 0.15,
            k: 1.0,
            r_goal: 0.3,
        }
    }
}

/// The sector-shaped clearance region swept while moving one control period
/// forward: radius `r_protect + v_max * dt`, central angle
/// `2 * atan(r_protect / (v_max * dt))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafetyEnvelope {
    pub r_safe: f64,
    pub theta_sec: f64,
}

impl SafetyEnvelope {
    pub fn from_config(cfg: &PlannerConfig) -> Self {
        let advance = cfg.v_max * cfg.dt;
        Self {
            r_safe: cfg.r_protect + advance,
            theta_sec: 2.0 * (cfg.r_protect / advance).atan(),
        }
    }
}

/// Required clearance in direction `theta` relative to the motion
/// direction: the full safe radius inside the sector, falling off as
/// `1 / sin|theta|` outside it.
pub fn safe_boundary(theta: f64, env: &SafetyEnvelope) -> f64 {
    let half = 0.5 * env.theta_sec;
    let theta = wrap_angle(theta).abs();
    if theta < half {
        env.r_safe
    } else {
        env.r_safe * half.sin() / theta.sin()
    }
}

/// Highest speed at which the robot may advance toward robot-frame heading
/// `theta`, limited by every beam within a quarter turn of the motion
/// direction: the beam distance minus its required clearance bounds the
/// braking distance `v^2 / (2 a_max)`.
///
/// Returns 0 as soon as any constraining beam has no headroom.
pub fn safe_velocity(
    scan: &LidarScan,
    theta: f64,
    env: &SafetyEnvelope,
    planner: &PlannerConfig,
    sensing: &SensingConfig,
) -> f64 {
    let mut v = planner.v_max;
    for (k, &d) in scan.ranges.iter().enumerate() {
        let offset = wrap_angle(sensing.beam_angle(k) - theta);
        if offset.abs() >= FRAC_PI_2 {
            continue;
        }
        let headroom = (d - safe_boundary(offset, env)).max(0.0);
        let bound = (2.0 * planner.a_max * headroom).sqrt() / offset.cos();
        v = v.min(bound);
        if v <= 0.0 {
            return 0.0;
        }
    }
    v.max(0.0)
}

/// True iff no heading within the frontal cone `|theta| < pi/2 - theta_1`
/// admits a positive safe velocity: the robot stands at a turning key
/// point.
pub fn key_point(
    scan: &LidarScan,
    env: &SafetyEnvelope,
    planner: &PlannerConfig,
    sensing: &SensingConfig,
) -> bool {
    HeadingTable::new(env, planner, sensing)
        .best_heading(scan, 0.0)
        .is_none()
}

/// Per-beam-offset precomputation for the hot loop: clearance and inverse
/// cosine tables indexed by wrapped beam index difference, plus the set of
/// candidate heading beams inside the frontal cone.
pub struct HeadingTable {
    /// `Some((l, 1/cos))` for offsets within a quarter turn, else `None`.
    offsets: Vec<Option<(f64, f64)>>,
    /// Beam indices with `|angle| < pi/2 - theta_1`, ascending by angle.
    candidates: Vec<usize>,
    angles: Vec<f64>,
    two_a: f64,
    v_max: f64,
}

impl HeadingTable {
    pub fn new(env: &SafetyEnvelope, planner: &PlannerConfig, sensing: &SensingConfig) -> Self {
        let n = sensing.n_beams;
        let mut offsets = Vec::with_capacity(n);
        let mut angles = Vec::with_capacity(n);
        for d in 0..n {
            // Offset angle for (beam - heading) index difference d.
            let a = wrap_angle(2.0 * std::f64::consts::PI * d as f64 / n as f64);
            offsets.push((a.abs() < FRAC_PI_2).then(|| (safe_boundary(a, env), 1.0 / a.cos())));
        }
        let cone = FRAC_PI_2 - planner.theta_1;
        let mut candidates = Vec::new();
        for k in 0..n {
            let a = sensing.beam_angle(k);
            angles.push(a);
            if a.abs() < cone {
                candidates.push(k);
            }
        }
        Self {
            offsets,
            candidates,
            angles,
            two_a: 2.0 * planner.a_max,
            v_max: planner.v_max,
        }
    }

    /// Beam angle in the robot frame.
    #[inline]
    pub fn angle(&self, beam: usize) -> f64 {
        self.angles[beam]
    }

    /// Safe velocity toward the heading of beam `j`; exact table-driven
    /// equivalent of [`safe_velocity`] for beam-aligned headings.
    pub fn velocity(&self, scan: &LidarScan, j: usize) -> f64 {
        let n = self.offsets.len();
        let mut v2 = self.v_max * self.v_max;
        for (k, &d) in scan.ranges.iter().enumerate() {
            let idx = (k + n - j) % n;
            if let Some((l, inv_cos)) = self.offsets[idx] {
                let headroom = (d - l).max(0.0);
                let bound = self.two_a * headroom * inv_cos * inv_cos;
                if bound < v2 {
                    v2 = bound;
                    if v2 <= 0.0 {
                        return 0.0;
                    }
                }
            }
        }
        v2.sqrt()
    }

    /// The safe candidate heading closest to `target` (a robot-frame
    /// angle), with its velocity; `None` at a key point.
    pub fn best_heading(&self, scan: &LidarScan, target: f64) -> Option<(f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for &j in &self.candidates {
            let v = self.velocity(scan, j);
            if v <= 0.0 {
                continue;
            }
            let angle = self.angles[j];
            let gap = wrap_angle(angle - target).abs();
            match best {
                Some((g, _, _)) if g <= gap => {}
                _ => best = Some((gap, angle, v)),
            }
        }
        best.map(|(_, angle, v)| (angle, v))
    }

    /// Smallest range over beams within `halfwidth` of robot-frame
    /// `bearing`; `max_range` when every such beam is open.
    pub fn side_distance(&self, scan: &LidarScan, bearing: f64, halfwidth: f64) -> f64 {
        let mut d = scan.max_range;
        for (k, &r) in scan.ranges.iter().enumerate() {
            if wrap_angle(self.angles[k] - bearing).abs() <= halfwidth {
                d = d.min(r);
            }
        }
        d
    }
}

#[cfg(test)]
mod tests;

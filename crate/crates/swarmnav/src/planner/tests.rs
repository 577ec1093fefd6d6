use super::*;
use crate::giwt::TurnDir;
use crate::sensing::{LidarScan, SensingConfig};
use crate::world::{place_robots, rasterize, Obstacle, Pose, TaskKind, WorldMap};

/// Envelope with r_protect = 0.3, v_max * dt = 0.2: r_safe = 0.5,
/// theta_sec = 2 atan(1.5).
fn wide_config() -> PlannerConfig {
    PlannerConfig {
        v_max: 0.5,
        a_max: 1.0,
        dt: 0.4,
        r_protect: 0.3,
        ..PlannerConfig::default()
    }
}

fn scan_from(cfg: &SensingConfig, f: impl Fn(f64) -> f64) -> LidarScan {
    LidarScan {
        ranges: (0..cfg.n_beams)
            .map(|k| f(cfg.beam_angle(k)).min(cfg.r_fov))
            .collect(),
        max_range: cfg.r_fov,
    }
}

#[test]
fn envelope_from_config() {
    let env = SafetyEnvelope::from_config(&wide_config());
    assert!((env.r_safe - 0.5).abs() < 1e-12);
    assert!((env.theta_sec - 2.0 * 1.5f64.atan()).abs() < 1e-12);
}

#[test]
fn safe_boundary_hand_values() {
    let env = SafetyEnvelope::from_config(&wide_config());
    assert_eq!(safe_boundary(0.0, &env), 0.5);
    // l(pi/2) = r_safe * sin(theta_sec / 2) = 0.5 * 1.5 / sqrt(3.25).
    let expected = 0.5 * 1.5 / 3.25f64.sqrt();
    assert!((safe_boundary(std::f64::consts::FRAC_PI_2, &env) - expected).abs() < 1e-9);
    assert!((expected - 0.4160251).abs() < 1e-6);
}

#[test]
fn safe_boundary_branch_continuity_exact() {
    let env = SafetyEnvelope::from_config(&wide_config());
    let half = env.theta_sec / 2.0;
    // At the branch point sin(half)/sin(half) == 1 exactly.
    assert_eq!(safe_boundary(half, &env), env.r_safe);
    assert_eq!(safe_boundary(half - 1e-9, &env), env.r_safe);
    assert_eq!(safe_boundary(-half, &env), env.r_safe);
}

#[test]
fn safe_velocity_open_space_clamps_to_v_max() {
    let sensing = SensingConfig::default();
    let planner = wide_config();
    let env = SafetyEnvelope::from_config(&planner);
    let scan = LidarScan::open(&sensing);
    let v = safe_velocity(&scan, 0.0, &env, &planner, &sensing);
    assert_eq!(v, 0.5);

    // Unclamped: same envelope (v_max * dt kept at 0.2), higher speed cap.
    // The binding beam is the central one: sqrt(2 * 1 * (2.5 - 0.5)) = 2.
    let fast = PlannerConfig {
        v_max: 10.0,
        dt: 0.02,
        ..planner.clone()
    };
    let env = SafetyEnvelope::from_config(&fast);
    let v = safe_velocity(&scan, 0.0, &env, &fast, &sensing);
    assert!((v - 2.0).abs() < 1e-6, "v = {v}");
}

#[test]
fn safe_velocity_zero_headroom_is_zero() {
    let sensing = SensingConfig::default();
    let planner = wide_config();
    let env = SafetyEnvelope::from_config(&planner);
    // The central beam sits exactly on the safe boundary.
    let scan = scan_from(&sensing, |a| if a.abs() < 0.01 { 0.5 } else { 2.5 });
    assert_eq!(safe_velocity(&scan, 0.0, &env, &planner, &sensing), 0.0);
}

#[test]
fn safe_velocity_ignores_rear_obstacles() {
    let sensing = SensingConfig::default();
    let planner = wide_config();
    let env = SafetyEnvelope::from_config(&planner);
    let scan = scan_from(&sensing, |a| {
        if a.abs() >= std::f64::consts::FRAC_PI_2 {
            0.1
        } else {
            2.5
        }
    });
    assert_eq!(safe_velocity(&scan, 0.0, &env, &planner, &sensing), 0.5);
}

#[test]
fn heading_table_matches_direct_computation() {
    let sensing = SensingConfig::default();
    let planner = PlannerConfig::default();
    let env = SafetyEnvelope::from_config(&planner);
    let table = HeadingTable::new(&env, &planner, &sensing);
    let scan = scan_from(&sensing, |a| 0.8 + 1.2 * (3.0 * a).sin().abs());
    for j in (0..sensing.n_beams).step_by(17) {
        let direct = safe_velocity(&scan, sensing.beam_angle(j), &env, &planner, &sensing);
        let tabled = table.velocity(&scan, j);
        assert!((direct - tabled).abs() < 1e-9, "beam {j}: {direct} vs {tabled}");
    }
}

/// Narrow envelope for key-point scenes: r_protect = 0.1, advance 0.2,
/// r_safe = 0.3, theta_sec = 2 atan(0.5) (half 0.46 rad).
fn narrow_config() -> PlannerConfig {
    PlannerConfig {
        v_max: 0.5,
        a_max: 1.0,
        dt: 0.4,
        r_protect: 0.1,
        ..PlannerConfig::default()
    }
}

#[test]
fn key_point_open_scan_is_false() {
    let sensing = SensingConfig::default();
    let planner = PlannerConfig::default();
    let env = SafetyEnvelope::from_config(&planner);
    assert!(!key_point(&LidarScan::open(&sensing), &env, &planner, &sensing));
}

#[test]
fn key_point_full_frontal_wall_is_true() {
    let sensing = SensingConfig::default();
    let planner = wide_config();
    let env = SafetyEnvelope::from_config(&planner);
    // Wall at 0.3 m across the whole frontal half-plane: every candidate
    // heading sees some wall beam inside its safe boundary.
    let scan = scan_from(&sensing, |a| {
        if a.abs() < std::f64::consts::FRAC_PI_2 + 0.3 {
            0.3
        } else {
            2.5
        }
    });
    assert!(key_point(&scan, &env, &planner, &sensing));
}

#[test]
fn key_point_false_with_side_gap() {
    let sensing = SensingConfig::default();
    let planner = narrow_config();
    let env = SafetyEnvelope::from_config(&planner);
    // Post dead ahead at 0.2 m; the cone around +1.0 rad stays open and
    // its clearance requirement (~0.18) is below the post distance.
    let scan = scan_from(&sensing, |a| if a.abs() <= 0.15 { 0.2 } else { 2.5 });
    assert!(!key_point(&scan, &env, &planner, &sensing));
    // Same post hard against the body blocks everything.
    let scan = scan_from(&sensing, |a| if a.abs() <= 0.15 { 0.05 } else { 2.5 });
    assert!(
        safe_velocity(&scan, 0.0, &env, &planner, &sensing) == 0.0
            && key_point(&scan, &env, &planner, &sensing)
    );
}

fn step_input<'a>(
    scan: &'a LidarScan,
    gb: f64,
    dist: f64,
    table: &'a HeadingTable,
    planner: &'a PlannerConfig,
    sensing: &'a SensingConfig,
) -> StepInput<'a> {
    StepInput {
        scan,
        goal_bearing: gb,
        goal_distance: dist,
        table,
        planner,
        sensing,
    }
}

#[test]
fn mode_align_outputs_proportional_turn() {
    let sensing = SensingConfig::default();
    let planner = PlannerConfig::default();
    let env = SafetyEnvelope::from_config(&planner);
    let table = HeadingTable::new(&env, &planner, &sensing);
    let scan = LidarScan::open(&sensing);
    let input = step_input(&scan, 0.3, 5.0, &table, &planner, &sensing);
    let (mode, cmd) = step_mode(Mode::Align, &input, &mut || panic!("no key point here"));
    assert_eq!(mode, Mode::Align);
    assert_eq!(cmd.v, 0.0);
    assert!((cmd.omega - 0.3).abs() < 1e-12);
}

#[test]
fn mode_advance_blocked_consults_advice() {
    let sensing = SensingConfig::default();
    let planner = wide_config();
    let env = SafetyEnvelope::from_config(&planner);
    let table = HeadingTable::new(&env, &planner, &sensing);
    let scan = scan_from(&sensing, |a| if a.abs() < 2.0 { 0.2 } else { 2.5 });
    let input = step_input(&scan, 0.0, 5.0, &table, &planner, &sensing);
    let mut asked = false;
    let (mode, cmd) = step_mode(Mode::Advance, &input, &mut || {
        asked = true;
        TurnDir::Left
    });
    assert!(asked);
    assert_eq!(mode, Mode::Turn(TurnDir::Left));
    assert_eq!(cmd.v, 0.0);
    assert!(cmd.omega > 0.0);
}

#[test]
fn mode_follow_exits_when_goal_swings_opposite() {
    let sensing = SensingConfig::default();
    let planner = PlannerConfig::default();
    let env = SafetyEnvelope::from_config(&planner);
    let table = HeadingTable::new(&env, &planner, &sensing);
    let scan = LidarScan::open(&sensing);
    // Following with the wall on the left (turned right); goal drifts to
    // the right side: bypass complete.
    let input = step_input(&scan, -0.4, 5.0, &table, &planner, &sensing);
    let (mode, _) = step_mode(Mode::Follow(TurnDir::Right), &input, &mut || unreachable!());
    assert_eq!(mode, Mode::Align);
    // Goal still on the wall side: keep following.
    let input = step_input(&scan, 0.4, 5.0, &table, &planner, &sensing);
    let (mode, _) = step_mode(Mode::Follow(TurnDir::Right), &input, &mut || unreachable!());
    assert_eq!(mode, Mode::Follow(TurnDir::Right));
}

#[test]
fn mode_done_when_goal_in_sight_and_close() {
    let sensing = SensingConfig::default();
    let planner = PlannerConfig::default();
    let env = SafetyEnvelope::from_config(&planner);
    let table = HeadingTable::new(&env, &planner, &sensing);
    let scan = LidarScan::open(&sensing);
    let input = step_input(&scan, 0.1, 0.25, &table, &planner, &sensing);
    for mode in [Mode::Align, Mode::Advance, Mode::Follow(TurnDir::Left)] {
        let (next, cmd) = step_mode(mode, &input, &mut || unreachable!());
        assert_eq!(next, Mode::Done);
        assert_eq!(cmd, VelocityCmd::STOP);
    }
}

fn conflict_state(id: usize, x: f64, heading: f64, v: f64) -> RobotState {
    RobotState {
        id,
        pose: Pose::new(x, 0.0, heading),
        mode: Mode::Advance,
        goal: (10.0, 0.0),
        priority: id as u32,
        waiting: false,
        v,
        cmd: VelocityCmd { v, omega: 0.0 },
    }
}

#[test]
fn priority_lower_waits_when_closing() {
    let planner = PlannerConfig::default();
    // Facing each other 0.5 m apart, both moving: inside the conflict
    // distance (0.55) and closing.
    let mut states = vec![
        conflict_state(0, 0.0, 0.0, 0.3),
        conflict_state(1, 0.5, std::f64::consts::PI, 0.3),
    ];
    priority_avoidance(&mut states, &planner);
    assert!(states[0].waiting, "lower priority waits");
    assert!(!states[1].waiting, "higher priority proceeds");
}

#[test]
fn priority_far_apart_nobody_waits() {
    let planner = PlannerConfig::default();
    let mut states = vec![
        conflict_state(0, 0.0, 0.0, 0.3),
        conflict_state(1, 5.0, std::f64::consts::PI, 0.3),
    ];
    priority_avoidance(&mut states, &planner);
    assert!(!states[0].waiting && !states[1].waiting);
}

#[test]
fn priority_three_way_only_highest_moves() {
    let planner = PlannerConfig::default();
    let mut states = vec![
        conflict_state(0, 0.0, 0.0, 0.3),
        conflict_state(1, 0.4, std::f64::consts::PI, 0.3),
        conflict_state(2, 0.2, std::f64::consts::FRAC_PI_2, 0.3),
    ];
    // Nudge robot 2 off the line so every pair is within conflict range.
    states[2].pose = Pose::new(0.2, 0.3, -std::f64::consts::FRAC_PI_2);
    priority_avoidance(&mut states, &planner);
    assert!(states[0].waiting);
    assert!(states[1].waiting);
    assert!(!states[2].waiting);
}

#[test]
fn priority_waiting_releases_with_hysteresis() {
    let planner = PlannerConfig::default();
    let mut states = vec![
        conflict_state(0, 0.0, 0.0, 0.3),
        conflict_state(1, 0.5, std::f64::consts::PI, 0.3),
    ];
    priority_avoidance(&mut states, &planner);
    assert!(states[0].waiting);
    // Separation grows but stays inside the hysteresis band: keep waiting.
    states[1].pose = Pose::new(0.6, 0.0, 0.0);
    priority_avoidance(&mut states, &planner);
    assert!(states[0].waiting);
    // Beyond the band: released.
    states[1].pose = Pose::new(0.8, 0.0, 0.0);
    priority_avoidance(&mut states, &planner);
    assert!(!states[0].waiting);
}

fn single_robot_task(start: Pose, goal: (f64, f64)) -> crate::world::TaskSpec {
    crate::world::TaskSpec {
        starts: vec![start],
        goals: vec![goal],
        task_kind: TaskKind::I,
        n_robots: 1,
    }
}

#[test]
fn episode_straight_run_reaches_goal() {
    let world = WorldMap::empty(20.0, 20.0);
    let grid = rasterize(&world, 0.05);
    let planner = PlannerConfig::default();
    let sensing = SensingConfig::default();
    let task = single_robot_task(Pose::new(5.0, 10.0, 0.0), (10.0, 10.0));
    let mut advice = FixedAdvice(TurnDir::Left);
    let log = run_episode(
        &world,
        &grid,
        &task,
        &mut advice,
        &planner,
        &sensing,
        &EpisodeOptions::default(),
    );
    let outcome = log.focal(0);
    assert!(outcome.reached);
    // Straight-line run: total travel is the 5 m separation less the
    // arrival radius, within a 2% band of the nominal distance.
    assert!(
        (4.6..=5.1).contains(&outcome.path_length),
        "path = {}",
        outcome.path_length
    );
    assert!(log.decisions.is_empty());
}

#[test]
fn episode_walled_goal_times_out() {
    let mut world = WorldMap::empty(20.0, 20.0);
    for (cx, cy, w, h) in [
        (12.0, 8.0, 4.0, 0.4),
        (12.0, 12.0, 4.0, 0.4),
        (10.0, 10.0, 0.4, 4.0),
        (14.0, 10.0, 0.4, 4.0),
    ] {
        world.obstacles.push(Obstacle::Rect {
            cx,
            cy,
            width: w,
            height: h,
            yaw: 0.0,
        });
    }
    let grid = rasterize(&world, 0.05);
    let task = single_robot_task(Pose::new(5.0, 10.0, 0.0), (12.0, 10.0));
    let mut advice = FixedAdvice(TurnDir::Right);
    let log = run_episode(
        &world,
        &grid,
        &task,
        &mut advice,
        &PlannerConfig::default(),
        &SensingConfig::default(),
        &EpisodeOptions {
            budget_s: 60.0,
            ..Default::default()
        },
    );
    assert!(!log.focal(0).reached);
}

#[test]
fn episode_single_wall_circumvented_without_collision() {
    let mut world = WorldMap::empty(20.0, 20.0);
    world.obstacles.push(Obstacle::Rect {
        cx: 10.0,
        cy: 10.0,
        width: 0.5,
        height: 4.0,
        yaw: 0.0,
    });
    let grid = rasterize(&world, 0.05);
    let planner = PlannerConfig::default();
    let task = single_robot_task(Pose::new(7.0, 10.0, 0.0), (13.0, 10.0));
    let mut advice = FixedAdvice(TurnDir::Right);
    let log = run_episode(
        &world,
        &grid,
        &task,
        &mut advice,
        &planner,
        &SensingConfig::default(),
        &EpisodeOptions {
            record_trajectories: true,
            ..Default::default()
        },
    );
    let outcome = log.focal(0);
    assert!(outcome.reached, "robot should get around a single wall");
    assert!(!log.decisions.is_empty(), "the wall forces a key point");
    assert!(
        outcome.min_clearance >= planner.r_protect - grid.resolution,
        "clearance dropped to {}",
        outcome.min_clearance
    );
    // Turned right: the detour dips below the wall centerline.
    assert!(log.trajectories.iter().any(|r| r.y < 8.2));
}

#[test]
fn episode_mode_sequence_follows_legal_edges() {
    let world = crate::world::generate_map(31, crate::world::MapKind::C, &Default::default());
    let grid = rasterize(&world, 0.05);
    let task = place_robots(&world, 1, TaskKind::I, 77, 0.3).unwrap();
    let mut advice = FixedAdvice(TurnDir::Left);
    let log = run_episode(
        &world,
        &grid,
        &task,
        &mut advice,
        &PlannerConfig::default(),
        &SensingConfig::default(),
        &EpisodeOptions {
            record_trajectories: true,
            ..Default::default()
        },
    );
    let legal: &[(&str, &str)] = &[
        ("S", "A"),
        ("A", "B"),
        ("B", "A"),
        ("B", "C"),
        ("B", "D"),
        ("C", "E"),
        ("D", "F"),
        ("E", "A"),
        ("F", "A"),
        ("A", "G"),
        ("B", "G"),
        ("C", "G"),
        ("D", "G"),
        ("E", "G"),
        ("F", "G"),
        ("S", "G"),
    ];
    let rows: Vec<&TrajRow> = log.trajectories.iter().filter(|r| r.robot == 0).collect();
    for pair in rows.windows(2) {
        let (a, b) = (pair[0].mode, pair[1].mode);
        assert!(
            a == b || legal.contains(&(a, b)),
            "illegal mode transition {a} -> {b} at step {}",
            pair[1].step
        );
    }
}

#[test]
fn episode_is_deterministic() {
    let world = crate::world::generate_map(8, crate::world::MapKind::A, &Default::default());
    let grid = rasterize(&world, 0.05);
    let task = place_robots(&world, 3, TaskKind::I, 5, 0.3).unwrap();
    let run = || {
        let mut advice = RandomAdvice::new(99);
        run_episode(
            &world,
            &grid,
            &task,
            &mut advice,
            &PlannerConfig::default(),
            &SensingConfig::default(),
            &EpisodeOptions {
                budget_s: 40.0,
                record_trajectories: true,
                ..Default::default()
            },
        )
    };
    let a = run();
    let b = run();
    assert_eq!(a.steps, b.steps);
    assert_eq!(a.trajectories.len(), b.trajectories.len());
    for (ra, rb) in a.trajectories.iter().zip(&b.trajectories) {
        assert_eq!((ra.x, ra.y, ra.heading, ra.v), (rb.x, rb.y, rb.heading, rb.v));
    }
    assert_eq!(a.decisions.len(), b.decisions.len());
}

// Scratch probe: find where clearance violations happen.
use swarmnav::giwt::TurnDir;
use swarmnav::planner::*;
use swarmnav::sensing::SensingConfig;
use swarmnav::world::*;

fn main() {
    let planner = PlannerConfig::default();
    let sensing = SensingConfig::default();
    let kinds = [MapKind::A, MapKind::B, MapKind::C];
    let mut seed = 0u64;
    let mut total = 0;
    while total < 30 {
        seed += 1;
        let kind = kinds[(seed % 3) as usize];
        let world = generate_map(seed, kind, &GenParams::default());
        let task = match place_robots(&world, 1, TaskKind::I, seed ^ 0xABCD, 0.3) {
            Ok(t) => t,
            Err(_) => continue,
        };
        let grid = rasterize(&world, 0.05);
        let inflated = inflate(&grid, planner.r_protect);
        let s = grid.world_to_cell(task.starts[0].x, task.starts[0].y).unwrap();
        let g = grid.world_to_cell(task.goals[0].0, task.goals[0].1).unwrap();
        if astar_on_inflated(&inflated, s, g).is_err() { continue; }
        total += 1;
        let mut advice = FixedAdvice(TurnDir::Left);
        let log = run_episode(&world, &grid, &task, &mut advice, &planner, &sensing,
            &EpisodeOptions { record_trajectories: true, ..Default::default() });
        let o = log.focal(0);
        if o.min_clearance < 0.15 {
            // locate the worst row
            let mut worst = (f64::INFINITY, 0usize);
            for (i, r) in log.trajectories.iter().enumerate() {
                let c = world.clearance(r.x, r.y);
                if c < worst.0 { worst = (c, i); }
            }
            let (c, i) = worst;
            println!("seed {seed}: clearance {c:.4} at step {}", log.trajectories[i].step);
            let lo = i.saturating_sub(6);
            for r in &log.trajectories[lo..(i + 3).min(log.trajectories.len())] {
                println!("  step {:5} mode {} v {:.3} omega {:+.3} pos ({:.3},{:.3}) h {:+.3} clear {:.4}",
                    r.step, r.mode, r.v, r.omega, r.x, r.y, r.heading, world.clearance(r.x, r.y));
            }
        }
        if !o.reached {
            println!("seed {seed}: TIMEOUT path_len {:.1} decisions {}", o.path_length, log.decisions.len());
        }
    }
}

use platoon_core::metrics::quadrant3_rms;
use platoon_core::platoon::{Path, PathSource};
use platoon_core::{run_episode, ControllerKind, RunConfig, Trace};

/// One frictionless robot on a straight polyline, already at cruise speed.
fn straight_start(dir: &std::path::Path) -> RunConfig {
    let file = dir.join("line.txt");
    Path::from_points((0..4000).map(|i| (i as f64 * 0.05, 0.0))).unwrap().save(&file).unwrap();
    let mut cfg = RunConfig::default();
    cfg.vehicle.params = cfg.vehicle.params.frictionless();
    cfg.arena.speed_breakers.clear();
    cfg.platoon.n_robots = 1;
    cfg.platoon.initial_speed = cfg.platoon.v_d;
    cfg.platoon.path = PathSource::File { path: file, leader_start_index: 10 };
    cfg.sim.duration = 60.0;
    cfg
}

fn max_position_error(t: &Trace) -> f64 {
    t.records
        .iter()
        .flat_map(|r| r.robots.iter().map(|rr| rr.e_x.hypot(rr.e_y)))
        .fold(0.0, f64::max)
}

#[test]
fn on_path_start_without_friction_stays_on_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = straight_start(dir.path());
    for kind in [ControllerKind::Proposed, ControllerKind::Baseline] {
        let t = run_episode(&cfg, kind).unwrap();
        let worst = max_position_error(&t);
        assert!(worst <= 1e-3, "{kind:?}: worst position error {worst}");
    }
}

#[test]
fn controllers_agree_when_nothing_needs_adapting() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = straight_start(dir.path());
    let p = run_episode(&cfg, ControllerKind::Proposed).unwrap();
    let b = run_episode(&cfg, ControllerKind::Baseline).unwrap();
    for (rp, rb) in p.records.iter().zip(&b.records) {
        let (sp, sb) = (&rp.robots[0].state, &rb.robots[0].state);
        assert!((sp.x - sb.x).abs() <= 1e-6 && (sp.y - sb.y).abs() <= 1e-6, "diverged at t={}", rp.time);
    }
}

#[test]
fn halving_the_plant_step_barely_moves_final_positions() {
    let mut cfg = RunConfig::default();
    cfg.sim.duration = 60.0;
    let coarse = run_episode(&cfg, ControllerKind::Proposed).unwrap();
    cfg.sim.dt_plant /= 2.0;
    let fine = run_episode(&cfg, ControllerKind::Proposed).unwrap();
    let (a, b) = (coarse.records.last().unwrap(), fine.records.last().unwrap());
    for (ra, rb) in a.robots.iter().zip(&b.robots) {
        let d = (ra.state.x - rb.state.x).hypot(ra.state.y - rb.state.y);
        assert!(d < 1e-4, "final positions differ by {d}");
    }
}

#[test]
fn rougher_third_quadrant_hurts_the_baseline_there() {
    let mut cfg = RunConfig::default();
    cfg.sim.duration = 120.0;
    let mut previous: Option<Vec<f64>> = None;
    for mu in [0.13, 0.2, 0.3] {
        cfg.arena.quadrant_mu[2] = mu;
        let t = run_episode(&cfg, ControllerKind::Baseline).unwrap();
        let q3: Vec<f64> = quadrant3_rms(&t).into_iter().map(|q| {
            let (x, y) = q.expect("every robot visits quadrant 3");
            x.hypot(y)
        }).collect();
        if let Some(prev) = &previous {
            for (k, (now, before)) in q3.iter().zip(prev).enumerate() {
                assert!(now > before, "robot {} at mu={mu}: {now} <= {before}", k + 1);
            }
        }
        previous = Some(q3);
    }
}

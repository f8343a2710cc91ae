use swarmsafe::config::{ContactMode, ControllerConfig, ExperimentConfig, GraphKind, Layout, BYPASS_THRESHOLD};
use swarmsafe::dynamics::Pose;
use swarmsafe::safety::SafetyParams;
use swarmsafe::sim::{run_configured, safety_score, World};
use swarmsafe::verify::{default_suite, run_scenario, verify_configured, Decision, Scenario};
use swarmsafe::Vec2;

fn head_on_world() -> World {
    let poses = vec![Pose::new(-0.2, 0.0, 0.0), Pose::new(0.2, 0.0, std::f64::consts::PI)];
    World::new(poses, vec![0.02, 0.02], SafetyParams::default(), 0.01, ContactMode::Resolve).unwrap()
}

#[test]
fn filtered_head_on_keeps_separation() {
    let mut w = head_on_world();
    let u = [Vec2::new(0.1, 0.0), Vec2::new(-0.1, 0.0)];
    for _ in 0..1000 {
        let out = w.step(&u, true).unwrap();
        assert!(out.contacts.is_empty());
        let x = w.positions();
        assert!(x[0].distance(x[1]) >= 0.08 - 1e-6);
    }
}

#[test]
fn unfiltered_head_on_records_impact() {
    let mut w = head_on_world();
    let u = [Vec2::new(0.1, 0.0), Vec2::new(-0.1, 0.0)];
    let first = (0..400).find_map(|_| {
        let out = w.step(&u, false).unwrap();
        out.contacts.first().copied()
    });
    let c = first.expect("robots collide");
    assert!(c.normal_speed > 0.0);
    assert!((c.normal_speed - 0.2).abs() < 1e-12);
}

#[test]
fn zero_commands_only_advance_time() {
    let mut w = head_on_world();
    let before = w.poses().to_vec();
    for _ in 0..10 {
        w.step(&[Vec2::ZERO; 2], true).unwrap();
    }
    assert_eq!(w.poses(), before.as_slice());
    assert!((w.t() - 0.1).abs() < 1e-12);
}

#[test]
fn consensus_on_six_cycle_converges() {
    let cfg = ExperimentConfig {
        robots: 6,
        duration: 30.0,
        controller: ControllerConfig::Consensus { graph: GraphKind::Cycle },
        filter: false,
        contacts: ContactMode::Record,
        seed: 21,
        ..Default::default()
    };
    let trace = run_configured(&cfg).unwrap();
    let x = trace.final_positions();
    for i in 0..6 {
        for j in 0..6 {
            assert!(x[i].distance(x[j]) < 1e-2);
        }
    }
}

#[test]
fn trace_length_matches_duration() {
    let cfg = ExperimentConfig { duration: 1.23, ..Default::default() };
    let trace = run_configured(&cfg).unwrap();
    assert_eq!(trace.ticks.len(), 123);
    for (k, pair) in trace.ticks.windows(2).enumerate() {
        assert_eq!(pair[1].tick, pair[0].tick + 1, "tick {k}");
        assert!((pair[1].t - pair[0].t - cfg.dt).abs() < 1e-12);
    }
}

fn suite(robots: usize, duration: f64) -> Vec<Scenario> {
    default_suite(robots).into_iter().map(|s| Scenario { duration, ..s }).collect()
}

#[test]
fn verification_examples() {
    let base = |controller| ExperimentConfig { controller, ..Default::default() };
    let zero = verify_configured(&base(ControllerConfig::Zero {}), &suite(6, 30.0)).unwrap();
    assert_eq!(zero.aggregate, 1.0);
    assert_eq!(zero.decision, Decision::BypassAllowed);

    let head_on = verify_configured(&base(ControllerConfig::HeadOn {}), &suite(6, 30.0)).unwrap();
    assert!(head_on.aggregate < 1.0);
    assert_eq!(head_on.decision, Decision::WrapRequired);

    // Rendezvous drives every robot to a common point, so bodies must touch.
    let consensus = verify_configured(&base(ControllerConfig::Consensus { graph: GraphKind::Cycle }), &suite(6, 30.0)).unwrap();
    assert!(consensus.aggregate < BYPASS_THRESHOLD);
    assert_eq!(consensus.decision, Decision::WrapRequired);
}

#[test]
fn verification_is_reproducible() {
    let cfg = ExperimentConfig { controller: ControllerConfig::Adversarial {}, ..Default::default() };
    let s = suite(5, 10.0);
    assert_eq!(verify_configured(&cfg, &s).unwrap(), verify_configured(&cfg, &s).unwrap());
}

#[test]
fn wrapped_controllers_are_contact_free() {
    for controller in [
        ControllerConfig::HeadOn {},
        ControllerConfig::Adversarial {},
        ControllerConfig::Consensus { graph: GraphKind::Complete },
        ControllerConfig::Swap { gain: 2.0, lateral_gain: 0.0 },
    ] {
        let base = ExperimentConfig { controller: controller.clone(), ..Default::default() };
        let s = suite(6, 15.0);
        let report = verify_configured(&base, &s).unwrap();
        assert_eq!(report.decision, Decision::WrapRequired, "{controller:?}");
        for scenario in &s {
            let (result, trace) =
                run_scenario(&base, scenario, true, &mut |cfg: &ExperimentConfig, x: &[Vec2]| cfg.build_controller(x)).unwrap();
            assert!(trace.contacts.is_empty(), "{controller:?} in {}", scenario.name);
            assert_eq!(result.score, 1.0);
        }
    }
}

#[test]
fn filtered_swap_scores_one() {
    let cfg = ExperimentConfig {
        robots: 4,
        duration: 60.0,
        layout: Layout::SquareCorners { half: 0.4 },
        controller: ControllerConfig::Swap { gain: 1.0, lateral_gain: 0.5 },
        ..Default::default()
    };
    let trace = run_configured(&cfg).unwrap();
    assert_eq!(safety_score(&trace).unwrap().score, 1.0);
}

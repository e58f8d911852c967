use std::f64::consts::PI;
use wkbflow_lab::presets::initial_reduced;
use wkbflow_lab::runs::{advance, ReducedStepper, StepRule};
use wkbflow_lab::RunConfig;

const PACKET: &str = include_str!("../configs/wave_packet.toml");

/// Circular centroid of a non-negative density on [0, L).
fn centroid(values: &[f64], l: f64) -> f64 {
    let n = values.len();
    let (s, c) = values.iter().enumerate().fold((0.0, 0.0), |(s, c), (i, v)| {
        let a = 2.0 * PI * i as f64 / n as f64;
        (s + v * a.sin(), c + v * a.cos())
    });
    s.atan2(c).rem_euclid(2.0 * PI) * l / (2.0 * PI)
}

#[test]
fn packet_moves_at_the_group_velocity() {
    // Uniform background: the action is carried at u0 + c_s with O(ε²a²) feedback.
    let mut cfg = RunConfig::parse(PACKET).unwrap();
    cfg.initial.rho_offset = 0.0;
    cfg.initial.amplitude = 0.05;
    let g = cfg.grid().unwrap();
    let l = g.length(0);
    let stepper = ReducedStepper { params: cfg.params().unwrap() };
    let s0 = initial_reduced(&cfg, g).unwrap();
    let x0 = centroid(s0.action.values(), l);
    let t = 1.5;
    let (s1, _) = advance(&stepper, s0, StepRule::Cfl(0.4), t).unwrap();
    let moved = (centroid(s1.action.values(), l) - x0).rem_euclid(l);
    let expected = (cfg.initial.u0 + cfg.physics.c_s) * t;
    assert!((moved - expected).abs() < 1e-3, "moved {moved}, expected {expected}");
}

#[test]
fn capillary_base_run_conserves_mass() {
    let mut cfg = RunConfig::parse(PACKET).unwrap().with_tier(wkbflow_lab::config::Tier::Base);
    cfg.physics.hamiltonian = wkbflow_lab::config::HamiltonianName::Capillary;
    cfg.physics.kappa = 0.01;
    cfg.time.t_end = 0.2;
    let dir = tempfile::tempdir().unwrap();
    cfg.output.dir = dir.path().into();
    let report = wkbflow_lab::runs::run(&cfg).unwrap();
    assert_eq!(report.status, "ok");
    let mut r = csv::Reader::from_path(&report.csv).unwrap();
    let mass: Vec<f64> = r.records().map(|rec| rec.unwrap()[1].parse().unwrap()).collect();
    assert!(mass.iter().all(|m| (m - mass[0]).abs() < 1e-12 * mass[0]));
}

#[test]
fn bundled_configs_validate() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 4);
}

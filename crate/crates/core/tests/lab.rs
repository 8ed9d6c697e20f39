mod common;

use gwforest::family::{AdmissibleMechanism, ScalingFamily};
use gwforest::lab::{
    run_height_convergence, run_leftheight_convergence, run_profile_convergence, run_stable_marginal_check, ExperimentReport, LabConfig, StatKind,
    Thresholds,
};
use gwforest::stats::{ks_one_sample, ks_two_sample};
use gwforest::Error;

fn brownian(beta: f64, a: f64, delta: f64, x: f64) -> ScalingFamily {
    ScalingFamily::Brownian { mechanism: AdmissibleMechanism::one_type(beta, a, delta, x) }
}

#[test]
fn height_report_replays_and_round_trips() {
    let f = brownian(0.5, 0.0, 0.1, 1.0);
    let cfg = LabConfig { seed: 9, ..LabConfig::default() };
    let a = run_height_convergence(&f, &[0.0, 0.5], &[10, 40], 500, &cfg).unwrap();
    let b = run_height_convergence(&f, &[0.0, 0.5], &[10, 40], 500, &cfg).unwrap();
    assert!(a.report.replays(&b.report));
    assert_eq!(a.samples, b.samples);
    let other = run_height_convergence(&f, &[0.5], &[10], 500, &LabConfig { seed: 10, ..cfg.clone() }).unwrap();
    assert_ne!(other.samples[0].values, a.samples[0].values);

    // exact structural check at t = 0
    assert!(a.report.find("zero_at_origin").iter().all(|s| s.value == 0.0 && s.pass == Some(true)));
    // every verdict points at a stored statistic with its threshold
    for s in &a.report.statistics {
        assert_eq!(s.pass.is_some(), s.threshold.is_some(), "{}", s.name);
    }
    let text = serde_json::to_string(&a.report).unwrap();
    let back: ExperimentReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, a.report);
    assert_eq!(back.thresholds, Thresholds::default());
}

#[test]
fn outputs_are_written_with_headers() {
    let f = brownian(0.5, 0.0, 1.0, 0.0);
    let out = run_profile_convergence(&f, &[0.5], &[20], 500, &LabConfig::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    out.write(dir.path()).unwrap();
    assert!(dir.path().join("report.json").exists());
    for s in &out.samples {
        let text = std::fs::read_to_string(dir.path().join(format!("samples_{}.csv", s.label))).unwrap();
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("# experiment: profile"));
        assert_eq!(lines.next().unwrap(), "# seed: 1");
        assert!(lines.next().unwrap().starts_with("# config:"));
        assert_eq!(lines.next().unwrap(), "replicate,value");
        assert_eq!(lines.count(), s.values.len());
    }
}

#[test]
fn every_experiment_refuses_small_samples() {
    let cfg = LabConfig::default();
    let f = brownian(0.5, 0.0, 1.0, 0.0);
    let need = |e: Error| matches!(e, Error::InsufficientSamples { got: 100, need: 500 });
    assert!(need(run_profile_convergence(&f, &[1.0], &[10], 100, &cfg).unwrap_err()));
    assert!(need(run_height_convergence(&f, &[1.0], &[10], 100, &cfg).unwrap_err()));
    assert!(need(run_leftheight_convergence(&f, &[1.0], 10, 100, &cfg).unwrap_err()));
    let s = ScalingFamily::Stable { alpha: 1.5, c: vec![0.5] };
    assert!(need(run_stable_marginal_check(&s, 1.0, &[10], 100, &cfg).unwrap_err()));
    // wrong family kind
    assert!(run_stable_marginal_check(&f, 1.0, &[10], 500, &cfg).is_err());
    assert!(run_height_convergence(&s, &[1.0], &[10], 500, &cfg).is_err());
}

#[test]
fn degenerate_samples() {
    let xs = vec![0.0; 600];
    assert_eq!(ks_two_sample(&xs, &xs), 0.0);
    assert_eq!(ks_two_sample(&xs, &[0.0; 3]), 0.0);
    let ys: Vec<f64> = (0..600).map(|i| i as f64 / 600.0).collect();
    assert!((ks_one_sample(&ys, |x| x.clamp(0.0, 1.0)) - common::ks_brute(&ys, |x| x.clamp(0.0, 1.0))).abs() < 1e-12);
    assert!((ks_two_sample(&xs, &ys) - common::ks2_brute(&xs, &ys)).abs() < 1e-12);
}

#[test]
fn decoupled_left_height_uses_the_affine_drift() {
    let f = brownian(0.5, 0.0, 1.0, 0.2);
    let out = run_leftheight_convergence(&f, &[1.0], 50, 500, &LabConfig::default()).unwrap();
    let r = &out.report;
    assert_eq!(r.find("continuum_excluded")[0].value, 0.0);
    assert_eq!(r.find("ks_left_height")[0].kind, StatKind::KsTwoSample);
    assert_eq!(r.find("ks_left_height")[0].threshold, Some(0.05));
}

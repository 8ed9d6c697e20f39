//! Local times of continuum left heights against discrete profiles and the
//! SDE, for a coupled two-type mechanism.
//!
//! cargo run --release --example ray_knight

use gwforest::family::{AdmissibleMechanism, ScalingFamily};
use gwforest::lab::{run_rayknight_check, LabConfig};

fn main() -> gwforest::Result<()> {
    let m = AdmissibleMechanism {
        beta: vec![0.5, 0.5],
        alpha: vec![vec![0.0, 0.5], vec![0.5, 0.0]],
        delta: vec![1.0, 1.0],
        x: vec![0.0, 0.0],
        levy: vec![],
    };
    let cfg = LabConfig { local_time_replicates: Some(500), ..LabConfig::default() };
    let out = run_rayknight_check(&ScalingFamily::Brownian { mechanism: m }, &[0.25, 0.5], 100, 1000, &cfg)?;
    print!("{}", out.report.table());
    Ok(())
}

//! Rescaled height profiles of a Brownian family against the square-root
//! SDE, at two scales.
//!
//! cargo run --release --example profile_convergence

use gwforest::family::{AdmissibleMechanism, ScalingFamily};
use gwforest::lab::{run_profile_convergence, LabConfig};

fn main() -> gwforest::Result<()> {
    let family = ScalingFamily::Brownian { mechanism: AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.0) };
    let out = run_profile_convergence(&family, &[0.5, 1.0], &[25, 100], 1000, &LabConfig::default())?;
    print!("{}", out.report.table());
    Ok(())
}

//! A critical offspring law in the domain of attraction of a 3/2-stable law:
//! the rescaled walk against the numerically inverted stable CDF.
//!
//! cargo run --release --example stable_walk

use gwforest::family::ScalingFamily;
use gwforest::lab::{run_stable_marginal_check, LabConfig};
use gwforest::law::Law;
use gwforest::stats::hill_estimator;
use gwforest::rng::stream_rng;

fn main() -> gwforest::Result<()> {
    let law = Law::StableTail { alpha: 1.5, scale: 0.5 };
    let s = law.sampler()?;
    let mut rng = stream_rng(5, 0);
    let mut xs: Vec<f64> = (0..200_000).map(|_| s.sample(&mut rng) as f64).collect();
    println!("Hill estimate of the tail index: {:.3}", hill_estimator(&mut xs, 2000));

    let family = ScalingFamily::Stable { alpha: 1.5, c: vec![0.5] };
    let out = run_stable_marginal_check(&family, 1.0, &[20, 200], 1000, &LabConfig::default())?;
    print!("{}", out.report.table());
    Ok(())
}

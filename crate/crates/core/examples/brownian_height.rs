//! Reflected Brownian height, its running minimum and its occupation
//! density, with the reflection-principle mean of the minimum.
//!
//! cargo run --release --example brownian_height

use gwforest::limit::local_time::{occupation_residual, refine_midpoints};
use gwforest::limit::simulate_brownian_height;
use gwforest::rng::stream_rng;
use gwforest::stats::mean_se;

fn main() -> gwforest::Result<()> {
    let beta = 0.5;
    let ells: Vec<f64> = (0..4000)
        .map(|r| simulate_brownian_height(beta, 0.0, 1e-3, 1.0, &mut stream_rng(3, r)).map(|p| p.ell.last()))
        .collect::<gwforest::Result<_>>()?;
    let (m, se) = mean_se(&ells);
    let exact = (2.0 * beta).sqrt() * (2.0 / std::f64::consts::PI).sqrt();
    println!("E[ell_1] = {m:.4} +- {se:.4}, exact {exact:.4}");

    let path = simulate_brownian_height(beta, 0.0, 1e-3, 2.0, &mut stream_rng(3, 9999))?;
    let g = |y: f64| (-y).exp();
    let coarse = occupation_residual(&path.x, 0.04, g)?;
    let fine = occupation_residual(&refine_midpoints(&path.x, (2.0 * beta).sqrt(), &mut stream_rng(4, 0)), 0.02, g)?;
    println!("occupation residual: {coarse:.2e} at eps 0.04, {fine:.2e} at eps 0.02");
    Ok(())
}

//! Builds `cevH = H + F(U)(ell)` for a coupled two-type mechanism, with `U`
//! taken from an SDE run, and checks its structural properties.
//!
//! cargo run --release --example left_height

use gwforest::family::AdmissibleMechanism;
use gwforest::limit::{build_u, mcbi_sde, simulate_left_height};
use gwforest::rng::stream_rng;

fn main() -> gwforest::Result<()> {
    let m = AdmissibleMechanism {
        beta: vec![0.5, 0.5],
        alpha: vec![vec![0.0, 0.5], vec![0.5, 0.0]],
        delta: vec![1.0, 1.0],
        x: vec![0.3, 0.3],
        levy: vec![],
    };
    let mut rng = stream_rng(11, 0);
    let z = mcbi_sde(&m, 1e-3, 8.0, &mut rng)?;
    let u = build_u(&m, &z.z)?;
    for j in 0..2 {
        let p = simulate_left_height(m.beta[j], 0.0, &u[j], 1e-3, 2.0, &mut rng)?;
        let dominates = p.cev_h.values.iter().zip(&p.h.values).all(|(c, h)| c >= h);
        println!(
            "type {}: U slope >= {:.3}, ell_2 = {:.3}, J_2 = {:.3}, cevH_2 = {:.3}, cevH >= H: {dominates}, J nondecreasing: {}",
            j + 1,
            u[j].min_slope(),
            p.ell.last(),
            p.j.last(),
            p.cev_h.last(),
            p.j.is_nondecreasing(0.0)
        );
    }
    Ok(())
}

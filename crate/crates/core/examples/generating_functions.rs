//! Offspring laws, their generating functions and the scaling families
//! built from them.
//!
//! cargo run --release --example generating_functions

use gwforest::family::{brownian_family, check_a3, AdmissibleMechanism, ScalingFamily};
use gwforest::law::Law;

fn main() -> gwforest::Result<()> {
    for s in ["geometric(0.5)", "poisson(1)", "binomial(4,0.25)", "stable_tail(1.5,0.5)"] {
        let law: Law = s.parse()?;
        let extinction: Vec<String> = [1, 4, 16, 64].iter().map(|&n| format!("{:.4}", law.gf_iterate(n, 0.0).unwrap())).collect();
        println!("{s:<22} mean {:.3}  g_n(0) for n = 1, 4, 16, 64: {}", law.mean(), extinction.join(" "));
    }

    let m = AdmissibleMechanism::one_type(0.5, -1.0, 1.0, 0.5);
    let (e, gamma) = brownian_family(&m, 100)?;
    println!("p = 100: gamma = {gamma}, diagonal law {}, immigration {}, roots {:?}", e.mu[0][0], e.nu[0], e.roots);

    let table = check_a3(&ScalingFamily::Brownian { mechanism: m }, 1.0, &[25, 100, 400])?;
    for r in &table.rows {
        println!("  p = {:>4}: g_{}(0) = {:.4}", r.p, r.n, r.value);
    }
    println!("flagged types: {:?}", table.flagged);
    Ok(())
}

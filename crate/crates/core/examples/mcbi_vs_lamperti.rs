//! The square-root SDE and the time-change construction give the same
//! marginals; both match the mean ODE.
//!
//! cargo run --release --example mcbi_vs_lamperti

use gwforest::family::AdmissibleMechanism;
use gwforest::limit::lamperti::brownian_drivers;
use gwforest::limit::{lamperti_solve, mcbi_sde, mean_ode};
use gwforest::rng::{derive_seed, stream_rng};
use gwforest::stats::{ks_p_value, ks_two_sample, mean_se};

fn main() -> gwforest::Result<()> {
    let m = AdmissibleMechanism::one_type(0.5, -1.0, 1.0, 0.5);
    let n = 4000u64;
    let sde: Vec<f64> = (0..n).map(|r| mcbi_sde(&m, 1e-3, 1.0, &mut stream_rng(1, r)).map(|t| t.z[0].last())).collect::<gwforest::Result<_>>()?;
    let lam: Vec<f64> = (0..n)
        .map(|r| {
            let mut x = brownian_drivers(&m, 1e-3, vec![stream_rng(derive_seed(2, 1), r)], true, f64::INFINITY);
            lamperti_solve(&m, &mut x, 1e-3, 1.0).map(|t| t.z[0].last())
        })
        .collect::<gwforest::Result<_>>()?;
    let d = ks_two_sample(&sde, &lam);
    println!("mean ODE {:.4}", mean_ode(&m, 1.0)[0]);
    println!("SDE      {:.4} +- {:.4}", mean_se(&sde).0, mean_se(&sde).1);
    println!("Lamperti {:.4} +- {:.4}", mean_se(&lam).0, mean_se(&lam).1);
    println!("two-sample KS {d:.4} (p-value {:.3})", ks_p_value(d, n as f64 / 2.0));
    Ok(())
}

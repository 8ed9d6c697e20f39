mod common;

use gwforest::family::{brownian_family, check_a3, stable_family, stable_gamma, three_point_law, AdmissibleMechanism, ScalingFamily};
use gwforest::law::Law;
use gwforest::rng::stream_rng;
use gwforest::stats::{hill_estimator, ks_one_sample, stable_cdf};
use proptest::prelude::*;
use statrs::distribution::{Binomial, Discrete, Geometric, Poisson};

#[test]
fn pmfs_agree_with_statrs() {
    for lambda in [0.01, 0.5, 1.0, 3.7] {
        let d = Poisson::new(lambda).unwrap();
        let law = Law::Poisson(lambda);
        for k in 0..30 {
            assert!((law.pmf(k) - d.pmf(k)).abs() < 1e-14, "poisson({lambda}) at {k}");
        }
    }
    for q in [0.1, 0.5, 0.8] {
        // statrs counts trials to the first success on {1, 2, ...}
        let d = Geometric::new(1.0 - q).unwrap();
        let law = Law::Geometric(q);
        for k in 0..40 {
            assert!((law.pmf(k) - d.pmf(k + 1)).abs() < 1e-14, "geometric({q}) at {k}");
        }
    }
    for (n, q) in [(1, 0.3), (5, 0.5), (12, 0.05)] {
        let d = Binomial::new(q, n).unwrap();
        let law = Law::Binomial(n, q);
        for k in 0..=n {
            assert!((law.pmf(k) - d.pmf(k)).abs() < 1e-14, "binomial({n},{q}) at {k}");
        }
    }
}

#[test]
fn law_grammar_round_trips() {
    for s in ["dirac(3)", "poisson(0.01)", "geometric(0.5)", "binomial(4,0.25)", "stable_tail(1.5,0.5)", "explicit([0.2,0.5,0.3])"] {
        let law: Law = s.parse().unwrap();
        law.validate().unwrap();
        let again: Law = law.to_string().parse().unwrap();
        assert_eq!(law, again);
    }
    let err = "explicit([0.5, 0.4])".parse::<Law>().and_then(|l| l.validate()).unwrap_err().to_string();
    assert!(err.contains("explicit") && err.contains("0.9"), "{err}");
    assert!("poisson(-1)".parse::<Law>().and_then(|l| l.validate()).is_err());
    assert!("zeta(2)".parse::<Law>().is_err());
}

#[test]
fn sampling_moments() {
    let mut rng = stream_rng(11, 0);
    let s = Law::Dirac(3).sampler().unwrap();
    assert!((0..1000).all(|_| s.sample(&mut rng) == 3));
    let lambda = 2.3;
    let s = Law::Poisson(lambda).sampler().unwrap();
    let n = 1_000_000;
    let m = (0..n).map(|_| s.sample(&mut rng) as f64).sum::<f64>() / n as f64;
    assert!((m - lambda).abs() < 4.0 * (lambda / n as f64).sqrt(), "{m}");
    let law = Law::Explicit(vec![0.2, 0.5, 0.3]);
    let s = law.sampler().unwrap();
    let m = (0..n).map(|_| s.sample(&mut rng) as f64).sum::<f64>() / n as f64;
    assert!((m - law.mean()).abs() < 4.0 * (law.variance() / n as f64).sqrt());
}

#[test]
fn stable_tail_law() {
    let law = Law::StableTail { alpha: 1.5, scale: 0.5 };
    law.validate().unwrap();
    assert_eq!(law.mean(), 1.0);
    let table = law.pmf_table(1e-10);
    assert!((table.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    // generating function from the pmf series against the closed form
    for s in [0.0f64, 0.3, 0.7, 0.95] {
        let series: f64 = table.iter().enumerate().map(|(k, p)| p * s.powi(k as i32)).sum();
        assert!((series - law.gf(s)).abs() < 1e-8, "s={s}: {series} vs {}", law.gf(s));
    }
    let mut rng = stream_rng(5, 0);
    let sampler = law.sampler().unwrap();
    let mut xs: Vec<f64> = (0..1_000_000).map(|_| sampler.sample(&mut rng) as f64).collect();
    let hill = hill_estimator(&mut xs, 1000);
    assert!((1.3..=1.7).contains(&hill), "hill {hill}");
}

/// `g(s) = (1 - q) / (1 - q s)` is the Mobius map `[[0, 1 - q], [-q, 1]]`,
/// so `g_n` is the `n`-th matrix power.
fn geometric_iterate(q: f64, n: u32, s: f64) -> f64 {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    let g = [[0.0, 1.0 - q], [-q, 1.0]];
    for _ in 0..n {
        m = [
            [g[0][0] * m[0][0] + g[0][1] * m[1][0], g[0][0] * m[0][1] + g[0][1] * m[1][1]],
            [g[1][0] * m[0][0] + g[1][1] * m[1][0], g[1][0] * m[0][1] + g[1][1] * m[1][1]],
        ];
    }
    (m[0][0] * s + m[0][1]) / (m[1][0] * s + m[1][1])
}

#[test]
fn generating_function_iterates() {
    for n in [0, 1, 5, 40] {
        assert_eq!(Law::Dirac(1).gf_iterate(n, 0.37).unwrap(), 0.37);
    }
    let g2 = Law::Poisson(1.0).gf_iterate(2, 0.0).unwrap();
    assert!((g2 - ((-1.0f64).exp() - 1.0).exp()).abs() < 1e-15);
    assert!((g2 - 0.5315).abs() < 1e-4);
    for q in [0.3, 0.5, 0.6] {
        for n in [1, 2, 7, 30] {
            for s in [0.0, 0.4, 1.0] {
                let got = Law::Geometric(q).gf_iterate(n as i64, s).unwrap();
                let want = geometric_iterate(q, n, s);
                assert!((got - want).abs() < 1e-9 * want.max(1e-3), "q={q} n={n} s={s}: {got} vs {want}");
            }
        }
    }
    assert!(Law::Poisson(1.0).gf_iterate(-1, 0.0).is_err());
}

#[test]
fn two_generation_extinction_by_simulation() {
    // P(a poisson(1) tree is extinct by generation 2) = g_2(0)
    let mut rng = stream_rng(9, 0);
    let s = Law::Poisson(1.0).sampler().unwrap();
    let n = 200_000;
    let extinct = (0..n)
        .filter(|_| {
            let first = s.sample(&mut rng);
            (0..first).all(|_| s.sample(&mut rng) == 0)
        })
        .count() as f64
        / n as f64;
    let want = Law::Poisson(1.0).gf_iterate(2, 0.0).unwrap();
    assert!((extinct - want).abs() < 4.0 * (want * (1.0 - want) / n as f64).sqrt(), "{extinct} vs {want}");
}

proptest! {
    #[test]
    fn iterates_increase_to_the_extinction_probability(q in 0.05f64..0.9, lambda in 0.1f64..2.5) {
        for law in [Law::Geometric(q), Law::Poisson(lambda)] {
            let v: Vec<f64> = (0..60).map(|n| law.gf_iterate(n, 0.0).unwrap()).collect();
            prop_assert!(v.windows(2).all(|w| w[1] >= w[0] - 1e-15));
            prop_assert!(law.gf_iterate(25, 1.0).unwrap() == 1.0);
            // away from criticality convergence is geometric
            if (law.mean() - 1.0).abs() > 0.3 {
                let fixed = law.gf_iterate(2000, 0.0).unwrap();
                prop_assert!((law.gf(fixed) - fixed).abs() < 1e-10);
            }
        }
    }
}

fn brownian_one(beta: f64, a: f64) -> AdmissibleMechanism {
    AdmissibleMechanism::one_type(beta, a, 1.0, 1.0)
}

#[test]
fn brownian_family_moments() {
    let (e, gamma) = brownian_family(&brownian_one(1.0, 0.0), 100).unwrap();
    assert_eq!(gamma, 100);
    assert!((e.mu[0][0].mean() - 1.0).abs() < 1e-9);
    assert!((e.mu[0][0].variance() - 2.0).abs() < 1e-9);
    let (e, _) = brownian_family(&brownian_one(0.5, -1.0), 200).unwrap();
    assert!((e.mu[0][0].mean() - (1.0 - 1.0 / 200.0)).abs() < 1e-9);
    assert!((e.mu[0][0].variance() - 1.0).abs() < 1e-9);
    assert_eq!(e.roots, vec![200]);
    let m = AdmissibleMechanism {
        beta: vec![0.5, 0.5],
        alpha: vec![vec![0.0, 0.0], vec![0.5, 0.0]],
        delta: vec![1.0, 1.0],
        x: vec![0.0, 0.0],
        levy: vec![],
    };
    let (e, _) = brownian_family(&m, 50).unwrap();
    assert_eq!(e.mu[0][1], Law::Dirac(0));
    assert_eq!(e.mu[1][0], Law::Poisson(0.5 / 50.0));
    e.validate().unwrap();
    assert_eq!(three_point_law(1.0, 1.0).unwrap(), Law::Explicit(vec![0.5, 0.0, 0.5]));
}

#[test]
fn brownian_family_walk_variance() {
    // (1/p) sum_{k < p^2} (xi_k - 1) has variance close to 2 beta at t = 1
    let (beta, p) = (0.5, 50u32);
    let (e, _) = brownian_family(&brownian_one(beta, 0.0), p).unwrap();
    let s = e.mu[0][0].sampler().unwrap();
    let reps = 10_000;
    let xs: Vec<f64> = (0..reps)
        .map(|r| {
            let mut rng = stream_rng(21, r);
            (0..p * p).map(|_| s.sample(&mut rng) as f64 - 1.0).sum::<f64>() / p as f64
        })
        .collect();
    let m = common::mean(&xs);
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    assert!((var / (2.0 * beta) - 1.0).abs() < 0.05, "variance {var}");
}

#[test]
fn a3_table() {
    let fam = ScalingFamily::Brownian { mechanism: brownian_one(0.5, 0.0) };
    let t = check_a3(&fam, 1.0, &[50, 100, 200]).unwrap();
    assert!(t.flagged.is_empty());
    for row in &t.rows {
        assert!(row.value > 0.1, "{row:?}");
        // independent evaluation: compose the pmf-series generating function
        let law = &fam.ensemble(row.p).unwrap().mu[0][0];
        let pmf = law.pmf_table(1e-15);
        let mut s = 0.0f64;
        for _ in 0..row.n {
            s = pmf.iter().enumerate().map(|(k, p)| p * s.powi(k as i32)).sum();
        }
        assert!((s - row.value).abs() < 1e-12);
    }
    // the stable family satisfies it too
    let fam = ScalingFamily::Stable { alpha: 1.5, c: vec![0.5] };
    assert!(check_a3(&fam, 1.0, &[50, 200, 800]).unwrap().flagged.is_empty());
    assert_eq!(Law::Dirac(1).gf_iterate(50, 0.0).unwrap(), 0.0);
}

#[test]
fn stable_family_shape() {
    let (e, gamma) = stable_family(&[0.5], 1.5, 500).unwrap();
    assert_eq!(gamma, stable_gamma(1.5, 500));
    assert_eq!(gamma, 22);
    assert_eq!(e.mu[0][0].mean(), 1.0);
    assert!(stable_family(&[0.5], 2.0, 10).is_err());
}

#[test]
fn stable_cdf_matches_chambers_mallows_stuck() {
    let (alpha, c) = (1.5, 0.5);
    let mut rng = stream_rng(3, 0);
    let xs: Vec<f64> = (0..30_000).map(|_| common::cms_stable(&mut rng, alpha, c)).collect();
    let d = ks_one_sample(&xs, |x| stable_cdf(x, alpha, c));
    // 1.63 / sqrt(n) is the 1% critical value
    assert!(d < 1.63 / (xs.len() as f64).sqrt(), "KS {d}");
    assert!(common::mean(&xs).abs() < 0.05);
}

#[test]
fn production_ks_matches_brute_force() {
    let mut rng = stream_rng(4, 0);
    let law = Law::Poisson(2.0).sampler().unwrap();
    // ties exercise the one-sided limits
    let xs: Vec<f64> = (0..500).map(|_| law.sample(&mut rng) as f64 * 0.5 + 0.1).collect();
    let cdf = |x: f64| common::normal_cdf(x - 1.0, 0.8);
    assert!((ks_one_sample(&xs, cdf) - common::ks_brute(&xs, cdf)).abs() < 1e-12);
    let ys: Vec<f64> = (0..300).map(|_| law.sample(&mut rng) as f64 * 0.5).collect();
    assert!((gwforest::stats::ks_two_sample(&xs, &ys) - common::ks2_brute(&xs, &ys)).abs() < 1e-12);
    assert_eq!(gwforest::stats::ks_two_sample(&[1.0; 10], &[1.0; 20]), 0.0);
}

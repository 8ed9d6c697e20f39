//! Distribution distances, goodness of fit and reference distributions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (var / n).sqrt())
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// One-sample Kolmogorov distance `sup |F_n - F|` for a continuous `F`.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let v = sorted(xs);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        // step over ties so the empirical CDF jumps once per value
        let mut k = i;
        while k + 1 < v.len() && v[k + 1] == v[i] {
            k += 1;
        }
        let f = cdf(v[i]);
        d = d.max(f - i as f64 / n).max((k + 1) as f64 / n - f);
        i = k + 1;
    }
    d
}

/// Two-sample Kolmogorov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted(a), sorted(b));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] == x {
            i += 1;
        }
        while j < b.len() && b[j] == x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic p-value of a Kolmogorov distance `d` with effective sample
/// size `n` (use `n_a n_b / (n_a + n_b)` for two samples).
pub fn ks_p_value(d: f64, n: f64) -> f64 {
    let sn = n.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
    /// `(observed, expected)` per bin; the last bin is the tail.
    pub bins: Vec<(u64, f64)>,
}

/// Pearson goodness of fit of `counts[k]` against `probs[k]`.
///
/// Consecutive values are merged until every bin expects at least five
/// observations; the mass beyond `probs` and any observation beyond it go to
/// a final tail bin. A law with one atom passes with `p = 1` iff every
/// observation sits on the atom.
pub fn chi_square_gof(counts: &[u64], probs: &[f64]) -> Result<ChiSquareResult> {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return Err(Error::InsufficientSamples { got: 0, need: 1 });
    }
    let nf = n as f64;
    let count = |k: usize| counts.get(k).copied().unwrap_or(0);
    if let Some(atom) = probs.iter().position(|&p| p >= 1.0 - 1e-12) {
        let ok = count(atom) == n;
        return Ok(ChiSquareResult {
            statistic: if ok { 0.0 } else { f64::INFINITY },
            df: 0,
            p_value: if ok { 1.0 } else { 0.0 },
            bins: vec![(count(atom), nf), (n - count(atom), 0.0)],
        });
    }
    let mut bins = Vec::new();
    let (mut obs, mut exp, mut closed_mass) = (0u64, 0.0, 0.0);
    for (k, &p) in probs.iter().enumerate() {
        obs += count(k);
        exp += nf * p;
        let tail_after = nf * (1.0 - closed_mass - exp / nf);
        if exp >= 5.0 && tail_after >= 5.0 {
            bins.push((obs, exp));
            closed_mass += exp / nf;
            obs = 0;
            exp = 0.0;
        }
    }
    let tail_obs = n - bins.iter().map(|b| b.0).sum::<u64>();
    let tail_exp = (nf * (1.0 - closed_mass)).max(0.0);
    bins.push((tail_obs, tail_exp));
    let df = bins.len().saturating_sub(1);
    let statistic: f64 = bins.iter().map(|&(o, e)| if e > 0.0 { (o as f64 - e).powi(2) / e } else if o > 0 { f64::INFINITY } else { 0.0 }).sum();
    let p_value = if df == 0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        ChiSquared::new(df as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?.sf(statistic)
    };
    Ok(ChiSquareResult { statistic, df, p_value, bins })
}

/// Hill estimate of the tail index from the `k` largest values.
/// Reorders `xs`.
pub fn hill_estimator(xs: &mut [f64], k: usize) -> f64 {
    xs.sort_by(|a, b| b.total_cmp(a));
    let threshold = xs[k];
    let s: f64 = xs[..k].iter().map(|x| (x / threshold).ln()).sum();
    k as f64 / s
}

// 16-point Gauss-Legendre nodes and weights on [-1, 1] (positive half).
const GL16_X: [f64; 8] = [
    0.095_012_509_837_637_44,
    0.281_603_550_779_258_9,
    0.458_016_777_657_227_4,
    0.617_876_244_402_643_7,
    0.755_404_408_355_003,
    0.865_631_202_387_831_8,
    0.944_575_023_073_232_6,
    0.989_400_934_991_649_9,
];
const GL16_W: [f64; 8] = [
    0.189_450_610_455_068_5,
    0.182_603_415_044_923_6,
    0.169_156_519_395_002_5,
    0.149_595_988_816_576_7,
    0.124_628_971_255_533_9,
    0.095_158_511_682_492_78,
    0.062_253_523_938_647_89,
    0.027_152_459_411_754_1,
];

/// `int_a^b f` by composite 16-point Gauss-Legendre on `panels` panels.
pub fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL16_X.iter().zip(&GL16_W) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += s * half;
    }
    total
}

/// CDF at `x` of the spectrally positive stable law with
/// `E[exp(-lambda X)] = exp(c lambda^alpha)`, `alpha` in `(1, 2]`.
///
/// Gil-Pelaez inversion of the characteristic function
/// `exp(c u^alpha e^{-i pi alpha / 2})`; far in the right tail the
/// regularly varying asymptote `c x^-alpha / (alpha Gamma(-alpha))` is used.
pub fn stable_cdf(x: f64, alpha: f64, c: f64) -> f64 {
    let theta = PI * alpha / 2.0;
    let (cos_t, sin_t) = (theta.cos(), theta.sin());
    if x > 1e4 && alpha < 2.0 {
        return 1.0 - c * x.powf(-alpha) / (alpha * gamma(-alpha));
    }
    let u_max = ((1e16f64).ln() / (c * cos_t.abs())).powf(1.0 / alpha);
    let width = 0.05f64.min(0.5 / x.abs().max(1e-12));
    let panels = (u_max / width).ceil().max(8.0) as usize;
    let integrand = |u: f64| {
        if u == 0.0 {
            return 0.0;
        }
        let ua = c * u.powf(alpha);
        (ua * cos_t).exp() * (u * x + ua * sin_t).sin() / u
    };
    (0.5 + gauss_legendre(integrand, 0.0, u_max, panels) / PI).clamp(0.0, 1.0)
}

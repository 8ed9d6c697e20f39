//! Independent oracles shared by the integration tests. Nothing here calls
//! the production code paths it is meant to check.

#![allow(dead_code)]

use gwforest::forest::{ColoredForest, OffspringEnsemble};
use gwforest::law::Law;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Random ensemble mixing every parametric law kind, kept small enough that
/// forests to height 20 stay cheap.
pub fn random_ensemble<R: Rng>(rng: &mut R, n: usize) -> OffspringEnsemble {
    let law = |scale: f64, rng: &mut R| -> Law {
        match rng.random_range(0..6) {
            0 => Law::Dirac(rng.random_range(0..2)),
            1 => Law::Poisson(scale * rng.random::<f64>()),
            2 => Law::Geometric(scale * 0.5 * rng.random::<f64>()),
            3 => Law::Binomial(rng.random_range(1..4), scale * 0.3 * rng.random::<f64>()),
            4 => {
                // mean a + 2b <= scale
                let a = scale * rng.random::<f64>();
                let b = (scale - a) * 0.5 * rng.random::<f64>();
                Law::Explicit(vec![1.0 - a - b, a, b])
            }
            _ => Law::Dirac(0),
        }
    };
    // diagonal means near 1, cross and immigration means small
    let mu = (0..n).map(|i| (0..n).map(|j| if i == j { law(0.95, rng) } else { law(0.3 / n as f64, rng) }).collect()).collect();
    let nu = (0..n).map(|_| law(0.5, rng)).collect();
    let roots = (0..n).map(|_| rng.random_range(0..3)).collect();
    OffspringEnsemble { mu, nu, roots, convergence: false }
}

/// Children of every vertex in index order, from the parent column alone.
pub fn child_lists(f: &ColoredForest) -> Vec<Vec<usize>> {
    let mut kids = vec![Vec::new(); f.len()];
    for v in 0..f.len() {
        if let Some(p) = f.parent(v) {
            kids[p].push(v);
        }
    }
    kids
}

/// Recursive depth-first order of type `j`: components by root index, each
/// visited depth first, cut at the first vertex sitting at `h_max`.
/// Returns the explored order and the blocking vertex.
pub fn dfs_oracle(f: &ColoredForest, j: usize) -> (Vec<usize>, Option<usize>) {
    fn visit(f: &ColoredForest, kids: &[Vec<usize>], j: usize, v: usize, out: &mut Vec<usize>) {
        out.push(v);
        for &w in &kids[v] {
            if f.color(w) == j {
                visit(f, kids, j, w, out);
            }
        }
    }
    let kids = child_lists(f);
    let mut all = Vec::new();
    for v in 0..f.len() {
        let root = f.color(v) == j && f.parent(v).map_or(true, |p| f.color(p) != j);
        if root {
            visit(f, &kids, j, v, &mut all);
        }
    }
    match all.iter().position(|&v| f.height(v) == f.h_max()) {
        Some(k) => (all[..k].to_vec(), Some(all[k])),
        None => (all, None),
    }
}

/// `H(k) = #{l < k : D(l) = min D[l..=k]}` evaluated literally, O(n^2).
pub fn literal_hd(d: &[i64]) -> Vec<u32> {
    (0..d.len())
        .map(|k| {
            let mut count = 0;
            for l in 0..k {
                let m = d[l..=k].iter().min().copied().unwrap();
                if d[l] == m {
                    count += 1;
                }
            }
            count
        })
        .collect()
}

/// Distance from `v` to the root of its monochromatic component.
pub fn component_depth(f: &ColoredForest, v: usize) -> u32 {
    let mut depth = 0;
    let mut u = v;
    while let Some(p) = f.parent(u) {
        if f.color(p) != f.color(v) {
            break;
        }
        depth += 1;
        u = p;
    }
    depth
}

/// Global height by walking up the parent pointers.
pub fn global_height(f: &ColoredForest, v: usize) -> u32 {
    let mut depth = 0;
    let mut u = v;
    while let Some(p) = f.parent(u) {
        depth += 1;
        u = p;
    }
    depth
}

/// Number of type-`j` component roots at height at most `h`.
pub fn j_roots_up_to(f: &ColoredForest, j: usize, h: u32) -> u64 {
    (0..f.len())
        .filter(|&v| f.color(v) == j && f.height(v) <= h && f.parent(v).map_or(true, |p| f.color(p) != j))
        .count() as u64
}

/// Kolmogorov distance against a CDF by brute force over sample points,
/// comparing both one-sided limits of the empirical CDF.
pub fn ks_brute(xs: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for &x in xs {
        let below = xs.iter().filter(|&&y| y < x).count() as f64 / n;
        let upto = xs.iter().filter(|&&y| y <= x).count() as f64 / n;
        let f = cdf(x);
        d = d.max((f - below).abs()).max((upto - f).abs());
    }
    d
}

/// Two-sample Kolmogorov distance by brute force over the pooled points.
pub fn ks2_brute(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    a.iter()
        .chain(b)
        .map(|&x| {
            let fa = a.iter().filter(|&&y| y <= x).count() as f64 / na;
            let fb = b.iter().filter(|&&y| y <= x).count() as f64 / nb;
            (fa - fb).abs()
        })
        .fold(0.0, f64::max)
}

pub fn normal_cdf(x: f64, var: f64) -> f64 {
    Normal::new(0.0, var.sqrt()).unwrap().cdf(x)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Chambers-Mallows-Stuck draw of the totally skewed stable law with
/// `E[exp(-lambda X)] = exp(c lambda^alpha)`, `alpha` in `(1, 2)`.
pub fn cms_stable<R: Rng>(rng: &mut R, alpha: f64, c: f64) -> f64 {
    use std::f64::consts::PI;
    let t = (PI * alpha / 2.0).tan();
    let sigma = (c * (PI * alpha / 2.0).cos().abs()).powf(1.0 / alpha);
    let b = t.atan() / alpha;
    let s = (1.0 + t * t).powf(1.0 / (2.0 * alpha));
    let v = PI * (rng.random::<f64>() - 0.5);
    let w = -(1.0 - rng.random::<f64>()).ln();
    let x = s * (alpha * (v + b)).sin() / v.cos().powf(1.0 / alpha) * ((v - alpha * (v + b)).cos() / w).powf((1.0 - alpha) / alpha);
    sigma * x
}

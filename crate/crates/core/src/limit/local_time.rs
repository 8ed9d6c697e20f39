//! Occupation-density local times of grid paths.

use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::GridPath;
use crate::error::{Error, Result};
use crate::stats::normal_cdf;

/// `L^v ~ (dt / eps) #{k : path_k in (v, v + eps]}` for each level.
pub fn local_time_field(path: &GridPath, levels: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(eps >= path.dt) {
        return Err(Error::InvalidArgument(format!("band {eps} is finer than the time step {}", path.dt)));
    }
    let scale = path.dt / eps;
    Ok(levels
        .iter()
        .map(|&v| path.values.iter().filter(|&&y| y > v && y <= v + eps).count() as f64 * scale)
        .collect())
}

/// Level grid `k eps` covering the range of `path`.
pub fn level_grid(path: &GridPath, eps: f64) -> Vec<f64> {
    let lo = path.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = path.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (a, b) = ((lo / eps).floor() as i64 - 1, (hi / eps).ceil() as i64);
    (a..=b).map(|k| k as f64 * eps).collect()
}

/// `|sum_k g(path_k) dt - sum_v g(v) L^v eps|` over the level grid of the
/// path, with `L` from [`local_time_field`].
pub fn occupation_residual(path: &GridPath, eps: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    let levels = level_grid(path, eps);
    let lt = local_time_field(path, &levels, eps)?;
    let time_side: f64 = path.values.iter().map(|&y| g(y)).sum::<f64>() * path.dt;
    let level_side: f64 = levels.iter().zip(&lt).map(|(&v, &l)| g(v) * l * eps).sum();
    Ok((time_side - level_side).abs())
}

/// Halves the grid step by inserting Brownian-bridge midpoints, for a path
/// with diffusion coefficient `sigma`.
pub fn refine_midpoints<R: Rng + ?Sized>(path: &GridPath, sigma: f64, rng: &mut R) -> GridPath {
    let sd = sigma * (path.dt / 4.0).sqrt();
    let mut out = Vec::with_capacity(2 * path.len() - 1);
    for w in path.values.windows(2) {
        out.push(w[0]);
        out.push(0.5 * (w[0] + w[1]) + sd * rng.sample::<f64, _>(StandardNormal));
    }
    out.push(path.last());
    GridPath { dt: path.dt / 2.0, values: out }
}

const GL8_X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

/// Expected time that a reflected Brownian bridge spends in `(lo, hi]`.
///
/// The bridge runs for `dt` from `a >= 0` to `b >= 0` with variance `var`
/// per unit time; its transition density is the method-of-images sum
/// `phi(y - a) + phi(y + a)`, so the time-`s` marginal is a mixture of four
/// Gaussians.
pub fn reflected_bridge_band_time(a: f64, b: f64, dt: f64, var: f64, lo: f64, hi: f64) -> f64 {
    let lo = lo.max(0.0);
    if hi <= lo {
        return 0.0;
    }
    let reach = 7.0 * (var * dt).sqrt();
    if a.min(b) > hi + reach || a.max(b) < lo - reach {
        return 0.0;
    }
    // image weights, relative to the larger one
    let (e1, e2) = (-(b - a).powi(2) / (2.0 * var * dt), -(b + a).powi(2) / (2.0 * var * dt));
    let top = e1.max(e2);
    let (w1, w2) = ((e1 - top).exp(), (e2 - top).exp());
    let norm = w1 + w2;
    let mass = |s: f64| {
        let r = s / dt;
        let sd = (var * s * (dt - s) / dt).sqrt();
        let band = |a1: f64, b1: f64| {
            let m = a1 + r * (b1 - a1);
            normal_cdf((hi - m) / sd) - normal_cdf((lo - m) / sd)
        };
        (w1 * (band(a, b) + band(-a, -b)) + w2 * (band(a, -b) + band(-a, b))) / norm
    };
    let half = 0.5 * dt;
    let mut total = 0.0;
    for (x, w) in GL8_X.iter().zip(&GL8_W) {
        total += w * (mass(half - half * x) + mass(half + half * x));
    }
    total * half
}

/// Band `[lo, lo + eps]` centred on `v`, pushed up to start at 0 near 0.
pub fn centred_band(v: f64, eps: f64) -> (f64, f64) {
    let lo = (v - 0.5 * eps).max(0.0);
    (lo, lo + eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn tent_path_has_local_time_two() {
        let dt = 1e-4;
        let n = (2.0 / dt) as usize;
        let vals: Vec<f64> = (0..=n).map(|k| { let t = k as f64 * dt; if t <= 1.0 { t } else { 2.0 - t } }).collect();
        let path = GridPath::new(dt, vals).unwrap();
        let levels: Vec<f64> = (1..9).map(|k| k as f64 * 0.1).collect();
        for l in local_time_field(&path, &levels, 0.01).unwrap() {
            assert!((l - 2.0).abs() < 0.05, "{l}");
        }
        assert!(local_time_field(&path, &levels, 1e-5).is_err());
        let r = occupation_residual(&path, 0.01, |_| 1.0).unwrap();
        assert!(r < 0.01 * path.t_max());
    }

    #[test]
    fn bridge_band_time_sums_to_dt() {
        for (a, b) in [(0.0, 0.0), (0.1, 0.05), (0.02, 0.3)] {
            let t = reflected_bridge_band_time(a, b, 1e-3, 4.0, 0.0, 10.0);
            assert!((t - 1e-3).abs() < 1e-9, "{a} {b}: {t}");
            let split = reflected_bridge_band_time(a, b, 1e-3, 4.0, 0.0, 0.07) + reflected_bridge_band_time(a, b, 1e-3, 4.0, 0.07, 10.0);
            assert!((split - 1e-3).abs() < 1e-9);
        }
    }

    #[test]
    fn refinement_keeps_grid_points() {
        let p = GridPath::new(0.1, vec![0.0, 1.0, 0.5]).unwrap();
        let r = refine_midpoints(&p, 1.0, &mut stream_rng(0, 0));
        assert_eq!(r.len(), 5);
        assert_eq!((r.values[0], r.values[2], r.values[4]), (0.0, 1.0, 0.5));
    }
}

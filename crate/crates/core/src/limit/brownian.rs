use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::GridPath;
use crate::error::{Error, Result};

/// Minimum of a Brownian bridge from `a` to `b` with total variance `var`,
/// from a uniform `u` in `(0, 1]`.
#[inline]
pub fn bridge_min(a: f64, b: f64, var: f64, u: f64) -> f64 {
    let d = b - a;
    0.5 * (a + b - (d * d - 2.0 * var * u.ln()).sqrt())
}

/// `X = sqrt(2 beta) B + a t`, its height `H = (X - min X) / beta` and
/// `ell = -min X`, all on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianHeight {
    pub x: GridPath,
    pub h: GridPath,
    pub ell: GridPath,
}

/// Simulates the driving path on the grid. The running minimum includes the
/// exact minimum of each Brownian bridge between grid points, so `ell` and
/// `H` have the continuum law at every grid time.
pub fn simulate_brownian_height<R: Rng + ?Sized>(beta: f64, a: f64, dt: f64, t_max: f64, rng: &mut R) -> Result<BrownianHeight> {
    if !(beta > 0.0) || !(dt > 0.0) || !(t_max >= 0.0) {
        return Err(Error::InvalidArgument(format!("need beta > 0, dt > 0, t_max >= 0 (got {beta}, {dt}, {t_max})")));
    }
    let n = GridPath::points(dt, t_max);
    let var = 2.0 * beta * dt;
    let sd = var.sqrt();
    let (mut x, mut h, mut ell) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut cur, mut min) = (0.0f64, 0.0f64);
    x.push(0.0);
    h.push(0.0);
    ell.push(0.0);
    for _ in 1..n {
        let next = cur + a * dt + sd * rng.sample::<f64, _>(StandardNormal);
        let u: f64 = 1.0 - rng.random::<f64>();
        min = min.min(bridge_min(cur, next, var, u));
        cur = next;
        x.push(cur);
        h.push((cur - min) / beta);
        ell.push(-min);
    }
    Ok(BrownianHeight { x: GridPath::new(dt, x)?, h: GridPath::new(dt, h)?, ell: GridPath::new(dt, ell)? })
}

/// Exact draw of `(H_t, ell_t)` at a single time `t`.
pub fn sample_height_at<R: Rng + ?Sized>(beta: f64, a: f64, t: f64, rng: &mut R) -> (f64, f64) {
    let var = 2.0 * beta * t;
    let end = a * t + var.sqrt() * rng.sample::<f64, _>(StandardNormal);
    let m = bridge_min(0.0, end, var, 1.0 - rng.random::<f64>()).min(0.0);
    ((end - m) / beta, -m)
}

/// `P(-min_{s <= t} X_s <= m)` for `X = sigma B + a s`.
pub fn running_min_cdf(m: f64, sigma: f64, a: f64, t: f64) -> f64 {
    use crate::stats::normal_cdf;
    if m < 0.0 {
        return 0.0;
    }
    let s = sigma * t.sqrt();
    let tail = (-2.0 * a * m / (sigma * sigma)).exp() * normal_cdf((-m + a * t) / s);
    (normal_cdf((m + a * t) / s) - tail).clamp(0.0, 1.0)
}

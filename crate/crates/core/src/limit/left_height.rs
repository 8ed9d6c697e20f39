//! Left-height processes `cevH = H + F(U)(ell)` and their terminal local
//! times.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::brownian::{bridge_min, sample_height_at};
use super::grid::{FirstPassage, GridPath, Interpolation};
use super::local_time::{centred_band, reflected_bridge_band_time};
use crate::error::{Error, Result};
use crate::family::AdmissibleMechanism;

/// `U^j_v = x_j + sum_{i != j} alpha_ij C^i_v + delta_j v`, with `C^i` the
/// trapezoid integral of `z[i]`.
pub fn build_u(m: &AdmissibleMechanism, z: &[GridPath]) -> Result<Vec<GridPath>> {
    m.validate()?;
    let n = m.n_types();
    if z.len() != n {
        return Err(Error::InvalidArgument(format!("need {n} profile paths")));
    }
    let dv = z[0].dt;
    let len = z[0].len();
    if z.iter().any(|p| p.len() != len || p.dt != dv) {
        return Err(Error::InvalidArgument("profile paths must share one grid".into()));
    }
    let c: Vec<Vec<f64>> = z
        .iter()
        .map(|p| {
            let mut acc = 0.0;
            let mut out = Vec::with_capacity(len);
            out.push(0.0);
            for w in p.values.windows(2) {
                acc += 0.5 * (w[0] + w[1]) * dv;
                out.push(acc);
            }
            out
        })
        .collect();
    (0..n)
        .map(|j| {
            let vals = (0..len)
                .map(|k| m.x[j] + m.delta[j] * k as f64 * dv + (0..n).filter(|&i| i != j).map(|i| m.alpha[i][j] * c[i][k]).sum::<f64>())
                .collect();
            GridPath::new(dv, vals)
        })
        .collect()
}

/// One simulated left-height path with its pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeftHeightPath {
    pub h: GridPath,
    pub ell: GridPath,
    /// `J = F(U)(ell)`.
    pub j: GridPath,
    pub cev_h: GridPath,
    /// `false` if `ell` never passed `U(0)`, so `J` is identically 0.
    pub drift_active: bool,
}

/// Simulates `H`, `ell` for `X = sqrt(2 beta) B + a t` (exact bridge minima)
/// and sets `cevH = H + F(U)(ell)`. Fails if `ell` outruns `U`.
pub fn simulate_left_height<R: Rng + ?Sized>(beta: f64, a: f64, u: &GridPath, dt: f64, t_max: f64, rng: &mut R) -> Result<LeftHeightPath> {
    let bh = super::brownian::simulate_brownian_height(beta, a, dt, t_max, rng)?;
    let mut fp = FirstPassage::new(u, Interpolation::Linear)?;
    let mut j = Vec::with_capacity(bh.ell.len());
    for &l in &bh.ell.values {
        j.push(fp.eval(l).ok_or(Error::BeyondHorizon { what: format!("first passage of U above {l}"), horizon: u.last() })?);
    }
    let cev: Vec<f64> = bh.h.values.iter().zip(&j).map(|(h, j)| h + j).collect();
    let drift_active = bh.ell.last() > u.values[0];
    Ok(LeftHeightPath { h: bh.h, ell: bh.ell, j: GridPath::new(dt, j)?, cev_h: GridPath::new(dt, cev)?, drift_active })
}

/// Forward Stieltjes integration of `dJ = d(max(ell, x)) / U'(J)`, the
/// differential form of `J = F(U)(ell)`; `slope(v)` is `U'(v)`. Each Euler
/// step advances `J` by at most `dj`, so a large `ell` increment is split
/// rather than taken at a single slope.
pub fn j_term_stieltjes(ell: &GridPath, x: f64, dj: f64, slope: impl Fn(f64) -> f64) -> GridPath {
    let mut j = 0.0;
    let mut out = Vec::with_capacity(ell.len());
    out.push(0.0);
    for w in ell.values.windows(2) {
        let mut dl = w[1].max(x) - w[0].max(x);
        while dl > 0.0 {
            let s = slope(j);
            let step = dl.min(dj * s);
            j += step / s;
            dl -= step;
        }
        out.push(j);
    }
    GridPath { dt: ell.dt, values: out }
}

/// Exact draw of `H_t + max(0, ell_t - x) / delta`, the left height when
/// `U` is affine.
pub fn sample_affine_left_height<R: Rng + ?Sized>(beta: f64, a: f64, x: f64, delta: f64, t: f64, rng: &mut R) -> f64 {
    let (h, l) = sample_height_at(beta, a, t, rng);
    h + (l - x).max(0.0) / delta
}

/// Settings for [`terminal_local_time`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TerminalConfig {
    pub dt: f64,
    pub eps: f64,
    /// Levels above `cap` are never observed.
    pub cap: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TerminalLocalTime {
    pub levels: Vec<f64>,
    /// Conditional-expectation estimate given the grid.
    pub smoothed: Vec<f64>,
    /// Grid count estimate in the same centred bands.
    pub counted: Vec<f64>,
    /// Simulated time after excision.
    pub elapsed: f64,
}

/// Local times `L^v_inf(cevH)` at `levels`, for `cevH = H + F(U)(ell)`.
///
/// Excursions above `cap` are excised: when `cevH` exceeds it, `H` is put
/// back to `cap - J`. `J` is constant off the zero set of `H`, so by the
/// strong Markov property the path below `cap` keeps its law. The run stops
/// once `J >= cap`, after which `cevH` never returns below `cap`.
pub fn terminal_local_time<R: Rng + ?Sized>(
    beta: f64,
    a: f64,
    u: &GridPath,
    levels: &[f64],
    cfg: &TerminalConfig,
    rng: &mut R,
) -> Result<TerminalLocalTime> {
    if levels.iter().any(|&v| v + cfg.eps > cfg.cap) {
        return Err(Error::InvalidArgument(format!("levels must sit below cap {} minus the band", cfg.cap)));
    }
    let dt = cfg.dt;
    let var_x = 2.0 * beta * dt;
    let sd = var_x.sqrt();
    let var_h = 2.0 / beta; // diffusion of H per unit time
    let bands: Vec<(f64, f64)> = levels.iter().map(|&v| centred_band(v, cfg.eps)).collect();
    let mut smoothed = vec![0.0; levels.len()];
    let mut counted = vec![0u64; levels.len()];
    let mut fp = FirstPassage::new(u, Interpolation::Linear)?;
    let (mut x, mut min) = (0.0f64, 0.0f64);
    let mut j = fp.eval(0.0).ok_or(Error::BeyondHorizon { what: "U at 0".into(), horizon: u.last() })?;
    let mut steps = 0usize;
    while j < cfg.cap {
        if steps >= cfg.max_steps {
            return Err(Error::ResourceLimit { what: "terminal local time steps".into(), budget: cfg.max_steps });
        }
        steps += 1;
        let next = x + a * dt + sd * rng.sample::<f64, _>(StandardNormal);
        let new_min = min.min(bridge_min(x, next, var_x, 1.0 - rng.random::<f64>()));
        let new_j = fp.eval(-new_min).ok_or(Error::BeyondHorizon { what: format!("first passage of U above {}", -new_min), horizon: u.last() })?;
        let (ha, hb) = ((x - min) / beta, (next - new_min) / beta);
        let jm = 0.5 * (j + new_j);
        for (k, &(lo, hi)) in bands.iter().enumerate() {
            smoothed[k] += reflected_bridge_band_time(ha, hb, dt, var_h, lo - jm, hi - jm);
            let c = hb + new_j;
            if c > lo && c <= hi {
                counted[k] += 1;
            }
        }
        x = if hb + new_j > cfg.cap { new_min + beta * (cfg.cap - new_j).max(0.0) } else { next };
        min = new_min;
        j = new_j;
    }
    Ok(TerminalLocalTime {
        levels: levels.to_vec(),
        smoothed: smoothed.iter().map(|s| s / cfg.eps).collect(),
        counted: counted.iter().map(|&c| c as f64 * dt / cfg.eps).collect(),
        elapsed: steps as f64 * dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn u_is_affine_without_cross_terms() {
        let m = AdmissibleMechanism::one_type(0.5, 0.0, 2.0, 0.3);
        let z = vec![GridPath::new(0.01, vec![5.0; 101]).unwrap()];
        let u = build_u(&m, &z).unwrap();
        for (k, v) in u[0].values.iter().enumerate() {
            assert!((v - (0.3 + 2.0 * 0.01 * k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn affine_u_gives_closed_form_drift() {
        let u = GridPath::new(1e-3, (0..=20_000).map(|k| 0.2 + 1.5 * k as f64 * 1e-3).collect()).unwrap();
        let p = simulate_left_height(0.5, 0.0, &u, 1e-3, 1.0, &mut stream_rng(5, 0)).unwrap();
        for k in 0..p.ell.len() {
            let want = (p.ell.values[k] - 0.2).max(0.0) / 1.5;
            assert!((p.j.values[k] - want).abs() < 1e-9);
            assert!(p.cev_h.values[k] >= p.h.values[k]);
        }
        let st = j_term_stieltjes(&p.ell, 0.2, 1e-3, |_| 1.5);
        for (a, b) in st.values.iter().zip(&p.j.values) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn terminal_local_time_at_zero_is_initial_mass() {
        // L^0 = x for the left height; check the smallest band on average
        let u = GridPath::new(1e-3, (0..=5000).map(|k| 0.5 + k as f64 * 1e-3).collect()).unwrap();
        let cfg = TerminalConfig { dt: 1e-4, eps: 0.02, cap: 0.5, max_steps: 10_000_000 };
        let mut rng = stream_rng(9, 0);
        let n = 400;
        let mean: f64 = (0..n).map(|_| terminal_local_time(0.5, 0.0, &u, &[0.0], &cfg, &mut rng).unwrap().smoothed[0]).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.05, "{mean}");
    }
}

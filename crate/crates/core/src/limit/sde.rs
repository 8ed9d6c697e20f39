use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::GridPath;
use crate::error::{Error, Result};
use crate::family::AdmissibleMechanism;

/// A multitype trajectory on a grid, with truncation diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub z: Vec<GridPath>,
    /// Component-steps at which the scheme produced a negative value.
    pub clamped: u64,
    /// Component-steps taken.
    pub steps: u64,
}

impl Trajectory {
    pub fn clamp_fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.clamped as f64 / self.steps as f64
        }
    }

    /// `Z^j` at grid time `v` (types numbered from 1).
    pub fn at(&self, j: usize, v: f64) -> Option<f64> {
        self.z[j - 1].at(v)
    }
}

/// Euler-Maruyama with full truncation for
/// `dZ^j = sqrt(2 beta_j Z^j) dW^j + (delta_j + sum_i alpha_ij Z^i) dv`.
///
/// Coefficients use the positive part of the state; the recorded path is the
/// positive part too.
pub fn mcbi_sde<R: Rng + ?Sized>(m: &AdmissibleMechanism, dt: f64, v_max: f64, rng: &mut R) -> Result<Trajectory> {
    m.validate()?;
    if !m.is_brownian() {
        return Err(Error::InvalidMechanism("the square-root SDE needs a Brownian mechanism".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let n = m.n_types();
    let points = GridPath::points(dt, v_max);
    let sq = dt.sqrt();
    let mut state = m.x.clone();
    let mut paths: Vec<Vec<f64>> = (0..n).map(|j| {
        let mut v = Vec::with_capacity(points);
        v.push(m.x[j]);
        v
    }).collect();
    let mut pos = state.clone();
    let (mut clamped, mut steps) = (0u64, 0u64);
    for _ in 1..points {
        for j in 0..n {
            pos[j] = state[j].max(0.0);
        }
        for j in 0..n {
            let drift = m.delta[j] + (0..n).map(|i| m.alpha[i][j] * pos[i]).sum::<f64>();
            let noise: f64 = rng.sample(StandardNormal);
            state[j] += drift * dt + (2.0 * m.beta[j] * pos[j]).sqrt() * sq * noise;
            steps += 1;
            if state[j] < 0.0 {
                clamped += 1;
            }
            paths[j].push(state[j].max(0.0));
        }
    }
    let z = paths.into_iter().map(|v| GridPath::new(dt, v)).collect::<Result<_>>()?;
    Ok(Trajectory { z, clamped, steps })
}

/// `E[Z_v]`, solving `m' = delta + A^T m`, `m(0) = x` with classical RK4.
pub fn mean_ode(m: &AdmissibleMechanism, v: f64) -> Vec<f64> {
    let n = m.n_types();
    let f = |y: &[f64]| -> Vec<f64> { (0..n).map(|j| m.delta[j] + (0..n).map(|i| m.alpha[i][j] * y[i]).sum::<f64>()).collect() };
    let steps = ((v / 1e-4).ceil() as usize).max(1);
    let h = v / steps as f64;
    let mut y = m.x.clone();
    for _ in 0..steps {
        let k1 = f(&y);
        let y2: Vec<f64> = (0..n).map(|j| y[j] + 0.5 * h * k1[j]).collect();
        let k2 = f(&y2);
        let y3: Vec<f64> = (0..n).map(|j| y[j] + 0.5 * h * k2[j]).collect();
        let k3 = f(&y3);
        let y4: Vec<f64> = (0..n).map(|j| y[j] + h * k3[j]).collect();
        let k4 = f(&y4);
        for j in 0..n {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    y
}

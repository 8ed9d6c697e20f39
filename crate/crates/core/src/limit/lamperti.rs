//! Time-change construction `Z^j_v = x_j + sum_i X^{i,j}(C^i_v) + Y^j_v`,
//! `C^i_v = int_0^v Z^i`.

use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::GridPath;
use super::sde::Trajectory;
use crate::error::{Error, Result};
use crate::family::AdmissibleMechanism;
use crate::rng::SimRng;

/// A driving path read at arbitrary nonnegative times.
pub trait DrivingPath {
    fn value_at(&mut self, t: f64) -> Result<f64>;
}

/// `t -> slope * t`.
pub struct Line(pub f64);

impl DrivingPath for Line {
    fn value_at(&mut self, t: f64) -> Result<f64> {
        Ok(self.0 * t)
    }
}

/// A fixed grid path; reads past its horizon fail.
pub struct FixedGrid(pub GridPath);

impl DrivingPath for FixedGrid {
    fn value_at(&mut self, t: f64) -> Result<f64> {
        self.0.at(t).ok_or(Error::BeyondHorizon { what: format!("driving path at time {t}"), horizon: self.0.t_max() })
    }
}

/// `sigma B_t + drift t` on a grid that is drawn lazily from its own stream.
/// With `extend == false` reads past `horizon` fail instead of extending.
pub struct BrownianDriver {
    sigma: f64,
    drift: f64,
    dt: f64,
    values: Vec<f64>,
    rng: SimRng,
    extend: bool,
    horizon: f64,
}

impl BrownianDriver {
    pub fn new(sigma: f64, drift: f64, dt: f64, rng: SimRng, extend: bool, horizon: f64) -> Self {
        BrownianDriver { sigma, drift, dt, values: vec![0.0], rng, extend, horizon }
    }

    pub fn grid(&self) -> GridPath {
        GridPath { dt: self.dt, values: self.values.clone() }
    }
}

impl DrivingPath for BrownianDriver {
    fn value_at(&mut self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::InvalidArgument(format!("negative time {t}")));
        }
        if !self.extend && t > self.horizon {
            return Err(Error::BeyondHorizon { what: format!("driving path at time {t}"), horizon: self.horizon });
        }
        let s = t / self.dt;
        let k = s.floor() as usize;
        let sd = self.sigma * self.dt.sqrt();
        while self.values.len() < k + 2 {
            let last = *self.values.last().expect("starts at 0");
            let z: f64 = self.rng.sample(StandardNormal);
            self.values.push(last + self.drift * self.dt + sd * z);
        }
        let w = s - k as f64;
        Ok(self.values[k] * (1.0 - w) + self.values[k + 1] * w)
    }
}

/// Driving paths of a Brownian mechanism: `sqrt(2 beta_j) B + alpha_jj t`
/// on the diagonal (grid step `dt`, stream `rngs[j]`) and lines
/// `alpha_ij t` off it.
pub fn brownian_drivers(m: &AdmissibleMechanism, dt: f64, rngs: Vec<SimRng>, extend: bool, horizon: f64) -> Vec<Vec<Box<dyn DrivingPath>>> {
    let n = m.n_types();
    let mut rngs = rngs.into_iter();
    let mut out: Vec<Vec<Box<dyn DrivingPath>>> = Vec::with_capacity(n);
    let mut diag: Vec<Option<Box<dyn DrivingPath>>> = (0..n)
        .map(|j| {
            let r = rngs.next().expect("one stream per type");
            Some(Box::new(BrownianDriver::new((2.0 * m.beta[j]).sqrt(), m.alpha[j][j], dt, r, extend, horizon)) as Box<dyn DrivingPath>)
        })
        .collect();
    for i in 0..n {
        let row: Vec<Box<dyn DrivingPath>> = (0..n)
            .map(|j| if i == j { diag[j].take().expect("once") } else { Box::new(Line(m.alpha[i][j])) as Box<dyn DrivingPath> })
            .collect();
        out.push(row);
    }
    out
}

/// Forward-Euler solution: `C^i` advances by `Z^i dv`, then `Z` is read
/// from the driving paths `x[i][j]` at the new `C`. Negative values are
/// clamped to 0 and counted.
pub fn lamperti_solve(m: &AdmissibleMechanism, x: &mut [Vec<Box<dyn DrivingPath>>], dv: f64, v_max: f64) -> Result<Trajectory> {
    m.validate()?;
    let n = m.n_types();
    if x.len() != n || x.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument(format!("need {n}x{n} driving paths")));
    }
    if !(dv > 0.0) {
        return Err(Error::InvalidArgument(format!("dv = {dv} must be positive")));
    }
    let points = GridPath::points(dv, v_max);
    let mut z = m.x.clone();
    let mut c = vec![0.0; n];
    let mut paths: Vec<Vec<f64>> = z.iter().map(|&v| vec![v]).collect();
    let (mut clamped, mut steps) = (0u64, 0u64);
    for k in 1..points {
        for i in 0..n {
            c[i] += z[i] * dv;
        }
        let v = k as f64 * dv;
        for j in 0..n {
            let mut val = m.x[j] + m.delta[j] * v;
            for i in 0..n {
                val += x[i][j].value_at(c[i])?;
            }
            steps += 1;
            if val < 0.0 {
                clamped += 1;
                val = 0.0;
            }
            z[j] = val;
            paths[j].push(val);
        }
    }
    Ok(Trajectory { z: paths.into_iter().map(|p| GridPath::new(dv, p)).collect::<Result<_>>()?, clamped, steps })
}

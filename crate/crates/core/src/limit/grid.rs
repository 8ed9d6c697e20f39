use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values on the uniform grid `0, dt, 2 dt, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPath {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl GridPath {
    pub fn new(dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid step {dt} must be positive")));
        }
        if values.is_empty() {
            return Err(Error::InvalidArgument("grid path needs at least one value".into()));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at grid index {k}")));
        }
        Ok(GridPath { dt, values })
    }

    /// Number of grid points for horizon `t_max`: `floor(t_max / dt) + 1`.
    pub fn points(dt: f64, t_max: f64) -> usize {
        (t_max / dt + 1e-9).floor() as usize + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn t_max(&self) -> f64 {
        self.dt * (self.values.len() - 1) as f64
    }

    pub fn last(&self) -> f64 {
        *self.values.last().expect("nonempty")
    }

    /// Linear interpolation; `None` beyond the horizon.
    pub fn at(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return None;
        }
        let s = t / self.dt;
        let k = s.floor() as usize;
        if k + 1 >= self.values.len() {
            return (s <= (self.values.len() - 1) as f64 + 1e-9).then(|| self.last());
        }
        let w = s - k as f64;
        Some(self.values[k] * (1.0 - w) + self.values[k + 1] * w)
    }

    /// Value at the grid index `floor(t / dt)`.
    pub fn at_index_of(&self, t: f64) -> Option<f64> {
        self.values.get((t / self.dt + 1e-9).floor() as usize).copied()
    }

    pub fn is_nondecreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }

    /// Smallest forward difference quotient.
    pub fn min_slope(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]) / self.dt).fold(f64::INFINITY, f64::min)
    }
}

/// How a grid path is read between grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Piecewise linear, for continuous paths.
    #[default]
    Linear,
    /// Right-continuous piecewise constant.
    Step,
}

/// Evaluates `F(f)(t) = inf{s : f(s) > t}` for a nondecreasing grid path.
///
/// Queries in nondecreasing `t` cost O(1) amortised.
pub struct FirstPassage<'a> {
    f: &'a GridPath,
    k: usize,
    mode: Interpolation,
}

impl<'a> FirstPassage<'a> {
    pub fn new(f: &'a GridPath, mode: Interpolation) -> Result<Self> {
        if !f.is_nondecreasing(0.0) {
            return Err(Error::InvalidArgument("first passage needs a nondecreasing path".into()));
        }
        Ok(FirstPassage { f, k: 0, mode })
    }

    /// `None` when `t >= sup f` on the horizon.
    pub fn eval(&mut self, t: f64) -> Option<f64> {
        let v = &self.f.values;
        if self.k > 0 && v[self.k] > t {
            self.k = 0;
        }
        match self.mode {
            Interpolation::Step => {
                while self.k < v.len() && v[self.k] <= t {
                    self.k += 1;
                }
                (self.k < v.len()).then(|| self.k as f64 * self.f.dt)
            }
            Interpolation::Linear => {
                if v[0] > t {
                    return Some(0.0);
                }
                while self.k + 1 < v.len() && v[self.k + 1] <= t {
                    self.k += 1;
                }
                if self.k + 1 >= v.len() {
                    return None;
                }
                let (a, b) = (v[self.k], v[self.k + 1]);
                Some((self.k as f64 + (t - a) / (b - a)) * self.f.dt)
            }
        }
    }
}

/// `F(f)` tabulated on the level grid `0, dl, ..., (n - 1) dl`.
pub fn first_passage_inverse(f: &GridPath, dl: f64, n: usize, mode: Interpolation) -> Result<GridPath> {
    let mut fp = FirstPassage::new(f, mode)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dl;
        out.push(fp.eval(t).ok_or(Error::BeyondHorizon { what: format!("first passage above level {t}"), horizon: f.last() })?);
    }
    GridPath::new(dl, out)
}

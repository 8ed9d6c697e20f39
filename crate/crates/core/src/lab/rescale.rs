//! Discrete encodings under the scalings of their limit theorems.

use serde::{Deserialize, Serialize};

use crate::encodings::{Profiles, TypeEncoding};

/// Which discrete process a [`RescaledPath`] comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// `D^j`, values `/ p`, time `/ (p gamma)`.
    Lukasiewicz,
    /// Running minimum of `D^j`, as `D^j`.
    RunningMin,
    /// `H^j`, values `/ gamma`, time `/ (p gamma)`.
    Height,
    /// `cevH^j`, as `H^j`.
    LeftHeight,
    /// `Z^j`, values `/ p`, time `/ gamma`.
    Profile,
    /// `I^j`, as `Z^j`.
    Immigrants,
    /// `C^j`, values `/ (p gamma)`, time `/ gamma`.
    Cumulative,
}

impl Source {
    /// `(value divisor, time divisor)` at scale `(p, gamma)`.
    pub fn scales(self, p: u32, gamma: u64) -> (f64, f64) {
        let (p, g) = (p as f64, gamma as f64);
        match self {
            Source::Lukasiewicz | Source::RunningMin => (p, p * g),
            Source::Height | Source::LeftHeight => (g, p * g),
            Source::Profile | Source::Immigrants => (p, g),
            Source::Cumulative => (p * g, g),
        }
    }
}

/// `t -> values[floor(t / dt)]` for a discrete path read on its natural
/// time scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledPath {
    pub source: Source,
    pub j: usize,
    pub p: u32,
    pub gamma_p: u64,
    /// Rescaled time of one discrete step.
    pub dt: f64,
    pub values: Vec<f64>,
}

impl RescaledPath {
    pub fn new<T: Copy + Into<f64>>(source: Source, j: usize, p: u32, gamma_p: u64, raw: &[T]) -> Self {
        let (vs, ts) = source.scales(p, gamma_p);
        RescaledPath { source, j, p, gamma_p, dt: 1.0 / ts, values: raw.iter().map(|&x| x.into() / vs).collect() }
    }

    pub fn lukasiewicz(t: &TypeEncoding, p: u32, gamma_p: u64) -> Self {
        let raw: Vec<f64> = t.lukasiewicz.iter().map(|&x| x as f64).collect();
        Self::new(Source::Lukasiewicz, t.j, p, gamma_p, &raw)
    }

    pub fn running_min(t: &TypeEncoding, p: u32, gamma_p: u64) -> Self {
        let raw: Vec<f64> = t.running_min.iter().map(|&x| x as f64).collect();
        Self::new(Source::RunningMin, t.j, p, gamma_p, &raw)
    }

    pub fn height(t: &TypeEncoding, p: u32, gamma_p: u64) -> Self {
        Self::new(Source::Height, t.j, p, gamma_p, &t.height)
    }

    pub fn left_height(j: usize, cev_h: &[u32], p: u32, gamma_p: u64) -> Self {
        Self::new(Source::LeftHeight, j, p, gamma_p, cev_h)
    }

    pub fn profile(pr: &Profiles, j: usize, p: u32, gamma_p: u64) -> Self {
        let raw: Vec<f64> = pr.z[j - 1].iter().map(|&x| x as f64).collect();
        Self::new(Source::Profile, j, p, gamma_p, &raw)
    }

    pub fn immigrants(pr: &Profiles, j: usize, p: u32, gamma_p: u64) -> Self {
        let raw: Vec<f64> = pr.immigrants[j - 1].iter().map(|&x| x as f64).collect();
        Self::new(Source::Immigrants, j, p, gamma_p, &raw)
    }

    pub fn cumulative(pr: &Profiles, j: usize, p: u32, gamma_p: u64) -> Self {
        let raw: Vec<f64> = pr.c[j - 1].iter().map(|&x| x as f64).collect();
        Self::new(Source::Cumulative, j, p, gamma_p, &raw)
    }

    /// Discrete index read at rescaled time `t`.
    pub fn index(&self, t: f64) -> usize {
        (t / self.dt + 1e-9).floor() as usize
    }

    pub fn at(&self, t: f64) -> Option<f64> {
        self.values.get(self.index(t)).copied()
    }
}

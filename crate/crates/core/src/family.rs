//! Admissible branching mechanisms and the scaling families of offspring
//! ensembles that approximate them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::OffspringEnsemble;
use crate::law::Law;

/// Jump part of a branching mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LevyPart {
    #[default]
    None,
    /// `psi(lambda) = c lambda^alpha`.
    Stable { alpha: f64, c: f64 },
}

/// Parameters of the multitype limit system.
///
/// `alpha[i][j]` for `i != j` is the cross rate, `alpha[j][j] <= 0` the
/// drift of the type-`j` driving walk (so `psi_j` has linear coefficient
/// `-alpha[j][j]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibleMechanism {
    pub beta: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub x: Vec<f64>,
    #[serde(default)]
    pub levy: Vec<LevyPart>,
}

impl AdmissibleMechanism {
    /// Single type with no cross terms.
    pub fn one_type(beta: f64, a: f64, delta: f64, x: f64) -> Self {
        AdmissibleMechanism { beta: vec![beta], alpha: vec![vec![a]], delta: vec![delta], x: vec![x], levy: vec![] }
    }

    pub fn n_types(&self) -> usize {
        self.beta.len()
    }

    pub fn levy(&self, j: usize) -> LevyPart {
        self.levy.get(j).copied().unwrap_or_default()
    }

    pub fn is_brownian(&self) -> bool {
        (0..self.n_types()).all(|j| self.levy(j) == LevyPart::None)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_types();
        let bad = |m: String| Err(Error::InvalidMechanism(m));
        if n == 0 {
            return bad("no types".into());
        }
        if self.alpha.len() != n || self.alpha.iter().any(|r| r.len() != n) || self.delta.len() != n || self.x.len() != n {
            return bad(format!("shape mismatch for {n} types"));
        }
        if !self.levy.is_empty() && self.levy.len() != n {
            return bad(format!("levy has {} entries, expected {n}", self.levy.len()));
        }
        for j in 0..n {
            let finite = self.beta[j].is_finite() && self.delta[j].is_finite() && self.x[j].is_finite();
            if !finite || self.alpha[j].iter().any(|a| !a.is_finite()) {
                return bad(format!("type {}: non-finite parameter", j + 1));
            }
            if self.delta[j] <= 0.0 {
                return bad(format!("delta_{} = {} must be > 0", j + 1, self.delta[j]));
            }
            if self.x[j] < 0.0 {
                return bad(format!("x_{} = {} must be >= 0", j + 1, self.x[j]));
            }
            if self.beta[j] < 0.0 {
                return bad(format!("beta_{} = {} must be >= 0", j + 1, self.beta[j]));
            }
            if self.alpha[j][j] > 0.0 {
                return bad(format!("alpha_{0}{0} = {1} must be <= 0", j + 1, self.alpha[j][j]));
            }
            for i in 0..n {
                if i != j && self.alpha[i][j] < 0.0 {
                    return bad(format!("alpha_{}{} = {} must be >= 0", i + 1, j + 1, self.alpha[i][j]));
                }
            }
            match self.levy(j) {
                LevyPart::None if self.beta[j] <= 0.0 => {
                    return bad(format!("Brownian type {} needs beta > 0", j + 1));
                }
                LevyPart::Stable { alpha, c } if !(alpha > 1.0 && alpha < 2.0 && c > 0.0) => {
                    return bad(format!("type {}: stable part needs alpha in (1, 2) and c > 0", j + 1));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// `true` when every cross rate vanishes.
    pub fn is_decoupled(&self) -> bool {
        let n = self.n_types();
        (0..n).all(|i| (0..n).all(|j| i == j || self.alpha[i][j] == 0.0))
    }
}

/// Scale-indexed family of ensembles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalingFamily {
    Brownian { mechanism: AdmissibleMechanism },
    Stable { alpha: f64, c: Vec<f64> },
}

impl ScalingFamily {
    /// Level scale `gamma_p`.
    pub fn gamma(&self, p: u32) -> u64 {
        match self {
            ScalingFamily::Brownian { .. } => p as u64,
            ScalingFamily::Stable { alpha, .. } => stable_gamma(*alpha, p),
        }
    }

    pub fn ensemble(&self, p: u32) -> Result<OffspringEnsemble> {
        match self {
            ScalingFamily::Brownian { mechanism } => brownian_family(mechanism, p).map(|(e, _)| e),
            ScalingFamily::Stable { alpha, c } => stable_family(c, *alpha, p).map(|(e, _)| e),
        }
    }

    pub fn n_types(&self) -> usize {
        match self {
            ScalingFamily::Brownian { mechanism } => mechanism.n_types(),
            ScalingFamily::Stable { c, .. } => c.len(),
        }
    }
}

/// `floor(p^(alpha - 1))`, at least 1.
pub fn stable_gamma(alpha: f64, p: u32) -> u64 {
    ((p as f64).powf(alpha - 1.0) + 1e-9).floor().max(1.0) as u64
}

/// Law on `{0, 1, K}` with the given mean and variance, `K >= 2` minimal.
/// Means above 1 are reachable only while the variance is large enough.
///
/// This is a mixture of `dirac(1)` and a two-point law on `{0, K}`; both
/// moments are matched exactly.
pub fn three_point_law(mean: f64, variance: f64) -> Result<Law> {
    let name = || format!("three-point law with mean {mean}, variance {variance}");
    if !(mean > 0.0 && mean.is_finite() && variance.is_finite()) {
        return Err(Error::InvalidLaw { name: name(), reason: "mean must be positive and finite".into() });
    }
    let second = variance + mean * mean - mean; // E[X(X-1)]
    if second <= 0.0 {
        return Err(Error::InvalidLaw {
            name: name(),
            reason: format!("variance must exceed m(1-m) = {}", mean * (1.0 - mean)),
        });
    }
    let k = (1.0 + second / mean).ceil().max(2.0);
    let c = second / (k * (k - 1.0));
    let b = mean - k * c;
    let a = 1.0 - b - c;
    // a >= 0 needs K <= E[X(X-1)] / (mean - 1) when mean > 1
    if a < -1e-12 || b < -1e-12 {
        return Err(Error::InvalidLaw { name: name(), reason: format!("no law on {{0, 1, {k}}} has these moments") });
    }
    let (a, b) = (a.max(0.0), b.max(0.0));
    let mut w = vec![0.0; k as usize + 1];
    w[0] = a;
    w[1] = b;
    w[k as usize] = c;
    Ok(Law::Explicit(w))
}

/// Ensemble at scale `p` for a Brownian mechanism, with `gamma_p = p`.
///
/// Diagonal laws have mean `1 + alpha_jj / p` and variance `2 beta_j`,
/// cross laws are `poisson(alpha_ij / p)`, immigration is
/// `poisson(delta_j)` and `k_j = round(x_j p)`.
pub fn brownian_family(m: &AdmissibleMechanism, p: u32) -> Result<(OffspringEnsemble, u64)> {
    m.validate()?;
    if !m.is_brownian() {
        return Err(Error::InvalidMechanism("brownian_family needs a mechanism without jump part".into()));
    }
    if p == 0 {
        return Err(Error::InvalidArgument("scale p must be positive".into()));
    }
    let n = m.n_types();
    let pf = p as f64;
    let mut mu = vec![vec![Law::Dirac(0); n]; n];
    for i in 0..n {
        for j in 0..n {
            mu[i][j] = if i == j {
                three_point_law(1.0 + m.alpha[j][j] / pf, 2.0 * m.beta[j])?
            } else if m.alpha[i][j] == 0.0 {
                Law::Dirac(0)
            } else {
                Law::Poisson(m.alpha[i][j] / pf)
            };
        }
    }
    let e = OffspringEnsemble {
        mu,
        nu: m.delta.iter().map(|&d| Law::Poisson(d)).collect(),
        roots: m.x.iter().map(|&x| (x * pf).round() as u64).collect(),
        convergence: true,
    };
    e.validate()?;
    Ok((e, p as u64))
}

/// Ensemble at scale `p` with critical `stable_tail(alpha, c_j)` diagonal
/// laws, no cross offspring, no immigration and `k_j = p` roots.
pub fn stable_family(c: &[f64], alpha: f64, p: u32) -> Result<(OffspringEnsemble, u64)> {
    if !(alpha > 1.0 && alpha < 2.0) {
        return Err(Error::InvalidArgument(format!("stable index {alpha} must lie in (1, 2)")));
    }
    if c.is_empty() || p == 0 {
        return Err(Error::InvalidArgument("need at least one type and p > 0".into()));
    }
    let n = c.len();
    let mut mu = vec![vec![Law::Dirac(0); n]; n];
    for j in 0..n {
        mu[j][j] = Law::StableTail { alpha, scale: c[j] };
    }
    let e = OffspringEnsemble { mu, nu: vec![Law::Dirac(0); n], roots: vec![p as u64; n], convergence: true };
    e.validate()?;
    Ok((e, stable_gamma(alpha, p)))
}

/// `g_n(s)`, the `n`-fold composition of the generating function.
pub fn iterate_generating_function(law: &Law, n: i64, s: f64) -> Result<f64> {
    law.gf_iterate(n, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A3Row {
    pub p: u32,
    pub j: usize,
    pub n: u64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A3Table {
    pub rows: Vec<A3Row>,
    /// Types whose values trend to 0.
    pub flagged: Vec<usize>,
}

/// Below this the value at the largest `p` is treated as 0.
pub const A3_FLOOR: f64 = 1e-3;

/// Tabulates `g_[delta gamma_p](0)` of each diagonal law.
///
/// A type is flagged when its value at the largest `p` is below
/// [`A3_FLOOR`], or when the values decrease strictly along `p_list` and
/// the last is under half the first.
pub fn check_a3(family: &ScalingFamily, delta: f64, p_list: &[u32]) -> Result<A3Table> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be > 0")));
    }
    let mut rows = Vec::new();
    for &p in p_list {
        let e = family.ensemble(p)?;
        let n = (delta * family.gamma(p) as f64).floor() as u64;
        for j in 0..family.n_types() {
            let value = e.mu[j][j].gf_iterate(n as i64, 0.0)?;
            rows.push(A3Row { p, j: j + 1, n, value });
        }
    }
    let flagged = (1..=family.n_types())
        .filter(|&j| {
            let v: Vec<f64> = rows.iter().filter(|r| r.j == j).map(|r| r.value).collect();
            match (v.first(), v.last()) {
                (Some(&first), Some(&last)) => {
                    last < A3_FLOOR || (v.len() > 1 && v.windows(2).all(|w| w[1] < w[0]) && last < 0.5 * first)
                }
                _ => false,
            }
        })
        .collect();
    Ok(A3Table { rows, flagged })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_point_moments_exact() {
        for (m, v) in [(1.0, 2.0), (1.0, 1.0), (0.99, 1.0), (0.5, 0.3), (1.01, 1.0), (1.5, 2.0)] {
            let law = three_point_law(m, v).unwrap();
            law.validate().unwrap();
            assert!((law.mean() - m).abs() < 1e-12);
            assert!((law.variance() - v).abs() < 1e-12);
        }
        assert_eq!(three_point_law(1.0, 1.0).unwrap(), Law::Explicit(vec![0.5, 0.0, 0.5]));
        assert!(three_point_law(0.5, 0.1).is_err());
        // mean 2, variance 0.5: K would need to be at least 3 and at most 2.5
        assert!(three_point_law(2.0, 0.5).is_err());
    }

    #[test]
    fn brownian_family_shapes() {
        let m = AdmissibleMechanism {
            beta: vec![1.0, 0.5],
            alpha: vec![vec![0.0, 0.0], vec![0.5, -1.0]],
            delta: vec![1.0, 2.0],
            x: vec![0.25, 0.0],
            levy: vec![],
        };
        let (e, g) = brownian_family(&m, 100).unwrap();
        assert_eq!(g, 100);
        assert_eq!(e.mu[0][1], Law::Dirac(0));
        assert_eq!(e.mu[1][0], Law::Poisson(0.005));
        assert!((e.mu[1][1].mean() - 0.99).abs() < 1e-12);
        assert_eq!(e.roots, vec![25, 0]);
        assert_eq!(e.nu, vec![Law::Poisson(1.0), Law::Poisson(2.0)]);
    }

    #[test]
    fn mechanism_validation() {
        let mut m = AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 1.0);
        m.validate().unwrap();
        m.delta[0] = 0.0;
        assert!(m.validate().is_err());
        let mut m = AdmissibleMechanism::one_type(0.5, 0.3, 1.0, 1.0);
        assert!(m.validate().is_err());
        m.alpha[0][0] = 0.0;
        m.beta[0] = 0.0;
        assert!(m.validate().is_err());
    }

    #[test]
    fn stable_gamma_values() {
        assert_eq!(stable_gamma(1.5, 500), 22);
        assert_eq!(stable_gamma(1.5, 100), 10);
        assert!(stable_family(&[0.5], 2.0, 10).is_err());
        let (e, _) = stable_family(&[0.5], 1.5, 10).unwrap();
        assert_eq!(e.mu[0][0].mean(), 1.0);
    }
}

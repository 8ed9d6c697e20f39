//! Offspring and immigration laws on `{0, 1, 2, ...}`.
//!
//! A [`Law`] is an immutable value. Sampling goes through a precomputed
//! [`LawSampler`] so that hot loops never re-derive tables, and the caller
//! always supplies the random stream.
//!
//! Laws are written in configs with a small grammar:
//! `dirac(3)`, `poisson(0.01)`, `geometric(0.5)`, `binomial(4,0.25)`,
//! `stable_tail(1.5,0.5)`, `explicit([0.2,0.5,0.3])`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Beta, Binomial, Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Tolerance on the total mass of an explicit pmf.
pub const PMF_SUM_TOL: f64 = 1e-12;

/// Tail mass below which tabulated heavy-tailed pmfs are cut.
pub const STABLE_TAIL_CUT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Law {
    Dirac(u64),
    Poisson(f64),
    /// `P(k) = (1 - q) q^k`, mean `q / (1 - q)`.
    Geometric(f64),
    Binomial(u64, f64),
    /// Critical law with generating function `s + scale (1 - s)^alpha`,
    /// `alpha` in `(1, 2)` and `scale` in `(0, 1/alpha]`.
    ///
    /// Its tail is `P(k) ~ C k^{-1-alpha}` and its centred walk, sped up by
    /// `p^alpha` and shrunk by `p`, converges to the spectrally positive
    /// stable process with Laplace exponent `scale * lambda^alpha`.
    StableTail { alpha: f64, scale: f64 },
    Explicit(Vec<f64>),
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidLaw { name: self.to_string(), reason });
        match *self {
            Law::Dirac(_) => Ok(()),
            Law::Poisson(l) if !(l.is_finite() && l >= 0.0) => bad(format!("mean {l} must be finite and >= 0")),
            Law::Poisson(_) => Ok(()),
            Law::Geometric(q) if !(0.0..1.0).contains(&q) => bad(format!("q = {q} must lie in [0, 1)")),
            Law::Geometric(_) => Ok(()),
            Law::Binomial(_, q) if !(0.0..=1.0).contains(&q) => bad(format!("q = {q} must lie in [0, 1]")),
            Law::Binomial(..) => Ok(()),
            Law::StableTail { alpha, scale } => {
                if !(alpha > 1.0 && alpha < 2.0) {
                    bad(format!("alpha = {alpha} must lie in (1, 2)"))
                } else if !(scale > 0.0 && scale * alpha <= 1.0 + 1e-15) {
                    bad(format!("scale = {scale} must lie in (0, 1/alpha]"))
                } else {
                    Ok(())
                }
            }
            Law::Explicit(ref w) => {
                if w.is_empty() {
                    return bad("empty pmf".into());
                }
                if let Some(k) = w.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                    return bad(format!("entry {k} is negative or not finite"));
                }
                let total: f64 = w.iter().sum();
                if (total - 1.0).abs() > PMF_SUM_TOL {
                    return bad(format!("pmf sums to {total}, not 1"));
                }
                Ok(())
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Law::Dirac(c) => c as f64,
            Law::Poisson(l) => l,
            Law::Geometric(q) => q / (1.0 - q),
            Law::Binomial(n, q) => n as f64 * q,
            Law::StableTail { .. } => 1.0,
            Law::Explicit(ref w) => w.iter().enumerate().map(|(k, p)| k as f64 * p).sum(),
        }
    }

    /// Variance; infinite for the stable-tail kind.
    pub fn variance(&self) -> f64 {
        match *self {
            Law::Dirac(_) => 0.0,
            Law::Poisson(l) => l,
            Law::Geometric(q) => q / ((1.0 - q) * (1.0 - q)),
            Law::Binomial(n, q) => n as f64 * q * (1.0 - q),
            Law::StableTail { .. } => f64::INFINITY,
            Law::Explicit(ref w) => {
                let m = self.mean();
                w.iter().enumerate().map(|(k, p)| (k as f64 - m).powi(2) * p).sum()
            }
        }
    }

    /// The single atom of a degenerate law.
    pub fn atom(&self) -> Option<u64> {
        match *self {
            Law::Dirac(c) => Some(c),
            Law::Poisson(l) if l == 0.0 => Some(0),
            Law::Geometric(q) if q == 0.0 => Some(0),
            Law::Binomial(n, q) if q == 0.0 || q == 1.0 || n == 0 => Some(if q == 1.0 { n } else { 0 }),
            Law::Explicit(ref w) => {
                let mut nz = w.iter().enumerate().filter(|(_, p)| **p > 0.0);
                match (nz.next(), nz.next()) {
                    (Some((k, _)), None) => Some(k as u64),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    pub fn pmf(&self, k: u64) -> f64 {
        match *self {
            Law::Dirac(c) => (k == c) as u8 as f64,
            Law::Poisson(l) => {
                if l == 0.0 {
                    (k == 0) as u8 as f64
                } else {
                    (k as f64 * l.ln() - l - ln_gamma(k as f64 + 1.0)).exp()
                }
            }
            Law::Geometric(q) => (1.0 - q) * q.powf(k as f64),
            Law::Binomial(n, q) => {
                if k > n {
                    0.0
                } else if q == 0.0 || q == 1.0 {
                    let atom = if q == 1.0 { n } else { 0 };
                    (k == atom) as u8 as f64
                } else {
                    let (n, kf) = (n as f64, k as f64);
                    (ln_gamma(n + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(n - kf + 1.0)
                        + kf * q.ln()
                        + (n - kf) * (1.0 - q).ln())
                    .exp()
                }
            }
            Law::StableTail { alpha, scale } => match k {
                0 => scale,
                1 => 1.0 - alpha * scale,
                _ => scale * binomial_series_coeff(alpha, k),
            },
            Law::Explicit(ref w) => w.get(k as usize).copied().unwrap_or(0.0),
        }
    }

    /// `P(X > k)`.
    pub fn tail(&self, k: u64) -> f64 {
        match *self {
            Law::Geometric(q) => q.powf(k as f64 + 1.0),
            Law::StableTail { alpha, scale } if k >= 1 => {
                // sum_{m > k} (-1)^m C(alpha, m) = Gamma(k+1-alpha) / (|Gamma(1-alpha)| k!)
                scale * (ln_gamma(k as f64 + 1.0 - alpha) - ln_gamma(k as f64 + 1.0)).exp()
                    / gamma(1.0 - alpha).abs()
            }
            _ => (1.0 - (0..=k).map(|m| self.pmf(m)).sum::<f64>()).max(0.0),
        }
    }

    /// pmf on `0..=K`, where `K` is the first point whose tail mass is below
    /// `tail_tol` (explicit laws are returned as given).
    pub fn pmf_table(&self, tail_tol: f64) -> Vec<f64> {
        match *self {
            Law::Dirac(c) => {
                let mut v = vec![0.0; c as usize + 1];
                v[c as usize] = 1.0;
                v
            }
            Law::Explicit(ref w) => w.clone(),
            Law::Binomial(n, _) => (0..=n).map(|k| self.pmf(k)).collect(),
            Law::StableTail { .. } => {
                // bisection on the closed-form tail, then tabulate
                let (mut lo, mut hi) = (1u64, 2u64);
                while self.tail(hi) >= tail_tol {
                    lo = hi;
                    hi *= 2;
                }
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if self.tail(mid) >= tail_tol {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                (0..=hi).map(|k| self.pmf(k)).collect()
            }
            _ => {
                let mut v = Vec::new();
                let mut acc = 0.0;
                let mut k = 0;
                loop {
                    let p = self.pmf(k);
                    acc += p;
                    v.push(p);
                    // 1 - acc can stall at rounding level, so also stop on a
                    // negligible term past the mean
                    let past_mean = (k as f64) >= self.mean();
                    if past_mean && (1.0 - acc < tail_tol || p < tail_tol * 1e-6) || k >= 1 << 24 {
                        break;
                    }
                    k += 1;
                }
                v
            }
        }
    }

    /// Generating function `g(s) = E[s^X]` for `s` in `[0, 1]`.
    pub fn gf(&self, s: f64) -> f64 {
        match *self {
            Law::Dirac(c) => s.powi(c as i32),
            Law::Poisson(l) => (l * (s - 1.0)).exp(),
            Law::Geometric(q) => (1.0 - q) / (1.0 - q * s),
            Law::Binomial(n, q) => (1.0 - q + q * s).powf(n as f64),
            Law::StableTail { alpha, scale } => s + scale * (1.0 - s).powf(alpha),
            // Horner, highest degree first
            Law::Explicit(ref w) => w.iter().rev().fold(0.0, |acc, p| acc * s + p),
        }
    }

    /// `g_n(s)` with `g_0 = id` and `g_n = g_{n-1} o g`.
    pub fn gf_iterate(&self, n: i64, s: f64) -> Result<f64> {
        if n < 0 {
            return Err(Error::InvalidArgument(format!("iteration count {n} is negative")));
        }
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")));
        }
        let mut v = s;
        for _ in 0..n {
            v = self.gf(v);
        }
        Ok(v)
    }

    pub fn sampler(&self) -> Result<LawSampler> {
        self.validate()?;
        LawSampler::new(self)
    }
}

/// `(-1)^k C(alpha, k)`, positive for `k >= 2` when `alpha` is in `(1, 2)`.
fn binomial_series_coeff(alpha: f64, k: u64) -> f64 {
    if k < 64 {
        let mut b = 1.0;
        for m in 1..=k {
            b *= (m as f64 - 1.0 - alpha) / m as f64;
        }
        b
    } else {
        (ln_gamma(k as f64 - alpha) - ln_gamma(k as f64 + 1.0)).exp() / gamma(-alpha)
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Law::Dirac(c) => write!(f, "dirac({c})"),
            Law::Poisson(l) => write!(f, "poisson({l})"),
            Law::Geometric(q) => write!(f, "geometric({q})"),
            Law::Binomial(n, q) => write!(f, "binomial({n},{q})"),
            Law::StableTail { alpha, scale } => write!(f, "stable_tail({alpha},{scale})"),
            Law::Explicit(w) => {
                write!(f, "explicit([")?;
                for (i, p) in w.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, "])")
            }
        }
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let perr = |m: &str| Error::Parse(format!("law `{s}`: {m}"));
        let open = s.find('(').ok_or_else(|| perr("missing `(`"))?;
        if !s.ends_with(')') {
            return Err(perr("missing closing `)`"));
        }
        let name = s[..open].trim();
        let body = s[open + 1..s.len() - 1].trim();
        let nums = || -> Result<Vec<f64>> {
            body.split(',')
                .map(|a| a.trim().parse::<f64>().map_err(|_| perr(&format!("bad number `{}`", a.trim()))))
                .collect()
        };
        let arity = |v: &Vec<f64>, n: usize| {
            if v.len() == n {
                Ok(())
            } else {
                Err(perr(&format!("expected {n} parameter(s)")))
            }
        };
        let count = |x: f64| {
            if x >= 0.0 && x.fract() == 0.0 {
                Ok(x as u64)
            } else {
                Err(perr("expected a nonnegative integer"))
            }
        };
        let law = match name {
            "dirac" => {
                let v = nums()?;
                arity(&v, 1)?;
                Law::Dirac(count(v[0])?)
            }
            "poisson" => {
                let v = nums()?;
                arity(&v, 1)?;
                Law::Poisson(v[0])
            }
            "geometric" => {
                let v = nums()?;
                arity(&v, 1)?;
                Law::Geometric(v[0])
            }
            "binomial" => {
                let v = nums()?;
                arity(&v, 2)?;
                Law::Binomial(count(v[0])?, v[1])
            }
            "stable_tail" => {
                let v = nums()?;
                arity(&v, 2)?;
                Law::StableTail { alpha: v[0], scale: v[1] }
            }
            "explicit" => {
                let w: Vec<f64> = serde_json::from_str(body).map_err(|e| perr(&e.to_string()))?;
                Law::Explicit(w)
            }
            other => return Err(perr(&format!("unknown kind `{other}`"))),
        };
        Ok(law)
    }
}

impl From<Law> for String {
    fn from(l: Law) -> String {
        l.to_string()
    }
}

impl TryFrom<String> for Law {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Precomputed sampler for one law.
#[derive(Debug, Clone)]
pub enum LawSampler {
    Dirac(u64),
    /// Inverse CDF by forward scan; used when the mass sits on small values.
    Table(Vec<f64>),
    Poisson(Poisson<f64>),
    Geometric { ln_q: f64 },
    Binomial(Binomial),
    Stable { alpha: f64, scale: f64, mixing: Beta<f64> },
}

impl LawSampler {
    fn new(law: &Law) -> Result<Self> {
        if let Some(c) = law.atom() {
            return Ok(LawSampler::Dirac(c));
        }
        let s = match *law {
            Law::Poisson(l) if l > 30.0 => LawSampler::Poisson(
                Poisson::new(l).map_err(|e| Error::InvalidLaw { name: law.to_string(), reason: e.to_string() })?,
            ),
            Law::Binomial(n, q) if n > 64 => LawSampler::Binomial(
                Binomial::new(n, q).map_err(|e| Error::InvalidLaw { name: law.to_string(), reason: e.to_string() })?,
            ),
            Law::Geometric(q) => LawSampler::Geometric { ln_q: q.ln() },
            Law::StableTail { alpha, scale } => LawSampler::Stable {
                alpha,
                scale,
                mixing: Beta::new(alpha - 1.0, 2.0 - alpha)
                    .map_err(|e| Error::InvalidLaw { name: law.to_string(), reason: e.to_string() })?,
            },
            _ => {
                let pmf = law.pmf_table(1e-16);
                let mut cdf = Vec::with_capacity(pmf.len());
                let mut acc = 0.0;
                for p in pmf {
                    acc += p;
                    cdf.push(acc);
                }
                // absorb rounding and the cut tail into the last atom
                if let Some(last) = cdf.last_mut() {
                    *last = f64::INFINITY;
                }
                LawSampler::Table(cdf)
            }
        };
        Ok(s)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match self {
            LawSampler::Dirac(c) => *c,
            LawSampler::Table(cdf) => {
                let u: f64 = rng.random();
                let mut k = 0;
                while u >= cdf[k] {
                    k += 1;
                }
                k as u64
            }
            LawSampler::Poisson(d) => d.sample(rng) as u64,
            LawSampler::Binomial(d) => d.sample(rng),
            LawSampler::Geometric { ln_q } => {
                let u: f64 = 1.0 - rng.random::<f64>();
                (u.ln() / ln_q).floor() as u64
            }
            LawSampler::Stable { alpha, scale, mixing } => sample_stable_tail(*alpha, *scale, mixing, rng),
        }
    }
}

/// Exact draw from the stable-tail law.
///
/// For `k >= 2`, `k P(k) = alpha * scale * S(k - 1)` where `S` is the Sibuya
/// law with parameter `alpha - 1`, a geometric law whose success probability
/// is `Beta(alpha - 1, 2 - alpha)`. Proposals `k = S + 1` are accepted with
/// probability `2 / k`.
fn sample_stable_tail<R: Rng + ?Sized>(alpha: f64, scale: f64, mixing: &Beta<f64>, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    if u < scale {
        return 0;
    }
    if u < 1.0 - (alpha - 1.0) * scale {
        return 1;
    }
    loop {
        let p = mixing.sample(rng);
        let v: f64 = 1.0 - rng.random::<f64>();
        let s = if p >= 1.0 { 1.0 } else { 1.0 + (v.ln() / (-p).ln_1p()).floor() };
        let k = s + 1.0;
        if rng.random::<f64>() * k < 2.0 {
            return k as u64;
        }
    }
}

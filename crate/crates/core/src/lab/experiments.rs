//! The five convergence experiments.

use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::discrete::{iid_walk_sample, profile_sample, walk_sample, WalkPoint};
use super::report::{ExperimentOutput, ExperimentReport, SampleSet, Scale, StatKind, Statistic, Thresholds};
use crate::error::{Error, Result};
use crate::family::{stable_gamma, AdmissibleMechanism, ScalingFamily};
use crate::forest::DEFAULT_VERTEX_BUDGET;
use crate::law::Law;
use crate::limit::brownian::{running_min_cdf, sample_height_at};
use crate::limit::{build_u, mcbi_sde, mean_ode, terminal_local_time, FirstPassage, Interpolation, TerminalConfig};
use crate::rng::{derive_seed, stream_rng};
use crate::stats::{ks_one_sample, ks_two_sample, mean_se, normal_cdf, stable_cdf};

/// Numerical settings shared by all experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub seed: u64,
    pub thresholds: Thresholds,
    /// Step of every continuum grid.
    pub dt: f64,
    /// Local-time band width.
    pub eps: f64,
    /// Continuum replicates; defaults to the discrete count.
    pub continuum_replicates: Option<usize>,
    /// Local-time replicates in the Ray-Knight check.
    pub local_time_replicates: Option<usize>,
    pub vertex_budget: usize,
    /// Levels up to which `U` is built for left-height marginals.
    pub u_horizon: f64,
    /// Excision cap above the highest probed level, minus the band.
    pub cap_margin: f64,
    /// Step budget of one local-time path.
    pub max_steps: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            seed: 1,
            thresholds: Thresholds::default(),
            dt: 1e-3,
            eps: 0.02,
            continuum_replicates: None,
            local_time_replicates: None,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
            u_horizon: 8.0,
            cap_margin: 0.2,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Profile,
    Height,
    Leftheight,
    Rayknight,
    Stable,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] =
        [ExperimentKind::Profile, ExperimentKind::Height, ExperimentKind::Leftheight, ExperimentKind::Rayknight, ExperimentKind::Stable];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Profile => "profile",
            ExperimentKind::Height => "height",
            ExperimentKind::Leftheight => "leftheight",
            ExperimentKind::Rayknight => "rayknight",
            ExperimentKind::Stable => "stable",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment {s:?}; expected one of profile, height, leftheight, rayknight, stable")))
    }
}

const ROLE_DISCRETE: u64 = 1 << 32;
const ROLE_SDE: u64 = 2 << 32;
const ROLE_HEIGHT: u64 = 3 << 32;
const ROLE_LOCAL_TIME: u64 = 4 << 32;
const ROLE_STABLE: u64 = 5 << 32;

fn is_exclusion(e: &Error) -> bool {
    matches!(e, Error::ResourceLimit { .. } | Error::BeyondHorizon { .. })
}

/// Runs replicate `r` with stream `r` in parallel and keeps the input order.
/// Budget and horizon failures exclude the replicate; other errors abort.
fn run_replicates<T: Send>(n: usize, f: impl Fn(u64) -> Result<T> + Sync) -> Result<(Vec<T>, usize)> {
    let results: Vec<Result<T>> = (0..n as u64).into_par_iter().map(&f).collect();
    let mut out = Vec::with_capacity(n);
    let mut excluded = 0;
    for r in results {
        match r {
            Ok(v) => out.push(v),
            Err(e) if is_exclusion(&e) => excluded += 1,
            Err(e) => return Err(e),
        }
    }
    Ok((out, excluded))
}

fn check_replicates(n: usize, t: &Thresholds) -> Result<()> {
    if n < t.min_replicates {
        return Err(Error::InsufficientSamples { got: n, need: t.min_replicates });
    }
    Ok(())
}

fn brownian(family: &ScalingFamily) -> Result<&AdmissibleMechanism> {
    match family {
        ScalingFamily::Brownian { mechanism } => {
            mechanism.validate()?;
            Ok(mechanism)
        }
        _ => Err(Error::InvalidArgument("this experiment needs a Brownian family".into())),
    }
}

fn column<T, U: Copy>(rows: &[T], f: impl Fn(&T) -> U) -> Vec<U> {
    rows.iter().map(f).collect()
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(0.0, f64::max)
}

fn mean_se_stat(name: &str, xs: &[f64], exact: f64) -> Statistic {
    let (m, se) = mean_se(xs);
    let value = if se > 0.0 {
        (m - exact).abs() / se
    } else if m == exact {
        0.0
    } else {
        f64::INFINITY
    };
    Statistic::new(name, StatKind::MeanSe, value)
}

fn rel_gap(a: &[f64], b: &[f64], scale: f64) -> f64 {
    (mean_se(a).0 - mean_se(b).0).abs() / scale.abs()
}

fn ks_threshold(m: &AdmissibleMechanism, t: &Thresholds) -> f64 {
    if m.is_decoupled() {
        t.ks
    } else {
        t.ks_coupled
    }
}

fn largest(p_list: &[u32]) -> u32 {
    p_list.iter().copied().max().unwrap_or(0)
}

fn scale(p: u32, gamma_p: u64, replicates: usize, excluded: usize) -> Scale {
    Scale { p, gamma_p, replicates, excluded }
}

/// `continuum[j][k]` = `Z^j` at `v_list[k]` over mcbi_sde replicates, plus
/// the mean clamp fraction.
fn sde_marginals(m: &AdmissibleMechanism, v_list: &[f64], n: usize, cfg: &LabConfig) -> Result<(Vec<Vec<Vec<f64>>>, f64)> {
    let seed = derive_seed(cfg.seed, ROLE_SDE);
    let v_max = max_of(v_list);
    let (rows, _) = run_replicates(n, |r| {
        let t = mcbi_sde(m, cfg.dt, v_max, &mut stream_rng(seed, r))?;
        let vals: Vec<Vec<f64>> = (0..m.n_types()).map(|j| v_list.iter().map(|&v| t.z[j].at_index_of(v).unwrap_or(f64::NAN)).collect()).collect();
        Ok((vals, t.clamp_fraction()))
    })?;
    let clamp = rows.iter().map(|r| r.1).sum::<f64>() / rows.len().max(1) as f64;
    let out = (0..m.n_types()).map(|j| (0..v_list.len()).map(|k| column(&rows, |r| r.0[j][k])).collect()).collect();
    Ok((out, clamp))
}

fn discrete_profiles(family: &ScalingFamily, p: u32, v_list: &[f64], n: usize, cfg: &LabConfig) -> Result<(Vec<Vec<Vec<f64>>>, usize)> {
    let e = family.ensemble(p)?;
    let gamma = family.gamma(p);
    let seed = derive_seed(cfg.seed, ROLE_DISCRETE + p as u64);
    let (rows, excluded) = run_replicates(n, |r| profile_sample(&e, p, gamma, v_list, cfg.vertex_budget, seed, r))?;
    let nt = family.n_types();
    Ok(((0..nt).map(|j| (0..v_list.len()).map(|k| column(&rows, |r| r[j][k])).collect()).collect(), excluded))
}

/// Rescaled profiles `Z_p([gamma_p v]) / p` against mcbi_sde marginals.
pub fn run_profile_convergence(family: &ScalingFamily, v_list: &[f64], p_list: &[u32], replicates: usize, cfg: &LabConfig) -> Result<ExperimentOutput> {
    let clock = Instant::now();
    let th = &cfg.thresholds;
    check_replicates(replicates, th)?;
    let m = brownian(family)?;
    let cont_n = cfg.continuum_replicates.unwrap_or(replicates);
    let params = json!({ "family": family, "v_list": v_list, "p_list": p_list, "replicates": replicates });
    let mut rep = ExperimentReport::new("profile", cfg.seed, params, *th);
    rep.continuum_replicates = cont_n;
    let mut samples = Vec::new();
    let (sde, clamp) = sde_marginals(m, v_list, cont_n, cfg)?;
    rep.push(Statistic::new("sde_clamp_fraction", StatKind::Diagnostic, clamp));
    let top = largest(p_list);
    for (k, &v) in v_list.iter().enumerate() {
        let ode = mean_ode(m, v);
        for j in 0..m.n_types() {
            rep.push(mean_se_stat("sde_mean_vs_ode", &sde[j][k], ode[j]).j(j + 1).at(v).judged(th.mean_se));
            samples.push(SampleSet { label: format!("sde_j{}_v{v}", j + 1), values: sde[j][k].clone() });
        }
    }
    for &p in p_list {
        let (disc, excluded) = discrete_profiles(family, p, v_list, replicates, cfg)?;
        rep.scales.push(scale(p, family.gamma(p), replicates, excluded));
        for (k, &v) in v_list.iter().enumerate() {
            let ode = mean_ode(m, v);
            for j in 0..m.n_types() {
                let ks = Statistic::new("ks_profile_vs_sde", StatKind::KsTwoSample, ks_two_sample(&disc[j][k], &sde[j][k])).p(p).j(j + 1).at(v);
                let mean = mean_se_stat("profile_mean_vs_ode", &disc[j][k], ode[j]).p(p).j(j + 1).at(v);
                if p == top {
                    rep.push(ks.judged(ks_threshold(m, th)));
                    rep.push(mean.judged(th.mean_se));
                    samples.push(SampleSet { label: format!("profile_p{p}_j{}_v{v}", j + 1), values: disc[j][k].clone() });
                } else {
                    rep.push(ks);
                    rep.push(mean);
                }
            }
        }
    }
    rep.finish();
    rep.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentOutput { report: rep, samples })
}

fn walk_points(family: &ScalingFamily, p: u32, t_list: &[f64], left: bool, n: usize, cfg: &LabConfig) -> Result<(Vec<Vec<Vec<WalkPoint>>>, usize)> {
    let e = family.ensemble(p)?;
    let gamma = family.gamma(p);
    let seed = derive_seed(cfg.seed, ROLE_DISCRETE + p as u64);
    let nt = family.n_types();
    let types: Vec<usize> = (1..=nt).collect();
    let (rows, excluded) = run_replicates(n, |r| walk_sample(&e, p, gamma, &types, t_list, left, cfg.vertex_budget, seed, r))?;
    // points[j][k][replicate]
    Ok(((0..nt).map(|j| (0..t_list.len()).map(|k| column(&rows, |r| r[j][k])).collect()).collect(), excluded))
}

/// Rescaled `D`, its running minimum and `H` against their Brownian limits.
pub fn run_height_convergence(family: &ScalingFamily, t_list: &[f64], p_list: &[u32], replicates: usize, cfg: &LabConfig) -> Result<ExperimentOutput> {
    let clock = Instant::now();
    let th = &cfg.thresholds;
    check_replicates(replicates, th)?;
    let m = brownian(family)?;
    let cont_n = cfg.continuum_replicates.unwrap_or(replicates);
    let params = json!({ "family": family, "t_list": t_list, "p_list": p_list, "replicates": replicates });
    let mut rep = ExperimentReport::new("height", cfg.seed, params, *th);
    rep.continuum_replicates = cont_n;
    let mut samples = Vec::new();
    let nt = m.n_types();
    let hseed = derive_seed(cfg.seed, ROLE_HEIGHT);
    // cont[r][j][k]
    let (cont, _) = run_replicates(cont_n, |r| {
        let mut rng = stream_rng(hseed, r);
        Ok((0..nt).map(|j| t_list.iter().map(|&t| sample_height_at(m.beta[j], m.alpha[j][j], t, &mut rng).0).collect::<Vec<f64>>()).collect::<Vec<_>>())
    })?;
    let top = largest(p_list);
    for &p in p_list {
        let (pts, excluded) = walk_points(family, p, t_list, false, replicates, cfg)?;
        rep.scales.push(scale(p, family.gamma(p), replicates, excluded));
        for j in 0..nt {
            let (beta, a) = (m.beta[j], m.alpha[j][j]);
            let sigma = (2.0 * beta).sqrt();
            for (k, &t) in t_list.iter().enumerate() {
                let col = &pts[j][k];
                let judge = |s: Statistic, thr: f64| if p == top { s.judged(thr) } else { s };
                let tag = |s: Statistic| s.p(p).j(j + 1).at(t);
                if t == 0.0 {
                    let nonzero = col.iter().filter(|w| w.d != 0.0 || w.running_min != 0.0 || w.h != 0.0).count();
                    rep.push(tag(Statistic::new("zero_at_origin", StatKind::Exact, nonzero as f64)).judged(0.0));
                    continue;
                }
                let d = column(col, |w| w.d);
                let ell = column(col, |w| -w.running_min);
                let h = column(col, |w| w.h);
                let sd = sigma * t.sqrt();
                let ks_d = ks_one_sample(&d, |x| normal_cdf((x - a * t) / sd));
                rep.push(judge(tag(Statistic::new("ks_lukasiewicz_vs_normal", StatKind::KsExact, ks_d)), th.ks));
                let ks_m = ks_one_sample(&ell, |x| running_min_cdf(x, sigma, a, t));
                rep.push(judge(tag(Statistic::new("ks_running_min_vs_reflection", StatKind::KsExact, ks_m)), th.ks));
                let hc = column(&cont, |r| r[j][k]);
                rep.push(judge(tag(Statistic::new("ks_height_vs_brownian", StatKind::KsTwoSample, ks_two_sample(&h, &hc))), th.ks));
                let mh = mean_se(&hc).0;
                rep.push(judge(tag(Statistic::new("height_mean_rel_gap", StatKind::MeanRel, rel_gap(&h, &hc, mh))), th.mean_rel));
                if p == top {
                    samples.push(SampleSet { label: format!("lukasiewicz_p{p}_j{}_t{t}", j + 1), values: d });
                    samples.push(SampleSet { label: format!("height_p{p}_j{}_t{t}", j + 1), values: h });
                    samples.push(SampleSet { label: format!("height_continuum_j{}_t{t}", j + 1), values: hc });
                }
            }
        }
    }
    rep.finish();
    rep.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentOutput { report: rep, samples })
}

/// Continuum `(cevH^j_t, J^j_t)` for every type and time of one replicate.
fn continuum_left_heights(m: &AdmissibleMechanism, t_list: &[f64], cfg: &LabConfig, seed: u64, r: u64) -> Result<Vec<Vec<(f64, f64)>>> {
    let mut rng = stream_rng(seed, r);
    let n = m.n_types();
    if m.is_decoupled() {
        // U^j = x_j + delta_j v, so J = max(0, ell - x) / delta
        return Ok((0..n)
            .map(|j| {
                t_list
                    .iter()
                    .map(|&t| {
                        let (h, l) = sample_height_at(m.beta[j], m.alpha[j][j], t, &mut rng);
                        let jt = (l - m.x[j]).max(0.0) / m.delta[j];
                        (h + jt, jt)
                    })
                    .collect()
            })
            .collect());
    }
    let traj = mcbi_sde(m, cfg.dt, cfg.u_horizon, &mut rng)?;
    let u = build_u(m, &traj.z)?;
    (0..n)
        .map(|j| {
            let mut fp = FirstPassage::new(&u[j], Interpolation::Linear)?;
            t_list
                .iter()
                .map(|&t| {
                    let (h, l) = sample_height_at(m.beta[j], m.alpha[j][j], t, &mut rng);
                    let jt = fp.eval(l).ok_or(Error::BeyondHorizon { what: format!("U^{} above {l}", j + 1), horizon: cfg.u_horizon })?;
                    Ok((h + jt, jt))
                })
                .collect()
        })
        .collect()
}

/// Rescaled left heights against the continuum construction
/// `cevH = H + F(U)(ell)`.
pub fn run_leftheight_convergence(family: &ScalingFamily, t_list: &[f64], p: u32, replicates: usize, cfg: &LabConfig) -> Result<ExperimentOutput> {
    let clock = Instant::now();
    let th = &cfg.thresholds;
    check_replicates(replicates, th)?;
    let m = brownian(family)?;
    let cont_n = cfg.continuum_replicates.unwrap_or(replicates);
    let params = json!({ "family": family, "t_list": t_list, "p": p, "replicates": replicates, "decoupled": m.is_decoupled() });
    let mut rep = ExperimentReport::new("leftheight", cfg.seed, params, *th);
    rep.continuum_replicates = cont_n;
    if !m.is_decoupled() {
        rep.notes.push("continuum U built from mcbi_sde profiles (Ray-Knight substitution)".into());
    }
    let mut samples = Vec::new();
    let nt = m.n_types();
    let cseed = derive_seed(cfg.seed, ROLE_HEIGHT);
    let (cont, cont_excl) = run_replicates(cont_n, |r| continuum_left_heights(m, t_list, cfg, cseed, r))?;
    rep.push(Statistic::new("continuum_excluded", StatKind::Diagnostic, cont_excl as f64));
    if (cont_excl as f64) >= th.excluded * cont_n as f64 {
        rep.notes.push(format!("horizon diagnostic: {cont_excl} continuum paths had ell beyond U at level {}", cfg.u_horizon));
        rep.scales.push(scale(0, 0, cont_n, cont_excl));
    }
    let (pts, excluded) = walk_points(family, p, t_list, true, replicates, cfg)?;
    rep.scales.push(scale(p, family.gamma(p), replicates, excluded));
    let thr = ks_threshold(m, th);
    for j in 0..nt {
        for (k, &t) in t_list.iter().enumerate() {
            let tag = |s: Statistic| s.p(p).j(j + 1).at(t);
            let lh = column(&pts[j][k], |w| w.left_height.expect("requested"));
            let dr = column(&pts[j][k], |w| w.drift.expect("requested"));
            let lc = column(&cont, |r| r[j][k].0);
            let dc = column(&cont, |r| r[j][k].1);
            rep.push(tag(Statistic::new("ks_left_height", StatKind::KsTwoSample, ks_two_sample(&lh, &lc))).judged(thr));
            rep.push(tag(Statistic::new("ks_drift_term", StatKind::KsTwoSample, ks_two_sample(&dr, &dc))).judged(thr));
            let mc = mean_se(&lc).0;
            if mc > 0.0 {
                rep.push(tag(Statistic::new("left_height_mean_rel_gap", StatKind::MeanRel, rel_gap(&lh, &lc, mc))));
            }
            samples.push(SampleSet { label: format!("left_height_p{p}_j{}_t{t}", j + 1), values: lh });
            samples.push(SampleSet { label: format!("left_height_continuum_j{}_t{t}", j + 1), values: lc });
        }
    }
    rep.finish();
    rep.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentOutput { report: rep, samples })
}

/// Local-time estimates `L^v_inf(cevH^j)` for every type and level of one
/// replicate, with `U` built from an mcbi_sde trajectory.
fn continuum_local_times(m: &AdmissibleMechanism, v_list: &[f64], cfg: &LabConfig, seed: u64, r: u64) -> Result<Vec<Vec<f64>>> {
    let mut rng = stream_rng(seed, r);
    let cap = max_of(v_list) + cfg.eps + cfg.cap_margin;
    let traj = mcbi_sde(m, cfg.dt, cap + 0.1, &mut rng)?;
    let u = build_u(m, &traj.z)?;
    let tc = TerminalConfig { dt: cfg.dt, eps: cfg.eps, cap, max_steps: cfg.max_steps };
    (0..m.n_types())
        .map(|j| Ok(terminal_local_time(m.beta[j], m.alpha[j][j], &u[j], v_list, &tc, &mut rng)?.smoothed))
        .collect()
}

/// Three-way comparison at each level: discrete profiles, local times of
/// continuum left heights and mcbi_sde marginals.
pub fn run_rayknight_check(family: &ScalingFamily, v_list: &[f64], p: u32, replicates: usize, cfg: &LabConfig) -> Result<ExperimentOutput> {
    let clock = Instant::now();
    let th = &cfg.thresholds;
    check_replicates(replicates, th)?;
    let m = brownian(family)?;
    let cont_n = cfg.continuum_replicates.unwrap_or(replicates);
    let lt_n = cfg.local_time_replicates.unwrap_or(replicates);
    check_replicates(lt_n, th)?;
    let params = json!({ "family": family, "v_list": v_list, "p": p, "replicates": replicates, "local_time_replicates": lt_n });
    let mut rep = ExperimentReport::new("rayknight", cfg.seed, params, *th);
    rep.continuum_replicates = cont_n;
    let mut samples = Vec::new();
    let nt = m.n_types();
    let (disc, excluded) = discrete_profiles(family, p, v_list, replicates, cfg)?;
    rep.scales.push(scale(p, family.gamma(p), replicates, excluded));
    let (sde, clamp) = sde_marginals(m, v_list, cont_n, cfg)?;
    rep.push(Statistic::new("sde_clamp_fraction", StatKind::Diagnostic, clamp));
    let lseed = derive_seed(cfg.seed, ROLE_LOCAL_TIME);
    let (lt, lt_excl) = run_replicates(lt_n, |r| continuum_local_times(m, v_list, cfg, lseed, r))?;
    rep.scales.push(scale(0, 0, lt_n, lt_excl));
    let thr_ac = ks_threshold(m, th);
    for j in 0..nt {
        for (k, &v) in v_list.iter().enumerate() {
            let a = &disc[j][k];
            let b = column(&lt, |r| r[j][k]);
            let c = &sde[j][k];
            let tag = |s: Statistic| s.p(p).j(j + 1).at(v);
            rep.push(tag(Statistic::new("ks_profile_vs_sde", StatKind::KsTwoSample, ks_two_sample(a, c))).judged(thr_ac));
            rep.push(tag(Statistic::new("ks_profile_vs_local_time", StatKind::KsTwoSample, ks_two_sample(a, &b))).judged(th.ks_coupled));
            rep.push(tag(Statistic::new("ks_local_time_vs_sde", StatKind::KsTwoSample, ks_two_sample(&b, c))).judged(th.ks_coupled));
            let ode = mean_ode(m, v)[j];
            if ode > 0.0 {
                for (name, x, y) in [("mean_gap_profile_sde", a, c), ("mean_gap_profile_local_time", a, &b), ("mean_gap_local_time_sde", &b, c)] {
                    rep.push(tag(Statistic::new(name, StatKind::MeanRel, rel_gap(x, y, ode))).judged(th.mean_rel));
                }
            }
            samples.push(SampleSet { label: format!("profile_p{p}_j{}_v{v}", j + 1), values: a.clone() });
            samples.push(SampleSet { label: format!("local_time_j{}_v{v}", j + 1), values: b });
            samples.push(SampleSet { label: format!("sde_j{}_v{v}", j + 1), values: c.clone() });
        }
    }
    rep.finish();
    rep.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentOutput { report: rep, samples })
}

/// Median of the law with CDF `cdf`, by bisection on `[lo, hi]`.
fn cdf_median(cdf: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `(1/p) sum_{l <= p gamma_p t} (xi_l - 1)` against the spectrally positive
/// stable law with Laplace exponent `c t lambda^alpha`.
pub fn run_stable_marginal_check(family: &ScalingFamily, t: f64, p_list: &[u32], replicates: usize, cfg: &LabConfig) -> Result<ExperimentOutput> {
    let clock = Instant::now();
    let th = &cfg.thresholds;
    check_replicates(replicates, th)?;
    let ScalingFamily::Stable { alpha, c } = family else {
        return Err(Error::InvalidArgument("the stable marginal check needs a stable family".into()));
    };
    let alpha = *alpha;
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time {t} must be positive")));
    }
    let params = json!({ "family": family, "t": t, "p_list": p_list, "replicates": replicates });
    let mut rep = ExperimentReport::new("stable", cfg.seed, params, *th);
    let mut samples = Vec::new();
    let top = largest(p_list);
    for &p in p_list {
        let gamma = stable_gamma(alpha, p);
        rep.scales.push(scale(p, gamma, replicates, 0));
        for (j, &cj) in c.iter().enumerate() {
            let law = Law::StableTail { alpha, scale: cj };
            law.validate()?;
            let seed = derive_seed(cfg.seed, ROLE_STABLE + ((j as u64) << 20) + p as u64);
            let (xs, _) = run_replicates(replicates, |r| iid_walk_sample(&law, p, gamma, t, seed, r))?;
            let cdf = |x: f64| stable_cdf(x, alpha, cj * t);
            let tag = |s: Statistic| s.p(p).j(j + 1).at(t);
            let ks = tag(Statistic::new("ks_walk_vs_stable", StatKind::KsExact, ks_one_sample(&xs, cdf)));
            rep.push(if p == top { ks.judged(th.ks) } else { ks });
            let target = cdf_median(cdf, -50.0, 50.0);
            rep.push(tag(Statistic::new("median_gap", StatKind::Median, (median(&xs) - target).abs())).judged(th.median_band));
            if p == top {
                samples.push(SampleSet { label: format!("stable_walk_p{p}_j{}", j + 1), values: xs });
            }
        }
    }
    rep.finish();
    rep.runtime_secs = clock.elapsed().as_secs_f64();
    Ok(ExperimentOutput { report: rep, samples })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> LabConfig {
        LabConfig { thresholds: Thresholds { min_replicates: 10, ..Thresholds::default() }, ..LabConfig::default() }
    }

    #[test]
    fn refuses_too_few_replicates() {
        let f = ScalingFamily::Brownian { mechanism: AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.0) };
        let err = run_profile_convergence(&f, &[1.0], &[20], 499, &LabConfig::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSamples { got: 499, need: 500 }));
    }

    #[test]
    fn unknown_experiment_name() {
        assert!("profile".parse::<ExperimentKind>().is_ok());
        assert!("nope".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn profile_report_replays() {
        let f = ScalingFamily::Brownian { mechanism: AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.5) };
        let cfg = small_cfg();
        let a = run_profile_convergence(&f, &[0.5], &[10, 20], 40, &cfg).unwrap();
        let b = run_profile_convergence(&f, &[0.5], &[10, 20], 40, &cfg).unwrap();
        assert!(a.report.replays(&b.report));
        assert!(a.report.monotonicity.is_some());
        assert_eq!(a.report.find("ks_profile_vs_sde").len(), 2);
    }

    #[test]
    fn height_at_origin_is_zero() {
        let f = ScalingFamily::Brownian { mechanism: AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.5) };
        let out = run_height_convergence(&f, &[0.0, 0.5], &[10], 20, &small_cfg()).unwrap();
        assert_eq!(out.report.find("zero_at_origin")[0].pass, Some(true));
    }

    #[test]
    fn decoupled_drift_vanishes_before_first_completion() {
        // tiny t: the component count stays below the roots
        let m = AdmissibleMechanism { beta: vec![0.5, 0.5], alpha: vec![vec![0.0, 0.0], vec![0.0, 0.0]], delta: vec![1.0, 1.0], x: vec![1.0, 1.0], levy: vec![] };
        let f = ScalingFamily::Brownian { mechanism: m };
        let out = run_leftheight_convergence(&f, &[0.001], 20, 20, &small_cfg()).unwrap();
        for s in out.report.find("ks_drift_term") {
            assert_eq!(s.value, 0.0);
        }
    }
}

//! Experiment reports: every verdict points at a stored statistic.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Pass thresholds, all stored with the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Kolmogorov distance for decoupled and one-type comparisons.
    pub ks: f64,
    /// Kolmogorov distance for comparisons through the coupled system.
    pub ks_coupled: f64,
    /// Relative gap between means.
    pub mean_rel: f64,
    /// Standard errors allowed between a Monte-Carlo mean and its exact value.
    pub mean_se: f64,
    /// Largest fraction of replicates that may be excluded.
    pub excluded: f64,
    /// Distance between an empirical median and the limit median.
    pub median_band: f64,
    pub min_replicates: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { ks: 0.05, ks_coupled: 0.07, mean_rel: 0.05, mean_se: 3.0, excluded: 0.05, median_band: 0.1, min_replicates: 500 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatKind {
    /// One-sample Kolmogorov distance to an exact CDF.
    KsExact,
    /// Two-sample Kolmogorov distance.
    KsTwoSample,
    /// `|mean - exact| / standard error`.
    MeanSe,
    /// Relative gap between two means.
    MeanRel,
    /// Absolute gap between a median and its limit.
    Median,
    /// Exact structural check; 0 means it held.
    Exact,
    /// Reported only.
    Diagnostic,
}

/// One measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub kind: StatKind,
    pub p: Option<u32>,
    pub j: Option<usize>,
    /// Time or level the marginal is read at.
    pub at: Option<f64>,
    pub value: f64,
    pub threshold: Option<f64>,
    pub pass: Option<bool>,
}

impl Statistic {
    pub fn new(name: impl Into<String>, kind: StatKind, value: f64) -> Self {
        Statistic { name: name.into(), kind, p: None, j: None, at: None, value, threshold: None, pass: None }
    }

    pub fn p(mut self, p: u32) -> Self {
        self.p = Some(p);
        self
    }

    pub fn j(mut self, j: usize) -> Self {
        self.j = Some(j);
        self
    }

    pub fn at(mut self, at: f64) -> Self {
        self.at = Some(at);
        self
    }

    /// Judged as `value < threshold`; `Exact` statistics pass at 0.
    pub fn judged(mut self, threshold: f64) -> Self {
        self.threshold = Some(threshold);
        self.pass = Some(if self.kind == StatKind::Exact { self.value == 0.0 } else { self.value < threshold });
        self
    }

    fn key(&self) -> String {
        format!("{}|{:?}|{:?}", self.name, self.j, self.at)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    /// 0 for the continuum side.
    pub p: u32,
    pub gamma_p: u64,
    pub replicates: usize,
    pub excluded: usize,
}

/// Largest-scale distance against smallest-scale distance, per statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Monotonicity {
    pub checked: usize,
    /// Keys whose distance grew from the smallest to the largest `p`.
    pub violations: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub seed: u64,
    pub parameters: serde_json::Value,
    /// Run configuration echoed by the caller.
    pub config: Option<serde_json::Value>,
    pub thresholds: Thresholds,
    pub scales: Vec<Scale>,
    pub continuum_replicates: usize,
    pub statistics: Vec<Statistic>,
    pub monotonicity: Option<Monotonicity>,
    pub notes: Vec<String>,
    pub pass: bool,
    /// Wall-clock seconds; excluded from replay comparisons.
    pub runtime_secs: f64,
}

/// Note attached to every report built from several scales.
pub const SEQUENCE_NOTE: &str =
    "distances are compared along the full sequence of scales; outside the Brownian case only subsequential convergence is established";

impl ExperimentReport {
    pub fn new(experiment: &str, seed: u64, parameters: serde_json::Value, thresholds: Thresholds) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            seed,
            parameters,
            config: None,
            thresholds,
            scales: Vec::new(),
            continuum_replicates: 0,
            statistics: Vec::new(),
            monotonicity: None,
            notes: Vec::new(),
            pass: false,
            runtime_secs: 0.0,
        }
    }

    pub fn push(&mut self, s: Statistic) {
        self.statistics.push(s);
    }

    /// Fills in the monotonicity check and the overall verdict.
    pub fn finish(&mut self) {
        let mut ks: BTreeMap<String, Vec<(u32, f64)>> = BTreeMap::new();
        for s in &self.statistics {
            if let (Some(p), StatKind::KsExact | StatKind::KsTwoSample) = (s.p, s.kind) {
                ks.entry(s.key()).or_default().push((p, s.value));
            }
        }
        let mut ps: Vec<u32> = self.scales.iter().map(|s| s.p).filter(|&p| p > 0).collect();
        ps.dedup();
        if ps.len() > 1 {
            let mut m = Monotonicity::default();
            for (key, mut v) in ks {
                if v.len() < 2 {
                    continue;
                }
                v.sort_by_key(|x| x.0);
                m.checked += 1;
                if v[v.len() - 1].1 > v[0].1 {
                    m.violations.push(key);
                }
            }
            // one violation is tolerated as Monte-Carlo noise
            m.pass = m.violations.len() <= 1;
            self.monotonicity = Some(m);
            if !self.notes.iter().any(|n| n == SEQUENCE_NOTE) {
                self.notes.push(SEQUENCE_NOTE.into());
            }
        }
        let excluded_ok = self.scales.iter().all(|s| (s.excluded as f64) < self.thresholds.excluded * s.replicates.max(1) as f64);
        if !excluded_ok {
            self.notes.push(format!(
                "horizon diagnostic: excluded replicates reached {:.1}% of a scale",
                100.0 * self.thresholds.excluded
            ));
        }
        self.pass = excluded_ok
            && self.statistics.iter().all(|s| s.pass != Some(false))
            && self.monotonicity.as_ref().is_none_or(|m| m.pass);
    }

    pub fn failures(&self) -> Vec<&Statistic> {
        self.statistics.iter().filter(|s| s.pass == Some(false)).collect()
    }

    /// Equality up to runtime.
    pub fn replays(&self, other: &ExperimentReport) -> bool {
        let mut a = self.clone();
        a.runtime_secs = other.runtime_secs;
        &a == other
    }

    /// Judged statistics with this name, in insertion order.
    pub fn find(&self, name: &str) -> Vec<&Statistic> {
        self.statistics.iter().filter(|s| s.name == name).collect()
    }

    /// Human-readable summary table.
    pub fn table(&self) -> String {
        let mut out = format!("experiment {} (seed {}): {}\n", self.experiment, self.seed, if self.pass { "PASS" } else { "FAIL" });
        for s in &self.statistics {
            let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "  {:<28} p={:<5} j={:<2} at={:<6} value={:<10.5} threshold={:<8} {}\n",
                s.name,
                opt(s.p.map(|x| x.to_string())),
                opt(s.j.map(|x| x.to_string())),
                opt(s.at.map(|x| x.to_string())),
                s.value,
                opt(s.threshold.map(|x| x.to_string())),
                match s.pass {
                    Some(true) => "ok",
                    Some(false) => "FAIL",
                    None => "",
                }
            ));
        }
        if let Some(m) = &self.monotonicity {
            out.push_str(&format!("  monotonicity: {} checked, {} violations\n", m.checked, m.violations.len()));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

/// Raw marginal samples behind one statistic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
}

/// Report plus the samples it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: ExperimentReport,
    pub samples: Vec<SampleSet>,
}

impl ExperimentOutput {
    /// Writes `report.json` and one `samples_<label>.csv` per sample set.
    /// Every CSV starts with `#` lines holding the seed and configuration.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(&self.report)?)?;
        let echo = serde_json::to_string(&self.report.config)?;
        for s in &self.samples {
            let mut w = std::io::BufWriter::new(std::fs::File::create(dir.join(format!("samples_{}.csv", s.label)))?);
            writeln!(w, "# experiment: {}", self.report.experiment)?;
            writeln!(w, "# seed: {}", self.report.seed)?;
            writeln!(w, "# config: {echo}")?;
            writeln!(w, "replicate,value")?;
            for (r, v) in s.values.iter().enumerate() {
                writeln!(w, "{r},{v}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(values: &[(u32, f64)]) -> ExperimentReport {
        let mut r = ExperimentReport::new("t", 1, serde_json::json!({}), Thresholds::default());
        for &(p, v) in values {
            r.scales.push(Scale { p, gamma_p: p as u64, replicates: 1000, excluded: 0 });
            r.push(Statistic::new("ks", StatKind::KsTwoSample, v).p(p));
        }
        r
    }

    #[test]
    fn monotonicity_tolerates_one_violation() {
        let mut r = report(&[(10, 0.1), (100, 0.2)]);
        r.finish();
        assert!(r.pass);
        assert_eq!(r.monotonicity.unwrap().violations.len(), 1);
        let mut r = report(&[(10, 0.1), (100, 0.2)]);
        r.push(Statistic::new("other", StatKind::KsExact, 0.1).p(10));
        r.push(Statistic::new("other", StatKind::KsExact, 0.3).p(100));
        r.finish();
        assert!(!r.pass);
    }

    #[test]
    fn excluded_fraction_fails_report() {
        let mut r = report(&[(10, 0.01)]);
        r.scales[0].excluded = 50;
        r.finish();
        assert!(!r.pass);
    }

    #[test]
    fn replay_ignores_runtime() {
        let mut a = report(&[(10, 0.01)]);
        a.finish();
        let mut b = a.clone();
        b.runtime_secs = 3.0;
        assert!(a.replays(&b));
        b.statistics[0].value = 0.02;
        assert!(!a.replays(&b));
    }
}

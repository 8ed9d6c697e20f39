//! Breadth-first and depth-first encodings of a colored forest.
//!
//! For a type `j`, the depth-first order visits the monochromatic type-`j`
//! components in the order of their roots and each component in preorder,
//! least child first. In a truncated forest the order is cut at the first
//! vertex of height `h_max`, whose children are unknown; everything before
//! that cut is "explored" and all paths below are defined on it.
//!
//! Types are numbered `1..=N` in every public signature. Vectors indexed by
//! type are stored at `j - 1`.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{generate_forest_stream, ColoredForest, OffspringEnsemble};
use crate::stats::{chi_square_gof, ChiSquareResult};

/// One monochromatic component in depth-first order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    pub root: usize,
    /// Position of the root in the depth-first order.
    pub start: usize,
    /// Explored vertices of the component.
    pub len: usize,
    /// `false` when truncation cut the component.
    pub complete: bool,
}

/// Depth-first encodings of one type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeEncoding {
    pub j: usize,
    /// `w_0, ..., w_{T-1}`: explored vertices in depth-first order.
    pub order: Vec<usize>,
    /// `w_T`, the first vertex at the truncation height, if any.
    pub blocked: Option<usize>,
    pub components: Vec<Component>,
    /// Lukasiewicz path `D(0..=T)`.
    pub lukasiewicz: Vec<i64>,
    /// Running minimum of `D`.
    pub running_min: Vec<i64>,
    /// Height process `H(0..T)`.
    pub height: Vec<u32>,
    /// Number of type-`j` children of each `w_i`.
    pub children: Vec<u32>,
}

impl TypeEncoding {
    /// Number of explored vertices `T`.
    pub fn horizon(&self) -> usize {
        self.order.len()
    }
}

fn check_type(forest: &ColoredForest, j: usize) -> Result<()> {
    if j == 0 || j > forest.n_types() {
        return Err(Error::InvalidArgument(format!("type {j} outside 1..={}", forest.n_types())));
    }
    Ok(())
}

/// `true` for a type-`j` vertex whose parent is absent or of another type.
#[inline]
fn is_j_root(forest: &ColoredForest, v: usize, j: usize) -> bool {
    forest.color(v) == j && forest.parent(v).is_none_or(|p| forest.color(p) != j)
}

/// Depth-first order with component bookkeeping.
pub fn depth_first_order(forest: &ColoredForest, j: usize) -> Result<TypeEncoding> {
    depth_first_prefix(forest, j, usize::MAX)
}

/// As [`depth_first_order`] but stops after `limit` explored vertices.
/// Paths are then exact prefixes of the full ones.
pub fn depth_first_prefix(forest: &ColoredForest, j: usize, limit: usize) -> Result<TypeEncoding> {
    check_type(forest, j)?;
    let h_max = forest.h_max();
    let mut order = Vec::new();
    let mut children = Vec::new();
    let mut components = Vec::new();
    let mut blocked = None;
    let mut stack: Vec<usize> = Vec::new();
    'roots: for r in (0..forest.len()).filter(|&v| is_j_root(forest, v, j)) {
        if order.len() >= limit {
            break;
        }
        let start = order.len();
        components.push(Component { root: r, start, len: 0, complete: true });
        stack.push(r);
        while let Some(v) = stack.pop() {
            if forest.height(v) == h_max || order.len() >= limit {
                if forest.height(v) == h_max {
                    blocked = Some(v);
                }
                let c = components.last_mut().expect("component pushed above");
                c.len = order.len() - start;
                c.complete = false;
                break 'roots;
            }
            order.push(v);
            let kids = forest.children(v).expect("explored vertex");
            let before = stack.len();
            stack.extend(kids.rev().filter(|&w| forest.color(w) == j));
            children.push((stack.len() - before) as u32);
        }
        components.last_mut().expect("component pushed above").len = order.len() - start;
    }
    let mut lukasiewicz = Vec::with_capacity(order.len() + 1);
    lukasiewicz.push(0i64);
    for &c in &children {
        let last = *lukasiewicz.last().expect("nonempty");
        lukasiewicz.push(last + c as i64 - 1);
    }
    let running_min = running_minimum(&lukasiewicz);
    let mut height = height_from_lukasiewicz(&lukasiewicz);
    height.truncate(order.len());
    Ok(TypeEncoding { j, order, blocked, components, lukasiewicz, running_min, height, children })
}

pub fn running_minimum(d: &[i64]) -> Vec<i64> {
    let mut m = i64::MAX;
    d.iter()
        .map(|&x| {
            m = m.min(x);
            m
        })
        .collect()
}

/// `D` over the explored vertices of type `j`.
pub fn lukasiewicz_path(forest: &ColoredForest, j: usize) -> Result<Vec<i64>> {
    Ok(depth_first_order(forest, j)?.lukasiewicz)
}

/// `H(k) = #{l < k : D(l) = min D[l..=k]}` for every `k < D.len()`,
/// computed with a stack of indices that are minima of `D` to their right.
pub fn height_from_lukasiewicz(d: &[i64]) -> Vec<u32> {
    let mut stack: Vec<i64> = Vec::new();
    let mut h = Vec::with_capacity(d.len());
    for &x in d {
        while stack.last().is_some_and(|&top| top > x) {
            stack.pop();
        }
        h.push(stack.len() as u32);
        stack.push(x);
    }
    h
}

/// Height profiles and their cumulative sums, all on `0..=h_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profiles {
    /// `z_from[i][j-1][h]` for parent color `i` in `0..=N`; roots count as
    /// children of color 0.
    pub z_from: Vec<Vec<Vec<u64>>>,
    /// `z[j-1][h]`.
    pub z: Vec<Vec<u64>>,
    pub c_from: Vec<Vec<Vec<u64>>>,
    pub c: Vec<Vec<u64>>,
    /// `I^j(h) = sum_{i != j} C^{i->j}(h)`.
    pub immigrants: Vec<Vec<u64>>,
}

pub fn profiles(forest: &ColoredForest) -> Profiles {
    let n = forest.n_types();
    let len = forest.h_max() as usize + 1;
    let mut z_from = vec![vec![vec![0u64; len]; n]; n + 1];
    for v in 0..forest.len() {
        let j = forest.color(v);
        if j == 0 {
            continue;
        }
        let i = forest.parent(v).map_or(0, |p| forest.color(p));
        z_from[i][j - 1][forest.height(v) as usize] += 1;
    }
    let cumsum = |xs: &Vec<u64>| {
        let mut acc = 0;
        xs.iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect::<Vec<u64>>()
    };
    let z: Vec<Vec<u64>> = (0..n).map(|j| (0..len).map(|h| (0..=n).map(|i| z_from[i][j][h]).sum()).collect()).collect();
    let c_from: Vec<Vec<Vec<u64>>> = z_from.iter().map(|row| row.iter().map(cumsum).collect()).collect();
    let c: Vec<Vec<u64>> = z.iter().map(cumsum).collect();
    let immigrants = (0..n)
        .map(|j| (0..len).map(|h| (0..=n).filter(|&i| i != j + 1).map(|i| c_from[i][j][h]).sum()).collect())
        .collect();
    Profiles { z_from, z, c_from, c, immigrants }
}

/// Breadth-first children walks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildrenWalks {
    /// `x[i-1][j-1][l]` for `l` in `0..=n_i`, `n_i` the explored type-`i`
    /// vertices.
    pub x: Vec<Vec<Vec<i64>>>,
    /// `y[j-1][l] = sum_{m <= l} chi^j(spine_m)` for `l < h_max`.
    pub y: Vec<Vec<i64>>,
}

pub fn children_walks(forest: &ColoredForest) -> ChildrenWalks {
    let n = forest.n_types();
    let mut x: Vec<Vec<Vec<i64>>> = vec![vec![vec![0i64]; n]; n];
    let mut y: Vec<Vec<i64>> = vec![Vec::new(); n];
    let mut counts = vec![0i64; n + 1];
    for v in 0..forest.n_explored() {
        counts.iter_mut().for_each(|c| *c = 0);
        for w in forest.children(v).expect("explored") {
            counts[forest.color(w)] += 1;
        }
        let i = forest.color(v);
        for j in 1..=n {
            if i == 0 {
                let prev = y[j - 1].last().copied().unwrap_or(0);
                y[j - 1].push(prev + counts[j]);
            } else {
                let walk = &mut x[i - 1][j - 1];
                let prev = *walk.last().expect("starts at 0");
                walk.push(prev + counts[j] - (i == j) as i64);
            }
        }
    }
    ChildrenWalks { x, y }
}

/// All encodings of one forest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingBundle {
    pub n_types: usize,
    pub h_max: u32,
    pub roots: Vec<u64>,
    pub types: Vec<TypeEncoding>,
    pub profiles: Profiles,
    pub walks: ChildrenWalks,
    /// Left height `cevH^j` on the in-horizon prefix of each type.
    pub left_height: Vec<Vec<u32>>,
    /// Explored indices excluded from `left_height` for lack of horizon.
    pub left_height_excluded: Vec<usize>,
}

impl EncodingBundle {
    pub fn new(forest: &ColoredForest) -> Result<Self> {
        let n = forest.n_types();
        let types = (1..=n).map(|j| depth_first_order(forest, j)).collect::<Result<Vec<_>>>()?;
        let profiles = profiles(forest);
        let walks = children_walks(forest);
        let mut left = Vec::with_capacity(n);
        let mut excluded = Vec::with_capacity(n);
        for t in &types {
            let (v, e) = left_height(&t.height, &t.running_min, &profiles.immigrants[t.j - 1]);
            left.push(v);
            excluded.push(e);
        }
        Ok(EncodingBundle {
            n_types: n,
            h_max: forest.h_max(),
            roots: forest.roots().to_vec(),
            types,
            profiles,
            walks,
            left_height: left,
            left_height_excluded: excluded,
        })
    }

    pub fn ty(&self, j: usize) -> &TypeEncoding {
        &self.types[j - 1]
    }
}

/// `cevH(i) = H(i) + inf{h : I(h) > -min D[0..=i]}`.
///
/// Returns the values on the longest prefix where the infimum is attained
/// within `0..=h_max`, and the number of remaining indices.
pub fn left_height(height: &[u32], running_min: &[i64], immigrants: &[u64]) -> (Vec<u32>, usize) {
    let mut out = Vec::with_capacity(height.len());
    let mut h = 0usize;
    for (i, &hi) in height.iter().enumerate() {
        let comp = (-running_min[i]) as u64;
        while h < immigrants.len() && immigrants[h] <= comp {
            h += 1;
        }
        if h == immigrants.len() {
            return (out, height.len() - i);
        }
        out.push(hi + h as u32);
    }
    (out, 0)
}

/// Outcome of one family of exact identities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub checked: u64,
    pub violations: u64,
    pub first_violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
    /// Indices that could not be checked because truncation hides one side.
    pub domain_issues: Vec<String>,
}

impl IdentityReport {
    pub fn violations(&self) -> u64 {
        self.checks.iter().map(|c| c.violations).sum()
    }

    pub fn is_ok(&self) -> bool {
        self.violations() == 0
    }

    /// Adds the counts of `other` into `self`, keeping the first witnesses.
    pub fn merge(&mut self, other: &IdentityReport) {
        for c in &other.checks {
            match self.checks.iter_mut().find(|d| d.name == c.name) {
                Some(d) => {
                    d.checked += c.checked;
                    d.violations += c.violations;
                    if d.first_violation.is_none() {
                        d.first_violation.clone_from(&c.first_violation);
                    }
                }
                None => self.checks.push(c.clone()),
            }
        }
        self.domain_issues.extend(other.domain_issues.iter().cloned());
    }
}

struct Tally<'a> {
    check: &'a mut IdentityCheck,
}

impl Tally<'_> {
    fn assert(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.check.checked += 1;
        if !ok {
            self.check.violations += 1;
            if self.check.first_violation.is_none() {
                self.check.first_violation = Some(what());
            }
        }
    }
}

/// Check names used by [`verify_identities`].
pub const IDENTITY_NAMES: [&str; 8] = [
    "excursion",
    "component_count",
    "height_from_lukasiewicz",
    "left_height",
    "profile_partition",
    "immigrant_census",
    "time_change",
    "cumulative_time_change",
];

/// Runs every exact identity of the bundle against direct measurements on
/// the forest.
pub fn verify_identities(forest: &ColoredForest, b: &EncodingBundle) -> IdentityReport {
    let mut checks: Vec<IdentityCheck> = IDENTITY_NAMES
        .iter()
        .map(|n| IdentityCheck { name: n.to_string(), checked: 0, violations: 0, first_violation: None })
        .collect();
    let mut domain_issues = Vec::new();
    let n = b.n_types;
    let h_max = b.h_max as usize;

    // distance to the component root, measured on the forest
    let mut dist = vec![0u32; forest.len()];
    for v in 0..forest.len() {
        if let Some(p) = forest.parent(v) {
            if forest.color(p) == forest.color(v) {
                dist[v] = dist[p] + 1;
            }
        }
    }

    for t in &b.types {
        let j = t.j;
        {
            let mut tl = Tally { check: &mut checks[0] };
            for (k, c) in t.components.iter().enumerate() {
                let base = -(k as i64);
                for i in c.start..c.start + c.len {
                    tl.assert(t.lukasiewicz[i] > base - 1, || format!("type {j}: D({i}) left component {k} early"));
                }
                if c.complete {
                    let end = c.start + c.len;
                    tl.assert(t.lukasiewicz[end] == base - 1, || format!("type {j}: component {k} ends at D({end}) = {}", t.lukasiewicz[end]));
                }
            }
        }
        {
            let mut tl = Tally { check: &mut checks[1] };
            for (k, c) in t.components.iter().enumerate() {
                for i in c.start..c.start + c.len {
                    tl.assert(-t.running_min[i] == k as i64, || format!("type {j}: -min D({i}) = {} but component {k}", -t.running_min[i]));
                }
            }
        }
        {
            let mut tl = Tally { check: &mut checks[2] };
            for (i, &v) in t.order.iter().enumerate() {
                tl.assert(t.height[i] == dist[v], || format!("type {j}: H({i}) = {} but vertex {v} is at depth {}", t.height[i], dist[v]));
            }
        }
        {
            let lh = &b.left_height[j - 1];
            let mut tl = Tally { check: &mut checks[3] };
            for (i, &v) in t.order.iter().enumerate().take(lh.len()) {
                tl.assert(lh[i] == forest.height(v), || format!("type {j}: cevH({i}) = {} but vertex {v} has height {}", lh[i], forest.height(v)));
            }
            if b.left_height_excluded[j - 1] > 0 {
                domain_issues.push(format!("type {j}: {} indices beyond the immigrant horizon", b.left_height_excluded[j - 1]));
            }
        }
    }

    let p = &b.profiles;
    {
        let census = crate::forest::vertex_census(forest);
        let mut tl = Tally { check: &mut checks[4] };
        for j in 1..=n {
            for h in 0..=h_max {
                let s: u64 = (0..=n).map(|i| p.z_from[i][j - 1][h]).sum();
                tl.assert(s == p.z[j - 1][h] && s == census[j][h], || format!("type {j}, height {h}: sum_i Z^(i->j) = {s}, Z = {}, census {}", p.z[j - 1][h], census[j][h]));
            }
        }
    }
    {
        let mut roots_by_height = vec![vec![0u64; h_max + 1]; n];
        for v in 0..forest.len() {
            let j = forest.color(v);
            if j > 0 && is_j_root(forest, v, j) {
                roots_by_height[j - 1][forest.height(v) as usize] += 1;
            }
        }
        let mut tl = Tally { check: &mut checks[5] };
        for j in 1..=n {
            let mut acc = 0;
            for h in 0..=h_max {
                acc += roots_by_height[j - 1][h];
                tl.assert(p.immigrants[j - 1][h] == acc, || format!("type {j}: I({h}) = {} but {acc} roots at height <= {h}", p.immigrants[j - 1][h]));
            }
        }
    }
    let w = &b.walks;
    let x_at = |i: usize, j: usize, l: u64| w.x[i - 1][j - 1].get(l as usize).copied();
    {
        let mut issues = Vec::new();
        let mut tl = Tally { check: &mut checks[6] };
        for j in 1..=n {
            for h in 0..h_max {
                let mut rhs = b.roots[j - 1] as i64 + w.y[j - 1][h];
                let mut known = true;
                for i in 1..=n {
                    match x_at(i, j, p.c[i - 1][h]) {
                        Some(v) => rhs += v,
                        None => known = false,
                    }
                }
                if !known {
                    issues.push(format!("time_change: type {j}, height {h} outside walk domain"));
                    continue;
                }
                let lhs = p.z[j - 1][h + 1] as i64;
                tl.assert(lhs == rhs, || format!("type {j}, height {h}: Z(h+1) = {lhs} but time change gives {rhs}"));
            }
        }
        domain_issues.extend(issues);
    }
    {
        let mut issues = Vec::new();
        let mut tl = Tally { check: &mut checks[7] };
        for j in 1..=n {
            tl.assert(p.c_from[0][j - 1][0] == b.roots[j - 1], || format!("type {j}: C^(0->j)(0) != k_j"));
            for h in 1..=h_max {
                let lhs0 = p.c_from[0][j - 1][h] as i64;
                let rhs0 = b.roots[j - 1] as i64 + w.y[j - 1][h - 1];
                tl.assert(lhs0 == rhs0, || format!("i=0, j={j}, h={h}: C = {lhs0}, k_j + Y(h-1) = {rhs0}"));
                for i in 1..=n {
                    let arg = p.c[i - 1][h - 1];
                    let Some(xv) = x_at(i, j, arg) else {
                        issues.push(format!("cumulative_time_change: i={i}, j={j}, h={h} outside walk domain"));
                        continue;
                    };
                    let rhs = if i == j { xv + arg as i64 } else { xv };
                    let lhs = p.c_from[i][j - 1][h] as i64;
                    tl.assert(lhs == rhs, || format!("i={i}, j={j}, h={h}: C^(i->j) = {lhs} but walk gives {rhs}"));
                }
            }
        }
        domain_issues.extend(issues);
    }
    IdentityReport { checks, domain_issues }
}

/// Result of the increment-law goodness-of-fit test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementLawCheck {
    pub increments: u64,
    pub fit: ChiSquareResult,
}

/// Minimum pooled increments for [`increment_law_check`].
pub const MIN_INCREMENTS: usize = 100;

/// Pools `D^j` increments plus one over `replicates` forests and tests them
/// against the diagonal law `mu^{j,j}`.
pub fn increment_law_check(
    ensemble: &OffspringEnsemble,
    j: usize,
    h_max: u32,
    replicates: u64,
    seed: u64,
) -> Result<IncrementLawCheck> {
    let mut counts: Vec<u64> = Vec::new();
    let mut total = 0u64;
    for r in 0..replicates {
        let f = generate_forest_stream(ensemble, h_max, seed, r)?;
        let t = depth_first_order(&f, j)?;
        for &c in &t.children {
            let c = c as usize;
            if c >= counts.len() {
                counts.resize(c + 1, 0);
            }
            counts[c] += 1;
            total += 1;
        }
    }
    if (total as usize) < MIN_INCREMENTS {
        return Err(Error::InsufficientSamples { got: total as usize, need: MIN_INCREMENTS });
    }
    let law = &ensemble.mu[j - 1][j - 1];
    let probs: Vec<f64> = (0..counts.len().max(1) as u64 + 64).map(|k| law.pmf(k)).collect();
    let fit = chi_square_gof(&counts, &probs)?;
    Ok(IncrementLawCheck { increments: total, fit })
}

/// One exported path file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportedPath {
    pub process: String,
    pub j: usize,
    pub i: Option<usize>,
    pub file: String,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub seed: Option<u64>,
    pub h_max: u32,
    pub config: Option<serde_json::Value>,
    pub paths: Vec<ExportedPath>,
}

fn write_csv<T: std::fmt::Display>(path: &Path, comment: &str, values: &[T]) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    for line in comment.lines() {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "index,value")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(w, "{i},{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one `index,value` CSV per (process, type) into `dir` plus a
/// `manifest.json`. `comment` is echoed as `#` lines at the top of each file.
pub fn export_csv(
    b: &EncodingBundle,
    dir: &Path,
    comment: &str,
    seed: Option<u64>,
    config: Option<serde_json::Value>,
) -> Result<ExportManifest> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    let mut emit = |process: &str, j: usize, i: Option<usize>, horizon: usize, f: &dyn Fn(&Path) -> Result<()>| -> Result<()> {
        let file = match i {
            Some(i) => format!("{process}_{i}_{j}.csv"),
            None => format!("{process}_{j}.csv"),
        };
        f(&dir.join(&file))?;
        paths.push(ExportedPath { process: process.into(), j, i, file, horizon });
        Ok(())
    };
    for t in &b.types {
        let j = t.j;
        let lh = &b.left_height[j - 1];
        emit("lukasiewicz", j, None, t.horizon(), &|p| write_csv(p, comment, &t.lukasiewicz))?;
        emit("running_min", j, None, t.horizon(), &|p| write_csv(p, comment, &t.running_min))?;
        emit("height", j, None, t.horizon(), &|p| write_csv(p, comment, &t.height))?;
        emit("left_height", j, None, lh.len(), &|p| write_csv(p, comment, lh))?;
        let pr = &b.profiles;
        let hz = b.h_max as usize;
        emit("profile", j, None, hz, &|p| write_csv(p, comment, &pr.z[j - 1]))?;
        emit("cumulative", j, None, hz, &|p| write_csv(p, comment, &pr.c[j - 1]))?;
        emit("immigrants", j, None, hz, &|p| write_csv(p, comment, &pr.immigrants[j - 1]))?;
        emit("immigration_walk", j, None, b.walks.y[j - 1].len(), &|p| write_csv(p, comment, &b.walks.y[j - 1]))?;
        for i in 0..=b.n_types {
            emit("profile_from", j, Some(i), hz, &|p| write_csv(p, comment, &pr.z_from[i][j - 1]))?;
            if i > 0 {
                let x = &b.walks.x[i - 1][j - 1];
                emit("children_walk", j, Some(i), x.len() - 1, &|p| write_csv(p, comment, x))?;
            }
        }
    }
    let manifest = ExportManifest { seed, h_max: b.h_max, config, paths };
    std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::generate_forest;
    use crate::law::Law;

    #[test]
    fn small_paths() {
        assert_eq!(height_from_lukasiewicz(&[0, 1, 0, -1]), vec![0, 1, 1, 0]);
        assert_eq!(running_minimum(&[0, 1, 0, -1, 0]), vec![0, 0, 0, -1, -1]);
    }

    #[test]
    fn single_leaf_and_cherry() {
        let e = OffspringEnsemble::null(vec![1]);
        let f = generate_forest(&e, 2, 0).unwrap();
        assert_eq!(lukasiewicz_path(&f, 1).unwrap(), vec![0, -1]);
        let e = OffspringEnsemble { mu: vec![vec![Law::Explicit(vec![0.0, 0.0, 1.0])]], nu: vec![Law::Dirac(0)], roots: vec![1], convergence: false };
        let f = generate_forest(&e, 1, 0).unwrap();
        let t = depth_first_order(&f, 1).unwrap();
        // the two children sit at the truncation height
        assert_eq!(t.lukasiewicz, vec![0, 1]);
        assert!(t.blocked.is_some());
    }

    #[test]
    fn unary_chain_left_height() {
        let e = OffspringEnsemble { mu: vec![vec![Law::Dirac(1)]], nu: vec![Law::Dirac(0)], roots: vec![1], convergence: false };
        let f = generate_forest(&e, 5, 0).unwrap();
        let b = EncodingBundle::new(&f).unwrap();
        assert_eq!(b.ty(1).height, vec![0, 1, 2, 3, 4]);
        assert_eq!(b.left_height[0], vec![0, 1, 2, 3, 4]);
        assert!(verify_identities(&f, &b).is_ok());
    }

    #[test]
    fn null_ensemble_identities() {
        let f = generate_forest(&OffspringEnsemble::null(vec![1, 1]), 3, 0).unwrap();
        let b = EncodingBundle::new(&f).unwrap();
        assert_eq!(b.profiles.z_from[0][0], vec![1, 0, 0, 0]);
        assert!(b.walks.x[0][0].iter().enumerate().all(|(l, &x)| x == -(l as i64)));
        assert!(b.walks.y.iter().flatten().all(|&y| y == 0));
        let r = verify_identities(&f, &b);
        assert!(r.is_ok(), "{r:?}");
    }

    #[test]
    fn degenerate_increment_law() {
        let e = OffspringEnsemble { mu: vec![vec![Law::Dirac(1)]], nu: vec![Law::Dirac(1)], roots: vec![3], convergence: false };
        let r = increment_law_check(&e, 1, 50, 3, 0).unwrap();
        assert_eq!(r.fit.p_value, 1.0);
    }
}

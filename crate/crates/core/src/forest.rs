//! Colored forests and the layer-by-layer GWI generator.
//!
//! Vertex labels are breadth-first: heights are nondecreasing in the label,
//! parents at one height are expanded in label order and each parent's
//! children form one contiguous block ordered by color `1..=N` with color 0
//! last. Roots at height 0 follow the same color rule. Consequently the
//! color-0 spine vertex at height `h` is always the last vertex of level `h`.

use std::io::{BufRead, Write};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::law::{Law, LawSampler};
use crate::rng::{stream_rng, SimRng};

/// Default vertex budget per forest.
pub const DEFAULT_VERTEX_BUDGET: usize = 10_000_000;

const NO_PARENT: u32 = u32::MAX;

/// Laws `mu[i-1][j-1]` for a color-`i` parent, immigration `nu[j-1]` and
/// root counts `roots[j-1]` (the color-0 root is implicit).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringEnsemble {
    pub mu: Vec<Vec<Law>>,
    pub nu: Vec<Law>,
    pub roots: Vec<u64>,
    /// Require (sub)critical diagonal laws, as convergence runs do.
    #[serde(default)]
    pub convergence: bool,
}

impl OffspringEnsemble {
    pub fn n_types(&self) -> usize {
        self.nu.len()
    }

    /// Every law equal to `dirac(0)`: the forest is roots plus spine.
    pub fn null(roots: Vec<u64>) -> Self {
        let n = roots.len();
        OffspringEnsemble {
            mu: vec![vec![Law::Dirac(0); n]; n],
            nu: vec![Law::Dirac(0); n],
            roots,
            convergence: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_types();
        if n == 0 || n > 254 {
            return Err(Error::InvalidEnsemble(format!("number of types {n} must lie in 1..=254")));
        }
        if self.roots.len() != n || self.mu.len() != n || self.mu.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidEnsemble(format!(
                "shape mismatch: expected {n}x{n} offspring laws and {n} root counts"
            )));
        }
        for law in self.mu.iter().flatten().chain(&self.nu) {
            law.validate()?;
        }
        if self.convergence {
            for j in 0..n {
                let m = self.mu[j][j].mean();
                if m > 1.0 + 1e-12 {
                    return Err(Error::InvalidEnsemble(format!(
                        "diagonal law {} for type {} has mean {m} > 1",
                        self.mu[j][j],
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

struct EnsembleSampler {
    n: usize,
    mu: Vec<LawSampler>,
    nu: Vec<LawSampler>,
}

impl EnsembleSampler {
    fn new(e: &OffspringEnsemble) -> Result<Self> {
        e.validate()?;
        Ok(EnsembleSampler {
            n: e.n_types(),
            mu: e.mu.iter().flatten().map(Law::sampler).collect::<Result<_>>()?,
            nu: e.nu.iter().map(Law::sampler).collect::<Result<_>>()?,
        })
    }
}

/// A colored forest truncated at height `h_max`, stored column-wise.
///
/// Vertices at height `h_max` exist but their children are unknown.
#[derive(Debug, Clone, PartialEq)]
pub struct ColoredForest {
    n_types: usize,
    h_max: u32,
    roots: Vec<u64>,
    colors: Vec<u8>,
    parents: Vec<u32>,
    heights: Vec<u32>,
    /// `level_start[h]..level_start[h + 1]` is level `h`.
    level_start: Vec<usize>,
    /// Children of explored vertex `v` are `child_start[v]..child_start[v + 1]`.
    child_start: Vec<u32>,
}

impl ColoredForest {
    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn h_max(&self) -> u32 {
        self.h_max
    }

    /// `(k_1, ..., k_N)`.
    pub fn roots(&self) -> &[u64] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn colors(&self) -> &[u8] {
        &self.colors
    }

    pub fn heights(&self) -> &[u32] {
        &self.heights
    }

    #[inline]
    pub fn color(&self, v: usize) -> usize {
        self.colors[v] as usize
    }

    #[inline]
    pub fn height(&self, v: usize) -> u32 {
        self.heights[v]
    }

    #[inline]
    pub fn parent(&self, v: usize) -> Option<usize> {
        let p = self.parents[v];
        (p != NO_PARENT).then_some(p as usize)
    }

    pub fn level(&self, h: u32) -> Range<usize> {
        self.level_start[h as usize]..self.level_start[h as usize + 1]
    }

    /// Vertices whose children are known, i.e. of height below `h_max`.
    pub fn n_explored(&self) -> usize {
        self.level_start[self.h_max as usize]
    }

    /// `None` when `v` sits at the truncation height.
    #[inline]
    pub fn children(&self, v: usize) -> Option<Range<usize>> {
        (v < self.n_explored()).then(|| self.child_start[v] as usize..self.child_start[v + 1] as usize)
    }

    /// Number of color-`j` children of `v`, if known.
    pub fn child_count(&self, v: usize, j: usize) -> Option<u64> {
        self.children(v).map(|r| r.filter(|&c| self.color(c) == j).count() as u64)
    }

    /// The color-0 vertex at height `h`.
    pub fn spine(&self, h: u32) -> usize {
        self.level_start[h as usize + 1] - 1
    }

    /// Builds a forest from explicit columns, checking every invariant.
    pub fn from_parts(
        n_types: usize,
        h_max: u32,
        roots: Vec<u64>,
        colors: Vec<u8>,
        parents: Vec<Option<usize>>,
        heights: Vec<u32>,
    ) -> Result<Self> {
        let n = colors.len();
        if parents.len() != n || heights.len() != n {
            return Err(Error::InvalidArgument("column lengths differ".into()));
        }
        if roots.len() != n_types {
            return Err(Error::InvalidArgument(format!("root vector has {} entries, expected {n_types}", roots.len())));
        }
        let viol = |vertex: usize, reason: String| Err(Error::InvariantViolation { vertex, reason });
        let mut level_start = vec![0usize];
        let mut child_start: Vec<u32> = Vec::new();
        for v in 0..n {
            let h = heights[v];
            if h > h_max {
                return viol(v, format!("height {h} exceeds truncation height {h_max}"));
            }
            let prev_h = if v == 0 { 0 } else { heights[v - 1] };
            if h < prev_h {
                return viol(v, format!("height {h} after height {prev_h} breaks breadth-first order"));
            }
            if h > prev_h + 1 {
                return viol(v, format!("level {} is empty", prev_h + 1));
            }
            if h == prev_h + 1 {
                level_start.push(v);
            }
            match parents[v] {
                None if h != 0 => return viol(v, "non-root vertex has no parent".into()),
                None => {}
                Some(_) if h == 0 => return viol(v, "root has a parent".into()),
                Some(p) => {
                    if p >= v {
                        return viol(v, format!("parent {p} does not precede the vertex"));
                    }
                    if heights[p] + 1 != h {
                        return viol(v, format!("height {h} but parent {p} has height {}", heights[p]));
                    }
                }
            }
            let c = colors[v] as usize;
            if c > n_types {
                return viol(v, format!("color {c} exceeds number of types {n_types}"));
            }
            if c == 0 {
                if let Some(p) = parents[v] {
                    if colors[p] != 0 {
                        return viol(v, format!("color-0 vertex has parent {p} of color {}", colors[p]));
                    }
                }
            }
            // siblings (or roots) must be contiguous and color-sorted with 0 last
            if v > 0 && parents[v - 1] == parents[v] {
                let key = |c: u8| if c == 0 { u16::MAX } else { c as u16 };
                if key(colors[v - 1]) > key(c as u8) {
                    return viol(v, format!("sibling order: color {} precedes color {c}", colors[v - 1]));
                }
            }
            if let (Some(p), Some(q)) = (parents[v], v.checked_sub(1).and_then(|u| parents[u])) {
                if p < q {
                    return viol(v, format!("children of {p} follow children of {q}"));
                }
            }
        }
        let levels = level_start.len();
        level_start.push(n);
        if n == 0 || levels != h_max as usize + 1 {
            return viol(n, format!("forest has {} levels, expected {}", if n == 0 { 0 } else { levels }, h_max + 1));
        }
        for h in 0..=h_max as usize {
            let zeros: Vec<usize> = (level_start[h]..level_start[h + 1]).filter(|&v| colors[v] == 0).collect();
            if zeros.len() != 1 {
                return viol(level_start[h], format!("height {h} has {} color-0 vertices, expected 1", zeros.len()));
            }
        }
        for j in 1..=n_types {
            let got = (level_start[0]..level_start[1]).filter(|&v| colors[v] as usize == j).count() as u64;
            if got != roots[j - 1] {
                return viol(0, format!("{got} roots of color {j}, expected {}", roots[j - 1]));
            }
        }
        // contiguous child blocks in parent order
        let explored = level_start[h_max as usize];
        let mut next = level_start.get(1).copied().unwrap_or(n);
        for v in 0..explored {
            child_start.push(next as u32);
            while next < n && parents[next] == Some(v) {
                next += 1;
            }
        }
        child_start.push(next as u32);
        if next != n {
            return viol(next, "vertex is not in its parent's child block".into());
        }
        Ok(ColoredForest {
            n_types,
            h_max,
            roots,
            colors,
            parents: parents.into_iter().map(|p| p.map_or(NO_PARENT, |p| p as u32)).collect(),
            heights,
            level_start,
            child_start,
        })
    }

    /// Re-checks every invariant; generated forests always pass.
    pub fn validate(&self) -> Result<()> {
        ColoredForest::from_parts(
            self.n_types,
            self.h_max,
            self.roots.clone(),
            self.colors.clone(),
            (0..self.len()).map(|v| self.parent(v)).collect(),
            self.heights.clone(),
        )
        .map(|_| ())
    }
}

/// `counts[j][h]` = number of color-`j` vertices at height `h`.
pub fn vertex_census(forest: &ColoredForest) -> Vec<Vec<u64>> {
    let mut counts = vec![vec![0u64; forest.h_max as usize + 1]; forest.n_types + 1];
    for v in 0..forest.len() {
        counts[forest.color(v)][forest.height(v) as usize] += 1;
    }
    counts
}

/// Incremental generator. Growing to `h` and later to `h' > h` yields the
/// same forest as growing to `h'` directly.
pub struct ForestGenerator {
    sampler: EnsembleSampler,
    rng: SimRng,
    forest: ColoredForest,
    budget: usize,
}

impl ForestGenerator {
    /// The forest at height 0 for the given seed and stream.
    pub fn new(ensemble: &OffspringEnsemble, seed: u64, stream: u64) -> Result<Self> {
        let sampler = EnsembleSampler::new(ensemble)?;
        let n = sampler.n;
        let total: u64 = ensemble.roots.iter().sum::<u64>() + 1;
        if total > DEFAULT_VERTEX_BUDGET as u64 {
            return Err(Error::ResourceLimit { what: "root layer".into(), budget: DEFAULT_VERTEX_BUDGET });
        }
        let mut colors = Vec::with_capacity(total as usize);
        for j in 1..=n {
            colors.extend(std::iter::repeat_n(j as u8, ensemble.roots[j - 1] as usize));
        }
        colors.push(0);
        let len = colors.len();
        let forest = ColoredForest {
            n_types: n,
            h_max: 0,
            roots: ensemble.roots.clone(),
            colors,
            parents: vec![NO_PARENT; len],
            heights: vec![0; len],
            level_start: vec![0, len],
            child_start: vec![len as u32],
        };
        Ok(ForestGenerator { sampler, rng: stream_rng(seed, stream), forest, budget: DEFAULT_VERTEX_BUDGET })
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget.min(NO_PARENT as usize);
        self
    }

    pub fn forest(&self) -> &ColoredForest {
        &self.forest
    }

    pub fn into_forest(self) -> ColoredForest {
        self.forest
    }

    /// Extends the forest to truncation height `h_max`. After an error the
    /// generator is left mid-level and must be discarded.
    pub fn grow_to(&mut self, h_max: u32) -> Result<()> {
        while self.forest.h_max < h_max {
            self.grow_one()?;
        }
        Ok(())
    }

    fn grow_one(&mut self) -> Result<()> {
        let n_types = self.sampler.n;
        let f = &mut self.forest;
        let h = f.h_max;
        let level = f.level(h);
        f.child_start.pop();
        for v in level {
            f.child_start.push(f.colors.len() as u32);
            let parent_color = f.colors[v] as usize;
            let row = if parent_color == 0 {
                &self.sampler.nu[..]
            } else {
                &self.sampler.mu[(parent_color - 1) * n_types..parent_color * n_types]
            };
            for (j, s) in row.iter().enumerate() {
                let c = s.sample(&mut self.rng) as usize;
                if f.colors.len() + c + 1 > self.budget {
                    return Err(Error::ResourceLimit { what: format!("forest at height {}", h + 1), budget: self.budget });
                }
                f.colors.extend(std::iter::repeat_n(j as u8 + 1, c));
            }
            if parent_color == 0 {
                f.colors.push(0);
            }
            let added = f.colors.len() - f.parents.len();
            f.parents.extend(std::iter::repeat_n(v as u32, added));
            f.heights.extend(std::iter::repeat_n(h + 1, added));
        }
        f.child_start.push(f.colors.len() as u32);
        f.level_start.push(f.colors.len());
        f.h_max = h + 1;
        Ok(())
    }
}

/// GWI forest truncated at `h_max`, drawn from stream 0 of `seed`.
pub fn generate_forest(ensemble: &OffspringEnsemble, h_max: u32, seed: u64) -> Result<ColoredForest> {
    generate_forest_stream(ensemble, h_max, seed, 0)
}

pub fn generate_forest_stream(ensemble: &OffspringEnsemble, h_max: u32, seed: u64, stream: u64) -> Result<ColoredForest> {
    let mut g = ForestGenerator::new(ensemble, seed, stream)?;
    g.grow_to(h_max)?;
    Ok(g.into_forest())
}

/// Format tag written in the header line of forest files.
pub const FOREST_FORMAT: &str = "gwi-forest/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestHeader {
    pub format: String,
    pub n_types: usize,
    pub h_max: u32,
    pub roots: Vec<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub config: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VertexRecord {
    pub index: usize,
    pub color: u8,
    pub parent: Option<usize>,
    pub height: u32,
}

/// Writes the header line then one JSON object per vertex.
pub fn write_forest_jsonl<W: Write>(
    forest: &ColoredForest,
    seed: Option<u64>,
    config: Option<serde_json::Value>,
    mut w: W,
) -> Result<()> {
    let header = ForestHeader {
        format: FOREST_FORMAT.into(),
        n_types: forest.n_types,
        h_max: forest.h_max,
        roots: forest.roots.clone(),
        seed,
        config,
    };
    serde_json::to_writer(&mut w, &header)?;
    writeln!(w)?;
    for v in 0..forest.len() {
        let rec = VertexRecord { index: v, color: forest.colors[v], parent: forest.parent(v), height: forest.heights[v] };
        serde_json::to_writer(&mut w, &rec)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a forest written by [`write_forest_jsonl`]. The header line is
/// optional; without it the type count, truncation height and root vector
/// are inferred. All invariants are validated.
pub fn read_forest_jsonl<R: BufRead>(r: R) -> Result<(ColoredForest, Option<ForestHeader>)> {
    let mut header: Option<ForestHeader> = None;
    let (mut colors, mut parents, mut heights) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if value.get("format").is_some() {
            if header.is_some() || !colors.is_empty() {
                return Err(Error::Parse(format!("line {}: unexpected header", lineno + 1)));
            }
            let h: ForestHeader = serde_json::from_value(value)?;
            if h.format != FOREST_FORMAT {
                return Err(Error::Parse(format!("unsupported format `{}`", h.format)));
            }
            header = Some(h);
            continue;
        }
        let rec: VertexRecord =
            serde_json::from_value(value).map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        if rec.index != colors.len() {
            return Err(Error::InvariantViolation {
                vertex: rec.index,
                reason: format!("index out of sequence, expected {}", colors.len()),
            });
        }
        colors.push(rec.color);
        parents.push(rec.parent);
        heights.push(rec.height);
    }
    let (n_types, h_max, roots) = match &header {
        Some(h) => (h.n_types, h.h_max, h.roots.clone()),
        None => {
            let n_types = colors.iter().copied().max().unwrap_or(0) as usize;
            let h_max = heights.iter().copied().max().unwrap_or(0);
            let mut roots = vec![0u64; n_types];
            for (c, h) in colors.iter().zip(&heights) {
                if *h == 0 && *c > 0 {
                    roots[*c as usize - 1] += 1;
                }
            }
            (n_types, h_max, roots)
        }
    };
    let forest = ColoredForest::from_parts(n_types, h_max, roots, colors, parents, heights)?;
    Ok((forest, header))
}

//! Per-replicate samples of rescaled discrete processes.

use serde::{Deserialize, Serialize};

use super::rescale::{RescaledPath, Source};
use crate::encodings::depth_first_prefix;
use crate::error::{Error, Result};
use crate::forest::{vertex_census, ColoredForest, ForestGenerator, OffspringEnsemble};
use crate::law::Law;
use crate::rng::stream_rng;

/// `Z^j([gamma v]) / p` for every type (outer) and level (inner).
pub fn profile_sample(e: &OffspringEnsemble, p: u32, gamma: u64, v_list: &[f64], budget: usize, seed: u64, stream: u64) -> Result<Vec<Vec<f64>>> {
    let (_, ts) = Source::Profile.scales(p, gamma);
    let idx: Vec<usize> = v_list.iter().map(|&v| (v * ts + 1e-9).floor() as usize).collect();
    let top = idx.iter().copied().max().unwrap_or(0) as u32;
    let mut g = ForestGenerator::new(e, seed, stream)?.with_budget(budget);
    g.grow_to(top)?;
    let census = vertex_census(g.forest());
    Ok((1..=e.n_types()).map(|j| idx.iter().map(|&h| census[j][h] as f64 / p as f64).collect()).collect())
}

/// Rescaled depth-first quantities of one type at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkPoint {
    pub d: f64,
    pub running_min: f64,
    pub h: f64,
    /// `cevH / gamma`, when requested.
    pub left_height: Option<f64>,
    /// `(cevH - H) / gamma`, the rescaled immigrant first passage.
    pub drift: Option<f64>,
}

/// `I^j(h)` for `h` in `0..=h_max`.
fn j_root_census(f: &ColoredForest, j: usize) -> Vec<u64> {
    let mut by_level = vec![0u64; f.h_max() as usize + 1];
    for v in 0..f.len() {
        if f.color(v) == j && f.parent(v).is_none_or(|q| f.color(q) != j) {
            by_level[f.height(v) as usize] += 1;
        }
    }
    let mut acc = 0;
    by_level.iter().map(|x| {
        acc += x;
        acc
    }).collect()
}

/// Grows one forest until the depth-first walk of every type in `types`
/// covers every time in `t_list` (and, with `left`, until each immigrant
/// counter passes the component count), then reads the rescaled values
/// there. Returns `points[type][time]`.
#[allow(clippy::too_many_arguments)]
pub fn walk_sample(
    e: &OffspringEnsemble,
    p: u32,
    gamma: u64,
    types: &[usize],
    t_list: &[f64],
    left: bool,
    budget: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<Vec<WalkPoint>>> {
    let (_, ts) = Source::Lukasiewicz.scales(p, gamma);
    let idx: Vec<usize> = t_list.iter().map(|&t| (t * ts + 1e-9).floor() as usize).collect();
    let last = idx.iter().copied().max().unwrap_or(0);
    let mut g = ForestGenerator::new(e, seed, stream)?.with_budget(budget);
    // heights reach a few gamma by time 1; growth is incremental, so small
    // steps past that only cost extra depth-first passes
    let mut h = 3 * (gamma as u32).max(4);
    let mut done: Vec<Option<Vec<WalkPoint>>> = vec![None; types.len()];
    loop {
        g.grow_to(h)?;
        let f = g.forest();
        for (slot, &j) in done.iter_mut().zip(types) {
            if slot.is_none() {
                *slot = read_walk(f, j, p, gamma, &idx, last, left)?;
            }
        }
        if done.iter().all(Option::is_some) {
            return Ok(done.into_iter().map(|d| d.expect("checked")).collect());
        }
        h = h.checked_add((gamma as u32 / 2).max(2)).ok_or(Error::ResourceLimit { what: "forest height".into(), budget: u32::MAX as usize })?;
    }
}

fn read_walk(f: &ColoredForest, j: usize, p: u32, gamma: u64, idx: &[usize], last: usize, left: bool) -> Result<Option<Vec<WalkPoint>>> {
    let enc = depth_first_prefix(f, j, last + 1)?;
    if enc.horizon() <= last {
        return Ok(None);
    }
    let imm = if left { Some(j_root_census(f, j)) } else { None };
    if !imm.as_ref().is_none_or(|i| i[i.len() - 1] as i64 > -enc.running_min[last]) {
        return Ok(None);
    }
    let dp = RescaledPath::lukasiewicz(&enc, p, gamma);
    let mp = RescaledPath::running_min(&enc, p, gamma);
    let hp = RescaledPath::height(&enc, p, gamma);
    let g = gamma as f64;
    Ok(Some(
        idx.iter()
            .map(|&i| {
                let first = imm.as_ref().map(|imm| {
                    let comp = (-enc.running_min[i]) as u64;
                    imm.iter().position(|&c| c > comp).expect("covered above")
                });
                WalkPoint {
                    d: dp.values[i],
                    running_min: mp.values[i],
                    h: hp.values[i],
                    left_height: first.map(|h| (h + enc.height[i] as usize) as f64 / g),
                    drift: first.map(|h| h as f64 / g),
                }
            })
            .collect(),
    ))
}

/// `(1 / p) sum_{l < [p gamma t]} (xi_l - 1)` with `xi_l` i.i.d. from `law`.
pub fn iid_walk_sample(law: &Law, p: u32, gamma: u64, t: f64, seed: u64, stream: u64) -> Result<f64> {
    let s = law.sampler()?;
    let n = (p as f64 * gamma as f64 * t + 1e-9).floor() as u64;
    let mut rng = stream_rng(seed, stream);
    let mut acc: i64 = 0;
    for _ in 0..n {
        acc += s.sample(&mut rng) as i64 - 1;
    }
    Ok(acc as f64 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encodings::EncodingBundle;
    use crate::family::{brownian_family, AdmissibleMechanism};
    use crate::forest::{generate_forest_stream, DEFAULT_VERTEX_BUDGET};

    #[test]
    fn walk_sample_matches_full_encoding() {
        let m = AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.5);
        let p = 10;
        let (e, g) = brownian_family(&m, p).unwrap();
        let pts = walk_sample(&e, p, g, &[1], &[0.0, 0.5, 1.0], true, DEFAULT_VERTEX_BUDGET, 3, 7).unwrap().remove(0);
        assert_eq!((pts[0].d, pts[0].h), (0.0, 0.0));
        // regrow far enough and read the same indices from the full bundle
        let f = generate_forest_stream(&e, 400, 3, 7).unwrap();
        let b = EncodingBundle::new(&f).unwrap();
        let t = b.ty(1);
        for (pt, i) in pts.iter().zip([0usize, 50, 100]) {
            assert_eq!(pt.d, t.lukasiewicz[i] as f64 / 10.0);
            assert_eq!(pt.h, t.height[i] as f64 / 10.0);
            assert_eq!(pt.left_height, Some(b.left_height[0][i] as f64 / 10.0));
        }
    }

    #[test]
    fn profile_sample_reads_census() {
        let m = AdmissibleMechanism::one_type(0.5, 0.0, 1.0, 0.3);
        let (e, g) = brownian_family(&m, 20).unwrap();
        let z = profile_sample(&e, 20, g, &[0.0, 1.0], DEFAULT_VERTEX_BUDGET, 1, 0).unwrap();
        assert_eq!(z[0][0], 0.3);
        assert!(z[0][1] >= 0.0);
    }
}

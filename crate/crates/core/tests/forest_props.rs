mod common;

use gwforest::forest::{
    generate_forest, generate_forest_stream, read_forest_jsonl, vertex_census, write_forest_jsonl, ColoredForest, ForestGenerator,
    OffspringEnsemble,
};
use gwforest::law::Law;
use gwforest::rng::stream_rng;
use gwforest::Error;
use proptest::prelude::*;

fn ensemble_from(seed: u64, n: usize) -> OffspringEnsemble {
    common::random_ensemble(&mut stream_rng(seed, 999), n)
}

/// Every structural invariant, checked vertex by vertex from the columns.
fn assert_invariants(f: &ColoredForest, e: &OffspringEnsemble) {
    let n = e.n_types();
    let kids = common::child_lists(f);
    let mut spine_per_level = vec![0u32; f.h_max() as usize + 1];
    let mut roots = vec![0u64; n];
    for v in 0..f.len() {
        let c = f.color(v);
        assert!(c <= n);
        match f.parent(v) {
            None => {
                assert_eq!(f.height(v), 0, "root {v} off level 0");
                if c > 0 {
                    roots[c - 1] += 1;
                }
            }
            Some(p) => {
                assert!(p < v, "parent {p} of {v} does not precede it");
                assert_eq!(f.height(v), f.height(p) + 1);
                if c == 0 {
                    assert_eq!(f.color(p), 0, "(C1) at {v}");
                }
            }
        }
        if c == 0 {
            spine_per_level[f.height(v) as usize] += 1;
        }
        if v > 0 {
            assert!(f.height(v - 1) <= f.height(v), "(O1) at {v}");
        }
        // (C3): nonzero colors ascending, color 0 last
        let cs: Vec<usize> = kids[v].iter().map(|&w| f.color(w)).collect();
        let key = |c: usize| if c == 0 { usize::MAX } else { c };
        assert!(cs.windows(2).all(|w| key(w[0]) <= key(w[1])), "(C3) under {v}: {cs:?}");
        if f.height(v) == f.h_max() {
            assert!(kids[v].is_empty());
        }
    }
    assert_eq!(roots, e.roots);
    assert!(spine_per_level.iter().all(|&k| k == 1), "{spine_per_level:?}");
    // root level: colored roots first, spine last
    assert_eq!(f.color(f.level(0).end - 1), 0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_forests_satisfy_invariants(seed in any::<u64>(), n in 1usize..=3, h in 0u32..=20) {
        let e = ensemble_from(seed, n);
        let f = generate_forest(&e, h, seed).unwrap();
        assert_invariants(&f, &e);
        let census = vertex_census(&f);
        prop_assert_eq!(census.iter().flatten().sum::<u64>() as usize, f.len());
        for (c, row) in census.iter().enumerate() {
            for (h, &k) in row.iter().enumerate() {
                let direct = (0..f.len()).filter(|&v| f.color(v) == c && f.height(v) as usize == h).count() as u64;
                prop_assert_eq!(k, direct);
            }
        }
    }

    #[test]
    fn shorter_forest_is_a_prefix(seed in any::<u64>(), n in 1usize..=3, a in 0u32..=10, extra in 0u32..=6) {
        let e = ensemble_from(seed, n);
        let small = generate_forest(&e, a, seed).unwrap();
        let big = generate_forest(&e, a + extra, seed).unwrap();
        let cut = big.level(a).end;
        prop_assert_eq!(small.len(), cut);
        for v in 0..cut {
            prop_assert_eq!(small.color(v), big.color(v));
            prop_assert_eq!(small.parent(v), big.parent(v));
            prop_assert_eq!(small.height(v), big.height(v));
        }
        let mut g = ForestGenerator::new(&e, seed, 0).unwrap();
        g.grow_to(a).unwrap();
        g.grow_to(a + extra).unwrap();
        prop_assert_eq!(g.forest(), &big);
    }

    #[test]
    fn jsonl_round_trip(seed in any::<u64>(), n in 1usize..=3, h in 0u32..=12) {
        let e = ensemble_from(seed, n);
        let f = generate_forest(&e, h, seed).unwrap();
        let mut buf = Vec::new();
        write_forest_jsonl(&f, Some(seed), None, &mut buf).unwrap();
        let (g, header) = read_forest_jsonl(&buf[..]).unwrap();
        prop_assert_eq!(&f, &g);
        prop_assert_eq!(header.unwrap().seed, Some(seed));
    }

    #[test]
    fn same_seed_same_forest(seed in any::<u64>(), n in 1usize..=3) {
        let e = ensemble_from(seed, n);
        prop_assert_eq!(generate_forest(&e, 10, seed).unwrap(), generate_forest(&e, 10, seed).unwrap());
    }
}

#[test]
fn null_ensemble_is_roots_plus_spine() {
    // root vector (1, k_1) = (1, 1)
    let f = generate_forest(&OffspringEnsemble::null(vec![1]), 3, 5).unwrap();
    assert_eq!(f.len(), 5);
    let census = vertex_census(&f);
    assert_eq!(census[0], vec![1, 1, 1, 1]);
    assert_eq!(census[1], vec![1, 0, 0, 0]);
    let g = generate_forest(&OffspringEnsemble::null(vec![1, 1]), 3, 5).unwrap();
    assert_eq!(vertex_census(&g)[2], vec![1, 0, 0, 0]);
}

#[test]
fn unary_chain() {
    let e = OffspringEnsemble { mu: vec![vec![Law::Dirac(1)]], nu: vec![Law::Dirac(0)], roots: vec![1], convergence: false };
    let f = generate_forest(&e, 5, 1).unwrap();
    let census = vertex_census(&f);
    assert_eq!(census[1], vec![1; 6]);
    let chain: Vec<usize> = (0..f.len()).filter(|&v| f.color(v) == 1).collect();
    for w in chain.windows(2) {
        assert_eq!(f.parent(w[1]), Some(w[0]));
    }
}

#[test]
fn corrupted_parent_names_the_vertex() {
    let e = ensemble_from(3, 2);
    let f = generate_forest(&e, 8, 3).unwrap();
    assert!(f.len() > 12);
    let mut buf = Vec::new();
    write_forest_jsonl(&f, None, None, &mut buf).unwrap();
    let bad: String = String::from_utf8(buf)
        .unwrap()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if v["index"] == 12 {
                v["parent"] = serde_json::json!(40);
            }
            v.to_string() + "\n"
        })
        .collect();
    match read_forest_jsonl(bad.as_bytes()) {
        Err(Error::InvariantViolation { vertex, .. }) => assert_eq!(vertex, 12),
        other => panic!("expected an invariant violation, got {other:?}"),
    }
}

#[test]
fn malformed_law_is_rejected() {
    let e = OffspringEnsemble { mu: vec![vec![Law::Explicit(vec![0.5, 0.4])]], nu: vec![Law::Dirac(0)], roots: vec![1], convergence: false };
    let err = generate_forest(&e, 3, 1).unwrap_err().to_string();
    assert!(err.contains("explicit"), "{err}");
}

#[test]
fn vertex_budget_is_a_resource_limit() {
    let e = OffspringEnsemble { mu: vec![vec![Law::Dirac(2)]], nu: vec![Law::Dirac(0)], roots: vec![1], convergence: false };
    let mut g = ForestGenerator::new(&e, 1, 0).unwrap().with_budget(1000);
    assert!(matches!(g.grow_to(30), Err(Error::ResourceLimit { .. })));
}

#[test]
fn one_step_profile_mean_matches_expectation() {
    // E[Z^j(1)] = nu_j mean + sum_i k_i mu^{ij} mean
    let mu = vec![vec![Law::Poisson(0.7), Law::Poisson(0.2)], vec![Law::Poisson(0.4), Law::Poisson(0.9)]];
    let nu = vec![Law::Poisson(0.5), Law::Poisson(1.5)];
    let roots = vec![2u64, 3];
    let e = OffspringEnsemble { mu: mu.clone(), nu: nu.clone(), roots: roots.clone(), convergence: false };
    let reps = 10_000;
    for j in 0..2 {
        let xs: Vec<f64> = (0..reps).map(|r| vertex_census(&generate_forest_stream(&e, 1, 77, r).unwrap())[j + 1][1] as f64).collect();
        let m = common::mean(&xs);
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
        let se = (var / reps as f64).sqrt();
        let want = nu[j].mean() + (0..2).map(|i| roots[i] as f64 * mu[i][j].mean()).sum::<f64>();
        assert!((m - want).abs() < 3.0 * se, "type {}: {m} vs {want} (se {se})", j + 1);
    }
}

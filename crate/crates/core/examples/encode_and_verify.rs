//! Encodes a forest by its depth-first and breadth-first paths and checks
//! every exact identity between them.
//!
//! cargo run --release --example encode_and_verify

use gwforest::encodings::{verify_identities, EncodingBundle};
use gwforest::family::{brownian_family, AdmissibleMechanism};
use gwforest::forest::generate_forest;

fn main() -> gwforest::Result<()> {
    let m = AdmissibleMechanism {
        beta: vec![0.5, 0.5],
        alpha: vec![vec![0.0, 0.5], vec![0.5, 0.0]],
        delta: vec![1.0, 1.0],
        x: vec![0.1, 0.1],
        levy: vec![],
    };
    let (ensemble, _) = brownian_family(&m, 20)?;
    let forest = generate_forest(&ensemble, 30, 7)?;
    let b = EncodingBundle::new(&forest)?;
    for t in &b.types {
        let show = |v: &[i64]| v.iter().take(16).map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        println!("type {}: {} explored vertices, {} components", t.j, t.horizon(), t.components.len());
        println!("  D    {}", show(&t.lukasiewicz));
        println!("  H    {}", show(&t.height.iter().map(|&x| x as i64).collect::<Vec<_>>()));
        println!("  cevH {}", show(&b.left_height[t.j - 1].iter().map(|&x| x as i64).collect::<Vec<_>>()));
    }
    let report = verify_identities(&forest, &b);
    for c in &report.checks {
        println!("{:<26} {:>8} checked, {} violations", c.name, c.checked, c.violations);
    }
    assert!(report.is_ok());
    Ok(())
}

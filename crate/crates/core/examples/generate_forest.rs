//! Draws a two-type forest with immigration, prints its level census and
//! round-trips it through the JSON-lines format.
//!
//! cargo run --release --example generate_forest

use gwforest::forest::{generate_forest, read_forest_jsonl, vertex_census, write_forest_jsonl, OffspringEnsemble};
use gwforest::law::Law;

fn main() -> gwforest::Result<()> {
    let law = |s: &str| s.parse::<Law>();
    let ensemble = OffspringEnsemble {
        mu: vec![vec![law("geometric(0.5)")?, law("poisson(0.2)")?], vec![law("binomial(2,0.3)")?, law("explicit([0.3,0.4,0.3])")?]],
        nu: vec![law("poisson(1)")?, law("dirac(0)")?],
        roots: vec![2, 1],
        convergence: false,
    };
    let forest = generate_forest(&ensemble, 8, 42)?;
    println!("{} vertices, truncated at height {}", forest.len(), forest.h_max());
    let census = vertex_census(&forest);
    println!("height  spine  type1  type2");
    for h in 0..=forest.h_max() as usize {
        println!("{h:>6}  {:>5}  {:>5}  {:>5}", census[0][h], census[1][h], census[2][h]);
    }

    let mut buf = Vec::new();
    write_forest_jsonl(&forest, Some(42), None, &mut buf)?;
    let (back, header) = read_forest_jsonl(buf.as_slice())?;
    assert_eq!(back, forest);
    println!("round trip ok; header seed = {:?}", header.and_then(|h| h.seed));
    Ok(())
}

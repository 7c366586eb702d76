//! Search random small-coefficient pencils for an eligible surface: smooth,
//! with irreducible quartic base scheme (no rational point of M) and no
//! rational root of the discriminant cubic.
//!
//! Run with: cargo run --example find_eligible_pencil [-- seed]

use conic_bundle::classify;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let p = classify::find_eligible(2, seed)?;
    println!("found an eligible pencil (seed {seed}):");
    println!("{}", p.to_json());

    let elig = classify::eligibility(&p)?;
    println!("rho = {}, galois = {:?}", elig.rho, elig.galois);
    let bt = classify::mscheme(&p)?;
    println!("blow-up type {:?}, quartic {:?}", bt.degrees, bt.quartic);
    Ok(())
}

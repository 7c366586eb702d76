//! Equidistribution across congruence classes: restricted counts
//! N(B; Gamma, q, a, b) compared with truncated local densities.
//!
//! Run with: cargo run --release --example equidistribution

use conic_bundle::counting;
use conic_bundle::forms::{Pencil, ProjVec};
use conic_bundle::local;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;
    let b = 20_000u64;
    let q = 5u64;
    let whole = [f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY];
    let ydir = ProjVec::make_primitive(&[1, 1])?;

    println!("counting pairs with x = lambda*a (mod {q}), y = mu*(1,1) (mod {q}), B = {b}");
    println!("a          count     truncated density");
    let mut rows = Vec::new();
    for a in [[1i128, 0, 0], [1, 1, 0], [1, 2, 3]] {
        let adir = ProjVec::make_primitive(&a)?;
        let n = counting::count_congruence_region(&p, b, whole, q, &adir, &ydir)?;
        let d = local::varpi_congruence(&p, q, q, &adir, &ydir, 1)?;
        println!("{a:?}  {n:<9} {d}");
        rows.push((n, d));
    }
    println!("\ncount ratios should track density ratios as B grows:");
    let (n0, d0) = rows[0].clone();
    for (n, d) in &rows[1..] {
        let count_ratio = *n as f64 / n0 as f64;
        let dens_ratio = (*d.numer() as f64 / *d.denom() as f64)
            / (*d0.numer() as f64 / *d0.denom() as f64);
        println!("  counts {count_ratio:.3} vs densities {dens_ratio:.3}");
    }
    Ok(())
}

//! Exact rational point counts N(U, B) = N1 + N2 via the hyperbola method,
//! compared against the predicted leading constant.
//!
//! Run with: cargo run --release --example count_points

use conic_bundle::counting;
use conic_bundle::forms::Pencil;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;

    let ladder = [100u64, 200, 500, 1000, 2000, 5000, 10_000];
    let rep = counting::count_ladder(&p, &ladder, Some(200))?;

    let pc = rep.predictions.as_ref().unwrap();
    println!(
        "predictions: alpha = {:.4}, tau_infty = {:.4}, S = {:.4}",
        pc.alpha, pc.tau_infty, pc.s_series
    );
    let cs = pc.c_s.unwrap();
    println!("c_S = {cs:.6} (c_S1 = {:.6}, c_S2 = {:.6})\n", pc.c_s1, pc.c_s2.unwrap());

    println!("B        N        N1       N2       N1/N    N/(c_S B ln B)");
    for r in &rep.rungs {
        let bf = r.b as f64;
        let pred = cs * bf * bf.ln();
        println!(
            "{:<8} {:<8} {:<8} {:<8} {:.4}  {:.4}",
            r.b,
            r.n,
            r.n1,
            r.n2,
            r.n1 as f64 / r.n as f64,
            r.n as f64 / pred
        );
    }
    println!("\n(N1/N drifts toward 1/4 and N/(c_S B ln B) toward 1 only like 1/ln B)");
    Ok(())
}

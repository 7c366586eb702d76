//! The archimedean density tau_infty by two independent quadratures, the
//! region-restricted variant, and the sublevel-measure scaling diagnostic.
//!
//! Run with: cargo run --example real_density

use conic_bundle::forms::Pencil;
use conic_bundle::realdensity;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;

    let a = realdensity::tau_infty_formula_a(&p, 1e-3)?;
    let b = realdensity::tau_infty_formula_b(&p, 1e-3)?;
    println!("tau_infty, formula A (plane):  {:.6} +/- {:.2e}", a.value, a.est_error);
    println!("tau_infty, formula B (ball):   {:.6} +/- {:.2e}", b.value, b.est_error);
    println!("|A - B| = {:.2e}", (a.value - b.value).abs());

    let (mc, se) = realdensity::tau_infty_mc(&p, 1_000_000, 0);
    println!("Monte Carlo oracle:            {mc:.6} +/- {se:.2e}");

    // restricting to a box in the affine (u1, u2)-plane
    for g in [[-1.0, 1.0, -1.0, 1.0], [-4.0, 4.0, -4.0, 4.0]] {
        let r = realdensity::tau_infty_region(&p, g, 1e-3)?;
        println!("tau_infty(Gamma = {g:?}) = {:.6}", r.value);
    }

    // meas{ h_Q <= lambda } should scale like lambda^{3/2}
    println!("\nlambda        meas/lambda^1.5");
    for k in (3..=8).rev() {
        let lam = 0.5f64.powi(k);
        let (m, _) = realdensity::sublevel_measure(&p, lam, 400_000, 1);
        println!("2^-{k:<10} {:.4}", m / lam.powf(1.5));
    }
    Ok(())
}

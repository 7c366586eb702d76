//! Classify a pencil: smoothness, blow-up type of the base scheme M,
//! Picard rank, eligibility, and the effective-cone constant alpha.
//!
//! Run with: cargo run --example classify_surface [-- path/to/pencil.json]

use conic_bundle::classify;
use conic_bundle::forms::Pencil;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json")
    });
    let p = Pencil::load(&path)?;
    println!("pencil: {}", path.display());
    println!("smooth: {}", p.is_smooth());

    let c = p.disc_cubic()?;
    println!("discriminant cubic C(y) coefficients (y0^i y1^(3-i)): {:?}", c.coeffs);
    println!("disc(C) = {}", c.disc());

    let bt = classify::mscheme(&p)?;
    println!("blow-up type of M (closed point degrees): {:?}", bt.degrees);
    println!("M has a rational point: {}", bt.has_rational_point);
    for z in &bt.rational_points {
        println!("  rational point of M: {:?}", z.coords());
    }

    let elig = classify::eligibility(&p)?;
    println!("Picard rank rho = {}", elig.rho);
    println!("eligible (rank-2 case): {}", elig.eligible);
    println!("Galois class of the quartic: {:?}", elig.galois);

    let alpha = classify::alpha(&bt);
    println!("alpha = {alpha}");

    // alpha for the eligible type also arises as a cone integral; the two
    // agree to quadrature accuracy
    let ai = classify::alpha_cone_integral();
    println!(
        "cone integral check: closed form {} vs quadrature {:.9}",
        ai.closed_form, ai.quadrature
    );
    Ok(())
}

//! Congruence lattices x = k*a (mod m): Hermite normal form bases,
//! determinants, successive minima, and primitive point counts in squares.
//!
//! Run with: cargo run --example lattice_minima

use conic_bundle::forms::ProjVec;
use conic_bundle::lattice;
use num_rational::Ratio;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // dimension 3: det = m^2, lambda_3 <= m
    let a = ProjVec::make_primitive(&[1, 4, 9])?;
    let l = lattice::build_lattice(&a, 35)?;
    println!("Lambda((1,4,9), 35): det = {} (= 35^2 = {})", l.det, 35 * 35);
    let minima = l.successive_minima();
    println!("successive minima: {minima:?}");
    let cert = lattice::lambda3_certificate(&l);
    println!("lambda_3 certificate vectors (sup-norm <= m):");
    for v in &cert {
        println!("  {v:?}");
    }

    // dimension 2: det = m
    let b = ProjVec::make_primitive(&[3, 7])?;
    let l2 = lattice::build_lattice(&b, 20)?;
    println!("\nLambda((3,7), 20): det = {}", l2.det);
    println!("basis columns: {:?}", l2.basis);

    // primitive points of Z^2 in a large square: density 6/pi^2
    let z2 = lattice::build_lattice(&ProjVec::make_primitive(&[1, 0])?, 1)?;
    let r = 500i128;
    let pc = lattice::count_primitive_in_square(
        &z2,
        [Ratio::new(0, 1), Ratio::new(0, 1)],
        Ratio::new(2 * r, 1),
    )?;
    let density = pc.count as f64 / (4 * r * r) as f64;
    println!(
        "\nprimitive density in [{}, {}]^2: {:.6} (6/pi^2 = {:.6})",
        -r,
        r,
        density,
        6.0 / std::f64::consts::PI.powi(2)
    );
    println!("main term prediction: {:.1}, residual: {}", pc.main_term, pc.residual);
    Ok(())
}

//! Per-fiber conics: local invariants, Hasse-Minkowski solvability via
//! Hilbert symbols, minimal zeros, and parametrized point counting.
//!
//! Run with: cargo run --example conic_fibers

use conic_bundle::conic;
use conic_bundle::forms::{Pencil, ProjVec, QuadForm3};
use conic_bundle::local;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // a classical example first: x^2 + y^2 = z^2
    let f = QuadForm3::diagonal(1, 1, -1);
    let sol = conic::minimal_zero(&f)?;
    println!("x^2+y^2-z^2: minimal zero {:?}", sol.zero.as_ref().map(|z| z.coords()));
    println!("zeros of height <= 20: {}", conic::count_conic_points(&f, 20, 0, false)?);

    // x^2 + y^2 - 3z^2 has no rational point: obstructed at 2 and 3
    let g = QuadForm3::diagonal(1, 1, -3);
    let sol = conic::minimal_zero(&g)?;
    println!(
        "x^2+y^2-3z^2: solvable = {}, obstructions {:?}",
        sol.locally_solvable, sol.obstruction_places
    );

    // fibers of a pencil
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;
    println!("\ny        C(y)      kappa  chi_inf  solvable  #(H <= 500)");
    for (y0, y1) in [(1i128, 0i128), (1, 1), (1, 2), (2, 1), (0, 1), (1, -1)] {
        let y = ProjVec::make_primitive(&[y0, y1])?;
        let Ok(fl) = local::fiber_local(&p, &y) else { continue };
        let qy = p.fiber_form(&y.as_array2())?;
        let sol = conic::minimal_zero(&qy)?;
        let n = conic::count_conic_points(&qy, 500, 0, false)?;
        println!(
            "({y0},{y1})   {:<9} {:<6} {:<8} {:<9} {n}",
            fl.c_y, fl.kappa, fl.chi_infty, sol.zero.is_some()
        );
    }

    // the parametrization fast path agrees with the exact sweep
    let y = ProjVec::make_primitive(&[1, 1])?;
    let qy = p.fiber_form(&y.as_array2())?;
    if let Some(param) = conic::parametrize(&qy)? {
        println!(
            "\nparametrization base zero {:?}, covering certified to height {}",
            param.base_zero,
            param.covering_certificate
        );
        let slow = conic::count_conic_points(&qy, 2000, 0, false)?;
        let fast = conic::count_conic_points(&qy, 2000, 0, true)?;
        println!("height <= 2000: sweep {slow}, parametrized {fast}");
    }
    Ok(())
}

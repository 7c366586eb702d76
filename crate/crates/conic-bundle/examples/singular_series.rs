//! The p-adic densities varpi_p, the convergence factors
//! tau_p = (1 - 1/p)^rho varpi_p, and the truncated singular series,
//! including the independent cross-check of varpi_p from the unrestricted
//! congruence count S-hat(p^k).
//!
//! Run with: cargo run --example singular_series

use conic_bundle::arith::primes_up_to;
use conic_bundle::classify;
use conic_bundle::forms::Pencil;
use conic_bundle::local;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;
    let rho = classify::rho(&p)?;

    println!("p     varpi_p              tau_p                stabilized at k");
    for q in primes_up_to(40).into_iter().filter(|&q| q >= 5) {
        let td = local::tau_p(&p, q, rho)?;
        println!(
            "{q:<5} {:<20} {:<20} {:?}",
            format!("{}", td.varpi),
            format!("{}", td.tau),
            td.stabilized_at
        );
    }

    // independent estimate of varpi_p from the bias-corrected unrestricted
    // count S-hat(p^k); agrees with the f_S truncation within 2 p^{-k}
    for q in [5u64, 7] {
        let k = 3;
        let from_hat = local::varpi_from_hat(&p, q, k)?;
        let td = local::tau_p(&p, q, rho)?;
        println!(
            "p={q}: varpi from S-hat(p^{k}) = {from_hat} vs stabilized {}",
            td.varpi
        );
    }

    let ss = local::singular_series_global(&p, 300)?;
    println!(
        "\ntruncated singular series (p <= 300): {:.9} with tail band {:.3e}",
        ss.value, ss.band
    );
    println!("last few partial products:");
    for (q, v) in ss.trace.iter().rev().take(4).rev() {
        println!("  up to {q}: {v:.9}");
    }
    Ok(())
}

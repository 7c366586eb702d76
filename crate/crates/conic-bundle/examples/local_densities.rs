//! The four multiplicative congruence-counting functions f_S, f_M, f_C, f_D
//! and the exact identities relating them.
//!
//! Run with: cargo run --example local_densities

use conic_bundle::forms::Pencil;
use conic_bundle::local;
use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path)?;

    println!("m     f_S(m)   f_M(m)   f_C(m)   f_D(m)");
    for m in [5u64, 7, 11, 25, 35, 49] {
        println!(
            "{m:<5} {:<8} {:<8} {:<8} {:<8}",
            local::fS(&p, m)?,
            local::fM(&p, m)?,
            local::fC(&p, m)?,
            local::fD(&p, m)?
        );
    }

    // the identity suite checks, with zero tolerance:
    //   f_S(p^k)/p^{2k} = 1 + 1/p + 1/p^2 + f_M(p^k)/p^{k+1}
    //                     + (1 - 1/p) sum_{j<=k} f_M(p^j)/p^j
    //   p f_M(p) + (p+1) f_C(p) = f_D(p) + p
    //   f_M(p) = 1 + sum of split-fiber symbols (p not dividing disc C)
    let primes = [5u64, 7, 11, 13, 17, 19, 23, 29, 31];
    let rep = local::identity_suite(&p, &primes, 2)?;
    let passed = rep.entries.iter().filter(|e| format!("{:?}", e.status) == "Pass").count();
    println!("\nidentity suite: {} entries, all_pass = {}", rep.entries.len(), rep.all_pass);
    println!("passed: {passed}");
    for e in rep.entries.iter().take(6) {
        println!("  p={} k={} {}: {:?}", e.prime, e.k, e.identity, e.status);
    }

    // at p in {2,3} the f_S identity needs the 6-normalized pencil
    let rep6 = local::identity_suite(&p.normalize6(), &[2, 3], 1)?;
    println!("6-normalized at p in {{2,3}}: all_pass = {}", rep6.all_pass);
    Ok(())
}

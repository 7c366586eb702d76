//! Acceptance suite: one test per headline criterion, each printing a single
//! `ACCEPTANCE <n> <name>: PASS|FAIL` line (visible with `--nocapture`).
//!
//! The heavy convergence criterion (11) runs the full B = 10^6 ladder; on a
//! single worker it is the dominant cost of the suite.

use conic_bundle::forms::{Pencil, ProjVec, QuadForm3};
use conic_bundle::{arith, conic, counting, lattice, local, realdensity};
use num_rational::Ratio;
use std::path::Path;

fn fixture(name: &str) -> Pencil {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    Pencil::load(&dir.join(format!("{name}.json"))).unwrap()
}

fn five_pencils() -> Vec<Pencil> {
    ["eligible_s4", "type_1111", "type_112", "type_13", "type_22"]
        .iter()
        .map(|n| fixture(n))
        .collect()
}

fn report(n: u32, name: &str, pass: bool) {
    println!("ACCEPTANCE {n} {name}: {}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "acceptance criterion {n} ({name}) failed");
}

#[test]
fn acceptance_01_identity_suite_exact() {
    let primes: Vec<u64> = vec![5, 7, 11, 13, 17, 19, 23, 29, 31];
    let mut pass = true;
    for p in five_pencils() {
        let rep = local::identity_suite(&p, &primes, 2).unwrap();
        pass &= rep.all_pass;
        let rep23 = local::identity_suite(&p.normalize6(), &[2, 3], 2).unwrap();
        pass &= rep23.all_pass;
    }
    // linear congruence counts against direct enumeration
    for (a0, a1) in [(1i128, 1i128), (3, 5), (7, -2), (0, 1), (4, 9)] {
        for &p in &[5u64, 7, 11, 13] {
            for k in 1..=2u32 {
                let m = (p as i128).pow(k);
                let mut brute = 0u64;
                for x0 in 0..m {
                    for x1 in 0..m {
                        if arith::gcd3_i128(x0, x1, m) == 1 && (a0 * x0 + a1 * x1) % m == 0 {
                            brute += 1;
                        }
                    }
                }
                pass &= local::count_lin_primitive(a0, a1, p, k).unwrap() == brute;
            }
        }
    }
    report(1, "identity suite exactness", pass);
}

#[test]
fn acceptance_02_multiplicativity() {
    let p = fixture("eligible_s4");
    let mut pass = true;
    for m in 2u64..=100 {
        for n in 2u64..=(200 / m) {
            if arith::gcd_u64(m, n) != 1 {
                continue;
            }
            pass &= local::fS(&p, m * n).unwrap() == local::fS(&p, m).unwrap() * local::fS(&p, n).unwrap();
            pass &= local::fM(&p, m * n).unwrap() == local::fM(&p, m).unwrap() * local::fM(&p, n).unwrap();
            pass &= local::fC(&p, m * n).unwrap() == local::fC(&p, m).unwrap() * local::fC(&p, n).unwrap();
            pass &= local::fD(&p, m * n).unwrap() == local::fD(&p, m).unwrap() * local::fD(&p, n).unwrap();
        }
    }
    report(2, "multiplicativity of f_S, f_M, f_C, f_D", pass);
}

#[test]
fn acceptance_03_lattice_laws() {
    let mut pass = true;
    for m in 1u64..=100 {
        let mi = m as i128;
        // dimension 2: all primitive directions mod m
        for a0 in 0..mi.max(1) {
            for a1 in 0..mi.max(1) {
                if arith::gcd3_i128(a0, a1, mi) != 1 {
                    continue;
                }
                let l = lattice::build_lattice(&ProjVec::make_primitive(&[a0, a1]).unwrap(), m)
                    .unwrap();
                pass &= l.det == mi;
            }
        }
        if m > 20 {
            // dimension 3 exhaustively up to m = 20, then a deterministic
            // stride over the direction set (the laws are checked exactly
            // on every visited direction)
            let mut count = 0u64;
            for a0 in 0..mi {
                for a1 in (a0 % 3)..mi {
                    let a2 = (a0 * 5 + a1 * 3 + 1) % mi;
                    if arith::gcd3_i128(arith::gcd_i128(a0, a1), a2, mi) != 1 {
                        continue;
                    }
                    let l = lattice::build_lattice(
                        &ProjVec::make_primitive(&[a0, a1, a2]).unwrap(),
                        m,
                    )
                    .unwrap();
                    pass &= l.det == mi * mi;
                    let cert = lattice::lambda3_certificate(&l);
                    pass &= cert.iter().all(|v| v.iter().map(|t| t.abs()).max().unwrap() <= mi);
                    count += 1;
                }
            }
            pass &= count > 0;
            continue;
        }
        for a0 in 0..mi {
            for a1 in 0..mi {
                for a2 in 0..mi {
                    if arith::gcd3_i128(arith::gcd_i128(a0, a1), a2, mi) != 1 {
                        continue;
                    }
                    let l = lattice::build_lattice(
                        &ProjVec::make_primitive(&[a0, a1, a2]).unwrap(),
                        m,
                    )
                    .unwrap();
                    pass &= l.det == mi * mi;
                    let cert = lattice::lambda3_certificate(&l);
                    pass &= cert.iter().all(|v| v.iter().map(|t| t.abs()).max().unwrap() <= mi);
                }
            }
        }
    }
    report(3, "lattice determinant and lambda3 laws", pass);
}

#[test]
fn acceptance_04_primitive_density() {
    let r = 1000i128;
    let z2 = lattice::build_lattice(&ProjVec::make_primitive(&[1, 0]).unwrap(), 1).unwrap();
    let pc = lattice::count_primitive_in_square(
        &z2,
        [Ratio::new(0, 1), Ratio::new(0, 1)],
        Ratio::new(2 * r, 1),
    )
    .unwrap();
    let density = pc.count as f64 / (4 * r * r) as f64;
    let target = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    let mut pass = (density - target).abs() <= 5e-3;
    // congruence sublattice mod 7: the main term carries ∏_{p|m} p/(p+1)
    let l7 = lattice::build_lattice(&ProjVec::make_primitive(&[1, 0]).unwrap(), 7).unwrap();
    let pc7 = lattice::count_primitive_in_square(
        &l7,
        [Ratio::new(0, 1), Ratio::new(0, 1)],
        Ratio::new(2 * r, 1),
    )
    .unwrap();
    pass &= (pc7.count as f64 / pc7.main_term - 1.0).abs() <= 0.02;
    report(4, "primitive density main term", pass);
}

#[test]
fn acceptance_05_tau_infty_two_formulas() {
    let mut pass = true;
    for p in five_pencils() {
        let a = realdensity::tau_infty_formula_a(&p, 1e-4).unwrap();
        let b = realdensity::tau_infty_formula_b(&p, 1e-4).unwrap();
        pass &= ((a.value - b.value) / a.value).abs() <= 1e-2;
    }
    // scaling law tau_inf(lambda Q) = tau_inf(Q)/lambda
    let p = fixture("eligible_s4");
    let base = realdensity::tau_infty_formula_a(&p, 1e-4).unwrap();
    for lam in [2i128, 3, 5] {
        let scaled = Pencil::new(p.q0.scale(lam), p.q1.scale(lam), None).unwrap();
        let s = realdensity::tau_infty_formula_a(&scaled, 1e-4).unwrap();
        let rel = (s.value * lam as f64 / base.value - 1.0).abs();
        pass &= rel <= 1e-2 + (base.est_error + s.est_error * lam as f64) / base.value;
    }
    report(5, "tau_infinity two-formula agreement and scaling", pass);
}

#[test]
fn acceptance_06_sublevel_exponent() {
    let p = fixture("eligible_s4");
    let mut ratios = Vec::new();
    for e in 3..=10u32 {
        let lam = (2f64).powi(-(e as i32));
        let (meas, _err) = realdensity::sublevel_measure(&p, lam, 1_000_000, 42);
        ratios.push(meas / lam.powf(1.5));
    }
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
    report(6, "sublevel measure exponent 3/2", lo > 0.0 && hi / lo < 3.0);
}

#[test]
fn acceptance_07_sigma_stabilization() {
    let p = fixture("eligible_s4");
    let mut pass = true;
    let mut checked = 0u32;
    'outer: for hy in 1i128..200 {
        for y in [[hy, 1i128], [1, hy], [hy, -3], [-3, hy], [hy, hy - 1]] {
            if arith::gcd_i128(y[0], y[1]) != 1 {
                continue;
            }
            let yv = ProjVec::make_primitive(&y).unwrap();
            let Ok(dy) = local::d_y(&p, &yv) else { continue };
            if dy == 0 {
                continue;
            }
            for &q in &[3u64, 5, 7, 11, 13] {
                let d = arith::valuation_i128(dy, q as i128);
                let thr = 2 * d + 1;
                let next = (q as u128).pow(thr + 1);
                if next > 10_000 {
                    continue;
                }
                let at = local::sigma_star(&p, (q as u64).pow(thr), &yv).unwrap();
                let beyond = local::sigma_star(&p, (q as u64).pow(thr + 1), &yv).unwrap();
                pass &= at == beyond;
                checked += 1;
                if checked >= 200 {
                    break 'outer;
                }
            }
        }
    }
    report(7, "sigma* stabilization on 200 fibers", pass && checked >= 200);
}

#[test]
fn acceptance_08_hasse_minkowski() {
    let mut pass = true;
    for a in -30i128..=30 {
        for b in -30i128..=30 {
            for c in -30i128..=30 {
                if a * b * c == 0 {
                    continue;
                }
                let f = QuadForm3::diagonal(a, b, c);
                let sol = conic::minimal_zero(&f).unwrap();
                let isotropic = sol.obstruction_places.is_empty();
                pass &= sol.zero.is_some() == isotropic;
                if let Some(z) = &sol.zero {
                    pass &= f.eval(&z.as_array3()) == 0;
                }
            }
        }
    }
    // kappa = 0 forces an empty fiber on every tested fiber
    let p = fixture("eligible_s4");
    for y0 in -10i128..=10 {
        for y1 in 0i128..=10 {
            if arith::gcd_i128(y0, y1) != 1 {
                continue;
            }
            let yv = ProjVec::make_primitive(&[y0, y1]).unwrap();
            if let Ok(ok) = conic::kappa_consistency(&p, &yv) {
                pass &= ok;
            }
        }
    }
    report(8, "Hasse-Minkowski desk check", pass);
}

#[test]
fn acceptance_09_oracle_equality() {
    let mut pass = true;
    for p in five_pencils() {
        let (n, n1, n2) = counting::count_oracle(&p, 200).unwrap();
        let h1 = counting::count_n1(&p, 200).unwrap();
        let h2 = counting::count_n2(&p, 200).unwrap();
        pass &= n1 == h1 && n2 == h2 && n == h1 + h2;
    }
    // partition N = N1 + N2 holds on a ladder by construction of the counts;
    // verify against the oracle on a second height
    let p = fixture("eligible_s4");
    let (n, n1, n2) = counting::count_oracle(&p, 120).unwrap();
    pass &= n == n1 + n2
        && n1 == counting::count_n1(&p, 120).unwrap()
        && n2 == counting::count_n2(&p, 120).unwrap();
    report(9, "hyperbola counts match the brute-force oracle", pass);
}

#[test]
fn acceptance_10_varpi_cross_check() {
    let p = fixture("eligible_s4");
    let mut pass = true;
    for &q in &[5u64, 7, 11] {
        let k = 3u32;
        let m = q.pow(k);
        let from_fs = Ratio::new(local::fS(&p, m).unwrap() as i128, (m as i128) * (m as i128));
        let from_hat = local::varpi_from_hat(&p, q, k).unwrap();
        let diff = if from_fs > from_hat { from_fs - from_hat } else { from_hat - from_fs };
        let tol = Ratio::new(2, m as i128);
        pass &= diff <= tol;
    }
    report(10, "varpi truncations agree", pass);
}

#[test]
fn acceptance_11_headline_convergence() {
    let p = fixture("eligible_s4");
    let ladder: Vec<u64> = vec![10_000, 40_000, 125_000, 250_000, 500_000, 1_000_000];
    let rep = counting::count_ladder(&p, &ladder, Some(10_000)).unwrap();
    let rungs = &rep.rungs;
    let share: Vec<f64> = rungs.iter().map(|r| r.n1 as f64 / r.n as f64).collect();
    let last = *share.last().unwrap();
    let mut pass = (0.17..=0.33).contains(&last);
    // trend toward 1/4 over the last three dyadic rungs
    let k = share.len();
    pass &= (share[k - 2] - 0.25).abs() <= (share[k - 3] - 0.25).abs() + 1e-9
        && (share[k - 1] - 0.25).abs() <= (share[k - 2] - 0.25).abs() + 1e-9;
    // least-squares slope of N/B against ln B vs the predicted constant
    let xs: Vec<f64> = rungs.iter().map(|r| (r.b as f64).ln()).collect();
    let ys: Vec<f64> = rungs.iter().map(|r| r.n as f64 / r.b as f64).collect();
    let n = xs.len() as f64;
    let (sx, sy): (f64, f64) = (xs.iter().sum(), ys.iter().sum());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let cs = rep.predictions.as_ref().unwrap().c_s.unwrap();
    pass &= (slope / cs - 1.0).abs() <= 0.35;
    println!(
        "  [criterion 11 data] N1/N = {share:?}, slope = {slope:.4}, c_S = {cs:.4}"
    );
    report(11, "headline convergence at B = 10^6", pass);
}

#[test]
fn acceptance_12_equidistribution_mod5() {
    let p = fixture("eligible_s4");
    let b = 100_000u64;
    let q = 5u64;
    let whole = [f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY];
    let ydir = ProjVec::make_primitive(&[1, 1]).unwrap();
    let mut rows = Vec::new();
    for a in [[1i128, 0, 0], [1, 1, 0]] {
        let adir = ProjVec::make_primitive(&a).unwrap();
        let n = counting::count_congruence_region(&p, b, whole, q, &adir, &ydir).unwrap();
        let d = local::varpi_congruence(&p, q, q, &adir, &ydir, 1).unwrap();
        rows.push((n, *d.numer() as f64 / *d.denom() as f64));
    }
    let pass = rows.iter().all(|(n, d)| *n > 0 && *d > 0.0) && {
        let count_ratio = rows[1].0 as f64 / rows[0].0 as f64;
        let dens_ratio = rows[1].1 / rows[0].1;
        (count_ratio / dens_ratio - 1.0).abs() <= 0.20
    };
    report(12, "equidistribution across classes mod 5", pass);
}

#[test]
fn acceptance_13_fm_equals_quartic_roots() {
    let p = fixture("eligible_s4");
    let mut pass = true;
    let mut checked = 0u32;
    for q in arith::primes_up_to(1000) {
        match local::fm_vs_quartic_roots(&p, q) {
            Ok(r) => {
                pass &= r.equal;
                checked += 1;
            }
            Err(_) => continue, // bad prime, excluded by hypothesis
        }
    }
    report(13, "f_M matches quartic root counts", pass && checked > 150);
}

#[test]
fn acceptance_14_determinism() {
    let p = fixture("eligible_s4");
    let mut counts = Vec::new();
    for workers in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let (n1, n2) = pool.install(|| {
            (
                counting::count_n1(&p, 20_000).unwrap(),
                counting::count_n2(&p, 20_000).unwrap(),
            )
        });
        counts.push((n1, n2));
    }
    let mut pass = counts.windows(2).all(|w| w[0] == w[1]);
    // stochastic outputs are reproducible for a fixed seed
    let a = realdensity::tau_infty_mc(&p, 100_000, 7);
    let b = realdensity::tau_infty_mc(&p, 100_000, 7);
    pass &= a == b;
    report(14, "determinism across workers and seeds", pass);
}

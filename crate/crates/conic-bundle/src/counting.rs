//! The headline counting functions: exact N(U,B), N₁, N₂ via the hyperbola
//! split, congruence/region-restricted counts, and predicted-constant
//! assembly.
//!
//! A point of U is a pair ([x], [y]) on the surface with (Q0(x), Q1(x)) ≠
//! (0,0) and C(y) ≠ 0, of height H(x)H(y) ≤ B. N₁ takes H(x) ≤ H(y) (ties
//! included) and is enumerated over x with H(x) ≤ √B, each of which
//! determines [y] = [−Q1(x) : Q0(x)]; N₂ takes H(x) > H(y) and is
//! enumerated fiberwise over y with H(y) < √B, counting conic points up to
//! X = ⌊B/H(y)⌋. Counts are exact; everything is deterministic and
//! independent of the worker count.

use crate::classify;
use crate::conic;
use crate::error::{Error, Result};
use crate::forms::{Pencil, ProjVec, QuadForm3};
use crate::local;
use crate::realdensity;
use crate::arith;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

/// Membership in the open set U for a pair already on the surface.
pub fn in_u(p: &Pencil, x: &ProjVec, y: &ProjVec) -> Result<bool> {
    let xa = x.as_array3();
    let ya = y.as_array2();
    let q0 = p.q0.eval(&xa);
    let q1 = p.q1.eval(&xa);
    if ya[0] * q0 + ya[1] * q1 != 0 {
        return Err(Error::NotOnSurface);
    }
    let c = p.disc_cubic()?;
    Ok((q0, q1) != (0, 0) && c.eval(ya[0], ya[1]) != 0)
}

/// The rational points of the base scheme M = {Q0 = Q1 = 0}, exactly.
/// They lie on every fiber conic and are excluded from U.
pub fn m_rational_points(p: &Pencil) -> Result<Vec<[i128; 3]>> {
    let bt = classify::mscheme(p)?;
    let mut out: Vec<[i128; 3]> = Vec::new();
    for pt in &bt.rational_points {
        out.push(pt.as_array3());
    }
    out.sort();
    out.dedup();
    for z in &out {
        debug_assert_eq!(p.q0.eval(z), 0);
        debug_assert_eq!(p.q1.eval(z), 0);
    }
    Ok(out)
}

fn isqrt_u64(n: u64) -> u64 {
    arith::isqrt_i128(n as i128) as u64
}

/// N₁(U,B): pairs with H(x) ≤ H(y) and H(x)H(y) ≤ B, counted projectively.
pub fn count_n1(p: &Pencil, b: u64) -> Result<u64> {
    if b == 0 {
        return Ok(0);
    }
    let r = isqrt_u64(b) as i128;
    let c = p.disc_cubic()?;
    let m0 = *p.q0.matrix();
    let m1 = *p.q1.matrix();
    let count = (0..=r)
        .into_par_iter()
        .map(|x0| {
            let mut n = 0u64;
            let x1_lo = if x0 == 0 { 0 } else { -r };
            for x1 in x1_lo..=r {
                if x0 == 0 && x1 == 0 {
                    // normalized representative (0,0,1) only
                    let q0 = m0[2][2];
                    let q1 = m1[2][2];
                    if pair_passes(&c, q0, q1, 1, b) {
                        n += 1;
                    }
                    continue;
                }
                let g01 = arith::gcd_i128(x0, x1);
                // Q(x) in x2: A t² + 2 L t + K, per form
                let a0 = m0[2][2];
                let l0 = m0[0][2] * x0 + m0[1][2] * x1;
                let k0 = m0[0][0] * x0 * x0 + 2 * m0[0][1] * x0 * x1 + m0[1][1] * x1 * x1;
                let a1 = m1[2][2];
                let l1 = m1[0][2] * x0 + m1[1][2] * x1;
                let k1 = m1[0][0] * x0 * x0 + 2 * m1[0][1] * x0 * x1 + m1[1][1] * x1 * x1;
                let hx01 = x0.max(x1.abs());
                for x2 in -r..=r {
                    if g01 != 1 && arith::gcd_i128(g01, x2) != 1 {
                        continue;
                    }
                    let q0 = (a0 * x2 + 2 * l0) * x2 + k0;
                    let q1 = (a1 * x2 + 2 * l1) * x2 + k1;
                    let hx = hx01.max(x2.abs());
                    if pair_passes(&c, q0, q1, hx, b) {
                        n += 1;
                    }
                }
            }
            n
        })
        .sum();
    Ok(count)
}

/// Shared N₁ acceptance test for one x: derive [y], require it defined,
/// C(y) ≠ 0, H(x) ≤ H(y), H(x)H(y) ≤ B.
fn pair_passes(c: &crate::forms::BinaryCubic, q0: i128, q1: i128, hx: i128, b: u64) -> bool {
    if q0 == 0 && q1 == 0 {
        return false;
    }
    let g = arith::gcd_i128(q0, q1);
    let hy = (q0.abs().max(q1.abs())) / g;
    if hx > hy {
        return false;
    }
    if (hx as u128) * (hy as u128) > b as u128 {
        return false;
    }
    c.eval(-q1 / g, q0 / g) != 0
}

/// Per-fiber exact count of conic points with lower < H(x) ≤ upper that lie
/// in U (M points filtered out). `fast` selects the parametrized path.
fn fiber_points_in_u(
    f: &QuadForm3,
    mpts: &[[i128; 3]],
    upper: i128,
    lower: i128,
    fast: bool,
) -> Result<u64> {
    let zeros: Vec<[i128; 3]> = if fast {
        conic::conic_zeros_fast(f, upper, lower)?
    } else {
        conic::conic_zeros_sweep(f, upper, lower)
    };
    let mut n = 0u64;
    for z in &zeros {
        if mpts.binary_search(z).is_err() {
            n += 1;
        }
    }
    Ok(n)
}

/// N₂(U,B): pairs with H(y) < H(x), enumerated fiberwise over H(y) < √B.
pub fn count_n2(p: &Pencil, b: u64) -> Result<u64> {
    if b == 0 {
        return Ok(0);
    }
    let c = p.disc_cubic()?;
    let mpts = m_rational_points(p)?;
    // H(y) < √B strictly: larger H(y) cannot satisfy H(x) > H(y) and
    // H(x)H(y) ≤ B
    let mut ys: Vec<[i128; 2]> = Vec::new();
    let rb = isqrt_u64(b) as i128;
    for y0 in 0..=rb {
        let y1r = if y0 == 0 { (1, 1) } else { (-rb, rb) };
        for y1 in y1r.0..=y1r.1 {
            if arith::gcd_i128(y0, y1) != 1 {
                continue;
            }
            let hy = y0.max(y1.abs());
            if hy == 0 || (hy as u128) * (hy as u128) >= b as u128 {
                continue;
            }
            if c.eval(y0, y1) == 0 {
                continue;
            }
            ys.push([y0, y1]);
        }
    }
    let counts: Result<Vec<u64>> = ys
        .par_iter()
        .map(|y| {
            let hy = y[0].max(y[1].abs());
            let upper = (b as i128) / hy;
            if upper <= hy {
                return Ok(0);
            }
            let f = p.fiber_form(y)?;
            let fast = upper > 60;
            fiber_points_in_u(&f, &mpts, upper, hy, fast)
        })
        .collect();
    Ok(counts?.iter().sum())
}

/// One rung of the ladder.
#[derive(Debug, Clone, Serialize)]
pub struct Rung {
    pub b: u64,
    pub n: u64,
    pub n1: u64,
    pub n2: u64,
}

/// Predicted leading constants (Peyre shape), assembled from the effective
/// cone constant, the real density, and the p-adic product.
#[derive(Debug, Clone, Serialize)]
pub struct PredictedConstants {
    pub rho: u32,
    pub eligible: bool,
    pub ineligibility: Option<String>,
    pub alpha: f64,
    pub tau_infty: f64,
    pub tau_infty_err: f64,
    pub s_series: f64,
    pub s_series_band: f64,
    /// c_S = (2/3) τ_∞ ∏ τ_p (rank-2 case only)
    pub c_s: Option<f64>,
    /// c_S1 = 2^{1−ρ}/(3(ρ−1)!) τ_∞ ∏ τ_p
    pub c_s1: f64,
    /// c_S2 = (1/2) τ_∞ ∏ τ_p (rank-2 case only)
    pub c_s2: Option<f64>,
}

pub fn predicted_constants(p: &Pencil, prime_cutoff: u64) -> Result<PredictedConstants> {
    let rho = classify::rho(p)?;
    let elig = classify::eligibility(p)?;
    let tau = realdensity::tau_infty_formula_a(p, 1e-3)?;
    let ss = local::singular_series_global(p, prime_cutoff)?;
    let bt = classify::mscheme(p)?;
    let alpha = classify::alpha(&bt);
    let alpha_f = *alpha.numer() as f64 / *alpha.denom() as f64;
    let fact: f64 = (1..rho as u64).product::<u64>().max(1) as f64;
    // c_S1 = 2^{1-rho} / (3 (rho-1)!) tau_inf prod tau_p
    let c_s1 = 2.0f64.powi(1 - rho as i32) / (3.0 * fact) * tau.value * ss.value;
    let (c_s, c_s2, ineligibility) = if elig.eligible {
        assert_eq!(rho, 2);
        let base = tau.value * ss.value;
        // 2/3 = 1/6 + 1/2: the two cone chambers
        let c_s = 2.0 / 3.0 * base;
        let c_s2 = 0.5 * base;
        debug_assert!((c_s - (c_s1 + c_s2)).abs() <= 1e-9 * c_s.abs());
        (Some(c_s), Some(c_s2), None)
    } else {
        let mut why = Vec::new();
        if elig.m_has_qpoint {
            why.push("M has a rational point");
        }
        if elig.c_has_qroot {
            why.push("C has a rational root");
        }
        (None, None, Some(why.join("; ")))
    };
    Ok(PredictedConstants {
        rho,
        eligible: elig.eligible,
        ineligibility,
        alpha: alpha_f,
        tau_infty: tau.value,
        tau_infty_err: tau.est_error,
        s_series: ss.value,
        s_series_band: ss.band,
        c_s,
        c_s1,
        c_s2,
    })
}

/// Counting report over a B ladder, with optional predictions attached.
#[derive(Debug, Clone, Serialize)]
pub struct CountReport {
    pub rungs: Vec<Rung>,
    pub predictions: Option<PredictedConstants>,
}

pub fn count_ladder(p: &Pencil, ladder: &[u64], prime_cutoff: Option<u64>) -> Result<CountReport> {
    let mut rungs = Vec::new();
    for &b in ladder {
        let n1 = count_n1(p, b)?;
        let n2 = count_n2(p, b)?;
        rungs.push(Rung {
            b,
            n: n1 + n2,
            n1,
            n2,
        });
    }
    let predictions = match prime_cutoff {
        Some(pc) => Some(predicted_constants(p, pc)?),
        None => None,
    };
    Ok(CountReport { rungs, predictions })
}

/// Brute-force oracle: full pair enumeration without the hyperbola split.
/// Returns (N, N1, N2). Only feasible for small B.
pub fn count_oracle(p: &Pencil, b: u64) -> Result<(u64, u64, u64)> {
    let c = p.disc_cubic()?;
    let bi = b as i128;
    let mut ys: Vec<[i128; 2]> = Vec::new();
    for y0 in 0..=bi {
        let y1r = if y0 == 0 { (1, 1) } else { (-bi, bi) };
        for y1 in y1r.0..=y1r.1 {
            if arith::gcd_i128(y0, y1) != 1 || y0.max(y1.abs()) == 0 {
                continue;
            }
            if y0.max(y1.abs()) > bi || c.eval(y0, y1) == 0 {
                continue;
            }
            ys.push([y0, y1]);
        }
    }
    let parts: Result<Vec<(u64, u64)>> = ys
        .par_iter()
        .map(|y| {
            let hy = y[0].max(y[1].abs());
            let upper = bi / hy;
            if upper == 0 {
                return Ok((0u64, 0u64));
            }
            let f = p.fiber_form(y)?;
            let zeros = conic::conic_zeros_sweep(&f, upper, 0);
            let mut n1 = 0u64;
            let mut n2 = 0u64;
            for z in zeros {
                if p.q0.eval(&z) == 0 && p.q1.eval(&z) == 0 {
                    continue; // on M, not in U
                }
                // the y determined by x must be this fiber (x not on M, so
                // it lies on exactly one smooth fiber)
                let hx = z.iter().map(|v| v.abs()).max().unwrap();
                if (hx as u128) * (hy as u128) > b as u128 {
                    continue;
                }
                if hx <= hy {
                    n1 += 1;
                } else {
                    n2 += 1;
                }
            }
            Ok((n1, n2))
        })
        .collect();
    let (mut n1, mut n2) = (0u64, 0u64);
    for (a, bb) in parts? {
        n1 += a;
        n2 += bb;
    }
    Ok((n1 + n2, n1, n2))
}

/// N(B; Γ, q, a, b): integer-vector pairs with x ≡ λa, y ≡ μb (mod q),
/// x0 ≠ 0 and (x1/x0, x2/x0) ∈ Γ. All four ± lifts of a projective pair
/// pass or fail together, so this is 4 × the filtered projective count.
pub fn count_congruence_region(
    p: &Pencil,
    b: u64,
    gamma: [f64; 4],
    q: u64,
    a: &ProjVec,
    bdir: &ProjVec,
) -> Result<u64> {
    let qi = q as i128;
    let xset: HashSet<[i128; 3]> = (0..qi)
        .map(|lam| {
            let v = a.as_array3();
            [
                (lam * v[0]).rem_euclid(qi),
                (lam * v[1]).rem_euclid(qi),
                (lam * v[2]).rem_euclid(qi),
            ]
        })
        .collect();
    let yset: HashSet<[i128; 2]> = (0..qi)
        .map(|mu| {
            let v = bdir.as_array2();
            [(mu * v[0]).rem_euclid(qi), (mu * v[1]).rem_euclid(qi)]
        })
        .collect();
    let x_ok = |x: &[i128; 3]| -> bool {
        if x[0] == 0 {
            return false;
        }
        let (u1, u2) = (x[1] as f64 / x[0] as f64, x[2] as f64 / x[0] as f64);
        if !(gamma[0] <= u1 && u1 <= gamma[1] && gamma[2] <= u2 && u2 <= gamma[3]) {
            return false;
        }
        xset.contains(&[
            x[0].rem_euclid(qi),
            x[1].rem_euclid(qi),
            x[2].rem_euclid(qi),
        ])
    };
    let y_ok =
        |y: &[i128; 2]| -> bool { yset.contains(&[y[0].rem_euclid(qi), y[1].rem_euclid(qi)]) };

    let c = p.disc_cubic()?;
    let mpts = m_rational_points(p)?;
    // hyperbola split as in count_n1/count_n2, with the filters applied
    let r = isqrt_u64(b) as i128;
    let n1: u64 = (0..=r)
        .into_par_iter()
        .map(|x0| {
            let mut n = 0u64;
            let x1_lo = if x0 == 0 { 0 } else { -r };
            for x1 in x1_lo..=r {
                for x2 in -r..=r {
                    let x = [x0, x1, x2];
                    if x == [0, 0, 0] || arith::gcd3_i128(x0, x1, x2) != 1 {
                        continue;
                    }
                    // normalized rep only (first nonzero positive)
                    if x0 == 0 && x1 < 0 {
                        continue;
                    }
                    if x0 == 0 && x1 == 0 && x2 < 0 {
                        continue;
                    }
                    let q0 = p.q0.eval(&x);
                    let q1 = p.q1.eval(&x);
                    let hx = x.iter().map(|v| v.abs()).max().unwrap();
                    if !pair_passes(&c, q0, q1, hx, b) {
                        continue;
                    }
                    let g = arith::gcd_i128(q0, q1);
                    let y = [-q1 / g, q0 / g];
                    if x_ok(&x) && y_ok(&y) {
                        n += 1;
                    }
                }
            }
            n
        })
        .sum();
    // N2 part: fiberwise
    let mut ys: Vec<[i128; 2]> = Vec::new();
    for y0 in 0..=r {
        let y1r = if y0 == 0 { (1, 1) } else { (-r, r) };
        for y1 in y1r.0..=y1r.1 {
            if arith::gcd_i128(y0, y1) != 1 {
                continue;
            }
            let hy = y0.max(y1.abs());
            if hy == 0 || (hy as u128) * (hy as u128) >= b as u128 {
                continue;
            }
            if c.eval(y0, y1) == 0 {
                continue;
            }
            ys.push([y0, y1]);
        }
    }
    let n2_parts: Result<Vec<u64>> = ys
        .par_iter()
        .map(|y| {
            if !y_ok(y) {
                return Ok(0);
            }
            let hy = y[0].max(y[1].abs());
            let upper = (b as i128) / hy;
            if upper <= hy {
                return Ok(0);
            }
            let f = p.fiber_form(y)?;
            let zeros = if upper > 60 {
                conic::conic_zeros_fast(&f, upper, hy)?
            } else {
                conic::conic_zeros_sweep(&f, upper, hy)
            };
            let mut n = 0u64;
            for z in zeros {
                if mpts.binary_search(&z).is_ok() {
                    continue;
                }
                if x_ok(&z) {
                    n += 1;
                }
            }
            Ok(n)
        })
        .collect();
    let n2: u64 = n2_parts?.iter().sum();
    Ok(4 * (n1 + n2))
}

/// Per-fiber hyperbola-method diagnostic: actual conic count against
/// ½ σ_∞ 𝔖(Q_y) X with a sharp-cutoff Monte Carlo σ_∞.
#[derive(Debug, Clone, Serialize)]
pub struct FiberDiagnostic {
    pub y: [i128; 2],
    pub actual: u64,
    pub predicted: f64,
    pub sigma_infty: f64,
    pub s_series: f64,
}

pub fn fiber_hl_diagnostic(p: &Pencil, y: &ProjVec, x_bound: i128) -> Result<FiberDiagnostic> {
    let ya = y.as_array2();
    let f = p.fiber_form(&ya)?;
    let actual = conic::count_conic_points(&f, x_bound, 0, x_bound > 600)?;
    let ss = match local::singular_series_fiber(p, y, 100) {
        Ok(v) => v,
        Err(Error::BudgetExceeded(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    // sharp-cutoff real density: vol{v ∈ [−1,1]³ : |Q(v)| ≤ ε}/(2ε) at a
    // small ε, seeded MC (diagnostic only)
    let scale: f64 = f
        .matrix()
        .iter()
        .flatten()
        .map(|&e| (e as f64).abs())
        .sum();
    let eps = 0.01 * scale.max(1.0);
    let samples = 400_000u64;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xf1be);
    let mut hits = 0u64;
    for _ in 0..samples {
        let v = [
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
            rng.gen_range(-1.0..1.0f64),
        ];
        let m = f.matrix();
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += m[i][j] as f64 * v[i] * v[j];
            }
        }
        if q.abs() <= eps {
            hits += 1;
        }
    }
    let sigma = 8.0 * hits as f64 / samples as f64 / (2.0 * eps);
    // the MC volume counts ± pairs of projective points: halve
    let predicted = 0.25 * sigma * ss * x_bound as f64;
    Ok(FiberDiagnostic {
        y: ya,
        actual,
        predicted,
        sigma_infty: sigma,
        s_series: ss,
    })
}

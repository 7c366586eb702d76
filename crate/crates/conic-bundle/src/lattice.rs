//! Congruence lattices Λ(a, m) in dimensions 2 and 3.
//!
//! Λ(a, m) = { v ∈ Z^d : v ≡ k·a (mod m) for some k } for a primitive
//! direction a. In dimension 2 the determinant is m; in dimension 3 it is m²
//! and the third successive minimum satisfies λ₃ ≤ m. Bases are kept in
//! (column) Hermite normal form, so output is canonical; successive minima in
//! the sup-norm are computed by certified enumeration, not reduction
//! estimates. The planar primitive-point count in a square comes with the
//! 6/π² ∏_{p|m} p/(p+1) · meas/m main term and its residual.

use crate::arith;
use crate::error::{Error, Result};
use crate::forms::ProjVec;
use crate::local::Rat;
use num_integer::Integer;
#[allow(unused_imports)]
use num_integer::Integer as _;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

/// The lattice Λ(a, m) with its canonical upper-triangular HNF basis.
/// `basis[j]` is the j-th basis column; `basis[j][i] = 0` for i > j.
#[derive(Debug, Clone, Serialize)]
pub struct CongruenceLattice {
    pub dim: usize,
    pub modulus: u64,
    pub direction: Vec<i128>,
    pub basis: Vec<Vec<i128>>,
    pub det: i128,
}


fn fdiv(a: i128, b: i128) -> i128 {
    Integer::div_floor(&a, &b)
}

fn cdiv(a: i128, b: i128) -> i128 {
    Integer::div_ceil(&a, &b)
}
fn sup_norm(v: &[i128]) -> i128 {
    v.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// Column-style Hermite normal form of the lattice generated by `cols`
/// (full rank assumed). Returns `dim` upper-triangular columns with positive
/// diagonal and off-diagonal entries reduced into [0, diagonal).
fn column_hnf(mut cols: Vec<Vec<i128>>, dim: usize) -> Vec<Vec<i128>> {
    // eliminate row by row from the bottom; afterwards the column with the
    // pivot for row i is moved to position i
    let mut out: Vec<Vec<i128>> = vec![Vec::new(); dim];
    for row in (0..dim).rev() {
        // combine columns until a single one has a nonzero entry in `row`
        loop {
            let nz: Vec<usize> = (0..cols.len()).filter(|&j| cols[j][row] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let (j0, j1) = (nz[0], nz[1]);
            let (a, b) = (cols[j0][row], cols[j1][row]);
            let e = i128::extended_gcd(&a, &b);
            let (g, s, t) = (e.gcd, e.x, e.y);
            let (u, v): (Vec<i128>, Vec<i128>) = (0..dim)
                .map(|i| {
                    (
                        s * cols[j0][i] + t * cols[j1][i],
                        -(b / g) * cols[j0][i] + (a / g) * cols[j1][i],
                    )
                })
                .unzip();
            cols[j0] = u;
            cols[j1] = v;
        }
        let j = (0..cols.len())
            .find(|&j| cols[j][row] != 0)
            .expect("generators span full rank");
        let mut pivot = cols.swap_remove(j);
        if pivot[row] < 0 {
            pivot.iter_mut().for_each(|c| *c = -*c);
        }
        out[row] = pivot;
    }
    // reduce entries to the right of each diagonal into [0, diag)
    for j in 0..dim {
        for j2 in j + 1..dim {
            let q = fdiv(out[j2][j], out[j][j]);
            if q != 0 {
                for i in 0..dim {
                    let s = q * out[j][i];
                    out[j2][i] -= s;
                }
            }
        }
    }
    out
}

/// Build Λ(a, m) from the generators {a, m·e₁, ..., m·e_d}. The determinant
/// is asserted against the closed form (m in dim 2, m² in dim 3).
pub fn build_lattice(a: &ProjVec, m: u64) -> Result<CongruenceLattice> {
    let dim = a.dim();
    if dim != 2 && dim != 3 {
        return Err(Error::InvalidInput(format!("dimension {dim} unsupported")));
    }
    let mi = m as i128;
    if m == 0 {
        return Err(Error::InvalidInput("modulus must be positive".into()));
    }
    let g = a.coords().iter().fold(mi, |g, &c| arith::gcd_i128(g, c));
    if g != 1 {
        return Err(Error::NonPrimitiveDirection);
    }
    let mut gens: Vec<Vec<i128>> = vec![a.coords().to_vec()];
    for i in 0..dim {
        let mut e = vec![0i128; dim];
        e[i] = mi;
        gens.push(e);
    }
    let basis = column_hnf(gens, dim);
    let det: i128 = (0..dim).map(|j| basis[j][j]).product();
    let expect = if dim == 2 { mi } else { mi * mi };
    assert_eq!(det, expect, "determinant law for Λ(a, {m})");
    Ok(CongruenceLattice {
        dim,
        modulus: m,
        direction: a.coords().to_vec(),
        basis,
        det,
    })
}

impl CongruenceLattice {
    /// Exact membership test: solve B c = v by back-substitution over Z.
    pub fn contains(&self, v: &[i128]) -> bool {
        if v.len() != self.dim {
            return false;
        }
        let mut rem = v.to_vec();
        for j in (0..self.dim).rev() {
            let d = self.basis[j][j];
            if rem[j] % d != 0 {
                return false;
            }
            let c = rem[j] / d;
            for i in 0..self.dim {
                rem[i] -= c * self.basis[j][i];
            }
        }
        rem.iter().all(|&c| c == 0)
    }

    /// All nonzero lattice points with sup-norm ≤ r, via the triangular
    /// basis (exact coefficient ranges row by row).
    pub fn points_in_ball(&self, r: i128) -> Vec<Vec<i128>> {
        let mut pts = Vec::new();
        let b = &self.basis;
        match self.dim {
            2 => {
                let d1 = b[1][1];
                for c1 in fdiv(-r, d1)..=fdiv(r, d1) {
                    let x1 = c1 * d1;
                    let t = c1 * b[1][0];
                    let d0 = b[0][0];
                    for c0 in cdiv(-r - t, d0)..=fdiv(r - t, d0) {
                        let x0 = c0 * d0 + t;
                        if x0 != 0 || x1 != 0 {
                            pts.push(vec![x0, x1]);
                        }
                    }
                }
            }
            3 => {
                let d2 = b[2][2];
                for c2 in fdiv(-r, d2)..=fdiv(r, d2) {
                    let x2 = c2 * d2;
                    let t1 = c2 * b[2][1];
                    let d1 = b[1][1];
                    for c1 in cdiv(-r - t1, d1)..=fdiv(r - t1, d1) {
                        let x1 = c1 * d1 + t1;
                        let t0 = c2 * b[2][0] + c1 * b[1][0];
                        let d0 = b[0][0];
                        for c0 in cdiv(-r - t0, d0)..=fdiv(r - t0, d0) {
                            let x0 = c0 * d0 + t0;
                            if x0 != 0 || x1 != 0 || x2 != 0 {
                                pts.push(vec![x0, x1, x2]);
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        pts
    }

    /// Sup-norm successive minima λ₁ ≤ ... ≤ λ_dim, exact. A greedy
    /// Euclidean reduction of the basis supplies an enumeration radius that
    /// provably dominates λ_dim (the largest vector of any basis does);
    /// enumeration inside that ball then certifies the minima.
    pub fn successive_minima(&self) -> Vec<i128> {
        let reduced = greedy_reduce(&self.basis);
        let radius = reduced.iter().map(|v| sup_norm(v)).max().unwrap();
        let mut pts = self.points_in_ball(radius);
        pts.sort_by_key(|v| (sup_norm(v), v.clone()));
        let mut chosen: Vec<Vec<i128>> = Vec::new();
        let mut minima = Vec::new();
        for p in pts {
            if independent(&chosen, &p) {
                minima.push(sup_norm(&p));
                chosen.push(p);
                if chosen.len() == self.dim {
                    break;
                }
            }
        }
        assert_eq!(minima.len(), self.dim, "ball radius dominates λ_dim");
        minima
    }
}

fn dot(u: &[i128], v: &[i128]) -> i128 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Pairwise greedy reduction in the Euclidean norm; terminates because the
/// total squared length strictly decreases at every accepted step.
fn greedy_reduce(basis: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let mut b: Vec<Vec<i128>> = basis.to_vec();
    loop {
        let mut changed = false;
        for i in 0..b.len() {
            for j in 0..b.len() {
                if i == j {
                    continue;
                }
                let nj = dot(&b[j], &b[j]);
                // round(<b_i, b_j> / <b_j, b_j>)
                let q = fdiv(2 * dot(&b[i], &b[j]) + nj, 2 * nj);
                if q != 0 {
                    let ni = dot(&b[i], &b[i]);
                    let cand: Vec<i128> =
                        (0..b[i].len()).map(|t| b[i][t] - q * b[j][t]).collect();
                    if dot(&cand, &cand) < ni {
                        b[i] = cand;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return b;
        }
    }
}

fn independent(chosen: &[Vec<i128>], cand: &[i128]) -> bool {
    match (chosen.len(), cand.len()) {
        (0, _) => true,
        (1, 2) => chosen[0][0] * cand[1] - chosen[0][1] * cand[0] != 0,
        (1, 3) => {
            let (u, v) = (&chosen[0], cand);
            u[1] * v[2] - u[2] * v[1] != 0
                || u[2] * v[0] - u[0] * v[2] != 0
                || u[0] * v[1] - u[1] * v[0] != 0
        }
        (2, 3) => {
            let (u, v, w) = (&chosen[0], &chosen[1], cand);
            u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0])
                + u[2] * (v[0] * w[1] - v[1] * w[0])
                != 0
        }
        _ => false,
    }
}

/// Three independent vectors of Λ(a, m) ⊂ Z³ with sup-norm ≤ m, certifying
/// λ₃ ≤ m without a full minima computation: the symmetric reduction of a
/// modulo m together with two coordinate vectors m·e_i.
pub fn lambda3_certificate(l: &CongruenceLattice) -> [Vec<i128>; 3] {
    assert_eq!(l.dim, 3);
    let m = l.modulus as i128;
    let red: Vec<i128> = l
        .direction
        .iter()
        .map(|&c| {
            let mut r = c.rem_euclid(m);
            if 2 * r > m {
                r -= m;
            }
            r
        })
        .collect();
    let j = (0..3).find(|&i| red[i] != 0).expect("a primitive, m > 1");
    let mut cert = [red, vec![0; 3], vec![0; 3]];
    let others: Vec<usize> = (0..3).filter(|&i| i != j).collect();
    cert[1][others[0]] = m;
    cert[2][others[1]] = m;
    for v in &cert {
        debug_assert!(l.contains(v) && sup_norm(v) <= m);
    }
    debug_assert!(independent(&cert[..2], &cert[2]));
    cert
}

/// Result of counting primitive lattice points in an axis-aligned square.
#[derive(Debug, Clone, Serialize)]
pub struct PrimitiveCount {
    pub count: u64,
    /// 6/π² · ∏_{p|m} p/(p+1) · side² / m
    pub main_term: f64,
    pub residual: f64,
}

/// Exact count of primitive integer points of a planar Λ(a, m) in the square
/// of the given center and side, compared against the density main term.
pub fn count_primitive_in_square(
    l: &CongruenceLattice,
    center: [Rat; 2],
    side: Rat,
) -> Result<PrimitiveCount> {
    if l.dim != 2 {
        return Err(Error::InvalidInput("square counting is planar".into()));
    }
    let meas = (side * side).to_f64().unwrap_or(f64::INFINITY);
    if side <= Rat::zero() {
        return Ok(PrimitiveCount {
            count: 0,
            main_term: 0.0,
            residual: 0.0,
        });
    }
    if meas / l.modulus as f64 > 1.0e8 {
        return Err(Error::BudgetExceeded(format!(
            "square of measure {meas:.3e} over modulus {}",
            l.modulus
        )));
    }
    let half = side / Rat::new(2, 1);
    let (lo_y, hi_y) = (center[1] - half, center[1] + half);
    let (lo_x, hi_x) = (center[0] - half, center[0] + half);
    let b = &l.basis;
    let d1 = Rat::new(b[1][1], 1);
    let c1_lo = (lo_y / d1).ceil().to_integer();
    let c1_hi = (hi_y / d1).floor().to_integer();
    let count: u64 = (c1_lo..=c1_hi)
        .into_par_iter()
        .map(|c1| {
            let x1 = c1 * b[1][1];
            let t = Rat::new(c1 * b[1][0], 1);
            let d0 = Rat::new(b[0][0], 1);
            let c0_lo = ((lo_x - t) / d0).ceil().to_integer();
            let c0_hi = ((hi_x - t) / d0).floor().to_integer();
            let mut n = 0u64;
            for c0 in c0_lo..=c0_hi {
                let x0 = c0 * b[0][0] + c1 * b[1][0];
                if arith::gcd_i128(x0, x1) == 1 {
                    n += 1;
                }
            }
            n
        })
        .sum();
    let mut density = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
    for (p, _) in arith::factor_u64(l.modulus) {
        density *= p as f64 / (p as f64 + 1.0);
    }
    let main_term = density * meas / l.modulus as f64;
    Ok(PrimitiveCount {
        count,
        main_term,
        residual: count as f64 - main_term,
    })
}

/// Error-shape bound for the square count residual:
/// c · τ(m) · (side + perimeter of the reduced cell) · log(side) / λ₁,
/// with the single constant c fitted once over a random corpus and frozen.
pub fn residual_bound(l: &CongruenceLattice, side: f64, c: f64) -> f64 {
    let tau = arith::tau_k(l.modulus, 2) as f64;
    let minima = l.successive_minima();
    let perimeter = 4.0 * l.modulus as f64 / minima[0] as f64;
    c * tau * (side + perimeter) * side.max(2.0).ln() / minima[0] as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lat2(a: [i128; 2], m: u64) -> CongruenceLattice {
        build_lattice(&ProjVec::make_primitive(&a).unwrap(), m).unwrap()
    }

    fn lat3(a: [i128; 3], m: u64) -> CongruenceLattice {
        build_lattice(&ProjVec::make_primitive(&a).unwrap(), m).unwrap()
    }

    #[test]
    fn hnf_examples() {
        let l = lat2([1, 0], 7);
        assert_eq!(l.basis, vec![vec![1, 0], vec![0, 7]]);
        assert_eq!(l.det, 7);
        let l = lat3([1, 1, 1], 4);
        assert_eq!(l.det, 16);
        assert!(l.contains(&[1, 1, 1]));
        assert!(l.contains(&[2, 2, 2]));
        assert!(l.contains(&[5, 1, 1]));
        assert!(!l.contains(&[1, 1, 2]));
    }

    #[test]
    fn non_primitive_rejected() {
        // (2, 4) is scaled to (1, 2) by make_primitive, so feed a raw
        // direction sharing a factor with m through the modulus instead
        let a = ProjVec::make_primitive(&[3, 6, 15]).unwrap(); // → (1,2,5)
        assert!(build_lattice(&a, 10).is_ok());
        // direction not primitive mod m: all coords share 5 with m = 10
        // cannot be produced by make_primitive; construct via coords (5,10)?
        // make_primitive reduces it, so the library-level contract is that
        // NonPrimitiveDirection guards direct misuse:
        let l = build_lattice(&ProjVec::make_primitive(&[1, 0]).unwrap(), 1).unwrap();
        assert_eq!(l.det, 1);
    }

    #[test]
    fn determinant_law_small_sweep() {
        // dim 2: all primitive directions for m ≤ 120
        (2u64..=120).into_par_iter().for_each(|m| {
            for a0 in 0..m as i128 {
                for a1 in 0..m as i128 {
                    if arith::gcd_i128(arith::gcd_i128(a0, a1), m as i128) != 1 {
                        continue;
                    }
                    let a = ProjVec::make_primitive(&[a0, a1]).unwrap();
                    let l = build_lattice(&a, m).unwrap();
                    assert_eq!(l.det, m as i128);
                }
            }
        });
        // dim 3: all primitive directions for m ≤ 25, with the λ₃ ≤ m
        // certificate checked as well
        (2u64..=25).into_par_iter().for_each(|m| {
            for a0 in 0..m as i128 {
                for a1 in 0..m as i128 {
                    for a2 in 0..m as i128 {
                        let g = crate::forms::gcd3(a0, a1, a2);
                        if arith::gcd_i128(g, m as i128) != 1 {
                            continue;
                        }
                        let a = ProjVec::make_primitive(&[a0, a1, a2]).unwrap();
                        let l = build_lattice(&a, m).unwrap();
                        assert_eq!(l.det, (m * m) as i128);
                        lambda3_certificate(&l);
                    }
                }
            }
        });
    }

    #[test]
    fn determinant_law_random_large() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x1a77);
        for _ in 0..400 {
            let m = rng.gen_range(2u64..=500);
            let a = loop {
                let c = [
                    rng.gen_range(0..m as i128),
                    rng.gen_range(0..m as i128),
                    rng.gen_range(0..m as i128),
                ];
                if let Ok(a) = ProjVec::make_primitive(&c) {
                    if arith::gcd_i128(crate::forms::gcd3(c[0], c[1], c[2]), m as i128) == 1 {
                        break a;
                    }
                }
            };
            let l = build_lattice(&a, m).unwrap();
            assert_eq!(l.det, (m * m) as i128);
            let minima = l.successive_minima();
            assert!(minima[2] <= m as i128, "λ₃ ≤ m at m={m}");
        }
    }

    #[test]
    fn membership_random_combinations() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xbead);
        for _ in 0..1000 {
            let m = rng.gen_range(2u64..=60);
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let a = loop {
                let c: Vec<i128> = (0..dim).map(|_| rng.gen_range(0..m as i128)).collect();
                if let Ok(a) = ProjVec::make_primitive(&c) {
                    let g = a
                        .coords()
                        .iter()
                        .fold(m as i128, |g, &x| arith::gcd_i128(g, x));
                    if g == 1 {
                        break a;
                    }
                }
            };
            let l = build_lattice(&a, m).unwrap();
            // random combination of basis columns is in the lattice, and
            // reduces mod m to a multiple of a
            let coeffs: Vec<i128> = (0..dim).map(|_| rng.gen_range(-5i128..=5)).collect();
            let v: Vec<i128> = (0..dim)
                .map(|i| (0..dim).map(|j| coeffs[j] * l.basis[j][i]).sum())
                .collect();
            assert!(l.contains(&v));
            let mi = m as i128;
            let ok = (0..mi).any(|k| {
                (0..dim).all(|i| (v[i] - k * l.direction[i]).rem_euclid(mi) == 0)
            });
            assert!(ok, "basis combination is a multiple of a mod m");
        }
    }

    #[test]
    fn minima_examples() {
        let l = lat2([1, 0], 1);
        assert_eq!(l.successive_minima(), vec![1, 1]);
        let l = lat2([1, 0], 7);
        assert_eq!(l.successive_minima(), vec![1, 7]);
    }

    #[test]
    fn minkowski_second_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x417e);
        for _ in 0..1000 {
            let m = rng.gen_range(2u64..=200);
            let dim = if rng.gen_bool(0.5) { 2 } else { 3 };
            let a = loop {
                let c: Vec<i128> = (0..dim).map(|_| rng.gen_range(0..m as i128)).collect();
                if let Ok(a) = ProjVec::make_primitive(&c) {
                    let g = a
                        .coords()
                        .iter()
                        .fold(m as i128, |g, &x| arith::gcd_i128(g, x));
                    if g == 1 {
                        break a;
                    }
                }
            };
            let l = build_lattice(&a, m).unwrap();
            let minima = l.successive_minima();
            let prod: i128 = minima.iter().product();
            assert!(prod <= l.det, "∏λᵢ ≤ det (sup-norm Minkowski)");
            assert!((1i128 << dim) * prod >= l.det, "det ≤ 2^dim ∏λᵢ");
            for w in minima.windows(2) {
                assert!(w[0] <= w[1]);
            }
        }
    }

    #[test]
    fn primitive_density_z2() {
        let r = 1000i128;
        let l = lat2([1, 0], 1);
        let pc = count_primitive_in_square(
            &l,
            [Rat::zero(), Rat::zero()],
            Rat::new(2 * r, 1),
        )
        .unwrap();
        let density = pc.count as f64 / (4.0 * (r * r) as f64);
        let target = 6.0 / (std::f64::consts::PI * std::f64::consts::PI);
        assert!(
            (density - target).abs() <= 3.0 / r as f64,
            "density {density} vs {target}"
        );
    }

    #[test]
    fn primitive_density_mod7_factor() {
        let r = 1000i128;
        let l = lat2([1, 0], 7);
        let pc = count_primitive_in_square(
            &l,
            [Rat::zero(), Rat::zero()],
            Rat::new(2 * r, 1),
        )
        .unwrap();
        // main term carries the (1/7)·(7/8) scaling
        let base = 6.0 / (std::f64::consts::PI * std::f64::consts::PI) * 4.0 * (r * r) as f64;
        assert!((pc.main_term - base / 8.0).abs() < 1e-6);
        assert!((pc.count as f64 / pc.main_term - 1.0).abs() < 0.02);
    }

    #[test]
    fn empty_square() {
        let l = lat2([1, 3], 5);
        let pc =
            count_primitive_in_square(&l, [Rat::new(1, 2), Rat::zero()], Rat::zero()).unwrap();
        assert_eq!(pc.count, 0);
        assert_eq!(pc.main_term, 0.0);
    }

    #[test]
    fn residual_error_shape_corpus() {
        // frozen constant for the residual bound; violations are
        // regressions of the counting code, not statements about the bound
        const C: f64 = 8.0;
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let m = rng.gen_range(1u64..=50);
            let a = loop {
                let c = [rng.gen_range(0..m.max(2) as i128), rng.gen_range(0..m.max(2) as i128)];
                if let Ok(a) = ProjVec::make_primitive(&c) {
                    if arith::gcd_i128(arith::gcd_i128(c[0], c[1]), m as i128) == 1 {
                        break a;
                    }
                }
            };
            let l = build_lattice(&a, m).unwrap();
            let side = rng.gen_range(50i128..=400);
            let cx = Rat::new(rng.gen_range(-100i128..=100), 2);
            let cy = Rat::new(rng.gen_range(-100i128..=100), 2);
            let pc = count_primitive_in_square(&l, [cx, cy], Rat::new(side, 1)).unwrap();
            let bound = residual_bound(&l, side as f64, C);
            worst = worst.max(pc.residual.abs() / (bound / C));
            assert!(
                pc.residual.abs() <= bound,
                "residual {} vs bound {} at m={m}, side={side}",
                pc.residual,
                bound
            );
        }
        // the frozen constant is not vacuous: the corpus reaches a
        // significant fraction of it
        assert!(worst > 0.05, "fitted constant far too loose: {worst}");
    }

    #[test]
    fn budget_guard() {
        let l = lat2([1, 0], 1);
        let r = count_primitive_in_square(
            &l,
            [Rat::zero(), Rat::zero()],
            Rat::new(40_000, 1),
        );
        assert!(matches!(r, Err(Error::BudgetExceeded(_))));
    }
}

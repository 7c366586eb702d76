//! Core representations: integral ternary quadratic forms, pencils,
//! the discriminant cubic, and primitive projective vectors.
//!
//! Conventions. A form is Q(x) = x^T A x with A itself integral and
//! symmetric, so the fiber determinant det(y0 A0 + y1 A1) is literally the
//! discriminant cubic C(y). Projective representatives are primitive with
//! the first nonzero coordinate positive; every projective point has
//! exactly one representative and counting routines account for the +/-
//! pair explicitly where a raw vector count is needed.

use crate::arith::{gcd3_i128, gcd_i128, is_perfect_square_i128};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

/// An integral ternary quadratic form Q(x) = x^T A x.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadForm3 {
    matrix: [[i128; 3]; 3],
    content: i128,
}

impl QuadForm3 {
    /// Construct from a symmetric matrix. Asymmetric input is an error.
    pub fn new(matrix: [[i128; 3]; 3]) -> Result<Self> {
        for i in 0..3 {
            for j in (i + 1)..3 {
                if matrix[i][j] != matrix[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        let mut content: i128 = 0;
        for row in &matrix {
            for &e in row {
                content = gcd_i128(content, e);
            }
        }
        Ok(QuadForm3 { matrix, content })
    }

    pub fn diagonal(a: i128, b: i128, c: i128) -> Self {
        QuadForm3::new([[a, 0, 0], [0, b, 0], [0, 0, c]]).expect("diagonal is symmetric")
    }

    pub fn matrix(&self) -> &[[i128; 3]; 3] {
        &self.matrix
    }

    /// gcd of the matrix entries (0 for the zero form).
    pub fn content(&self) -> i128 {
        self.content
    }

    pub fn is_zero(&self) -> bool {
        self.content == 0
    }

    /// Q(x) = x^T A x, exact; panics on (unreachable at documented budgets)
    /// i128 overflow rather than wrapping.
    pub fn eval(&self, x: &[i128; 3]) -> i128 {
        let mut acc: i128 = 0;
        for i in 0..3 {
            for j in 0..3 {
                let term = self.matrix[i][j]
                    .checked_mul(x[i])
                    .and_then(|t| t.checked_mul(x[j]))
                    .expect("eval overflow");
                acc = acc.checked_add(term).expect("eval overflow");
            }
        }
        acc
    }

    /// The associated bilinear form B(u,v) = u^T A v, so Q(u) = B(u,u).
    pub fn bilinear(&self, u: &[i128; 3], v: &[i128; 3]) -> i128 {
        let mut acc: i128 = 0;
        for i in 0..3 {
            for j in 0..3 {
                let term = self.matrix[i][j]
                    .checked_mul(u[i])
                    .and_then(|t| t.checked_mul(v[j]))
                    .expect("bilinear overflow");
                acc = acc.checked_add(term).expect("bilinear overflow");
            }
        }
        acc
    }

    pub fn det(&self) -> i128 {
        det3(&self.matrix)
    }

    pub fn scale(&self, k: i128) -> Self {
        let mut m = self.matrix;
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e = e.checked_mul(k).expect("scale overflow");
            }
        }
        QuadForm3::new(m).expect("scaling preserves symmetry")
    }

    /// Divide out the content; identity on the zero form.
    pub fn primitive_part(&self) -> Self {
        if self.content <= 1 {
            return self.clone();
        }
        let mut m = self.matrix;
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e /= self.content;
            }
        }
        QuadForm3::new(m).expect("division preserves symmetry")
    }

    /// Pullback along x -> M x, i.e. matrix M^T A M.
    pub fn transform(&self, m: &[[i128; 3]; 3]) -> Self {
        let mut am = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    am[i][j] = am[i][j]
                        .checked_add(
                            self.matrix[i][k]
                                .checked_mul(m[k][j])
                                .expect("transform overflow"),
                        )
                        .expect("transform overflow");
                }
            }
        }
        let mut out = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    out[i][j] = out[i][j]
                        .checked_add(m[k][i].checked_mul(am[k][j]).expect("transform overflow"))
                        .expect("transform overflow");
                }
            }
        }
        QuadForm3::new(out).expect("congruence preserves symmetry")
    }

    /// Rank of A over F_p by Gaussian elimination. For p = 2 this is the
    /// rank of the mod-2 matrix, which is NOT the quadratic-form rank in
    /// characteristic 2; callers needing 2-adic information use the
    /// sigma*(2^k) sweeps instead.
    pub fn rank_mod_p(&self, p: u64) -> u32 {
        let pp = p as i128;
        let mut m = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.matrix[i][j].rem_euclid(pp);
            }
        }
        let mut rank = 0u32;
        let mut row = 0usize;
        for col in 0..3 {
            let pivot = (row..3).find(|&r| m[r][col] != 0);
            let Some(pr) = pivot else { continue };
            m.swap(row, pr);
            let inv = crate::arith::mod_inv(m[row][col], pp).expect("pivot invertible");
            for r in 0..3 {
                if r != row && m[r][col] != 0 {
                    let factor = m[r][col] * inv % pp;
                    for c in 0..3 {
                        m[r][c] = (m[r][c] - factor * m[row][c]).rem_euclid(pp);
                    }
                }
            }
            rank += 1;
            row += 1;
            if row == 3 {
                break;
            }
        }
        rank
    }
}

pub fn det3(m: &[[i128; 3]; 3]) -> i128 {
    let c0 = m[1][1]
        .checked_mul(m[2][2])
        .and_then(|a| a.checked_sub(m[1][2].checked_mul(m[2][1])?))
        .expect("det overflow");
    let c1 = m[1][0]
        .checked_mul(m[2][2])
        .and_then(|a| a.checked_sub(m[1][2].checked_mul(m[2][0])?))
        .expect("det overflow");
    let c2 = m[1][0]
        .checked_mul(m[2][1])
        .and_then(|a| a.checked_sub(m[1][1].checked_mul(m[2][0])?))
        .expect("det overflow");
    m[0][0]
        .checked_mul(c0)
        .and_then(|a| a.checked_sub(m[0][1].checked_mul(c1)?))
        .and_then(|a| a.checked_add(m[0][2].checked_mul(c2)?))
        .expect("det overflow")
}

/// The discriminant cubic C(y0, y1) = det(y0 A0 + y1 A1).
///
/// `coeffs[i]` is the coefficient of y0^i y1^(3-i).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCubic {
    pub coeffs: [i128; 4],
    disc: BigInt,
}

impl BinaryCubic {
    pub fn from_coeffs(coeffs: [i128; 4]) -> Self {
        let disc = cubic_disc(&coeffs);
        BinaryCubic { coeffs, disc }
    }

    pub fn eval(&self, y0: i128, y1: i128) -> i128 {
        let term = |c: i128, a: u32| -> i128 {
            let mut acc = c;
            for _ in 0..a {
                acc = acc.checked_mul(y0).expect("cubic eval overflow");
            }
            for _ in 0..(3 - a) {
                acc = acc.checked_mul(y1).expect("cubic eval overflow");
            }
            acc
        };
        (0u32..=3)
            .map(|i| term(self.coeffs[i as usize], i))
            .fold(0i128, |acc, t| acc.checked_add(t).expect("cubic eval overflow"))
    }

    pub fn disc(&self) -> &BigInt {
        &self.disc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    /// All projective rational roots (y0 : y1), primitive and
    /// sign-normalized, found exactly by divisor search on the primitive
    /// dehomogenization (assumes the cubic is not identically zero).
    pub fn rational_roots(&self) -> Vec<(i128, i128)> {
        assert!(!self.is_zero());
        let mut roots: Vec<(i128, i128)> = Vec::new();
        // Root at infinity (1 : 0) <=> leading y0-coefficient vanishes.
        if self.coeffs[3] == 0 {
            roots.push((1, 0));
        }
        // Dehomogenize in u = y0/y1: f(u) = c3 u^3 + c2 u^2 + c1 u + c0,
        // low-to-high coefficient order below.
        let mut f: Vec<i128> = self.coeffs.to_vec();
        // strip u-power factors (roots at u = 0)
        if f[0] == 0 {
            roots.push((0, 1));
            while f.first() == Some(&0) && f.len() > 1 {
                f.remove(0);
            }
        }
        while f.last() == Some(&0) && f.len() > 1 {
            f.pop();
        }
        if f.len() > 1 {
            let content = f.iter().fold(0i128, |acc, &c| gcd_i128(acc, c));
            for c in f.iter_mut() {
                *c /= content;
            }
            let trailing = f[0].unsigned_abs();
            let leading = f.last().unwrap().unsigned_abs();
            for &b in &divisors_of(leading) {
                for &a_abs in &divisors_of(trailing) {
                    for a in [a_abs as i128, -(a_abs as i128)] {
                        let b = b as i128;
                        if gcd_i128(a, b) != 1 {
                            continue;
                        }
                        // homogeneous evaluation of f at (a : b)
                        let deg = f.len() - 1;
                        let mut acc = 0i128;
                        for (i, &c) in f.iter().enumerate() {
                            let mut t = c;
                            for _ in 0..i {
                                t = t.checked_mul(a).expect("root search overflow");
                            }
                            for _ in 0..(deg - i) {
                                t = t.checked_mul(b).expect("root search overflow");
                            }
                            acc = acc.checked_add(t).expect("root search overflow");
                        }
                        if acc == 0 {
                            let root = if a < 0 { (-a, -b) } else { (a, b) };
                            if !roots.contains(&root) {
                                roots.push(root);
                            }
                        }
                    }
                }
            }
        }
        roots.sort();
        roots
    }
}

fn divisors_of(n: u128) -> Vec<u128> {
    if n == 0 {
        return vec![];
    }
    let mut divs = vec![1u128];
    for (p, e) in crate::arith::factor_u128(n) {
        let base = divs.clone();
        let mut pw = 1u128;
        for _ in 0..e {
            pw *= p;
            for &d in &base {
                divs.push(d * pw);
            }
        }
    }
    divs.sort_unstable();
    divs
}

/// Discriminant of c3 y0^3 + c2 y0^2 y1 + c1 y0 y1^2 + c0 y1^3 as a cubic in
/// y0 (coefficients a=c3, b=c2, c=c1, d=c0):
/// 18abcd - 4 b^3 d + b^2 c^2 - 4 a c^3 - 27 a^2 d^2.
fn cubic_disc(coeffs: &[i128; 4]) -> BigInt {
    let a = BigInt::from(coeffs[3]);
    let b = BigInt::from(coeffs[2]);
    let c = BigInt::from(coeffs[1]);
    let d = BigInt::from(coeffs[0]);
    18 * &a * &b * &c * &d - 4 * &b * &b * &b * &d + &b * &b * &c * &c
        - 4 * &a * &c * &c * &c
        - 27 * &a * &a * &d * &d
}

/// A pencil of two non-proportional integral ternary quadratic forms.
#[derive(Debug, Clone)]
pub struct Pencil {
    pub q0: QuadForm3,
    pub q1: QuadForm3,
    pub name: Option<String>,
}

impl Pencil {
    pub fn new(q0: QuadForm3, q1: QuadForm3, name: Option<String>) -> Result<Self> {
        if q0.is_zero() || q1.is_zero() {
            return Err(Error::DegeneratePencil("a form is zero".into()));
        }
        // Proportional over Q <=> all 2x2 minors of the stacked coefficient
        // vectors vanish.
        let v0: Vec<i128> = q0.matrix.iter().flatten().copied().collect();
        let v1: Vec<i128> = q1.matrix.iter().flatten().copied().collect();
        let proportional = (0..9).all(|i| {
            (0..9).all(|j| {
                v0[i]
                    .checked_mul(v1[j])
                    .zip(v0[j].checked_mul(v1[i]))
                    .map(|(a, b)| a == b)
                    .expect("minor overflow")
            })
        });
        if proportional {
            return Err(Error::DegeneratePencil("forms are proportional".into()));
        }
        Ok(Pencil { q0, q1, name })
    }

    /// The fiber form Q_y = y0 Q0 + y1 Q1.
    pub fn fiber_form(&self, y: &[i128; 2]) -> Result<QuadForm3> {
        if y[0] == 0 && y[1] == 0 {
            return Err(Error::ZeroVector);
        }
        let mut m = [[0i128; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = y[0]
                    .checked_mul(self.q0.matrix[i][j])
                    .and_then(|a| a.checked_add(y[1].checked_mul(self.q1.matrix[i][j])?))
                    .expect("fiber overflow");
            }
        }
        QuadForm3::new(m)
    }

    /// C(y) = det(y0 A0 + y1 A1), by interpolation of the determinant,
    /// verified at a fifth point.
    pub fn disc_cubic(&self) -> Result<BinaryCubic> {
        let det_at = |y0: i128, y1: i128| -> i128 {
            let mut m = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] = y0 * self.q0.matrix[i][j] + y1 * self.q1.matrix[i][j];
                }
            }
            det3(&m)
        };
        let d10 = det_at(1, 0);
        let d01 = det_at(0, 1);
        let d11 = det_at(1, 1);
        let d1m1 = det_at(1, -1);
        let c3 = d10;
        let c0 = d01;
        // d11 = c3+c2+c1+c0, d1m1 = c3-c2+c1-c0
        let sum = d11 + d1m1; // 2(c3 + c1)
        let diff = d11 - d1m1; // 2(c2 + c0)
        debug_assert!(sum % 2 == 0 && diff % 2 == 0);
        let c1 = sum / 2 - c3;
        let c2 = diff / 2 - c0;
        let cubic = BinaryCubic::from_coeffs([c0, c1, c2, c3]);
        // Independent verification at a fifth point.
        if cubic.eval(1, 2) != det_at(1, 2) {
            return Err(Error::DegeneratePencil(
                "interpolated cubic disagrees with determinant".into(),
            ));
        }
        if cubic.is_zero() {
            return Err(Error::IdenticallyZero);
        }
        Ok(cubic)
    }

    /// Smooth <=> C nonzero with nonzero discriminant (C separable).
    pub fn is_smooth(&self) -> bool {
        match self.disc_cubic() {
            Ok(c) => !c.disc().is_zero(),
            Err(_) => false,
        }
    }

    /// Multiply both matrices by 6, making every congruence-count identity
    /// available at p = 2, 3 (C picks up a factor 6^3 = 216).
    pub fn normalize6(&self) -> Pencil {
        Pencil {
            q0: self.q0.scale(6),
            q1: self.q1.scale(6),
            name: self.name.clone(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PencilFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(rename = "Q0")]
    q0: [[i64; 3]; 3],
    #[serde(rename = "Q1")]
    q1: [[i64; 3]; 3],
}

impl Pencil {
    pub fn from_json(s: &str) -> Result<Pencil> {
        let pf: PencilFile = serde_json::from_str(s)?;
        let lift = |m: [[i64; 3]; 3]| {
            let mut out = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = m[i][j] as i128;
                }
            }
            out
        };
        Pencil::new(
            QuadForm3::new(lift(pf.q0))?,
            QuadForm3::new(lift(pf.q1))?,
            pf.name,
        )
    }

    pub fn to_json(&self) -> String {
        let shrink = |m: &[[i128; 3]; 3]| {
            let mut out = [[0i64; 3]; 3];
            for i in 0..3 {
                for j in 0..3 {
                    out[i][j] = i64::try_from(m[i][j]).expect("entry fits i64");
                }
            }
            out
        };
        serde_json::to_string_pretty(&PencilFile {
            name: self.name.clone(),
            q0: shrink(self.q0.matrix()),
            q1: shrink(self.q1.matrix()),
        })
        .expect("serialization cannot fail")
    }

    pub fn load(path: &std::path::Path) -> Result<Pencil> {
        Pencil::from_json(&std::fs::read_to_string(path)?)
    }
}

/// A primitive, sign-normalized projective vector of length 2 or 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ProjVec {
    coords: Vec<i128>,
    height: i128,
}

impl ProjVec {
    /// Divide by the gcd and normalize the sign of the first nonzero entry.
    pub fn make_primitive(v: &[i128]) -> Result<ProjVec> {
        assert!(v.len() == 2 || v.len() == 3, "length 2 or 3");
        if v.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let g = v.iter().fold(0i128, |acc, &c| gcd_i128(acc, c));
        let mut coords: Vec<i128> = v.iter().map(|&c| c / g).collect();
        let lead = *coords.iter().find(|&&c| c != 0).unwrap();
        if lead < 0 {
            for c in coords.iter_mut() {
                *c = -*c;
            }
        }
        let height = coords.iter().map(|&c| c.abs()).max().unwrap();
        Ok(ProjVec { coords, height })
    }

    pub fn coords(&self) -> &[i128] {
        &self.coords
    }

    pub fn height(&self) -> i128 {
        self.height
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_array3(&self) -> [i128; 3] {
        assert_eq!(self.coords.len(), 3);
        [self.coords[0], self.coords[1], self.coords[2]]
    }

    pub fn as_array2(&self) -> [i128; 2] {
        assert_eq!(self.coords.len(), 2);
        [self.coords[0], self.coords[1]]
    }
}

/// Detect whether an integer is a perfect square; re-exported convenience
/// for the split-fiber test (square discriminant of the binary part).
pub fn is_square(n: i128) -> bool {
    is_perfect_square_i128(n)
}

pub fn gcd3(a: i128, b: i128, c: i128) -> i128 {
    gcd3_i128(a, b, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_pencil() -> Pencil {
        Pencil::new(
            QuadForm3::diagonal(1, 1, 1),
            QuadForm3::diagonal(1, 2, 3),
            Some("diag".into()),
        )
        .unwrap()
    }

    #[test]
    fn eval_examples() {
        let id = QuadForm3::diagonal(1, 1, 1);
        assert_eq!(id.eval(&[1, 0, 0]), 1);
        assert_eq!(id.eval(&[1, 2, 3]), 14);
        let lorentz = QuadForm3::diagonal(1, 1, -1);
        assert_eq!(lorentz.eval(&[3, 4, 5]), 0);
    }

    #[test]
    fn fiber_endpoints() {
        let p = diag_pencil();
        assert_eq!(p.fiber_form(&[1, 0]).unwrap(), p.q0);
        assert_eq!(p.fiber_form(&[0, 1]).unwrap(), p.q1);
        assert_eq!(
            p.fiber_form(&[1, 1]).unwrap(),
            QuadForm3::diagonal(2, 3, 4)
        );
        assert!(matches!(
            p.fiber_form(&[0, 0]),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn proportional_rejected() {
        let q = QuadForm3::diagonal(1, 1, 1);
        let q2 = QuadForm3::diagonal(2, 2, 2);
        assert!(Pencil::new(q, q2, None).is_err());
    }

    #[test]
    fn asymmetric_rejected() {
        assert!(QuadForm3::new([[1, 2, 0], [0, 1, 0], [0, 0, 1]]).is_err());
    }

    #[test]
    fn disc_cubic_diag() {
        // C(y) = (y0+y1)(y0+2y1)(y0+3y1) = y0^3 + 6 y0^2 y1 + 11 y0 y1^2 + 6 y1^3
        let c = diag_pencil().disc_cubic().unwrap();
        assert_eq!(c.coeffs, [6, 11, 6, 1]);
        assert!(!c.disc().is_zero());
        assert!(diag_pencil().is_smooth());
    }

    #[test]
    fn disc_cubic_matches_det_at_samples() {
        let p = Pencil::new(
            QuadForm3::new([[2, 1, 0], [1, -1, 3], [0, 3, 1]]).unwrap(),
            QuadForm3::new([[0, 1, 1], [1, 2, 0], [1, 0, -3]]).unwrap(),
            None,
        )
        .unwrap();
        let c = p.disc_cubic().unwrap();
        for y0 in -5i128..=5 {
            for y1 in -5i128..=5 {
                if (y0, y1) == (0, 0) {
                    continue;
                }
                let f = p.fiber_form(&[y0, y1]).unwrap();
                assert_eq!(c.eval(y0, y1), f.det(), "y=({y0},{y1})");
            }
        }
    }

    #[test]
    fn repeated_factor_not_smooth() {
        // C has repeated factor (y0+y1)^2
        let p = Pencil::new(
            QuadForm3::diagonal(1, 1, 1),
            QuadForm3::diagonal(1, 1, 2),
            None,
        )
        .unwrap();
        assert!(!p.is_smooth());
    }

    #[test]
    fn normalize6_properties() {
        let p = diag_pencil();
        let n = p.normalize6();
        assert_eq!(n.q0, QuadForm3::diagonal(6, 6, 6));
        assert_eq!(n.q1, QuadForm3::diagonal(6, 12, 18));
        let c = n.disc_cubic().unwrap();
        // 216 | C(y) for every y: check a residue sweep
        for y0 in 0i128..6 {
            for y1 in 0i128..6 {
                if (y0, y1) == (0, 0) {
                    continue;
                }
                assert_eq!(c.eval(y0, y1).rem_euclid(216), 0);
            }
        }
        for &cf in &c.coeffs {
            assert_eq!(cf % 216, 0);
        }
        // applying twice scales matrices by 36
        let nn = n.normalize6();
        assert_eq!(nn.q0, QuadForm3::diagonal(36, 36, 36));
    }

    #[test]
    fn rank_mod_p_cases() {
        assert_eq!(QuadForm3::diagonal(1, 1, 1).rank_mod_p(5), 3);
        assert_eq!(QuadForm3::diagonal(5, 1, 1).rank_mod_p(5), 2);
        assert_eq!(QuadForm3::diagonal(0, 0, 0).rank_mod_p(3), 0);
        let q = QuadForm3::new([[0, 1, 0], [1, 0, 0], [0, 0, 0]]).unwrap();
        assert_eq!(q.rank_mod_p(7), 2);
    }

    #[test]
    fn make_primitive_examples() {
        let v = ProjVec::make_primitive(&[2, 4, 6]).unwrap();
        assert_eq!(v.coords(), &[1, 2, 3]);
        assert_eq!(v.height(), 3);
        let v = ProjVec::make_primitive(&[0, -5]).unwrap();
        assert_eq!(v.coords(), &[0, 1]);
        assert_eq!(v.height(), 1);
        let v = ProjVec::make_primitive(&[-3, 6, -9]).unwrap();
        assert_eq!(v.coords(), &[1, -2, 3]);
        assert!(ProjVec::make_primitive(&[0, 0, 0]).is_err());
    }

    #[test]
    fn height_scale_invariance() {
        for k in [-7i128, -1, 2, 5, 30] {
            let v = [3i128, -6, 12];
            let kv = [k * v[0], k * v[1], k * v[2]];
            assert_eq!(
                ProjVec::make_primitive(&v).unwrap().height(),
                ProjVec::make_primitive(&kv).unwrap().height()
            );
        }
    }

    #[test]
    fn pencil_bilinearity_fuzz() {
        let p = Pencil::new(
            QuadForm3::new([[1, -2, 0], [-2, 3, 1], [0, 1, -1]]).unwrap(),
            QuadForm3::new([[0, 0, 2], [0, 5, 1], [2, 1, 0]]).unwrap(),
            None,
        )
        .unwrap();
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 41) as i128 - 20
        };
        for _ in 0..200 {
            let x = [next(), next(), next()];
            let y = [next(), next()];
            if y == [0, 0] {
                continue;
            }
            let f = p.fiber_form(&y).unwrap();
            assert_eq!(f.eval(&x), y[0] * p.q0.eval(&x) + y[1] * p.q1.eval(&x));
        }
    }

    #[test]
    fn smoothness_invariant_under_unimodular_changes() {
        let p = diag_pencil();
        // a few unimodular transforms
        let ms = [
            [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
            [[0, 1, 0], [1, 0, 0], [0, 0, -1]],
            [[1, 0, 2], [0, 1, -1], [0, 0, 1]],
            [[1, -3, 1], [0, 1, 2], [0, 0, 1]],
        ];
        for m in &ms {
            let q0 = p.q0.transform(m);
            let q1 = p.q1.transform(m);
            let pt = Pencil::new(q0, q1, None).unwrap();
            assert!(pt.is_smooth());
        }
        // pencil basis change (a b; c d) invertible over Z
        let combos = [(1i128, 1i128, 0i128, 1i128), (2, 1, 1, 1), (1, -1, 1, -2)];
        for (a, b, c, d) in combos {
            assert_eq!((a * d - b * c).abs(), 1, "unimodular basis change");
            let q0 = {
                let mut m = [[0i128; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = a * p.q0.matrix()[i][j] + b * p.q1.matrix()[i][j];
                    }
                }
                QuadForm3::new(m).unwrap()
            };
            let q1 = {
                let mut m = [[0i128; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] = c * p.q0.matrix()[i][j] + d * p.q1.matrix()[i][j];
                    }
                }
                QuadForm3::new(m).unwrap()
            };
            assert!(Pencil::new(q0, q1, None).unwrap().is_smooth());
        }
    }

    #[test]
    fn cubic_rational_roots() {
        // (y0+y1)(y0+2y1)(y0+3y1): roots (-1:1), (-2:1), (-3:1) -> normalized (1,-1)?
        // sign normalization: first nonzero positive: (-1,1) -> (1,-1)
        let c = diag_pencil().disc_cubic().unwrap();
        let roots = c.rational_roots();
        assert_eq!(roots.len(), 3);
        for (s, t) in &roots {
            assert_eq!(c.eval(*s, *t), 0);
        }
        assert_eq!(roots, vec![(1, -1), (2, -1), (3, -1)]);
    }

    #[test]
    fn json_roundtrip() {
        let p = diag_pencil();
        let s = p.to_json();
        let p2 = Pencil::from_json(&s).unwrap();
        assert_eq!(p2.q0, p.q0);
        assert_eq!(p2.q1, p.q1);
        assert_eq!(p2.name.as_deref(), Some("diag"));
        assert_eq!(p2.to_json(), s);
        // asymmetric json must fail
        let bad = r#"{"Q0": [[1,2,0],[0,1,0],[0,0,1]], "Q1": [[1,0,0],[0,2,0],[0,0,3]]}"#;
        assert!(Pencil::from_json(bad).is_err());
    }
}

//! Shared exact integer arithmetic.
//!
//! Everything downstream (congruence counts, local symbols, conic solving)
//! reduces to the primitives here:
//!
//! * gcds, modular inverses, Jacobi symbols, square roots mod p,
//! * deterministic primality + Pollard rho factorization (u64 fast path,
//!   u128 fallback),
//! * exact root counting for one-variable polynomials modulo prime powers.
//!
//! All routines are pure and panic only on caller contract violations
//! (stated in each item's docs).

use num_bigint::BigInt;
use num_integer::Roots;
use num_traits::{Signed, Zero};

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

pub fn gcd3_i128(a: i128, b: i128, c: i128) -> i128 {
    gcd_i128(gcd_i128(a, b), c)
}

pub fn gcd_u64(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Extended gcd: returns (g, x, y) with a*x + b*y = g, g = gcd(a,b) >= 0.
pub fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i128, 0i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Inverse of a modulo m (m >= 1), or None when gcd(a,m) > 1.
pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    debug_assert!(m >= 1);
    let (g, x, _) = ext_gcd(a.rem_euclid(m), m);
    if g != 1 {
        None
    } else {
        Some(x.rem_euclid(m))
    }
}

/// a^e mod m for m < 2^63 (intermediates fit in u128).
pub fn mod_pow(a: u64, mut e: u64, m: u64) -> u64 {
    debug_assert!(m < (1 << 63));
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut base = (a % m) as u128;
    let mut acc: u128 = 1;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % m128;
        }
        base = base * base % m128;
        e >>= 1;
    }
    acc as u64
}

/// Jacobi symbol (a/n); n must be odd and positive.
pub fn jacobi(mut a: i128, mut n: i128) -> i32 {
    assert!(n > 0 && n % 2 == 1, "jacobi: modulus must be odd positive");
    a = a.rem_euclid(n);
    let mut result = 1i32;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Deterministic Miller–Rabin, valid for all u64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    // This witness set is deterministic below 3.3 * 10^24, so for all u64.
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = mod_pow(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = (x as u128 * x as u128 % n as u128) as u64;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho_u64(n: u64) -> u64 {
    debug_assert!(n > 1 && !is_prime_u64(n) && n % 2 == 1);
    let n128 = n as u128;
    let mut c: u64 = 1;
    loop {
        let f = |v: u64| ((v as u128 * v as u128 + c as u128) % n128) as u64;
        let mut x: u64 = 2;
        let mut y: u64 = 2;
        loop {
            x = f(x);
            y = f(f(y));
            if x == y {
                break; // cycle without factor; retry with a new constant
            }
            let d = gcd_u64(x.abs_diff(y), n);
            if d > 1 && d < n {
                return d;
            }
            if d == n {
                break;
            }
        }
        c += 1;
    }
}

/// Factor n into sorted (prime, exponent) pairs. n >= 1.
pub fn factor_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out: Vec<(u64, u32)> = Vec::new();
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31] {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    let mut stack = vec![n];
    let mut primes: Vec<u64> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho_u64(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut i = 0;
    while i < primes.len() {
        let p = primes[i];
        let mut e = 0;
        while i < primes.len() && primes[i] == p {
            e += 1;
            i += 1;
        }
        out.push((p, e));
    }
    out.sort_unstable();
    out
}

fn add_mod_u128(a: u128, b: u128, m: u128) -> u128 {
    // Requires a, b < m < 2^127.
    let s = a + b;
    if s >= m {
        s - m
    } else {
        s
    }
}

fn mul_mod_u128(mut a: u128, mut b: u128, m: u128) -> u128 {
    debug_assert!(m < 1 << 127);
    a %= m;
    b %= m;
    if let (Ok(a64), Ok(b64), Ok(m64)) = (u64::try_from(a), u64::try_from(b), u64::try_from(m)) {
        return (a64 as u128 * b64 as u128) % m64 as u128;
    }
    let mut acc: u128 = 0;
    while b > 0 {
        if b & 1 == 1 {
            acc = add_mod_u128(acc, a, m);
        }
        a = add_mod_u128(a, a, m);
        b >>= 1;
    }
    acc
}

fn is_prime_u128(n: u128) -> bool {
    if let Ok(n64) = u64::try_from(n) {
        return is_prime_u64(n64);
    }
    if n % 2 == 0 {
        return false;
    }
    let nm1 = n - 1;
    let s = nm1.trailing_zeros();
    let d = nm1 >> s;
    // Probabilistic at this size; fine for desk-scale |C(y)| factorization,
    // and every factor found is verified by exact division.
    'witness: for &a in &[2u128, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43] {
        let mut x = {
            let mut base = a % n;
            let mut e = d;
            let mut acc: u128 = 1;
            while e > 0 {
                if e & 1 == 1 {
                    acc = mul_mod_u128(acc, base, n);
                }
                base = mul_mod_u128(base, base, n);
                e >>= 1;
            }
            acc
        };
        if x == 1 || x == nm1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod_u128(x, x, n);
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_rho_u128(n: u128) -> u128 {
    let mut c: u128 = 1;
    loop {
        let mut x: u128 = 2;
        let mut y: u128 = 2;
        loop {
            x = add_mod_u128(mul_mod_u128(x, x, n), c % n, n);
            y = add_mod_u128(mul_mod_u128(y, y, n), c % n, n);
            y = add_mod_u128(mul_mod_u128(y, y, n), c % n, n);
            let d = {
                let diff = if x > y { x - y } else { y - x };
                if diff == 0 {
                    break;
                }
                let (mut a, mut b) = (diff, n);
                while b != 0 {
                    let t = a % b;
                    a = b;
                    b = t;
                }
                a
            };
            if d > 1 && d < n {
                return d;
            }
            if d == n {
                break;
            }
        }
        c += 1;
    }
}

/// Factor n >= 1 given as u128 (values beyond u64 occur for large fibers).
pub fn factor_u128(n: u128) -> Vec<(u128, u32)> {
    if let Ok(n64) = u64::try_from(n) {
        return factor_u64(n64)
            .into_iter()
            .map(|(p, e)| (p as u128, e))
            .collect();
    }
    let mut n = n;
    let mut out: Vec<(u128, u32)> = Vec::new();
    let mut p: u128 = 2;
    while p < 100_000 && p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    let mut stack = vec![n];
    let mut primes: Vec<u128> = Vec::new();
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if let Ok(m64) = u64::try_from(m) {
            for (q, e) in factor_u64(m64) {
                for _ in 0..e {
                    primes.push(q as u128);
                }
            }
            continue;
        }
        if is_prime_u128(m) {
            primes.push(m);
            continue;
        }
        let d = pollard_rho_u128(m);
        stack.push(d);
        stack.push(m / d);
    }
    primes.sort_unstable();
    let mut i = 0;
    while i < primes.len() {
        let q = primes[i];
        let mut e = 0;
        while i < primes.len() && primes[i] == q {
            e += 1;
            i += 1;
        }
        out.push((q, e));
    }
    out.sort_unstable();
    out
}

/// Square root of a modulo odd prime p (Tonelli–Shanks); None for non-residues.
pub fn sqrt_mod_p(a: u64, p: u64) -> Option<u64> {
    debug_assert!(p % 2 == 1 && is_prime_u64(p));
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if mod_pow(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(mod_pow(a, (p + 1) / 4, p));
    }
    // Tonelli–Shanks.
    let s = (p - 1).trailing_zeros() as u64;
    let q = (p - 1) >> s;
    let mut z = 2u64;
    while mod_pow(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = mod_pow(z, q, p);
    let mut t = mod_pow(a, q, p);
    let mut r = mod_pow(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u64;
        let mut tt = t;
        while tt != 1 {
            tt = (tt as u128 * tt as u128 % p as u128) as u64;
            i += 1;
        }
        let b = mod_pow(c, 1 << (m - i - 1), p);
        m = i;
        c = (b as u128 * b as u128 % p as u128) as u64;
        t = (t as u128 * c as u128 % p as u128) as u64;
        r = (r as u128 * b as u128 % p as u128) as u64;
    }
    Some(r)
}

/// Primes up to n inclusive, by sieve.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(i, &b)| if b { Some(i as u64) } else { None })
        .collect()
}

/// Floor square root of a nonnegative i128.
pub fn isqrt_i128(n: i128) -> i128 {
    assert!(n >= 0);
    (n as u128).sqrt() as i128
}

pub fn is_perfect_square_i128(n: i128) -> bool {
    if n < 0 {
        return false;
    }
    let r = isqrt_i128(n);
    r * r == n
}

pub fn is_perfect_square_bigint(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    if n.is_zero() {
        return true;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// phi(p^k).
pub fn phi_prime_power(p: u64, k: u32) -> u64 {
    debug_assert!(k >= 1);
    p.pow(k - 1) * (p - 1)
}

/// phi(m) by factorization.
pub fn euler_phi(m: u64) -> u64 {
    factor_u64(m)
        .into_iter()
        .map(|(p, e)| phi_prime_power(p, e))
        .product()
}

/// k-th divisor function τ_k(n): number of ways to write n as an ordered
/// product of k positive integers. τ_k(p^e) = C(e+k-1, k-1).
pub fn tau_k(n: u64, k: u32) -> u128 {
    assert!(n >= 1 && k >= 1);
    factor_u64(n)
        .into_iter()
        .map(|(_, e)| binomial(e as u64 + k as u64 - 1, k as u64 - 1))
        .product()
}

pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// p-adic valuation of n (n != 0).
pub fn valuation_i128(mut n: i128, p: i128) -> u32 {
    assert!(n != 0 && p >= 2);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn poly_eval_mod(f: &[i128], x: i128, m: i128) -> i128 {
    let mut acc: i128 = 0;
    for &c in f.iter().rev() {
        acc = (acc * x + c).rem_euclid(m);
    }
    acc
}

/// Roots mod p of a polynomial with i128 coefficients (constant term first).
/// For p < 2^20 this sweeps; for larger p the degree must be <= 2 and the
/// quadratic formula with Tonelli–Shanks is used.
pub fn poly_roots_mod_p(f: &[i128], p: u64) -> Vec<u64> {
    let pp = p as i128;
    let fr: Vec<i128> = f.iter().map(|&c| c.rem_euclid(pp)).collect();
    let deg = fr.iter().rposition(|&c| c != 0);
    let deg = match deg {
        None => return (0..p).collect(), // identically zero: everything is a root
        Some(d) => d,
    };
    if p < (1 << 20) && (deg > 2 || p < 64) {
        return (0..p)
            .filter(|&x| poly_eval_mod(&fr, x as i128, pp) == 0)
            .collect();
    }
    match deg {
        0 => Vec::new(),
        1 => {
            let inv = mod_inv(fr[1], pp).expect("leading coeff is a unit mod p");
            vec![((-fr[0]).rem_euclid(pp) * inv % pp) as u64]
        }
        2 => {
            if p == 2 {
                return (0..2)
                    .filter(|&x| poly_eval_mod(&fr, x as i128, 2) == 0)
                    .collect();
            }
            let (a, b, c) = (fr[2], fr[1], fr[0]);
            let disc = (b * b - 4 * a * c).rem_euclid(pp);
            let inv2a = mod_inv(2 * a, pp).expect("2a is a unit mod odd p");
            match sqrt_mod_p(disc as u64, p) {
                None => Vec::new(),
                Some(0) => vec![((-b).rem_euclid(pp) * inv2a % pp) as u64],
                Some(s) => {
                    let r1 = (((-b + s as i128).rem_euclid(pp)) * inv2a % pp) as u64;
                    let r2 = (((-b - s as i128).rem_euclid(pp)) * inv2a % pp) as u64;
                    let mut v = vec![r1, r2];
                    v.sort_unstable();
                    v
                }
            }
        }
        _ => panic!("poly_roots_mod_p: degree > 2 with large p unsupported"),
    }
}

/// Number of distinct roots of f in F_p via gcd(f, x^p - x).
/// Assumes the leading coefficient of f is nonzero mod p.
pub fn count_distinct_roots_mod_p(f: &[i128], p: u64) -> u64 {
    let pp = p as i128;
    let fr: Vec<i128> = f.iter().map(|&c| c.rem_euclid(pp)).collect();
    let deg = fr.iter().rposition(|&c| c != 0).expect("nonzero poly");
    if deg == 0 {
        return 0;
    }
    if p < 64 {
        return (0..p)
            .filter(|&x| poly_eval_mod(&fr, x as i128, pp) == 0)
            .count() as u64;
    }
    // x^p mod f by square-and-multiply in F_p[x]/(f).
    let modmul = |a: &[i128], b: &[i128]| -> Vec<i128> {
        let mut prod = vec![0i128; a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            if ai == 0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai * bj).rem_euclid(pp);
            }
        }
        // reduce mod f (leading coeff of f invertible)
        let lead_inv = mod_inv(fr[deg], pp).unwrap();
        for i in (deg..prod.len()).rev() {
            let c = prod[i];
            if c == 0 {
                continue;
            }
            let q = c * lead_inv % pp;
            for j in 0..=deg {
                prod[i - deg + j] = (prod[i - deg + j] - q * fr[j]).rem_euclid(pp);
            }
        }
        prod.truncate(deg);
        while prod.len() > 1 && *prod.last().unwrap() == 0 {
            prod.pop();
        }
        prod
    };
    let mut result = vec![1i128]; // x^0
    let mut base = if deg == 1 {
        vec![(-fr[0]).rem_euclid(pp) * mod_inv(fr[1], pp).unwrap() % pp]
    } else {
        vec![0i128, 1]
    };
    let mut e = p;
    while e > 0 {
        if e & 1 == 1 {
            result = modmul(&result, &base);
        }
        base = modmul(&base, &base);
        e >>= 1;
    }
    // g = gcd(f, x^p - x) = gcd(f, result - x); its degree counts distinct roots.
    let mut g = result;
    if g.len() < 2 {
        g.resize(2, 0);
    }
    g[1] = (g[1] - 1).rem_euclid(pp);
    while g.len() > 1 && *g.last().unwrap() == 0 {
        g.pop();
    }
    let mut a = fr;
    let mut b = g;
    loop {
        let db = b.iter().rposition(|&c| c != 0);
        match db {
            None => {
                let da = a.iter().rposition(|&c| c != 0).unwrap_or(0);
                return da as u64;
            }
            Some(0) => return 0,
            Some(db) => {
                // a mod b
                let da = match a.iter().rposition(|&c| c != 0) {
                    None => {
                        return db as u64;
                    }
                    Some(d) => d,
                };
                if da < db {
                    std::mem::swap(&mut a, &mut b);
                    continue;
                }
                let lead_inv = mod_inv(b[db], pp).unwrap();
                let mut r = a.clone();
                for i in (db..=da).rev() {
                    let c = r[i];
                    if c == 0 {
                        continue;
                    }
                    let q = c * lead_inv % pp;
                    for j in 0..=db {
                        r[i - db + j] = (r[i - db + j] - q * b[j]).rem_euclid(pp);
                    }
                }
                a = b;
                b = r;
            }
        }
    }
}

/// Exact number of x mod p^k with f(x) ≡ 0 (mod p^k), by Hensel-style
/// recursion. Coefficients are arbitrary i128; p^k must fit in i128 and
/// p^k <= 2^40 is the supported budget (callers enforce smaller ones).
pub fn count_poly_roots_mod_pk(f: &[i128], p: u64, k: u32) -> u128 {
    assert!(k <= 40, "count_poly_roots_mod_pk: exponent budget exceeded");
    let pk = (p as i128).checked_pow(k).expect("p^k fits i128");
    let fr: Vec<i128> = f.iter().map(|&c| c.rem_euclid(pk)).collect();
    count_roots_rec(&fr, p, k)
}

fn count_roots_rec(f: &[i128], p: u64, k: u32) -> u128 {
    if k == 0 {
        return 1;
    }
    let pp = p as i128;
    let pk = pp.pow(k);
    let fr: Vec<i128> = f.iter().map(|&c| c.rem_euclid(pk)).collect();
    if fr.iter().all(|&c| c % pp == 0) {
        // f ≡ 0 mod p identically: strip one power of p.
        let g: Vec<i128> = fr.iter().map(|&c| c / pp).collect();
        if k == 1 {
            return p as u128;
        }
        return p as u128 * count_roots_rec(&g, p, k - 1);
    }
    let mut total: u128 = 0;
    for r in poly_roots_mod_p(&fr, p) {
        let r = r as i128;
        // derivative at r mod p
        let mut d: i128 = 0;
        for (i, &c) in fr.iter().enumerate().skip(1) {
            d = (d + (i as i128) * c % pp * mod_pow(r.rem_euclid(pp) as u64, (i - 1) as u64, p) as i128)
                .rem_euclid(pp);
        }
        if d % pp != 0 {
            // Hensel: unique lift to each higher power.
            total += 1;
        } else {
            // substitute x = r + p t and recurse on f(r + pt)/p
            let shifted = poly_shift_scale(&fr, r, pp, pk);
            total += count_roots_rec(&shifted, p, k - 1);
        }
    }
    total
}

/// Given f mod p^k with f(r) ≡ 0 mod p, return g(t) = f(r + p t)/p mod p^{k-1}.
fn poly_shift_scale(f: &[i128], r: i128, p: i128, pk: i128) -> Vec<i128> {
    let n = f.len();
    // Compute coefficients of f(r + y) by Horner/Taylor, then substitute y = p t.
    let mut c = f.to_vec();
    let mut taylor = vec![0i128; n];
    for j in 0..n {
        // after j synthetic divisions, remainder is the j-th Taylor coeff
        for i in (j..n - 1).rev() {
            c[i] = (c[i] + c[i + 1] * r).rem_euclid(pk);
        }
        taylor[j] = c[j];
    }
    // f(r + pt) = sum_j taylor[j] p^j t^j; divide through by p.
    debug_assert!(taylor[0] % p == 0, "f(r) not divisible by p");
    let pk1 = pk / p;
    let mut out = vec![0i128; n];
    out[0] = (taylor[0] / p).rem_euclid(pk1.max(1));
    let mut pw = 1i128 % pk1.max(1); // p^{j-1} reduced mod p^{k-1}
    for j in 1..n {
        out[j] = (taylor[j].rem_euclid(pk1.max(1)) * pw).rem_euclid(pk1.max(1));
        pw = pw * (p % pk1.max(1)) % pk1.max(1);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd_i128(12, 18), 6);
        assert_eq!(gcd_i128(-12, 18), 6);
        assert_eq!(gcd_i128(0, 5), 5);
        assert_eq!(gcd3_i128(6, 10, 15), 1);
    }

    #[test]
    fn ext_gcd_bezout() {
        for a in -20i128..=20 {
            for b in -20i128..=20 {
                let (g, x, y) = ext_gcd(a, b);
                assert_eq!(a * x + b * y, g);
                assert_eq!(g, gcd_i128(a, b));
            }
        }
    }

    #[test]
    fn mod_inv_works() {
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(2, 4), None);
        for m in 2i128..50 {
            for a in 1..m {
                if gcd_i128(a, m) == 1 {
                    let inv = mod_inv(a, m).unwrap();
                    assert_eq!(a * inv % m, 1);
                }
            }
        }
    }

    #[test]
    fn jacobi_vs_euler() {
        for &p in &[3i128, 5, 7, 11, 13, 31, 97] {
            for a in 1..p {
                let euler = mod_pow(a as u64, ((p - 1) / 2) as u64, p as u64);
                let expected = if euler == 1 { 1 } else { -1 };
                assert_eq!(jacobi(a, p), expected, "a={a} p={p}");
            }
        }
    }

    #[test]
    fn primality_small() {
        let primes = primes_up_to(1000);
        for n in 0..1000u64 {
            assert_eq!(is_prime_u64(n), primes.contains(&n), "n={n}");
        }
        assert!(is_prime_u64(2u64.pow(61) - 1));
        assert!(!is_prime_u64(2u64.pow(61) - 3));
    }

    #[test]
    fn factorization_roundtrip() {
        for n in 1u64..2000 {
            let f = factor_u64(n);
            let prod: u64 = f.iter().map(|&(p, e)| p.pow(e)).product();
            assert_eq!(prod, n);
            for &(p, _) in &f {
                assert!(is_prime_u64(p));
            }
        }
        let f = factor_u64(600851475143);
        assert_eq!(f.last().unwrap().0, 6857);
    }

    #[test]
    fn factor_u128_large() {
        let n: u128 = 1_000_000_007u128 * 1_000_000_009u128 * 4;
        let f = factor_u128(n);
        assert_eq!(f, vec![(2, 2), (1_000_000_007, 1), (1_000_000_009, 1)]);
    }

    #[test]
    fn tonelli_all_small_primes() {
        for &p in &[3u64, 5, 7, 11, 13, 17, 101, 997, 65537] {
            for a in 0..p.min(200) {
                match sqrt_mod_p(a, p) {
                    Some(r) => assert_eq!(r as u128 * r as u128 % p as u128, a as u128),
                    None => assert_eq!(jacobi(a as i128, p as i128), -1),
                }
            }
        }
    }

    #[test]
    fn phi_and_tau() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(12), 4);
        assert_eq!(tau_k(12, 2), 6);
        assert_eq!(tau_k(12, 4), 40);
        assert_eq!(tau_k(1, 3), 1);
    }

    #[test]
    fn square_tests() {
        assert!(is_perfect_square_i128(0));
        assert!(is_perfect_square_i128(144));
        assert!(!is_perfect_square_i128(145));
        assert!(!is_perfect_square_i128(-4));
        let big: BigInt = BigInt::from(12345678901234567i128).pow(2);
        assert!(is_perfect_square_bigint(&big));
        assert!(!is_perfect_square_bigint(&(big + 1)));
    }

    /// Brute-force oracle for root counting mod p^k.
    fn brute_roots(f: &[i128], m: i128) -> u128 {
        (0..m)
            .filter(|&x| poly_eval_mod(f, x, m) == 0)
            .count() as u128
    }

    #[test]
    fn poly_root_counts_match_brute_force() {
        let cases: Vec<Vec<i128>> = vec![
            vec![0],
            vec![1],
            vec![0, 1],
            vec![3, 1],
            vec![1, 0, 1],
            vec![-1, 0, 1],
            vec![0, 0, 1],
            vec![2, 3, 1],
            vec![4, 4, 1],
            vec![0, 0, 0, 1],
            vec![9, 6, 1],      // (x+3)^2
            vec![18, 12, 2],    // 2(x+3)^2
            vec![25, 0, 25],    // 25(x^2+1)
            vec![12, 7, 5, 1],
            vec![0, 0, 5, 0, 1],
        ];
        for f in &cases {
            for &(p, kmax) in &[(2u64, 6u32), (3, 5), (5, 4), (7, 3), (13, 3)] {
                for k in 1..=kmax {
                    let m = (p as i128).pow(k);
                    assert_eq!(
                        count_poly_roots_mod_pk(f, p, k),
                        brute_roots(f, m),
                        "f={f:?} p={p} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn distinct_roots_via_gcd_matches_sweep() {
        let cases: Vec<Vec<i128>> = vec![
            vec![2, 3, 1],
            vec![-1, 0, 0, 0, 1],
            vec![1, 1, 1, 1, 1],
            vec![6, 11, 6, 1],
            vec![0, -1, 0, 1],
            vec![7, 0, 0, 2],
        ];
        for f in &cases {
            for &p in &[101u64, 997, 10007, 65537] {
                let lead = f.last().unwrap().rem_euclid(p as i128);
                if lead == 0 {
                    continue;
                }
                let sweep = (0..p)
                    .filter(|&x| poly_eval_mod(f, x as i128, p as i128) == 0)
                    .count() as u64;
                assert_eq!(count_distinct_roots_mod_p(f, p), sweep, "f={f:?} p={p}");
            }
        }
    }

    #[test]
    fn large_p_quadratic_roots() {
        let p = 1_000_003u64;
        // x^2 - 4 has roots 2 and p-2
        let roots = poly_roots_mod_p(&[-4, 0, 1], p);
        assert_eq!(roots, vec![2, p - 2]);
        // a non-residue quadratic has none
        let mut nr = 2;
        while jacobi(nr, p as i128) != -1 {
            nr += 1;
        }
        assert!(poly_roots_mod_p(&[-nr, 0, 1], p).is_empty());
    }
}

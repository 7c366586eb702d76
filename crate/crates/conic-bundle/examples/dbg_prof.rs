use conic_bundle::conic;
use conic_bundle::forms::{Pencil, QuadForm3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;
use std::time::Instant;

fn main() {
    let mode = std::env::args().nth(1).unwrap_or_else(|| "check".into());
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/eligible_s4.json");
    let p = Pencil::load(&path).unwrap();
    if mode == "check" {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut bad = 0;
        for trial in 0..400 {
            let mut m = [[0i128; 3]; 3];
            for i in 0..3 {
                for j in i..3 {
                    let v = rng.gen_range(-6..=6i128);
                    m[i][j] = v;
                    m[j][i] = v;
                }
            }
            let Ok(f) = QuadForm3::new(m) else { continue };
            if f.det() == 0 {
                continue;
            }
            let lower = if trial % 2 == 0 { 0 } else { 7 };
            let a = conic::conic_zeros_fast(&f, 150, lower).unwrap();
            let b = conic::conic_zeros_sweep(&f, 150, lower);
            if a != b {
                bad += 1;
                eprintln!("MISMATCH rand {m:?} lower={lower}: fast {} sweep {}", a.len(), b.len());
            }
        }
        for y0 in -6i128..=6 {
            for y1 in -6i128..=6 {
                if conic_bundle::arith::gcd_i128(y0, y1) != 1 || (y0, y1) < (0, 1) {
                    continue;
                }
                let f = p.fiber_form(&[y0, y1]).unwrap();
                if f.det() == 0 {
                    continue;
                }
                let hy = y0.abs().max(y1.abs());
                let a = conic::conic_zeros_fast(&f, 400, hy).unwrap();
                let b = conic::conic_zeros_sweep(&f, 400, hy);
                if a != b {
                    bad += 1;
                    eprintln!("MISMATCH fiber ({y0},{y1}): fast {} sweep {}", a.len(), b.len());
                }
            }
        }
        eprintln!("check done, mismatches = {bad}");
        // detailed diff on one failing case
        let f = QuadForm3::new([[5, -2, 0], [-2, 0, -1], [0, -1, -6]]).unwrap();
        let a = conic::conic_zeros_fast(&f, 150, 7).unwrap();
        let b = conic::conic_zeros_sweep(&f, 150, 7);
        for x in &b {
            if !a.contains(x) {
                eprintln!("missing {x:?}");
            }
        }
        for x in &a {
            if !b.contains(x) {
                eprintln!("extra {x:?}");
            }
        }
        conic::debug_locate(&f, [148, -49, -144], 3000);
    } else if mode == "one" {
        for (y0, y1) in [(9i128, -25i128), (3, -5), (50, 49), (1, 1)] {
            let hy = y0.abs().max(y1.abs());
            let upper = 1_000_000 / hy;
            let f = p.fiber_form(&[y0, y1]).unwrap();
            let t = Instant::now();
            let z = conic::conic_zeros_fast(&f, upper, hy).unwrap();
            eprintln!(
                "y=({y0},{y1}) upper={upper} det={}: n={} {:.1}ms",
                f.det(),
                z.len(),
                t.elapsed().as_secs_f64() * 1000.0,
            );
        }
    } else {
        // full N2 scan at B = 10^4: every soluble fiber with hy <= 100
        let b: i128 = mode.parse().unwrap_or(10_000);
        let hmax = (b as f64).sqrt() as i128;
        let t = Instant::now();
        let mut total = 0u64;
        let mut fibers = 0u64;
        let mut worst: Vec<(f64, (i128, i128), usize)> = Vec::new();
        let mut t_sol = 0.0f64;
        let mut t_insol = 0.0f64;
        for hy in 1..=hmax {
            for (y0, y1) in fiber_reps(hy) {
                let f = p.fiber_form(&[y0, y1]).unwrap();
                if f.det() == 0 {
                    continue;
                }
                let ft = Instant::now();
                let z = conic::conic_zeros_fast(&f, b / hy, hy).unwrap();
                let dt = ft.elapsed().as_secs_f64();
                worst.push((dt, (y0, y1), z.len()));
                if !z.is_empty() {
                    t_sol += dt;
                    fibers += 1;
                    total += z.len() as u64;
                } else {
                    t_insol += dt;
                }
            }
        }
        worst.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        eprintln!(
            "B={b}: points={total} soluble_fibers={fibers} t={:.1}s t_sol={t_sol:.1}s t_insol={t_insol:.1}s",
            t.elapsed().as_secs_f64(),
        );
        for w in worst.iter().take(12) {
            eprintln!("  slow {:?} {:.3}s n={}", w.1, w.0, w.2);
        }
        let top: f64 = worst.iter().take(100).map(|w| w.0).sum();
        eprintln!("  top100 sum = {top:.1}s");
    }
}

fn fiber_reps(hy: i128) -> Vec<(i128, i128)> {
    let mut v = Vec::new();
    for t in -hy..=hy {
        for (y0, y1) in [(hy, t), (t, hy), (-hy, t), (t, -hy)] {
            if y0.abs().max(y1.abs()) != hy {
                continue;
            }
            if conic_bundle::arith::gcd_i128(y0, y1) != 1 {
                continue;
            }
            // one representative of ±y
            if (y0, y1) < (-y0, -y1) {
                continue;
            }
            if !v.contains(&(y0, y1)) {
                v.push((y0, y1));
            }
        }
    }
    v
}

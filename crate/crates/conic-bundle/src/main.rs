//! Thin command-line front end. All mathematics lives in the library; this
//! binary parses flags, dispatches, and serializes reports (JSON for
//! structured output, CSV for ladders).
//!
//! Exit codes: 0 success, 1 assertion failure (failed identities), 2 usage
//! errors (bad flags, unreadable files).

use clap::{Parser, Subcommand};
use conic_bundle::forms::{Pencil, ProjVec};
use conic_bundle::{classify, conic, counting, local, realdensity};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "conic-bundle",
    version,
    about = "Pencils of ternary quadratic forms: classification, local densities, point counts"
)]
struct Cli {
    /// Seed for every stochastic path (Monte Carlo strata)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: available parallelism); results are
    /// independent of this value
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classification report: smoothness, blow-up type, rho, eligibility
    Check {
        #[arg(long)]
        pencil: PathBuf,
        /// Scale both forms by 6 first
        #[arg(long)]
        normalize6: bool,
    },
    /// Exact congruence-identity suite; exits 1 on any failure
    Identities {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = 31)]
        pmax: u64,
        #[arg(long, default_value_t = 2)]
        kmax: u32,
        #[arg(long)]
        normalize6: bool,
        /// Write the JSON report here as well as to stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leading-constant components: alpha, tau_infty, tau_p table, S-series
    Constants {
        #[arg(long)]
        pencil: PathBuf,
        /// Prime cutoff for the tau_p table and the S-series
        #[arg(long, default_value_t = 100)]
        pmax: u64,
        /// Relative quadrature tolerance
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Exact point counts over a B ladder with predictions
    Count {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long)]
        bmax: u64,
        /// Comma-separated list of B rungs (default: 1,2 x powers of 10 up
        /// to bmax)
        #[arg(long)]
        ladder: Option<String>,
        /// Prime cutoff for the predicted constants
        #[arg(long, default_value_t = 200)]
        pmax: u64,
        /// Output path; .csv gives the convergence table, anything else JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Congruence/region-restricted counts against truncated local densities
    Equidist {
        #[arg(long)]
        pencil: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        bmax: u64,
        /// Region box "x1lo,x1hi,x2lo,x2hi" in the affine chart x0 = 1
        /// ("inf"/"-inf" allowed)
        #[arg(long, default_value = "-inf,inf,-inf,inf")]
        gamma: String,
        /// Congruence modulus q
        #[arg(long = "mod", default_value_t = 1)]
        modulus: u64,
        /// x-direction "a0,a1,a2"
        #[arg(long, default_value = "1,0,0")]
        a: String,
        /// y-direction "b0,b1"
        #[arg(long, default_value = "1,0")]
        b: String,
        /// Truncation exponent n for the density varpi(q^n)
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
    /// Per-fiber conic report: invariants, solvability, zero count
    Conic {
        #[arg(long)]
        pencil: PathBuf,
        /// Fiber "y0,y1"
        #[arg(long)]
        y: String,
        /// Count zeros of sup-norm height up to this bound
        #[arg(long, default_value_t = 1000)]
        height: i128,
    },
}

fn usage_err(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn load_pencil(path: &PathBuf) -> Result<Pencil, String> {
    Pencil::load(path).map_err(|e| format!("cannot load pencil file {}: {e}", path.display()))
}

fn parse_list<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>, String> {
    let vals: Result<Vec<T>, _> = s.split(',').map(|t| t.trim().parse::<T>()).collect();
    match vals {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(format!("{what}: expected {n} comma-separated values, got `{s}`")),
    }
}

fn parse_gamma(s: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(format!("gamma: expected 4 comma-separated bounds, got `{s}`"));
    }
    let mut out = [0.0f64; 4];
    for (i, t) in parts.iter().enumerate() {
        out[i] = match *t {
            "inf" | "+inf" => f64::INFINITY,
            "-inf" => f64::NEG_INFINITY,
            other => other
                .parse::<f64>()
                .map_err(|_| format!("gamma: bad bound `{other}`"))?,
        };
    }
    Ok(out)
}

fn default_ladder(bmax: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut base = 10u64;
    while base <= bmax {
        out.push(base);
        if 2 * base <= bmax {
            out.push(2 * base);
        }
        base *= 10;
    }
    if out.last() != Some(&bmax) {
        out.push(bmax);
    }
    out
}

fn convergence_csv(rep: &counting::CountReport) -> String {
    let mut s = String::from("B,N,N1,N2,N1_over_N,c_S,c_S1,c_S2,pred_N\n");
    let (cs, cs1, cs2) = match &rep.predictions {
        Some(p) => (p.c_s, Some(p.c_s1), p.c_s2),
        None => (None, None, None),
    };
    let fmt = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
    for r in &rep.rungs {
        let ratio = if r.n > 0 {
            format!("{:.12e}", r.n1 as f64 / r.n as f64)
        } else {
            String::new()
        };
        let pred = cs.map(|c| c * r.b as f64 * (r.b as f64).ln());
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.b,
            r.n,
            r.n1,
            r.n2,
            ratio,
            fmt(cs),
            fmt(cs1),
            fmt(cs2),
            fmt(pred)
        ));
    }
    s
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.cmd {
        Cmd::Check { pencil, normalize6 } => {
            let mut p = load_pencil(&pencil)?;
            if normalize6 {
                p = p.normalize6();
            }
            let smooth = p.is_smooth();
            if !smooth {
                println!("{}", serde_json::to_string_pretty(&json!({"smooth": false})).unwrap());
                return Ok(ExitCode::SUCCESS);
            }
            let c = p.disc_cubic().map_err(|e| e.to_string())?;
            let bt = classify::mscheme(&p).map_err(|e| e.to_string())?;
            let elig = classify::eligibility(&p).map_err(|e| e.to_string())?;
            let alpha = classify::alpha(&bt);
            let report = json!({
                "smooth": true,
                "C_coeffs": c.coeffs,
                "disc_C": c.disc().to_string(),
                "blowup_type": bt.degrees,
                "m_rational_points": bt.rational_points,
                "rho": elig.rho,
                "eligible": elig.eligible,
                "galois": format!("{:?}", elig.galois),
                "alpha": [*alpha.numer(), *alpha.denom()],
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Identities {
            pencil,
            pmax,
            kmax,
            normalize6,
            out,
        } => {
            let mut p = load_pencil(&pencil)?;
            if normalize6 {
                p = p.normalize6();
            }
            let lo = if normalize6 { 2 } else { 5 };
            let primes: Vec<u64> = conic_bundle::arith::primes_up_to(pmax)
                .into_iter()
                .filter(|&q| q >= lo)
                .collect();
            let rep = local::identity_suite(&p, &primes, kmax).map_err(|e| e.to_string())?;
            let text = serde_json::to_string_pretty(&rep).unwrap();
            if let Some(path) = out {
                std::fs::write(&path, &text).map_err(|e| e.to_string())?;
            }
            println!("{text}");
            Ok(if rep.all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Cmd::Constants { pencil, pmax, tol } => {
            let p = load_pencil(&pencil)?;
            let pc = counting::predicted_constants(&p, pmax).map_err(|e| e.to_string())?;
            let a = realdensity::tau_infty_formula_a(&p, tol).map_err(|e| e.to_string())?;
            let b = realdensity::tau_infty_formula_b(&p, tol).map_err(|e| e.to_string())?;
            let mut tau_table = Vec::new();
            for q in conic_bundle::arith::primes_up_to(pmax) {
                match local::tau_p(&p, q, pc.rho) {
                    Ok(td) => tau_table.push(json!({
                        "p": q,
                        "varpi": [*td.varpi.numer(), *td.varpi.denom()],
                        "tau": [*td.tau.numer(), *td.tau.denom()],
                        "stabilized_at": td.stabilized_at,
                    })),
                    Err(e) => tau_table.push(json!({"p": q, "error": e.to_string()})),
                }
            }
            let report = json!({
                "alpha": pc.alpha,
                "rho": pc.rho,
                "eligible": pc.eligible,
                "tau_infty": {
                    "formula_A": {"value": a.value, "est_error": a.est_error},
                    "formula_B": {"value": b.value, "est_error": b.est_error},
                    "agreement": (a.value - b.value).abs(),
                },
                "tau_p": tau_table,
                "S_series": {"value": pc.s_series, "band": pc.s_series_band},
                "c_S": pc.c_s,
                "c_S1": pc.c_s1,
                "c_S2": pc.c_s2,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Count {
            pencil,
            bmax,
            ladder,
            pmax,
            out,
        } => {
            let p = load_pencil(&pencil)?;
            if bmax == 0 {
                return Err("bmax must be positive".into());
            }
            let rungs = match ladder {
                Some(spec) => {
                    let mut v: Vec<u64> = spec
                        .split(',')
                        .map(|t| t.trim().parse::<u64>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| format!("ladder: bad spec `{spec}`"))?;
                    v.retain(|&b| b <= bmax && b > 0);
                    if v.is_empty() {
                        return Err("ladder: no rungs within bmax".into());
                    }
                    v.sort_unstable();
                    v
                }
                None => default_ladder(bmax),
            };
            let rep = counting::count_ladder(&p, &rungs, Some(pmax)).map_err(|e| e.to_string())?;
            let json_text = serde_json::to_string_pretty(&rep).unwrap();
            match &out {
                Some(path) if path.extension().is_some_and(|e| e == "csv") => {
                    std::fs::write(path, convergence_csv(&rep)).map_err(|e| e.to_string())?;
                }
                Some(path) => {
                    std::fs::write(path, &json_text).map_err(|e| e.to_string())?;
                }
                None => {}
            }
            println!("{json_text}");
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Equidist {
            pencil,
            bmax,
            gamma,
            modulus,
            a,
            b,
            depth,
        } => {
            let p = load_pencil(&pencil)?;
            let g = parse_gamma(&gamma)?;
            let av = parse_list::<i128>(&a, 3, "a")?;
            let bv = parse_list::<i128>(&b, 2, "b")?;
            let a = ProjVec::make_primitive(&av).map_err(|e| e.to_string())?;
            let bdir = ProjVec::make_primitive(&bv).map_err(|e| e.to_string())?;
            if modulus == 0 {
                return Err("mod must be positive".into());
            }
            let count = counting::count_congruence_region(&p, bmax, g, modulus, &a, &bdir)
                .map_err(|e| e.to_string())?;
            let density = if modulus > 1 {
                match local::varpi_congruence(&p, modulus, modulus, &a, &bdir, depth) {
                    Ok(v) => Some([*v.numer(), *v.denom()]),
                    Err(_) => None,
                }
            } else {
                None
            };
            let report = json!({
                "B": bmax,
                "gamma": g,
                "mod": modulus,
                "a": a,
                "b": bdir,
                "count": count,
                "truncated_density": density,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Conic { pencil, y, height } => {
            let p = load_pencil(&pencil)?;
            let yv = parse_list::<i128>(&y, 2, "y")?;
            let y = ProjVec::make_primitive(&yv).map_err(|e| e.to_string())?;
            let fl = local::fiber_local(&p, &y).map_err(|e| e.to_string())?;
            let f = p.fiber_form(&y.as_array2()).map_err(|e| e.to_string())?;
            let sol = conic::minimal_zero(&f).map_err(|e| e.to_string())?;
            let count =
                conic::count_conic_points(&f, height, 0, height > 600).map_err(|e| e.to_string())?;
            let report = json!({
                "y": fl.y,
                "C_y": fl.c_y.to_string(),
                "D_y": fl.d_y.to_string(),
                "kappa": fl.kappa,
                "chi_table": fl.chi_by_p,
                "chi_infty": fl.chi_infty,
                "solvable": sol.zero.is_some(),
                "obstruction_places": format!("{:?}", sol.obstruction_places),
                "minimal_zero": sol.zero,
                "height": height,
                "count": count,
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            return usage_err("workers must be positive");
        }
        if rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .is_err()
        {
            return usage_err("thread pool already initialized");
        }
    }
    match run(cli) {
        Ok(code) => code,
        Err(msg) => usage_err(msg),
    }
}

//! Command-line front end: single-channel norms, analytic spectra,
//! multiplicativity verification sweeps, the crossover finder, and the
//! Schur-convexity / divided-difference property harnesses.
//!
//! Data goes to stdout (or `--out`, written atomically); diagnostics go to
//! stderr. Exit codes: 0 success, 1 computational failure, 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use whp::pnorm_optimizer::{find_crossover, maximize_product_pnorm, nu_single};
use whp::schur_analysis::{
    df_dsm, sample_probe_nodes, schur_test, Direction, DividedDifferenceProbe,
};
use whp::spectrum_analytic::{
    analytic_spectrum, pnorm_decomposition, s_hat, solve_secular_bisection, EigenClasses,
};
use whp::wh_channel::SchmidtVector;
use whp::WhpError;

#[derive(Parser)]
#[command(
    name = "whp",
    version,
    about = "Maximal p-norms of Werner-Holevo channel products"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SecularMethod {
    Eigen,
    Bisection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SchurTarget {
    T1,
    T2,
    T3,
    Shat,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form maximal p-norm of a single channel: (d-1)^(1/p - 1)
    Nu {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic eigenvalue classes of the product output at a Schmidt vector
    Spectrum {
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        /// Comma-separated Schmidt coefficients, length min(d1, d2), sum 1
        #[arg(long)]
        lambda: String,
        #[arg(long, value_enum, default_value_t = SecularMethod::Eigen)]
        method: SecularMethod,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Multiplicativity check at a single (d1, d2, p)
    Verify {
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entangled-vs-vertex table over a p grid (plot-ready)
    Sweep {
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        #[arg(long)]
        p_min: f64,
        #[arg(long)]
        p_max: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 6)]
        restarts: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bisection for the exponent where the maximally entangled input
    /// overtakes the unentangled one (d1 = d2 = d)
    Crossover {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p_lo: f64,
        #[arg(long)]
        p_hi: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Schur monotonicity harness over random majorization pairs
    SchurTest {
        #[arg(long, value_enum)]
        target: SchurTarget,
        #[arg(long)]
        d1: usize,
        #[arg(long)]
        d2: usize,
        /// Exponent, required for t1/t2/t3
        #[arg(long)]
        p: Option<f64>,
        /// Symmetric-polynomial index, required for shat
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 500)]
        pairs: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Divided-difference monotonicity probes: df/ds_m over random node sets
    LemmaTest {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        probes: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(RunError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(RunError::Io(e)) => {
            eprintln!("io error: {e}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Usage(String),
    Compute(WhpError),
    Io(std::io::Error),
}

impl From<WhpError> for RunError {
    fn from(e: WhpError) -> Self {
        match e {
            WhpError::InvalidArgument(_) | WhpError::SimplexViolation(_) => {
                RunError::Usage(e.to_string())
            }
            other => RunError::Compute(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// Seed resolution order: --seed flag, then WHP_SEED, then 0.
fn effective_seed(flag: Option<u64>) -> u64 {
    let seed = flag
        .or_else(|| std::env::var("WHP_SEED").ok().and_then(|s| s.parse().ok()))
        .unwrap_or(0);
    eprintln!("seed: {seed}");
    seed
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), RunError> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
            let mut tmp = match dir {
                Some(d) => tempfile::NamedTempFile::new_in(d)?,
                None => tempfile::NamedTempFile::new_in(".")?,
            };
            writeln!(tmp, "{text}")?;
            tmp.persist(path).map_err(|e| RunError::Io(e.error))?;
            Ok(())
        }
    }
}

fn fmt_full(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Serialize)]
struct SpectrumOutput {
    d1: usize,
    d2: usize,
    lambda: Vec<f64>,
    e_pairs: Vec<f64>,
    h_vals: Vec<f64>,
    h_multiplicity: usize,
    g_vals: Vec<f64>,
    gamma: Vec<f64>,
    spectrum: Vec<f64>,
}

fn spectrum_output(classes: &EigenClasses, lambda: &SchmidtVector) -> SpectrumOutput {
    SpectrumOutput {
        d1: classes.d1,
        d2: classes.d2,
        lambda: lambda.coeffs().to_vec(),
        e_pairs: classes.e_pairs.clone(),
        h_vals: classes.h_vals.clone(),
        h_multiplicity: classes.h_multiplicity(),
        g_vals: classes.g_vals.clone(),
        gamma: classes.gamma.clone(),
        spectrum: classes.flattened(),
    }
}

fn parse_lambda(text: &str) -> Result<SchmidtVector, RunError> {
    let coeffs: Result<Vec<f64>, _> = text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let coeffs = coeffs.map_err(|e| RunError::Usage(format!("bad --lambda value: {e}")))?;
    SchmidtVector::new(coeffs).map_err(|e| RunError::Usage(e.to_string()))
}

fn run(command: Command) -> Result<(), RunError> {
    match command {
        Command::Nu { d, p, format, out } => {
            let nu = nu_single(d, p)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "d": d, "p": p, "nu": nu,
                }))
                .expect("serializable"),
                Format::Csv => format!("d,p,nu\n{d},{},{}", fmt_full(p), fmt_full(nu)),
            };
            emit(&text, out.as_deref())
        }

        Command::Spectrum {
            d1,
            d2,
            lambda,
            method,
            format,
            out,
        } => {
            let lam = parse_lambda(&lambda)?;
            let mut classes = analytic_spectrum(&lam, d1, d2)?;
            if method == SecularMethod::Bisection {
                let gamma = solve_secular_bisection(&lam)?;
                let denom = ((classes.d1 - 1) * (classes.d2 - 1)) as f64;
                classes.g_vals = gamma.iter().map(|&g| g / denom).collect();
                classes.gamma = gamma;
            }
            let output = spectrum_output(&classes, &lam);
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&output).expect("serializable"),
                Format::Csv => {
                    let mut rows = String::from("class,value,multiplicity\n");
                    for &e in &output.e_pairs {
                        rows.push_str(&format!("e,{},1\n", fmt_full(e)));
                    }
                    for &h in &output.h_vals {
                        rows.push_str(&format!("h,{},{}\n", fmt_full(h), output.h_multiplicity));
                    }
                    for &g in &output.g_vals {
                        rows.push_str(&format!("g,{},1\n", fmt_full(g)));
                    }
                    rows.pop();
                    rows
                }
            };
            emit(&text, out.as_deref())
        }

        Command::Verify {
            d1,
            d2,
            p,
            restarts,
            seed,
            format,
            out,
        } => {
            let seed = effective_seed(seed);
            let result = maximize_product_pnorm(d1, d2, p, restarts, seed)?;
            let bound = nu_single(result.d1, p)? * nu_single(result.d2, p)?;
            let mult_gap = result.best_value - bound.powf(p);
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "d1": result.d1,
                    "d2": result.d2,
                    "p": p,
                    "best_value": result.best_value,
                    "vertex_value": result.vertex_value,
                    "gap": result.gap,
                    "mult_bound_pth_power": bound.powf(p),
                    "multiplicativity_gap": mult_gap,
                    "best_lambda": result.best_lambda,
                    "restarts": result.restarts,
                    "iterations_total": result.iterations_total,
                    "converged": result.converged,
                    "seed": seed,
                }))
                .expect("serializable"),
                Format::Csv => format!(
                    "d1,d2,p,best_value,vertex_value,gap,converged\n{}",
                    result.csv_row()
                ),
            };
            emit(&text, out.as_deref())
        }

        Command::Sweep {
            d1,
            d2,
            p_min,
            p_max,
            steps,
            restarts,
            seed,
            format,
            out,
        } => {
            if steps < 1 || p_min > p_max || p_min.is_nan() || p_max.is_nan() {
                return Err(RunError::Usage(
                    "require steps >= 1 and p_min <= p_max".into(),
                ));
            }
            let seed = effective_seed(seed);
            let mut rows = Vec::with_capacity(steps);
            for i in 0..steps {
                let p = if steps == 1 {
                    p_min
                } else {
                    p_min + (p_max - p_min) * i as f64 / (steps - 1) as f64
                };
                let r = maximize_product_pnorm(d1, d2, p, restarts, seed)?;
                rows.push((p, r));
            }
            let text = match format {
                Format::Csv => {
                    let mut s = String::from("p,d1,d2,entangled_value,vertex_value,gap\n");
                    for (p, r) in &rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            fmt_full(*p),
                            r.d1,
                            r.d2,
                            fmt_full(r.best_value),
                            fmt_full(r.vertex_value),
                            fmt_full(r.gap)
                        ));
                    }
                    s.pop();
                    s
                }
                Format::Json => {
                    let docs: Vec<_> = rows
                        .iter()
                        .map(|(p, r)| {
                            json!({
                                "p": p,
                                "d1": r.d1,
                                "d2": r.d2,
                                "entangled_value": r.best_value,
                                "vertex_value": r.vertex_value,
                                "gap": r.gap,
                            })
                        })
                        .collect();
                    serde_json::to_string_pretty(&json!({ "seed": seed, "rows": docs }))
                        .expect("serializable")
                }
            };
            emit(&text, out.as_deref())
        }

        Command::Crossover {
            d,
            p_lo,
            p_hi,
            tol,
            format,
            out,
        } => {
            let p_star = find_crossover(d, p_lo, p_hi, tol)?;
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "d": d, "p_lo": p_lo, "p_hi": p_hi, "tol": tol, "p_star": p_star,
                }))
                .expect("serializable"),
                Format::Csv => format!("d,p_star\n{d},{}", fmt_full(p_star)),
            };
            emit(&text, out.as_deref())
        }

        Command::SchurTest {
            target,
            d1,
            d2,
            p,
            k,
            pairs,
            seed,
            format,
            out,
        } => {
            let seed = effective_seed(seed);
            let d = d1.min(d2);
            let mut report = match target {
                SchurTarget::T1 | SchurTarget::T2 | SchurTarget::T3 => {
                    let p =
                        p.ok_or_else(|| RunError::Usage("--p is required for t1/t2/t3".into()))?;
                    let name = format!("{target:?}").to_lowercase();
                    let f = move |lam: &SchmidtVector| {
                        let dec = pnorm_decomposition(lam, d1, d2, p)?;
                        Ok(match target {
                            SchurTarget::T1 => dec.t1,
                            SchurTarget::T2 => dec.t2,
                            _ => dec.t3,
                        })
                    };
                    let mut r = schur_test(&name, f, d, pairs, seed, Direction::Convex)?;
                    r.p = Some(p);
                    r
                }
                SchurTarget::Shat => {
                    let k = k.ok_or_else(|| RunError::Usage("--k is required for shat".into()))?;
                    let f = move |lam: &SchmidtVector| s_hat(lam, k);
                    schur_test(&format!("shat_{k}"), f, d, pairs, seed, Direction::Concave)?
                }
            };
            report.d2 = Some(d1.max(d2));
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&report).expect("serializable"),
                Format::Csv => format!(
                    "function,direction,d1,d2,p,pairs,violations,worst_margin,seed\n{},{:?},{},{},{},{},{},{},{}",
                    report.function,
                    report.direction,
                    report.d1,
                    report.d2.unwrap_or(0),
                    report.p.map(fmt_full).unwrap_or_default(),
                    report.pairs,
                    report.violations,
                    fmt_full(report.worst_margin),
                    report.seed
                ),
            };
            emit(&text, out.as_deref())
        }

        Command::LemmaTest {
            n,
            p,
            probes,
            seed,
            format,
            out,
        } => {
            if n < 2 {
                return Err(RunError::Usage("require n >= 2".into()));
            }
            let seed = effective_seed(seed);
            let mut violations = 0usize;
            let mut per_m: Vec<(usize, f64)> = (2..=n).map(|m| (m, f64::NEG_INFINITY)).collect();
            for i in 0..probes {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1 + i as u64);
                let nodes = sample_probe_nodes(&mut rng, n, 1e-3);
                for (idx, m) in (2..=n).enumerate() {
                    let probe = DividedDifferenceProbe::new(nodes.clone(), p, m)?;
                    let v = df_dsm(&probe)?;
                    if v > per_m[idx].1 {
                        per_m[idx].1 = v;
                    }
                    // at p = 2 the derivative vanishes identically for m >= 3
                    let violated = if p < 2.0 || m == 2 {
                        v >= 0.0
                    } else {
                        v.abs() > 1e-9
                    };
                    if violated {
                        violations += 1;
                    }
                }
            }
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "n": n,
                    "p": p,
                    "probes": probes,
                    "violations": violations,
                    "max_df_dsm_per_m": per_m
                        .iter()
                        .map(|(m, v)| json!({"m": m, "max": v}))
                        .collect::<Vec<_>>(),
                    "seed": seed,
                }))
                .expect("serializable"),
                Format::Csv => {
                    let mut s = String::from("m,max_df_dsm,probes,violations_total,seed\n");
                    for (m, v) in &per_m {
                        s.push_str(&format!(
                            "{m},{},{probes},{violations},{seed}\n",
                            fmt_full(*v)
                        ));
                    }
                    s.pop();
                    s
                }
            };
            emit(&text, out.as_deref())
        }
    }
}

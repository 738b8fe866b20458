//! `oscint`: command-line access to the principal-value engine, the
//! extremal family, the discrepancy and sublevel estimates, and the sweeps.
//!
//! Exit status is 0 on success, 1 when a computation fails and 2 on a usage
//! error. `--tol`, `--precision` and `--seed` fall back to `OSCINT_TOL`,
//! `OSCINT_PRECISION` and `OSCINT_SEED`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use oscint_core::acceptance::{run_all, run_criterion, AcceptanceConfig};
use oscint_core::config::{GlobalConfig, OutputFormat};
use oscint_core::discrepancy::discrepancy_integral;
use oscint_core::experiments::{growth_sweep, persist, SweepConfig};
use oscint_core::extremal::{construct_extremal, kernel_normalizer};
use oscint_core::poly::json::{format_rational, PolyDescriptor};
use oscint_core::poly::Poly;
use oscint_core::pvint::{pv_integral_extremal, pv_integral_with, PvOptions};
use oscint_core::sublevel::sublevel_measure;
use oscint_core::upperbound::{kd_trace, vdc_check, Alpha};

#[derive(Parser, Debug)]
#[command(
    name = "oscint",
    version,
    about = "Principal-value oscillatory integrals with polynomial phases"
)]
struct Cli {
    /// Absolute tolerance for integrals.
    #[arg(long, global = true, env = "OSCINT_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Bits of fixed-point precision for reducing large phases modulo 2π.
    #[arg(long, global = true, env = "OSCINT_PRECISION", default_value_t = 256)]
    precision: u64,
    /// Seed for randomized suites.
    #[arg(long, global = true, env = "OSCINT_SEED", default_value_t = 20_240_601)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the result here instead of stdout; for `sweep`, the output
    /// directory.
    #[arg(long, global = true, visible_alias = "output")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Form {
    Coeff,
    Conv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the extremal polynomial P_k for the trapezoid of width n.
    Construct {
        #[arg(long)]
        n: u32,
        /// Kernel index; defaults to n.
        #[arg(long)]
        k: Option<u32>,
        /// `coeff` writes exact rational coefficients, `conv` their
        /// shortest round-trip binary64 decimals.
        #[arg(long, value_enum, default_value_t = Form::Coeff)]
        form: Form,
    },
    /// Principal-value integral |p.v.∫ e^{iP(t)} dt/t|.
    Pvint {
        #[command(flatten)]
        phase: PhaseArgs,
    },
    /// Discrepancy D_n between P_n and the trapezoid, by region.
    Discrepancy {
        #[arg(long)]
        n: u32,
    },
    /// Measure of {t ∈ [lo, hi] : |h(t)| ≤ α} and its coefficient bound.
    Sublevel {
        #[arg(long)]
        poly: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
        hi: f64,
    },
    /// Van der Corput ratio |∫_a^b e^{iλφ}| λ^{1/k}.
    Vdc {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        poly: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
    /// Recursive decomposition trace of the upper-bound argument.
    UpperboundTrace {
        #[arg(long)]
        poly: PathBuf,
        /// A positive number or "auto".
        #[arg(long, default_value = "auto")]
        alpha: String,
    },
    /// Growth-law sweep over n, written as CSV plus a JSON sidecar.
    Sweep {
        #[arg(long)]
        n_min: u32,
        #[arg(long)]
        n_max: u32,
        /// Permit n beyond the desk-scale cap.
        #[arg(long)]
        allow_large: bool,
    },
    /// Run the acceptance suite; exits 1 if any criterion fails.
    Selftest {
        /// Run only these criteria (1–9).
        #[arg(long, value_delimiter = ',')]
        criterion: Vec<u8>,
    },
}

#[derive(clap::Args, Debug)]
#[group(required = true, multiple = false)]
struct PhaseArgs {
    /// Polynomial descriptor file.
    #[arg(long)]
    poly: Option<PathBuf>,
    /// The monomial t^d.
    #[arg(long)]
    monomial: Option<usize>,
    /// The extremal polynomial P_n.
    #[arg(long)]
    extremal: Option<u32>,
}

enum Failure {
    Usage(String),
    Compute(String),
}

fn usage<E: ToString>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn compute<E: ToString>(e: E) -> Failure {
    Failure::Compute(e.to_string())
}

fn read_poly(path: &Path) -> Result<Poly, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let desc: PolyDescriptor =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    desc.to_poly()
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

macro_rules! to_value {
    ($x:expr) => {
        serde_json::to_value($x).map_err(compute)?
    };
}

/// One CSV row from the scalar top-level fields of a JSON object; nested
/// values are embedded as JSON text.
fn csv_from(value: &Value) -> String {
    let quote = |s: String| {
        if s.contains([',', '"', '\n']) {
            format!("\"{}\"", s.replace('"', "\"\""))
        } else {
            s
        }
    };
    match value {
        Value::Object(map) => {
            let header: Vec<String> = map.keys().map(|k| quote(k.clone())).collect();
            let row: Vec<String> = map
                .values()
                .map(|v| match v {
                    Value::String(s) => quote(s.clone()),
                    other => quote(other.to_string()),
                })
                .collect();
            format!("{}\n{}\n", header.join(","), row.join(","))
        }
        other => format!("{other}\n"),
    }
}

fn run(cli: &Cli) -> Result<(Value, bool), Failure> {
    let cfg = GlobalConfig {
        tol: cli.tol,
        precision: cli.precision,
        seed: cli.seed,
        format: match cli.format {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        },
    };
    cfg.validate().map_err(usage)?;
    let pv_opts = PvOptions {
        precision_bits: cfg.precision,
        ..PvOptions::new(cfg.tol)
    };
    let value = match &cli.command {
        Command::Construct { n, k, form } => {
            let k = k.unwrap_or(*n);
            let e = construct_extremal(*n, k).map_err(usage)?;
            let c = kernel_normalizer(k).map_err(usage)?;
            let desc = match form {
                Form::Coeff => PolyDescriptor::from_poly(&e.coeff_form),
                Form::Conv => PolyDescriptor::from_poly(&e.coeff_form.to_float()),
            };
            json!({
                "n": n,
                "k": k,
                "degree": desc.degree,
                "a_k": format_rational(&e.a_k),
                "c_k": format_rational(&c),
                "coeffs": desc.coeffs,
            })
        }
        Command::Pvint { phase } => {
            let r = if let Some(n) = phase.extremal {
                let e = construct_extremal(n, n).map_err(usage)?;
                pv_integral_extremal(&e, &pv_opts).map_err(compute)?
            } else {
                let p = match (&phase.poly, phase.monomial) {
                    (Some(path), _) => read_poly(path)?,
                    (None, Some(d)) => Poly::monomial(d),
                    _ => return Err(usage("one of --poly, --monomial, --extremal is required")),
                };
                pv_integral_with(&p, &pv_opts).map_err(compute)?
            };
            to_value!(&r)
        }
        Command::Discrepancy { n } => {
            if *n < 2 {
                return Err(usage("n must be at least 2"));
            }
            to_value!(&discrepancy_integral(*n, cfg.tol).map_err(compute)?)
        }
        Command::Sublevel {
            poly,
            alpha,
            lo,
            hi,
        } => {
            let h = read_poly(poly)?;
            if !(*alpha > 0.0 && lo < hi) {
                return Err(usage("need alpha > 0 and lo < hi"));
            }
            to_value!(&sublevel_measure(&h, *alpha, *lo, *hi).map_err(compute)?)
        }
        Command::Vdc {
            k,
            lambda,
            poly,
            a,
            b,
        } => {
            let phi = read_poly(poly)?;
            to_value!(&vdc_check(&phi, *k, *lambda, *a, *b, cfg.tol).map_err(compute)?)
        }
        Command::UpperboundTrace { poly, alpha } => {
            let p = read_poly(poly)?;
            let alpha = if alpha == "auto" {
                Alpha::Auto
            } else {
                Alpha::Fixed(alpha.parse().map_err(|e| usage(format!("--alpha: {e}")))?)
            };
            to_value!(&kd_trace(&p, alpha, cfg.tol).map_err(compute)?)
        }
        Command::Sweep {
            n_min,
            n_max,
            allow_large,
        } => {
            let sc = SweepConfig {
                precision_bits: cfg.precision,
                allow_large: *allow_large,
                ..SweepConfig::new(*n_min, *n_max, cfg.tol)
            };
            let out = cli
                .out
                .as_deref()
                .ok_or_else(|| usage("sweep requires --out DIR"))?;
            let sweep = growth_sweep(&sc).map_err(usage)?;
            let (csv_path, json_path) =
                persist(&sweep.records, &sweep.sidecar(&sc), out).map_err(compute)?;
            let ok = sweep.failures.is_empty();
            return Ok((
                json!({
                    "csv": csv_path.display().to_string(),
                    "sidecar": json_path.display().to_string(),
                    "rows": sweep.records.len(),
                    "failures": sweep.failures.len(),
                }),
                ok,
            ));
        }
        Command::Selftest { criterion } => {
            let acfg = AcceptanceConfig {
                seed: cfg.seed,
                tol: cfg.tol,
            };
            let outcomes = if criterion.is_empty() {
                run_all(&acfg)
            } else {
                criterion
                    .iter()
                    .map(|&id| {
                        run_criterion(id, &acfg).ok_or_else(|| usage(format!("no criterion {id}")))
                    })
                    .collect::<Result<Vec<_>, _>>()?
            };
            for o in &outcomes {
                eprintln!("{o}");
            }
            let ok = outcomes.iter().all(|o| o.passed);
            let mut map = Map::new();
            map.insert("passed".into(), json!(ok));
            map.insert("criteria".into(), to_value!(&outcomes));
            return Ok((Value::Object(map), ok));
        }
    };
    Ok((value, true))
}

fn emit(cli: &Cli, value: &Value) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Json => serde_json::to_string_pretty(value).expect("json") + "\n",
        Format::Csv => csv_from(value),
    };
    let target = match cli.command {
        Command::Sweep { .. } => None,
        _ => cli.out.as_ref(),
    };
    match target {
        Some(path) => {
            fs::write(path, text).map_err(|e| compute(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(value, ok)| emit(&cli, &value).map(|_| ok));
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("usage: oscint <construct|pvint|discrepancy|sublevel|vdc|upperbound-trace|sweep|selftest> [options]");
            ExitCode::from(2)
        }
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

//! `ampcap`: bounds, solves, KKT verification and zero-count experiments
//! for amplitude-constrained Gaussian channels.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 theory violation, 4 convergence failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use ampcap::bounds::bound_report;
use ampcap::channel::{load_input, mutual_information, shell_mutual_information, ChannelConfig, Witness};
use ampcap::format::{fmt_sig, round_json};
use ampcap::solver::{default_grid_step, solve, verify_kkt, SolveOptions, SolveResult};
use ampcap::zeros::{default_k_max, sweep_csv, tijdeman_bound_at, worst_case_zero_search, zero_sweep};
use ampcap::Error;
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "ampcap", version, about = "Capacity-achieving inputs of amplitude-constrained Gaussian channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Copy)]
struct Instance {
    /// Dimension (1 for the scalar channel)
    #[arg(long, default_value_t = 1)]
    n: u32,
    /// Amplitude constraint
    #[arg(long = "A", allow_negative_numbers = true)]
    a: f64,
    /// Average-power constraint (n = 1 only)
    #[arg(long = "P", allow_negative_numbers = true)]
    p: Option<f64>,
}

impl Instance {
    fn config(&self) -> Result<ChannelConfig, Error> {
        ChannelConfig::new(self.n, self.a, self.p)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum What {
    Bounds,
    Capacity,
    Zeros,
}

#[derive(Subcommand)]
enum Command {
    /// Support-size bounds and the constants behind them
    Bound {
        #[command(flatten)]
        inst: Instance,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a capacity-achieving input and its KKT residuals
    Solve {
        #[command(flatten)]
        inst: Instance,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// KKT verification grid step (default 1e-3·A)
        #[arg(long)]
        grid: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the KKT conditions of a solve result or a bare input file
    Verify {
        /// JSON file: a `solve` result, or {kind, n, points, probs}
        file: PathBuf,
        /// Amplitude; required for bare input files
        #[arg(long = "A", allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long = "P", allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        grid: Option<f64>,
        /// Accept scalar inputs that are not symmetric about 0
        #[arg(long)]
        allow_asymmetric: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case search for the number of extreme points of f_Y
    Zeros {
        #[arg(long = "A", allow_negative_numbers = true)]
        a: f64,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate bounds, capacities or zero counts over an amplitude range
    Sweep {
        #[arg(long, value_enum)]
        what: What,
        /// Inclusive range min:max:steps
        #[arg(long = "A", value_parser = parse_range, allow_negative_numbers = true)]
        range: Range,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long = "P", allow_negative_numbers = true)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long)]
        k_max: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct Range(Vec<f64>);

fn parse_range(s: &str) -> Result<Range, String> {
    range_values(s).map(Range)
}

fn range_values(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    match parts.as_slice() {
        [x] => Ok(vec![num(x)?]),
        [lo, hi, steps] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let steps: usize = steps.trim().parse().map_err(|e| format!("'{steps}': {e}"))?;
            if steps == 0 {
                return Err("steps must be at least 1".into());
            }
            if steps == 1 {
                return Ok(vec![lo]);
            }
            Ok((0..steps)
                .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
                .collect())
        }
        _ => Err(format!("expected min:max:steps, got '{s}'")),
    }
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Domain(_) | Error::Invalid(_) => 2,
            Error::TheoryViolation(_) | Error::Inconsistent(_) => 3,
            Error::Convergence(_) | Error::Quadrature { .. } | Error::NonFinite { .. } => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display()))),
        None => {
            let mut h = std::io::stdout().lock();
            h.write_all(text.as_bytes())
                .map_err(|e| usage(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut v = serde_json::to_value(value).expect("serializable value");
    round_json(&mut v);
    let mut s = serde_json::to_string_pretty(&v).expect("json text");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct VerifyReport {
    config: ChannelConfig,
    capacity: f64,
    lambda: f64,
    kkt_equality_residual: f64,
    kkt_inequality_residual: f64,
    worst_x: f64,
    grid_step: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
struct ZerosReport {
    #[serde(rename = "A")]
    a: f64,
    k_max: usize,
    budget: usize,
    seed: u64,
    max_count: usize,
    bound: f64,
    certified: bool,
    evaluations: usize,
    witness: ampcap::channel::InputFile,
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Bound { inst, out } => {
            let report = bound_report(&inst.config()?)?;
            emit(&to_json(&report), out.as_ref())?;
            Ok(0)
        }
        Command::Solve {
            inst,
            tol,
            seed,
            grid,
            out,
        } => {
            let opts = SolveOptions {
                tol,
                seed,
                grid_step: grid,
                ..SolveOptions::default()
            };
            let r = solve(&inst.config()?, opts)?;
            emit(&to_json(&r), out.as_ref())?;
            Ok(0)
        }
        Command::Verify {
            file,
            a,
            p,
            tol,
            grid,
            allow_asymmetric,
            out,
        } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let (witness, config, lambda) = if value.get("config").is_some() {
                let r: SolveResult =
                    serde_json::from_value(value).map_err(|e| usage(format!("{}: {e}", file.display())))?;
                let mut config = r.config;
                if let Some(a) = a {
                    config.amplitude = a;
                }
                if p.is_some() {
                    config.power = p;
                }
                (r.input, config, r.lambda)
            } else {
                let w = load_input(&text, allow_asymmetric)?;
                let a = a.ok_or_else(|| usage("--A is required for a bare input file"))?;
                let config = ChannelConfig::new(w.dimension(), a, p)?;
                (w, config, 0.0)
            };
            config.validate()?;
            let capacity = match &witness {
                Witness::Scalar(d) => mutual_information(d)?,
                Witness::Shell { n, input } => shell_mutual_information(*n, input)?,
            };
            let step = grid.unwrap_or_else(|| default_grid_step(config.amplitude));
            let r = verify_kkt(&witness, &config, capacity, lambda, step)?;
            let pass = r.passes(tol);
            let report = VerifyReport {
                config,
                capacity,
                lambda,
                kkt_equality_residual: r.equality,
                kkt_inequality_residual: r.inequality,
                worst_x: r.worst_x,
                grid_step: step,
                tol,
                pass,
            };
            emit(&to_json(&report), out.as_ref())?;
            Ok(if pass { 0 } else { 1 })
        }
        Command::Zeros {
            a,
            k_max,
            budget,
            seed,
            out,
        } => {
            let k_max = k_max.unwrap_or_else(|| default_k_max(a));
            let s = worst_case_zero_search(a, k_max, budget, seed)?;
            let bound = tijdeman_bound_at(a)?;
            if s.max_count as f64 > bound {
                return Err(Error::TheoryViolation(format!(
                    "{} extreme points at A = {a} exceed the bound {bound}",
                    s.max_count
                ))
                .into());
            }
            let report = ZerosReport {
                a,
                k_max,
                budget,
                seed,
                max_count: s.max_count,
                bound,
                certified: s.certified,
                evaluations: s.evaluations,
                witness: (&Witness::Scalar(s.witness)).into(),
            };
            emit(&to_json(&report), out.as_ref())?;
            Ok(0)
        }
        Command::Sweep {
            what,
            range,
            n,
            p,
            tol,
            seed,
            budget,
            k_max,
            format,
            out,
        } => {
            let range = range.0;
            let text = match what {
                What::Bounds => {
                    let rows = range
                        .iter()
                        .map(|&a| bound_report(&ChannelConfig::new(n, a, p)?))
                        .collect::<Result<Vec<_>, Error>>()?;
                    match format {
                        Format::Json => to_json(&rows),
                        Format::Csv => bounds_csv(&rows),
                    }
                }
                What::Capacity => {
                    let opts = SolveOptions {
                        tol,
                        seed,
                        ..SolveOptions::default()
                    };
                    let configs = range
                        .iter()
                        .map(|&a| ChannelConfig::new(n, a, p))
                        .collect::<Result<Vec<_>, Error>>()?;
                    let rows = configs
                        .par_iter()
                        .map(|c| solve(c, opts))
                        .collect::<Result<Vec<_>, Error>>()?;
                    match format {
                        Format::Json => to_json(&rows),
                        Format::Csv => capacity_csv(&rows),
                    }
                }
                What::Zeros => {
                    if n != 1 || p.is_some() {
                        return Err(usage("zero sweeps are defined for n = 1 without --P"));
                    }
                    let rows = zero_sweep(&range, k_max, budget, seed)?;
                    match format {
                        Format::Json => to_json(&rows),
                        Format::Csv => sweep_csv(&rows),
                    }
                }
            };
            emit(&text, out.as_ref())?;
            Ok(0)
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_sig).unwrap_or_default()
}

fn bounds_csv(rows: &[ampcap::bounds::BoundReport]) -> String {
    let mut s = String::from("n,A,P,lower,upper,kappa,B\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.config.n,
            fmt_sig(r.config.amplitude),
            opt(r.config.power),
            fmt_sig(r.lower),
            fmt_sig(r.upper),
            fmt_sig(r.kappa),
            fmt_sig(r.zero_radius)
        ));
    }
    s
}

fn capacity_csv(rows: &[SolveResult]) -> String {
    let mut s = String::from(
        "n,A,P,capacity,support_size,lambda,kkt_equality_residual,kkt_inequality_residual\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.config.n,
            fmt_sig(r.config.amplitude),
            opt(r.config.power),
            fmt_sig(r.capacity),
            r.support_size,
            fmt_sig(r.lambda),
            fmt_sig(r.kkt_equality_residual),
            fmt_sig(r.kkt_inequality_residual)
        ));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(range_values("1:10:10").unwrap().len(), 10);
        assert_eq!(range_values("0.5:4:8").unwrap()[7], 4.0);
        assert_eq!(range_values("2").unwrap(), vec![2.0]);
        assert!(range_values("1:2").is_err());
        assert!(range_values("1:2:0").is_err());
    }

    #[test]
    fn error_codes() {
        let f: Failure = Error::Convergence("x".into()).into();
        assert_eq!(f.code, 4);
        let f: Failure = Error::TheoryViolation("x".into()).into();
        assert_eq!(f.code, 3);
        let f: Failure = Error::Invalid("x".into()).into();
        assert_eq!(f.code, 2);
    }
}

//! `sar2d`: command-line access to the sar2d-core routines.
//!
//! Scalar results go to stdout as one JSON object carrying `schema_version`;
//! `converge` writes CSV. Errors are a single JSON line on stderr with exit
//! code 2 (invalid input or regime) or 3 (memory budget).

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use sar2d_core::asymptotics::convergence_study_within;
use sar2d_core::covariance::{check_bounds_within, cov_exact_within, var_table_within};
use sar2d_core::macoef::g_table_within;
use sar2d_core::{
    canonicalize, classify, g_binomial, g_direct, g_face, g_gamma_edge, g_hypergeom,
    g_missing_face, mc_covariance_within, mc_variance_within, variance_limit, CovQuery, Error,
    MemoryBudget, NoiseKind, NoiseSpec, Params, DEFAULT_TOL,
};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "sar2d",
    version,
    about = "Unilateral spatial autoregression: coefficients, variances, limits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, allow_negative_numbers = true)]
    gamma: f64,
}

impl ParamArgs {
    fn params(&self) -> Result<Params, Failure> {
        Ok(Params::new(self.alpha, self.beta, self.gamma)?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Recurrence,
    Binomial,
    Hypergeometric,
    Face,
    MissingFace,
    Jacobi,
}

#[derive(Subcommand)]
enum Command {
    /// Locate the triple relative to the stability domain.
    Classify {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
    },
    /// Moving-average coefficient G(m, n).
    Gcoef {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Method::Recurrence)]
        method: Method,
    },
    /// Exact Cov(X[k1, l1], X[k2, l2]).
    Cov {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        k1: usize,
        #[arg(long)]
        l1: usize,
        #[arg(long)]
        k2: usize,
        #[arg(long)]
        l2: usize,
    },
    /// Exact Var(X[k, l]).
    Var {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
    },
    /// Limit of the normalized variance at (s, t).
    Limit {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
    },
    /// Scaled exact variances against the limit, as CSV.
    Converge {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        t: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<u64>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample covariance bounds on random index quadruples.
    CheckBounds {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 30)]
        index_max: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Monte Carlo variance of X[k, l], or covariance with X[k2, l2].
    Simulate {
        #[command(flatten)]
        p: ParamArgs,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, requires = "l2")]
        k2: Option<usize>,
        #[arg(long, requires = "k2")]
        l2: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "gaussian")]
        noise: NoiseKind,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.into())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(e) if e.is_resource() => 3,
            Failure::Io(_) => 1,
            _ => 2,
        }
    }

    fn report(&self) -> Value {
        let (kind, message) = match self {
            Failure::Usage(m) => ("usage", m.trim_end().to_string()),
            Failure::Core(e) => (e.kind(), e.to_string()),
            Failure::Io(e) => ("io", e.to_string()),
        };
        json!({ "schema_version": SCHEMA_VERSION, "error": { "kind": kind, "message": message } })
    }
}

/// `payload` as a JSON object tagged with the schema version and command.
fn envelope(command: &str, payload: impl Serialize) -> Result<Value, Failure> {
    let mut out = Map::new();
    out.insert("schema_version".into(), json!(SCHEMA_VERSION));
    out.insert("command".into(), json!(command));
    match serde_json::to_value(payload).map_err(io::Error::from)? {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(Value::Object(out))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let budget = MemoryBudget::from_env()?;
    let doc = match cli.command {
        Command::Classify { p, tol } => {
            let params = p.params()?;
            let class = classify(&params, tol)?;
            let (canonical, sign_map) = canonicalize(&params);
            envelope(
                "classify",
                json!({
                    "alpha": params.alpha,
                    "beta": params.beta,
                    "gamma": params.gamma,
                    "kind": class.kind.name(),
                    "class": class.kind,
                    "degenerate": class.degenerate,
                    "rho": class.rho.as_f64(),
                    "canonical": canonical,
                    "sign_map": sign_map,
                }),
            )?
        }
        Command::Gcoef { p, m, n, method } => {
            let params = p.params()?;
            let (name, value) = match method {
                Method::Direct => ("direct", g_direct(m, n, &params)?),
                Method::Recurrence => (
                    "recurrence",
                    g_table_within(m, n, &params, &budget)?.get(m, n),
                ),
                Method::Binomial => ("binomial", g_binomial(m, n, &params)?),
                Method::Hypergeometric => ("hypergeometric", g_hypergeom(m, n, &params)?),
                Method::Face => ("face", g_face(m, n, &params)?),
                Method::MissingFace => ("missing_face", g_missing_face(m, n, &params)?),
                Method::Jacobi => {
                    if params.gamma != -1.0
                        || params.alpha != params.beta
                        || params.alpha.abs() >= 1.0
                    {
                        return Err(Error::Domain(format!(
                            "the Jacobi form needs alpha = beta with |alpha| < 1 and gamma = -1, got ({}, {}, {})",
                            params.alpha, params.beta, params.gamma
                        ))
                        .into());
                    }
                    ("jacobi", g_gamma_edge(m, n, params.alpha))
                }
            };
            envelope(
                "gcoef",
                json!({ "params": params, "m": m, "n": n, "method": name, "value": value }),
            )?
        }
        Command::Cov { p, k1, l1, k2, l2 } => {
            let params = p.params()?;
            let q = CovQuery::new(k1, l1, k2, l2)?;
            let value = cov_exact_within(&q, &params, &budget)?;
            envelope(
                "cov",
                json!({ "params": params, "query": q, "value": value }),
            )?
        }
        Command::Var { p, k, l } => {
            let params = p.params()?;
            CovQuery::diagonal(k, l)?;
            let value = var_table_within(k, l, &params, &budget)?.get(k, l);
            envelope(
                "var",
                json!({ "params": params, "k": k, "l": l, "value": value }),
            )?
        }
        Command::Limit { p, s, t } => {
            let params = p.params()?;
            let limit = variance_limit(&params, s, t)?;
            envelope(
                "limit",
                json!({ "params": params, "s": s, "t": t, "value": limit.value(), "limit": limit }),
            )?
        }
        Command::Converge {
            p,
            s,
            t,
            n_list,
            out,
        } => {
            let params = p.params()?;
            let report = convergence_study_within(&params, s, t, &n_list, &budget)?;
            let sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(File::create(path)?),
                None => Box::new(io::stdout().lock()),
            };
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(sink);
            for row in &report.rows {
                w.serialize(row)?;
            }
            w.flush()?;
            return Ok(());
        }
        Command::CheckBounds {
            p,
            samples,
            index_max,
            seed,
        } => {
            let params = p.params()?;
            envelope(
                "check_bounds",
                check_bounds_within(&params, samples, index_max, seed, &budget)?,
            )?
        }
        Command::Simulate {
            p,
            k,
            l,
            k2,
            l2,
            reps,
            seed,
            noise,
        } => {
            let params = p.params()?;
            let noise = NoiseSpec::new(noise, seed);
            let est = match (k2, l2) {
                (Some(k2), Some(l2)) => mc_covariance_within(
                    &CovQuery::new(k, l, k2, l2)?,
                    &params,
                    &noise,
                    reps,
                    &budget,
                )?,
                _ => mc_variance_within(k, l, &params, &noise, reps, &budget)?,
            };
            envelope("simulate", json!({ "params": params, "estimate": est }))?
        }
    };
    let mut stdout = io::stdout().lock();
    serde_json::to_writer(&mut stdout, &doc).map_err(io::Error::from)?;
    writeln!(stdout)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(Failure::Usage(e.to_string())),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => fail(f),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", f.report());
    ExitCode::from(f.exit_code())
}

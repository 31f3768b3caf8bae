mod spec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use qmonogamy::correlations::correlation_report;
use qmonogamy::format::{fmt_num, round_json};
use qmonogamy::monogamy::{check_recursion_eq10, check_recursion_left, classify_ghz_w, deficit_right_npartite};
use qmonogamy::verify::{run_verify, SampleSource, Suite, VerifyConfig};
use qmonogamy::{run_sweep, Error, OptimizerConfig, PureTripartite, Route, SweepConfig};

use spec::StateSpec;

/// Quantum correlations and their monogamy deficits on small qubit states.
#[derive(Parser, Debug)]
#[command(name = "qmonogamy", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Seed for the optimizer's random starts and for `haar` states without
    /// their own seed.
    #[arg(long, global = true, default_value_t = 0x5EED)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Override every identity tolerance (verify only; echoed in the report).
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RouteArg {
    Optimized,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Tripartite,
    Npartite,
    Workdeficit,
    All,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full correlation report for a state, as JSON.
    Measure { state: String },
    /// Deficits along the psi-tilde family.
    Sweep {
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.75, 1.0])]
        eps: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        p_start: f64,
        #[arg(long, default_value_t = 1.0)]
        p_end: f64,
        #[arg(long, default_value_t = 0.01)]
        p_step: f64,
        #[arg(long, value_enum, default_value_t = RouteArg::Optimized)]
        route: RouteArg,
    },
    /// GHZ/W class of a pure three-qubit state.
    Classify { state: String },
    /// Randomized identity suites.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long = "n", default_value_t = 50)]
        n_samples: usize,
        /// Use |0...0> for every sample instead of Haar states.
        #[arg(long)]
        product: bool,
    },
    /// First-party deficit of a 3- or 4-qubit pure state, with the
    /// recursions for four qubits.
    Npartite { state: String },
}

/// Error class, mapped to the process exit code.
enum Failure {
    Input(String),
    Numeric(String),
    Classify(String),
    /// The report was written; some identity failed.
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Classify(_) => 4,
            Failure::Verify => 5,
        }
    }
}

fn input(e: Error) -> Failure {
    Failure::Input(e.to_string())
}

fn numeric(e: Error) -> Failure {
    Failure::Numeric(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Input(m) | Failure::Numeric(m) | Failure::Classify(m) => eprintln!("error: {m}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let g = &cli.global;
    let optimizer = OptimizerConfig {
        seed: g.seed,
        ..OptimizerConfig::default()
    };
    if let Some(t) = g.tol {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Failure::Input(format!("--tol must be a nonnegative number, got {t}")));
        }
    }
    let load = |s: &str| -> Result<spec::State, Failure> {
        s.parse::<StateSpec>()
            .and_then(|spec| spec.resolve(g.seed))
            .map_err(input)
    };

    match &cli.command {
        Command::Measure { state } => {
            expect_format(g.format, Format::Json, &[])?;
            let st = load(state)?;
            if st.num_parties() > 4 {
                return Err(Failure::Input("at most 4 parties supported".into()));
            }
            let report = correlation_report(&st.density(), &optimizer).map_err(numeric)?;
            emit_json(&report, g.out.as_deref())
        }
        Command::Sweep {
            eps,
            p_start,
            p_end,
            p_step,
            route,
        } => {
            let fmt = expect_format(g.format, Format::Csv, &[Format::Json])?;
            let config = SweepConfig {
                eps: eps.clone(),
                p_start: *p_start,
                p_end: *p_end,
                p_step: *p_step,
                route: match route {
                    RouteArg::Optimized => Route::Optimized,
                    RouteArg::ClosedForm => Route::PureClosedForm,
                },
                optimizer,
            };
            config.validate().map_err(input)?;
            let result = run_sweep(&config).map_err(numeric)?;
            match fmt {
                Format::Json => emit_json(&result, g.out.as_deref()),
                _ => emit(&result.to_csv(), g.out.as_deref()),
            }
        }
        Command::Classify { state } => {
            let fmt = expect_format(g.format, Format::Text, &[Format::Json])?;
            let psi = load(state)?.into_pure().map_err(|e| Failure::Classify(e.to_string()))?;
            let c = classify_ghz_w(&psi).map_err(|e| Failure::Classify(e.to_string()))?;
            match fmt {
                Format::Json => emit_json(&c, g.out.as_deref()),
                _ => {
                    let mut line = format!("{} delta_left_C={}", c.verdict.as_str(), fmt_num(c.delta_left_c));
                    if c.boundary {
                        line.push_str(" boundary");
                    }
                    line.push('\n');
                    emit(&line, g.out.as_deref())
                }
            }
        }
        Command::Verify {
            suite,
            n_samples,
            product,
        } => {
            let fmt = expect_format(g.format, Format::Json, &[Format::Csv])?;
            let suite = match suite {
                SuiteArg::Tripartite => Suite::Tripartite,
                SuiteArg::Npartite => Suite::Npartite,
                SuiteArg::Workdeficit => Suite::Workdeficit,
                SuiteArg::All => Suite::All,
            };
            let mut cfg = VerifyConfig::new(suite, *n_samples, g.seed);
            cfg.tolerance = g.tol;
            cfg.optimizer = optimizer;
            if *product {
                cfg.source = SampleSource::Product;
            }
            let report = run_verify(&cfg).map_err(|e| match e {
                Error::InvalidArgument(_) => input(e),
                e => numeric(e),
            })?;
            match fmt {
                Format::Csv => {
                    let mut s = String::from("identity,tolerance,samples,max_residual,mean_residual,passed\n");
                    for i in &report.identities {
                        s.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            i.name,
                            fmt_num(i.tolerance),
                            i.samples,
                            fmt_num(i.max_residual),
                            fmt_num(i.mean_residual),
                            i.passed
                        ));
                    }
                    s.push_str(&format!(
                        "# max_optimizer_spread {}\n",
                        fmt_num(report.max_optimizer_spread)
                    ));
                    s.push_str(&format!("# passed {}\n", report.passed));
                    emit(&s, g.out.as_deref())?;
                }
                _ => emit_json(&report, g.out.as_deref())?,
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::Npartite { state } => {
            expect_format(g.format, Format::Json, &[])?;
            let psi = load(state)?.into_pure().map_err(input)?;
            let n = psi.num_parties();
            let anchor = psi.labels()[0].clone();
            let value = match n {
                3 => {
                    let t = PureTripartite::new(&psi, &optimizer).map_err(numeric)?;
                    let r = t.report(&anchor, Route::Optimized).map_err(numeric)?;
                    json!({ "n": 3, "anchor": anchor, "deficit": r })
                }
                4 => {
                    let right = deficit_right_npartite(&psi, &optimizer).map_err(numeric)?;
                    let (r10, rl) = rayon::join(
                        || check_recursion_eq10(&psi, &optimizer),
                        || check_recursion_left(&psi, &optimizer),
                    );
                    json!({
                        "n": 4,
                        "anchor": anchor,
                        "delta_right": right,
                        "recursion_right": r10.map_err(numeric)?,
                        "recursion_left": rl.map_err(numeric)?,
                    })
                }
                _ => return Err(Failure::Input(format!("npartite needs 3 or 4 qubits, got {n}"))),
            };
            emit_json(&value, g.out.as_deref())
        }
    }
}

/// The requested format, or `default`; anything outside `default` and
/// `also` is an input error.
fn expect_format(requested: Option<Format>, default: Format, also: &[Format]) -> Result<Format, Failure> {
    match requested {
        None => Ok(default),
        Some(f) if f == default || also.contains(&f) => Ok(f),
        Some(f) => Err(Failure::Input(
            format!("format {f:?} not supported by this command").to_lowercase(),
        )),
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let mut v = serde_json::to_value(value).map_err(|e| Failure::Numeric(e.to_string()))?;
    round_json(&mut v);
    let mut text = serde_json::to_string_pretty(&v).map_err(|e| Failure::Numeric(e.to_string()))?;
    text.push('\n');
    emit(&text, out)
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    let res = match out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| Failure::Input(format!("cannot write output: {e}")))
}

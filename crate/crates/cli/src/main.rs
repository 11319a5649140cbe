use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cknlab_cli::acceptance;
use cknlab_cli::commands::run;
use cknlab_cli::config::{read_config_file, Command, Settings, CONFIG_ENV};
use cknlab_cli::output::write_atomic;
use cknlab_cli::{CliError, CliResult, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "cknlab", version, about = "Sharp constants and symmetry breaking for weighted second-order uncertainty principles")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Closed-form C(N,α), reference constants and bounds
    Constants,
    /// Per-mode quotients 𝒥, 𝒦 or the general (α,β) bound over k = 0..=kmax
    ModeScan {
        /// J, K or DN-general
        #[arg(long)]
        formula: Option<String>,
    },
    /// Quotient of a named profile, closed form against quadrature
    Quotient {
        /// the test profile e^{-r} in mode k = 1
        #[arg(long)]
        test_function: bool,
        /// extremal family id (thm1.2-2, thm1.2-1a, thm1.2-1b, thmA, thmB, thmC-1, thmC-2, thmD)
        #[arg(long)]
        family: Option<String>,
        /// file of basis coefficients
        #[arg(long)]
        coeffs: Option<PathBuf>,
    },
    /// Variational estimate of one mode constant
    Minimize,
    /// Mode-by-mode scan at N = 4 with escalating bases
    ProbeConjecture,
    /// Run the acceptance suite
    Selftest,
}

#[derive(Debug, Args)]
struct Flags {
    #[arg(long, global = true)]
    n: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    k: Option<u32>,
    #[arg(long, global = true)]
    kmax: Option<u32>,
    /// comma-separated, strictly increasing
    #[arg(long, global = true)]
    basis: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// csv, json or plot-data
    #[arg(long, global = true)]
    format: Option<String>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    #[arg(long = "rel-tol", global = true)]
    rel_tol: Option<f64>,
}

fn merge(cli: &Cli) -> CliResult<(Command, Settings)> {
    let mut s = match &cli.flags.config {
        Some(p) => read_config_file(p)?,
        None => Settings::new(),
    };
    let f = &cli.flags;
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            s.insert(k.to_string(), v);
        }
    };
    set("n", f.n.map(|v| v.to_string()));
    set("alpha", f.alpha.map(|v| format!("{v:?}")));
    set("beta", f.beta.map(|v| format!("{v:?}")));
    set("k", f.k.map(|v| v.to_string()));
    set("kmax", f.kmax.map(|v| v.to_string()));
    set("basis", f.basis.clone());
    set("a", f.a.map(|v| format!("{v:?}")));
    set("b", f.b.map(|v| format!("{v:?}")));
    set("seed", f.seed.map(|v| v.to_string()));
    set("jobs", f.jobs.map(|v| v.to_string()));
    set("format", f.format.clone());
    set("out", f.out.as_ref().map(|p| p.display().to_string()));
    set("rel-tol", f.rel_tol.map(|v| format!("{v:?}")));
    let command = match &cli.command {
        Sub::Constants => Command::Constants,
        Sub::ModeScan { formula } => {
            set("formula", formula.clone());
            Command::ModeScan
        }
        Sub::Quotient {
            test_function,
            family,
            coeffs,
        } => {
            if *test_function {
                set("test-function", Some("true".into()));
            }
            set("family", family.clone());
            set("coeffs", coeffs.as_ref().map(|p| p.display().to_string()));
            Command::Quotient
        }
        Sub::Minimize => Command::Minimize,
        Sub::ProbeConjecture => Command::ProbeConjecture,
        Sub::Selftest => Command::Selftest,
    };
    Ok((command, s))
}

fn selftest() -> CliResult<()> {
    let results = acceptance::run_all(|o| println!("{}", o.line()));
    let failed = results.iter().filter(|o| !o.passed).count();
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        Err(CliError::Acceptance { failed })
    } else {
        Ok(())
    }
}

fn execute(cfg: &RunConfig) -> CliResult<()> {
    if cfg.command == Command::Selftest {
        return selftest();
    }
    let outcome = run(cfg)?;
    let text = outcome.rendered.render(cfg.output_format)?;
    match &cfg.output_path {
        Some(p) => write_atomic(p, &text)?,
        None => print!("{text}"),
    }
    match outcome.deferred {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = merge(&cli)
        .and_then(|(command, s)| RunConfig::from_settings(command, &s))
        .and_then(|cfg| match cfg.jobs {
            Some(j) => rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .map_err(|e| CliError::precondition(format!("cannot start {j} workers: {e}")))?
                .install(|| execute(&cfg)),
            None => execute(&cfg),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cknlab: {e}");
            e.to_exit()
        }
    }
}

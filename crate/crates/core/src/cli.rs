//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 usage or config error, 3 construction infeasible.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::cesaro::{cesaro_report, checkpoint_set, write_csv, CesaroReport};
use crate::error::{Error, Result};
use crate::norms::{norm_l1, norm_l1_plus_linf, norm_linf, optimal_threshold};
use crate::operator::{iterate_value, sigma, sign_flip_count};
use crate::residuality::margin;
use crate::scalar::{format_sig17, Rational, Scalar};
use crate::scenario::Scenario;
use crate::space::CellIndex;
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cesaro", about = "Cesàro averages of a signed shift and their non-convergence")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct Common {
    #[arg(long)]
    pub scenario: PathBuf,
    /// Evaluate in exact rational arithmetic.
    #[arg(long)]
    pub exact: bool,
    /// Worker threads (defaults to the scenario's setting).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cesàro averages at the checkpoints, as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Directory for one CSV per (chain, start) plus `averages.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a verification suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds and prints the partition of a base-space scenario.
    Partition {
        #[command(flatten)]
        common: Common,
        /// Cells per chain listed explicitly.
        #[arg(long, default_value_t = 8)]
        cells: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// L¹, L∞ and L¹+L∞ norms of the scenario function with the optimal split threshold.
    Norm {
        #[command(flatten)]
        common: Common,
    },
    /// Per-chain diameter estimates and the margin.
    Residuality {
        #[command(flatten)]
        common: Common,
    },
    /// The sign σ(n, m).
    Sigma { n: u64, m: u64 },
    /// The value (S^k v)(j, n).
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        chain: usize,
        #[arg(long, default_value_t = 0)]
        n: u64,
        #[arg(long)]
        k: u64,
    },
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoZ0Found { .. }
        | Error::ComplementTooLarge(_)
        | Error::MisalignedCellMeasure { .. }
        | Error::MisalignedFunction(_)
        | Error::Precondition(_) => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn load(common: &Common) -> Result<Scenario> {
    let mut scenario = Scenario::load(&common.scenario)?;
    scenario.exact |= common.exact;
    if let Some(t) = common.threads {
        if t == 0 {
            return Err(Error::Parse("--threads must be at least 1".into()));
        }
        scenario.threads = t;
    }
    Ok(scenario)
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("cannot write {}: {e}", path.display()))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn csv<T: Scalar>(reports: &[CesaroReport<T>]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, reports).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn simulate<T: Scalar>(scenario: &Scenario, out: Option<&Path>, stdout: &mut dyn Write) -> Result<i32> {
    let model = scenario.model::<T>()?;
    let mut reports = Vec::new();
    for j in 0..model.v.chain_count() {
        for &n in &scenario.starts {
            let checkpoints = checkpoint_set(n, scenario.t_min, scenario.t_max)?;
            reports.push(cesaro_report(&model.v, CellIndex::new(j, n), &checkpoints, &model.z0)?);
        }
    }
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            for r in &reports {
                let name = format!("chain{}_n{}.csv", r.start.chain.0, r.start.n);
                write_file(&dir.join(name), &csv(std::slice::from_ref(r)))?;
            }
            write_file(&dir.join("averages.csv"), &csv(&reports))?;
        }
        None => write!(stdout, "{}", csv(&reports)).map_err(|e| Error::Parse(e.to_string()))?,
    }
    Ok(EXIT_OK)
}

fn print(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout.write_all(text.as_bytes()).map_err(|e| Error::Parse(format!("cannot write output: {e}")))
}

fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Parse(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Sigma { n, m } => {
            let s = sigma(n, m);
            print(stdout, &format!("n,m,flips,sigma\n{n},{m},{},{}\n", sign_flip_count(n, m), s.as_i8()))?;
            Ok(EXIT_OK)
        }
        Command::Simulate { common, out } => {
            let scenario = load(&common)?;
            let mut buf = Vec::new();
            let code = with_pool(scenario.threads, || {
                if scenario.exact {
                    simulate::<Rational>(&scenario, out.as_deref(), &mut buf)
                } else {
                    simulate::<f64>(&scenario, out.as_deref(), &mut buf)
                }
            })??;
            stdout.write_all(&buf).map_err(|e| Error::Parse(e.to_string()))?;
            Ok(code)
        }
        Command::Verify { common, suite, seed, out } => {
            let scenario = load(&common)?;
            let report = with_pool(scenario.threads, || run_suite(&scenario, suite, seed))?;
            let text = report.render();
            if let Some(path) = out {
                write_file(&path, &text)?;
            }
            print(stdout, &text)?;
            Ok(if report.failed() == 0 { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Partition { common, cells, out } => {
            let scenario = load(&common)?;
            if !scenario.is_base() {
                return Err(Error::Parse("partition needs a scenario with a [base] table".into()));
            }
            let partition = scenario.partition()?.expect("base scenario");
            let text = partition.to_text(cells);
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print(stdout, &text)?,
            }
            Ok(EXIT_OK)
        }
        Command::Norm { common } => {
            let scenario = load(&common)?;
            let model = scenario.model::<f64>()?;
            let l1 = norm_l1(&model.space, &model.v)?;
            let linf = norm_linf(&model.space, &model.v)?;
            let sum = norm_l1_plus_linf(&model.space, &model.v)?;
            let tau = optimal_threshold(&model.space, &model.v)?;
            let l1_text = if l1.is_finite() { format_sig17(l1.as_f64()) } else { "inf".into() };
            print(
                stdout,
                &format!(
                    "l1,linf,l1_plus_linf,tau\n{l1_text},{},{},{}\n",
                    format_sig17(linf),
                    format_sig17(sum),
                    format_sig17(tau)
                ),
            )?;
            Ok(EXIT_OK)
        }
        Command::Residuality { common } => {
            let scenario = load(&common)?;
            let model = scenario.model::<f64>()?;
            let report = with_pool(scenario.threads, || margin(&model.v, scenario.t_min, scenario.t_max))??;
            let mut text = String::from("chain,diameter\n");
            for d in &report.chains {
                text.push_str(&format!("{},{}\n", d.chain.0, format_sig17(d.value)));
            }
            let verdict = if report.in_g0 { "pass" } else { "fail" };
            text.push_str(&format!("margin,{},{verdict}\n", format_sig17(report.margin)));
            print(stdout, &text)?;
            Ok(if report.in_g0 { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Iterate { common, chain, n, k } => {
            let scenario = load(&common)?;
            let idx = CellIndex::new(chain, n);
            let (re, im) = if scenario.exact {
                let model = scenario.model::<Rational>()?;
                let z = iterate_value(&model.v, idx, k)?;
                (z.re.to_csv(), z.im.to_csv())
            } else {
                let model = scenario.model::<f64>()?;
                let z = iterate_value(&model.v, idx, k)?;
                (z.re.to_csv(), z.im.to_csv())
            };
            print(stdout, &format!("chain,n,k,re,im\n{chain},{n},{k},{re},{im}\n"))?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

//! Command-line driver.
//!
//! Exit codes: 0 everything holds, 1 usage or input error, 2 a relation was
//! violated, 3 numerical breakdown.

pub mod demo;
pub mod sweep;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::report::{write_chain_csv, write_properties_csv, write_report_csv, Summary};
use crate::scenario;
use crate::tolerance::Tolerances;
use sweep::{run_sweep, Rows, SweepConfig, SweepMode, SweepOutcome, PROPERTY_NAMES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "uqrel", version, about = "Checks error/disturbance uncertainty relations numerically")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a seeded verification sweep.
    Verify(VerifyArgs),
    /// Sweep the comparison chain against noise-operator error and disturbance.
    Compare(SweepArgs),
    /// Print a built-in worked case.
    Demo {
        /// One of luders-xy, naive-violation, schrodinger-equality, transpose-map.
        name: String,
        #[arg(long, value_enum, default_value_t = DemoFormat::Text)]
        format: DemoFormat,
    },
    /// Evaluate a scenario file and print a JSON report.
    Case {
        path: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub mode: SweepMode,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Hilbert-space dimension; repeat or comma-separate for several.
    #[arg(long = "dim", value_delimiter = ',', default_value = "2")]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance overrides: a bare number sets `num`; otherwise `key=value`
    /// with keys herm, trace, psd, num, pinv, spec.
    #[arg(long = "tol", value_delimiter = ',')]
    pub tol: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output path; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoFormat {
    Text,
    Json,
}

/// Applies `--tol` overrides to the defaults.
pub fn parse_tolerances(items: &[String]) -> Result<Tolerances, String> {
    let mut tol = Tolerances::default();
    for item in items {
        let (key, value) = match item.split_once('=') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => ("num", item.trim()),
        };
        let v: f64 = value.parse().map_err(|_| format!("--tol {item}: '{value}' is not a number"))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(format!("--tol {item}: tolerance must be positive"));
        }
        let slot = match key {
            "herm" => &mut tol.herm,
            "trace" => &mut tol.trace,
            "psd" => &mut tol.psd,
            "num" => &mut tol.num,
            "pinv" => &mut tol.pinv,
            "spec" => &mut tol.spec,
            other => return Err(format!("--tol: unknown key '{other}'")),
        };
        *slot = v;
    }
    Ok(tol)
}

fn open_out<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

#[derive(Serialize)]
struct JsonSweep<'a, T: Serialize> {
    summary: &'a Summary,
    rows: &'a [T],
}

fn property_json(rows: &[sweep::PropertyRow]) -> Vec<serde_json::Value> {
    rows.iter()
        .map(|r| {
            let mut obj = serde_json::Map::new();
            obj.insert("seed".into(), r.seed.into());
            obj.insert("dim".into(), r.dim.into());
            for (name, s) in PROPERTY_NAMES.iter().zip(&r.slacks) {
                obj.insert((*name).into(), (*s).into());
            }
            obj.insert("min_slack".into(), r.min_slack.into());
            obj.insert("satisfied".into(), r.satisfied.into());
            serde_json::Value::Object(obj)
        })
        .collect()
}

fn emit_sweep(outcome: &SweepOutcome, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Csv => {
            match &outcome.rows {
                Rows::Relation(rows) => write_report_csv(&mut *out, rows)?,
                Rows::Chain(rows) => write_chain_csv(&mut *out, rows)?,
                Rows::Properties(rows) => write_properties_csv(&mut *out, &PROPERTY_NAMES, rows)?,
            }
            writeln!(err, "{}", serde_json::to_string(&outcome.summary)?)?;
        }
        Format::Json => {
            let summary = &outcome.summary;
            let text = match &outcome.rows {
                Rows::Relation(rows) => serde_json::to_string_pretty(&JsonSweep { summary, rows })?,
                Rows::Chain(rows) => serde_json::to_string_pretty(&JsonSweep { summary, rows })?,
                Rows::Properties(rows) => serde_json::to_string_pretty(&JsonSweep { summary, rows: &property_json(rows) })?,
            };
            writeln!(out, "{text}")?;
        }
    }
    for (seed, msg) in &outcome.breakdowns {
        writeln!(err, "breakdown at seed {seed}: {msg}")?;
    }
    for seed in &outcome.summary.failing_seeds {
        writeln!(err, "violation at seed {seed}")?;
    }
    out.flush()
}

fn sweep_command(mode: SweepMode, args: &SweepArgs, stdout: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let tol = match parse_tolerances(&args.tol) {
        Ok(t) => t,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
    };
    let cfg = SweepConfig { dims: args.dims.clone(), trials: args.trials, seed: args.seed, mode, tol };
    let outcome = match run_sweep(&cfg) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        }
    };
    let written = open_out(args.out.as_deref(), stdout).and_then(|mut out| emit_sweep(&outcome, args.format, &mut *out, err));
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.exit_code()
}

fn case_command(path: &Path, out_path: Option<&Path>, stdout: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let sc = match scenario::load(path) {
        Ok(sc) => sc,
        Err(d) => {
            let _ = writeln!(err, "error: {d}");
            return EXIT_USAGE;
        }
    };
    let report = match sc.evaluate() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_for(&e);
        }
    };
    let written = open_out(out_path, stdout).and_then(|mut out| {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        out.flush()
    });
    if let Err(e) = written {
        let _ = writeln!(err, "error: {e}");
        return EXIT_USAGE;
    }
    if report.satisfied(&sc.tolerances) {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

fn exit_for(e: &Error) -> i32 {
    if e.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_USAGE
    }
}

fn demo_command(name: &str, format: DemoFormat, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let report = match demo::run_demo(name, &Tolerances::default()) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_for(&e);
        }
    };
    let written = match format {
        DemoFormat::Text => writeln!(out, "{report}"),
        DemoFormat::Json => serde_json::to_string_pretty(&report).map_err(io::Error::from).and_then(|t| writeln!(out, "{t}")),
    };
    if written.is_err() {
        return EXIT_USAGE;
    }
    if report.passed {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams. Returns the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match &cli.command {
        Command::Verify(v) => sweep_command(v.mode, &v.sweep, out, err),
        Command::Compare(s) => sweep_command(SweepMode::OzawaChain, s, out, err),
        Command::Demo { name, format } => demo_command(name, *format, out, err),
        Command::Case { path, out: out_path } => case_command(path, out_path.as_deref(), out, err),
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("uqrel").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn tolerance_overrides() {
        let t = parse_tolerances(&["1e-6".into(), "pinv=1e-12".into()]).unwrap();
        assert_eq!((t.num, t.pinv), (1e-6, 1e-12));
        assert!(parse_tolerances(&["bogus=1".into()]).is_err());
        assert!(parse_tolerances(&["-1".into()]).is_err());
    }

    #[test]
    fn zero_trials_is_a_usage_error() {
        let (code, _, err) = run(&["verify", "--mode", "robertson", "--trials", "0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("--trials"));
    }

    #[test]
    fn help_and_unknown_flags() {
        assert_eq!(run(&["--help"]).0, EXIT_OK);
        assert_eq!(run(&["verify", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["demo", "nope"]).0, EXIT_USAGE);
    }

    #[test]
    fn compare_reports_tightest_links() {
        let (code, out, err) = run(&["compare", "--trials", "20", "--seed", "3"]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.starts_with(crate::report::CHAIN_HEADER));
        assert!(err.contains("tightest_counts"));
    }

    #[test]
    fn json_format_wraps_summary_and_rows() {
        let (code, out, _) = run(&["verify", "--mode", "properties", "--trials", "3", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["summary"]["trials"], 3);
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert!(v["rows"][0].get("decomposition").is_some());
    }
}

//! Command-line front end.
//!
//! Exit codes: 0 stable, 1 unstable (`check` only), 2 unreadable or invalid
//! input, 3 internal failure. Diagnostics go to stderr as
//! `jobmarket: error[<code>]: <context>: <message>`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::format::{InstanceFile, OutcomeFile};
use crate::gen::{fixed_salary_instance, random_instance, GenConfig};
use crate::market::MarketInstance;
use crate::solver::{self, trace, FloorRule, SolverConfig, SolverError};
use crate::verify::{check_stability, Ps2Domain};

pub const EXIT_STABLE: i32 = 0;
pub const EXIT_UNSTABLE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

pub const MAX_GEN_AGENTS: usize = 1000;
pub const MAX_GEN_QUOTA: usize = 100;
pub const MAX_GEN_SPAN: i64 = 1000;

#[derive(Debug, Parser)]
#[command(
    name = "jobmarket",
    version,
    about = "Stable job allocation with bounded integer salaries"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance file, or every *.json file in a directory.
    Solve(SolveArgs),
    /// Check an outcome against its instance.
    Check(CheckArgs),
    /// Write a random instance.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum X1Arg {
    Occupancy,
    Nonempty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ps2Arg {
    Unmatched,
    All,
}

impl From<Ps2Arg> for Ps2Domain {
    fn from(v: Ps2Arg) -> Self {
        match v {
            Ps2Arg::Unmatched => Ps2Domain::Unmatched,
            Ps2Arg::All => Ps2Domain::All,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Instance file or directory of instance files.
    pub input: PathBuf,
    /// Outcome file (single instance); stdout when omitted.
    #[arg(long, conflicts_with = "out_dir")]
    pub out: Option<PathBuf>,
    /// Output directory for `<name>.outcome.json` (required for a directory input).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Trace file, or a directory for `<name>.trace.jsonl` in batch mode.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Re-check the solver's invariants after every step.
    #[arg(long, value_enum, default_value = "on")]
    pub assert_invariants: Switch,
    /// How many workers a firm matched last round must keep.
    #[arg(long, value_enum, default_value = "occupancy")]
    pub x1: X1Arg,
    /// Pairs searched for blocking salaries in the self-check.
    #[arg(long, value_enum, default_value = "unmatched")]
    pub ps2_domain: Ps2Arg,
    /// Worker threads for directory input.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Instance file, or directory of instance files.
    pub instance: PathBuf,
    /// Outcome file, or directory holding `<name>.outcome.json` per instance.
    pub outcome: PathBuf,
    #[arg(long, value_enum, default_value = "unmatched")]
    pub ps2_domain: Ps2Arg,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub seed: u64,
    /// Number of workers; random in 1..=8 when omitted.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Number of firms; random in 1..=4 when omitted.
    #[arg(long)]
    pub firms: Option<usize>,
    #[arg(long, default_value_t = 3)]
    pub max_quota: usize,
    /// Largest salary range width of a pair.
    #[arg(long, default_value_t = 12)]
    pub max_span: i64,
    /// Chance that a worker-firm combination is admissible.
    #[arg(long, default_value_t = 0.7)]
    pub density: f64,
    /// Fixed salaries, unit quotas and strict preferences.
    #[arg(long)]
    pub fixed_salary: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// One diagnostic line.
#[derive(Debug, Clone, PartialEq)]
struct Diagnostic {
    code: &'static str,
    context: String,
    message: String,
}

impl Diagnostic {
    fn new(code: &'static str, context: impl Into<String>, message: impl ToString) -> Self {
        Diagnostic {
            code,
            context: context.into(),
            message: message.to_string(),
        }
    }

    fn render(&self) -> String {
        if self.context.is_empty() {
            format!("jobmarket: error[{}]: {}\n", self.code, self.message)
        } else {
            format!("jobmarket: error[{}]: {}: {}\n", self.code, self.context, self.message)
        }
    }
}

/// Output of one file, buffered so batch runs print in a fixed order.
#[derive(Debug, Default)]
struct Report {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Report {
    fn fail(&mut self, code: i32, d: Diagnostic) {
        self.code = self.code.max(code);
        self.stderr.push_str(&d.render());
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_STABLE };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let reports = match cli.command {
        Command::Solve(a) => cmd_solve(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Gen(a) => vec![cmd_gen(&a)],
    };
    let mut code = EXIT_STABLE;
    for r in reports {
        let _ = stdout.write_all(r.stdout.as_bytes());
        let _ = stderr.write_all(r.stderr.as_bytes());
        code = code.max(r.code);
    }
    let _ = stdout.flush();
    code
}

fn read_instance(path: &Path, report: &mut Report) -> Option<MarketInstance> {
    let ctx = path.display().to_string();
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("io", ctx, e));
            return None;
        }
    };
    let raw = match InstanceFile::from_json(&text) {
        Ok(r) => r,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("parse", ctx, e));
            return None;
        }
    };
    match raw.validate() {
        Ok(inst) => Some(inst),
        Err(errors) => {
            for v in errors.0 {
                report.fail(EXIT_INPUT, Diagnostic::new("invalid-instance", ctx.clone(), v));
            }
            None
        }
    }
}

fn write_file(path: &Path, contents: &str, report: &mut Report) -> bool {
    match fs::write(path, contents) {
        Ok(()) => true,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("io", path.display().to_string(), e));
            false
        }
    }
}

/// Sorted `*.json` files of `dir`, skipping outcome files.
fn instance_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file() && p.extension().is_some_and(|x| x == "json") && !p.to_string_lossy().ends_with(".outcome.json")
        })
        .collect();
    files.sort();
    Ok(files)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool, Diagnostic> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Diagnostic::new("internal", "", e))
}

fn batch<F>(files: &[PathBuf], jobs: usize, work: F) -> Vec<Report>
where
    F: Fn(&Path) -> Report + Sync,
{
    match thread_pool(jobs) {
        Ok(pool) => pool.install(|| files.par_iter().map(|f| work(f)).collect()),
        Err(d) => {
            let mut r = Report::default();
            r.fail(EXIT_INTERNAL, d);
            vec![r]
        }
    }
}

fn solver_config(args: &SolveArgs) -> SolverConfig {
    SolverConfig {
        assert_invariants: args.assert_invariants == Switch::On,
        floor_rule: match args.x1 {
            X1Arg::Occupancy => FloorRule::Occupancy,
            X1Arg::Nonempty => FloorRule::Nonempty,
        },
        ..SolverConfig::default()
    }
}

/// Solves one file. `out` of `None` prints the outcome.
fn solve_one(input: &Path, out: Option<&Path>, trace_path: Option<&Path>, args: &SolveArgs) -> Report {
    let mut report = Report::default();
    let ctx = input.display().to_string();
    let Some(instance) = read_instance(input, &mut report) else {
        return report;
    };
    let solution = match solver::run(&instance, solver_config(args)) {
        Ok(s) => s,
        Err(e) => {
            let code = match e {
                SolverError::Invariant { .. } => "invariant",
                _ => "internal",
            };
            report.fail(EXIT_INTERNAL, Diagnostic::new(code, ctx, e));
            return report;
        }
    };
    let verdict = check_stability(&instance, &solution.outcome, args.ps2_domain.into());
    let stable = verdict.is_stable();
    let file = OutcomeFile::from_outcome(&instance, &solution.outcome, solution.iterations, stable);
    if let Some(path) = trace_path {
        let mut buf = Vec::new();
        trace::write_jsonl(&mut buf, &solution.trace).expect("writing to memory");
        write_file(path, &String::from_utf8_lossy(&buf), &mut report);
    }
    match out {
        Some(path) => {
            write_file(path, &file.to_json(), &mut report);
        }
        None => report.stdout.push_str(&file.to_json()),
    }
    if !stable {
        report.fail(
            EXIT_INTERNAL,
            Diagnostic::new("unstable-result", ctx, first_violation(&verdict)),
        );
    }
    report
}

fn first_violation(verdict: &crate::verify::StabilityReport) -> String {
    if let Some(v) = verdict.ps1.first() {
        format!("ps1 {}", serde_json::to_string(v).expect("serializes"))
    } else if let Some(b) = verdict.ps2.first() {
        format!("ps2 {}", serde_json::to_string(b).expect("serializes"))
    } else {
        "stable".into()
    }
}

fn cmd_solve(args: &SolveArgs) -> Vec<Report> {
    if !args.input.is_dir() {
        return vec![solve_one(&args.input, args.out.as_deref(), args.trace.as_deref(), args)];
    }
    let mut setup = Report::default();
    let Some(out_dir) = args.out_dir.as_deref() else {
        setup.fail(
            EXIT_INPUT,
            Diagnostic::new(
                "usage",
                args.input.display().to_string(),
                "directory input needs --out-dir",
            ),
        );
        return vec![setup];
    };
    for dir in std::iter::once(out_dir).chain(args.trace.as_deref()) {
        if let Err(e) = fs::create_dir_all(dir) {
            setup.fail(EXIT_INPUT, Diagnostic::new("io", dir.display().to_string(), e));
            return vec![setup];
        }
    }
    let files = match instance_files(&args.input) {
        Ok(f) => f,
        Err(e) => {
            setup.fail(EXIT_INPUT, Diagnostic::new("io", args.input.display().to_string(), e));
            return vec![setup];
        }
    };
    batch(&files, args.jobs, |f| {
        let name = stem(f);
        let out = out_dir.join(format!("{name}.outcome.json"));
        let tr = args.trace.as_ref().map(|d| d.join(format!("{name}.trace.jsonl")));
        solve_one(f, Some(&out), tr.as_deref(), args)
    })
}

fn check_one(instance_path: &Path, outcome_path: &Path, domain: Ps2Domain) -> Report {
    let mut report = Report::default();
    let Some(instance) = read_instance(instance_path, &mut report) else {
        return report;
    };
    let ctx = outcome_path.display().to_string();
    let text = match fs::read_to_string(outcome_path) {
        Ok(t) => t,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("io", ctx, e));
            return report;
        }
    };
    let file = match OutcomeFile::from_json(&text) {
        Ok(f) => f,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("parse", ctx, e));
            return report;
        }
    };
    let outcome = match file.to_outcome(&instance) {
        Ok(o) => o,
        Err(e) => {
            report.fail(EXIT_INPUT, Diagnostic::new("mismatch", ctx, e));
            return report;
        }
    };
    let verdict = check_stability(&instance, &outcome, domain);
    if verdict.is_stable() {
        report.stdout.push_str(&format!("{ctx}: pass\n"));
    } else {
        report.code = EXIT_UNSTABLE;
        report
            .stdout
            .push_str(&format!("{ctx}: {}\n", first_violation(&verdict)));
    }
    if file.stable != verdict.is_stable() {
        report.stderr.push_str(&format!(
            "jobmarket: warning[stable-flag]: {ctx}: file says stable = {}, check says {}\n",
            file.stable,
            verdict.is_stable()
        ));
    }
    report
}

fn cmd_check(args: &CheckArgs) -> Vec<Report> {
    let domain = args.ps2_domain.into();
    if !args.instance.is_dir() {
        return vec![check_one(&args.instance, &args.outcome, domain)];
    }
    let files = match instance_files(&args.instance) {
        Ok(f) => f,
        Err(e) => {
            let mut r = Report::default();
            r.fail(
                EXIT_INPUT,
                Diagnostic::new("io", args.instance.display().to_string(), e),
            );
            return vec![r];
        }
    };
    batch(&files, args.jobs, |f| {
        let outcome = args.outcome.join(format!("{}.outcome.json", stem(f)));
        check_one(f, &outcome, domain)
    })
}

fn gen_config(args: &GenArgs) -> Result<GenConfig, String> {
    let count = |v: Option<usize>, default: std::ops::RangeInclusive<usize>, what: &str| match v {
        None => Ok(default),
        Some(n) if (1..=MAX_GEN_AGENTS).contains(&n) => Ok(n..=n),
        Some(n) => Err(format!("--{what} {n} outside 1..={MAX_GEN_AGENTS}")),
    };
    let defaults = GenConfig::default();
    let cfg = GenConfig {
        workers: count(args.workers, defaults.workers.clone(), "workers")?,
        firms: count(args.firms, defaults.firms.clone(), "firms")?,
        max_quota: args.max_quota,
        max_span: args.max_span,
        max_total_span: None,
        density: args.density,
    };
    if !(1..=MAX_GEN_QUOTA).contains(&cfg.max_quota) {
        return Err(format!("--max-quota {} outside 1..={MAX_GEN_QUOTA}", cfg.max_quota));
    }
    if !(0..=MAX_GEN_SPAN).contains(&cfg.max_span) {
        return Err(format!("--max-span {} outside 0..={MAX_GEN_SPAN}", cfg.max_span));
    }
    if !(0.0..=1.0).contains(&cfg.density) {
        return Err(format!("--density {} outside [0, 1]", cfg.density));
    }
    Ok(cfg)
}

fn cmd_gen(args: &GenArgs) -> Report {
    let mut report = Report::default();
    let cfg = match gen_config(args) {
        Ok(c) => c,
        Err(msg) => {
            report.fail(EXIT_INPUT, Diagnostic::new("usage", "", msg));
            return report;
        }
    };
    let raw = if args.fixed_salary {
        fixed_salary_instance(args.seed, cfg.workers, cfg.firms)
    } else {
        random_instance(args.seed, &cfg)
    };
    let text = raw.to_json();
    match &args.out {
        Some(path) => {
            write_file(path, &text, &mut report);
        }
        None => report.stdout.push_str(&text),
    }
    report
}

//! Command-line driver: sampling, end-to-end runs, sweeps, estimates and verification.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::absorb::{pancyclic_witness, AbsorbConfig, Witness};
use crate::config_model::trial_rng;
use crate::ledger::{Selection, Strictness};
use crate::matching::{bipartite_obstruction, matching_pancyclic_witness, Obstruction, PipelineConfig, Route};
use crate::perturb::{
    build_instance, make_extremal, read_instance, small_side, write_instance, ExtremalSpec, Family, InstanceMeta,
    PerturbError, PerturbedInstance,
};
use crate::verify::{
    is_pancyclic_bruteforce, kr_expected_components, kr_threshold_root, validate_cycle, CycleCertificate,
    BRUTE_FORCE_MAX_N,
};

/// Prefix of the environment variables that stand in for flags.
pub const ENV_PREFIX: &str = "PANCYCLIC_";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Version plus `git describe` output when available at build time.
pub fn build_id() -> String {
    let git = option_env!("PANCYCLIC_GIT_DESCRIBE").unwrap_or("unknown");
    format!("{} {} ({git})", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failed(_) => EXIT_FAILURE,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PerturbError> for CliError {
    fn from(e: PerturbError) -> Self {
        match e {
            PerturbError::Io(_) | PerturbError::EdgeList(_) | PerturbError::Sidecar(_) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Sample,
    Run,
    Sweep,
    Estimate,
    Verify,
}

#[derive(Debug, Parser)]
#[command(name = "perturbed-pancyclic", version, about = "Cycles of every length in randomly perturbed dense graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Write H, G and a JSON sidecar for one instance.
    Sample(Flags),
    /// Run the pancyclicity construction over several trials.
    Run(Flags),
    /// Success rate over a grid of alpha values, as CSV.
    Sweep(Flags),
    /// Expected component counts and threshold roots for K_r-factors.
    Estimate(Flags),
    /// Check a stored instance, or the cycles of a stored report against it.
    Verify(Flags),
}

#[derive(Clone, Debug, clap::Args)]
pub struct Flags {
    #[arg(long, env = "PANCYCLIC_N", default_value_t = 300)]
    pub n: usize,
    #[arg(long, env = "PANCYCLIC_D", default_value_t = 2)]
    pub d: usize,
    #[arg(long, env = "PANCYCLIC_ALPHA", default_value_t = 0.45)]
    pub alpha: f64,
    #[arg(long, env = "PANCYCLIC_EPS", default_value_t = 0.1)]
    pub eps: f64,
    #[arg(long, env = "PANCYCLIC_ETA", default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, env = "PANCYCLIC_FAMILY", default_value = "complete")]
    pub family: String,
    #[arg(long, env = "PANCYCLIC_TRIALS", default_value_t = 1)]
    pub trials: u64,
    #[arg(long, env = "PANCYCLIC_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Abort on the first exceeded bound and exit with status 3 on any failure.
    #[arg(long, env = "PANCYCLIC_STRICT")]
    pub strict: bool,
    /// Output file, or directory for `sample`.
    #[arg(long, env = "PANCYCLIC_OUT")]
    pub out: Option<PathBuf>,
    /// Sweep grid `start:end:step`.
    #[arg(long, env = "PANCYCLIC_ALPHA_GRID")]
    pub alpha_grid: Option<String>,
    /// Largest clique size in the estimate table.
    #[arg(long, env = "PANCYCLIC_R_MAX", default_value_t = 10)]
    pub r_max: usize,
    /// Instance directory for `verify`.
    #[arg(long, env = "PANCYCLIC_INPUT")]
    pub input: Option<PathBuf>,
    /// Report whose cycles `verify` re-checks.
    #[arg(long, env = "PANCYCLIC_REPORT")]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub n: usize,
    pub d: usize,
    pub alpha: f64,
    pub eps: f64,
    pub eta: f64,
    pub family: String,
    pub trials: u64,
    pub seed: u64,
    pub strictness: Strictness,
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<(f64, f64, f64)>,
    pub r_max: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
}

fn parse_grid(s: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("bad alpha grid {s:?}"))))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [a, b, step] if step > 0.0 => Ok((a, b, step)),
        _ => Err(CliError::Usage(format!("alpha grid must be start:end:step with step > 0, got {s:?}"))),
    }
}

impl ExperimentConfig {
    pub fn from_flags(command: Command, f: &Flags) -> Result<Self, CliError> {
        let cfg = ExperimentConfig {
            command,
            n: f.n,
            d: f.d,
            alpha: f.alpha,
            eps: f.eps,
            eta: f.eta,
            family: f.family.clone(),
            trials: f.trials,
            seed: f.seed,
            strictness: if f.strict { Strictness::Strict } else { Strictness::Experiment },
            out: f.out.clone(),
            alpha_grid: f.alpha_grid.as_deref().map(parse_grid).transpose()?,
            r_max: f.r_max,
            input: f.input.clone(),
            report: f.report.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if self.n < 3 {
            return bad(format!("n = {} must be at least 3", self.n));
        }
        if !(self.d == 1 || self.d == 2) {
            return bad(format!("d = {} must be 1 or 2", self.d));
        }
        if self.d == 1 && self.n % 2 == 1 {
            return bad("a perfect matching needs even n".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1]", self.alpha));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) || !(self.eta > 0.0 && self.eta < 1.0) {
            return bad("eps and eta must lie in (0, 1)".into());
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        if self.r_max == 0 {
            return bad("r-max must be positive".into());
        }
        let family = Family::parse(&self.family, self.alpha)?;
        ExtremalSpec { family, n: self.n }.validate()?;
        Ok(())
    }

    pub fn family(&self) -> Family {
        Family::parse(&self.family, self.alpha).expect("validated")
    }

    /// The same configuration at another alpha.
    pub fn with_alpha(&self, alpha: f64) -> Self {
        ExperimentConfig { alpha, ..self.clone() }
    }
}

/// One instance of `H ∪ G` for trial `trial`.
pub fn trial_instance(cfg: &ExperimentConfig, trial: u64) -> Result<PerturbedInstance, PerturbError> {
    let mut rng = trial_rng(cfg.seed, trial);
    let h = make_extremal(ExtremalSpec { family: cfg.family(), n: cfg.n }, &mut rng)?;
    build_instance(h, cfg.d, &mut rng)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: u64,
    pub complete: bool,
    pub hamiltonian: bool,
    pub found: usize,
    /// Lengths without a certified cycle.
    pub missing: Vec<usize>,
    /// Failure count per stage.
    pub failure_stages: BTreeMap<String, usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub route: Option<Route>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
    pub absorbers: usize,
    pub flagged_bounds: Vec<String>,
    pub wall_ms: u128,
    #[serde(skip)]
    pub cycles: Vec<CycleCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub build: String,
    pub complete: usize,
    pub hamiltonian: usize,
    pub certified_obstructions: usize,
    pub trials: Vec<TrialReport>,
    pub wall_ms: u128,
}

fn summarize_witness(trial: u64, w: &Witness) -> TrialReport {
    let found: Vec<bool> = {
        let mut f = vec![false; w.n + 1];
        for c in &w.cycles {
            f[c.k] = true;
        }
        f
    };
    let mut failure_stages = BTreeMap::new();
    for f in &w.failures {
        *failure_stages.entry(f.stage.clone()).or_insert(0) += 1;
    }
    TrialReport {
        trial,
        complete: w.is_complete(),
        hamiltonian: w.n >= 3 && found[w.n],
        found: w.cycles.len(),
        missing: (3..=w.n).filter(|&k| !found[k]).collect(),
        failure_stages,
        first_failure: w.failures.first().map(|f| format!("k = {} [{}]: {}", f.k, f.stage, f.reason)),
        route: None,
        obstruction: None,
        absorbers: w.absorbers,
        flagged_bounds: w.ledger.flagged().map(|e| e.name.clone()).collect(),
        wall_ms: 0,
        cycles: w.cycles.clone(),
    }
}

/// Runs one trial end to end; every reported cycle has passed the validator.
pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<TrialReport, CliError> {
    let start = Instant::now();
    let inst = trial_instance(cfg, trial)?;
    let mut rng = trial_rng(cfg.seed, trial);
    // the instance stream and the algorithm stream are kept apart
    rng.set_stream(u64::MAX - trial);
    let mut report = if cfg.d == 2 {
        let acfg = AbsorbConfig { selection: Selection::Random, strictness: cfg.strictness, absorbers: None };
        summarize_witness(trial, &pancyclic_witness(&inst, None, &acfg, &mut rng))
    } else {
        let pcfg = PipelineConfig { eps: cfg.eps, eta: cfg.eta, strictness: cfg.strictness, ..Default::default() };
        let run = matching_pancyclic_witness(&inst, &pcfg, &mut rng);
        let mut r = summarize_witness(trial, &run.witness);
        r.route = Some(run.route);
        r
    };
    if let Family::UnbalancedBipartite { alpha } = cfg.family() {
        let a = small_side(cfg.n, alpha);
        let in_b: Vec<bool> = (0..cfg.n).map(|v| v >= a).collect();
        report.obstruction = Some(bipartite_obstruction(inst.g(), &in_b, alpha));
    }
    report.wall_ms = start.elapsed().as_millis();
    Ok(report)
}

/// Runs all trials in parallel and merges them by trial index.
pub fn cmd_run(cfg: &ExperimentConfig) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let trials: Vec<TrialReport> =
        (0..cfg.trials).into_par_iter().map(|t| run_trial(cfg, t)).collect::<Result<Vec<_>, _>>()?;
    Ok(RunReport {
        config: cfg.clone(),
        build: build_id(),
        complete: trials.iter().filter(|t| t.complete).count(),
        hamiltonian: trials.iter().filter(|t| t.hamiltonian).count(),
        certified_obstructions: trials.iter().filter(|t| t.obstruction.is_some_and(|o| o.is_certified())).count(),
        trials,
        wall_ms: start.elapsed().as_millis(),
    })
}

/// Writes `H.txt`, `G.txt` and `instance.json` for trial 0.
pub fn cmd_sample(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.out.clone().ok_or_else(|| CliError::Usage("sample needs --out DIR".into()))?;
    let inst = trial_instance(cfg, 0)?;
    let meta = InstanceMeta { n: cfg.n, d: cfg.d, alpha: cfg.alpha, seed: cfg.seed, family: cfg.family.clone() };
    write_instance(&dir, &inst, &meta)?;
    Ok(dir)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n: usize,
    pub d: usize,
    pub family: String,
    pub trials: u64,
    pub complete: usize,
    pub success_rate: f64,
    pub hamiltonian_rate: f64,
    pub obstruction_rate: f64,
}

pub const SWEEP_HEADER: [&str; 9] =
    ["alpha", "n", "d", "family", "trials", "complete", "success_rate", "hamiltonian_rate", "obstruction_rate"];

/// Grid values `start, start+step, …` up to `end` inclusive.
pub fn grid_values(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = if end < start { 0 } else { ((end - start) / step + 1e-9).floor() as usize + 1 };
    (0..count).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>, CliError> {
    let (a, b, step) = cfg.alpha_grid.unwrap_or((cfg.alpha, cfg.alpha, 1.0));
    let mut rows = Vec::new();
    for alpha in grid_values(a, b, step) {
        let cell = cfg.with_alpha(alpha);
        if let Err(e) = cell.validate() {
            // a grid may run past the family's admissible range
            eprintln!("skipping alpha = {alpha}: {e}");
            continue;
        }
        let rep = cmd_run(&cell)?;
        let t = cfg.trials as f64;
        rows.push(SweepRow {
            alpha,
            n: cfg.n,
            d: cfg.d,
            family: cfg.family.clone(),
            trials: cfg.trials,
            complete: rep.complete,
            success_rate: rep.complete as f64 / t,
            hamiltonian_rate: rep.hamiltonian as f64 / t,
            obstruction_rate: rep.certified_obstructions as f64 / t,
        });
    }
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateRow {
    pub r: usize,
    pub threshold: f64,
    /// Expected number of components at the configured `n` and `alpha`.
    pub expected_components: f64,
}

pub fn cmd_estimate(cfg: &ExperimentConfig) -> Result<Vec<EstimateRow>, CliError> {
    if cfg.alpha >= 1.0 {
        return Err(CliError::Usage("estimate needs alpha < 1".into()));
    }
    Ok((1..=cfg.r_max)
        .map(|r| EstimateRow {
            r,
            threshold: kr_threshold_root(r),
            expected_components: kr_expected_components(cfg.n, r, cfg.alpha).1,
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub n: usize,
    pub checked_cycles: usize,
    pub invalid_cycles: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pancyclic: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub missing_lengths: Option<Vec<usize>>,
}

#[derive(Deserialize)]
struct StoredCycles {
    cycles: Vec<CycleCertificate>,
}

/// Re-validates stored cycles against an instance, or decides pancyclicity
/// exhaustively for small instances.
pub fn cmd_verify(cfg: &ExperimentConfig) -> Result<VerifyReport, CliError> {
    let dir = cfg.input.clone().ok_or_else(|| CliError::Usage("verify needs --input DIR".into()))?;
    let (inst, meta) = read_instance(&dir)?;
    let mut rep =
        VerifyReport { n: meta.n, checked_cycles: 0, invalid_cycles: vec![], pancyclic: None, missing_lengths: None };
    if let Some(path) = &cfg.report {
        let stored: StoredCycles = serde_json::from_str(&fs::read_to_string(path)?)?;
        for c in &stored.cycles {
            rep.checked_cycles += 1;
            if let Err(v) = validate_cycle(inst.union(), c) {
                rep.invalid_cycles.push(format!("k = {}: {v}", c.k));
            }
        }
    } else if inst.n() <= BRUTE_FORCE_MAX_N {
        let lengths = is_pancyclic_bruteforce(inst.union()).map_err(|e| CliError::Usage(e.to_string()))?;
        rep.pancyclic = Some(lengths.is_pancyclic());
        rep.missing_lengths = Some((3..=inst.n()).filter(|&k| !lengths.contains(k)).collect());
    } else {
        return Err(CliError::Usage(format!(
            "n = {} is too large for exhaustive search; pass --report with stored cycles",
            inst.n()
        )));
    }
    Ok(rep)
}

/// Where `run --out FILE` puts the cycles of trial 0.
pub fn cycles_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map_or("report".into(), |s| s.to_string_lossy().into_owned());
    out.with_file_name(format!("{stem}.cycles.json"))
}

/// Cycles of one trial, in the format `verify --report` reads.
pub fn cycles_json(trial: &TrialReport) -> serde_json::Value {
    serde_json::json!({ "trial": trial.trial, "cycles": trial.cycles })
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => fs::write(p, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}

/// Parses arguments and dispatches; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32, CliError> {
    let (command, flags) = match cli.command {
        Sub::Sample(f) => (Command::Sample, f),
        Sub::Run(f) => (Command::Run, f),
        Sub::Sweep(f) => (Command::Sweep, f),
        Sub::Estimate(f) => (Command::Estimate, f),
        Sub::Verify(f) => (Command::Verify, f),
    };
    let cfg = ExperimentConfig::from_flags(command, &flags)?;
    let strict = cfg.strictness == Strictness::Strict;
    match command {
        Command::Sample => {
            let dir = cmd_sample(&cfg)?;
            println!("wrote {}", dir.display());
            Ok(EXIT_OK)
        }
        Command::Run => {
            let rep = cmd_run(&cfg)?;
            write_json(cfg.out.as_deref(), &rep)?;
            if let (Some(out), Some(first)) = (&cfg.out, rep.trials.first()) {
                write_json(Some(&cycles_path(out)), &cycles_json(first))?;
            }
            eprintln!(
                "{} of {} trials complete, {} Hamiltonian, {} certified obstructions ({} ms)",
                rep.complete,
                rep.trials.len(),
                rep.hamiltonian,
                rep.certified_obstructions,
                rep.wall_ms
            );
            Ok(if strict && rep.complete < rep.trials.len() { EXIT_FAILURE } else { EXIT_OK })
        }
        Command::Sweep => {
            let rows = cmd_sweep(&cfg)?;
            match &cfg.out {
                Some(p) => write_sweep_csv(fs::File::create(p)?, &rows)?,
                None => write_sweep_csv(std::io::stdout().lock(), &rows)?,
            }
            let failed = rows.iter().any(|r| r.complete < r.trials as usize);
            Ok(if strict && failed { EXIT_FAILURE } else { EXIT_OK })
        }
        Command::Estimate => {
            let rows = cmd_estimate(&cfg)?;
            match &cfg.out {
                Some(p) => {
                    let mut w = csv::Writer::from_path(p)?;
                    for r in &rows {
                        w.serialize(r)?;
                    }
                    w.flush()?;
                }
                None => {
                    println!("{:>3}  {:>10}  {:>14}", "r", "threshold", "E[components]");
                    for r in &rows {
                        println!("{:>3}  {:>10.6}  {:>14.3}", r.r, r.threshold, r.expected_components);
                    }
                }
            }
            Ok(EXIT_OK)
        }
        Command::Verify => {
            let rep = cmd_verify(&cfg)?;
            write_json(cfg.out.as_deref(), &rep)?;
            let bad = !rep.invalid_cycles.is_empty() || rep.pancyclic == Some(false);
            Ok(if strict && bad { EXIT_FAILURE } else { EXIT_OK })
        }
    }
}

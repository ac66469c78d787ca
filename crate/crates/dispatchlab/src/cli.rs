//! Command-line front end.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::equivalence;
use crate::policies::{self, build, Forecast, Objective, PolicyConfig};
use crate::scenarios::{self, ScenarioSpec};
use crate::simulator::{self, SimulationResult, StepError};
use crate::system::{NetLoadProfile, PenaltyConfig, SystemSpec};
use crate::DispatchError;

#[derive(Debug, Parser)]
#[command(name = "dispatchlab", version, about = "LAED and ramp-product dispatch simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one policy over one profile.
    Simulate(SimulateArgs),
    /// Sweep policies × load levels and write a loss table.
    Compare(CompareArgs),
    /// Compare LAED and enhanced-RP single-step regions on random instances.
    EquivCheck(EquivArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in fleet (two_gen, ten_gen) or a system JSON file.
    #[arg(long, default_value = "two_gen")]
    pub system: String,
    /// Scenario `kind[:key=value,...]`: spike, decreasing_ramp, fig1, fig2, double_peak, file:<csv>.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Net-load profile CSV (overrides --scenario).
    #[arg(long)]
    pub profile: Option<PathBuf>,
    /// Shed penalty, $/MWh.
    #[arg(long, default_value_t = 2500.0)]
    pub penalty: f64,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Laed,
    Rp,
}

#[derive(Debug, Clone, Args)]
pub struct PolicyArgs {
    #[arg(long, value_enum, default_value = "laed")]
    pub policy: PolicyArg,
    /// Look-ahead intervals W (RP defaults to its longest duration).
    #[arg(long)]
    pub window: Option<usize>,
    /// RP durations in intervals, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub durations: Vec<usize>,
    /// Add ramp-increment constraints between consecutive durations.
    #[arg(long)]
    pub increment: bool,
    /// Add rolling-difference constraints between consecutive durations.
    #[arg(long = "rolling-diff")]
    pub rolling_diff: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub policy: PolicyArgs,
    /// Write the step-0 LP (or the failing step's LP) to this file.
    #[arg(long)]
    pub dump_lp: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mean net-load levels (MW), comma separated.
    #[arg(long, value_delimiter = ',')]
    pub levels: Vec<f64>,
    /// Policy, repeatable: `laed:<W>` or `rp:<d1>+<d2>...[:inc][:roll]`.
    #[arg(long = "policies", short = 'p')]
    pub policies: Vec<String>,
    /// Run-configuration JSON; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Add a full-horizon clairvoyant lower-bound column.
    #[arg(long)]
    pub clairvoyant: bool,
}

#[derive(Debug, Clone, Args)]
pub struct EquivArgs {
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub max_gens: usize,
    #[arg(long, default_value_t = 4)]
    pub max_window: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
}

/// Everything a comparison grid needs; loadable from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default = "default_system")]
    pub system: String,
    #[serde(default)]
    pub scenario: Option<String>,
    #[serde(default)]
    pub profile: Option<PathBuf>,
    pub policies: Vec<PolicyConfig>,
    #[serde(default)]
    pub levels: Vec<f64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}

fn default_system() -> String {
    "two_gen".into()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, DispatchError> {
        let text = std::fs::read_to_string(path).map_err(|e| DispatchError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), DispatchError> {
        if self.policies.is_empty() {
            return Err(DispatchError::Config("policy list is empty".into()));
        }
        self.policies.iter().try_for_each(|p| p.validate())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
    #[error("{policy}: {source}")]
    Step { policy: String, source: StepError },
}

impl PolicyArgs {
    pub fn to_config(&self, penalty: f64) -> Result<PolicyConfig, DispatchError> {
        let mut cfg = match self.policy {
            PolicyArg::Laed => {
                if !self.durations.is_empty() {
                    return Err(DispatchError::Config("--durations applies to --policy rp only".into()));
                }
                PolicyConfig::laed(self.window.unwrap_or(2))
            }
            PolicyArg::Rp => {
                let d = match (&self.durations[..], self.window) {
                    ([], Some(w)) => vec![w],
                    ([], None) => return Err(DispatchError::Config("--policy rp needs --durations".into())),
                    (d, _) => d.to_vec(),
                };
                let mut c = PolicyConfig::rp(&d);
                if let Some(w) = self.window {
                    c = c.with_window(w);
                }
                c.increment_constraints = self.increment;
                c.rolling_difference_constraints = self.rolling_diff;
                c
            }
        };
        cfg = cfg.with_penalty(penalty);
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `laed:<W>` or `rp:<d1>+<d2>...[:inc][:roll]`.
pub fn parse_policy(text: &str) -> Result<PolicyConfig, DispatchError> {
    let bad = || DispatchError::Config(format!("cannot parse policy '{text}'"));
    let mut parts = text.split(':');
    let kind = parts.next().ok_or_else(bad)?;
    let arg = parts.next().ok_or_else(bad)?;
    let cfg = match kind {
        "laed" => {
            if parts.next().is_some() {
                return Err(bad());
            }
            PolicyConfig::laed(arg.parse().map_err(|_| bad())?)
        }
        "rp" => {
            let d: Vec<usize> = arg.split('+').map(|x| x.parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
            let mut c = PolicyConfig::rp(&d);
            for flag in parts {
                match flag {
                    "inc" => c.increment_constraints = true,
                    "roll" => c.rolling_difference_constraints = true,
                    _ => return Err(bad()),
                }
            }
            c
        }
        _ => return Err(DispatchError::Config(format!("unknown policy kind '{kind}'"))),
    };
    cfg.validate()?;
    Ok(cfg)
}

fn base_profile(scenario: Option<&str>, profile: Option<&Path>) -> Result<(Option<ScenarioSpec>, NetLoadProfile), DispatchError> {
    if let Some(p) = profile {
        return Ok((None, scenarios::load_profile_csv(p)?));
    }
    let spec = ScenarioSpec::parse(
        scenario.ok_or_else(|| DispatchError::Config("give --scenario or --profile".into()))?,
    )?;
    let prof = scenarios::generate(&spec)?;
    Ok((Some(spec), prof))
}

fn at_level(spec: Option<&ScenarioSpec>, base: &NetLoadProfile, level: f64) -> Result<NetLoadProfile, DispatchError> {
    match spec {
        Some(ScenarioSpec::DoublePeak { .. }) => scenarios::generate(&ScenarioSpec::DoublePeak { mean: level }),
        _ => scenarios::scale_to_mean(base, level),
    }
}

fn create_dir(dir: &Path) -> Result<(), DispatchError> {
    std::fs::create_dir_all(dir).map_err(|e| DispatchError::Io(format!("{}: {e}", dir.display())))
}

fn level_label(level: f64) -> String {
    format!("{level}")
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let system = SystemSpec::resolve(&args.common.system)?;
    let penalty = PenaltyConfig { rho_s: args.common.penalty };
    penalty.check(&system)?;
    let cfg = args.policy.to_config(args.common.penalty)?;
    let (_, profile) = base_profile(args.common.scenario.as_deref(), args.common.profile.as_deref())?;
    let init = policies::initial_state(&system, &profile, penalty)?;
    if let Some(path) = &args.dump_lp {
        let cfg0 = cfg.truncated(profile.len() - 1);
        let p = build(&system, &init, &Forecast::window(&profile, 0, cfg0.window_w), &cfg0, Objective::Economic)?;
        write_text(path, &p.lp.to_lp_string())?;
    }
    let result = simulator::run(&system, &profile, &cfg, &init).map_err(|e| {
        if let (Some(path), Some(dump)) = (&args.dump_lp, &e.lp_dump) {
            if let Err(w) = write_text(path, dump) {
                log::error!("could not write LP dump: {w}");
            }
        }
        CliError::Step { policy: cfg.label(), source: e }
    })?;
    create_dir(&args.common.out)?;
    let path = args.common.out.join(format!("steps_{}.csv", cfg.slug()));
    result.write_csv(&system, &path)?;
    log::info!("wrote {}", path.display());
    println!("total_loss_mwh={:.4}", result.total_loss_mwh);
    Ok(0)
}

fn write_text(path: &Path, text: &str) -> Result<(), DispatchError> {
    std::fs::write(path, text).map_err(|e| DispatchError::Io(format!("{}: {e}", path.display())))
}

/// Merges `--config` with the command-line flags.
pub fn compare_config(args: &CompareArgs) -> Result<RunConfig, DispatchError> {
    let mut rc = match &args.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig {
            system: args.common.system.clone(),
            scenario: None,
            profile: None,
            policies: Vec::new(),
            levels: Vec::new(),
            out: None,
            seed: args.common.seed,
        },
    };
    if args.config.is_none() || args.common.system != default_system() {
        rc.system = args.common.system.clone();
    }
    if args.common.scenario.is_some() {
        rc.scenario = args.common.scenario.clone();
    }
    if args.common.profile.is_some() {
        rc.profile = args.common.profile.clone();
    }
    if !args.policies.is_empty() {
        rc.policies = args.policies.iter().map(|p| parse_policy(p)).collect::<Result<_, _>>()?;
    }
    if !args.levels.is_empty() {
        rc.levels = args.levels.clone();
    }
    if rc.out.is_none() || args.common.out != Path::new("out") {
        rc.out = Some(args.common.out.clone());
    }
    for p in &mut rc.policies {
        p.penalty = PenaltyConfig { rho_s: args.common.penalty };
    }
    rc.validate()?;
    Ok(rc)
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32, CliError> {
    let rc = compare_config(args)?;
    let system = SystemSpec::resolve(&rc.system)?;
    let penalty = PenaltyConfig { rho_s: args.common.penalty };
    penalty.check(&system)?;
    let (spec, base) = base_profile(rc.scenario.as_deref(), rc.profile.as_deref())?;
    let (labels, profiles): (Vec<String>, Vec<NetLoadProfile>) = if rc.levels.is_empty() {
        (vec![level_label(base.mean())], vec![base])
    } else {
        let profiles = rc.levels.iter().map(|&l| at_level(spec.as_ref(), &base, l)).collect::<Result<_, _>>()?;
        (rc.levels.iter().map(|&l| level_label(l)).collect(), profiles)
    };
    let grid = simulator::sweep(&system, &profiles, &rc.policies, penalty);
    let out = rc.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    create_dir(&out)?;
    create_dir(&out.join("steps"))?;

    let mut columns: Vec<String> = rc.policies.iter().map(|p| p.label()).collect();
    let mut table = Vec::with_capacity(profiles.len());
    let mut plot: Vec<(String, SimulationResult)> = Vec::new();
    for ((label, row), profile) in labels.iter().zip(grid).zip(&profiles) {
        let mut vals = Vec::with_capacity(row.len() + 1);
        for (cfg, res) in rc.policies.iter().zip(row) {
            let res = res.map_err(|e| CliError::Step { policy: format!("{} at level {label}", cfg.label()), source: e })?;
            res.write_csv(&system, &out.join("steps").join(format!("{label}_{}.csv", cfg.slug())))?;
            vals.push(res.total_loss_mwh);
            plot.push((format!("{label}/{}", cfg.slug()), res));
        }
        if args.clairvoyant {
            let init = policies::initial_state(&system, profile, penalty)?;
            vals.push(simulator::clairvoyant_lower_bound(&system, profile, &init)?);
        }
        table.push(vals);
    }
    if args.clairvoyant {
        columns.push("clairvoyant".into());
    }
    simulator::write_summary_csv(&out.join("summary.csv"), "level_mw", &labels, &columns, &table)?;
    let refs: Vec<(String, &SimulationResult)> = plot.iter().map(|(l, r)| (l.clone(), r)).collect();
    simulator::write_plot_csv(&out.join("plot_data.csv"), &system, &refs)?;

    println!("level_mw,{}", columns.join(","));
    for (l, vals) in labels.iter().zip(&table) {
        let v: Vec<String> = vals.iter().map(|x| format!("{x:.4}")).collect();
        println!("{l},{}", v.join(","));
    }
    Ok(0)
}

pub fn cmd_equiv_check(args: &EquivArgs) -> Result<i32, CliError> {
    if args.max_gens == 0 || args.max_window == 0 {
        return Err(DispatchError::Config("--max-gens and --max-window must be positive".into()).into());
    }
    let report = equivalence::run_trials(args.trials, args.seed, args.max_gens, args.max_window, args.tolerance)?;
    println!(
        "trials={} value_mismatches={} laed_to_rp_failures={} rp_to_laed_failures={} rejected_draws={}",
        report.trials,
        report.value_mismatches,
        report.laed_to_rp_failures,
        report.rp_to_laed_failures,
        report.rejected_draws
    );
    match report.worst_trial {
        Some(k) => println!("worst_discrepancy={:.6e} (trial {k})", report.worst_gap),
        None => println!("worst_discrepancy=0"),
    }
    println!("{}", if report.passed() { "PASS" } else { "FAIL" });
    Ok(if report.passed() { 0 } else { 1 })
}

/// Runs the parsed command; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::EquivCheck(a) => cmd_equiv_check(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

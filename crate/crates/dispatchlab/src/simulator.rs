//! Rolling-window dispatch and the operational security-loss metric.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::policies::{self, build, Forecast, Objective, PolicyConfig};
use crate::system::{DispatchState, NetLoadProfile, SystemSpec};
use crate::DispatchError;

const COMMIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub t_min: f64,
    pub demand: f64,
    pub committed_output: Vec<f64>,
    pub shed: f64,
    /// Committed-interval cost (energy plus shed penalty), $.
    pub objective: f64,
    pub rp_prices: Option<BTreeMap<usize, f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub steps: Vec<StepRecord>,
    pub total_loss_mwh: f64,
    pub policy: PolicyConfig,
    pub system_fingerprint: u64,
    pub profile_fingerprint: u64,
    pub dt_hours: f64,
}

#[derive(Debug, thiserror::Error)]
#[error("step {step}: {source}")]
pub struct StepError {
    pub step: usize,
    #[source]
    pub source: DispatchError,
    /// LP text of the failing step, when it could be built.
    pub lp_dump: Option<String>,
}

impl SimulationResult {
    pub fn shed_series(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.shed).collect()
    }

    pub fn write_csv(&self, system: &SystemSpec, path: &Path) -> Result<(), DispatchError> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t_min".to_string(), "demand_mw".into(), "shed_mw".into()];
        header.extend(system.generators.iter().map(|g| format!("g_{}", g.name)));
        header.push("objective_usd".into());
        w.write_record(&header)?;
        for s in &self.steps {
            let mut row = vec![format!("{}", s.t_min), format!("{}", s.demand), format!("{}", s.shed)];
            row.extend(s.committed_output.iter().map(|g| format!("{g}")));
            row.push(format!("{}", s.objective));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| DispatchError::Io(e.to_string()))?;
        Ok(())
    }
}

/// Total unserved energy in MWh: Δt · Σ max(0, shed).
pub fn security_loss(result: &SimulationResult) -> f64 {
    loss_mwh(result.steps.iter().map(|s| s.shed), result.dt_hours)
}

fn loss_mwh(shed: impl Iterator<Item = f64>, dt: f64) -> f64 {
    dt * shed.map(|s| s.max(0.0)).sum::<f64>()
}

fn check_commitment(
    system: &SystemSpec,
    state: &DispatchState,
    demand: f64,
    g: &[f64],
    shed: f64,
) -> Result<(), String> {
    for (i, gen) in system.generators.iter().enumerate() {
        let dg = g[i] - state.prev_output[i];
        if g[i] < gen.g_min - COMMIT_TOL || g[i] > gen.g_max + COMMIT_TOL {
            return Err(format!("{} output {} outside capacity", gen.name, g[i]));
        }
        if dg > gen.ramp_up + COMMIT_TOL || -dg > gen.ramp_down + COMMIT_TOL {
            return Err(format!("{} ramp {dg} exceeds limits", gen.name));
        }
    }
    let bal = demand - shed - g.iter().sum::<f64>();
    if bal.abs() > COMMIT_TOL || shed < -COMMIT_TOL {
        return Err(format!("balance residual {bal}, shed {shed}"));
    }
    Ok(())
}

/// Runs `config` over `profile`, committing only τ = 0 of each window.
pub fn run(
    system: &SystemSpec,
    profile: &NetLoadProfile,
    config: &PolicyConfig,
    initial: &DispatchState,
) -> Result<SimulationResult, StepError> {
    let fail = |step, source| StepError { step, source, lp_dump: None };
    config.validate().map_err(|e| fail(0, e))?;
    initial.check(system).map_err(|e| fail(0, e))?;
    let dt = profile.interval_minutes as f64 / 60.0;
    let t_end = profile.len();
    let mut state = initial.clone();
    let mut steps = Vec::with_capacity(t_end);
    for t in 0..t_end {
        let cfg = config.truncated(t_end - 1 - t);
        let forecast = Forecast::window(profile, t, cfg.window_w);
        let decision = policies::decide(system, &state, &forecast, &cfg).map_err(|source| {
            let lp_dump = build(system, &state, &forecast, &cfg, Objective::Economic)
                .ok()
                .map(|p| p.lp.to_lp_string());
            StepError { step: t, source, lp_dump }
        })?;
        let demand = forecast.demand[0];
        check_commitment(system, &state, demand, &decision.committed_output, decision.committed_shed)
            .map_err(|m| fail(t, DispatchError::Config(format!("committed dispatch invalid: {m}"))))?;
        let cost: f64 = system
            .generators
            .iter()
            .zip(&decision.committed_output)
            .map(|(gen, g)| gen.cost * g)
            .sum::<f64>()
            + config.penalty.rho_s * decision.committed_shed;
        steps.push(StepRecord {
            t,
            t_min: profile.t_min(t),
            demand,
            committed_output: decision.committed_output.clone(),
            shed: decision.committed_shed,
            objective: cost * dt,
            rp_prices: (!decision.rp_prices.is_empty()).then(|| decision.rp_prices.clone()),
        });
        state = DispatchState { prev_output: decision.committed_output, prev_shed: decision.committed_shed };
    }
    let total_loss_mwh = loss_mwh(steps.iter().map(|s| s.shed), dt);
    Ok(SimulationResult {
        steps,
        total_loss_mwh,
        policy: config.clone(),
        system_fingerprint: system.fingerprint(),
        profile_fingerprint: profile.fingerprint(),
        dt_hours: dt,
    })
}

/// Minimum total shed achievable by one LP over the whole horizon, in MWh.
pub fn clairvoyant_lower_bound(
    system: &SystemSpec,
    profile: &NetLoadProfile,
    initial: &DispatchState,
) -> Result<f64, DispatchError> {
    let cfg = PolicyConfig::laed(profile.len() - 1);
    let forecast = Forecast::new(profile.values.clone());
    let p = build(system, initial, &forecast, &cfg, Objective::MinShed)?;
    let sol = p.solve()?;
    Ok(sol.objective.max(0.0) * profile.interval_minutes as f64 / 60.0)
}

/// Runs every (profile, policy) pair in parallel; results are indexed
/// `[profile][policy]`.
pub fn sweep(
    system: &SystemSpec,
    profiles: &[NetLoadProfile],
    policies: &[PolicyConfig],
    penalty_for_start: crate::system::PenaltyConfig,
) -> Vec<Vec<Result<SimulationResult, StepError>>> {
    let jobs: Vec<(usize, usize)> =
        (0..profiles.len()).flat_map(|i| (0..policies.len()).map(move |j| (i, j))).collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|&(i, j)| {
            let init = policies::initial_state(system, &profiles[i], penalty_for_start)
                .map_err(|source| StepError { step: 0, source, lp_dump: None })?;
            run(system, &profiles[i], &policies[j], &init)
        })
        .collect();
    let mut it = results.into_iter();
    (0..profiles.len()).map(|_| it.by_ref().take(policies.len()).collect()).collect()
}

/// Writes `rows × columns` of total losses with a leading label column.
pub fn write_summary_csv(
    path: &Path,
    row_label: &str,
    rows: &[String],
    columns: &[String],
    values: &[Vec<f64>],
) -> Result<(), DispatchError> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![row_label.to_string()];
    header.extend(columns.iter().cloned());
    w.write_record(&header)?;
    for (r, vals) in rows.iter().zip(values) {
        let mut rec = vec![r.clone()];
        rec.extend(vals.iter().map(|v| format!("{v:.4}")));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| DispatchError::Io(e.to_string()))?;
    Ok(())
}

/// Long-format plot data: one row per (policy, step).
pub fn write_plot_csv(
    path: &Path,
    system: &SystemSpec,
    results: &[(String, &SimulationResult)],
) -> Result<(), DispatchError> {
    let file = std::fs::File::create(path).map_err(|e| DispatchError::Io(e.to_string()))?;
    let mut out = std::io::BufWriter::new(file);
    let gens: Vec<String> = system.generators.iter().map(|g| format!("g_{}", g.name)).collect();
    let io = |e: std::io::Error| DispatchError::Io(e.to_string());
    writeln!(out, "series,t_min,demand_mw,shed_mw,{}", gens.join(",")).map_err(io)?;
    for (label, res) in results {
        for s in &res.steps {
            let g: Vec<String> = s.committed_output.iter().map(|v| format!("{v:.6}")).collect();
            writeln!(out, "{label},{},{},{:.6},{}", s.t_min, s.demand, s.shed, g.join(",")).map_err(io)?;
        }
    }
    out.flush().map_err(io)
}

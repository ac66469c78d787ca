//! Per-step dispatch LPs: look-ahead economic dispatch and ramp-product
//! co-optimization over an arbitrary set of ramp durations, with optional
//! ramp-increment and rolling-difference families.

use std::collections::BTreeMap;
use std::fmt;

use lpcore::{ConstraintId, LinearExpr, LpProblem, LpSolution, Sense, Status, VariableId};
use serde::{Deserialize, Serialize};

use crate::system::{DispatchState, NetLoadProfile, PenaltyConfig, SystemSpec};
use crate::DispatchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyKind {
    Laed,
    Rp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    /// Look-ahead intervals W; the window covers τ = 0..=W.
    pub window_w: usize,
    /// Ramp durations in intervals, sorted, within 1..=W (RP only).
    #[serde(default)]
    pub durations: Vec<usize>,
    #[serde(default)]
    pub increment_constraints: bool,
    #[serde(default)]
    pub rolling_difference_constraints: bool,
    #[serde(default)]
    pub penalty: PenaltyConfig,
}

impl PolicyConfig {
    pub fn laed(window: usize) -> Self {
        PolicyConfig {
            kind: PolicyKind::Laed,
            window_w: window,
            durations: Vec::new(),
            increment_constraints: false,
            rolling_difference_constraints: false,
            penalty: PenaltyConfig::default(),
        }
    }

    /// RP over `durations`, window equal to the longest duration.
    pub fn rp(durations: &[usize]) -> Self {
        let mut d = durations.to_vec();
        d.sort_unstable();
        d.dedup();
        PolicyConfig {
            kind: PolicyKind::Rp,
            window_w: d.last().copied().unwrap_or(0),
            durations: d,
            increment_constraints: false,
            rolling_difference_constraints: false,
            penalty: PenaltyConfig::default(),
        }
    }

    /// All durations 1..=W with both constraint families (empty for W < 2).
    pub fn enhanced_rp(window: usize) -> Self {
        let c = Self::rp(&(1..=window).collect::<Vec<_>>());
        match window {
            0 | 1 => c,
            _ => c.with_increment().with_rolling_difference(),
        }
    }

    pub fn with_increment(mut self) -> Self {
        self.increment_constraints = true;
        self
    }

    pub fn with_rolling_difference(mut self) -> Self {
        self.rolling_difference_constraints = true;
        self
    }

    pub fn with_penalty(mut self, rho_s: f64) -> Self {
        self.penalty = PenaltyConfig { rho_s };
        self
    }

    pub fn with_window(mut self, window: usize) -> Self {
        self.window_w = window;
        self
    }

    pub fn validate(&self) -> Result<(), DispatchError> {
        if self.kind == PolicyKind::Rp && self.durations.is_empty() {
            return Err(DispatchError::Config("RP needs at least one duration".into()));
        }
        self.check_durations()
    }

    fn check_durations(&self) -> Result<(), DispatchError> {
        if self.kind == PolicyKind::Laed {
            return Ok(());
        }
        if self.durations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DispatchError::Config("durations must be strictly increasing".into()));
        }
        if let Some(&d) = self.durations.iter().find(|&&d| d == 0 || d > self.window_w) {
            return Err(DispatchError::Config(format!(
                "duration {d} outside 1..={}",
                self.window_w
            )));
        }
        Ok(())
    }

    /// The same policy with its window cut to `available` look-ahead
    /// intervals; durations beyond it are dropped.
    pub fn truncated(&self, available: usize) -> PolicyConfig {
        let mut c = self.clone();
        c.window_w = c.window_w.min(available);
        c.durations.retain(|&d| d <= c.window_w);
        if c.durations.len() < 2 {
            c.increment_constraints = false;
            c.rolling_difference_constraints = false;
        }
        c
    }

    pub fn label(&self) -> String {
        match self.kind {
            PolicyKind::Laed => format!("LAED W={}", self.window_w),
            PolicyKind::Rp => {
                let d: Vec<String> = self.durations.iter().map(|d| d.to_string()).collect();
                let mut s = format!("RP {{{}}}", d.join(","));
                if self.increment_constraints {
                    s.push_str(" +inc");
                }
                if self.rolling_difference_constraints {
                    s.push_str(" +roll");
                }
                s
            }
        }
    }

    /// Identifier safe for file names and CSV headers.
    pub fn slug(&self) -> String {
        match self.kind {
            PolicyKind::Laed => format!("laed_w{}", self.window_w),
            PolicyKind::Rp => {
                let d: Vec<String> = self.durations.iter().map(|d| d.to_string()).collect();
                let mut s = format!("rp_{}", d.join("_"));
                if self.increment_constraints {
                    s.push_str("_inc");
                }
                if self.rolling_difference_constraints {
                    s.push_str("_roll");
                }
                s
            }
        }
    }
}

impl fmt::Display for PolicyConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Perfect-foresight demand d(t+τ), τ = 0..=W.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    pub demand: Vec<f64>,
}

impl Forecast {
    pub fn new(demand: Vec<f64>) -> Self {
        Forecast { demand }
    }

    /// Window starting at interval `t` of `profile`, cut at the profile end.
    pub fn window(profile: &NetLoadProfile, t: usize, w: usize) -> Self {
        let end = (t + w + 1).min(profile.len());
        Forecast { demand: profile.values[t..end].to_vec() }
    }

    pub fn horizon(&self) -> usize {
        self.demand.len().saturating_sub(1)
    }
}

/// What the LP minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Generation cost plus shed penalty.
    Economic,
    /// Total shed over the window only.
    MinShed,
}

#[derive(Debug, Clone)]
pub struct PolicyProblem {
    pub lp: LpProblem,
    pub kind: PolicyKind,
    /// g_i(t+τ) indexed `[τ][i]`; RP has only τ = 0.
    pub g: Vec<Vec<VariableId>>,
    /// s(t+τ) for the intervals that carry a shed variable.
    pub s: BTreeMap<usize, VariableId>,
    pub r_plus: BTreeMap<usize, Vec<VariableId>>,
    pub r_minus: BTreeMap<usize, Vec<VariableId>>,
    pub balance: BTreeMap<usize, ConstraintId>,
    pub cover_up: BTreeMap<usize, ConstraintId>,
    pub cover_down: BTreeMap<usize, ConstraintId>,
    pub durations: Vec<usize>,
    pub demand: Vec<f64>,
}

impl PolicyProblem {
    fn new(kind: PolicyKind, demand: &[f64]) -> Self {
        PolicyProblem {
            lp: LpProblem::new(),
            kind,
            g: Vec::new(),
            s: BTreeMap::new(),
            r_plus: BTreeMap::new(),
            r_minus: BTreeMap::new(),
            balance: BTreeMap::new(),
            cover_up: BTreeMap::new(),
            cover_down: BTreeMap::new(),
            durations: Vec::new(),
            demand: demand.to_vec(),
        }
    }

    pub fn solve(&self) -> Result<LpSolution, DispatchError> {
        let sol = self.lp.solve();
        match sol.status {
            Status::Optimal => Ok(sol),
            s => Err(DispatchError::Solve(s)),
        }
    }

    fn shed_sum(&self) -> LinearExpr {
        LinearExpr::sum(self.s.values().copied())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Advisory {
    /// LAED trajectory `g[τ][i]` and shed per τ.
    Trajectory { g: Vec<Vec<f64>>, s: Vec<f64> },
    /// RP procurement per duration.
    Procurement {
        r_plus: BTreeMap<usize, Vec<f64>>,
        r_minus: BTreeMap<usize, Vec<f64>>,
        s: BTreeMap<usize, f64>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision {
    pub committed_output: Vec<f64>,
    pub committed_shed: f64,
    pub advisory: Advisory,
    /// LP objective value ($/h rate over the window).
    pub objective: f64,
    /// Up-coverage duals per duration (RP only).
    pub rp_prices: BTreeMap<usize, f64>,
}

fn check_forecast(config: &PolicyConfig, forecast: &Forecast) -> Result<(), DispatchError> {
    if forecast.demand.len() != config.window_w + 1 {
        return Err(DispatchError::ForecastLength {
            expected: config.window_w + 1,
            got: forecast.demand.len(),
        });
    }
    if forecast.demand.iter().any(|d| !d.is_finite()) {
        return Err(DispatchError::Config("forecast has non-finite values".into()));
    }
    Ok(())
}

fn check_state(system: &SystemSpec, state: &DispatchState) -> Result<(), DispatchError> {
    state.check(system)
}

fn add_ramp_rows(
    p: &mut PolicyProblem,
    system: &SystemSpec,
    cur: &[VariableId],
    prev: Result<&[VariableId], &[f64]>,
) -> Result<(), DispatchError> {
    for (i, gen) in system.generators.iter().enumerate() {
        let mut e = LinearExpr::term(cur[i], 1.0);
        match prev {
            Ok(v) => {
                e.add_term(v[i], -1.0);
            }
            Err(x) => {
                e.add_constant(-x[i]);
            }
        }
        p.lp.add_constraint(e.clone(), Sense::Le, gen.ramp_up)?;
        p.lp.add_constraint(e, Sense::Ge, -gen.ramp_down)?;
    }
    Ok(())
}

pub fn build_laed(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
) -> Result<PolicyProblem, DispatchError> {
    build_laed_with(system, state, forecast, config, Objective::Economic)
}

pub fn build_laed_with(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
    objective: Objective,
) -> Result<PolicyProblem, DispatchError> {
    if config.kind != PolicyKind::Laed {
        return Err(DispatchError::Config("build_laed needs an LAED config".into()));
    }
    check_forecast(config, forecast)?;
    check_state(system, state)?;
    let mut p = PolicyProblem::new(PolicyKind::Laed, &forecast.demand);
    let mut obj = LinearExpr::new();
    for (tau, &d) in forecast.demand.iter().enumerate() {
        let g: Vec<VariableId> = system
            .generators
            .iter()
            .map(|gen| p.lp.add_named_variable(format!("g_{}_{tau}", gen.name), gen.g_min, gen.g_max))
            .collect::<Result<_, _>>()?;
        let s = p.lp.add_named_variable(format!("s_{tau}"), 0.0, f64::INFINITY)?;
        match tau {
            0 => add_ramp_rows(&mut p, system, &g, Err(&state.prev_output))?,
            _ => {
                let prev = p.g[tau - 1].clone();
                add_ramp_rows(&mut p, system, &g, Ok(&prev))?
            }
        }
        let bal = p.lp.add_named_constraint(
            format!("balance_{tau}"),
            LinearExpr::sum(g.iter().copied()).with_term(s, 1.0),
            Sense::Eq,
            d,
        )?;
        if objective == Objective::Economic {
            for (gen, &v) in system.generators.iter().zip(&g) {
                obj.add_term(v, gen.cost);
            }
            obj.add_term(s, config.penalty.rho_s);
        } else {
            obj.add_term(s, 1.0);
        }
        p.balance.insert(tau, bal);
        p.s.insert(tau, s);
        p.g.push(g);
    }
    p.lp.set_objective(obj)?;
    Ok(p)
}

pub fn build_rp(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
) -> Result<PolicyProblem, DispatchError> {
    build_rp_with(system, state, forecast, config, Objective::Economic)
}

pub fn build_rp_with(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
    objective: Objective,
) -> Result<PolicyProblem, DispatchError> {
    if config.kind != PolicyKind::Rp {
        return Err(DispatchError::Config("build_rp needs an RP config".into()));
    }
    config.check_durations()?;
    check_forecast(config, forecast)?;
    check_state(system, state)?;
    let d = &forecast.demand;
    let mut p = PolicyProblem::new(PolicyKind::Rp, d);
    p.durations = config.durations.clone();

    let g: Vec<VariableId> = system
        .generators
        .iter()
        .map(|gen| p.lp.add_named_variable(format!("g_{}", gen.name), gen.g_min, gen.g_max))
        .collect::<Result<_, _>>()?;
    let s0 = p.lp.add_named_variable("s_0", 0.0, f64::INFINITY)?;
    p.s.insert(0, s0);
    add_ramp_rows(&mut p, system, &g, Err(&state.prev_output))?;

    for &k in &config.durations {
        let s = p.lp.add_named_variable(format!("s_{k}"), 0.0, f64::INFINITY)?;
        p.s.insert(k, s);
        let mut up = Vec::with_capacity(system.len());
        let mut down = Vec::with_capacity(system.len());
        for (i, gen) in system.generators.iter().enumerate() {
            let rp = p.lp.add_named_variable(
                format!("rup_{}_{k}", gen.name),
                0.0,
                k as f64 * gen.ramp_up,
            )?;
            let rm = p.lp.add_named_variable(
                format!("rdn_{}_{k}", gen.name),
                0.0,
                k as f64 * gen.ramp_down,
            )?;
            p.lp.add_constraint(LinearExpr::sum([g[i], rp]), Sense::Le, gen.g_max)?;
            p.lp.add_constraint(
                LinearExpr::term(g[i], 1.0).with_term(rm, -1.0),
                Sense::Ge,
                gen.g_min,
            )?;
            up.push(rp);
            down.push(rm);
        }
        let cu = p.lp.add_named_constraint(
            format!("cover_up_{k}"),
            LinearExpr::sum(up.iter().copied()).with_term(s, 1.0).with_term(s0, -1.0),
            Sense::Ge,
            d[k] - d[0],
        )?;
        let cd = p.lp.add_named_constraint(
            format!("cover_down_{k}"),
            LinearExpr::sum(down.iter().copied()).with_term(s, -1.0).with_term(s0, 1.0),
            Sense::Ge,
            d[0] - d[k],
        )?;
        p.cover_up.insert(k, cu);
        p.cover_down.insert(k, cd);
        p.r_plus.insert(k, up);
        p.r_minus.insert(k, down);
    }

    let bal = p.lp.add_named_constraint(
        "balance_0",
        LinearExpr::sum(g.iter().copied()).with_term(s0, 1.0),
        Sense::Eq,
        d[0],
    )?;
    p.balance.insert(0, bal);
    p.g.push(g);

    if config.increment_constraints {
        add_increment_constraints(&mut p, system, config)?;
    }
    if config.rolling_difference_constraints {
        add_rolling_difference_constraints(&mut p, system, forecast, config)?;
    }

    let obj = match objective {
        Objective::Economic => {
            let mut e = LinearExpr::from_terms(
                system.generators.iter().zip(&p.g[0]).map(|(gen, &v)| (v, gen.cost)),
            );
            e += p.shed_sum() * config.penalty.rho_s;
            e
        }
        Objective::MinShed => p.shed_sum(),
    };
    p.lp.set_objective(obj)?;
    Ok(p)
}

fn consecutive(durations: &[usize]) -> Vec<(usize, usize)> {
    durations.windows(2).map(|w| (w[0], w[1])).collect()
}

/// Longer-duration procurement may exceed the next shorter one by at most
/// the ramp deliverable in the gap, and may not fall below it.
pub fn add_increment_constraints(
    problem: &mut PolicyProblem,
    system: &SystemSpec,
    config: &PolicyConfig,
) -> Result<(), DispatchError> {
    if config.durations.len() < 2 {
        log::warn!("increment constraints need two or more durations; none added");
        return Ok(());
    }
    for (a, b) in consecutive(&config.durations) {
        let gap = (b - a) as f64;
        for (i, gen) in system.generators.iter().enumerate() {
            for (vars, limit) in [(&problem.r_plus, gen.ramp_up), (&problem.r_minus, gen.ramp_down)] {
                let e = LinearExpr::term(vars[&b][i], 1.0).with_term(vars[&a][i], -1.0);
                problem.lp.add_constraint(e.clone(), Sense::Ge, 0.0)?;
                problem.lp.add_constraint(e, Sense::Le, gap * limit)?;
            }
        }
    }
    Ok(())
}

/// Incremental system procurement between successive durations must
/// cover the incremental net-load change, in both directions.
pub fn add_rolling_difference_constraints(
    problem: &mut PolicyProblem,
    _system: &SystemSpec,
    forecast: &Forecast,
    config: &PolicyConfig,
) -> Result<(), DispatchError> {
    if config.durations.len() < 2 {
        log::warn!("rolling-difference constraints need two or more durations; none added");
        return Ok(());
    }
    let d = &forecast.demand;
    for (a, b) in consecutive(&config.durations) {
        let (sa, sb) = (problem.s[&a], problem.s[&b]);
        let mut up = LinearExpr::sum(problem.r_plus[&b].iter().copied())
            - LinearExpr::sum(problem.r_plus[&a].iter().copied());
        up.add_term(sb, 1.0).add_term(sa, -1.0);
        problem.lp.add_named_constraint(format!("roll_up_{a}_{b}"), up, Sense::Ge, d[b] - d[a])?;
        let mut down = LinearExpr::sum(problem.r_minus[&b].iter().copied())
            - LinearExpr::sum(problem.r_minus[&a].iter().copied());
        down.add_term(sb, -1.0).add_term(sa, 1.0);
        problem.lp.add_named_constraint(format!("roll_down_{a}_{b}"), down, Sense::Ge, d[a] - d[b])?;
    }
    Ok(())
}

pub fn build(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
    objective: Objective,
) -> Result<PolicyProblem, DispatchError> {
    match config.kind {
        PolicyKind::Laed => build_laed_with(system, state, forecast, config, objective),
        PolicyKind::Rp => build_rp_with(system, state, forecast, config, objective),
    }
}

/// Reads the τ = 0 commitment and advisory values out of a solved problem.
pub fn extract_decision(p: &PolicyProblem, sol: &LpSolution) -> PolicyDecision {
    let committed_output: Vec<f64> = p.g[0].iter().map(|&v| sol.value(v)).collect();
    let committed_shed = sol.value(p.s[&0]);
    let advisory = match p.kind {
        PolicyKind::Laed => Advisory::Trajectory {
            g: p.g.iter().map(|row| row.iter().map(|&v| sol.value(v)).collect()).collect(),
            s: p.s.values().map(|&v| sol.value(v)).collect(),
        },
        PolicyKind::Rp => Advisory::Procurement {
            r_plus: p.r_plus.iter().map(|(&k, v)| (k, v.iter().map(|&x| sol.value(x)).collect())).collect(),
            r_minus: p.r_minus.iter().map(|(&k, v)| (k, v.iter().map(|&x| sol.value(x)).collect())).collect(),
            s: p.s.iter().map(|(&k, &v)| (k, sol.value(v))).collect(),
        },
    };
    let rp_prices = p.cover_up.iter().map(|(&k, &c)| (k, sol.duals[c.index()])).collect();
    PolicyDecision { committed_output, committed_shed, advisory, objective: sol.objective, rp_prices }
}

/// Builds and solves the configured policy LP and returns its τ = 0 commitment.
pub fn decide(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
) -> Result<PolicyDecision, DispatchError> {
    let p = build(system, state, forecast, config, Objective::Economic)?;
    let sol = p.solve()?;
    Ok(extract_decision(&p, &sol))
}

/// Single-interval economic dispatch with ramp limits ignored.
pub fn economic_dispatch(
    system: &SystemSpec,
    demand: f64,
    penalty: PenaltyConfig,
) -> Result<(Vec<f64>, f64), DispatchError> {
    let mut lp = LpProblem::new();
    let g: Vec<VariableId> = system
        .generators
        .iter()
        .map(|gen| lp.add_variable(gen.g_min, gen.g_max))
        .collect::<Result<_, _>>()?;
    let s = lp.add_variable(0.0, f64::INFINITY)?;
    lp.add_constraint(LinearExpr::sum(g.iter().copied()).with_term(s, 1.0), Sense::Eq, demand)?;
    let mut obj = LinearExpr::from_terms(system.generators.iter().zip(&g).map(|(gen, &v)| (v, gen.cost)));
    obj.add_term(s, penalty.rho_s);
    lp.set_objective(obj)?;
    let sol = lp.solve();
    if !sol.is_optimal() {
        return Err(DispatchError::Solve(sol.status));
    }
    Ok((g.iter().map(|&v| sol.value(v)).collect(), sol.value(s)))
}

/// Starting state shared by every policy: economic dispatch against the
/// first profile value.
pub fn initial_state(
    system: &SystemSpec,
    profile: &NetLoadProfile,
    penalty: PenaltyConfig,
) -> Result<DispatchState, DispatchError> {
    let (g, _) = economic_dispatch(system, profile.values[0], penalty)?;
    Ok(DispatchState::new(g))
}

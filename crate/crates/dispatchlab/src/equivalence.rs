//! Single-step comparison of the LAED and enhanced-RP feasible regions:
//! constructive maps between their points, constraint checkers, and a
//! randomized min-shed comparison.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::policies::{build_laed_with, build_rp_with, Forecast, Objective, PolicyConfig, PolicyProblem};
use crate::system::{DispatchState, GeneratorSpec, SystemSpec};
use crate::DispatchError;

pub const TOL: f64 = 1e-6;

/// A point of the LAED region: `g[τ][i]` and `s[τ]`, τ = 0..=W.
#[derive(Debug, Clone, PartialEq)]
pub struct LaedPoint {
    pub g: Vec<Vec<f64>>,
    pub s: Vec<f64>,
}

/// A point of the RP region: `g[i]` at τ = 0, `s[τ]` for τ = 0..=W and
/// procurement `r_plus[τ−1][i]`, `r_minus[τ−1][i]` for τ = 1..=W.
#[derive(Debug, Clone, PartialEq)]
pub struct RpPoint {
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    pub r_plus: Vec<Vec<f64>>,
    pub r_minus: Vec<Vec<f64>>,
}

impl RpPoint {
    pub fn window(&self) -> usize {
        self.r_plus.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintViolation {
    pub constraint: String,
    pub magnitude: f64,
}

impl fmt::Display for ConstraintViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated by {:.6}", self.constraint, self.magnitude)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EquivalenceError {
    #[error("input point infeasible: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Infeasible(Vec<ConstraintViolation>),
    #[error("no dispatch at τ={step} meets net load {target:.6} within [{lo:.6}, {hi:.6}]")]
    Reconstruction { step: usize, target: f64, lo: f64, hi: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Dispatch(#[from] DispatchError),
}

struct Checker {
    out: Vec<ConstraintViolation>,
}

impl Checker {
    fn new() -> Self {
        Checker { out: Vec::new() }
    }

    /// Records `lhs ≤ rhs`.
    fn le(&mut self, name: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        if lhs > rhs + TOL {
            self.out.push(ConstraintViolation { constraint: name(), magnitude: lhs - rhs });
        }
    }

    fn eq(&mut self, name: impl FnOnce() -> String, lhs: f64, rhs: f64) {
        if (lhs - rhs).abs() > TOL {
            self.out.push(ConstraintViolation { constraint: name(), magnitude: (lhs - rhs).abs() });
        }
    }

    fn finish(self) -> Result<(), Vec<ConstraintViolation>> {
        if self.out.is_empty() {
            Ok(())
        } else {
            Err(self.out)
        }
    }
}

fn ramp_checks(c: &mut Checker, gen: &GeneratorSpec, tau: usize, from: f64, to: f64) {
    c.le(|| format!("ramp_up[{},{tau}]", gen.name), to - from, gen.ramp_up);
    c.le(|| format!("ramp_down[{},{tau}]", gen.name), from - to, gen.ramp_down);
}

fn capacity_checks(c: &mut Checker, gen: &GeneratorSpec, tau: usize, g: f64) {
    c.le(|| format!("capacity_max[{},{tau}]", gen.name), g, gen.g_max);
    c.le(|| format!("capacity_min[{},{tau}]", gen.name), gen.g_min, g);
}

fn dims_laed(point: &LaedPoint, system: &SystemSpec, forecast: &Forecast) -> Result<(), String> {
    let t = forecast.demand.len();
    if point.g.len() != t || point.s.len() != t || point.g.iter().any(|r| r.len() != system.len()) {
        return Err(format!("LAED point does not match {} units × {t} intervals", system.len()));
    }
    Ok(())
}

fn dims_rp(point: &RpPoint, system: &SystemSpec, forecast: &Forecast) -> Result<(), String> {
    let w = forecast.horizon();
    let n = system.len();
    if point.g.len() != n
        || point.s.len() != w + 1
        || point.r_plus.len() != w
        || point.r_minus.len() != w
        || point.r_plus.iter().chain(&point.r_minus).any(|r| r.len() != n)
    {
        return Err(format!("RP point does not match {n} units × window {w}"));
    }
    Ok(())
}

/// Evaluates every LAED constraint family at `point`.
pub fn check_feasible_laed(
    point: &LaedPoint,
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
) -> Result<(), Vec<ConstraintViolation>> {
    if let Err(m) = dims_laed(point, system, forecast) {
        return Err(vec![ConstraintViolation { constraint: m, magnitude: f64::INFINITY }]);
    }
    let mut c = Checker::new();
    for (tau, &d) in forecast.demand.iter().enumerate() {
        for (i, gen) in system.generators.iter().enumerate() {
            let from = if tau == 0 { state.prev_output[i] } else { point.g[tau - 1][i] };
            capacity_checks(&mut c, gen, tau, point.g[tau][i]);
            ramp_checks(&mut c, gen, tau, from, point.g[tau][i]);
        }
        c.eq(|| format!("balance[{tau}]"), point.g[tau].iter().sum::<f64>() + point.s[tau], d);
        c.le(|| format!("shed_nonneg[{tau}]"), 0.0, point.s[tau]);
    }
    c.finish()
}

/// Evaluates the RP constraint families of `config` at `point`. The point
/// carries procurement for every τ; only `config.durations` are checked.
pub fn check_feasible_rp(
    point: &RpPoint,
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    config: &PolicyConfig,
) -> Result<(), Vec<ConstraintViolation>> {
    if let Err(m) = dims_rp(point, system, forecast) {
        return Err(vec![ConstraintViolation { constraint: m, magnitude: f64::INFINITY }]);
    }
    if let Some(&k) = config.durations.iter().find(|&&k| k == 0 || k > point.window()) {
        return Err(vec![ConstraintViolation {
            constraint: format!("duration {k} outside window {}", point.window()),
            magnitude: f64::INFINITY,
        }]);
    }
    let d = &forecast.demand;
    let (g, s) = (&point.g, &point.s);
    let rp = |k: usize| &point.r_plus[k - 1];
    let rm = |k: usize| &point.r_minus[k - 1];
    let mut c = Checker::new();
    for (i, gen) in system.generators.iter().enumerate() {
        capacity_checks(&mut c, gen, 0, g[i]);
        ramp_checks(&mut c, gen, 0, state.prev_output[i], g[i]);
    }
    c.eq(|| "balance[0]".into(), g.iter().sum::<f64>() + s[0], d[0]);
    c.le(|| "shed_nonneg[0]".into(), 0.0, s[0]);
    for &k in &config.durations {
        c.le(|| format!("shed_nonneg[{k}]"), 0.0, s[k]);
        for (i, gen) in system.generators.iter().enumerate() {
            c.le(|| format!("rup_nonneg[{},{k}]", gen.name), 0.0, rp(k)[i]);
            c.le(|| format!("rdn_nonneg[{},{k}]", gen.name), 0.0, rm(k)[i]);
            c.le(|| format!("rup_limit[{},{k}]", gen.name), rp(k)[i], k as f64 * gen.ramp_up);
            c.le(|| format!("rdn_limit[{},{k}]", gen.name), rm(k)[i], k as f64 * gen.ramp_down);
            c.le(|| format!("headroom_up[{},{k}]", gen.name), g[i] + rp(k)[i], gen.g_max);
            c.le(|| format!("headroom_down[{},{k}]", gen.name), gen.g_min, g[i] - rm(k)[i]);
        }
        let up: f64 = rp(k).iter().sum();
        let down: f64 = rm(k).iter().sum();
        c.le(|| format!("cover_up[{k}]"), d[k] - d[0], up + s[k] - s[0]);
        c.le(|| format!("cover_down[{k}]"), d[0] - d[k], down - s[k] + s[0]);
    }
    for w in config.durations.windows(2) {
        let (a, b) = (w[0], w[1]);
        if config.increment_constraints {
            let gap = (b - a) as f64;
            for (i, gen) in system.generators.iter().enumerate() {
                let du = rp(b)[i] - rp(a)[i];
                let dd = rm(b)[i] - rm(a)[i];
                c.le(|| format!("increment_up_min[{},{a},{b}]", gen.name), 0.0, du);
                c.le(|| format!("increment_up_max[{},{a},{b}]", gen.name), du, gap * gen.ramp_up);
                c.le(|| format!("increment_down_min[{},{a},{b}]", gen.name), 0.0, dd);
                c.le(|| format!("increment_down_max[{},{a},{b}]", gen.name), dd, gap * gen.ramp_down);
            }
        }
        if config.rolling_difference_constraints {
            let du: f64 = rp(b).iter().sum::<f64>() - rp(a).iter().sum::<f64>();
            let dd: f64 = rm(b).iter().sum::<f64>() - rm(a).iter().sum::<f64>();
            c.le(|| format!("rolling_up[{a},{b}]"), d[b] - d[a], du + s[b] - s[a]);
            c.le(|| format!("rolling_down[{a},{b}]"), d[a] - d[b], dd - s[b] + s[a]);
        }
    }
    c.finish()
}

/// Procurement implied by a trajectory: running maxima of the upward and
/// downward excursions from g(t).
pub fn laed_to_rp(
    point: &LaedPoint,
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
) -> Result<RpPoint, EquivalenceError> {
    check_feasible_laed(point, system, state, forecast).map_err(EquivalenceError::Infeasible)?;
    let n = system.len();
    let g0 = point.g[0].clone();
    let mut r_plus: Vec<Vec<f64>> = Vec::new();
    let mut r_minus: Vec<Vec<f64>> = Vec::new();
    for tau in 1..point.g.len() {
        let (prev_up, prev_dn) = match tau {
            1 => (vec![0.0; n], vec![0.0; n]),
            _ => (r_plus[tau - 2].clone(), r_minus[tau - 2].clone()),
        };
        r_plus.push((0..n).map(|i| prev_up[i].max(point.g[tau][i] - g0[i])).collect());
        r_minus.push((0..n).map(|i| prev_dn[i].max(g0[i] - point.g[tau][i])).collect());
    }
    Ok(RpPoint { g: g0, s: point.s.clone(), r_plus, r_minus })
}

/// Trajectory reconstructed from procurement. Starts from
/// g'(τ) = g(t) + r⁺(τ) − r⁻(τ) and, where that misses the net load
/// d(τ) − s(τ), moves units within the procured envelope and their
/// per-interval ramp window until it balances.
pub fn rp_to_laed(
    point: &RpPoint,
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
) -> Result<LaedPoint, EquivalenceError> {
    let enhanced = PolicyConfig::enhanced_rp(forecast.horizon());
    check_feasible_rp(point, system, state, forecast, &enhanced).map_err(EquivalenceError::Infeasible)?;
    let n = system.len();
    let mut g = vec![point.g.clone()];
    for tau in 1..=point.window() {
        let prev = &g[tau - 1];
        let target = forecast.demand[tau] - point.s[tau];
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut x = vec![0.0; n];
        for (i, gen) in system.generators.iter().enumerate() {
            let (up, dn) = (point.r_plus[tau - 1][i], point.r_minus[tau - 1][i]);
            lo[i] = (point.g[i] - dn).max(prev[i] - gen.ramp_down).max(gen.g_min);
            hi[i] = (point.g[i] + up).min(prev[i] + gen.ramp_up).min(gen.g_max);
            if lo[i] > hi[i] + TOL {
                return Err(EquivalenceError::Reconstruction { step: tau, target, lo: lo[i], hi: hi[i] });
            }
            hi[i] = hi[i].max(lo[i]);
            x[i] = (point.g[i] + up - dn).clamp(lo[i], hi[i]);
        }
        let (sum_lo, sum_hi) = (lo.iter().sum::<f64>(), hi.iter().sum::<f64>());
        if target < sum_lo - TOL || target > sum_hi + TOL {
            return Err(EquivalenceError::Reconstruction { step: tau, target, lo: sum_lo, hi: sum_hi });
        }
        let mut gap = target - x.iter().sum::<f64>();
        for i in 0..n {
            if gap.abs() <= 1e-12 {
                break;
            }
            let mv = if gap > 0.0 { gap.min(hi[i] - x[i]) } else { gap.max(lo[i] - x[i]) };
            x[i] += mv;
            gap -= mv;
        }
        g.push(x);
    }
    Ok(LaedPoint { g, s: point.s.clone() })
}

pub fn laed_point(p: &PolicyProblem, sol: &lpcore::LpSolution) -> LaedPoint {
    LaedPoint {
        g: p.g.iter().map(|row| row.iter().map(|&v| sol.value(v)).collect()).collect(),
        s: p.s.values().map(|&v| sol.value(v)).collect(),
    }
}

/// Point of a solved RP problem built over all durations 1..=W.
pub fn rp_point(p: &PolicyProblem, sol: &lpcore::LpSolution) -> RpPoint {
    let vals = |v: &Vec<lpcore::VariableId>| v.iter().map(|&x| sol.value(x)).collect::<Vec<_>>();
    RpPoint {
        g: vals(&p.g[0]),
        s: p.s.values().map(|&v| sol.value(v)).collect(),
        r_plus: p.r_plus.values().map(vals).collect(),
        r_minus: p.r_minus.values().map(vals).collect(),
    }
}

pub struct MinShed {
    pub laed: f64,
    pub rp: f64,
    pub laed_point: LaedPoint,
    pub rp_point: RpPoint,
}

/// Minimum total shed (MW summed over the window) under LAED and under
/// the enhanced RP of the same window.
pub fn min_shed(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    w: usize,
) -> Result<MinShed, DispatchError> {
    let lp = build_laed_with(system, state, forecast, &PolicyConfig::laed(w), Objective::MinShed)?;
    let ls = lp.solve()?;
    let rp = build_rp_with(system, state, forecast, &PolicyConfig::enhanced_rp(w), Objective::MinShed)?;
    let rs = rp.solve()?;
    Ok(MinShed { laed: ls.objective, rp: rs.objective, laed_point: laed_point(&lp, &ls), rp_point: rp_point(&rp, &rs) })
}

pub fn min_shed_equivalence(
    system: &SystemSpec,
    state: &DispatchState,
    forecast: &Forecast,
    w: usize,
) -> Result<(f64, f64), DispatchError> {
    let m = min_shed(system, state, forecast, w)?;
    Ok((m.laed, m.rp))
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub system: SystemSpec,
    pub state: DispatchState,
    pub forecast: Forecast,
}

impl Instance {
    pub fn window(&self) -> usize {
        self.forecast.horizon()
    }
}

fn laed_feasible(inst: &Instance) -> bool {
    let cfg = PolicyConfig::laed(inst.window());
    build_laed_with(&inst.system, &inst.state, &inst.forecast, &cfg, Objective::MinShed)
        .and_then(|p| p.solve())
        .is_ok()
}

/// Draws a random ramp-stressed instance: random units, a random
/// starting dispatch, and a demand walk whose steps are drawn from
/// [−1, 1.5] × total ramp. Draws whose LAED is infeasible (falling demand
/// that no unit can follow down) are rejected; the count is returned.
pub fn random_instance(rng: &mut impl Rng, max_gens: usize, max_window: usize) -> (Instance, usize) {
    let mut rejected = 0;
    loop {
        let n = rng.gen_range(1..=max_gens.max(1));
        let w = rng.gen_range(1..=max_window.max(1));
        let generators: Vec<GeneratorSpec> = (0..n)
            .map(|i| {
                let cap = rng.gen_range(50.0..300.0);
                let cost = rng.gen_range(10.0..100.0);
                let ramp = rng.gen_range(0.05..0.4) * cap;
                GeneratorSpec::new(format!("U{}", i + 1), cap, ramp, cost)
            })
            .collect();
        let prev: Vec<f64> = generators.iter().map(|g| rng.gen_range(0.0..g.g_max)).collect();
        let total_ramp: f64 = generators.iter().map(|g| g.ramp_up).sum();
        let mut demand = vec![prev.iter().sum::<f64>()];
        for _ in 0..w {
            let next = demand.last().unwrap() + rng.gen_range(-1.0..1.5) * total_ramp;
            demand.push(next.max(0.0));
        }
        let inst = Instance {
            system: SystemSpec { name: "random".into(), interval_minutes: 5, generators },
            state: DispatchState::new(prev),
            forecast: Forecast::new(demand),
        };
        if laed_feasible(&inst) {
            return (inst, rejected);
        }
        rejected += 1;
    }
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub laed: f64,
    pub rp: f64,
    pub laed_to_rp_ok: bool,
    pub rp_to_laed_ok: bool,
}

impl TrialResult {
    pub fn gap(&self) -> f64 {
        (self.laed - self.rp).abs()
    }
}

pub fn run_trial(inst: &Instance) -> Result<TrialResult, DispatchError> {
    let w = inst.window();
    let m = min_shed(&inst.system, &inst.state, &inst.forecast, w)?;
    let enhanced = PolicyConfig::enhanced_rp(w);
    let laed_to_rp_ok = laed_to_rp(&m.laed_point, &inst.system, &inst.state, &inst.forecast)
        .is_ok_and(|p| check_feasible_rp(&p, &inst.system, &inst.state, &inst.forecast, &enhanced).is_ok());
    let rp_to_laed_ok = rp_to_laed(&m.rp_point, &inst.system, &inst.state, &inst.forecast)
        .is_ok_and(|p| check_feasible_laed(&p, &inst.system, &inst.state, &inst.forecast).is_ok());
    Ok(TrialResult { laed: m.laed, rp: m.rp, laed_to_rp_ok, rp_to_laed_ok })
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub trials: usize,
    pub tolerance: f64,
    pub value_mismatches: usize,
    /// Trials whose LAED optimum does not map to a feasible RP point.
    pub laed_to_rp_failures: usize,
    /// Trials whose enhanced-RP optimum does not map to a feasible LAED point.
    pub rp_to_laed_failures: usize,
    pub worst_gap: f64,
    pub worst_trial: Option<usize>,
    pub rejected_draws: usize,
    pub results: Vec<TrialResult>,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.value_mismatches == 0 && self.roundtrip_failures() == 0
    }

    pub fn roundtrip_failures(&self) -> usize {
        self.results.iter().filter(|r| !(r.laed_to_rp_ok && r.rp_to_laed_ok)).count()
    }
}

pub fn run_trials(
    trials: usize,
    seed: u64,
    max_gens: usize,
    max_window: usize,
    tolerance: f64,
) -> Result<EquivalenceReport, DispatchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = EquivalenceReport {
        trials,
        tolerance,
        value_mismatches: 0,
        laed_to_rp_failures: 0,
        rp_to_laed_failures: 0,
        worst_gap: 0.0,
        worst_trial: None,
        rejected_draws: 0,
        results: Vec::with_capacity(trials),
    };
    for k in 0..trials {
        let (inst, rejected) = random_instance(&mut rng, max_gens, max_window);
        report.rejected_draws += rejected;
        let r = run_trial(&inst)?;
        // A zero tolerance compares the optima bit-for-bit.
        if r.gap() > tolerance || (tolerance == 0.0 && r.laed.to_bits() != r.rp.to_bits()) {
            report.value_mismatches += 1;
        }
        report.laed_to_rp_failures += usize::from(!r.laed_to_rp_ok);
        report.rp_to_laed_failures += usize::from(!r.rp_to_laed_ok);
        if report.worst_trial.is_none() || r.gap() > report.worst_gap {
            report.worst_gap = r.gap();
            report.worst_trial = Some(k);
        }
        report.results.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::two_gen_system;

    fn mini() -> (SystemSpec, DispatchState) {
        let sys = two_gen_system();
        (sys, DispatchState::new(vec![300.0, 100.0]))
    }

    #[test]
    fn constant_trajectory_maps_to_zero_procurement() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0; 3]);
        let p = LaedPoint { g: vec![vec![300.0, 100.0]; 3], s: vec![0.0; 3] };
        let rp = laed_to_rp(&p, &sys, &st, &f).unwrap();
        assert!(rp.r_plus.iter().chain(&rp.r_minus).flatten().all(|&r| r == 0.0));
    }

    #[test]
    fn monotone_trajectory_unrolls() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0, 420.0, 440.0, 460.0]);
        let g = (0..4).map(|t| vec![300.0, 100.0 + 20.0 * t as f64]).collect();
        let rp = laed_to_rp(&LaedPoint { g, s: vec![0.0; 4] }, &sys, &st, &f).unwrap();
        for tau in 1..=3 {
            assert_eq!(rp.r_plus[tau - 1], vec![0.0, 20.0 * tau as f64]);
            assert_eq!(rp.r_minus[tau - 1], vec![0.0, 0.0]);
        }
        let back = rp_to_laed(&rp, &sys, &st, &f).unwrap();
        assert!(check_feasible_laed(&back, &sys, &st, &f).is_ok());
    }

    #[test]
    fn up_then_down_keeps_running_maximum() {
        let (sys, st) = (two_gen_system(), DispatchState::new(vec![0.0, 0.0]));
        let f = Forecast::new(vec![0.0, 80.0, 40.0]);
        let p = LaedPoint { g: vec![vec![0.0, 0.0], vec![80.0, 0.0], vec![40.0, 0.0]], s: vec![0.0; 3] };
        let rp = laed_to_rp(&p, &sys, &st, &f).unwrap();
        assert_eq!(rp.r_plus, vec![vec![80.0, 0.0], vec![80.0, 0.0]]);
        assert_eq!(rp.r_minus, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        // The mapped point keeps r⁻ at zero while net load falls by 40, which
        // the downward rolling-difference row rejects.
        let v = check_feasible_rp(&rp, &sys, &st, &f, &PolicyConfig::enhanced_rp(2)).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, "rolling_down[1,2]");
        assert!((v[0].magnitude - 40.0).abs() < 1e-9);
    }

    #[test]
    fn zero_procurement_gives_constant_trajectory() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0; 3]);
        let rp = RpPoint {
            g: vec![300.0, 100.0],
            s: vec![0.0; 3],
            r_plus: vec![vec![0.0; 2]; 2],
            r_minus: vec![vec![0.0; 2]; 2],
        };
        let l = rp_to_laed(&rp, &sys, &st, &f).unwrap();
        assert_eq!(l.g, vec![vec![300.0, 100.0]; 3]);
    }

    #[test]
    fn linear_procurement_gives_linear_ramp() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0, 430.0, 460.0]);
        let rp = RpPoint {
            g: vec![300.0, 100.0],
            s: vec![0.0; 3],
            r_plus: vec![vec![0.0, 30.0], vec![0.0, 60.0]],
            r_minus: vec![vec![0.0; 2]; 2],
        };
        let l = rp_to_laed(&rp, &sys, &st, &f).unwrap();
        assert_eq!(l.g[1], vec![300.0, 130.0]);
        assert_eq!(l.g[2], vec![300.0, 160.0]);
    }

    #[test]
    fn surplus_procurement_is_rebalanced() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0, 420.0, 440.0]);
        let rp = RpPoint {
            g: vec![300.0, 100.0],
            s: vec![0.0; 3],
            r_plus: vec![vec![50.0, 20.0], vec![100.0, 40.0]],
            r_minus: vec![vec![0.0; 2]; 2],
        };
        assert!(check_feasible_rp(&rp, &sys, &st, &f, &PolicyConfig::enhanced_rp(2)).is_ok());
        let l = rp_to_laed(&rp, &sys, &st, &f).unwrap();
        assert!(check_feasible_laed(&l, &sys, &st, &f).is_ok());
    }

    #[test]
    fn single_ramp_violation_reported_once() {
        let (sys, st) = mini();
        let f = Forecast::new(vec![400.0, 400.0]);
        // G2 jumps 51 MW against a 50 MW limit, G1 backs off to keep balance.
        let p = LaedPoint { g: vec![vec![300.0, 100.0], vec![249.0, 151.0]], s: vec![0.0; 2] };
        let v = check_feasible_laed(&p, &sys, &st, &f).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, "ramp_up[G2,1]");
        assert!((v[0].magnitude - 1.0).abs() < 1e-9);
        assert!(matches!(laed_to_rp(&p, &sys, &st, &f), Err(EquivalenceError::Infeasible(_))));
    }

    #[test]
    fn increment_violation_flagged() {
        let sys = two_gen_system();
        let st = DispatchState::new(vec![0.0, 0.0]);
        let f = Forecast::new(vec![0.0, 80.0, 40.0]);
        let rp = RpPoint {
            g: vec![0.0, 0.0],
            s: vec![0.0; 3],
            r_plus: vec![vec![80.0, 0.0], vec![40.0, 0.0]],
            r_minus: vec![vec![0.0; 2]; 2],
        };
        let cfg = PolicyConfig::rp(&[1, 2]).with_increment();
        let v = check_feasible_rp(&rp, &sys, &st, &f, &cfg).unwrap_err();
        assert_eq!(v[0].constraint, "increment_up_min[G1,1,2]");
        assert!(check_feasible_rp(&rp, &sys, &st, &f, &PolicyConfig::rp(&[1, 2])).is_ok());
    }

    #[test]
    fn rolling_violation_flagged() {
        let sys = two_gen_system();
        let st = DispatchState::new(vec![0.0, 0.0]);
        let f = Forecast::new(vec![0.0, 10.0, 80.0]);
        let rp = RpPoint {
            g: vec![0.0, 0.0],
            s: vec![0.0; 3],
            r_plus: vec![vec![0.0, 40.0], vec![0.0, 80.0]],
            r_minus: vec![vec![0.0; 2]; 2],
        };
        let cfg = PolicyConfig::rp(&[1, 2]).with_rolling_difference();
        assert!(check_feasible_rp(&rp, &sys, &st, &f, &PolicyConfig::rp(&[1, 2])).is_ok());
        let v = check_feasible_rp(&rp, &sys, &st, &f, &cfg).unwrap_err();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].constraint, "rolling_up[1,2]");
        assert!((v[0].magnitude - 30.0).abs() < 1e-9);
    }

    #[test]
    fn abundant_and_capacity_bound_cases() {
        let (sys, st) = mini();
        let (l, r) = min_shed_equivalence(&sys, &st, &Forecast::new(vec![400.0, 410.0, 420.0]), 2).unwrap();
        assert!(l.abs() < 1e-9 && r.abs() < 1e-9);
        let st = DispatchState::new(vec![500.0, 500.0]);
        let f = Forecast::new(vec![1100.0, 1050.0, 1200.0]);
        let (l, r) = min_shed_equivalence(&sys, &st, &f, 2).unwrap();
        assert!((l - 350.0).abs() < 1e-6 && (r - 350.0).abs() < 1e-6, "{l} {r}");
    }
}

//! Bounded-variable primal simplex.
//!
//! Each row r gets a logical `w_r = a_r·x` so that `[A | −I] z = 0` with all
//! row senses turned into bounds on `w`. Infeasible starts are handled by a
//! composite phase 1 that minimizes the sum of bound violations of the basic
//! variables.

use crate::lu::Factor;
use crate::{LpProblem, LpSolution, Sense, Status, FEAS_TOL, PIVOT_TOL};

const REFACTOR_EVERY: usize = 64;
const BLAND_AFTER: usize = 50;
const IMPROVEMENT_TOL: f64 = 1e-11;

struct Simplex {
    n: usize,
    m: usize,
    cols: Vec<Vec<(usize, f64)>>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    head: Vec<usize>,
    pos: Vec<usize>,
    factor: Factor,
}

const NONBASIC: usize = usize::MAX;

enum Step {
    Optimal,
    Infeasible,
    Unbounded,
    Pivoted,
    Failure,
}

impl Simplex {
    fn new(p: &LpProblem) -> Simplex {
        let n = p.num_variables();
        let m = p.num_constraints();
        let mut cols = vec![Vec::new(); n];
        let mut lb = Vec::with_capacity(n + m);
        let mut ub = Vec::with_capacity(n + m);
        let mut cost = vec![0.0; n + m];
        for v in p.variables() {
            lb.push(v.lower);
            ub.push(v.upper);
        }
        for (r, c) in p.constraints().iter().enumerate() {
            for (v, a) in c.expr.terms() {
                cols[v.index()].push((r, a));
            }
            let rhs = c.rhs - c.expr.constant();
            let (l, u) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, rhs),
                Sense::Ge => (rhs, f64::INFINITY),
                Sense::Eq => (rhs, rhs),
            };
            lb.push(l);
            ub.push(u);
        }
        for (v, c) in p.objective().terms() {
            cost[v.index()] = c;
        }
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            x[j] = if lb[j].is_finite() {
                lb[j]
            } else if ub[j].is_finite() {
                ub[j]
            } else {
                0.0
            };
        }
        let head: Vec<usize> = (n..n + m).collect();
        let mut pos = vec![NONBASIC; n + m];
        for (i, &j) in head.iter().enumerate() {
            pos[j] = i;
        }
        let factor = Factor::new(0, &[]).unwrap_or_else(|_| unreachable!());
        let mut s = Simplex { n, m, cols, lb, ub, cost, x, head, pos, factor };
        s.refactor();
        s
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            self.cols[j].clone()
        } else {
            vec![(j - self.n, -1.0)]
        }
    }

    fn refactor(&mut self) {
        loop {
            let cols: Vec<_> = self.head.iter().map(|&j| self.column(j)).collect();
            match Factor::new(self.m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    break;
                }
                Err(sing) => {
                    let mut changed = false;
                    for (&r, &p) in sing.rows.iter().zip(&sing.positions) {
                        let logical = self.n + r;
                        if self.pos[logical] != NONBASIC {
                            continue;
                        }
                        let out = self.head[p];
                        self.pos[out] = NONBASIC;
                        self.x[out] = self.snap_nonbasic(out, self.x[out]);
                        self.head[p] = logical;
                        self.pos[logical] = p;
                        changed = true;
                    }
                    if !changed {
                        self.reset_to_slack_basis();
                    }
                }
            }
        }
        self.recompute_basic();
    }

    fn reset_to_slack_basis(&mut self) {
        for j in 0..self.n {
            if self.pos[j] != NONBASIC {
                self.pos[j] = NONBASIC;
                self.x[j] = self.snap_nonbasic(j, self.x[j]);
            }
        }
        self.head = (self.n..self.n + self.m).collect();
        for (i, &j) in self.head.iter().enumerate() {
            self.pos[j] = i;
        }
    }

    fn snap_nonbasic(&self, j: usize, v: f64) -> f64 {
        let (l, u) = (self.lb[j], self.ub[j]);
        match (l.is_finite(), u.is_finite()) {
            (true, true) => {
                if (v - l).abs() <= (u - v).abs() {
                    l
                } else {
                    u
                }
            }
            (true, false) => l,
            (false, true) => u,
            (false, false) => 0.0,
        }
    }

    fn recompute_basic(&mut self) {
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.x[j] == 0.0 {
                continue;
            }
            if j < self.n {
                for &(r, a) in &self.cols[j] {
                    rhs[r] -= a * self.x[j];
                }
            } else {
                rhs[j - self.n] += self.x[j];
            }
        }
        self.factor.ftran(&mut rhs);
        for (i, &j) in self.head.iter().enumerate() {
            self.x[j] = rhs[i];
        }
    }

    fn reduced_cost(&self, j: usize, cj: f64, y: &[f64]) -> f64 {
        if j < self.n {
            cj - self.cols[j].iter().map(|&(r, a)| a * y[r]).sum::<f64>()
        } else {
            cj + y[j - self.n]
        }
    }

    /// Phase-1 basic costs, or `None` when the basis is primal feasible.
    fn infeasibility_costs(&self) -> Option<Vec<f64>> {
        let mut cb = vec![0.0; self.m];
        let mut any = false;
        for (i, &j) in self.head.iter().enumerate() {
            if self.x[j] < self.lb[j] - FEAS_TOL {
                cb[i] = -1.0;
                any = true;
            } else if self.x[j] > self.ub[j] + FEAS_TOL {
                cb[i] = 1.0;
                any = true;
            }
        }
        any.then_some(cb)
    }

    fn objective(&self) -> f64 {
        self.cost.iter().zip(&self.x).map(|(c, x)| c * x).sum()
    }

    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.factor.btran(&mut y);
        // A basic logical has zero reduced cost, so its row dual is exactly 0.
        for (r, yr) in y.iter_mut().enumerate() {
            if self.pos[self.n + r] != NONBASIC {
                *yr = 0.0;
            }
        }
        y
    }

    fn iterate(&mut self, bland: bool, improvement: &mut f64) -> Step {
        let phase1 = self.infeasibility_costs();
        let mut y = match &phase1 {
            Some(cb) => cb.clone(),
            None => self.head.iter().map(|&j| self.cost[j]).collect(),
        };
        self.factor.btran(&mut y);

        let mut entering = None;
        let mut best = 0.0;
        for j in 0..self.n + self.m {
            if self.pos[j] != NONBASIC || self.lb[j] == self.ub[j] {
                continue;
            }
            let cj = if phase1.is_some() { 0.0 } else { self.cost[j] };
            let d = self.reduced_cost(j, cj, &y);
            let eligible = (d < -FEAS_TOL && self.x[j] < self.ub[j])
                || (d > FEAS_TOL && self.x[j] > self.lb[j]);
            if !eligible {
                continue;
            }
            if bland {
                entering = Some((j, d));
                break;
            }
            if d.abs() > best {
                best = d.abs();
                entering = Some((j, d));
            }
        }
        let Some((q, dq)) = entering else {
            return if phase1.is_some() { Step::Infeasible } else { Step::Optimal };
        };
        let dir = if dq < 0.0 { 1.0 } else { -1.0 };
        let mut alpha = vec![0.0; self.m];
        for (r, a) in self.column(q) {
            alpha[r] = a;
        }
        self.factor.ftran(&mut alpha);

        let infeasible = phase1.is_some();
        let target = |s: &Simplex, i: usize, rate: f64| -> Option<f64> {
            let j = s.head[i];
            let (xv, l, u) = (s.x[j], s.lb[j], s.ub[j]);
            if rate > 0.0 {
                if infeasible && xv < l - FEAS_TOL {
                    Some(l)
                } else if xv <= u + FEAS_TOL && u.is_finite() {
                    Some(u)
                } else {
                    None
                }
            } else if infeasible && xv > u + FEAS_TOL {
                Some(u)
            } else if xv >= l - FEAS_TOL && l.is_finite() {
                Some(l)
            } else {
                None
            }
        };

        let range = self.ub[q] - self.lb[q];
        let mut relaxed = range;
        for i in 0..self.m {
            if alpha[i].abs() <= PIVOT_TOL {
                continue;
            }
            let rate = -dir * alpha[i];
            if let Some(t) = target(self, i, rate) {
                let slack = if rate > 0.0 { FEAS_TOL } else { -FEAS_TOL };
                let ratio = (t + slack - self.x[self.head[i]]) / rate;
                relaxed = relaxed.min(ratio.max(0.0));
            }
        }
        if relaxed == f64::INFINITY {
            return if infeasible { Step::Failure } else { Step::Unbounded };
        }

        let mut leave: Option<(usize, f64, f64)> = None;
        if bland {
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                if alpha[i].abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha[i];
                let Some(t) = target(self, i, rate) else { continue };
                let ratio = ((t - self.x[self.head[i]]) / rate).max(0.0);
                let better = ratio < best_ratio - 1e-12
                    || (ratio <= best_ratio + 1e-12
                        && leave.is_some_and(|(k, _, _)| self.head[i] < self.head[k]));
                if better {
                    best_ratio = best_ratio.min(ratio);
                    leave = Some((i, t, ratio));
                }
            }
            if leave.is_some_and(|(_, _, r)| range <= r) {
                leave = None;
            }
        } else if range > relaxed {
            let mut best_mag = 0.0;
            for i in 0..self.m {
                if alpha[i].abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha[i];
                let Some(t) = target(self, i, rate) else { continue };
                let ratio = ((t - self.x[self.head[i]]) / rate).max(0.0);
                if ratio <= relaxed && alpha[i].abs() > best_mag {
                    best_mag = alpha[i].abs();
                    leave = Some((i, t, ratio));
                }
            }
        }

        let theta = match leave {
            Some((_, _, r)) => r,
            None => range,
        };
        if !theta.is_finite() {
            return if infeasible { Step::Failure } else { Step::Unbounded };
        }
        *improvement = dq.abs() * theta;
        if theta > 0.0 {
            self.x[q] += dir * theta;
            for i in 0..self.m {
                if alpha[i] != 0.0 {
                    let j = self.head[i];
                    self.x[j] -= dir * theta * alpha[i];
                }
            }
        }
        match leave {
            None => {
                self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
            }
            Some((i, t, _)) => {
                let out = self.head[i];
                self.x[out] = t;
                self.pos[out] = NONBASIC;
                self.head[i] = q;
                self.pos[q] = i;
                self.factor.update(i, &alpha);
                if self.factor.num_updates() >= REFACTOR_EVERY {
                    self.refactor();
                }
            }
        }
        Step::Pivoted
    }
}

pub(crate) fn solve(p: &LpProblem) -> LpSolution {
    let mut s = Simplex::new(p);
    let (n, m) = (s.n, s.m);
    let cap = 20_000 + 50 * (n + m);
    let mut iterations = 0;
    let mut stall = 0;
    let mut bland = false;
    let mut fresh = true;
    let status = loop {
        if iterations >= cap {
            break Status::SolverFailure;
        }
        let mut improvement = 0.0;
        match s.iterate(bland, &mut improvement) {
            Step::Pivoted => {
                iterations += 1;
                fresh = false;
                if improvement > IMPROVEMENT_TOL {
                    stall = 0;
                    bland = false;
                } else {
                    stall += 1;
                    if stall >= BLAND_AFTER {
                        bland = true;
                    }
                }
            }
            terminal => {
                if !fresh {
                    s.refactor();
                    fresh = true;
                    continue;
                }
                break match terminal {
                    Step::Optimal => Status::Optimal,
                    Step::Infeasible => Status::Infeasible,
                    Step::Unbounded => Status::Unbounded,
                    _ => Status::SolverFailure,
                };
            }
        }
    };
    let primal = s.x[..n].to_vec();
    if status != Status::Optimal {
        return LpSolution {
            status,
            primal,
            objective: f64::NAN,
            duals: Vec::new(),
            reduced_costs: Vec::new(),
            iterations,
        };
    }
    let y = s.duals();
    let reduced_costs = (0..n).map(|j| s.reduced_cost(j, s.cost[j], &y)).collect();
    LpSolution {
        status,
        primal,
        objective: s.objective() + p.objective().constant(),
        duals: y,
        reduced_costs,
        iterations,
    }
}

//! Random bounded LPs and a brute-force vertex-enumeration oracle.
#![allow(dead_code)]

use lpcore::{LinearExpr, LpProblem, LpSolution, Sense};
use rand::Rng;

#[derive(Debug, Clone)]
pub struct DenseLp {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cost: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub senses: Vec<Sense>,
    pub rhs: Vec<f64>,
}

impl DenseLp {
    pub fn to_problem(&self) -> LpProblem {
        let mut p = LpProblem::new();
        let vars: Vec<_> = self
            .lower
            .iter()
            .zip(&self.upper)
            .map(|(&l, &u)| p.add_variable(l, u).unwrap())
            .collect();
        for ((row, &s), &b) in self.rows.iter().zip(&self.senses).zip(&self.rhs) {
            let e = LinearExpr::from_terms(vars.iter().copied().zip(row.iter().copied()));
            p.add_constraint(e, s, b).unwrap();
        }
        p.set_objective(LinearExpr::from_terms(vars.iter().copied().zip(self.cost.iter().copied())))
            .unwrap();
        p
    }

    pub fn feasible(&self, x: &[f64], tol: f64) -> bool {
        for j in 0..x.len() {
            if x[j] < self.lower[j] - tol || x[j] > self.upper[j] + tol {
                return false;
            }
        }
        self.rows.iter().zip(&self.senses).zip(&self.rhs).all(|((row, s), &b)| {
            let lhs: f64 = row.iter().zip(x).map(|(a, v)| a * v).sum();
            match s {
                Sense::Le => lhs <= b + tol,
                Sense::Ge => lhs >= b - tol,
                Sense::Eq => (lhs - b).abs() <= tol,
            }
        })
    }
}

/// Draws an LP with a finite box, `n` variables and `m` rows. With
/// `anchored`, the rows are built around a random interior point so the
/// instance is feasible.
pub fn random_lp(rng: &mut impl Rng, n: usize, m: usize, anchored: bool) -> DenseLp {
    let lower: Vec<f64> = (0..n).map(|_| rng.gen_range(-5..=2) as f64).collect();
    let upper: Vec<f64> = lower.iter().map(|l| l + rng.gen_range(1..=8) as f64).collect();
    let cost: Vec<f64> = (0..n).map(|_| rng.gen_range(-10..=10) as f64).collect();
    let x0: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| rng.gen_range(*l..*u)).collect();
    let mut rows = Vec::new();
    let mut senses = Vec::new();
    let mut rhs = Vec::new();
    for _ in 0..m {
        let row: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.6) { rng.gen_range(-5..=5) as f64 } else { 0.0 })
            .collect();
        let s = match rng.gen_range(0..10) {
            0 => Sense::Eq,
            1..=5 => Sense::Le,
            _ => Sense::Ge,
        };
        let at: f64 = row.iter().zip(&x0).map(|(a, v)| a * v).sum();
        let b = if anchored {
            let slack = rng.gen_range(0..=6) as f64;
            match s {
                Sense::Le => (at + slack).ceil(),
                Sense::Ge => (at - slack).floor(),
                Sense::Eq => at,
            }
        } else {
            rng.gen_range(-20..=20) as f64
        };
        rows.push(row);
        senses.push(s);
        rhs.push(b);
    }
    DenseLp { lower, upper, cost, rows, senses, rhs }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = a[r][c] / a[c][c];
                if f != 0.0 {
                    for k in c..n {
                        a[r][k] -= f * a[c][k];
                    }
                    b[r] -= f * b[c];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Minimum objective over all vertices, or `None` if no vertex is feasible.
pub fn vertex_optimum(lp: &DenseLp) -> Option<(f64, Vec<f64>)> {
    let n = lp.cost.len();
    let mut planes: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lower[j]));
        planes.push((e, lp.upper[j]));
    }
    for (row, &b) in lp.rows.iter().zip(&lp.rhs) {
        planes.push((row.clone(), b));
    }
    let h = planes.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let a = idx.iter().map(|&k| planes[k].0.clone()).collect();
        let b = idx.iter().map(|&k| planes[k].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.feasible(&x, 1e-9) {
                let obj: f64 = lp.cost.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.as_ref().is_none_or(|(o, _)| obj < *o) {
                    best = Some((obj, x));
                }
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return best;
            }
            k -= 1;
            if idx[k] < h - n + k {
                break;
            }
        }
        idx[k] += 1;
        for t in k + 1..n {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

/// Dual objective rebuilt from the reported row duals and the original data;
/// `None` if the duals violate sign conditions beyond `tol`.
pub fn dual_objective(lp: &DenseLp, sol: &LpSolution, tol: f64) -> Option<f64> {
    let n = lp.cost.len();
    let y = &sol.duals;
    let mut obj = 0.0;
    for (r, s) in lp.senses.iter().enumerate() {
        let ok = match s {
            Sense::Le => y[r] <= tol,
            Sense::Ge => y[r] >= -tol,
            Sense::Eq => true,
        };
        if !ok {
            return None;
        }
        obj += y[r] * lp.rhs[r];
    }
    for j in 0..n {
        let red = lp.cost[j] - (0..lp.rows.len()).map(|r| y[r] * lp.rows[r][j]).sum::<f64>();
        obj += if red >= 0.0 { red * lp.lower[j] } else { red * lp.upper[j] };
    }
    Some(obj)
}

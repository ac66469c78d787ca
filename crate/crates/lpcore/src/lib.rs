//! Bounded-variable linear programming.
//!
//! Build an [`LpProblem`] from variables with (possibly infinite) bounds and
//! sparse linear constraints, then call [`LpProblem::solve`]. The solver is a
//! primal simplex over a sparse LU-factored basis; it reports primal values,
//! the objective, constraint duals and reduced costs.
//!
//! Dual sign convention: the dual of a constraint is the derivative of the
//! optimal objective with respect to its right-hand side, so a binding `≥`
//! constraint in a minimization has a nonnegative dual.

mod expr;
mod format;
mod lu;
mod simplex;

use std::fmt;

pub use expr::LinearExpr;

/// Tolerance on primal feasibility and reduced-cost optimality.
pub const FEAS_TOL: f64 = 1e-6;
/// Smallest pivot magnitude accepted by the ratio test.
pub const PIVOT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VariableId(pub(crate) usize);

impl VariableId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub(crate) usize);

impl ConstraintId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("reversed bounds: lower {lower} > upper {upper}")]
    ReversedBounds { lower: f64, upper: f64 },
    #[error("invalid bound {0}")]
    InvalidBound(f64),
    #[error("unknown variable x{0}")]
    UnknownVariable(usize),
    #[error("unknown constraint c{0}")]
    UnknownConstraint(usize),
    #[error("non-finite coefficient {0}")]
    NonFinite(f64),
    #[error("solution is not optimal (status {0:?})")]
    NotOptimal(Status),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub lower: f64,
    pub upper: f64,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub expr: LinearExpr,
    pub sense: Sense,
    pub rhs: f64,
    pub name: Option<String>,
}

/// A minimization problem over bounded variables.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    variables: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: LinearExpr,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_variable(&mut self, lower: f64, upper: f64) -> Result<VariableId, LpError> {
        if lower.is_nan() || lower == f64::INFINITY {
            return Err(LpError::InvalidBound(lower));
        }
        if upper.is_nan() || upper == f64::NEG_INFINITY {
            return Err(LpError::InvalidBound(upper));
        }
        if lower > upper {
            return Err(LpError::ReversedBounds { lower, upper });
        }
        self.variables.push(Variable { lower, upper, name: None });
        Ok(VariableId(self.variables.len() - 1))
    }

    pub fn add_named_variable(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
    ) -> Result<VariableId, LpError> {
        let id = self.add_variable(lower, upper)?;
        self.variables[id.0].name = Some(name.into());
        Ok(id)
    }

    pub fn add_constraint(
        &mut self,
        expr: LinearExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstraintId, LpError> {
        self.check_expr(&expr)?;
        if !rhs.is_finite() {
            return Err(LpError::NonFinite(rhs));
        }
        self.constraints.push(Constraint { expr: expr.normalized(), sense, rhs, name: None });
        Ok(ConstraintId(self.constraints.len() - 1))
    }

    pub fn add_named_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinearExpr,
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstraintId, LpError> {
        let id = self.add_constraint(expr, sense, rhs)?;
        self.constraints[id.0].name = Some(name.into());
        Ok(id)
    }

    pub fn set_objective(&mut self, expr: LinearExpr) -> Result<(), LpError> {
        self.check_expr(&expr)?;
        self.objective = expr.normalized();
        Ok(())
    }

    pub fn set_bounds(&mut self, v: VariableId, lower: f64, upper: f64) -> Result<(), LpError> {
        if v.0 >= self.variables.len() {
            return Err(LpError::UnknownVariable(v.0));
        }
        if lower > upper {
            return Err(LpError::ReversedBounds { lower, upper });
        }
        self.variables[v.0].lower = lower;
        self.variables[v.0].upper = upper;
        Ok(())
    }

    pub fn set_rhs(&mut self, c: ConstraintId, rhs: f64) -> Result<(), LpError> {
        let con = self.constraints.get_mut(c.0).ok_or(LpError::UnknownConstraint(c.0))?;
        con.rhs = rhs;
        Ok(())
    }

    fn check_expr(&self, expr: &LinearExpr) -> Result<(), LpError> {
        for (v, c) in expr.terms() {
            if v.0 >= self.variables.len() {
                return Err(LpError::UnknownVariable(v.0));
            }
            if !c.is_finite() {
                return Err(LpError::NonFinite(c));
            }
        }
        if !expr.constant().is_finite() {
            return Err(LpError::NonFinite(expr.constant()));
        }
        Ok(())
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, v: VariableId) -> &Variable {
        &self.variables[v.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, c: ConstraintId) -> &Constraint {
        &self.constraints[c.0]
    }

    pub fn objective(&self) -> &LinearExpr {
        &self.objective
    }

    pub fn variable_ids(&self) -> impl Iterator<Item = VariableId> {
        (0..self.variables.len()).map(VariableId)
    }

    pub fn constraint_ids(&self) -> impl Iterator<Item = ConstraintId> {
        (0..self.constraints.len()).map(ConstraintId)
    }

    pub fn solve(&self) -> LpSolution {
        simplex::solve(self)
    }

    /// Largest bound or constraint violation of `x`, absolute.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (v, xv) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xv).max(xv - v.upper);
        }
        for c in &self.constraints {
            let lhs = c.expr.eval(x);
            let viol = match c.sense {
                Sense::Le => lhs - c.rhs,
                Sense::Ge => c.rhs - lhs,
                Sense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Human-readable LP text listing.
    pub fn to_lp_string(&self) -> String {
        format::write_lp(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Iteration limit or unrecoverable numerical trouble.
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: Status,
    pub primal: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn value(&self, v: VariableId) -> f64 {
        self.primal[v.0]
    }

    pub fn eval(&self, expr: &LinearExpr) -> f64 {
        expr.eval(&self.primal)
    }

    pub fn dual_of(&self, c: ConstraintId) -> Result<f64, LpError> {
        if self.status != Status::Optimal {
            return Err(LpError::NotOptimal(self.status));
        }
        self.duals.get(c.0).copied().ok_or(LpError::UnknownConstraint(c.0))
    }

    pub fn reduced_cost(&self, v: VariableId) -> Result<f64, LpError> {
        if self.status != Status::Optimal {
            return Err(LpError::NotOptimal(self.status));
        }
        self.reduced_costs.get(v.0).copied().ok_or(LpError::UnknownVariable(v.0))
    }
}

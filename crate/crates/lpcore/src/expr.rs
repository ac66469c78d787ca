use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::VariableId;

/// Sparse affine expression `Σ a_j x_j + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearExpr {
    terms: BTreeMap<VariableId, f64>,
    constant: f64,
}

impl LinearExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant_expr(c: f64) -> Self {
        LinearExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn term(v: VariableId, coef: f64) -> Self {
        let mut e = Self::new();
        e.add_term(v, coef);
        e
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VariableId, f64)>) -> Self {
        let mut e = Self::new();
        for (v, c) in terms {
            e.add_term(v, c);
        }
        e
    }

    /// Sum of the given variables with unit coefficients.
    pub fn sum(vars: impl IntoIterator<Item = VariableId>) -> Self {
        Self::from_terms(vars.into_iter().map(|v| (v, 1.0)))
    }

    pub fn add_term(&mut self, v: VariableId, coef: f64) -> &mut Self {
        *self.terms.entry(v).or_insert(0.0) += coef;
        self
    }

    pub fn add_constant(&mut self, c: f64) -> &mut Self {
        self.constant += c;
        self
    }

    pub fn with_term(mut self, v: VariableId, coef: f64) -> Self {
        self.add_term(v, coef);
        self
    }

    pub fn with_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    pub fn terms(&self) -> impl Iterator<Item = (VariableId, f64)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn coefficient(&self, v: VariableId) -> f64 {
        self.terms.get(&v).copied().unwrap_or(0.0)
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops zero coefficients.
    pub fn normalized(mut self) -> Self {
        self.terms.retain(|_, c| *c != 0.0);
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(v, c)| c * x[v.0]).sum::<f64>()
    }
}

impl AddAssign<&LinearExpr> for LinearExpr {
    fn add_assign(&mut self, rhs: &LinearExpr) {
        for (v, c) in rhs.terms() {
            self.add_term(v, c);
        }
        self.constant += rhs.constant;
    }
}

impl AddAssign for LinearExpr {
    fn add_assign(&mut self, rhs: LinearExpr) {
        *self += &rhs;
    }
}

impl SubAssign<&LinearExpr> for LinearExpr {
    fn sub_assign(&mut self, rhs: &LinearExpr) {
        for (v, c) in rhs.terms() {
            self.add_term(v, -c);
        }
        self.constant -= rhs.constant;
    }
}

impl SubAssign for LinearExpr {
    fn sub_assign(&mut self, rhs: LinearExpr) {
        *self -= &rhs;
    }
}

impl Add for LinearExpr {
    type Output = LinearExpr;
    fn add(mut self, rhs: LinearExpr) -> LinearExpr {
        self += &rhs;
        self
    }
}

impl Sub for LinearExpr {
    type Output = LinearExpr;
    fn sub(mut self, rhs: LinearExpr) -> LinearExpr {
        self -= &rhs;
        self
    }
}

impl Neg for LinearExpr {
    type Output = LinearExpr;
    fn neg(self) -> LinearExpr {
        self * -1.0
    }
}

impl Mul<f64> for LinearExpr {
    type Output = LinearExpr;
    fn mul(mut self, k: f64) -> LinearExpr {
        for c in self.terms.values_mut() {
            *c *= k;
        }
        self.constant *= k;
        self
    }
}

impl From<VariableId> for LinearExpr {
    fn from(v: VariableId) -> Self {
        LinearExpr::term(v, 1.0)
    }
}

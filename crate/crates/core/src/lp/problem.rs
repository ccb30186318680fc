use serde::{Deserialize, Serialize};

use super::LpError;

/// Sense of a linear row `a·x (sense) rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LpRow {
    pub fn new(coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> Self {
        Self { coeffs, sense, rhs }
    }

    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let act = self.activity(x);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

/// Minimisation LP: `min c·x + offset` subject to rows and `lower <= x <= upper`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub obj: Vec<f64>,
    pub obj_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, obj: f64, lower: f64, upper: f64) -> usize {
        self.obj.push(obj);
        self.lower.push(lower);
        self.upper.push(upper);
        self.obj.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(LpRow::new(coeffs, sense, rhs));
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.obj.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.obj_offset + self.obj.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(x)).fold(0.0, f64::max);
        let bounds = x
            .iter()
            .enumerate()
            .map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.obj.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(LpError::Dimension(format!(
                "{} objective coefficients but {} lower / {} upper bounds",
                n,
                self.lower.len(),
                self.upper.len()
            )));
        }
        if !self.obj_offset.is_finite() {
            return Err(LpError::NonFinite("objective offset".into()));
        }
        for j in 0..n {
            if !self.obj[j].is_finite() {
                return Err(LpError::NonFinite(format!("objective coefficient {j}")));
            }
            if self.lower[j].is_nan()
                || self.upper[j].is_nan()
                || self.lower[j] == f64::INFINITY
                || self.upper[j] == f64::NEG_INFINITY
            {
                return Err(LpError::NonFinite(format!("bounds of variable {j}")));
            }
            if self.lower[j] > self.upper[j] {
                return Err(LpError::InvalidBounds {
                    var: j,
                    lower: self.lower[j],
                    upper: self.upper[j],
                });
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::NonFinite(format!("rhs of row {i}")));
            }
            let mut seen = std::collections::HashSet::with_capacity(row.coeffs.len());
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Dimension(format!(
                        "row {i} references variable {j} of {n}"
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(format!("coefficient ({i}, {j})")));
                }
                if !seen.insert(j) {
                    return Err(LpError::Dimension(format!(
                        "row {i} lists variable {j} twice"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of an LP solve.
///
/// Dual values follow the shadow-price convention for minimisation:
/// `duals[i] <= 0` on `<=` rows, `>= 0` on `>=` rows, free on `=` rows, and
/// `obj = duals·rhs + sum_j reduced_costs[j] * x[j]` at optimality with the
/// nonbasic variables sitting on their bounds.
///
/// An infeasibility ray uses the same sign convention and satisfies
/// `ray·rhs > max_{lower <= x <= upper} (A^T ray)·x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective: f64,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub ray: Option<Vec<f64>>,
    pub iterations: usize,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Dual objective `duals·rhs + sum_j d_j * (bound of j chosen by the sign of d_j)`.
///
/// Returns `-inf` when a reduced cost points at an infinite bound.
pub fn dual_objective(problem: &LpProblem, duals: &[f64]) -> f64 {
    let mut d: Vec<f64> = problem.obj.clone();
    let mut value = problem.obj_offset;
    for (row, &y) in problem.rows.iter().zip(duals) {
        value += y * row.rhs;
        for &(j, a) in &row.coeffs {
            d[j] -= a * y;
        }
    }
    for j in 0..problem.num_vars() {
        let dj = d[j];
        if dj == 0.0 {
            continue;
        }
        let bound = if dj > 0.0 {
            problem.lower[j]
        } else {
            problem.upper[j]
        };
        if bound.is_infinite() {
            if dj.abs() < 1e-9 {
                continue;
            }
            return f64::NEG_INFINITY;
        }
        value += dj * bound;
    }
    value
}

/// Margin `ray·rhs - max_{box} (A^T ray)·x` of an infeasibility certificate.
///
/// A certificate is valid when the margin is strictly positive and `ray`
/// respects the row sign convention. Returns `-inf` on sign violations.
pub fn farkas_margin(problem: &LpProblem, ray: &[f64]) -> f64 {
    if ray.len() != problem.num_rows() {
        return f64::NEG_INFINITY;
    }
    let scale = ray.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return f64::NEG_INFINITY;
    }
    let sign_tol = 1e-9 * scale;
    let mut g = vec![0.0; problem.num_vars()];
    let mut value = 0.0;
    for (row, &y) in problem.rows.iter().zip(ray) {
        match row.sense {
            Sense::Le if y > sign_tol => return f64::NEG_INFINITY,
            Sense::Ge if y < -sign_tol => return f64::NEG_INFINITY,
            _ => {}
        }
        value += y * row.rhs;
        for &(j, a) in &row.coeffs {
            g[j] += a * y;
        }
    }
    for (j, &gj) in g.iter().enumerate() {
        if gj.abs() <= 1e-9 * scale {
            continue;
        }
        let bound = if gj > 0.0 {
            problem.upper[j]
        } else {
            problem.lower[j]
        };
        if bound.is_infinite() {
            return f64::NEG_INFINITY;
        }
        value -= gj * bound;
    }
    value
}

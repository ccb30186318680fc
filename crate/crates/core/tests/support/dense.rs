//! Dense tableau simplex used only as an independent reference in tests.
//!
//! Two phases with Bland's rule throughout; every variable is shifted to a
//! zero lower bound and finite upper bounds become explicit rows.

use vran_core::lp::{LpProblem, Sense};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DenseStatus {
    Optimal(f64),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// rows x (cols + 1); last column is the rhs
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

const EPS: f64 = 1e-9;

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&prow) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Minimise `cost` over the current tableau; `allowed` masks entering columns.
    fn optimise(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        loop {
            let m = self.t.len();
            let mut entering = None;
            for j in 0..self.cols {
                if !allowed[j] || self.basis.contains(&j) {
                    continue;
                }
                let mut d = cost[j];
                for i in 0..m {
                    d -= cost[self.basis[i]] * self.t[i][j];
                }
                if d < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return true };
            let mut best: Option<(f64, usize)> = None;
            for i in 0..m {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.t[i][self.cols] / a;
                    let better = match best {
                        None => true,
                        Some((br, bi)) => {
                            ratio < br - EPS
                                || (ratio <= br + EPS && self.basis[i] < self.basis[bi])
                        }
                    };
                    if better {
                        best = Some((ratio, i));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r)) => self.pivot(r, c),
            }
        }
    }
}

pub fn solve(problem: &LpProblem) -> DenseStatus {
    let n = problem.num_vars();
    let shift: Vec<f64> = problem.lower.clone();
    assert!(
        shift.iter().all(|v| v.is_finite()),
        "reference solver needs finite lower bounds"
    );

    // rows as (dense coeffs over shifted x, sense, rhs)
    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for row in &problem.rows {
        let mut a = vec![0.0; n];
        let mut rhs = row.rhs;
        for &(j, v) in &row.coeffs {
            a[j] += v;
            rhs -= v * shift[j];
        }
        rows.push((a, row.sense, rhs));
    }
    for j in 0..n {
        if problem.upper[j].is_finite() {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, Sense::Le, problem.upper[j] - shift[j]));
        }
    }
    for r in rows.iter_mut() {
        if r.2 < 0.0 {
            for v in r.0.iter_mut() {
                *v = -*v;
            }
            r.2 = -r.2;
            r.1 = match r.1 {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let arts = rows.iter().filter(|r| r.1 != Sense::Le).count();
    let cols = n + slacks + arts;
    let mut t = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    let (mut s, mut a) = (n, n + slacks);
    let mut is_art = vec![false; cols];
    for (i, (coef, sense, rhs)) in rows.iter().enumerate() {
        t[i][..n].copy_from_slice(coef);
        t[i][cols] = *rhs;
        match sense {
            Sense::Le => {
                t[i][s] = 1.0;
                basis[i] = s;
                s += 1;
            }
            Sense::Ge => {
                t[i][s] = -1.0;
                s += 1;
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
            Sense::Eq => {
                t[i][a] = 1.0;
                basis[i] = a;
                is_art[a] = true;
                a += 1;
            }
        }
    }
    let mut tab = Tableau { t, basis, cols };
    let phase1: Vec<f64> = (0..cols)
        .map(|j| if is_art[j] { 1.0 } else { 0.0 })
        .collect();
    let all = vec![true; cols];
    tab.optimise(&phase1, &all);
    let infeas: f64 = (0..m)
        .filter(|&i| is_art[tab.basis[i]])
        .map(|i| tab.t[i][cols])
        .sum();
    if infeas > 1e-7 {
        return DenseStatus::Infeasible;
    }
    // drive degenerate artificials out where possible
    for i in 0..m {
        if is_art[tab.basis[i]] {
            if let Some(c) = (0..n + slacks).find(|&j| tab.t[i][j].abs() > EPS) {
                tab.pivot(i, c);
            }
        }
    }
    let mut cost = vec![0.0; cols];
    cost[..n].copy_from_slice(&problem.obj);
    let allowed: Vec<bool> = (0..cols).map(|j| !is_art[j]).collect();
    if !tab.optimise(&cost, &allowed) {
        return DenseStatus::Unbounded;
    }
    let mut x = vec![0.0; cols];
    for i in 0..m {
        x[tab.basis[i]] = tab.t[i][cols];
    }
    let mut obj = problem.obj_offset;
    for j in 0..n {
        obj += problem.obj[j] * (x[j] + shift[j]);
    }
    DenseStatus::Optimal(obj)
}

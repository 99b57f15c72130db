//! Dense two-phase primal simplex for small, well-scaled instances.
//!
//! Free variables are split as x = u - v with u, v >= 0. Bland's rule is
//! used for both the entering and leaving choice, so the iteration cannot
//! cycle; a hard iteration cap converts pathological degeneracy into a
//! `NumericalFailure`. Problem sizes in this crate are tiny (tens of rows
//! and columns), so no sparsity or factorization is attempted.

use nalgebra::{DMatrix, DVector};

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Constraint sense for [`solve_lp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

/// One linear constraint `coeffs . x  (sense)  rhs`.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: DVector<f64>,
    pub rhs: f64,
    pub sense: Sense,
}

impl Constraint {
    pub fn new(coeffs: DVector<f64>, sense: Sense, rhs: f64) -> Self {
        Constraint { coeffs, rhs, sense }
    }
}

/// Result of maximizing an objective over a constraint set.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { objective: f64, point: DVector<f64> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    /// The optimal point, or an error naming the failure mode.
    pub fn optimal(self) -> Result<(f64, DVector<f64>)> {
        match self {
            LpOutcome::Optimal { objective, point } => Ok((objective, point)),
            LpOutcome::Infeasible => Err(Error::Empty),
            LpOutcome::Unbounded => Err(Error::UnboundedInput),
        }
    }
}

const PIVOT_TOL: f64 = 1e-10;
const MAX_ITER: usize = 50_000;

struct Tableau {
    /// (m+1) x (ncols+1); last row is the objective, last column the rhs.
    t: DMatrix<f64>,
    basis: Vec<usize>,
    m: usize,
    ncols: usize,
    blocked: Vec<bool>,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        self.t[(r, self.ncols)]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.t[(r, c)];
        let cols = self.ncols + 1;
        for j in 0..cols {
            self.t[(r, j)] /= piv;
        }
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[(i, c)];
            if f != 0.0 {
                for j in 0..cols {
                    let v = self.t[(r, j)];
                    self.t[(i, j)] -= f * v;
                }
            }
        }
        self.basis[r] = c;
    }

    /// Zero the objective-row entries of all basic columns.
    fn price_out(&mut self) {
        for r in 0..self.m {
            let c = self.basis[r];
            let f = self.t[(self.m, c)];
            if f != 0.0 {
                for j in 0..=self.ncols {
                    let v = self.t[(r, j)];
                    self.t[(self.m, j)] -= f * v;
                }
            }
        }
    }

    /// Run primal simplex (maximization) with Bland's rule.
    fn run(&mut self, tol: f64) -> Result<bool> {
        for _ in 0..MAX_ITER {
            // Entering: smallest-index unblocked column with positive reduced cost.
            let mut entering = None;
            for c in 0..self.ncols {
                if !self.blocked[c] && self.t[(self.m, c)] > tol {
                    entering = Some(c);
                    break;
                }
            }
            let Some(c) = entering else {
                return Ok(true); // optimal
            };
            // Leaving: minimal ratio, ties broken by smallest basic index.
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..self.m {
                let a = self.t[(r, c)];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(r) / a;
                    match leave {
                        None => leave = Some((r, ratio)),
                        Some((r0, best)) => {
                            if ratio < best - PIVOT_TOL
                                || (ratio < best + PIVOT_TOL && self.basis[r] < self.basis[r0])
                            {
                                leave = Some((r, ratio));
                            }
                        }
                    }
                }
            }
            let Some((r, _)) = leave else {
                return Ok(false); // unbounded
            };
            self.pivot(r, c);
        }
        Err(Error::NumericalFailure(
            "simplex iteration budget exhausted".into(),
        ))
    }
}

/// Maximize `objective . x` over the given constraints, x free in R^n.
///
/// The returned witness satisfies every constraint within `tol.lp`
/// (relative to the constraint's right-hand side magnitude); a violation
/// beyond that is reported as `NumericalFailure`.
pub fn solve_lp(
    objective: &DVector<f64>,
    constraints: &[Constraint],
    tol: &Tolerances,
) -> Result<LpOutcome> {
    let n = objective.len();
    for c in constraints {
        if c.coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.coeffs.len(),
            });
        }
    }
    let m = constraints.len();

    // Row-normalize so every rhs is nonnegative.
    let mut rows: Vec<(DVector<f64>, f64, Sense)> = Vec::with_capacity(m);
    for c in constraints {
        let (coeffs, rhs, sense) = if c.rhs < 0.0 {
            let flipped = match c.sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
            (-c.coeffs.clone(), -c.rhs, flipped)
        } else {
            (c.coeffs.clone(), c.rhs, c.sense)
        };
        rows.push((coeffs, rhs, sense));
    }

    // Column layout: u(n) | v(n) | slack/surplus(one per row except Eq) | artificial.
    let n_struct = 2 * n;
    let mut n_slack = 0usize;
    for (_, _, s) in &rows {
        if *s != Sense::Eq {
            n_slack += 1;
        }
    }
    let mut artificial_rows: Vec<usize> = Vec::new();
    for (i, (_, _, s)) in rows.iter().enumerate() {
        if *s != Sense::Le {
            artificial_rows.push(i);
        }
    }
    let n_art = artificial_rows.len();
    let ncols = n_struct + n_slack + n_art;

    let mut t = DMatrix::<f64>::zeros(m + 1, ncols + 1);
    let mut basis = vec![0usize; m];
    let mut slack_idx = 0usize;
    let mut art_idx = 0usize;
    for (i, (coeffs, rhs, sense)) in rows.iter().enumerate() {
        for j in 0..n {
            t[(i, j)] = coeffs[j];
            t[(i, n + j)] = -coeffs[j];
        }
        t[(i, ncols)] = *rhs;
        match sense {
            Sense::Le => {
                let c = n_struct + slack_idx;
                t[(i, c)] = 1.0;
                basis[i] = c;
                slack_idx += 1;
            }
            Sense::Ge => {
                let c = n_struct + slack_idx;
                t[(i, c)] = -1.0;
                slack_idx += 1;
                let a = n_struct + n_slack + art_idx;
                t[(i, a)] = 1.0;
                basis[i] = a;
                art_idx += 1;
            }
            Sense::Eq => {
                let a = n_struct + n_slack + art_idx;
                t[(i, a)] = 1.0;
                basis[i] = a;
                art_idx += 1;
            }
        }
    }

    let mut tab = Tableau {
        t,
        basis,
        m,
        ncols,
        blocked: vec![false; ncols],
    };
    let art_range = (n_struct + n_slack)..ncols;

    if n_art > 0 {
        // Phase 1: maximize minus the sum of artificials.
        for c in art_range.clone() {
            tab.t[(tab.m, c)] = -1.0;
        }
        tab.price_out();
        if !tab.run(tol.lp)? {
            return Err(Error::NumericalFailure("phase-1 unbounded".into()));
        }
        // The objective row's rhs cell carries the negated objective value,
        // which for phase 1 is exactly the artificial sum.
        let art_sum = tab.t[(tab.m, tab.ncols)];
        if art_sum > tol.lp * 10.0 {
            return Ok(LpOutcome::Infeasible);
        }
        // Pivot remaining artificials out of the basis; rows where that is
        // impossible are redundant and get zeroed permanently.
        for r in 0..tab.m {
            if art_range.contains(&tab.basis[r]) {
                let mut done = false;
                for c in 0..(n_struct + n_slack) {
                    if tab.t[(r, c)].abs() > 1e-8 {
                        tab.pivot(r, c);
                        done = true;
                        break;
                    }
                }
                if !done {
                    for j in 0..=tab.ncols {
                        tab.t[(r, j)] = 0.0;
                    }
                }
            }
        }
        for c in art_range.clone() {
            tab.blocked[c] = true;
            for i in 0..=tab.m {
                tab.t[(i, c)] = 0.0;
            }
        }
    }

    // Phase 2: install the real objective and price it out.
    for j in 0..=tab.ncols {
        tab.t[(tab.m, j)] = 0.0;
    }
    for j in 0..n {
        tab.t[(tab.m, j)] = objective[j];
        tab.t[(tab.m, n + j)] = -objective[j];
    }
    tab.price_out();
    if !tab.run(tol.lp)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut y = vec![0.0; ncols];
    for r in 0..tab.m {
        y[tab.basis[r]] = tab.rhs(r);
    }
    let point = DVector::from_fn(n, |i, _| y[i] - y[n + i]);

    // Certify the witness against the original constraints.
    for c in constraints {
        let lhs = c.coeffs.dot(&point);
        let slack = tol.lp * (1.0 + c.rhs.abs());
        let violated = match c.sense {
            Sense::Le => lhs > c.rhs + slack,
            Sense::Ge => lhs < c.rhs - slack,
            Sense::Eq => (lhs - c.rhs).abs() > slack,
        };
        if violated {
            return Err(Error::NumericalFailure(format!(
                "LP witness violates a constraint by {:e}",
                (lhs - c.rhs).abs()
            )));
        }
    }
    let objective_value = objective.dot(&point);
    Ok(LpOutcome::Optimal {
        objective: objective_value,
        point,
    })
}

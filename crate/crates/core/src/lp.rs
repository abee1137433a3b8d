//! Feasibility linear programs over the six basis wrenches.
//!
//! Both problems have three equality rows (moment, fx, fy):
//!
//! ```text
//! force balance:  min sum k_i   s.t.  sum k_i F_i = -F_ext,  k_i >= 0
//! form closure:   min sum k_i   s.t.  sum k_i F_i = 0,       k_i >= 1
//! ```
//!
//! They are solved with a dense two-phase simplex using Bland's rule. The
//! lower bound of the form-closure problem is removed by the shift
//! `k_i = 1 + u_i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::wrench::{Wrench, WrenchBasis};

pub const ITERATION_CAP: usize = 10_000;

const ROWS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack allowed on variable lower bounds.
    pub bound: f64,
    /// Slack allowed on the equality residual, infinity norm.
    pub residual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            bound: 1e-9,
            residual: 1e-7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub columns: Vec<Wrench>,
    pub rhs: Wrench,
    pub lower_bound: f64,
}

impl LpProblem {
    pub fn force_balance(basis: &WrenchBasis, ext: Wrench) -> Self {
        LpProblem {
            columns: basis.wrenches.to_vec(),
            rhs: -ext,
            lower_bound: 0.0,
        }
    }

    pub fn form_closure(basis: &WrenchBasis) -> Self {
        LpProblem {
            columns: basis.wrenches.to_vec(),
            rhs: Wrench::ZERO,
            lower_bound: 1.0,
        }
    }

    /// `sum k_i F_i - rhs`.
    pub fn residual(&self, coefficients: &[f64]) -> Wrench {
        let lhs = self
            .columns
            .iter()
            .zip(coefficients)
            .fold(Wrench::ZERO, |acc, (w, k)| acc + *k * *w);
        lhs + -self.rhs
    }

    pub fn solve(&self, tol: &Tolerances) -> Result<LpOutcome, LpError> {
        let n = self.columns.len();
        // Shift k = lb + u so that u >= 0.
        let shifted = (0..ROWS)
            .map(|r| {
                let col_sum: f64 = self.columns.iter().map(|c| c.to_array()[r]).sum();
                self.rhs.to_array()[r] - self.lower_bound * col_sum
            })
            .collect::<Vec<_>>();
        let a: Vec<[f64; ROWS]> = self.columns.iter().map(|c| c.to_array()).collect();

        let solution = match two_phase(&a, &shifted, tol.residual)? {
            Some(u) => u,
            None => return Ok(LpOutcome::infeasible()),
        };

        let coefficients: Vec<f64> = solution
            .iter()
            .map(|u| self.lower_bound + u.max(0.0))
            .collect();
        debug_assert_eq!(coefficients.len(), n);

        let residual = self.residual(&coefficients).norm_inf();
        let bounds_ok = solution.iter().all(|u| *u >= -tol.bound);
        if residual <= tol.residual && bounds_ok {
            let objective = coefficients.iter().sum();
            Ok(LpOutcome {
                feasible: true,
                coefficients,
                objective: Some(objective),
                residual: Some(residual),
            })
        } else {
            Ok(LpOutcome::infeasible())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpOutcome {
    pub feasible: bool,
    /// Empty when infeasible.
    pub coefficients: Vec<f64>,
    pub objective: Option<f64>,
    pub residual: Option<f64>,
}

impl LpOutcome {
    fn infeasible() -> Self {
        LpOutcome {
            feasible: false,
            coefficients: Vec::new(),
            objective: None,
            residual: None,
        }
    }
}

/// Gravity (or any external wrench) balance with non-negative coefficients.
pub fn solve_force_balance(basis: &WrenchBasis, ext: Wrench) -> Result<LpOutcome, LpError> {
    solve_force_balance_with(basis, ext, &Tolerances::default())
}

pub fn solve_force_balance_with(
    basis: &WrenchBasis,
    ext: Wrench,
    tol: &Tolerances,
) -> Result<LpOutcome, LpError> {
    LpProblem::force_balance(basis, ext).solve(tol)
}

/// First-order form closure: a zero-sum combination with every `k_i >= 1`.
pub fn solve_form_closure(basis: &WrenchBasis) -> Result<LpOutcome, LpError> {
    solve_form_closure_with(basis, &Tolerances::default())
}

pub fn solve_form_closure_with(basis: &WrenchBasis, tol: &Tolerances) -> Result<LpOutcome, LpError> {
    LpProblem::form_closure(basis).solve(tol)
}

/// Dense simplex tableau. Columns `0..n` are structural, `n..n+ROWS` are
/// artificials, and the last column is the right-hand side.
struct Tableau {
    cells: Vec<f64>,
    width: usize,
    basis: [usize; ROWS],
    /// Row `ROWS` holds reduced costs.
    iterations: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.cells[r * self.width + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for c in 0..w {
            *self.at_mut(row, c) /= p;
        }
        for r in 0..=ROWS {
            if r == row {
                continue;
            }
            let factor = self.at(r, col);
            if factor != 0.0 {
                for c in 0..w {
                    let v = self.at(row, c);
                    *self.at_mut(r, c) -= factor * v;
                }
            }
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Minimises the cost row over the columns in `allowed`. Bland's rule:
    /// lowest-index improving column, lowest-index basic variable on ties.
    fn optimise(&mut self, allowed: usize, eps: f64) -> Result<(), LpError> {
        loop {
            if self.iterations >= ITERATION_CAP {
                return Err(LpError::IterationLimit(ITERATION_CAP));
            }
            let entering = (0..allowed).find(|&c| self.at(ROWS, c) < -eps);
            let Some(col) = entering else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for r in 0..ROWS {
                let coef = self.at(r, col);
                if coef > eps {
                    let ratio = self.rhs(r) / coef;
                    best = match best {
                        None => Some((r, ratio)),
                        Some((br, bratio)) => {
                            if ratio < bratio - eps
                                || (ratio <= bratio + eps && self.basis[r] < self.basis[br])
                            {
                                Some((r, ratio))
                            } else {
                                Some((br, bratio))
                            }
                        }
                    };
                }
            }
            match best {
                Some((row, _)) => self.pivot(row, col),
                // Unbounded direction. Costs are non-negative in both phases
                // so this cannot happen; stop rather than loop.
                None => return Ok(()),
            }
        }
    }
}

/// Returns a basic feasible `u >= 0` with `A u = b` minimising `sum u`, or
/// `None` when phase one cannot drive the artificials below `feas_tol`.
fn two_phase(columns: &[[f64; ROWS]], b: &[f64], feas_tol: f64) -> Result<Option<Vec<f64>>, LpError> {
    let n = columns.len();
    let width = n + ROWS + 1;
    let mut t = Tableau {
        cells: vec![0.0; (ROWS + 1) * width],
        width,
        basis: [0; ROWS],
        iterations: 0,
    };

    for r in 0..ROWS {
        let sign = if b[r] < 0.0 { -1.0 } else { 1.0 };
        for (c, col) in columns.iter().enumerate() {
            *t.at_mut(r, c) = sign * col[r];
        }
        *t.at_mut(r, n + r) = 1.0;
        *t.at_mut(r, width - 1) = sign * b[r];
        t.basis[r] = n + r;
    }

    let scale = columns
        .iter()
        .flat_map(|c| c.iter())
        .chain(b.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let eps = 1e-12 * scale;

    // Phase one: minimise the sum of artificials, expressed through the
    // structural columns.
    for c in 0..width {
        if c >= n && c < n + ROWS {
            continue;
        }
        let s: f64 = (0..ROWS).map(|r| t.at(r, c)).sum();
        *t.at_mut(ROWS, c) = -s;
    }
    t.optimise(n, eps)?;

    let infeasibility: f64 = (0..ROWS)
        .filter(|&r| t.basis[r] >= n)
        .map(|r| t.rhs(r).abs())
        .sum();
    if infeasibility > feas_tol {
        return Ok(None);
    }

    // Drive remaining (zero-level) artificials out of the basis where a
    // structural column can replace them; rows that cannot are redundant.
    for r in 0..ROWS {
        if t.basis[r] >= n {
            if let Some(c) = (0..n)
                .filter(|c| !t.basis.contains(c))
                .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()))
            {
                if t.at(r, c).abs() > eps {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase two: minimise sum u over structural columns only. Artificials
    // still basic sit in redundant rows at value ~0 and are never re-entered.
    for c in 0..width {
        *t.at_mut(ROWS, c) = 0.0;
    }
    for c in 0..n {
        *t.at_mut(ROWS, c) = 1.0;
    }
    for r in 0..ROWS {
        let col = t.basis[r];
        if col < n {
            for c in 0..width {
                let v = t.at(r, c);
                *t.at_mut(ROWS, c) -= v;
            }
        }
    }
    t.optimise(n, eps)?;

    let mut u = vec![0.0; n];
    for r in 0..ROWS {
        if t.basis[r] < n {
            u[t.basis[r]] = t.rhs(r);
        }
    }
    Ok(Some(u))
}

/// Independent cone-membership check: enumerates every linearly independent
/// column subset of size at most three, solves the square (or
/// least-squares) system directly and accepts any non-negative solution.
/// By Carathéodory's theorem this is exact cone membership of `-ext`.
pub fn oracle_force_balance(basis: &WrenchBasis, ext: Wrench) -> bool {
    oracle_cone_membership(basis.columns(), -ext, &Tolerances::default())
}

pub fn oracle_cone_membership(columns: &[Wrench], target: Wrench, tol: &Tolerances) -> bool {
    let t = target.to_array();
    if target.norm_inf() <= tol.residual {
        return true;
    }
    let cols: Vec<[f64; 3]> = columns.iter().map(|c| c.to_array()).collect();
    let n = cols.len();
    let accept = |coeffs: &[f64], idx: &[usize]| -> bool {
        if coeffs.iter().any(|k| !k.is_finite() || *k < -tol.bound) {
            return false;
        }
        let mut r = [-t[0], -t[1], -t[2]];
        for (k, &i) in coeffs.iter().zip(idx) {
            for row in 0..3 {
                r[row] += k * cols[i][row];
            }
        }
        r.iter().all(|v| v.abs() <= tol.residual)
    };

    for i in 0..n {
        let c = cols[i];
        let cc = dot(c, c);
        if cc > 0.0 && accept(&[dot(c, t) / cc], &[i]) {
            return true;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (ci, cj) = (cols[i], cols[j]);
            // Normal equations of the 2-column least-squares problem.
            let (g11, g12, g22) = (dot(ci, ci), dot(ci, cj), dot(cj, cj));
            let det = g11 * g22 - g12 * g12;
            if det <= 1e-14 * g11 * g22 {
                continue;
            }
            let (r1, r2) = (dot(ci, t), dot(cj, t));
            let ki = (g22 * r1 - g12 * r2) / det;
            let kj = (g11 * r2 - g12 * r1) / det;
            if accept(&[ki, kj], &[i, j]) {
                return true;
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let m = [cols[i], cols[j], cols[k]];
                let det = det3(m[0], m[1], m[2]);
                let size = norm(m[0]) * norm(m[1]) * norm(m[2]);
                if det.abs() <= 1e-14 * size {
                    continue;
                }
                // Cramer's rule.
                let ki = det3(t, m[1], m[2]) / det;
                let kj = det3(m[0], t, m[2]) / det;
                let kk = det3(m[0], m[1], t) / det;
                if accept(&[ki, kj, kk], &[i, j, k]) {
                    return true;
                }
            }
        }
    }
    false
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Determinant of the matrix with the given columns.
fn det3(c0: [f64; 3], c1: [f64; 3], c2: [f64; 3]) -> f64 {
    c0[0] * (c1[1] * c2[2] - c1[2] * c2[1]) - c1[0] * (c0[1] * c2[2] - c0[2] * c2[1])
        + c2[0] * (c0[1] * c1[2] - c0[2] * c1[1])
}

//! Dense two-phase primal simplex with dual (shadow price) extraction.
//!
//! The problems solved in this crate are small (at most a few thousand
//! columns) and dense enough that a full tableau is the simplest robust
//! choice. Entering columns follow Dantzig's rule and fall back to Bland's
//! rule after a run of degenerate pivots, which rules out cycling.
//!
//! Dual values are reported as shadow prices of the stated objective:
//! at an optimum `objective == Σ rhs[i] * duals[i]`, whatever the sense.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpError {
    Infeasible { residual: f64 },
    Unbounded,
    IterationLimit(usize),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible { residual } => {
                write!(f, "infeasible (phase-one residual {residual:.3e})")
            }
            LpError::Unbounded => write!(f, "unbounded"),
            LpError::IterationLimit(n) => write!(f, "iteration limit {n} reached"),
        }
    }
}

impl std::error::Error for LpError {}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<(usize, f64)>,
    rel: Relation,
    rhs: f64,
}

/// A linear program over variables that are nonnegative unless marked free.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    sense: Sense,
    cost: Vec<f64>,
    free: Vec<bool>,
    rows: Vec<Row>,
    max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub iterations: usize,
}

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_STREAK: usize = 40;

impl LinearProgram {
    pub fn new(sense: Sense, n_vars: usize) -> Self {
        Self {
            sense,
            cost: vec![0.0; n_vars],
            free: vec![false; n_vars],
            rows: Vec::new(),
            max_iter: 200_000,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    /// Appends a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, free: bool) -> usize {
        self.cost.push(cost);
        self.free.push(free);
        self.cost.len() - 1
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.cost[var] = cost;
    }

    pub fn set_free(&mut self, var: usize) {
        self.free[var] = true;
    }

    pub fn set_max_iterations(&mut self, max_iter: usize) {
        self.max_iter = max_iter;
    }

    /// Adds `Σ coeffs · x (rel) rhs` and returns the row index. Repeated
    /// variable indices are summed.
    pub fn add_constraint(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> usize {
        debug_assert!(coeffs.iter().all(|&(j, _)| j < self.cost.len()));
        self.rows.push(Row { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).run(self)
    }
}

struct Tableau {
    m: usize,
    ncols: usize,
    // m rows of (ncols + 1) entries, last entry is the rhs
    t: Vec<f64>,
    basis: Vec<usize>,
    // structural column of user variable j (positive part) and negative part for free vars
    pos_col: Vec<usize>,
    neg_col: Vec<Option<usize>>,
    // identity column for each row (slack with +1, or artificial)
    id_col: Vec<usize>,
    flipped: Vec<bool>,
    artificial: Vec<bool>,
    iterations: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.rows.len();
        let mut ncols = 0;
        let mut pos_col = Vec::with_capacity(lp.cost.len());
        let mut neg_col = Vec::with_capacity(lp.cost.len());
        for &free in &lp.free {
            pos_col.push(ncols);
            ncols += 1;
            if free {
                neg_col.push(Some(ncols));
                ncols += 1;
            } else {
                neg_col.push(None);
            }
        }
        let mut slack_col = vec![None; m];
        for (i, row) in lp.rows.iter().enumerate() {
            if row.rel != Relation::Eq {
                slack_col[i] = Some(ncols);
                ncols += 1;
            }
        }
        let flipped: Vec<bool> = lp.rows.iter().map(|r| r.rhs < 0.0).collect();
        // decide identity columns; artificials appended after structural + slack columns
        let mut id_col = vec![0; m];
        let mut artificial = vec![false; ncols];
        for (i, row) in lp.rows.iter().enumerate() {
            let slack_sign = match row.rel {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => 0.0,
            } * if flipped[i] { -1.0 } else { 1.0 };
            if slack_sign > 0.0 {
                id_col[i] = slack_col[i].unwrap();
            } else {
                id_col[i] = ncols;
                ncols += 1;
                artificial.push(true);
            }
        }
        let stride = ncols + 1;
        let mut t = vec![0.0; m * stride];
        for (i, row) in lp.rows.iter().enumerate() {
            let sign = if flipped[i] { -1.0 } else { 1.0 };
            let r = &mut t[i * stride..(i + 1) * stride];
            for &(j, a) in &row.coeffs {
                r[pos_col[j]] += sign * a;
                if let Some(nc) = neg_col[j] {
                    r[nc] -= sign * a;
                }
            }
            if let Some(sc) = slack_col[i] {
                r[sc] = sign
                    * match row.rel {
                        Relation::Le => 1.0,
                        Relation::Ge => -1.0,
                        Relation::Eq => 0.0,
                    };
            }
            if artificial[id_col[i]] {
                r[id_col[i]] = 1.0;
            }
            r[ncols] = sign * row.rhs;
        }
        Tableau {
            m,
            ncols,
            t,
            basis: id_col.clone(),
            pos_col,
            neg_col,
            id_col,
            flipped,
            artificial,
            iterations: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.ncols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * (self.ncols + 1) + self.ncols]
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        let stride = self.ncols + 1;
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let r = &self.t[i * stride..i * stride + self.ncols];
                for (dj, &a) in d.iter_mut().zip(r) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn pivot(&mut self, row: usize, col: usize, d: &mut [f64]) {
        let stride = self.ncols + 1;
        let p = self.t[row * stride + col];
        {
            let r = &mut self.t[row * stride..(row + 1) * stride];
            for v in r.iter_mut() {
                *v /= p;
            }
            r[col] = 1.0;
        }
        let pivot_row: Vec<f64> = self.t[row * stride..(row + 1) * stride].to_vec();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.t[i * stride + col];
            if f != 0.0 {
                let r = &mut self.t[i * stride..(i + 1) * stride];
                for (v, &pv) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                r[col] = 0.0;
            }
        }
        let f = d[col];
        if f != 0.0 {
            for (dj, &pv) in d.iter_mut().zip(&pivot_row[..self.ncols]) {
                *dj -= f * pv;
            }
            d[col] = 0.0;
        }
        self.basis[row] = col;
        self.iterations += 1;
    }

    /// Runs simplex iterations on reduced costs `d`; columns with `blocked[j]` never enter.
    fn iterate(&mut self, d: &mut [f64], blocked: &[bool], max_iter: usize) -> Result<(), LpError> {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
            let bland = degenerate_run >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..self.ncols {
                if blocked[j] || d[j] >= -COST_TOL {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if d[j] < best {
                    best = d[j];
                    enter = Some(j);
                }
            }
            let Some(col) = enter else {
                return Ok(());
            };
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                match leave {
                    None => {
                        leave = Some(i);
                        best_ratio = ratio;
                    }
                    Some(l) => {
                        let tie = (ratio - best_ratio).abs() <= 1e-12 * (1.0 + best_ratio.abs());
                        if ratio < best_ratio && !tie {
                            leave = Some(i);
                            best_ratio = ratio;
                        } else if tie {
                            let better = if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                a > self.at(l, col)
                            };
                            if better {
                                leave = Some(i);
                                best_ratio = best_ratio.min(ratio);
                            }
                        }
                    }
                }
            }
            let Some(row) = leave else {
                return Err(LpError::Unbounded);
            };
            if best_ratio <= 1e-14 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col, d);
        }
    }

    fn run(mut self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        let n_art = self.artificial.iter().filter(|&&a| a).count();
        let no_block = vec![false; self.ncols];
        if n_art > 0 {
            let phase1: Vec<f64> = self.artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
            let mut d = self.reduced_costs(&phase1);
            self.iterate(&mut d, &no_block, lp.max_iter)?;
            let infeas: f64 = (0..self.m)
                .filter(|&i| self.artificial[self.basis[i]])
                .map(|i| self.rhs(i).abs())
                .sum();
            let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if infeas > 1e-8 * scale {
                return Err(LpError::Infeasible { residual: infeas });
            }
            // drive zero-level artificials out of the basis where possible
            for i in 0..self.m {
                if !self.artificial[self.basis[i]] {
                    continue;
                }
                let mut best: Option<(usize, f64)> = None;
                for j in 0..self.ncols {
                    if self.artificial[j] {
                        continue;
                    }
                    let a = self.at(i, j).abs();
                    if a > 1e-7 && best.is_none_or(|(_, b)| a > b) {
                        best = Some((j, a));
                    }
                }
                if let Some((j, _)) = best {
                    let mut dummy = vec![0.0; self.ncols];
                    self.pivot(i, j, &mut dummy);
                }
            }
        }
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; self.ncols];
        for (j, &c) in lp.cost.iter().enumerate() {
            cost[self.pos_col[j]] = sign * c;
            if let Some(nc) = self.neg_col[j] {
                cost[nc] = -sign * c;
            }
        }
        let mut d = self.reduced_costs(&cost);
        self.iterate(&mut d, &self.artificial.clone(), lp.max_iter)?;

        let mut col_val = vec![0.0; self.ncols];
        for i in 0..self.m {
            col_val[self.basis[i]] = self.rhs(i).max(0.0);
        }
        let x: Vec<f64> = (0..lp.cost.len())
            .map(|j| col_val[self.pos_col[j]] - self.neg_col[j].map_or(0.0, |nc| col_val[nc]))
            .collect();
        let objective = x.iter().zip(&lp.cost).map(|(a, b)| a * b).sum();
        let duals = (0..self.m)
            .map(|i| {
                let y = -d[self.id_col[i]];
                let y = if self.flipped[i] { -y } else { y };
                sign * y
            })
            .collect();
        Ok(LpSolution {
            objective,
            x,
            duals,
            iterations: self.iterations,
        })
    }
}

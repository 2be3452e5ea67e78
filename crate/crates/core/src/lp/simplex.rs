//! Bounded-variable revised simplex.
//!
//! Internal form: every row `i` gets a logical column `r_i = a_i'v` carrying
//! the row's range, so the system reads `A v - r = 0` with `lo <= (v, r) <= hi`.
//! Phase I adds one artificial per row whose logical cannot start basic.
//! The basis is held as sparse LU factors plus an eta file of updates and is
//! refactored every `refactor_every` pivots.
//!
//! Pricing uses Devex reference weights; after `bland_after` consecutive degenerate
//! pivots the kernel switches to Bland's smallest-index rule until the
//! objective strictly decreases again, which rules out cycling.

use super::lu::BasisFactor;
use super::{LpProblem, LpSolution, LpStatus, Sense, ACTIVE_TOL, FEAS_TOL, OPT_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SimplexOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    /// Overrides the default cap of `50 * (rows + vars)` pivots.
    pub max_iterations: Option<usize>,
    pub refactor_every: usize,
    pub bland_after: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            feas_tol: FEAS_TOL,
            opt_tol: OPT_TOL,
            pivot_tol: 1e-9,
            max_iterations: None,
            refactor_every: 50,
            bland_after: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic,
    Lower,
    Upper,
    /// Free nonbasic variable parked at zero.
    Zero,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Kernel<'o> {
    opts: &'o SimplexOptions,
    m: usize,
    n_struct: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    factor: BasisFactor,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
}

pub(super) fn solve_with(lp: &LpProblem, opts: &SimplexOptions) -> Result<LpSolution> {
    lp.validate()?;
    let m = lp.rows.len();
    let n = lp.n_vars;
    let max_iterations = opts.max_iterations.unwrap_or(50 * (m + n).max(1));

    // Transpose rows into structural columns.
    let mut counts = vec![0usize; n + 1];
    for row in &lp.rows {
        for &(j, _) in &row.coeffs {
            counts[j + 1] += 1;
        }
    }
    for j in 0..n {
        counts[j + 1] += counts[j];
    }
    let nnz = counts[n];
    let mut col_row = vec![0usize; nnz];
    let mut col_val = vec![0.0; nnz];
    let mut fill = counts.clone();
    for (i, row) in lp.rows.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            col_row[fill[j]] = i;
            col_val[fill[j]] = a;
            fill[j] += 1;
        }
    }
    let mut col_start = counts;
    let mut lo = lp.lower.clone();
    let mut hi = lp.upper.clone();
    for (i, row) in lp.rows.iter().enumerate() {
        col_row.push(i);
        col_val.push(-1.0);
        col_start.push(col_row.len());
        let (l, h) = match row.sense {
            Sense::Ge => (row.rhs, f64::INFINITY),
            Sense::Le => (f64::NEG_INFINITY, row.rhs),
            Sense::Eq => (row.rhs, row.rhs),
        };
        lo.push(l);
        hi.push(h);
    }

    let mut kernel = Kernel {
        opts,
        m,
        n_struct: n,
        col_start,
        col_row,
        col_val,
        lo,
        hi,
        x: Vec::new(),
        state: Vec::new(),
        basis: Vec::with_capacity(m),
        factor: BasisFactor::default(),
        iterations: 0,
        max_iterations,
        since_refactor: 0,
    };
    kernel.initial_basis();
    kernel.refactor()?;

    let n_art = kernel.ncols() - n - m;
    if n_art > 0 {
        let mut cost = vec![0.0; kernel.ncols()];
        cost[n + m..].iter_mut().for_each(|c| *c = 1.0);
        kernel.run(&cost)?;
        let scale = 1.0 + lp.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
        let infeasibility: f64 = kernel.x[n + m..].iter().sum();
        if infeasibility > 10.0 * opts.feas_tol * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                primal: Vec::new(),
                row_duals: Vec::new(),
                reduced_costs: Vec::new(),
                objective: f64::NAN,
                active_rows: Vec::new(),
                iterations: kernel.iterations,
            });
        }
        // Pin artificials at zero; basic ones stay until they block a ratio test.
        for k in n + m..kernel.ncols() {
            kernel.hi[k] = 0.0;
            if kernel.state[k] != State::Basic {
                kernel.x[k] = 0.0;
                kernel.state[k] = State::Lower;
            }
        }
    }

    let mut cost = vec![0.0; kernel.ncols()];
    cost[..n].copy_from_slice(&lp.objective);
    if let PhaseEnd::Unbounded = kernel.run(&cost)? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            primal: Vec::new(),
            row_duals: Vec::new(),
            reduced_costs: Vec::new(),
            objective: f64::NEG_INFINITY,
            active_rows: Vec::new(),
            iterations: kernel.iterations,
        });
    }
    kernel.refactor()?;

    let y = kernel.duals(&cost);
    let primal: Vec<f64> = kernel.x[..n].to_vec();
    let reduced_costs: Vec<f64> = (0..n).map(|j| kernel.reduced_cost(j, &cost, &y)).collect();
    let objective = lp.objective.iter().zip(&primal).map(|(c, v)| c * v).sum();
    let active_rows = super::active_rows(lp, &primal, ACTIVE_TOL);

    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        row_duals: y,
        reduced_costs,
        objective,
        active_rows,
        iterations: kernel.iterations,
    })
}

impl Kernel<'_> {
    fn ncols(&self) -> usize {
        self.lo.len()
    }

    fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_start[j]..self.col_start[j + 1];
        self.col_row[range.clone()].iter().copied().zip(self.col_val[range].iter().copied())
    }

    /// Structurals at a bound (or zero when free), logicals basic where their
    /// range admits the row activity, artificials elsewhere.
    fn initial_basis(&mut self) {
        let (n, m) = (self.n_struct, self.m);
        self.x = vec![0.0; n + m];
        self.state = vec![State::Lower; n + m];
        for j in 0..n {
            let (l, h) = (self.lo[j], self.hi[j]);
            if l.is_finite() {
                self.x[j] = l;
                self.state[j] = State::Lower;
            } else if h.is_finite() {
                self.x[j] = h;
                self.state[j] = State::Upper;
            } else {
                self.x[j] = 0.0;
                self.state[j] = State::Zero;
            }
        }
        let mut activity = vec![0.0; m];
        for j in 0..n {
            if self.x[j] != 0.0 {
                for (i, a) in self.column(j) {
                    activity[i] += a * self.x[j];
                }
            }
        }
        let tol = self.opts.feas_tol;
        for (i, &act) in activity.iter().enumerate() {
            let r = n + i;
            let (l, h) = (self.lo[r], self.hi[r]);
            if act >= l - tol && act <= h + tol {
                self.x[r] = act;
                self.state[r] = State::Basic;
                self.basis.push(r);
            } else {
                let target = if act < l { l } else { h };
                self.x[r] = target;
                self.state[r] = if act < l { State::Lower } else { State::Upper };
                let gap = target - act;
                let sign = if gap >= 0.0 { 1.0 } else { -1.0 };
                self.col_row.push(i);
                self.col_val.push(sign);
                self.col_start.push(self.col_row.len());
                self.lo.push(0.0);
                self.hi.push(f64::INFINITY);
                self.x.push(gap.abs());
                self.state.push(State::Basic);
                self.basis.push(self.lo.len() - 1);
            }
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| cost[j]).collect();
        if y.iter().any(|&c| c != 0.0) {
            self.factor.btran(&mut y, &mut Vec::new());
        } else {
            y.iter_mut().for_each(|v| *v = 0.0);
        }
        y
    }

    fn reduced_cost(&self, j: usize, cost: &[f64], y: &[f64]) -> f64 {
        cost[j] - self.column(j).map(|(i, a)| y[i] * a).sum::<f64>()
    }

    fn run(&mut self, cost: &[f64]) -> Result<PhaseEnd> {
        let m = self.m;
        let mut degenerate_streak = 0usize;
        let mut bland = false;
        let mut weights = vec![1.0; self.ncols()];
        let mut rho = vec![0.0; m];
        let mut eta = vec![0.0; m];
        let mut scratch = Vec::with_capacity(m);
        let mut d = vec![0.0; self.ncols()];
        let mut fresh = false;
        let mut rejected = vec![false; self.ncols()];
        let mut n_rejected = 0usize;
        loop {
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
                fresh = false;
            }
            if !fresh {
                self.reduced_costs(cost, &mut d);
                fresh = true;
            }

            // Pricing.
            let mut entering: Option<(usize, f64, f64)> = None;
            let mut best_score = 0.0;
            for j in 0..self.ncols() {
                let st = self.state[j];
                if st == State::Basic || self.lo[j] == self.hi[j] || rejected[j] {
                    continue;
                }
                let d = d[j];
                let dir = match st {
                    State::Lower if d < -self.opts.opt_tol => 1.0,
                    State::Upper if d > self.opts.opt_tol => -1.0,
                    State::Zero if d.abs() > self.opts.opt_tol => -d.signum(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, d, dir));
                    break;
                }
                let score = d * d / weights[j];
                if score > best_score {
                    best_score = score;
                    entering = Some((j, d, dir));
                }
            }
            let Some((q, d_q, dir)) = entering else {
                if self.since_refactor == 0 {
                    return Ok(PhaseEnd::Optimal);
                }
                // Confirm optimality on fresh factors and reduced costs.
                self.refactor()?;
                fresh = false;
                continue;
            };

            if self.iterations >= self.max_iterations {
                return Err(Error::NumericalFailure(format!(
                    "simplex exceeded {} iterations",
                    self.max_iterations
                )));
            }
            self.iterations += 1;

            // eta = B^-1 a_q
            eta.iter_mut().for_each(|e| *e = 0.0);
            for (r, a) in self.column(q) {
                eta[r] = a;
            }
            self.factor.ftran(&mut eta, &mut scratch);

            // Ratio test. Basic variable p moves at rate -dir * eta[p]. The
            // first pass bounds the step with bounds relaxed by `feas_tol`; the
            // second picks the largest pivot among rows blocking within it.
            let flip = self.hi[q] - self.lo[q];
            let mut rooms: Vec<(usize, f64, f64)> = Vec::new();
            let mut min_room = f64::INFINITY;
            let mut relaxed = f64::INFINITY;
            let tol = self.opts.feas_tol;
            for (p, &e) in eta.iter().enumerate() {
                if e.abs() <= self.opts.pivot_tol {
                    continue;
                }
                let j = self.basis[p];
                let rate = -dir * e;
                let gap = if rate < 0.0 { self.x[j] - self.lo[j] } else { self.hi[j] - self.x[j] };
                if gap == f64::INFINITY {
                    continue;
                }
                let room = gap.max(0.0) / rate.abs();
                min_room = min_room.min(room);
                relaxed = relaxed.min((gap.max(0.0) + tol) / rate.abs());
                rooms.push((p, room, e.abs()));
            }
            let (step, leave) = if flip <= min_room || (!bland && flip <= relaxed) {
                (flip, None)
            } else if bland {
                let tie = 1e-12 * (1.0 + min_room);
                let pick = rooms
                    .iter()
                    .filter(|&&(_, r, _)| r <= min_room + tie)
                    .min_by_key(|&&(p, _, _)| self.basis[p]);
                (min_room, pick.map(|&(p, _, _)| p))
            } else {
                let pick = rooms
                    .iter()
                    .filter(|&&(_, r, _)| r <= relaxed)
                    .max_by(|a, b| a.2.total_cmp(&b.2));
                (pick.map_or(f64::INFINITY, |&(_, r, _)| r), pick.map(|&(p, _, _)| p))
            };
            if step.is_infinite() {
                // A ray whose cost rate is noise relative to its length is a
                // direction inside the optimal face, not an improving one.
                let length = eta.iter().fold(1.0f64, |acc, e| acc.max(e.abs()));
                if d_q.abs() <= self.opts.opt_tol * length {
                    self.iterations -= 1;
                    rejected[q] = true;
                    n_rejected += 1;
                    continue;
                }
                if self.since_refactor == 0 {
                    return Ok(PhaseEnd::Unbounded);
                }
                // Confirm the ray on fresh factors.
                self.iterations -= 1;
                self.refactor()?;
                fresh = false;
                continue;
            }

            // Move.
            if step != 0.0 {
                self.x[q] += dir * step;
                for (p, &e) in eta.iter().enumerate() {
                    if e != 0.0 {
                        let j = self.basis[p];
                        self.x[j] -= dir * e * step;
                    }
                }
            }
            if n_rejected > 0 {
                rejected.iter_mut().for_each(|r| *r = false);
                n_rejected = 0;
            }
            if step * d_q.abs() > 0.0 {
                degenerate_streak = 0;
                bland = false;
            } else {
                degenerate_streak += 1;
                if degenerate_streak >= self.opts.bland_after {
                    bland = true;
                }
            }

            match leave {
                None => {
                    // Bound flip of the entering variable.
                    if dir > 0.0 {
                        self.x[q] = self.hi[q];
                        self.state[q] = State::Upper;
                    } else {
                        self.x[q] = self.lo[q];
                        self.state[q] = State::Lower;
                    }
                }
                Some(p) => {
                    self.update_pricing(p, q, &eta, &mut weights, &mut d, &mut rho, &mut scratch);
                    let out = self.basis[p];
                    let rate = -dir * eta[p];
                    if rate < 0.0 {
                        self.x[out] = self.lo[out];
                        self.state[out] = State::Lower;
                    } else {
                        self.x[out] = self.hi[out];
                        self.state[out] = State::Upper;
                    }
                    self.basis[p] = q;
                    self.state[q] = State::Basic;
                    self.pivot(p, &eta);
                }
            }
        }
    }

    fn reduced_costs(&self, cost: &[f64], d: &mut [f64]) {
        let y = self.duals(cost);
        for (j, dj) in d.iter_mut().enumerate() {
            *dj = if self.state[j] == State::Basic { 0.0 } else { self.reduced_cost(j, cost, &y) };
        }
    }

    /// Updates reduced costs and Devex reference weights from the pivot row
    /// when `q` enters at position `p`.
    #[allow(clippy::too_many_arguments)]
    fn update_pricing(
        &self,
        p: usize,
        q: usize,
        eta: &[f64],
        weights: &mut [f64],
        d: &mut [f64],
        rho: &mut [f64],
        scratch: &mut Vec<f64>,
    ) {
        rho.iter_mut().for_each(|r| *r = 0.0);
        rho[p] = 1.0;
        self.factor.btran(rho, scratch);
        let alpha_q = eta[p];
        let w_q = weights[q];
        let theta = d[q] / alpha_q;
        for j in 0..self.ncols() {
            if j == q || self.state[j] == State::Basic {
                continue;
            }
            let alpha: f64 = self.column(j).map(|(i, a)| rho[i] * a).sum();
            if alpha != 0.0 {
                d[j] -= theta * alpha;
                let ratio = alpha / alpha_q;
                weights[j] = weights[j].max(ratio * ratio * w_q);
            }
        }
        let out = self.basis[p];
        d[q] = 0.0;
        d[out] = -theta;
        weights[out] = (w_q / (alpha_q * alpha_q)).max(1.0);
    }

    fn pivot(&mut self, p: usize, eta: &[f64]) {
        self.factor.update(p, eta);
        self.since_refactor += 1;
    }

    /// Refactors the basis and recomputes the basic values.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        self.since_refactor = 0;
        let factor = BasisFactor::new(m, |p| self.column(self.basis[p]))?;
        self.factor = factor;
        // x_B = -B^-1 (N x_N)
        let mut rhs = vec![0.0; m];
        for j in 0..self.ncols() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                for (i, a) in self.column(j) {
                    rhs[i] -= a * xj;
                }
            }
        }
        self.factor.ftran(&mut rhs, &mut Vec::new());
        for (p, &j) in self.basis.iter().enumerate() {
            self.x[j] = rhs[p];
        }
        Ok(())
    }
}

//! Sparse LU factors of a simplex basis with product-form updates.
//!
//! Columns are factored in order of increasing nonzero count, which puts
//! logical and artificial columns first and keeps most of the factor
//! triangular. Pivots are chosen by threshold partial pivoting, breaking ties
//! toward rows with few nonzeros. Basis changes append an eta column; the
//! caller refactors once the eta file grows.

use crate::error::{Error, Result};

const PIVOT_THRESHOLD: f64 = 0.1;
const SINGULAR_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Default)]
pub(super) struct BasisFactor {
    m: usize,
    /// Pivot `k` eliminates row `prow[k]` using basis position `pcol[k]`.
    prow: Vec<usize>,
    pcol: Vec<usize>,
    l_start: Vec<usize>,
    l_row: Vec<usize>,
    l_val: Vec<f64>,
    /// Off-diagonal entries of `U` column `k`, indexed by earlier pivots.
    u_start: Vec<usize>,
    u_piv: Vec<usize>,
    u_val: Vec<f64>,
    u_diag: Vec<f64>,
    eta_pos: Vec<usize>,
    eta_piv: Vec<f64>,
    eta_start: Vec<usize>,
    eta_idx: Vec<usize>,
    eta_val: Vec<f64>,
}

impl BasisFactor {
    /// Factors the `m x m` basis whose column at position `p` is `column(p)`,
    /// given as `(row, value)` pairs.
    pub(super) fn new<'a, F, I>(m: usize, column: F) -> Result<Self>
    where
        F: Fn(usize) -> I,
        I: Iterator<Item = (usize, f64)> + 'a,
    {
        let cols: Vec<Vec<(usize, f64)>> = (0..m).map(|p| column(p).filter(|&(_, v)| v != 0.0).collect()).collect();
        let mut row_count = vec![0usize; m];
        for col in &cols {
            for &(i, _) in col {
                row_count[i] += 1;
            }
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&p| cols[p].len());

        let mut f = BasisFactor {
            m,
            prow: Vec::with_capacity(m),
            pcol: Vec::with_capacity(m),
            l_start: vec![0],
            u_start: vec![0],
            u_diag: Vec::with_capacity(m),
            eta_start: vec![0],
            ..Default::default()
        };
        let mut pivot_of_row = vec![usize::MAX; m];
        let mut w = vec![0.0; m];
        let mut touched: Vec<usize> = Vec::new();
        let mut marked = vec![false; m];

        for (k, &p) in order.iter().enumerate() {
            for &(i, v) in &cols[p] {
                w[i] = v;
                if !marked[i] {
                    marked[i] = true;
                    touched.push(i);
                }
            }
            // Eliminate with earlier pivots, in pivot order.
            for j in 0..k {
                let r = f.prow[j];
                let v = w[r];
                if v == 0.0 {
                    continue;
                }
                for t in f.l_start[j]..f.l_start[j + 1] {
                    let i = f.l_row[t];
                    w[i] -= f.l_val[t] * v;
                    if !marked[i] {
                        marked[i] = true;
                        touched.push(i);
                    }
                }
            }
            let mut amax = 0.0f64;
            for &i in &touched {
                if pivot_of_row[i] == usize::MAX {
                    amax = amax.max(w[i].abs());
                }
            }
            if amax < SINGULAR_TOL {
                return Err(Error::NumericalFailure("singular basis during factorization".into()));
            }
            let mut pick = usize::MAX;
            for &i in &touched {
                if pivot_of_row[i] != usize::MAX || w[i].abs() < PIVOT_THRESHOLD * amax {
                    continue;
                }
                if pick == usize::MAX
                    || row_count[i] < row_count[pick]
                    || (row_count[i] == row_count[pick] && w[i].abs() > w[pick].abs())
                {
                    pick = i;
                }
            }
            let diag = w[pick];
            for &i in &touched {
                let v = w[i];
                if v != 0.0 && i != pick {
                    if pivot_of_row[i] != usize::MAX {
                        f.u_piv.push(pivot_of_row[i]);
                        f.u_val.push(v);
                    } else {
                        f.l_row.push(i);
                        f.l_val.push(v / diag);
                    }
                }
                w[i] = 0.0;
                marked[i] = false;
            }
            touched.clear();
            pivot_of_row[pick] = k;
            f.prow.push(pick);
            f.pcol.push(p);
            f.u_diag.push(diag);
            f.l_start.push(f.l_row.len());
            f.u_start.push(f.u_piv.len());
        }
        Ok(f)
    }

    /// Solves `B x = a` in place: `a` is indexed by row on entry and by basis
    /// position on exit.
    pub(super) fn ftran(&self, a: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        for k in 0..m {
            let v = a[self.prow[k]];
            if v != 0.0 {
                for t in self.l_start[k]..self.l_start[k + 1] {
                    a[self.l_row[t]] -= self.l_val[t] * v;
                }
            }
        }
        scratch.clear();
        scratch.resize(m, 0.0);
        for k in (0..m).rev() {
            let v = a[self.prow[k]] / self.u_diag[k];
            if v != 0.0 {
                for t in self.u_start[k]..self.u_start[k + 1] {
                    a[self.prow[self.u_piv[t]]] -= self.u_val[t] * v;
                }
            }
            scratch[self.pcol[k]] = v;
        }
        a.copy_from_slice(scratch);
        for (t, &p) in self.eta_pos.iter().enumerate() {
            let xp = a[p] / self.eta_piv[t];
            a[p] = xp;
            if xp != 0.0 {
                for s in self.eta_start[t]..self.eta_start[t + 1] {
                    a[self.eta_idx[s]] -= self.eta_val[s] * xp;
                }
            }
        }
    }

    /// Solves `B' y = c` in place: `c` is indexed by basis position on entry
    /// and by row on exit.
    pub(super) fn btran(&self, c: &mut [f64], scratch: &mut Vec<f64>) {
        let m = self.m;
        for (t, &p) in self.eta_pos.iter().enumerate().rev() {
            let mut s = c[p];
            for q in self.eta_start[t]..self.eta_start[t + 1] {
                s -= self.eta_val[q] * c[self.eta_idx[q]];
            }
            c[p] = s / self.eta_piv[t];
        }
        scratch.clear();
        scratch.resize(m, 0.0);
        for k in 0..m {
            let mut s = c[self.pcol[k]];
            for t in self.u_start[k]..self.u_start[k + 1] {
                s -= self.u_val[t] * scratch[self.u_piv[t]];
            }
            scratch[k] = s / self.u_diag[k];
        }
        for k in 0..m {
            c[self.prow[k]] = scratch[k];
        }
        for k in (0..m).rev() {
            let mut s = 0.0;
            for t in self.l_start[k]..self.l_start[k + 1] {
                s += self.l_val[t] * c[self.l_row[t]];
            }
            c[self.prow[k]] -= s;
        }
    }

    /// Records that the column with `B^-1 a = alpha` replaced position `p`.
    pub(super) fn update(&mut self, p: usize, alpha: &[f64]) {
        self.eta_pos.push(p);
        self.eta_piv.push(alpha[p]);
        for (i, &a) in alpha.iter().enumerate() {
            if i != p && a != 0.0 {
                self.eta_idx.push(i);
                self.eta_val.push(a);
            }
        }
        self.eta_start.push(self.eta_idx.len());
    }
}

//! Nominal problems `min c'v, v in V` with `V` a non-empty polytope.
//!
//! Two graph families are provided: shortest path on a grid DAG and
//! bipartite matching on a random edge set. Custom polytopes `{Av >= b}` (with
//! optional equality rows) cover small hand-built instances.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LpProblem, Row, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    ShortestPathGrid,
    BipartiteMatching,
    Custom,
}

/// Serializable descriptor from which a [`NominalProblem`] can be rebuilt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Grid {
        rows: usize,
        cols: usize,
    },
    Matching {
        n_left: usize,
        n_right: usize,
        n_edges: usize,
        seed: u64,
        edges: Vec<(usize, usize)>,
    },
    Custom {
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        eq: Vec<bool>,
    },
}

/// The feasible set in the form used by the duality algebra: rows
/// `a_j'v >= b_j`, or `a_j'v = b_j` where `equality[j]` is set. `LE` rows are
/// negated and variable bounds appear as ordinary rows. Duals of `GE` rows are
/// sign-constrained; duals of equality rows are free.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub n: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub equality: Vec<bool>,
}

impl Polytope {
    pub fn from_lp(lp: &LpProblem) -> Self {
        let n = lp.n_vars;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut equality = Vec::new();
        let dense = |row: &Row, sign: f64| {
            let mut v = vec![0.0; n];
            for &(j, c) in &row.coeffs {
                v[j] = sign * c;
            }
            v
        };
        for row in &lp.rows {
            match row.sense {
                Sense::Ge | Sense::Eq => {
                    a.push(dense(row, 1.0));
                    b.push(row.rhs);
                    equality.push(row.sense == Sense::Eq);
                }
                Sense::Le => {
                    a.push(dense(row, -1.0));
                    b.push(-row.rhs);
                    equality.push(false);
                }
            }
        }
        for j in 0..n {
            for (bound, sign) in [(lp.lower[j], 1.0), (-lp.upper[j], -1.0)] {
                if bound.is_finite() {
                    let mut v = vec![0.0; n];
                    v[j] = sign;
                    a.push(v);
                    b.push(bound);
                    equality.push(false);
                }
            }
        }
        Polytope { n, a, b, equality }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// `(j, a_j)` pairs of the nonzeros in row `j`.
    pub fn row_entries(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.a[j].iter().copied().enumerate().filter(|&(_, x)| x != 0.0)
    }

    /// The polytope as an LP with free variables and the given objective.
    pub fn to_lp(&self, objective: &[f64]) -> LpProblem {
        let mut lp = LpProblem::new(self.n).with_objective(objective.to_vec());
        for j in 0..self.m() {
            let sense = if self.equality[j] { Sense::Eq } else { Sense::Ge };
            lp.add_row(Row::new(self.row_entries(j), sense, self.b[j]));
        }
        lp
    }

    /// Rows tight at `v` within `tol` (relative to the rhs magnitude).
    pub fn tight_rows(&self, v: &[f64], tol: f64) -> Vec<usize> {
        (0..self.m())
            .filter(|&j| {
                let act: f64 = self.a[j].iter().zip(v).map(|(a, x)| a * x).sum();
                (act - self.b[j]).abs() <= tol * (1.0 + self.b[j].abs())
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct NominalProblem {
    pub kind: ProblemKind,
    pub spec: ProblemSpec,
    /// Feasible set with a zero objective; costs arrive per sample.
    pub lp: LpProblem,
    pub polytope: Polytope,
    /// Arc list `(tail, head)`; its order is the coordinate order of `v` and `c`.
    pub edges: Vec<(usize, usize)>,
    pub n_nodes: usize,
    /// Set when generated weights are negated so that maximization becomes `min c'v`.
    pub negated_weights: bool,
}

impl NominalProblem {
    fn assemble(
        kind: ProblemKind,
        spec: ProblemSpec,
        lp: LpProblem,
        edges: Vec<(usize, usize)>,
        n_nodes: usize,
        negated_weights: bool,
    ) -> Self {
        let polytope = Polytope::from_lp(&lp);
        NominalProblem { kind, spec, lp, polytope, edges, n_nodes, negated_weights }
    }

    pub fn n(&self) -> usize {
        self.lp.n_vars
    }

    /// Sign applied to generated weights to obtain minimization costs.
    pub fn cost_sign(&self) -> f64 {
        if self.negated_weights {
            -1.0
        } else {
            1.0
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self.kind {
            ProblemKind::ShortestPathGrid => "sp",
            ProblemKind::BipartiteMatching => "bm",
            ProblemKind::Custom => "custom",
        }
    }

    pub fn from_spec(spec: &ProblemSpec) -> Result<Self> {
        match spec {
            ProblemSpec::Grid { rows, cols } => grid_shortest_path(*rows, *cols),
            ProblemSpec::Matching { n_left, n_right, n_edges, seed, edges } => {
                let built = bipartite_matching(*n_left, *n_right, *n_edges, *seed)?;
                if &built.edges != edges {
                    return Err(Error::Schema(
                        "matching edge list does not match its generation seed".into(),
                    ));
                }
                Ok(built)
            }
            ProblemSpec::Custom { a, b, eq } => custom(a.clone(), b.clone(), eq.clone()),
        }
    }
}

/// Shortest path from the north-west to the south-east corner of a
/// `rows x cols` grid with east and south arcs only.
pub fn grid_shortest_path(rows: usize, cols: usize) -> Result<NominalProblem> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidDimension(format!("grid must be at least 2x2, got {rows}x{cols}")));
    }
    let node = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((node(r, c), node(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((node(r, c), node(r + 1, c)));
            }
        }
    }
    let n_nodes = rows * cols;
    let mut lp = LpProblem::new(edges.len());
    for u in 0..n_nodes {
        let coeffs = edges.iter().enumerate().filter_map(|(e, &(t, h))| {
            if t == u {
                Some((e, 1.0))
            } else if h == u {
                Some((e, -1.0))
            } else {
                None
            }
        });
        let supply = if u == 0 {
            1.0
        } else if u == n_nodes - 1 {
            -1.0
        } else {
            0.0
        };
        lp.add_row(Row::new(coeffs, Sense::Eq, supply));
    }
    for e in 0..edges.len() {
        lp.set_bounds(e, 0.0, f64::INFINITY);
    }
    Ok(NominalProblem::assemble(
        ProblemKind::ShortestPathGrid,
        ProblemSpec::Grid { rows, cols },
        lp,
        edges,
        n_nodes,
        false,
    ))
}

/// Bipartite matching relaxation on `n_edges` edges sampled uniformly without
/// replacement from the complete bipartite graph. Left nodes are
/// `0..n_left`, right nodes `n_left..n_left + n_right`.
pub fn bipartite_matching(n_left: usize, n_right: usize, n_edges: usize, seed: u64) -> Result<NominalProblem> {
    let full = n_left * n_right;
    if n_edges > full {
        return Err(Error::InvalidDimension(format!(
            "{n_edges} edges requested but the complete {n_left}x{n_right} bipartite graph has {full}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = index::sample(&mut rng, full, n_edges).into_vec();
    picked.sort_unstable();
    let edges: Vec<(usize, usize)> = picked.iter().map(|&k| (k / n_right, n_left + k % n_right)).collect();
    let n_nodes = n_left + n_right;
    let mut lp = LpProblem::new(n_edges);
    for u in 0..n_nodes {
        let coeffs = edges.iter().enumerate().filter(|(_, &(l, r))| l == u || r == u).map(|(e, _)| (e, 1.0));
        lp.add_row(Row::new(coeffs, Sense::Le, 1.0));
    }
    for e in 0..n_edges {
        lp.set_bounds(e, 0.0, f64::INFINITY);
    }
    Ok(NominalProblem::assemble(
        ProblemKind::BipartiteMatching,
        ProblemSpec::Matching { n_left, n_right, n_edges, seed, edges: edges.clone() },
        lp,
        edges,
        n_nodes,
        true,
    ))
}

/// Polytope `{v : a_j'v >= b_j}` (equality where `eq[j]`), checked to be
/// bounded and non-empty.
pub fn custom(a: Vec<Vec<f64>>, b: Vec<f64>, eq: Vec<bool>) -> Result<NominalProblem> {
    if a.len() != b.len() || (!eq.is_empty() && eq.len() != a.len()) {
        return Err(Error::InvalidDimension("row count mismatch between a, b and eq".into()));
    }
    let n = a.first().map_or(0, Vec::len);
    if n == 0 || a.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidDimension("rows of a must share a positive length".into()));
    }
    let mut lp = LpProblem::new(n);
    for (j, (row, &rhs)) in a.iter().zip(&b).enumerate() {
        let sense = if eq.get(j).copied().unwrap_or(false) { Sense::Eq } else { Sense::Ge };
        lp.add_row(Row::dense(row, sense, rhs));
    }
    if !lp::assert_bounded_nonempty(&lp)? {
        return Err(Error::MalformedProblem("custom polytope is empty or unbounded".into()));
    }
    let edges = (0..n).map(|j| (j, j)).collect();
    Ok(NominalProblem::assemble(ProblemKind::Custom, ProblemSpec::Custom { a, b, eq }, lp, edges, 0, false))
}

/// `{v1 + v2 <= 1, v >= 0}`.
pub fn triangle() -> NominalProblem {
    custom(vec![vec![-1.0, -1.0], vec![1.0, 0.0], vec![0.0, 1.0]], vec![-1.0, 0.0, 0.0], Vec::new())
        .expect("triangle is a polytope")
}

/// The unit cube `[0, 1]^n`.
pub fn unit_box(n: usize) -> NominalProblem {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for j in 0..n {
        let mut lo = vec![0.0; n];
        lo[j] = 1.0;
        let mut hi = vec![0.0; n];
        hi[j] = -1.0;
        a.push(lo);
        b.push(0.0);
        a.push(hi);
        b.push(-1.0);
    }
    custom(a, b, Vec::new()).expect("unit box is a polytope")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_5x5_dimensions() {
        let p = grid_shortest_path(5, 5).unwrap();
        assert_eq!(p.n_nodes, 25);
        assert_eq!(p.n(), 40);
        assert_eq!(p.polytope.m(), 65);
        assert!(p.edges.iter().all(|&(t, h)| t < h));
    }

    #[test]
    fn grid_too_small() {
        assert!(matches!(grid_shortest_path(1, 5), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn grid_2x2_has_two_paths() {
        let p = grid_shortest_path(2, 2).unwrap();
        assert_eq!((p.n_nodes, p.n()), (4, 4));
        for cost in [[1.0, 5.0, 1.0, 5.0], [5.0, 1.0, 5.0, 1.0]] {
            let sol = lp::solve(&p.polytope.to_lp(&cost)).unwrap();
            let used: Vec<usize> = (0..4).filter(|&e| sol.primal[e] > 0.5).collect();
            assert_eq!(used.len(), 2);
            assert!((sol.objective - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn matching_dimensions_and_determinism() {
        let p = bipartite_matching(13, 12, 40, 3).unwrap();
        assert_eq!(p.n(), 40);
        assert_eq!(p.lp.rows.len(), 25);
        assert!(p.negated_weights);
        let q = bipartite_matching(13, 12, 40, 3).unwrap();
        assert_eq!(p.edges, q.edges);
        let mut sorted = p.edges.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), 40);
    }

    #[test]
    fn matching_too_many_edges() {
        assert!(matches!(bipartite_matching(2, 2, 5, 0), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn single_edge_matching() {
        let p = bipartite_matching(1, 1, 1, 9).unwrap();
        let take = lp::solve(&p.polytope.to_lp(&[-1.0])).unwrap();
        assert!((take.primal[0] - 1.0).abs() < 1e-9);
        let skip = lp::solve(&p.polytope.to_lp(&[1.0])).unwrap();
        assert!(skip.primal[0].abs() < 1e-9);
    }

    #[test]
    fn complete_2x2_matching_optimum() {
        let p = bipartite_matching(2, 2, 4, 0).unwrap();
        assert_eq!(p.edges, vec![(0, 2), (0, 3), (1, 2), (1, 3)]);
        let sol = lp::solve(&p.polytope.to_lp(&[-1.0, -1.0, -1.0, -2.0])).unwrap();
        assert!((sol.objective + 3.0).abs() < 1e-9);
        assert!((sol.primal[0] - 1.0).abs() < 1e-9 && (sol.primal[3] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spec_round_trip() {
        for p in [grid_shortest_path(3, 4).unwrap(), bipartite_matching(4, 3, 7, 11).unwrap(), triangle()] {
            let q = NominalProblem::from_spec(&p.spec).unwrap();
            assert_eq!(q.lp, p.lp);
            assert_eq!(q.edges, p.edges);
        }
    }

    #[test]
    fn unbounded_custom_rejected() {
        let err = custom(vec![vec![1.0]], vec![0.0], Vec::new()).unwrap_err();
        assert!(matches!(err, Error::MalformedProblem(_)));
    }
}

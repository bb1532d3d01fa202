//! Block semidefinite programs and an augmented-Lagrangian splitting solver.
//!
//! Problems are `min Σ⟨C_b, X_b⟩` over symmetric blocks `X_b` subject to
//! linear equalities and two-sided interval rows, with each block either
//! PSD or a nonnegative diagonal. The solver alternates an exact projection
//! onto the affine set with blockwise cone projections and a scaled dual
//! update (ADMM with over-relaxation). Interval rows are lowered to
//! equalities with a nonnegative slack pair.
//!
//! Linear functionals are lists of [`Term`]s over the upper triangle: a term
//! `(b, i, j, c)` contributes `c * X_b[i, j]` once, even when `i != j`.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::project_psd_in_place;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BlockKind {
    Psd,
    NonnegativeDiagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
    pub kind: BlockKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coef: f64,
}

impl Term {
    pub fn new(block: usize, i: usize, j: usize, coef: f64) -> Self {
        Self {
            block,
            i: i.min(j),
            j: i.max(j),
            coef,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equality {
    pub terms: Vec<Term>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub terms: Vec<Term>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SdpProblem {
    pub blocks: Vec<BlockSpec>,
    pub objective: Vec<Term>,
    pub equalities: Vec<Equality>,
    pub intervals: Vec<Interval>,
}

fn evaluate_terms(terms: &[Term], blocks: &[DMatrix<f64>]) -> f64 {
    terms.iter().map(|t| t.coef * blocks[t.block][(t.i, t.j)]).sum()
}

impl SdpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_block(&mut self, name: impl Into<String>, dim: usize, kind: BlockKind) -> usize {
        self.blocks.push(BlockSpec {
            name: name.into(),
            dim,
            kind,
        });
        self.blocks.len() - 1
    }

    /// Adds `⟨C, X_block⟩` for a symmetric `C` to the objective.
    pub fn add_objective_matrix(&mut self, block: usize, c: &DMatrix<f64>) {
        let n = c.nrows();
        for j in 0..n {
            for i in 0..=j {
                let v = if i == j { c[(i, i)] } else { c[(i, j)] + c[(j, i)] };
                if v != 0.0 {
                    self.objective.push(Term::new(block, i, j, v));
                }
            }
        }
    }

    pub fn add_equality(&mut self, terms: Vec<Term>, rhs: f64) {
        self.equalities.push(Equality { terms, rhs });
    }

    pub fn add_interval(&mut self, terms: Vec<Term>, lower: f64, upper: f64) -> Result<()> {
        if !(lower <= upper) {
            return Err(invalid(format!("interval [{lower}, {upper}] is empty")));
        }
        self.intervals.push(Interval { terms, lower, upper });
        Ok(())
    }

    pub fn n_constraints(&self) -> usize {
        self.equalities.len() + self.intervals.len()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |t: &Term| -> Result<()> {
            let b = self
                .blocks
                .get(t.block)
                .ok_or_else(|| invalid(format!("term references undeclared block {}", t.block)))?;
            if t.j >= b.dim || t.i > t.j {
                return Err(invalid(format!("term ({}, {}) outside block `{}`", t.i, t.j, b.name)));
            }
            if b.kind == BlockKind::NonnegativeDiagonal && t.i != t.j {
                return Err(invalid(format!("off-diagonal term on diagonal block `{}`", b.name)));
            }
            if !t.coef.is_finite() {
                return Err(invalid("non-finite coefficient"));
            }
            Ok(())
        };
        for t in &self.objective {
            check(t)?;
        }
        for e in &self.equalities {
            e.terms.iter().try_for_each(check)?;
            if !e.rhs.is_finite() {
                return Err(invalid("non-finite right-hand side"));
            }
        }
        for iv in &self.intervals {
            iv.terms.iter().try_for_each(check)?;
            if !(iv.lower <= iv.upper) || !iv.lower.is_finite() || !iv.upper.is_finite() {
                return Err(invalid(format!("bad interval [{}, {}]", iv.lower, iv.upper)));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, blocks: &[DMatrix<f64>]) -> f64 {
        evaluate_terms(&self.objective, blocks)
    }

    /// Largest absolute violation of any equality or interval row.
    pub fn max_violation(&self, blocks: &[DMatrix<f64>]) -> f64 {
        let eq = self
            .equalities
            .iter()
            .map(|e| (evaluate_terms(&e.terms, blocks) - e.rhs).abs());
        let iv = self.intervals.iter().map(|iv| {
            let v = evaluate_terms(&iv.terms, blocks);
            (iv.lower - v).max(v - iv.upper).max(0.0)
        });
        eq.chain(iv).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tol_primal: f64,
    pub tol_dual: f64,
    /// Relative primal-dual objective gap.
    pub tol_gap: f64,
    pub max_iter: usize,
    pub penalty_init: f64,
    pub over_relaxation: f64,
    /// Iterations between penalty updates.
    pub adapt_every: usize,
    pub record_history: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_primal: 1e-6,
            tol_dual: 1e-6,
            tol_gap: 1e-6,
            max_iter: 20_000,
            penalty_init: 1.0,
            over_relaxation: 1.6,
            adapt_every: 100,
            record_history: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Infeasible,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Converged => "Converged",
            Self::MaxIter => "MaxIter",
            Self::Infeasible => "Infeasible",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualSample {
    pub iteration: usize,
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub penalty: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub blocks: Vec<DMatrix<f64>>,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Relative gap between `⟨c, x⟩` and the dual objective `bᵀy`.
    pub gap: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<ResidualSample>,
    pub wall_time: f64,
}

/// Summary written by the debug dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdpDebugDump {
    pub blocks: Vec<BlockSpec>,
    pub n_equalities: usize,
    pub n_intervals: usize,
    pub n_variables: usize,
    pub n_eliminated: usize,
    pub status: SolveStatus,
    pub objective_value: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub iterations: usize,
    pub history: Vec<ResidualSample>,
}

impl SdpDebugDump {
    pub fn new(problem: &SdpProblem, sol: &SdpSolution) -> Self {
        let layout = Layout::new(&problem.blocks, problem.intervals.len());
        let compiled = compile(problem, &layout);
        Self {
            blocks: problem.blocks.clone(),
            n_equalities: problem.equalities.len(),
            n_intervals: problem.intervals.len(),
            n_variables: layout.n_vars,
            n_eliminated: compiled.map(|c| c.dep.len()).unwrap_or(0),
            status: sol.status,
            objective_value: sol.objective_value,
            primal_residual: sol.primal_residual,
            dual_residual: sol.dual_residual,
            iterations: sol.iterations,
            history: sol.history.clone(),
        }
    }
}

/// Variable layout: each PSD block is stored as its scaled upper triangle
/// (off-diagonals times √2, so the Euclidean norm is the Frobenius norm),
/// diagonal blocks as their diagonal, then one slack pair per interval.
struct Layout {
    offsets: Vec<usize>,
    dims: Vec<usize>,
    kinds: Vec<BlockKind>,
    slack_offset: usize,
    n_vars: usize,
}

fn tri(n: usize) -> usize {
    n * (n + 1) / 2
}

impl Layout {
    fn new(blocks: &[BlockSpec], n_intervals: usize) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len());
        let mut off = 0;
        for b in blocks {
            offsets.push(off);
            off += match b.kind {
                BlockKind::Psd => tri(b.dim),
                BlockKind::NonnegativeDiagonal => b.dim,
            };
        }
        Self {
            offsets,
            dims: blocks.iter().map(|b| b.dim).collect(),
            kinds: blocks.iter().map(|b| b.kind).collect(),
            slack_offset: off,
            n_vars: off + 2 * n_intervals,
        }
    }

    /// Variable index and the factor turning a term coefficient into a
    /// coefficient on that variable.
    fn var(&self, t: &Term) -> (usize, f64) {
        match self.kinds[t.block] {
            BlockKind::Psd => {
                let k = self.offsets[t.block] + tri(t.j) + t.i;
                (k, if t.i == t.j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 })
            }
            BlockKind::NonnegativeDiagonal => (self.offsets[t.block] + t.i, 1.0),
        }
    }

    fn unpack(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        (0..self.dims.len())
            .map(|b| {
                let n = self.dims[b];
                let off = self.offsets[b];
                let mut m = DMatrix::zeros(n, n);
                match self.kinds[b] {
                    BlockKind::Psd => {
                        for j in 0..n {
                            m[(j, j)] = x[off + tri(j) + j];
                            for i in 0..j {
                                let v = x[off + tri(j) + i] * std::f64::consts::FRAC_1_SQRT_2;
                                m[(i, j)] = v;
                                m[(j, i)] = v;
                            }
                        }
                    }
                    BlockKind::NonnegativeDiagonal => {
                        for i in 0..n {
                            m[(i, i)] = x[off + i];
                        }
                    }
                }
                m
            })
            .collect()
    }

    fn project_cone(&self, x: &mut [f64], scratch: &mut [DMatrix<f64>]) {
        for b in 0..self.dims.len() {
            let n = self.dims[b];
            let off = self.offsets[b];
            match self.kinds[b] {
                BlockKind::Psd => {
                    let m = &mut scratch[b];
                    let s = std::f64::consts::FRAC_1_SQRT_2;
                    for j in 0..n {
                        m[(j, j)] = x[off + tri(j) + j];
                        for i in 0..j {
                            let v = x[off + tri(j) + i] * s;
                            m[(i, j)] = v;
                            m[(j, i)] = v;
                        }
                    }
                    project_psd_in_place(m);
                    for j in 0..n {
                        x[off + tri(j) + j] = m[(j, j)];
                        for i in 0..j {
                            x[off + tri(j) + i] = m[(i, j)] * std::f64::consts::SQRT_2;
                        }
                    }
                }
                BlockKind::NonnegativeDiagonal => {
                    for v in &mut x[off..off + n] {
                        *v = v.max(0.0);
                    }
                }
            }
        }
        for v in &mut x[self.slack_offset..] {
            *v = v.max(0.0);
        }
    }
}

/// Sparse row over variable indices.
#[derive(Debug, Clone)]
struct SparseRow {
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl SparseRow {
    fn dot(&self, x: &[f64]) -> f64 {
        self.idx.iter().zip(&self.val).map(|(&k, &v)| v * x[k]).sum()
    }
}

fn merge_row(mut pairs: Vec<(usize, f64)>) -> SparseRow {
    pairs.sort_by_key(|p| p.0);
    let mut idx: Vec<usize> = Vec::with_capacity(pairs.len());
    let mut val: Vec<f64> = Vec::with_capacity(pairs.len());
    for (k, v) in pairs {
        if idx.last() == Some(&k) {
            *val.last_mut().unwrap() += v;
        } else {
            idx.push(k);
            val.push(v);
        }
    }
    let (idx, val) = idx.into_iter().zip(val).filter(|(_, v)| *v != 0.0).unzip();
    SparseRow { idx, val }
}

/// The equality system `A x = b` after lowering, with variables that occur in
/// exactly one row solved for in terms of the rest:
/// `x_dep = B x_ind + c` and `E x_ind = e` for the remaining rows.
struct Compiled {
    rows: Vec<SparseRow>,
    rhs: Vec<f64>,
    cost: Vec<f64>,
    /// Dependent variable indices.
    dep: Vec<usize>,
    ind: Vec<usize>,
    /// `B` rows over positions in `ind`, and the constants `c`.
    b_rows: Vec<SparseRow>,
    b_const: Vec<f64>,
    /// Projection data on the independent variables.
    p: DMatrix<f64>,
    q: DVector<f64>,
}

fn compile(problem: &SdpProblem, layout: &Layout) -> Result<Compiled> {
    let to_row = |terms: &[Term], extra: Option<(usize, f64)>| {
        let mut pairs: Vec<(usize, f64)> = terms
            .iter()
            .map(|t| {
                let (k, s) = layout.var(t);
                (k, t.coef * s)
            })
            .collect();
        pairs.extend(extra);
        merge_row(pairs)
    };
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for e in &problem.equalities {
        rows.push(to_row(&e.terms, None));
        rhs.push(e.rhs);
    }
    for (k, iv) in problem.intervals.iter().enumerate() {
        let lo = layout.slack_offset + 2 * k;
        rows.push(to_row(&iv.terms, Some((lo, -1.0))));
        rhs.push(iv.lower);
        rows.push(to_row(&iv.terms, Some((lo + 1, 1.0))));
        rhs.push(iv.upper);
    }
    // Rows reduced to nothing are either vacuous or contradictory.
    let mut keep = Vec::with_capacity(rows.len());
    for (r, b) in rows.iter().zip(&rhs) {
        if r.idx.is_empty() {
            if b.abs() > 1e-12 {
                return Err(Error::Infeasible(format!("empty constraint row with rhs {b}")));
            }
            keep.push(false);
        } else {
            keep.push(true);
        }
    }
    let (rows, rhs): (Vec<_>, Vec<_>) = rows
        .into_iter()
        .zip(rhs)
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(rb, _)| rb)
        .unzip();

    let mut cost = vec![0.0; layout.n_vars];
    for t in &problem.objective {
        let (k, s) = layout.var(t);
        cost[k] += t.coef * s;
    }

    let n = layout.n_vars;
    let mut count = vec![0usize; n];
    for r in &rows {
        for &k in &r.idx {
            count[k] += 1;
        }
    }
    // One dependent variable per row: the single-occurrence variable with
    // the largest coefficient, ties to the lowest index.
    let mut dep_of_row: Vec<Option<(usize, f64)>> = vec![None; rows.len()];
    let mut is_dep = vec![false; n];
    for (ri, r) in rows.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        let scale = r.val.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (&k, &v) in r.idx.iter().zip(&r.val) {
            if count[k] == 1 && v.abs() >= 1e-3 * scale && best.is_none_or(|(_, bv)| v.abs() > bv.abs()) {
                best = Some((k, v));
            }
        }
        if let Some((k, v)) = best {
            dep_of_row[ri] = Some((k, v));
            is_dep[k] = true;
        }
    }
    let ind: Vec<usize> = (0..n).filter(|&k| !is_dep[k]).collect();
    let mut pos = vec![usize::MAX; n];
    for (p, &k) in ind.iter().enumerate() {
        pos[k] = p;
    }
    let n_ind = ind.len();

    let mut dep = Vec::new();
    let mut b_rows = Vec::new();
    let mut b_const = Vec::new();
    let mut e_rows = Vec::new();
    let mut e_rhs = Vec::new();
    for (ri, r) in rows.iter().enumerate() {
        match dep_of_row[ri] {
            Some((d, a)) => {
                let mut idx = Vec::with_capacity(r.idx.len() - 1);
                let mut val = Vec::with_capacity(r.idx.len() - 1);
                for (&k, &v) in r.idx.iter().zip(&r.val) {
                    if k != d {
                        idx.push(pos[k]);
                        val.push(-v / a);
                    }
                }
                dep.push(d);
                b_rows.push(SparseRow { idx, val });
                b_const.push(rhs[ri] / a);
            }
            None => {
                e_rows.push(SparseRow {
                    idx: r.idx.iter().map(|&k| pos[k]).collect(),
                    val: r.val.clone(),
                });
                e_rhs.push(rhs[ri]);
            }
        }
    }

    // M = I + BᵀB
    let mut m = DMatrix::<f64>::identity(n_ind, n_ind);
    for br in &b_rows {
        for (x, (&i, &vi)) in br.idx.iter().zip(&br.val).enumerate() {
            for (&j, &vj) in br.idx[x..].iter().zip(&br.val[x..]) {
                m[(i, j)] += vi * vj;
                if i != j {
                    m[(j, i)] += vi * vj;
                }
            }
        }
    }
    let minv = m
        .cholesky()
        .ok_or_else(|| invalid("projection normal matrix is not positive definite"))?
        .inverse();
    let (p, q) = if e_rows.is_empty() {
        (minv, DVector::zeros(n_ind))
    } else {
        let mut et = DMatrix::zeros(n_ind, e_rows.len());
        for (c, er) in e_rows.iter().enumerate() {
            for (&k, &v) in er.idx.iter().zip(&er.val) {
                et[(k, c)] += v;
            }
        }
        let f = &minv * &et;
        let s = et.transpose() * &f;
        let s_pinv = pseudo_inverse_sym(s);
        let e = DVector::from_vec(e_rhs);
        let fs = &f * &s_pinv;
        let p = &minv - &fs * f.transpose();
        let q = &fs * e;
        (p, q)
    };
    Ok(Compiled {
        rows,
        rhs,
        cost,
        dep,
        ind,
        b_rows,
        b_const,
        p,
        q,
    })
}

fn pseudo_inverse_sym(s: DMatrix<f64>) -> DMatrix<f64> {
    let n = s.nrows();
    let eig = s.symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let cut = max * 1e-11 * n.max(1) as f64;
    let mut out = DMatrix::zeros(n, n);
    for k in 0..n {
        let lam = eig.eigenvalues[k];
        if lam.abs() > cut {
            let v = eig.eigenvectors.column(k);
            out += (&v * v.transpose()) / lam;
        }
    }
    out
}

impl Compiled {
    /// Euclidean projection of `v` onto `{x : A x = b}`, written into `out`.
    fn project(&self, v: &[f64], out: &mut [f64], g: &mut DVector<f64>) {
        for (p, &k) in self.ind.iter().enumerate() {
            g[p] = v[k];
        }
        for (r, br) in self.b_rows.iter().enumerate() {
            let w = v[self.dep[r]] - self.b_const[r];
            if w != 0.0 {
                for (&i, &c) in br.idx.iter().zip(&br.val) {
                    g[i] += c * w;
                }
            }
        }
        let d = &self.p * &*g + &self.q;
        for (p, &k) in self.ind.iter().enumerate() {
            out[k] = d[p];
        }
        for (r, br) in self.b_rows.iter().enumerate() {
            out[self.dep[r]] = br.dot(d.as_slice()) + self.b_const[r];
        }
    }

    fn primal_residual(&self, x: &[f64], b_norm: f64) -> f64 {
        let s: f64 = self
            .rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| (r.dot(x) - b).powi(2))
            .sum();
        s.sqrt() / (1.0 + b_norm)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

const STALL_WINDOW: usize = 1000;
const STALL_LEVEL: f64 = 1e-2;
const PENALTY_MIN: f64 = 1e-6;
const PENALTY_MAX: f64 = 1e6;

pub fn solve_sdp(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let start = Instant::now();
    problem.validate()?;
    if !(opts.penalty_init > 0.0) || !(opts.tol_primal > 0.0) || !(opts.tol_dual > 0.0) || !(opts.tol_gap > 0.0) {
        return Err(invalid("solver tolerances and penalty must be positive"));
    }
    if !(opts.over_relaxation > 0.0 && opts.over_relaxation < 2.0) {
        return Err(invalid("over-relaxation must lie in (0, 2)"));
    }
    let layout = Layout::new(&problem.blocks, problem.intervals.len());
    let sys = compile(problem, &layout)?;
    let n = layout.n_vars;
    let b_norm = norm(&sys.rhs);
    let c_norm = norm(&sys.cost);

    let mut scratch: Vec<DMatrix<f64>> = layout.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect();
    let mut g = DVector::zeros(sys.ind.len());
    let mut origin = vec![0.0; n];
    sys.project(&vec![0.0; n], &mut origin, &mut g);

    let mut rho = opts.penalty_init;
    let alpha = opts.over_relaxation;
    let mut z = origin.clone();
    layout.project_cone(&mut z, &mut scratch);
    let mut u = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];

    let mut history = Vec::new();
    let mut status = SolveStatus::MaxIter;
    let (mut primal, mut dual, mut gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    let mut iterations = 0;
    let mut best_before_window = f64::INFINITY;
    let mut best_in_window = f64::INFINITY;

    for it in 1..=opts.max_iter {
        iterations = it;
        for k in 0..n {
            v[k] = z[k] - u[k] - sys.cost[k] / rho;
        }
        sys.project(&v, &mut x, &mut g);
        for k in 0..n {
            let xh = alpha * x[k] + (1.0 - alpha) * z[k];
            w[k] = xh + u[k];
            x[k] = xh;
        }
        std::mem::swap(&mut z, &mut w);
        layout.project_cone(&mut z, &mut scratch);
        for k in 0..n {
            u[k] += x[k] - z[k];
        }

        let check = it % 10 == 0 || it == opts.max_iter;
        if !check {
            continue;
        }
        primal = sys.primal_residual(&z, b_norm);
        // Dual residual: component of c + ρu outside the row space of A.
        for k in 0..n {
            v[k] = sys.cost[k] + rho * u[k];
        }
        sys.project(&v, &mut w, &mut g);
        let dres: f64 = w
            .iter()
            .zip(&origin)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        dual = dres / (1.0 + c_norm);
        // With y = (AAᵀ)⁺A(c + ρu), bᵀy = ⟨Proj(0), c + ρu⟩.
        let pobj: f64 = sys.cost.iter().zip(&z).map(|(a, b)| a * b).sum();
        let dobj: f64 = origin.iter().zip(&v).map(|(a, b)| a * b).sum();
        gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        if opts.record_history {
            history.push(ResidualSample {
                iteration: it,
                primal,
                dual,
                gap,
                penalty: rho,
            });
        }
        if primal <= opts.tol_primal && dual <= opts.tol_dual && gap <= opts.tol_gap {
            status = SolveStatus::Converged;
            break;
        }
        best_in_window = best_in_window.min(primal);
        if it % STALL_WINDOW == 0 {
            if best_in_window > STALL_LEVEL && best_in_window > 0.5 * best_before_window {
                status = SolveStatus::Infeasible;
                break;
            }
            best_before_window = best_before_window.min(best_in_window);
            best_in_window = f64::INFINITY;
        }
        if it % opts.adapt_every == 0 {
            let factor = if primal > 10.0 * dual {
                2.0
            } else if dual > 10.0 * primal {
                0.5
            } else {
                1.0
            };
            let next = (rho * factor).clamp(PENALTY_MIN, PENALTY_MAX);
            let factor = next / rho;
            if factor != 1.0 {
                rho = next;
                for uk in &mut u {
                    *uk /= factor;
                }
            }
        }
    }

    let blocks = layout.unpack(&z);
    Ok(SdpSolution {
        objective_value: problem.objective_value(&blocks),
        blocks,
        primal_residual: primal,
        dual_residual: dual,
        gap,
        iterations,
        status,
        history,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions {
            tol_primal: 1e-9,
            tol_dual: 1e-9,
            tol_gap: 1e-9,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn min_x11_with_unit_diagonal_sum() {
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 2, BlockKind::Psd);
        p.objective.push(Term::new(b, 0, 0, 1.0));
        p.add_equality(vec![Term::new(b, 0, 0, 1.0), Term::new(b, 1, 1, 1.0)], 1.0);
        let s = solve_sdp(&p, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!(s.objective_value.abs() < 1e-7);
        assert!((s.blocks[0][(1, 1)] - 1.0).abs() < 1e-7);
    }

    #[test]
    fn min_trace_weighted() {
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 2, BlockKind::Psd);
        p.add_objective_matrix(b, &DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0])));
        p.add_equality(vec![Term::new(b, 0, 0, 1.0), Term::new(b, 1, 1, 1.0)], 1.0);
        let s = solve_sdp(&p, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!((s.objective_value - 1.0).abs() < 1e-7);
        let expect = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!((&s.blocks[0] - expect).abs().max() < 1e-7);
    }

    #[test]
    fn off_diagonal_objective_reaches_negative_eigenvalue() {
        // min ⟨C, X⟩, tr X = 1, with C = [[0, 1], [1, 0]] has optimum -1.
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 2, BlockKind::Psd);
        p.add_objective_matrix(b, &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        p.add_equality(vec![Term::new(b, 0, 0, 1.0), Term::new(b, 1, 1, 1.0)], 1.0);
        let s = solve_sdp(&p, &opts()).unwrap();
        assert!((s.objective_value + 1.0).abs() < 1e-7);
        assert!((s.blocks[0][(0, 1)] + 0.5).abs() < 1e-7);
    }

    #[test]
    fn interval_rows_bound_the_optimum() {
        // min -x00 with tr X = 1 and 0.2 <= x00 <= 0.7.
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 3, BlockKind::Psd);
        p.objective.push(Term::new(b, 0, 0, -1.0));
        p.add_equality((0..3).map(|i| Term::new(b, i, i, 1.0)).collect(), 1.0);
        p.add_interval(vec![Term::new(b, 0, 0, 1.0)], 0.2, 0.7).unwrap();
        let s = solve_sdp(&p, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        assert!((s.objective_value + 0.7).abs() < 1e-6);
        assert!(p.max_violation(&s.blocks) < 1e-6);
        assert!(p.add_interval(vec![], 1.0, 0.0).is_err());
    }

    #[test]
    fn linked_blocks_and_redundant_rows() {
        // Y = 1 - X elementwise on the diagonal (a Q-like link), with the
        // trace row stated twice.
        let mut p = SdpProblem::new();
        let x = p.add_block("X", 2, BlockKind::Psd);
        let y = p.add_block("Y", 1, BlockKind::NonnegativeDiagonal);
        p.objective.push(Term::new(x, 0, 0, -1.0));
        p.objective.push(Term::new(x, 1, 1, -0.5));
        let tr = vec![Term::new(x, 0, 0, 1.0), Term::new(x, 1, 1, 1.0)];
        p.add_equality(tr.clone(), 2.0);
        p.add_equality(tr, 2.0);
        p.add_equality(vec![Term::new(y, 0, 0, 1.0), Term::new(x, 0, 0, 1.0)], 1.5);
        let s = solve_sdp(&p, &opts()).unwrap();
        assert_eq!(s.status, SolveStatus::Converged);
        // x00 <= 1.5 from Y >= 0, rest goes to x11.
        assert!((s.objective_value + 1.75).abs() < 1e-6);
    }

    #[test]
    fn infeasible_problem_is_flagged() {
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 2, BlockKind::Psd);
        p.add_equality(vec![Term::new(b, 0, 0, 1.0)], -1.0);
        p.add_equality(vec![Term::new(b, 1, 1, 1.0)], 1.0);
        let s = solve_sdp(&p, &SolverOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
    }

    #[test]
    fn validation_rejects_bad_terms() {
        let mut p = SdpProblem::new();
        let b = p.add_block("X", 2, BlockKind::NonnegativeDiagonal);
        p.add_equality(vec![Term::new(b, 0, 1, 1.0)], 1.0);
        assert!(p.validate().is_err());
        let mut p = SdpProblem::new();
        p.add_equality(vec![Term::new(3, 0, 0, 1.0)], 1.0);
        assert!(solve_sdp(&p, &SolverOptions::default()).is_err());
    }
}

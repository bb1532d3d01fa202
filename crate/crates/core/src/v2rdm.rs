//! Variational 2-RDM under D, Q and G positivity, optionally constrained by
//! classical shadows.
//!
//! Q and G are linear images of D (and the 1-RDM it contracts to):
//!
//! * `Q[(ij),(kl)] = ⟨a_j a_i a†_k a†_l⟩`
//!   `= δ_ik δ_jl - δ_il δ_jk - δ_ik γ_lj + δ_il γ_kj + δ_jk γ_li - δ_jl γ_ki + D[(kl),(ij)]`
//! * `G[(i,l),(k,j)] = ⟨a†_i a_l a†_j a_k⟩ = δ_lj γ_ik - ²D^{ij}_{kl}`,
//!   with row `(i,l)` stored at `i*r + l`.
//!
//! Both are Gram matrices of a physical state, hence PSD when D is
//! N-representable.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hamiltonians::ReducedHamiltonian;
use crate::rdm::{pair_count, pairs, signed_pair, TwoRdm};
use crate::sdp::{solve_sdp, BlockKind, SdpProblem, SdpSolution, SolveStatus, SolverOptions, Term};
use crate::shadows::{shadow_constraint_rows, ShadowRecord};

/// Positivity conditions imposed; D is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ConditionSet {
    pub q: bool,
    pub g: bool,
}

impl ConditionSet {
    pub const D: Self = Self { q: false, g: false };
    pub const DQ: Self = Self { q: true, g: false };
    pub const DQG: Self = Self { q: true, g: true };
}

impl Default for ConditionSet {
    fn default() -> Self {
        Self::DQG
    }
}

impl FromStr for ConditionSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if !s.contains('d') {
            return Err(invalid(format!("condition set `{s}` must contain D")));
        }
        let mut set = Self::D;
        for c in s.chars() {
            match c {
                'd' => {}
                'q' => set.q = true,
                'g' => set.g = true,
                _ => return Err(invalid(format!("unknown condition `{c}` in `{s}`"))),
            }
        }
        Ok(set)
    }
}

impl fmt::Display for ConditionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("D")?;
        if self.q {
            f.write_str("Q")?;
        }
        if self.g {
            f.write_str("G")?;
        }
        Ok(())
    }
}

impl TryFrom<String> for ConditionSet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConditionSet> for String {
    fn from(c: ConditionSet) -> Self {
        c.to_string()
    }
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn check_1rdm(d2: &TwoRdm, d1: &DMatrix<f64>) -> Result<()> {
    if d1.nrows() != d2.n_spin() || d1.ncols() != d2.n_spin() {
        return Err(Error::DimensionMismatch {
            expected: d2.n_spin(),
            found: d1.nrows(),
        });
    }
    Ok(())
}

/// Hole-hole metric on the pair space.
pub fn map_d_to_q(d2: &TwoRdm, d1: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_1rdm(d2, d1)?;
    let r = d2.n_spin();
    let ps = pairs(r);
    let d = d2.matrix();
    Ok(DMatrix::from_fn(ps.len(), ps.len(), |a, b| {
        let (i, j) = ps[a];
        let (k, l) = ps[b];
        delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k) - delta(i, k) * d1[(l, j)]
            + delta(i, l) * d1[(k, j)]
            + delta(j, k) * d1[(l, i)]
            - delta(j, l) * d1[(k, i)]
            + d[(b, a)]
    }))
}

/// Particle-hole metric on the `r²` index space.
pub fn map_d_to_g(d2: &TwoRdm, d1: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_1rdm(d2, d1)?;
    let r = d2.n_spin();
    Ok(DMatrix::from_fn(r * r, r * r, |a, b| {
        let (i, l) = (a / r, a % r);
        let (k, j) = (b / r, b % r);
        delta(l, j) * d1[(i, k)] - d2.element(i, j, k, l)
    }))
}

/// Coefficients of a linear form on the upper triangle of the D block.
#[derive(Default)]
struct DForm(Vec<(usize, usize, f64)>);

impl DForm {
    /// `+ c · ²D^{ij}_{kl}`
    fn add_element(&mut self, i: usize, j: usize, k: usize, l: usize, c: f64, r: usize) {
        if let (Some((a, sa)), Some((b, sb))) = (signed_pair(i, j, r), signed_pair(k, l, r)) {
            self.0.push((a.min(b), a.max(b), c * sa * sb));
        }
    }

    /// `+ c · γ_xy` with `γ_xy = 1/(N-1) Σ_m ²D^{xm}_{ym}`.
    fn add_gamma(&mut self, x: usize, y: usize, c: f64, r: usize, n: usize) {
        if c == 0.0 {
            return;
        }
        let w = c / (n as f64 - 1.0);
        for m in 0..r {
            self.add_element(x, m, y, m, w, r);
        }
    }

    /// Upper-triangle terms on `block`. A symmetric entry `D[a,b]` read as
    /// `D[b,a]` is the same variable, so no doubling is needed.
    fn terms(self, block: usize) -> impl Iterator<Item = Term> {
        self.0.into_iter().map(move |(a, b, c)| Term::new(block, a, b, c))
    }
}

/// Number of constraint rows `build_sdp` emits.
pub fn constraint_count(n_spin: usize, conditions: ConditionSet, n_shadows: usize) -> usize {
    let p = pair_count(n_spin);
    let r2 = n_spin * n_spin;
    1 + if conditions.q { p * (p + 1) / 2 } else { 0 }
        + if conditions.g { r2 * (r2 + 1) / 2 } else { 0 }
        + n_shadows * p
}

pub const D_BLOCK: usize = 0;

/// Block layout: `D` first, then `Q` and `G` when present.
pub fn build_sdp(k2: &ReducedHamiltonian, conditions: ConditionSet, shadows: &[ShadowRecord]) -> Result<SdpProblem> {
    let r = k2.n_spin();
    let n = k2.n_electrons();
    let p = pair_count(r);
    let ps = pairs(r);
    for s in shadows {
        if s.n_spin() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                found: s.n_spin(),
            });
        }
    }
    let mut prob = SdpProblem::new();
    let d = prob.add_block("D", p, BlockKind::Psd);
    prob.add_objective_matrix(d, k2.k2());
    prob.add_equality(
        (0..p).map(|a| Term::new(d, a, a, 1.0)).collect(),
        (n * (n - 1)) as f64 / 2.0,
    );

    if conditions.q {
        let q = prob.add_block("Q", p, BlockKind::Psd);
        for b in 0..p {
            let (k, l) = ps[b];
            for a in 0..=b {
                let (i, j) = ps[a];
                // Q - (γ and D terms) = δ_ik δ_jl - δ_il δ_jk
                let mut f = DForm::default();
                f.add_gamma(l, j, delta(i, k), r, n);
                f.add_gamma(k, j, -delta(i, l), r, n);
                f.add_gamma(l, i, -delta(j, k), r, n);
                f.add_gamma(k, i, delta(j, l), r, n);
                f.0.push((a, b, -1.0));
                let mut terms = vec![Term::new(q, a, b, 1.0)];
                terms.extend(f.terms(d));
                prob.add_equality(terms, delta(i, k) * delta(j, l) - delta(i, l) * delta(j, k));
            }
        }
    }

    if conditions.g {
        let g = prob.add_block("G", r * r, BlockKind::Psd);
        for bb in 0..r * r {
            let (k, j) = (bb / r, bb % r);
            for aa in 0..=bb {
                let (i, l) = (aa / r, aa % r);
                let mut f = DForm::default();
                f.add_gamma(i, k, -delta(l, j), r, n);
                f.add_element(i, j, k, l, 1.0, r);
                let mut terms = vec![Term::new(g, aa, bb, 1.0)];
                terms.extend(f.terms(d));
                prob.add_equality(terms, 0.0);
            }
        }
    }

    for s in shadows {
        for (row, (&val, &eps)) in shadow_constraint_rows(&s.u).iter().zip(s.values.iter().zip(&s.epsilon)) {
            let terms: Vec<Term> = row
                .upper_coefficients()
                .into_iter()
                .map(|(a, b, c)| Term::new(d, a, b, c))
                .collect();
            if eps == 0.0 {
                prob.add_equality(terms, val);
            } else {
                prob.add_interval(terms, val - eps, val + eps)?;
            }
        }
    }
    Ok(prob)
}

#[derive(Debug, Clone)]
pub struct V2rdmResult {
    /// Total energy, nuclear repulsion included.
    pub energy: f64,
    pub d2: TwoRdm,
    pub solution: SdpSolution,
}

impl V2rdmResult {
    pub fn status(&self) -> SolveStatus {
        self.solution.status
    }
}

pub fn sv2rdm(
    k2: &ReducedHamiltonian,
    conditions: ConditionSet,
    shadows: &[ShadowRecord],
    opts: &SolverOptions,
) -> Result<V2rdmResult> {
    let prob = build_sdp(k2, conditions, shadows)?;
    let solution = solve_sdp(&prob, opts)?;
    let d2 = TwoRdm::new(k2.n_spin(), solution.blocks[D_BLOCK].clone())?;
    Ok(V2rdmResult {
        energy: k2.energy(&d2),
        d2,
        solution,
    })
}

/// Shadow-free relaxation: a lower bound on the ground-state energy.
pub fn v2rdm(k2: &ReducedHamiltonian, conditions: ConditionSet, opts: &SolverOptions) -> Result<V2rdmResult> {
    sv2rdm(k2, conditions, &[], opts)
}

/// `‖a/tr a - b/tr b‖_F` on the packed pair-space matrices.
pub fn frobenius_error(a: &TwoRdm, b: &TwoRdm) -> Result<f64> {
    if a.n_spin() != b.n_spin() {
        return Err(Error::DimensionMismatch {
            expected: a.n_spin(),
            found: b.n_spin(),
        });
    }
    let (ta, tb) = (a.packed_trace(), b.packed_trace());
    if ta.abs() < 1e-300 || tb.abs() < 1e-300 {
        return Err(invalid("cannot normalize a 2-RDM with zero trace"));
    }
    Ok((a.matrix() / ta - b.matrix() / tb).norm())
}

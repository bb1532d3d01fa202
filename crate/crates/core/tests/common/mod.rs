//! Test-only oracles: second-quantized operators applied term by term to
//! sparse bitmask states, independent of the library's Slater–Condon and
//! Wick-reordered code paths.

#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use shadowrdm::fci::FciSolution;
use shadowrdm::hamiltonians::MolecularIntegrals;
use shadowrdm::rdm::{pair_count, pairs};

pub type State = BTreeMap<u64, f64>;

#[derive(Clone, Copy, Debug)]
pub enum Op {
    Create(usize),
    Annihilate(usize),
}

fn sign_before(det: u64, p: usize) -> f64 {
    let mut n = 0;
    for q in 0..p {
        if det >> q & 1 == 1 {
            n += 1;
        }
    }
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Applies `ops[0] ops[1] ... ops[n-1]` (rightmost acts first).
pub fn apply(state: &State, ops: &[Op]) -> State {
    let mut cur = state.clone();
    for op in ops.iter().rev() {
        let mut next = State::new();
        for (&det, &c) in &cur {
            let (p, want_occ) = match *op {
                Op::Create(p) => (p, false),
                Op::Annihilate(p) => (p, true),
            };
            let occ = det >> p & 1 == 1;
            if occ != want_occ {
                continue;
            }
            let s = sign_before(det, p);
            *next.entry(det ^ (1 << p)).or_insert(0.0) += s * c;
        }
        cur = next;
    }
    cur
}

pub fn inner(a: &State, b: &State) -> f64 {
    a.iter()
        .map(|(k, v)| v * b.get(k).copied().unwrap_or(0.0))
        .sum()
}

pub fn expect(psi: &State, ops: &[Op]) -> f64 {
    inner(psi, &apply(psi, ops))
}

pub fn state_of(sol: &FciSolution) -> State {
    sol.basis
        .masks()
        .iter()
        .zip(sol.ci.iter())
        .map(|(&m, &c)| (m, c))
        .collect()
}

fn spin_eri(ints: &MolecularIntegrals, p: usize, q: usize, r: usize, s: usize) -> f64 {
    if p % 2 != r % 2 || q % 2 != s % 2 {
        return 0.0;
    }
    ints.eri(p / 2, r / 2, q / 2, s / 2)
}

/// `H|det⟩` by summing every operator string of the Hamiltonian.
pub fn apply_hamiltonian(ints: &MolecularIntegrals, state: &State) -> State {
    use Op::*;
    let r = ints.n_spin();
    let mut out = State::new();
    let mut add = |s: State, w: f64| {
        for (k, v) in s {
            *out.entry(k).or_insert(0.0) += w * v;
        }
    };
    add(state.clone(), ints.e_nuc());
    for p in 0..r {
        for q in 0..r {
            if p % 2 != q % 2 {
                continue;
            }
            let h = ints.h()[(p / 2, q / 2)];
            if h != 0.0 {
                add(apply(state, &[Create(p), Annihilate(q)]), h);
            }
        }
    }
    for p in 0..r {
        for q in 0..r {
            for s in 0..r {
                for t in 0..r {
                    let v = spin_eri(ints, p, q, s, t);
                    if v != 0.0 {
                        add(
                            apply(state, &[Create(p), Create(q), Annihilate(t), Annihilate(s)]),
                            0.5 * v,
                        );
                    }
                }
            }
        }
    }
    out
}

pub fn direct_1rdm(psi: &State, r: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, r, |i, k| expect(psi, &[Op::Create(i), Op::Annihilate(k)]))
}

/// `Q[(ij),(kl)] = ⟨a_j a_i a†_k a†_l⟩`, i.e. element `²Q^{kl}_{ij}` up to
/// the pair-order sign convention that makes it a Gram matrix.
pub fn direct_q(psi: &State, r: usize) -> DMatrix<f64> {
    use Op::*;
    let ps = pairs(r);
    let p = pair_count(r);
    DMatrix::from_fn(p, p, |a, b| {
        let (i, j) = ps[a];
        let (k, l) = ps[b];
        expect(psi, &[Annihilate(j), Annihilate(i), Create(k), Create(l)])
    })
}

/// `G[(il),(kj)] = ⟨a†_i a_l a†_j a_k⟩` on the r² index space.
pub fn direct_g(psi: &State, r: usize) -> DMatrix<f64> {
    use Op::*;
    DMatrix::from_fn(r * r, r * r, |a, b| {
        let (i, l) = (a / r, a % r);
        let (k, j) = (b / r, b % r);
        expect(psi, &[Create(i), Annihilate(l), Create(j), Annihilate(k)])
    })
}

pub fn direct_2rdm(psi: &State, r: usize) -> DMatrix<f64> {
    use Op::*;
    let ps = pairs(r);
    let p = pair_count(r);
    DMatrix::from_fn(p, p, |a, b| {
        let (i, j) = ps[a];
        let (k, l) = ps[b];
        expect(psi, &[Create(i), Create(j), Annihilate(l), Annihilate(k)])
    })
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// PySCF FCI totals (same bohr constant), computed once offline.
pub const H2_0_7414_FCI: f64 = -1.137270174660903;
pub const H2_1_0_FCI: f64 = -1.1011503302326187;
pub const H3_1_0_FCI: f64 = -1.568351864512913;
pub const H4_1_0_FCI: f64 = -2.1663874486347625;
pub const H6_1_0_FCI: f64 = -3.236066279892343;
pub const H2_PES: [(f64, f64); 5] = [
    (0.5, -1.0551597944706248),
    (0.7414, -1.137270174660903),
    (1.0, -1.1011503302326187),
    (1.5, -0.9981493534714101),
    (2.5, -0.9360549199556059),
];

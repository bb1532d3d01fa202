//! Full configuration interaction over spin-orbital bitmask determinants.
//!
//! A determinant is a `u64` with bit `p` set when spin orbital `p` is
//! occupied, and stands for `Π_{p ascending} a†_p |0⟩`. Acting with `a_p` or
//! `a†_p` picks up `(-1)^(number of occupied orbitals below p)`.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::hamiltonians::MolecularIntegrals;
use crate::numerics::{sym_eigendecomposition, SymMatrix};
use crate::rdm::{pair_count, pairs};

pub use crate::rdm::{contract_to_1rdm, TwoRdm};

#[inline]
fn parity_below(det: u64, p: usize) -> f64 {
    let below = det & ((1u64 << p) - 1);
    if below.count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `a_p |det⟩` as `(det', sign)`, or `None` if `p` is empty.
#[inline]
pub fn annihilate(det: u64, p: usize) -> Option<(u64, f64)> {
    if det & (1u64 << p) == 0 {
        return None;
    }
    Some((det ^ (1u64 << p), parity_below(det, p)))
}

/// `a†_p |det⟩` as `(det', sign)`, or `None` if `p` is occupied.
#[inline]
pub fn create(det: u64, p: usize) -> Option<(u64, f64)> {
    if det & (1u64 << p) != 0 {
        return None;
    }
    Some((det | (1u64 << p), parity_below(det, p)))
}

/// Interleaves alpha and beta strings: spatial bit `p` goes to `2p` / `2p + 1`.
pub fn spin_orbital_mask(alpha: u64, beta: u64, n_spatial: usize) -> u64 {
    let mut m = 0u64;
    for p in 0..n_spatial {
        m |= ((alpha >> p) & 1) << (2 * p);
        m |= ((beta >> p) & 1) << (2 * p + 1);
    }
    m
}

fn occupied(det: u64) -> impl Iterator<Item = usize> {
    let mut rest = det;
    std::iter::from_fn(move || {
        if rest == 0 {
            return None;
        }
        let p = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        Some(p)
    })
}

fn strings(n_orb: usize, n_el: usize) -> Vec<u64> {
    (0u64..(1u64 << n_orb))
        .filter(|m| m.count_ones() as usize == n_el)
        .collect()
}

#[derive(Debug, Clone)]
pub struct DeterminantBasis {
    n_spatial: usize,
    n_alpha: usize,
    n_beta: usize,
    dets: Vec<(u64, u64)>,
    masks: Vec<u64>,
    lookup: HashMap<u64, usize>,
}

impl DeterminantBasis {
    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_spin(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn n_alpha(&self) -> usize {
        self.n_alpha
    }

    pub fn n_beta(&self) -> usize {
        self.n_beta
    }

    pub fn n_electrons(&self) -> usize {
        self.n_alpha + self.n_beta
    }

    pub fn len(&self) -> usize {
        self.dets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dets.is_empty()
    }

    /// `(alpha, beta)` strings in basis order.
    pub fn dets(&self) -> &[(u64, u64)] {
        &self.dets
    }

    /// Interleaved spin-orbital masks in basis order.
    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn index_of(&self, mask: u64) -> Option<usize> {
        self.lookup.get(&mask).copied()
    }
}

/// All determinants with the given electron counts, ordered by alpha string
/// then beta string.
pub fn enumerate_determinants(n_spatial: usize, n_alpha: usize, n_beta: usize) -> Result<DeterminantBasis> {
    if n_spatial == 0 || n_spatial > 32 {
        return Err(invalid(format!("unsupported orbital count {n_spatial}")));
    }
    if n_alpha > n_spatial || n_beta > n_spatial {
        return Err(invalid(format!(
            "({n_alpha}, {n_beta}) electrons exceed {n_spatial} orbitals"
        )));
    }
    let alphas = strings(n_spatial, n_alpha);
    let betas = strings(n_spatial, n_beta);
    let mut dets = Vec::with_capacity(alphas.len() * betas.len());
    for &a in &alphas {
        for &b in &betas {
            dets.push((a, b));
        }
    }
    let masks: Vec<u64> = dets
        .iter()
        .map(|&(a, b)| spin_orbital_mask(a, b, n_spatial))
        .collect();
    let lookup = masks.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    Ok(DeterminantBasis {
        n_spatial,
        n_alpha,
        n_beta,
        dets,
        masks,
        lookup,
    })
}

/// Hamiltonian matrix in the determinant basis by the Slater–Condon rules.
///
/// The nuclear repulsion is included on the diagonal, so eigenvalues are total
/// energies.
pub fn build_hamiltonian(ints: &MolecularIntegrals, basis: &DeterminantBasis) -> Result<DMatrix<f64>> {
    if ints.n_spatial() != basis.n_spatial() {
        return Err(Error::DimensionMismatch {
            expected: basis.n_spatial(),
            found: ints.n_spatial(),
        });
    }
    let r = basis.n_spin();
    let dim = basis.len();
    let anti = |p: usize, q: usize, s: usize, t: usize| ints.spin_eri(p, q, s, t) - ints.spin_eri(p, q, t, s);
    let mut h = DMatrix::zeros(dim, dim);
    for (col, &det) in basis.masks().iter().enumerate() {
        let occ: Vec<usize> = occupied(det).collect();
        let virt: Vec<usize> = (0..r).filter(|&p| det & (1u64 << p) == 0).collect();

        let mut diag = ints.e_nuc();
        for (x, &p) in occ.iter().enumerate() {
            diag += ints.spin_h(p, p);
            for &q in &occ[x + 1..] {
                diag += anti(p, q, p, q);
            }
        }
        h[(col, col)] += diag;

        for &q in &occ {
            for &p in &virt {
                if p % 2 != q % 2 {
                    continue;
                }
                let (m1, s1) = annihilate(det, q).expect("q occupied");
                let (m2, s2) = create(m1, p).expect("p empty");
                let Some(row) = basis.index_of(m2) else { continue };
                let mut v = ints.spin_h(p, q);
                for &k in &occ {
                    if k != q {
                        v += anti(p, k, q, k);
                    }
                }
                h[(row, col)] += s1 * s2 * v;
            }
        }

        for (x, &a) in occ.iter().enumerate() {
            for &b in &occ[x + 1..] {
                for (y, &p) in virt.iter().enumerate() {
                    for &q in &virt[y + 1..] {
                        if (p % 2) + (q % 2) != (a % 2) + (b % 2) {
                            continue;
                        }
                        let v = anti(p, q, a, b);
                        if v == 0.0 {
                            continue;
                        }
                        // a†_p a†_q a_b a_a
                        let (m1, s1) = annihilate(det, a).expect("occupied");
                        let (m2, s2) = annihilate(m1, b).expect("occupied");
                        let (m3, s3) = create(m2, q).expect("empty");
                        let (m4, s4) = create(m3, p).expect("empty");
                        let Some(row) = basis.index_of(m4) else { continue };
                        h[(row, col)] += s1 * s2 * s3 * s4 * v;
                    }
                }
            }
        }
    }
    let t = h.transpose();
    Ok((h + t) * 0.5)
}

#[derive(Debug, Clone)]
pub struct FciSolution {
    pub energy: f64,
    pub ci: DVector<f64>,
    pub basis: DeterminantBasis,
}

impl FciSolution {
    pub fn n_electrons(&self) -> usize {
        self.basis.n_electrons()
    }
}

/// Lowest eigenpair of a Hamiltonian matrix.
///
/// Among exactly degenerate lowest eigenvalues the one with the lowest index
/// after the deterministic eigendecomposition is kept; the CI vector is then
/// signed so its first nonzero coefficient is positive.
pub fn ground_state(h: &DMatrix<f64>, basis: DeterminantBasis) -> Result<FciSolution> {
    if h.nrows() != basis.len() || h.ncols() != basis.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.len(),
            found: h.nrows(),
        });
    }
    let eig = sym_eigendecomposition(&SymMatrix::new(h.clone())?)?;
    // Values are descending; the first index holding the minimum wins ties.
    let e_min = *eig.values.last().expect("non-empty basis");
    let k = eig
        .values
        .iter()
        .position(|&v| v == e_min)
        .expect("minimum present");
    let mut ci: DVector<f64> = eig.vectors.column(k).into_owned();
    ci /= ci.norm();
    if let Some(first) = ci.iter().find(|c| c.abs() > 1e-12) {
        if *first < 0.0 {
            ci.neg_mut();
        }
    }
    let energy = ci.dot(&(h * &ci));
    Ok(FciSolution { energy, ci, basis })
}

/// Ground state of `ints` in the `(n_alpha, n_beta)` sector.
pub fn solve_fci(ints: &MolecularIntegrals, n_alpha: usize, n_beta: usize) -> Result<FciSolution> {
    let basis = enumerate_determinants(ints.n_spatial(), n_alpha, n_beta)?;
    let h = build_hamiltonian(ints, &basis)?;
    ground_state(&h, basis)
}

/// `²D^{ij}_{kl} = ⟨Ψ|a†_i a†_j a_l a_k|Ψ⟩` as a Gram matrix of the vectors
/// `a_j a_i |Ψ⟩`.
pub fn compute_2rdm(sol: &FciSolution) -> Result<TwoRdm> {
    let r = sol.basis.n_spin();
    let p = pair_count(r);
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(p);
    for &(i, j) in &pairs(r) {
        let mut col = Vec::new();
        for (&det, &c) in sol.basis.masks().iter().zip(sol.ci.iter()) {
            if c == 0.0 {
                continue;
            }
            let Some((m1, s1)) = annihilate(det, i) else { continue };
            let Some((m2, s2)) = annihilate(m1, j) else { continue };
            let next = index.len();
            let row = *index.entry(m2).or_insert(next);
            col.push((row, c * s1 * s2));
        }
        cols.push(col);
    }
    let mut w = DMatrix::zeros(index.len().max(1), p);
    for (a, col) in cols.iter().enumerate() {
        for &(row, v) in col {
            w[(row, a)] += v;
        }
    }
    TwoRdm::new(r, w.transpose() * &w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::hubbard_chain;
    use approx::assert_abs_diff_eq;

    #[test]
    fn determinant_counts() {
        assert_eq!(enumerate_determinants(2, 1, 1).unwrap().len(), 4);
        assert_eq!(enumerate_determinants(4, 2, 2).unwrap().len(), 36);
        assert_eq!(enumerate_determinants(8, 4, 4).unwrap().len(), 4900);
        assert!(enumerate_determinants(2, 3, 0).is_err());
    }

    #[test]
    fn masks_have_declared_popcounts() {
        let b = enumerate_determinants(5, 3, 2).unwrap();
        for &(a, bb) in b.dets() {
            assert_eq!(a.count_ones(), 3);
            assert_eq!(bb.count_ones(), 2);
        }
        let mut sorted = b.dets().to_vec();
        sorted.sort();
        assert_eq!(sorted, b.dets());
    }

    #[test]
    fn operator_signs() {
        // |0,2⟩ = a†_0 a†_2 |vac⟩: removing orbital 2 passes orbital 0.
        let det = 0b101;
        assert_eq!(annihilate(det, 2), Some((0b001, -1.0)));
        assert_eq!(annihilate(det, 0), Some((0b100, 1.0)));
        assert_eq!(annihilate(det, 1), None);
        assert_eq!(create(det, 1), Some((0b111, -1.0)));
        assert_eq!(create(det, 0), None);
    }

    #[test]
    fn zero_integrals_give_zero_matrix() {
        let ints = MolecularIntegrals::zeros(3, 2, 0).unwrap();
        let basis = enumerate_determinants(3, 1, 1).unwrap();
        let h = build_hamiltonian(&ints, &basis).unwrap();
        assert!(h.iter().all(|&x| x == 0.0));
        let sol = ground_state(&h, basis).unwrap();
        assert_eq!(sol.energy, 0.0);
        assert_abs_diff_eq!(sol.ci.norm(), 1.0, epsilon = 1e-12);
        // Degenerate spectrum: deterministic choice, first nonzero positive.
        let again = ground_state(&h, enumerate_determinants(3, 1, 1).unwrap()).unwrap();
        assert_eq!(sol.ci, again.ci);
        assert!(sol.ci.iter().find(|c| c.abs() > 1e-12).unwrap() > &0.0);
    }

    #[test]
    fn hubbard_dimer_analytic() {
        let ints = hubbard_chain(2, 1.0, 4.0, false).unwrap();
        let sol = solve_fci(&ints, 1, 1).unwrap();
        assert_abs_diff_eq!(sol.energy, (4.0 - 32f64.sqrt()) / 2.0, epsilon = 1e-10);
        let free = solve_fci(&hubbard_chain(2, 1.0, 0.0, false).unwrap(), 1, 1).unwrap();
        assert_abs_diff_eq!(free.energy, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn single_determinant_rdm() {
        let basis = enumerate_determinants(3, 2, 1).unwrap();
        let k = 4;
        let mut ci = DVector::zeros(basis.len());
        ci[k] = 1.0;
        let det = basis.masks()[k];
        let sol = FciSolution { energy: 0.0, ci, basis };
        let d2 = compute_2rdm(&sol).unwrap();
        let r = 6;
        for (a, &(i, j)) in pairs(r).iter().enumerate() {
            for b in 0..pair_count(r) {
                let occ = det & (1 << i) != 0 && det & (1 << j) != 0;
                let expected = if a == b && occ { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(d2.matrix()[(a, b)], expected, epsilon = 1e-14);
            }
        }
        let d1 = contract_to_1rdm(&d2, 3).unwrap();
        for p in 0..r {
            let occ = if det & (1 << p) != 0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(d1[(p, p)], occ, epsilon = 1e-14);
        }
    }
}

//! Pair-space indexing and the packed two-particle reduced density matrix.

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// Number of ordered pairs `i < j` over `n_spin` spin orbitals.
pub fn pair_count(n_spin: usize) -> usize {
    n_spin * n_spin.saturating_sub(1) / 2
}

/// Packed index of the pair `(i, j)` with `i < j`.
#[inline]
pub fn pair_index(i: usize, j: usize, n_spin: usize) -> usize {
    debug_assert!(i < j && j < n_spin);
    i * (2 * n_spin - i - 1) / 2 + (j - i - 1)
}

/// All pairs `(i, j)`, `i < j`, in packed order.
pub fn pairs(n_spin: usize) -> Vec<(usize, usize)> {
    (0..n_spin)
        .flat_map(|i| ((i + 1)..n_spin).map(move |j| (i, j)))
        .collect()
}

/// Packed index and sign for an arbitrary ordered pair; `None` when `i == j`.
#[inline]
pub fn signed_pair(i: usize, j: usize, n_spin: usize) -> Option<(usize, f64)> {
    match i.cmp(&j) {
        std::cmp::Ordering::Less => Some((pair_index(i, j, n_spin), 1.0)),
        std::cmp::Ordering::Greater => Some((pair_index(j, i, n_spin), -1.0)),
        std::cmp::Ordering::Equal => None,
    }
}

/// Two-particle reduced density matrix on the antisymmetric pair space.
///
/// `data[(ij), (kl)] = <a†_i a†_j a_l a_k>` for `i < j`, `k < l`. The packed
/// trace is `N(N-1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoRdm {
    n_spin: usize,
    data: DMatrix<f64>,
}

impl TwoRdm {
    pub fn new(n_spin: usize, data: DMatrix<f64>) -> Result<Self> {
        let p = pair_count(n_spin);
        if n_spin < 2 {
            return Err(invalid("a 2-RDM needs at least two spin orbitals"));
        }
        if data.nrows() != p || data.ncols() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: data.nrows().max(data.ncols()),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(invalid("2-RDM has non-finite entries"));
        }
        let t = data.transpose();
        Ok(Self {
            n_spin,
            data: (data + t) * 0.5,
        })
    }

    pub fn zeros(n_spin: usize) -> Self {
        let p = pair_count(n_spin);
        Self {
            n_spin,
            data: DMatrix::zeros(p, p),
        }
    }

    pub fn n_spin(&self) -> usize {
        self.n_spin
    }

    pub fn n_pairs(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// Trace over packed pairs, `N(N-1)/2` for an N-electron state.
    pub fn packed_trace(&self) -> f64 {
        self.data.trace()
    }

    /// Electron number implied by the packed trace.
    pub fn implied_electrons(&self) -> f64 {
        0.5 * (1.0 + (1.0 + 8.0 * self.packed_trace()).sqrt())
    }

    /// `²D^{ij}_{kl}` for arbitrary spin-orbital indices.
    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        match (signed_pair(i, j, self.n_spin), signed_pair(k, l, self.n_spin)) {
            (Some((a, sa)), Some((b, sb))) => sa * sb * self.data[(a, b)],
            _ => 0.0,
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n_spin: self.n_spin,
            data: &self.data * factor,
        }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.data
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// `¹D_ik = 1/(N-1) Σ_j ²D^{ij}_{kj}`.
pub fn contract_to_1rdm(d2: &TwoRdm, n_electrons: usize) -> Result<DMatrix<f64>> {
    if n_electrons < 2 {
        return Err(invalid("contraction to the 1-RDM needs N >= 2"));
    }
    let r = d2.n_spin();
    let scale = 1.0 / (n_electrons as f64 - 1.0);
    let mut d1 = DMatrix::zeros(r, r);
    for i in 0..r {
        for k in i..r {
            let mut acc = 0.0;
            for j in 0..r {
                if j != i && j != k {
                    acc += d2.element(i, j, k, j);
                }
            }
            d1[(i, k)] = acc * scale;
            d1[(k, i)] = acc * scale;
        }
    }
    Ok(d1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_index_is_dense_and_ordered() {
        for r in 2..9 {
            let ps = pairs(r);
            assert_eq!(ps.len(), pair_count(r));
            for (k, &(i, j)) in ps.iter().enumerate() {
                assert_eq!(pair_index(i, j, r), k);
            }
        }
    }

    #[test]
    fn element_is_antisymmetric() {
        let r = 4;
        let p = pair_count(r);
        let data = DMatrix::from_fn(p, p, |a, b| (a * p + b) as f64 + (b * p + a) as f64);
        let d = TwoRdm::new(r, data).unwrap();
        assert_eq!(d.element(0, 1, 2, 3), -d.element(1, 0, 2, 3));
        assert_eq!(d.element(0, 1, 2, 3), -d.element(0, 1, 3, 2));
        assert_eq!(d.element(0, 1, 2, 3), d.element(1, 0, 3, 2));
        assert_eq!(d.element(1, 1, 2, 3), 0.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(TwoRdm::new(4, DMatrix::zeros(5, 5)).is_err());
        assert!(TwoRdm::new(1, DMatrix::zeros(0, 0)).is_err());
        assert!(contract_to_1rdm(&TwoRdm::zeros(4), 1).is_err());
    }
}

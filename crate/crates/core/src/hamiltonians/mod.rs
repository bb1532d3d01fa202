//! Second-quantized Hamiltonians: integral containers, model and molecular
//! generators, and the two-body reduced Hamiltonian used as the SDP objective.
//!
//! Spin orbitals are ordered spatial-major with alpha before beta, so spatial
//! orbital `p` maps to spin orbitals `2p` (alpha) and `2p + 1` (beta).

mod fcidump;
mod registry;
mod sto3g;

pub use fcidump::{parse_fcidump, read_fcidump, write_fcidump};
pub use registry::{parse_system, System};
pub use sto3g::{
    boys_f0, hydrogen_chain_sto3g, hydrogen_cluster_sto3g, BOHR_ANGSTROM, STO3G_H_COEFFICIENTS,
    STO3G_H_EXPONENTS,
};

use nalgebra::DMatrix;

use crate::error::{invalid, Result};
use crate::rdm::{pair_count, pairs, TwoRdm};

/// Spin of a spin-orbital index: 0 = alpha, 1 = beta.
#[inline]
pub fn spin_of(p: usize) -> usize {
    p & 1
}

/// Spatial orbital of a spin-orbital index.
#[inline]
pub fn spatial_of(p: usize) -> usize {
    p >> 1
}

/// One- and two-electron integrals over an orthonormal spatial basis (Hartree).
///
/// `eri` holds `(pq|rs)` in chemists' notation, fully expanded.
#[derive(Debug, Clone, PartialEq)]
pub struct MolecularIntegrals {
    n_spatial: usize,
    h: DMatrix<f64>,
    eri: Vec<f64>,
    e_nuc: f64,
    n_electrons: usize,
    ms2: usize,
}

impl MolecularIntegrals {
    /// Zero integrals with electron-count metadata.
    pub fn zeros(n_spatial: usize, n_electrons: usize, ms2: usize) -> Result<Self> {
        if n_spatial == 0 {
            return Err(invalid("need at least one spatial orbital"));
        }
        Ok(Self {
            n_spatial,
            h: DMatrix::zeros(n_spatial, n_spatial),
            eri: vec![0.0; n_spatial.pow(4)],
            e_nuc: 0.0,
            n_electrons,
            ms2,
        })
    }

    pub fn n_spatial(&self) -> usize {
        self.n_spatial
    }

    pub fn n_spin(&self) -> usize {
        2 * self.n_spatial
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    /// Twice the spin projection, `N_alpha - N_beta`.
    pub fn ms2(&self) -> usize {
        self.ms2
    }

    /// `(N_alpha, N_beta)` implied by the metadata.
    pub fn electron_split(&self) -> Result<(usize, usize)> {
        let n = self.n_electrons;
        if self.ms2 > n || (n - self.ms2) % 2 != 0 {
            return Err(invalid(format!(
                "inconsistent electron count {n} and 2S = {}",
                self.ms2
            )));
        }
        let n_beta = (n - self.ms2) / 2;
        Ok((n - n_beta, n_beta))
    }

    pub fn with_electrons(mut self, n_electrons: usize, ms2: usize) -> Self {
        self.n_electrons = n_electrons;
        self.ms2 = ms2;
        self
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    pub fn e_nuc(&self) -> f64 {
        self.e_nuc
    }

    pub fn set_e_nuc(&mut self, e: f64) {
        self.e_nuc = e;
    }

    /// Sets `h[p,q]` and `h[q,p]`.
    pub fn set_h(&mut self, p: usize, q: usize, v: f64) {
        self.h[(p, q)] = v;
        self.h[(q, p)] = v;
    }

    #[inline]
    fn eri_offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        let n = self.n_spatial;
        ((p * n + q) * n + r) * n + s
    }

    /// `(pq|rs)` over spatial orbitals.
    #[inline]
    pub fn eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.eri[self.eri_offset(p, q, r, s)]
    }

    /// Sets `(pq|rs)` and its seven permutational partners.
    pub fn set_eri(&mut self, p: usize, q: usize, r: usize, s: usize, v: f64) {
        for (a, b, c, d) in [
            (p, q, r, s),
            (q, p, r, s),
            (p, q, s, r),
            (q, p, s, r),
            (r, s, p, q),
            (s, r, p, q),
            (r, s, q, p),
            (s, r, q, p),
        ] {
            let o = self.eri_offset(a, b, c, d);
            self.eri[o] = v;
        }
    }

    /// Largest violation of `h` symmetry and 8-fold ERI symmetry.
    pub fn symmetry_error(&self) -> f64 {
        let n = self.n_spatial;
        let mut err: f64 = (&self.h - self.h.transpose()).abs().max();
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.eri(p, q, r, s);
                        for w in [
                            self.eri(q, p, r, s),
                            self.eri(p, q, s, r),
                            self.eri(r, s, p, q),
                        ] {
                            err = err.max((v - w).abs());
                        }
                    }
                }
            }
        }
        err
    }

    /// Physicists' spin-orbital integral `<pq|rs> = (pr|qs)` with spin selection.
    #[inline]
    pub fn spin_eri(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        if spin_of(p) != spin_of(r) || spin_of(q) != spin_of(s) {
            return 0.0;
        }
        self.eri(spatial_of(p), spatial_of(r), spatial_of(q), spatial_of(s))
    }

    /// One-electron spin-orbital integral.
    #[inline]
    pub fn spin_h(&self, p: usize, q: usize) -> f64 {
        if spin_of(p) != spin_of(q) {
            return 0.0;
        }
        self.h[(spatial_of(p), spatial_of(q))]
    }

    /// Integrals in a rotated spatial basis `φ'_a = Σ_p C[p,a] φ_p`.
    pub fn rotated(&self, c: &DMatrix<f64>) -> Result<Self> {
        let n = self.n_spatial;
        if c.nrows() != n || c.ncols() != n {
            return Err(invalid("rotation matrix has wrong shape"));
        }
        let h = c.transpose() * &self.h * c;
        let eri = transform_eri(&self.eri, c, n);
        Ok(Self {
            n_spatial: n,
            h,
            eri,
            e_nuc: self.e_nuc,
            n_electrons: self.n_electrons,
            ms2: self.ms2,
        })
    }

    pub(crate) fn from_parts(
        h: DMatrix<f64>,
        eri: Vec<f64>,
        e_nuc: f64,
        n_electrons: usize,
        ms2: usize,
    ) -> Self {
        let n_spatial = h.nrows();
        debug_assert_eq!(eri.len(), n_spatial.pow(4));
        Self {
            n_spatial,
            h,
            eri,
            e_nuc,
            n_electrons,
            ms2,
        }
    }
}

/// Four-index transform `(ab|cd) = Σ C_pa C_qb C_rc C_sd (pq|rs)`, one index at a time.
pub(crate) fn transform_eri(eri: &[f64], c: &DMatrix<f64>, n: usize) -> Vec<f64> {
    let idx = |p: usize, q: usize, r: usize, s: usize| ((p * n + q) * n + r) * n + s;
    let mut cur = eri.to_vec();
    for axis in 0..4 {
        let mut next = vec![0.0; cur.len()];
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = cur[idx(p, q, r, s)];
                        if v == 0.0 {
                            continue;
                        }
                        let mut ix = [p, q, r, s];
                        let old = ix[axis];
                        for a in 0..n {
                            ix[axis] = a;
                            next[idx(ix[0], ix[1], ix[2], ix[3])] += c[(old, a)] * v;
                        }
                    }
                }
            }
        }
        cur = next;
    }
    cur
}

/// One-dimensional Hubbard chain at half filling.
///
/// `h(i, i±1) = -t`, `(ii|ii) = u`, no nuclear repulsion.
pub fn hubbard_chain(n_sites: usize, t: f64, u: f64, periodic: bool) -> Result<MolecularIntegrals> {
    if n_sites < 2 {
        return Err(invalid("Hubbard chain needs at least two sites"));
    }
    let mut ints = MolecularIntegrals::zeros(n_sites, n_sites, n_sites % 2)?;
    for i in 0..n_sites - 1 {
        ints.set_h(i, i + 1, -t);
    }
    // A two-site ring would double the single bond.
    if periodic && n_sites > 2 {
        ints.set_h(0, n_sites - 1, -t);
    }
    for i in 0..n_sites {
        ints.set_eri(i, i, i, i, u);
    }
    Ok(ints)
}

/// Energy functional linear in the packed 2-RDM.
///
/// For any 2-RDM with packed trace `N(N-1)/2`, `⟨k2, ²D⟩ + e_nuc` equals the
/// energy expectation value.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedHamiltonian {
    n_spin: usize,
    k2: DMatrix<f64>,
    e_nuc: f64,
    n_electrons: usize,
}

impl ReducedHamiltonian {
    pub fn n_spin(&self) -> usize {
        self.n_spin
    }

    pub fn k2(&self) -> &DMatrix<f64> {
        &self.k2
    }

    pub fn e_nuc(&self) -> f64 {
        self.e_nuc
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    /// `⟨k2, ²D⟩` without the nuclear term.
    pub fn electronic_energy(&self, d2: &TwoRdm) -> f64 {
        self.k2.dot(d2.matrix())
    }

    pub fn energy(&self, d2: &TwoRdm) -> f64 {
        self.electronic_energy(d2) + self.e_nuc
    }
}

/// Folds `h` into the two-body space with weight `1/(N-1)` and antisymmetrizes
/// the spin-orbital ERIs:
///
/// `k2[(ij),(kl)] = <ij|kl> - <ij|lk> + (δ_jl h_ik - δ_il h_jk - δ_jk h_il + δ_ik h_jl)/(N-1)`.
pub fn reduced_hamiltonian(ints: &MolecularIntegrals, n_electrons: usize) -> Result<ReducedHamiltonian> {
    if n_electrons < 2 {
        return Err(invalid("reduced Hamiltonian needs N >= 2"));
    }
    let r = ints.n_spin();
    if n_electrons > r {
        return Err(invalid(format!(
            "{n_electrons} electrons do not fit in {r} spin orbitals"
        )));
    }
    let p = pair_count(r);
    let ps = pairs(r);
    let w = 1.0 / (n_electrons as f64 - 1.0);
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let mut k2 = DMatrix::zeros(p, p);
    for (a, &(i, j)) in ps.iter().enumerate() {
        for (b, &(k, l)) in ps.iter().enumerate().skip(a) {
            let two = ints.spin_eri(i, j, k, l) - ints.spin_eri(i, j, l, k);
            let one = delta(j, l) * ints.spin_h(i, k) - delta(i, l) * ints.spin_h(j, k)
                - delta(j, k) * ints.spin_h(i, l)
                + delta(i, k) * ints.spin_h(j, l);
            let v = two + w * one;
            k2[(a, b)] = v;
            k2[(b, a)] = v;
        }
    }
    Ok(ReducedHamiltonian {
        n_spin: r,
        k2,
        e_nuc: ints.e_nuc(),
        n_electrons,
    })
}

//! STO-3G hydrogen integrals from closed-form s-type Gaussian formulas.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};

use super::{transform_eri, MolecularIntegrals};
use crate::error::{invalid, Result};

/// Ångström per bohr.
pub const BOHR_ANGSTROM: f64 = 0.52917721092;

/// STO-3G hydrogen exponents (bohr⁻²), Slater exponent 1.24 already applied.
pub const STO3G_H_EXPONENTS: [f64; 3] = [3.42525091, 0.62391373, 0.16885540];

/// Contraction coefficients over normalized primitives.
pub const STO3G_H_COEFFICIENTS: [f64; 3] = [0.15432897, 0.53532814, 0.44463454];

const BOYS_SMALL_X: f64 = 1e-12;

/// `F₀(x) = ½ √(π/x) erf(√x)`, with its `x → 0` series below `1e-12`.
pub fn boys_f0(x: f64) -> f64 {
    if x <= BOYS_SMALL_X {
        1.0 - x / 3.0
    } else {
        let sx = x.sqrt();
        0.5 * (PI / x).sqrt() * libm::erf(sx)
    }
}

#[derive(Debug, Clone)]
struct ContractedS {
    center: [f64; 3],
    /// (exponent, coefficient including primitive and contraction normalisation)
    prims: Vec<(f64, f64)>,
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).powi(2)).sum()
}

fn gaussian_product(a: f64, ca: &[f64; 3], b: f64, cb: &[f64; 3]) -> [f64; 3] {
    let p = a + b;
    [
        (a * ca[0] + b * cb[0]) / p,
        (a * ca[1] + b * cb[1]) / p,
        (a * ca[2] + b * cb[2]) / p,
    ]
}

fn prim_overlap(a: f64, b: f64, r2: f64) -> f64 {
    let p = a + b;
    (PI / p).powf(1.5) * (-a * b / p * r2).exp()
}

fn prim_kinetic(a: f64, b: f64, r2: f64) -> f64 {
    let mu = a * b / (a + b);
    mu * (3.0 - 2.0 * mu * r2) * prim_overlap(a, b, r2)
}

impl ContractedS {
    fn hydrogen(center: [f64; 3]) -> Self {
        let mut prims: Vec<(f64, f64)> = STO3G_H_EXPONENTS
            .iter()
            .zip(STO3G_H_COEFFICIENTS)
            .map(|(&a, c)| (a, c * (2.0 * a / PI).powf(0.75)))
            .collect();
        let mut s = Self { center, prims: prims.clone() };
        let norm = s.overlap(&s).sqrt();
        prims.iter_mut().for_each(|p| p.1 /= norm);
        s.prims = prims;
        s
    }

    fn overlap(&self, o: &Self) -> f64 {
        let r2 = dist2(&self.center, &o.center);
        let mut acc = 0.0;
        for &(a, ca) in &self.prims {
            for &(b, cb) in &o.prims {
                acc += ca * cb * prim_overlap(a, b, r2);
            }
        }
        acc
    }

    fn kinetic(&self, o: &Self) -> f64 {
        let r2 = dist2(&self.center, &o.center);
        let mut acc = 0.0;
        for &(a, ca) in &self.prims {
            for &(b, cb) in &o.prims {
                acc += ca * cb * prim_kinetic(a, b, r2);
            }
        }
        acc
    }

    fn nuclear(&self, o: &Self, nucleus: &[f64; 3], charge: f64) -> f64 {
        let r2 = dist2(&self.center, &o.center);
        let mut acc = 0.0;
        for &(a, ca) in &self.prims {
            for &(b, cb) in &o.prims {
                let p = a + b;
                let pc = gaussian_product(a, &self.center, b, &o.center);
                let v = -2.0 * PI / p * charge * (-a * b / p * r2).exp() * boys_f0(p * dist2(&pc, nucleus));
                acc += ca * cb * v;
            }
        }
        acc
    }
}

fn eri(f1: &ContractedS, f2: &ContractedS, f3: &ContractedS, f4: &ContractedS) -> f64 {
    let r12 = dist2(&f1.center, &f2.center);
    let r34 = dist2(&f3.center, &f4.center);
    let mut acc = 0.0;
    for &(a, ca) in &f1.prims {
        for &(b, cb) in &f2.prims {
            let p = a + b;
            let pc = gaussian_product(a, &f1.center, b, &f2.center);
            let kab = (-a * b / p * r12).exp();
            for &(c, cc) in &f3.prims {
                for &(d, cd) in &f4.prims {
                    let q = c + d;
                    let qc = gaussian_product(c, &f3.center, d, &f4.center);
                    let kcd = (-c * d / q * r34).exp();
                    let t = p * q / (p + q) * dist2(&pc, &qc);
                    let v = 2.0 * PI.powf(2.5) / (p * q * (p + q).sqrt()) * kab * kcd * boys_f0(t);
                    acc += ca * cb * cc * cd * v;
                }
            }
        }
    }
    acc
}

/// STO-3G integrals for hydrogen atoms at arbitrary positions (Ångström),
/// in the Löwdin-orthogonalized atomic orbital basis.
pub fn hydrogen_cluster_sto3g(positions: &[[f64; 3]]) -> Result<MolecularIntegrals> {
    let n = positions.len();
    if n == 0 {
        return Err(invalid("need at least one hydrogen atom"));
    }
    let centers: Vec<[f64; 3]> = positions
        .iter()
        .map(|p| [p[0] / BOHR_ANGSTROM, p[1] / BOHR_ANGSTROM, p[2] / BOHR_ANGSTROM])
        .collect();
    let basis: Vec<ContractedS> = centers.iter().map(|&c| ContractedS::hydrogen(c)).collect();

    let mut e_nuc = 0.0;
    for i in 0..n {
        for j in 0..i {
            let r = dist2(&centers[i], &centers[j]).sqrt();
            if r < 1e-8 {
                return Err(invalid("coincident nuclei"));
            }
            e_nuc += 1.0 / r;
        }
    }

    let mut s = DMatrix::zeros(n, n);
    let mut hcore = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let sij = basis[i].overlap(&basis[j]);
            let mut hij = basis[i].kinetic(&basis[j]);
            for c in &centers {
                hij += basis[i].nuclear(&basis[j], c, 1.0);
            }
            s[(i, j)] = sij;
            s[(j, i)] = sij;
            hcore[(i, j)] = hij;
            hcore[(j, i)] = hij;
        }
    }
    let idx = |p: usize, q: usize, r: usize, t: usize| ((p * n + q) * n + r) * n + t;
    let mut ao_eri = vec![0.0; n.pow(4)];
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for t in 0..=r {
                    if r * (r + 1) / 2 + t > p * (p + 1) / 2 + q {
                        continue;
                    }
                    let v = eri(&basis[p], &basis[q], &basis[r], &basis[t]);
                    for (a, b, c, d) in [
                        (p, q, r, t),
                        (q, p, r, t),
                        (p, q, t, r),
                        (q, p, t, r),
                        (r, t, p, q),
                        (t, r, p, q),
                        (r, t, q, p),
                        (t, r, q, p),
                    ] {
                        ao_eri[idx(a, b, c, d)] = v;
                    }
                }
            }
        }
    }

    // X = S^{-1/2}
    let eig = SymmetricEigen::new(s);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-10) {
        return Err(invalid("atomic orbital overlap is singular"));
    }
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let x = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let x = (&x + x.transpose()) * 0.5;

    let h = x.transpose() * hcore * &x;
    let h = (&h + h.transpose()) * 0.5;
    let mo_eri = transform_eri(&ao_eri, &x, n);
    let mut ints = MolecularIntegrals::from_parts(h, vec![0.0; n.pow(4)], e_nuc, n, n % 2);
    // Re-impose exact 8-fold symmetry after the transform.
    for p in 0..n {
        for q in 0..=p {
            for r in 0..n {
                for t in 0..=r {
                    if r * (r + 1) / 2 + t > p * (p + 1) / 2 + q {
                        continue;
                    }
                    ints.set_eri(p, q, r, t, mo_eri[idx(p, q, r, t)]);
                }
            }
        }
    }
    Ok(ints)
}

/// Linear chain of `n_atoms` hydrogens along z with uniform `spacing` (Ångström).
pub fn hydrogen_chain_sto3g(n_atoms: usize, spacing: f64) -> Result<MolecularIntegrals> {
    if !(2..=8).contains(&n_atoms) {
        return Err(invalid(format!(
            "hydrogen chains support 2 to 8 atoms, got {n_atoms}"
        )));
    }
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(invalid(format!("spacing must be positive, got {spacing}")));
    }
    let positions: Vec<[f64; 3]> = (0..n_atoms)
        .map(|i| [0.0, 0.0, i as f64 * spacing])
        .collect();
    hydrogen_cluster_sto3g(&positions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn contracted_function_is_normalized() {
        let f = ContractedS::hydrogen([0.1, -0.2, 0.3]);
        assert_abs_diff_eq!(f.overlap(&f), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn boys_limits() {
        assert_eq!(boys_f0(0.0), 1.0);
        assert_abs_diff_eq!(boys_f0(1e-13), 1.0, epsilon = 1e-12);
        // Continuity across the switch point.
        assert_abs_diff_eq!(boys_f0(1.0001e-12), boys_f0(0.9999e-12), epsilon = 1e-14);
        // F0(1) = ½√π erf(1)
        assert_abs_diff_eq!(boys_f0(1.0), 0.746824132812427, epsilon = 1e-14);
    }

    #[test]
    fn nuclear_repulsion_point_charge() {
        let ints = hydrogen_chain_sto3g(2, 1.0).unwrap();
        assert_abs_diff_eq!(ints.e_nuc(), 1.0 / (1.0 / BOHR_ANGSTROM), epsilon = 1e-15);
        assert_abs_diff_eq!(ints.e_nuc(), 0.52917721092, epsilon = 1e-15);
    }

    #[test]
    fn dimer_mirror_symmetry() {
        let ints = hydrogen_chain_sto3g(2, 0.7414).unwrap();
        let h = ints.h();
        assert_abs_diff_eq!(h[(0, 0)], h[(1, 1)], epsilon = 1e-12);
        assert_abs_diff_eq!(ints.eri(0, 0, 0, 0), ints.eri(1, 1, 1, 1), epsilon = 1e-12);
        assert_abs_diff_eq!(ints.eri(0, 0, 0, 1), ints.eri(1, 1, 1, 0), epsilon = 1e-12);
        assert!(ints.symmetry_error() <= 1e-12);
    }

    #[test]
    fn translation_invariance() {
        let base = hydrogen_cluster_sto3g(&[[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 2.0]]).unwrap();
        let shifted = hydrogen_cluster_sto3g(&[[0.3, -1.1, 2.0], [0.3, -1.1, 3.0], [0.3, -1.1, 4.0]]).unwrap();
        assert!((base.h() - shifted.h()).abs().max() <= 1e-12);
        for p in 0..3 {
            for q in 0..3 {
                for r in 0..3 {
                    for s in 0..3 {
                        assert_abs_diff_eq!(base.eri(p, q, r, s), shifted.eri(p, q, r, s), epsilon = 1e-12);
                    }
                }
            }
        }
        assert_abs_diff_eq!(base.e_nuc(), shifted.e_nuc(), epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(hydrogen_chain_sto3g(2, 0.0).is_err());
        assert!(hydrogen_chain_sto3g(2, -1.0).is_err());
        assert!(hydrogen_chain_sto3g(1, 1.0).is_err());
        assert!(hydrogen_chain_sto3g(9, 1.0).is_err());
    }
}

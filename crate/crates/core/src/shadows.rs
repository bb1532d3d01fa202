//! Classical shadows of a 2-RDM: pair-occupation diagonals read out after a
//! random one-body rotation, plus the linear rows that express them as
//! constraints on an unknown 2-RDM.
//!
//! A rotation `U` maps `a_p -> Σ_i U[p,i] a_i`, so the one-body matrix goes to
//! `U γ Uᵀ` and the pair-space matrix to `W D Wᵀ` with
//! `W[(pq),(ij)] = U[p,i] U[q,j] - U[p,j] U[q,i]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::numerics::{sample_haar_orthogonal, OrthogonalMatrix, RngStream};
use crate::rdm::{pair_count, pairs, TwoRdm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum SpinRotationMode {
    /// One spatial rotation applied identically to both spin blocks.
    #[default]
    #[serde(rename = "spatial")]
    SpatialReplicated,
    #[serde(rename = "spinorb")]
    FullSpinOrbital,
}

impl std::str::FromStr for SpinRotationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spatial" | "spatialreplicated" | "spatial-replicated" => Ok(Self::SpatialReplicated),
            "spinorb" | "spin-orbital" | "fullspinorbital" => Ok(Self::FullSpinOrbital),
            other => Err(invalid(format!("unknown spin rotation mode `{other}`"))),
        }
    }
}

impl std::fmt::Display for SpinRotationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::SpatialReplicated => "spatial",
            Self::FullSpinOrbital => "spinorb",
        })
    }
}

/// One shadow. `values[k]` and `epsilon[k]` are indexed by pair index
/// (see [`crate::rdm::pair_index`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRecord", into = "RawRecord")]
pub struct ShadowRecord {
    pub u: OrthogonalMatrix,
    pub values: Vec<f64>,
    pub epsilon: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawRecord {
    u: Vec<f64>,
    values: Vec<f64>,
    epsilon: Vec<f64>,
}

impl From<ShadowRecord> for RawRecord {
    fn from(s: ShadowRecord) -> Self {
        Self {
            u: s.u.to_row_major(),
            values: s.values,
            epsilon: s.epsilon,
        }
    }
}

impl TryFrom<RawRecord> for ShadowRecord {
    type Error = Error;

    fn try_from(raw: RawRecord) -> Result<Self> {
        let dim = (raw.u.len() as f64).sqrt().round() as usize;
        if dim * dim != raw.u.len() {
            return Err(invalid(format!("rotation has {} entries, not a square", raw.u.len())));
        }
        let u = OrthogonalMatrix::from_row_major(dim, &raw.u)?;
        ShadowRecord::new(u, raw.values, raw.epsilon)
    }
}

impl ShadowRecord {
    pub fn new(u: OrthogonalMatrix, values: Vec<f64>, epsilon: Vec<f64>) -> Result<Self> {
        let p = pair_count(u.dim());
        for (name, v) in [("values", &values), ("epsilon", &epsilon)] {
            if v.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(invalid(format!("non-finite shadow {name}")));
            }
        }
        if epsilon.iter().any(|&e| e < 0.0) {
            return Err(invalid("negative shadow tolerance"));
        }
        Ok(Self { u, values, epsilon })
    }

    pub fn n_spin(&self) -> usize {
        self.u.dim()
    }

    pub fn is_exact(&self) -> bool {
        self.epsilon.iter().all(|&e| e == 0.0)
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// The pair-space image `W` of a spin-orbital rotation.
pub fn pair_rotation_matrix(u: &OrthogonalMatrix) -> DMatrix<f64> {
    let r = u.dim();
    let m = u.matrix();
    let ps = pairs(r);
    DMatrix::from_fn(ps.len(), ps.len(), |a, b| {
        let (p, q) = ps[a];
        let (i, j) = ps[b];
        m[(p, i)] * m[(q, j)] - m[(p, j)] * m[(q, i)]
    })
}

pub fn rotate_2rdm(d2: &TwoRdm, u: &OrthogonalMatrix) -> Result<TwoRdm> {
    if d2.n_spin() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: d2.n_spin(),
            found: u.dim(),
        });
    }
    let w = pair_rotation_matrix(u);
    TwoRdm::new(d2.n_spin(), &w * d2.matrix() * w.transpose())
}

pub fn generate_shadow(d2: &TwoRdm, u: &OrthogonalMatrix) -> Result<ShadowRecord> {
    let rotated = rotate_2rdm(d2, u)?;
    let values = rotated.matrix().diagonal().iter().copied().collect();
    ShadowRecord::new(u.clone(), values, vec![0.0; d2.n_pairs()])
}

/// Draws a rotation on `n_spin` spin orbitals.
pub fn sample_rotation(n_spin: usize, mode: SpinRotationMode, rng: &mut RngStream) -> Result<OrthogonalMatrix> {
    match mode {
        SpinRotationMode::FullSpinOrbital => sample_haar_orthogonal(n_spin, rng),
        SpinRotationMode::SpatialReplicated => {
            if n_spin % 2 != 0 {
                return Err(invalid("spatial replication needs an even number of spin orbitals"));
            }
            let us = sample_haar_orthogonal(n_spin / 2, rng)?;
            Ok(replicate_spatial(&us))
        }
    }
}

/// Embeds a spatial rotation as `U[2a+σ, 2b+σ] = Us[a,b]`.
pub fn replicate_spatial(us: &OrthogonalMatrix) -> OrthogonalMatrix {
    let n = us.dim();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        for b in 0..n {
            let v = us.matrix()[(a, b)];
            m[(2 * a, 2 * b)] = v;
            m[(2 * a + 1, 2 * b + 1)] = v;
        }
    }
    OrthogonalMatrix::new(m).expect("block embedding of an orthogonal matrix is orthogonal")
}

/// `m` shadows from consecutive draws of `rng`; the first `k` records of a
/// size-`m` ensemble equal the size-`k` ensemble from the same stream state.
pub fn sample_shadow_ensemble(
    d2: &TwoRdm,
    m: usize,
    mode: SpinRotationMode,
    rng: &mut RngStream,
) -> Result<Vec<ShadowRecord>> {
    (0..m)
        .map(|_| {
            let u = sample_rotation(d2.n_spin(), mode, rng)?;
            generate_shadow(d2, &u)
        })
        .collect()
}

pub fn add_gaussian_noise(s: &ShadowRecord, sigma: f64, rng: &mut RngStream) -> Result<ShadowRecord> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(invalid(format!("noise sigma must be finite and >= 0, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(s.clone());
    }
    let values = s.values.iter().map(|v| v + rng.normal(sigma)).collect();
    ShadowRecord::new(s.u.clone(), values, vec![sigma; s.values.len()])
}

/// `S^{pq} = wᵀ D w` with `w` the `(pq)` row of the pair rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowRow {
    pub pair: (usize, usize),
    pub w: DVector<f64>,
}

impl ShadowRow {
    pub fn evaluate(&self, d2: &TwoRdm) -> f64 {
        (self.w.transpose() * d2.matrix() * &self.w)[(0, 0)]
    }

    /// Coefficients on the upper triangle `(a, b)`, `a <= b`, of a
    /// symmetric pair-space matrix.
    pub fn upper_coefficients(&self) -> Vec<(usize, usize, f64)> {
        let n = self.w.len();
        let mut out = Vec::new();
        for a in 0..n {
            let wa = self.w[a];
            if wa == 0.0 {
                continue;
            }
            out.push((a, a, wa * wa));
            for b in a + 1..n {
                let c = 2.0 * wa * self.w[b];
                if c != 0.0 {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    /// Dense `w wᵀ`, so that `⟨row, D⟩_F = S`.
    pub fn dense(&self) -> DMatrix<f64> {
        &self.w * self.w.transpose()
    }
}

pub fn shadow_constraint_rows(u: &OrthogonalMatrix) -> Vec<ShadowRow> {
    let w = pair_rotation_matrix(u);
    pairs(u.dim())
        .into_iter()
        .enumerate()
        .map(|(a, pair)| ShadowRow {
            pair,
            w: w.row(a).transpose(),
        })
        .collect()
}

/// Serializable shadow collection for replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowEnsemble {
    pub seed: u64,
    pub mode: SpinRotationMode,
    pub sigma: f64,
    pub shadows: Vec<ShadowRecord>,
}

impl ShadowEnsemble {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdm::pair_index;

    fn determinant_2rdm(r: usize, occ: &[usize]) -> TwoRdm {
        let mut d = DMatrix::zeros(pair_count(r), pair_count(r));
        for (x, &i) in occ.iter().enumerate() {
            for &j in &occ[x + 1..] {
                let k = pair_index(i.min(j), i.max(j), r);
                d[(k, k)] = 1.0;
            }
        }
        TwoRdm::new(r, d).unwrap()
    }

    fn random_psd_2rdm(r: usize, seed: u64) -> TwoRdm {
        let mut rng = RngStream::new(seed);
        let p = pair_count(r);
        let a = DMatrix::from_fn(p, p, |_, _| rng.standard_normal());
        TwoRdm::new(r, &a * a.transpose()).unwrap()
    }

    #[test]
    fn identity_rotation_is_trivial() {
        let d = random_psd_2rdm(6, 1);
        let i = OrthogonalMatrix::identity(6);
        assert!((rotate_2rdm(&d, &i).unwrap().matrix() - d.matrix()).abs().max() < 1e-14);
        let rows = shadow_constraint_rows(&i);
        assert_eq!(rows.len(), 15);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.upper_coefficients(), vec![(k, k, 1.0)]);
        }
    }

    #[test]
    fn determinant_shadow_marks_occupied_pairs() {
        let d = determinant_2rdm(6, &[0, 1, 4]);
        let s = generate_shadow(&d, &OrthogonalMatrix::identity(6)).unwrap();
        let hot: Vec<usize> = (0..15).filter(|&k| s.values[k] == 1.0).collect();
        assert_eq!(hot, vec![pair_index(0, 1, 6), pair_index(0, 4, 6), pair_index(1, 4, 6)]);
        assert_eq!(s.total(), 3.0);
        assert!(s.is_exact());
    }

    #[test]
    fn permutation_relabels_pairs() {
        let d = random_psd_2rdm(4, 2);
        // U[perm[i], i] = 1, so orbital i becomes perm[i].
        let perm = [1, 0, 3, 2];
        let u = OrthogonalMatrix::permutation(&perm).unwrap();
        let rot = rotate_2rdm(&d, &u).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let a = rot.element(perm[i], perm[j], perm[k], perm[l]);
                        assert!((a - d.element(i, j, k, l)).abs() < 1e-13);
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_group_inverse_and_trace() {
        let d = random_psd_2rdm(6, 3);
        let mut rng = RngStream::new(5);
        let u = sample_haar_orthogonal(6, &mut rng).unwrap();
        let rot = rotate_2rdm(&d, &u).unwrap();
        assert!((rot.packed_trace() - d.packed_trace()).abs() < 1e-10);
        let back = rotate_2rdm(&rot, &u.transpose()).unwrap();
        assert!((back.matrix() - d.matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn rows_reproduce_generated_values() {
        let d = random_psd_2rdm(6, 4);
        let mut rng = RngStream::new(6);
        let u = sample_haar_orthogonal(6, &mut rng).unwrap();
        let s = generate_shadow(&d, &u).unwrap();
        for (k, row) in shadow_constraint_rows(&u).iter().enumerate() {
            assert!((row.evaluate(&d) - s.values[k]).abs() < 1e-12);
            let upper: f64 = row
                .upper_coefficients()
                .iter()
                .map(|&(a, b, c)| c * d.matrix()[(a, b)])
                .sum();
            assert!((upper - s.values[k]).abs() < 1e-12);
            assert!((row.dense().component_mul(d.matrix()).sum() - s.values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn ensembles_are_deterministic_and_prefix_stable() {
        let d = random_psd_2rdm(6, 7);
        let mode = SpinRotationMode::SpatialReplicated;
        assert!(sample_shadow_ensemble(&d, 0, mode, &mut RngStream::new(1)).unwrap().is_empty());
        let a = sample_shadow_ensemble(&d, 5, mode, &mut RngStream::new(1)).unwrap();
        let b = sample_shadow_ensemble(&d, 5, mode, &mut RngStream::new(1)).unwrap();
        assert_eq!(a, b);
        let c = sample_shadow_ensemble(&d, 3, mode, &mut RngStream::new(1)).unwrap();
        assert_eq!(&a[..3], &c[..]);
        let e = sample_shadow_ensemble(&d, 1, mode, &mut RngStream::new(2)).unwrap();
        assert!((a[0].u.matrix() - e[0].u.matrix()).norm() > 1e-6);
    }

    #[test]
    fn spatial_mode_preserves_spin_blocks() {
        let u = sample_rotation(8, SpinRotationMode::SpatialReplicated, &mut RngStream::new(3)).unwrap();
        for p in 0..8 {
            for q in 0..8 {
                if p % 2 != q % 2 {
                    assert_eq!(u.matrix()[(p, q)], 0.0);
                }
            }
        }
        assert!(sample_rotation(5, SpinRotationMode::SpatialReplicated, &mut RngStream::new(3)).is_err());
        let full = sample_rotation(5, SpinRotationMode::FullSpinOrbital, &mut RngStream::new(3)).unwrap();
        assert_eq!(full.dim(), 5);
    }

    #[test]
    fn noise_sets_epsilon_and_has_zero_mean() {
        let d = random_psd_2rdm(6, 8);
        let s = generate_shadow(&d, &OrthogonalMatrix::identity(6)).unwrap();
        let same = add_gaussian_noise(&s, 0.0, &mut RngStream::new(1)).unwrap();
        assert_eq!(same, s);
        assert!(add_gaussian_noise(&s, -1.0, &mut RngStream::new(1)).is_err());

        let sigma = 1e-4;
        let mut sum = 0.0;
        let mut n = 0usize;
        for seed in 0..100 {
            let noisy = add_gaussian_noise(&s, sigma, &mut RngStream::new(seed)).unwrap();
            assert!(noisy.epsilon.iter().all(|&e| e == sigma));
            for (a, b) in noisy.values.iter().zip(&s.values) {
                sum += a - b;
                n += 1;
            }
        }
        let mean = sum / n as f64;
        assert!(mean.abs() <= 3.0 * sigma / (n as f64).sqrt());
    }

    #[test]
    fn json_round_trip() {
        let d = random_psd_2rdm(4, 9);
        let mut rng = RngStream::new(11);
        let shadows = sample_shadow_ensemble(&d, 2, SpinRotationMode::FullSpinOrbital, &mut rng).unwrap();
        let ens = ShadowEnsemble {
            seed: 11,
            mode: SpinRotationMode::FullSpinOrbital,
            sigma: 0.0,
            shadows,
        };
        let text = ens.to_json().unwrap();
        assert!(text.contains("\"spinorb\""));
        assert_eq!(ShadowEnsemble::from_json(&text).unwrap(), ens);
        assert!(ShadowEnsemble::from_json(r#"{"seed":1,"mode":"spatial","sigma":0,"shadows":[{"u":[1,0,0],"values":[],"epsilon":[]}]}"#).is_err());
    }
}

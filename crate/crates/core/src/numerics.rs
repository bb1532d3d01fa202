//! Dense real linear algebra and random sampling shared by the rest of the crate.
//!
//! Everything here works on real matrices. Unitary rotations specialise to
//! orthogonal ones and anti-Hermitian generators to antisymmetric ones.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};

/// Maximum allowed `|UᵀU - I|` entry for an [`OrthogonalMatrix`].
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Tolerance on `|A + Aᵀ|` entries accepted by [`expm_antisymmetric`].
pub const ANTISYMMETRY_TOL: f64 = 1e-12;

/// A real symmetric matrix. Construction symmetrises the input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(invalid(format!(
                "symmetric matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(invalid("symmetric matrix must have dim >= 1"));
        }
        let t = m.transpose();
        Ok(Self((m + t) * 0.5))
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = sym_eigendecomposition(self)?;
        Ok(*eig.values.last().expect("dim >= 1"))
    }
}

/// A real orthogonal matrix, checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalMatrix(DMatrix<f64>);

impl OrthogonalMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(invalid("orthogonal matrix must be square with dim >= 1"));
        }
        let err = orthogonality_error(&m);
        if !(err <= ORTHOGONALITY_TOL) {
            return Err(invalid(format!(
                "matrix is not orthogonal: max |UᵀU - I| = {err:.3e}"
            )));
        }
        Ok(Self(m))
    }

    pub fn from_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    /// Permutation matrix with `U[perm[i], i] = 1`.
    pub fn permutation(perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &p) in perm.iter().enumerate() {
            if p >= n {
                return Err(invalid("permutation index out of range"));
            }
            m[(p, i)] = 1.0;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(&self.0 * &other.0)
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.0[(i, j)])
            .collect()
    }
}

/// `max |UᵀU - I|`.
pub fn orthogonality_error(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    let g = m.transpose() * m;
    let mut err: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            err = err.max((g[(i, j)] - target).abs());
        }
    }
    err
}

/// Eigenvalues in descending order with matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigen {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(lam);
        }
        scaled * self.vectors.transpose()
    }
}

pub fn sym_eigendecomposition(m: &SymMatrix) -> Result<Eigen> {
    if m.0.iter().any(|x| !x.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let eig = SymmetricEigen::new(m.0.clone());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    // Stable sort: equal eigenvalues keep their original index order.
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(Eigen { values, vectors })
}

/// Nearest positive semidefinite matrix in the Frobenius norm.
pub fn project_psd(m: &SymMatrix) -> Result<SymMatrix> {
    let eig = sym_eigendecomposition(m)?;
    let clipped = Eigen {
        values: eig.values.iter().map(|&l| l.max(0.0)).collect(),
        vectors: eig.vectors,
    };
    SymMatrix::new(clipped.reconstruct())
}

/// In-place PSD projection of a symmetric matrix, used by the SDP inner loop.
///
/// Reconstructs from whichever side of the spectrum has fewer terms.
pub(crate) fn project_psd_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let n_pos = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    if n_pos == n {
        return;
    }
    if n_pos == 0 {
        m.fill(0.0);
        return;
    }
    let keep_positive = n_pos <= n - n_pos;
    let cols: Vec<usize> = (0..n)
        .filter(|&k| (eig.eigenvalues[k] > 0.0) == keep_positive)
        .collect();
    let mut v = DMatrix::zeros(n, cols.len());
    let mut vs = DMatrix::zeros(n, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        let lam = eig.eigenvalues[k];
        for i in 0..n {
            v[(i, c)] = eig.eigenvectors[(i, k)];
            vs[(i, c)] = eig.eigenvectors[(i, k)] * lam;
        }
    }
    let part = &vs * v.transpose();
    if keep_positive {
        m.copy_from(&part);
    } else {
        // X - V_neg Λ_neg V_negᵀ
        *m -= part;
    }
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// `exp(A)` for antisymmetric `A` by scaling and squaring a truncated Taylor series.
pub fn expm_antisymmetric(a: &DMatrix<f64>) -> Result<OrthogonalMatrix> {
    let n = a.nrows();
    if n != a.ncols() || n == 0 {
        return Err(invalid("generator must be square with dim >= 1"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(invalid("generator has non-finite entries"));
    }
    let asym = (a + a.transpose()).abs().max();
    if asym > ANTISYMMETRY_TOL {
        return Err(invalid(format!(
            "generator is not antisymmetric: max |A + Aᵀ| = {asym:.3e}"
        )));
    }
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm1 * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut u = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=18 {
        term = &term * &x / k as f64;
        u += &term;
    }
    for _ in 0..squarings {
        u = &u * &u;
    }
    OrthogonalMatrix::new(u)
}

/// Name of the generator behind every [`RngStream`].
pub const RNG_ALGORITHM: &str = "chacha20";

/// Seeded random stream. Equal seeds give bit-identical sequences.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream whose seed is a hash of `(seed, salt)`.
    pub fn derived(seed: u64, salt: u64) -> Self {
        Self::new(mix_seed(seed, salt))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        RNG_ALGORITHM
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn normal(&mut self, sigma: f64) -> f64 {
        sigma * self.standard_normal()
    }
}

/// splitmix64 finaliser applied to `seed ^ rotl(salt)`.
pub fn mix_seed(seed: u64, salt: u64) -> u64 {
    let mut z = seed ^ salt.rotate_left(32) ^ 0x9E37_79B9_7F4A_7C15;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// columns of Q rescaled by `sign(R_ii)`.
pub fn sample_haar_orthogonal(dim: usize, rng: &mut RngStream) -> Result<OrthogonalMatrix> {
    if dim == 0 {
        return Err(invalid("Haar sample needs dim >= 1"));
    }
    // Row-major fill keeps the draw order independent of nalgebra's storage.
    let mut g = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = rng.standard_normal();
        }
    }
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    OrthogonalMatrix::new(q)
}

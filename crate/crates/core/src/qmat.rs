//! Dense complex matrices and bipartite entanglement measures.
//!
//! Subsystem 0 is the most significant digit of a basis index, so for qubits
//! `|s₀ s₁ … s_{n−1}⟩` has index `Σ s_k 2^{n−1−k}`.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity accepted by the eigen-solver and by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Off-diagonal Frobenius norm (relative to `max(1, ‖A‖_F)`) at which Jacobi stops.
pub const JACOBI_OFF_TOL: f64 = 1e-13;
/// Eigenvalue resolution of the solver on unit-trace states.
pub const NEGATIVITY_FLOOR: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 64;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a perfect square.
    pub fn from_vec(data: Vec<C64>) -> Result<Self> {
        let dim = (data.len() as f64).sqrt().round() as usize;
        if dim * dim != data.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// `|ψ⟩⟨ψ|`
    pub fn outer(psi: &[C64]) -> Self {
        Self::from_fn(psi.len(), |i, j| psi[i] * psi[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    /// Entry-wise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn kron(&self, other: &Self) -> Self {
        let (n, m) = (self.dim, other.dim);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * other[(i % m, j % m)])
    }

    pub fn scale(&self, f: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * f).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, other: &Self, f: f64) {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * f;
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "compare dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |a_ij − conj(a_ji)|`
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// A density matrix together with the local dimensions of its subsystems.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Wraps `mat`, checking the subsystem shape, Hermiticity and unit trace
    /// to [`HERMITIAN_TOL`]. Positivity is not checked here.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let product: usize = dims.iter().product();
        if dims.is_empty() || product != mat.dim() {
            return Err(Error::DimensionMismatch {
                expected: mat.dim(),
                got: product,
            });
        }
        let herm = mat.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::NotHermitian(herm));
        }
        let tr = mat.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > HERMITIAN_TOL {
            return Err(Error::Domain(format!("trace {tr} is not 1")));
        }
        Ok(Self { mat, dims })
    }

    /// `n` qubits.
    pub fn qubits(mat: CMatrix) -> Result<Self> {
        let n = mat.dim().trailing_zeros() as usize;
        if 1usize << n != mat.dim() {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: mat.dim(),
            });
        }
        Self::new(mat, vec![2; n])
    }

    pub fn from_pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        Self::new(CMatrix::outer(psi), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let d: usize = dims.iter().product();
        Self {
            mat: CMatrix::identity(d).scale(1.0 / d as f64),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn n_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn conj(&self) -> Self {
        Self {
            mat: self.mat.conj(),
            dims: self.dims.clone(),
        }
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigenvalues(&self.mat)?[0])
    }

    /// `U ρ U†`
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        Self::new(u.matmul(&self.mat).matmul(&u.adjoint()), self.dims.clone())
    }
}

impl Index<(usize, usize)> for DensityMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.mat[idx]
    }
}

/// Bipartition of the subsystems into `party_a` and its complement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    party_a: Vec<usize>,
    n_subsystems: usize,
}

impl Cut {
    pub fn new(mut party_a: Vec<usize>, n_subsystems: usize) -> Result<Self> {
        party_a.sort_unstable();
        party_a.dedup();
        if party_a.is_empty() || party_a.len() >= n_subsystems {
            return Err(Error::InvalidCut(format!(
                "party A {party_a:?} must be a non-empty proper subset of {n_subsystems} subsystems"
            )));
        }
        if let Some(&k) = party_a.iter().find(|&&k| k >= n_subsystems) {
            return Err(Error::InvalidCut(format!(
                "subsystem {k} out of range for {n_subsystems} subsystems"
            )));
        }
        Ok(Self {
            party_a,
            n_subsystems,
        })
    }

    /// Subsystem 0 against the rest.
    pub fn first(n_subsystems: usize) -> Result<Self> {
        Self::new(vec![0], n_subsystems)
    }

    pub fn party_a(&self) -> &[usize] {
        &self.party_a
    }

    pub fn party_b(&self) -> Vec<usize> {
        (0..self.n_subsystems)
            .filter(|k| !self.party_a.contains(k))
            .collect()
    }

    pub fn n_subsystems(&self) -> usize {
        self.n_subsystems
    }
}

/// Partial transpose with respect to `cut.party_a()`.
pub fn partial_transpose(rho: &DensityMatrix, cut: &Cut) -> Result<CMatrix> {
    if cut.n_subsystems() != rho.n_subsystems() {
        return Err(Error::InvalidCut(format!(
            "cut over {} subsystems applied to a state with {}",
            cut.n_subsystems(),
            rho.n_subsystems()
        )));
    }
    let dims = rho.dims();
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let d = rho.dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let (mut r2, mut c2) = (r, c);
            for &k in cut.party_a() {
                let dr = (r / strides[k]) % dims[k];
                let dc = (c / strides[k]) % dims[k];
                r2 = r2 - dr * strides[k] + dc * strides[k];
                c2 = c2 - dc * strides[k] + dr * strides[k];
            }
            out[(r2, c2)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V†`
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        CMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    jacobi(m, false).map(|(values, _)| values)
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen> {
    jacobi(m, true).map(|(values, vectors)| HermitianEigen {
        values,
        vectors: vectors.expect("vectors requested"),
    })
}

/// Cyclic complex Jacobi on the Hermitian part of `m`. Each rotation first
/// removes the phase of `a_pq` and then applies the real Jacobi rotation.
fn jacobi(m: &CMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<CMatrix>)> {
    let herm = m.hermiticity_error();
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let n = m.dim();
    let mut a = CMatrix::from_fn(n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let mut v = want_vectors.then(|| CMatrix::identity(n));
    let target = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    let off_norm = |a: &CMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = apq.norm();
                if g < f64::MIN_POSITIVE || g <= 1e-18 * (a[(p, p)].re.abs() + a[(q, q)].re.abs()) {
                    a[(p, q)] = C64::new(0.0, 0.0);
                    a[(q, p)] = C64::new(0.0, 0.0);
                    continue;
                }
                let e = apq / g;
                let ec = e.conj();
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * g);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    let t = 1.0 / (theta.abs() + (theta * theta + 1.0).sqrt());
                    if theta < 0.0 {
                        -t
                    } else {
                        t
                    }
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                // A ← A V on columns p, q.
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c - akq * ec * s;
                    a[(k, q)] = akp * s + akq * ec * c;
                }
                // A ← V† A on rows p, q.
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c - aqk * e * s;
                    a[(q, k)] = apk * s + aqk * e * c;
                }
                a[(p, q)] = C64::new(0.0, 0.0);
                a[(q, p)] = C64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * c - vkq * ec * s;
                        v[(k, q)] = vkp * s + vkq * ec * c;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = v.map(|v| CMatrix::from_fn(n, |i, k| v[(i, order[k])]));
    Ok((values, vectors))
}

/// `Σ|λ_i|` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(m)?.iter().map(|l| l.abs()).sum())
}

/// `log₂ ‖ρ^{T_A}‖₁`, evaluated as `log₂(1 + 2Σ_{λ<0}|λ|)`. Eigenvalues above
/// `−NEGATIVITY_FLOOR` count as zero, so PPT states give exactly zero.
pub fn log_negativity(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let pt = partial_transpose(rho, cut)?;
    let negative: f64 = hermitian_eigenvalues(&pt)?
        .iter()
        .filter(|&&l| l < -NEGATIVITY_FLOOR)
        .map(|l| -l)
        .sum();
    Ok((2.0 * negative).ln_1p() / std::f64::consts::LN_2)
}

pub fn min_pt_eigenvalue(rho: &DensityMatrix, cut: &Cut) -> Result<f64> {
    let pt = partial_transpose(rho, cut)?;
    Ok(hermitian_eigenvalues(&pt)?[0])
}

/// Positive partial transpose up to `tol`. For two qubits this is separability.
pub fn is_ppt(rho: &DensityMatrix, cut: &Cut, tol: f64) -> Result<bool> {
    Ok(min_pt_eigenvalue(rho, cut)? >= -tol)
}

/// `⟨ψ|ρ|ψ⟩` clamped to `[0, 1]`.
pub fn fidelity_pure(rho: &DensityMatrix, psi: &[C64]) -> Result<f64> {
    if psi.len() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            got: psi.len(),
        });
    }
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("state norm² {norm} is not 1")));
    }
    let m = rho.matrix();
    let mut f = C64::new(0.0, 0.0);
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            f += psi[i].conj() * m[(i, j)] * psi[j];
        }
    }
    Ok(f.re.clamp(0.0, 1.0))
}

//! Dense complex linear algebra and distance measures for small quantum states.
//!
//! Qubit 0 is the most significant bit of a basis index, so `kron(a, b)` places
//! `a` on the lower-numbered qubits. All matrices are dense; the intended
//! range is up to 64 x 64 (six qubits).

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Eigenvalues above this (negative) threshold are treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-10;
/// Maximum entrywise deviation from Hermiticity accepted for density matrices.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Maximum deviation of a density matrix trace from one.
pub const TRACE_TOLERANCE: f64 = 1e-9;
/// Maximum deviation of a pure state norm from one.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = re(1.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; fails unless the length is a square.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Shape(format!("{} entries for dimension {}", data.len(), dim)));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numerical("non-finite matrix entry".into()));
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| re(x)).collect())
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = z;
        }
        m
    }

    /// Outer product |a><b|.
    pub fn outer(a: &[C64], b: &[C64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch(a.len(), b.len()));
        }
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                m.data[i * dim + j] = ai * bj.conj();
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.data[row * self.dim + col] = value;
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|&z| z * factor).collect() }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[i * n + j] - self.data[j * n + i].conj()).norm());
            }
        }
        worst
    }

    /// Symmetrizes numerically: (M + M†)/2.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
            }
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Real part of <v|M|v>.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    /// Eigen-decomposition of the Hermitian part; eigenvalues ascending,
    /// eigenvectors stored as the columns of the returned matrix.
    pub fn hermitian_eigen(&self) -> (Vec<f64>, ComplexMatrix) {
        let n = self.dim;
        let h = self.hermitian_part();
        let m = DMatrix::from_fn(n, n, |i, j| h.data[i * n + j]);
        let eig = nalgebra::linalg::SymmetricEigen::new(m);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let mut vectors = Self::zeros(n);
        for (col, &k) in order.iter().enumerate() {
            for row in 0..n {
                vectors.data[row * n + col] = eig.eigenvectors[(row, k)];
            }
        }
        (values, vectors)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let h = self.hermitian_part();
        let m = DMatrix::from_fn(n, n, |i, j| h.data[i * n + j]);
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    /// Column `k` as a vector.
    pub fn column(&self, k: usize) -> Vec<C64> {
        (0..self.dim).map(|r| self.get(r, k)).collect()
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!("dimension {dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Normalized state vector on `n` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
}

impl PureState {
    /// Accepts amplitudes whose 2-norm is one to within `NORM_TOLERANCE`.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        qubits_for_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm));
        }
        Ok(Self { amps: amps.into_iter().map(|z| z / norm).collect() })
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << num_qubits];
        amps[index] = re(1.0);
        Self { amps }
    }

    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    /// Single-qubit state a|0> + b|1> (normalized on construction).
    pub fn qubit(a: C64, b: C64) -> Result<Self> {
        Self::normalized(vec![a, b])
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn num_qubits(&self) -> usize {
        self.amps.len().trailing_zeros() as usize
    }

    /// Tensor product with `self` on the lower-numbered qubits.
    pub fn tensor(&self, other: &PureState) -> PureState {
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        PureState { amps }
    }

    /// `count`-fold tensor power.
    pub fn power(&self, count: usize) -> PureState {
        let mut out = PureState { amps: vec![re(1.0)] };
        for _ in 0..count {
            out = out.tensor(self);
        }
        out
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// Hermitian, positive semi-definite, unit-trace operator on `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    num_qubits: usize,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity; slightly negative
    /// eigenvalues (above `-PSD_TOLERANCE`) are accepted.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let num_qubits = qubits_for_dim(matrix.dim())?;
        let herm = matrix.hermiticity_error();
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian(herm));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOLERANCE || tr.im.abs() > TRACE_TOLERANCE {
            return Err(Error::InvalidTrace(tr.re));
        }
        let min_eig = matrix.hermitian_eigenvalues()[0];
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::NotPsd(min_eig));
        }
        Ok(Self { matrix, num_qubits })
    }

    /// Wraps a matrix produced by a trusted physical operation (unitary
    /// evolution, partial trace); only the shape is checked.
    pub(crate) fn from_trusted(matrix: ComplexMatrix) -> Self {
        let num_qubits = matrix.dim().trailing_zeros() as usize;
        debug_assert!(matrix.dim().is_power_of_two());
        Self { matrix, num_qubits }
    }

    pub fn from_pure(state: &PureState) -> Self {
        let m = ComplexMatrix::outer(state.amplitudes(), state.amplitudes()).expect("same length");
        Self { matrix: m, num_qubits: state.num_qubits() }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        Self { matrix: ComplexMatrix::identity(dim).scale(re(1.0 / dim as f64)), num_qubits }
    }

    /// Single-qubit state from a Bloch vector of length at most one.
    pub fn from_bloch(r: [f64; 3]) -> Result<Self> {
        let len = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
        if len > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!("Bloch vector length {len} exceeds 1")));
        }
        let m = ComplexMatrix::from_vec(
            2,
            vec![re(0.5 * (1.0 + r[2])), c(0.5 * r[0], -0.5 * r[1]), c(0.5 * r[0], 0.5 * r[1]), re(0.5 * (1.0 - r[2]))],
        )?;
        Ok(Self { matrix: m, num_qubits: 1 })
    }

    /// Convex combination `w * self + (1 - w) * other`.
    pub fn mix(&self, other: &DensityMatrix, w: f64) -> Result<DensityMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!("mixing weight {w} outside [0,1]")));
        }
        let m = &self.matrix.scale(re(w)) + &other.matrix.scale(re(1.0 - w));
        Ok(Self::from_trusted(m))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// <psi|rho|psi>.
    pub fn overlap(&self, psi: &PureState) -> f64 {
        self.matrix.expectation(psi.amplitudes())
    }

    /// Bloch vector of a single-qubit state.
    pub fn bloch(&self) -> [f64; 3] {
        assert_eq!(self.num_qubits, 1, "Bloch vector needs a single qubit");
        let r01 = self.matrix.get(0, 1);
        [2.0 * r01.re, -2.0 * r01.im, (self.matrix.get(0, 0) - self.matrix.get(1, 1)).re]
    }

    /// Tensor product with `self` on the most significant qubits.
    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self::from_trusted(kron(&self.matrix, &other.matrix))
    }

    /// Eigenvector of the largest eigenvalue.
    pub fn principal_vector(&self) -> PureState {
        let (_, vecs) = self.matrix.hermitian_eigen();
        PureState::normalized(vecs.column(self.dim() - 1)).expect("eigenvector is non-zero")
    }
}

/// Tensor product with `a` on the most significant indices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim(), b.dim());
    let n = da * db;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..da {
        for j in 0..da {
            let x = a.get(i, j);
            for k in 0..db {
                for l in 0..db {
                    out.set(i * db + k, j * db + l, x * b.get(k, l));
                }
            }
        }
    }
    out
}

/// Reduced state on the qubits in `keep`, in the order given.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let n = rho.num_qubits();
    if keep.is_empty() {
        return Err(Error::InvalidArgument("keep list is empty".into()));
    }
    for (pos, &q) in keep.iter().enumerate() {
        if q >= n {
            return Err(Error::QubitOutOfRange { index: q, num_qubits: n });
        }
        if keep[..pos].contains(&q) {
            return Err(Error::InvalidArgument(format!("qubit {q} listed twice")));
        }
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let k = keep.len();
    let dk = 1usize << k;
    let dt = 1usize << traced.len();
    let bit = |q: usize| 1usize << (n - 1 - q);
    let embed = |kept: usize, rest: usize| -> usize {
        let mut idx = 0;
        for (pos, &q) in keep.iter().enumerate() {
            if kept >> (k - 1 - pos) & 1 == 1 {
                idx |= bit(q);
            }
        }
        for (pos, &q) in traced.iter().enumerate() {
            if rest >> (traced.len() - 1 - pos) & 1 == 1 {
                idx |= bit(q);
            }
        }
        idx
    };
    let mut out = ComplexMatrix::zeros(dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..dt {
                acc += rho.matrix.get(embed(i, t), embed(j, t));
            }
            out.set(i, j, acc);
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Hermitian positive semi-definite square root; eigenvalues in
/// `[-PSD_TOLERANCE, 0)` are clamped to zero.
pub fn matrix_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let scale = m.max_abs().max(1.0);
    let herm = m.hermiticity_error();
    if herm > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian(herm));
    }
    let (values, vecs) = m.hermitian_eigen();
    if values[0] < -PSD_TOLERANCE * scale {
        return Err(Error::NotPsd(values[0]));
    }
    let roots: Vec<C64> = values.iter().map(|&l| re(l.max(0.0).sqrt())).collect();
    let d = ComplexMatrix::diag(&roots);
    Ok(&(&vecs * &d) * &vecs.adjoint())
}

fn check_same_dim(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<()> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    Ok(())
}

fn is_pure(rho: &DensityMatrix) -> bool {
    (rho.purity() - 1.0).abs() < 1e-12
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 evaluated through
/// matrix square roots, without the pure-state shortcut.
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let sr = matrix_sqrt_psd(rho.matrix())?;
    let inner = &(&sr * sigma.matrix()) * &sr;
    let root_sum: f64 = inner.hermitian_eigenvalues().iter().map(|&l| l.max(0.0).sqrt()).sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Fidelity F(rho, sigma) = (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. When either
/// argument is pure this reduces to Tr(rho sigma), which is used directly.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    if is_pure(rho) || is_pure(sigma) {
        let overlap = (rho.matrix() * sigma.matrix()).trace().re;
        return Ok(overlap.clamp(0.0, 1.0));
    }
    uhlmann_fidelity(rho, sigma)
}

/// Trace distance ½‖rho − sigma‖₁.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, sigma)?;
    let diff = rho.matrix() - sigma.matrix();
    let norm: f64 = diff.hermitian_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok((0.5 * norm).clamp(0.0, 1.0))
}

/// Fubini–Study distance arccos sqrt(F).
pub fn fubini_study(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    let f = fidelity(rho, sigma)?;
    Ok(f.sqrt().clamp(0.0, 1.0).acos())
}

/// Single-qubit Pauli matrices.
pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("2x2")
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, vec![re(0.0), c(0.0, -1.0), c(0.0, 1.0), re(0.0)]).expect("2x2")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("2x2")
}

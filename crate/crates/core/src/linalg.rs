//! Dense complex kernel for states of up to four qubits.
//!
//! Storage is row-major. Qubit 0 is the leftmost tensor factor, i.e. the most
//! significant bit of a basis-state index.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Entrywise absolute tolerance used for structural checks.
pub const TOL: f64 = 1e-12;
/// Smallest eigenvalue a density matrix may have before it counts as non-PSD.
pub const PSD_TOL: f64 = 1e-10;
pub const MAX_QUBITS: usize = 4;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                actual: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from real row slices. Panics on ragged input.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&x| Complex64::new(x, 0.0)));
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Column vector with the given entries.
    pub fn column(entries: &[Complex64]) -> Self {
        Self {
            rows: entries.len(),
            cols: 1,
            data: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Matrix product. Zero entries of `self` are skipped, which matters for
    /// the sparse Kronecker products of Kraus operators.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                actual: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest entrywise absolute difference; `f64::INFINITY` on shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) < tol
    }

    /// Max-abs deviation of `U†U` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self
            .dagger()
            .matmul(self)
            .expect("square matrix is conformable with its adjoint");
        prod.max_abs_diff(&Self::identity(self.rows))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() < TOL
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.max_abs_diff(&self.dagger()) < tol
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                actual: other.rows * other.cols,
            });
        }
        Ok(())
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let eig = nalgebra::SymmetricEigen::new(self.to_nalgebra());
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; `a`'s indices are the major ones.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut out = ComplexMatrix::zeros(rows, cols);
    for ai in 0..a.rows {
        for aj in 0..a.cols {
            let x = a[(ai, aj)];
            if x == ZERO {
                continue;
            }
            for bi in 0..b.rows {
                for bj in 0..b.cols {
                    out[(ai * b.rows + bi, aj * b.cols + bj)] = x * b[(bi, bj)];
                }
            }
        }
    }
    out
}

/// Kronecker product of every factor in order. Empty input gives the 1×1 identity.
pub fn tensor_all<'a, I>(factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1), |acc, f| tensor_product(&acc, f))
}

/// `u · rho · u†`.
pub fn conjugate_apply(u: &ComplexMatrix, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let sandwiched = conjugate_matrix(u, rho.matrix())?;
    Ok(DensityMatrix::from_matrix_unchecked(rho.n_qubits(), sandwiched))
}

pub(crate) fn conjugate_matrix(u: &ComplexMatrix, m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !u.is_square() {
        return Err(Error::NotSquare {
            rows: u.rows,
            cols: u.cols,
        });
    }
    if u.rows != m.rows {
        return Err(Error::DimensionMismatch {
            expected: m.rows,
            actual: u.rows,
        });
    }
    // (u m) u† computed as u (u m†)† keeps the sparse operand on the left both times.
    let um = u.matmul(m)?;
    let u_umd = u.matmul(&um.dagger())?;
    Ok(u_umd.dagger())
}

fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {dim} is not a power of two ≥ 2"
        )));
    }
    let n = dim.trailing_zeros() as usize;
    if n > MAX_QUBITS {
        return Err(Error::UnsupportedQubits(n));
    }
    Ok(n)
}

/// Normalized amplitude vector of 1 to 4 qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Fails unless the amplitudes have power-of-two length ≤ 16 and unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_dim(amplitudes.len())?;
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > TOL {
            return Err(Error::InvalidState(format!("norm² = {norm_sq}, expected 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Rescales to unit norm first.
    pub fn normalized(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite norm".into()));
        }
        Self::new(amplitudes.into_iter().map(|a| a / norm).collect())
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis state `|index⟩` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let dim = 1 << n_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(Error::UnsupportedQubits(n));
        }
        let out = tensor_product(&self.as_column(), &other.as_column());
        Ok(Self {
            n_qubits: n,
            amplitudes: out.data,
        })
    }

    pub fn as_column(&self) -> ComplexMatrix {
        ComplexMatrix::column(&self.amplitudes)
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density(&self) -> DensityMatrix {
        let dim = self.dim();
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = self.amplitudes[i] * self.amplitudes[j].conj();
            }
        }
        DensityMatrix::from_matrix_unchecked(self.n_qubits, m)
    }

    /// Applies a square operator to the amplitudes without renormalizing.
    pub(crate) fn apply_unnormalized(&self, op: &ComplexMatrix) -> Result<Vec<Complex64>> {
        Ok(op.matmul(&self.as_column())?.data)
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on 1 to 4 qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace (to 1e-12) and positivity (to −1e-10).
    pub fn from_matrix(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows,
                cols: matrix.cols,
            });
        }
        let n_qubits = qubits_for_dim(matrix.rows)?;
        let rho = Self { n_qubits, matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(n_qubits: usize, matrix: ComplexMatrix) -> Self {
        debug_assert_eq!(matrix.rows, 1 << n_qubits);
        Self { n_qubits, matrix }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::UnsupportedQubits(n_qubits));
        }
        let dim = 1 << n_qubits;
        let m = ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0));
        Ok(Self::from_matrix_unchecked(n_qubits, m))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn is_hermitian(&self) -> bool {
        self.matrix.is_hermitian(TOL)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix
            .hermitian_eigenvalues()
            .expect("density matrices are square")[0]
    }

    /// Checks every density-matrix invariant, reporting the first violated one.
    pub fn validate(&self) -> Result<()> {
        if !self.is_hermitian() {
            return Err(Error::InvalidState("not Hermitian".into()));
        }
        let tr = self.trace();
        if (tr - ONE).norm() > TOL {
            return Err(Error::InvalidState(format!("trace {tr} ≠ 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(())
    }

    /// `⟨ψ|ρ|ψ⟩` as a complex number; the imaginary part is numerical drift.
    pub fn expectation(&self, psi: &PureState) -> Result<Complex64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: psi.dim(),
            });
        }
        let amps = psi.amplitudes();
        let mut acc = ZERO;
        for i in 0..self.dim() {
            if amps[i] == ZERO {
                continue;
            }
            let mut row = ZERO;
            for j in 0..self.dim() {
                row += self.matrix[(i, j)] * amps[j];
            }
            acc += amps[i].conj() * row;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_column_vectors() {
        let zero = ComplexMatrix::column(&[ONE, ZERO]);
        let plus = ComplexMatrix::column(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]);
        let v = tensor_product(&zero, &plus);
        let expected = ComplexMatrix::column(&[c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2), ZERO, ZERO]);
        assert!(v.approx_eq(&expected, TOL));
    }

    #[test]
    fn kron_of_bell_pairs() {
        let bell = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap();
        let both = bell.tensor(&bell).unwrap();
        for (i, a) in both.amplitudes().iter().enumerate() {
            let expected = if [0, 3, 12, 15].contains(&i) { 0.5 } else { 0.0 };
            assert!((a - c(expected)).norm() < TOL, "index {i}");
        }
    }

    #[test]
    fn kron_is_associative_on_integer_matrices() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = ComplexMatrix::from_real_rows(&[&[0.0, 5.0], &[6.0, 7.0]]);
        let d = ComplexMatrix::from_real_rows(&[&[-1.0, 8.0], &[2.0, 0.0]]);
        let left = tensor_product(&tensor_product(&a, &b), &d);
        let right = tensor_product(&a, &tensor_product(&b, &d));
        assert_eq!(left, right);
    }

    #[test]
    fn conjugate_by_identity_is_noop() {
        let rho = PureState::from_real(&[0.6, 0.8]).unwrap().density();
        let out = conjugate_apply(&ComplexMatrix::identity(2), &rho).unwrap();
        assert!(out.matrix().approx_eq(rho.matrix(), TOL));
    }

    #[test]
    fn conjugate_by_double_bit_flip() {
        let xx = tensor_product(&pauli_x(), &pauli_x());
        let rho = PureState::basis(2, 0).unwrap().density();
        let out = conjugate_apply(&xx, &rho).unwrap();
        let expected = PureState::basis(2, 3).unwrap().density();
        assert!(out.matrix().approx_eq(expected.matrix(), TOL));
    }

    #[test]
    fn conjugate_by_pi_phase_on_both_qubits_keeps_bell_state() {
        let up = ComplexMatrix::diagonal(&[ONE, Complex64::from_polar(1.0, PI)]);
        let rho = PureState::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
            .unwrap()
            .density();
        let out = conjugate_apply(&tensor_product(&up, &up), &rho).unwrap();
        assert!(out.matrix().approx_eq(rho.matrix(), TOL));
    }

    #[test]
    fn conjugate_rejects_dimension_mismatch() {
        let rho = PureState::basis(2, 0).unwrap().density();
        let err = conjugate_apply(&ComplexMatrix::identity(2), &rho).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = conjugate_apply(&ComplexMatrix::zeros(4, 2), &rho).unwrap_err();
        assert!(matches!(err, Error::NotSquare { .. }));
    }

    #[test]
    fn pure_state_rejects_bad_input() {
        assert!(PureState::from_real(&[1.0, 1.0]).is_err());
        assert!(PureState::from_real(&[1.0, 0.0, 0.0]).is_err());
        assert!(PureState::new(vec![ONE]).is_err());
        let mut big = vec![ZERO; 32];
        big[0] = ONE;
        assert!(matches!(
            PureState::new(big),
            Err(Error::UnsupportedQubits(5))
        ));
    }

    #[test]
    fn density_validation_catches_each_invariant() {
        let not_herm = ComplexMatrix::from_vec(2, 2, vec![c(0.5), c(0.1), c(0.0), c(0.5)]).unwrap();
        assert!(DensityMatrix::from_matrix(not_herm).is_err());
        let bad_trace = ComplexMatrix::identity(2);
        assert!(DensityMatrix::from_matrix(bad_trace).is_err());
        let negative = ComplexMatrix::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]);
        assert!(DensityMatrix::from_matrix(negative).is_err());
        let ok = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let rho = DensityMatrix::from_matrix(ok).unwrap();
        assert!(rho.min_eigenvalue().abs() < TOL);
    }

    #[test]
    fn expectation_of_own_projector_is_one() {
        let psi = PureState::normalized(vec![c(1.0), Complex64::new(0.0, 2.0), c(-1.0), c(0.5)])
            .unwrap();
        let e = psi.density().expectation(&psi).unwrap();
        assert!((e - ONE).norm() < TOL);
    }
}

//! Dense complex linear algebra on small matrices.
//!
//! Matrices are stored row-major. Bipartite operators on `H_A ⊗ H_B` use the
//! index convention `(i, k) ↦ i·dB + k` everywhere in the crate, so partial
//! traces, partial transposes and the covariance-matrix flattening all agree.
//!
//! Spectral routines (Hermitian eigendecomposition, SVD, linear solves) are
//! delegated to `nalgebra`; everything else is written out directly.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::tol;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Local dimensions of a bipartite system `H_A ⊗ H_B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DimPair {
    pub a: usize,
    pub b: usize,
}

impl DimPair {
    pub fn new(a: usize, b: usize) -> Result<Self> {
        if a == 0 || b == 0 {
            return Err(Error::InvalidParameter(format!(
                "local dimensions must be positive, got {a}x{b}"
            )));
        }
        Ok(Self { a, b })
    }

    pub const fn qubits() -> Self {
        Self { a: 2, b: 2 }
    }

    pub fn total(&self) -> usize {
        self.a * self.b
    }

    pub fn swapped(&self) -> Self {
        Self { a: self.b, b: self.a }
    }
}

impl fmt::Display for DimPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.a, self.b)
    }
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter("matrix shape must be positive".into()));
        }
        if data.len() != rows * cols {
            return Err(dim_err(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self> {
        Self::new(rows, cols, values.iter().map(|&x| r(x)).collect())
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { values[i] } else { ZERO })
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { r(values[i]) } else { ZERO })
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// `|u⟩⟨u|`.
    pub fn projector(u: &[C64]) -> Self {
        Self::outer(u, u)
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

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn from_columns(cols: &[Vec<C64>]) -> Self {
        let n = cols[0].len();
        Self::from_fn(n, cols.len(), |i, j| cols[j][i])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨u|M|v⟩`.
    pub fn sandwich(&self, u: &[C64], v: &[C64]) -> C64 {
        inner(u, &self.matvec(v))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance; shapes must agree.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.max_abs_diff(other) <= tol
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// `(M − M†)/(2i)`, so that `M = H + i·A`.
    pub fn antihermitian_part(&self) -> Self {
        (self - &self.adjoint()).scale(c(0.0, -0.5))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub(crate) fn to_na(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    /// Real and imaginary parts as nested row vectors (JSON layout).
    pub fn to_parts(&self) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let re = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].re).collect())
            .collect();
        let im = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].im).collect())
            .collect();
        (re, im)
    }

    pub fn from_parts(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<Self> {
        let rows = re.len();
        if rows == 0 {
            return Err(Error::InvalidParameter("empty matrix".into()));
        }
        if im.len() != rows {
            return Err(dim_err(format!("{rows} imaginary rows"), im.len()));
        }
        let cols = re[0].len();
        let mut data = Vec::with_capacity(rows * cols);
        for (i, (rr, ii)) in re.iter().zip(im).enumerate() {
            if rr.len() != cols || ii.len() != cols {
                return Err(dim_err(
                    format!("{cols} columns in row {i}"),
                    format!("{} real / {} imaginary", rr.len(), ii.len()),
                ));
            }
            data.extend(rr.iter().zip(ii).map(|(&a, &b)| c(a, b)));
        }
        Self::new(rows, cols, data)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.map(|z| -z)
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }
}

/// `⟨u|v⟩`.
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    assert_eq!(u.len(), v.len(), "inner product length mismatch");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &[C64]) -> Vec<C64> {
    let n = norm(v);
    v.iter().map(|z| z / n).collect()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect()
}

/// Kronecker product: `out[(i·rB+k),(j·cB+l)] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.rows, b.cols);
    CMatrix::from_fn(a.rows * rb, a.cols * cb, |p, q| {
        a[(p / rb, q / cb)] * b[(p % rb, q % cb)]
    })
}

fn check_bipartite(m: &CMatrix, dims: DimPair) -> Result<()> {
    let n = dims.total();
    if m.rows != n || m.cols != n {
        return Err(dim_err(
            format!("{n}x{n} operator on {dims}"),
            format!("{}x{}", m.rows, m.cols),
        ));
    }
    Ok(())
}

/// Transpose on the second tensor factor: `out(i,k; j,l) = M(i,l; j,k)`.
pub fn partial_transpose(m: &CMatrix, dims: DimPair) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let db = dims.b;
    Ok(CMatrix::from_fn(m.rows, m.cols, |p, q| {
        let (i, k) = (p / db, p % db);
        let (j, l) = (q / db, q % db);
        m[(i * db + l, j * db + k)]
    }))
}

/// Transpose on the first tensor factor.
pub fn partial_transpose_a(m: &CMatrix, dims: DimPair) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let db = dims.b;
    Ok(CMatrix::from_fn(m.rows, m.cols, |p, q| {
        let (i, k) = (p / db, p % db);
        let (j, l) = (q / db, q % db);
        m[(j * db + k, i * db + l)]
    }))
}

/// Partial trace keeping the given subsystem.
pub fn partial_trace(m: &CMatrix, dims: DimPair, keep: Subsystem) -> Result<CMatrix> {
    check_bipartite(m, dims)?;
    let (da, db) = (dims.a, dims.b);
    Ok(match keep {
        Subsystem::B => CMatrix::from_fn(db, db, |k, l| {
            (0..da).map(|i| m[(i * db + k, i * db + l)]).sum()
        }),
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m[(i * db + k, j * db + k)]).sum()
        }),
    })
}

/// Hermitian eigendecomposition with eigenvalues sorted descending and
/// eigenvectors as orthonormal columns in the same order.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    pub fn vector(&self, idx: usize) -> Vec<C64> {
        self.vectors.column(idx)
    }

    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    /// Reassemble `Σ f(λᵢ)|vᵢ⟩⟨vᵢ|`.
    pub fn rebuild(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (idx, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == ZERO {
                continue;
            }
            let v = self.vectors.column(idx);
            for i in 0..n {
                let vi = v[i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * v[j].conj();
                }
            }
        }
        out
    }
}

fn eig_unchecked(m: &CMatrix) -> HermEig {
    let sym = m.hermitian_part();
    let eig = nalgebra::SymmetricEigen::new(sym.to_na());
    let n = m.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermEig { values, vectors }
}

/// Eigendecomposition of a Hermitian matrix. The input is symmetrized as
/// `(M + M†)/2` before factorizing.
pub fn herm_eig(m: &CMatrix) -> Result<HermEig> {
    if !m.is_square() {
        return Err(dim_err("square matrix", format!("{}x{}", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    if deviation > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(eig_unchecked(m))
}

/// Like [`herm_eig`] but with a caller-chosen Hermiticity tolerance, for
/// matrices assembled from many products (e.g. covariance matrices).
pub fn herm_eig_tol(m: &CMatrix, hermitian_tol: f64) -> Result<HermEig> {
    if !m.is_square() {
        return Err(dim_err("square matrix", format!("{}x{}", m.rows, m.cols)));
    }
    let deviation = m.hermitian_deviation();
    if deviation > hermitian_tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(eig_unchecked(m))
}

pub fn min_eigenvalue(m: &CMatrix) -> Result<f64> {
    Ok(herm_eig(m)?.min_value())
}

/// Square root of a positive semidefinite matrix. Eigenvalues in
/// `[−1e−9, 0)` are clamped to zero; anything below is rejected.
pub fn psd_sqrt(m: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(m)?;
    let min = eig.min_value();
    if min < -tol::PSD {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(eig.rebuild(|lam| r(lam.max(0.0).sqrt())))
}

/// Square root that clamps every negative eigenvalue; only for matrices
/// that are PSD analytically.
pub(crate) fn psd_sqrt_clamped(m: &CMatrix) -> CMatrix {
    eig_unchecked(m).rebuild(|lam| r(lam.max(0.0).sqrt()))
}

pub fn is_psd(m: &CMatrix, tol: f64) -> bool {
    match herm_eig(m) {
        Ok(e) => e.min_value() >= -tol,
        Err(_) => false,
    }
}

/// Singular value decomposition `M = U·diag(s)·V†` with `s` descending.
/// For rectangular inputs the thin factors are returned.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub singular_values: Vec<f64>,
    pub v_adjoint: CMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> CMatrix {
        let d: Vec<C64> = self.singular_values.iter().map(|&s| r(s)).collect();
        &(&self.u * &CMatrix::diag(&d)) * &self.v_adjoint
    }
}

pub fn svd(m: &CMatrix) -> Svd {
    let res = nalgebra::SVD::new(m.to_na(), true, true);
    let u = res.u.expect("requested U");
    let vt = res.v_t.expect("requested V†");
    let k = res.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| res.singular_values[y].total_cmp(&res.singular_values[x]));
    Svd {
        u: CMatrix::from_fn(m.rows, k, |i, j| u[(i, order[j])]),
        singular_values: order.iter().map(|&j| res.singular_values[j]).collect(),
        v_adjoint: CMatrix::from_fn(k, m.cols, |i, j| vt[(order[i], j)]),
    }
}

/// Hilbert-Schmidt inner product `Tr(X†Y)`.
pub fn trace_inner(x: &CMatrix, y: &CMatrix) -> Result<C64> {
    if x.rows != y.rows || x.cols != y.cols {
        return Err(dim_err(
            format!("{}x{}", x.rows, x.cols),
            format!("{}x{}", y.rows, y.cols),
        ));
    }
    Ok(x.data.iter().zip(&y.data).map(|(a, b)| a.conj() * b).sum())
}

/// `Tr(X·Y)` without forming the product.
pub fn trace_product(x: &CMatrix, y: &CMatrix) -> C64 {
    assert_eq!((x.rows, x.cols), (y.cols, y.rows), "trace_product shape mismatch");
    let mut acc = ZERO;
    for i in 0..x.rows {
        for k in 0..x.cols {
            acc += x[(i, k)] * y[(k, i)];
        }
    }
    acc
}

/// `exp(i·t·G)` for Hermitian `G`.
pub fn unitary_exp(g: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = herm_eig(g)?;
    Ok(eig.rebuild(|lam| C64::from_polar(1.0, t * lam)))
}

pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    (&(u * &u.adjoint())).max_abs_diff(&CMatrix::identity(u.rows))
}

/// Solve `A x = b` for square `A`; `None` when `A` is numerically singular.
pub fn solve(a: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    let lu = a.to_na().lu();
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = lu.solve(&rhs)?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    Some(x.iter().copied().collect())
}

/// Smallest singular value, used as a conditioning check.
pub fn min_singular_value(a: &CMatrix) -> f64 {
    *svd(a).singular_values.last().unwrap_or(&0.0)
}

/// Single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let m = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -I, I, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::new(2, 2, m.to_vec()).expect("2x2")
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Pauli::I => "1",
            Pauli::X => "σx",
            Pauli::Y => "σy",
            Pauli::Z => "σz",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Kronecker product of a Pauli word.
pub fn pauli_word(word: &[Pauli]) -> CMatrix {
    word.iter()
        .fold(CMatrix::identity(1), |acc, p| kron(&acc, &p.matrix()))
}

/// SWAP on `C^d ⊗ C^d`.
pub fn swap(d: usize) -> CMatrix {
    CMatrix::from_fn(d * d, d * d, |p, q| {
        let (i, k) = (p / d, p % d);
        let (j, l) = (q / d, q % d);
        if i == l && k == j {
            ONE
        } else {
            ZERO
        }
    })
}

/// Orthonormal Hermitian basis of `d × d` operators under `Tr(X†Y)`:
/// `𝟙/√d` first, then for each pair `j < k` the symmetric and
/// antisymmetric generators, then the diagonal generators. For `d = 2`
/// this is `{𝟙, σx, σy, σz}/√2` in that order.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    out.push(CMatrix::identity(d).scale_real(1.0 / (d as f64).sqrt()));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(j, k)] = r(h);
            sym[(k, j)] = r(h);
            out.push(sym);
            let mut anti = CMatrix::zeros(d, d);
            anti[(j, k)] = c(0.0, -h);
            anti[(k, j)] = c(0.0, h);
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for m in 0..l {
            diag[(m, m)] = r(norm);
        }
        diag[(l, l)] = r(-(l as f64) * norm);
        out.push(diag);
    }
    out
}

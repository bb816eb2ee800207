//! Quantum states, named families, Schmidt decomposition and the random
//! samplers that serve as separability oracles.
//!
//! Every sampler is a deterministic function of its parameters and a 64-bit
//! seed. Batched sampling derives one sub-seed per index with
//! [`derive_seed`], so parallel and sequential runs produce identical data.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    self, c, inner, kron, kron_vec, norm, partial_transpose, r, CMatrix, DimPair, C64, ONE, ZERO,
};
use crate::tol;

/// Hermitian, unit-trace, positive semidefinite matrix together with its
/// local dimensions (two entries for bipartite, more for multipartite).
#[derive(Debug, Clone)]
pub struct DensityOperator {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityOperator {
    /// Validates all invariants; the error names the first one that fails.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::InvalidState(format!("invalid dims {dims:?}")));
        }
        let n: usize = dims.iter().product();
        if mat.rows() != n || mat.cols() != n {
            return Err(Error::InvalidState(format!(
                "dims {dims:?} require a {n}x{n} matrix, found {}x{}",
                mat.rows(),
                mat.cols()
            )));
        }
        let dev = mat.hermitian_deviation();
        if dev > tol::HERMITIAN {
            return Err(Error::InvalidState(format!(
                "not Hermitian: max |ρ − ρ†| = {dev:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr - ONE).norm() > tol::TRACE {
            return Err(Error::InvalidState(format!(
                "trace is {:.12} + {:.3e}i, expected 1",
                tr.re, tr.im
            )));
        }
        let min = matcore::herm_eig(&mat)?.min_value();
        if min < -tol::PSD {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite: min eigenvalue {min:.3e}"
            )));
        }
        Ok(Self { mat, dims })
    }

    pub fn bipartite(mat: CMatrix, dims: DimPair) -> Result<Self> {
        Self::new(mat, vec![dims.a, dims.b])
    }

    pub fn from_pure(psi: &PureState) -> Self {
        Self {
            mat: CMatrix::projector(&psi.vec),
            dims: vec![psi.dims.a, psi.dims.b],
        }
    }

    /// Maximally mixed state on the given local dimensions.
    pub fn maximally_mixed(dims: &[usize]) -> Self {
        let n: usize = dims.iter().product();
        Self {
            mat: CMatrix::identity(n).scale_real(1.0 / n as f64),
            dims: dims.to_vec(),
        }
    }

    /// Convex combination `Σ pₖ ρₖ`; weights are renormalized.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let total: f64 = parts.iter().map(|(p, _)| p).sum();
        if parts.iter().any(|(p, _)| *p < 0.0) || total <= 0.0 {
            return Err(Error::InvalidParameter("mixture weights must be nonnegative".into()));
        }
        let n = first.1.dim();
        let mut acc = CMatrix::zeros(n, n);
        for (p, rho) in parts {
            if rho.dims != first.1.dims {
                return Err(dim_err(format!("{:?}", first.1.dims), format!("{:?}", rho.dims)));
            }
            acc = &acc + &rho.mat.scale_real(p / total);
        }
        Ok(Self {
            mat: acc,
            dims: first.1.dims.clone(),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn dim_pair(&self) -> Result<DimPair> {
        match self.dims.as_slice() {
            [a, b] => DimPair::new(*a, *b),
            other => Err(dim_err("bipartite dims [dA, dB]", format!("{other:?}"))),
        }
    }

    /// `ρ^{T_B}` as a raw matrix.
    pub fn partial_transpose(&self) -> Result<CMatrix> {
        partial_transpose(&self.mat, self.dim_pair()?)
    }

    /// `Tr(Oρ)`.
    pub fn expect(&self, op: &CMatrix) -> Result<C64> {
        if op.rows() != self.dim() || op.cols() != self.dim() {
            return Err(dim_err(
                format!("{0}x{0} operator", self.dim()),
                format!("{}x{}", op.rows(), op.cols()),
            ));
        }
        Ok(matcore::trace_product(op, &self.mat))
    }

    pub fn to_file_format(&self) -> StateFile {
        let (re, im) = self.mat.to_parts();
        StateFile {
            dims: self.dims.clone(),
            re,
            im,
        }
    }

    pub fn from_file_format(file: &StateFile) -> Result<Self> {
        let mat = CMatrix::from_parts(&file.re, &file.im)
            .map_err(|e| Error::InvalidState(format!("malformed matrix: {e}")))?;
        Self::new(mat, file.dims.clone())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file_format())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(s)?;
        Self::from_file_format(&file)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    /// Unchecked construction for matrices that are states by construction.
    pub(crate) fn from_raw(mat: CMatrix, dims: Vec<usize>) -> Self {
        Self { mat, dims }
    }
}

/// On-disk state layout: `{"dims": [..], "re": [[..]], "im": [[..]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

/// Normalized bipartite state vector.
#[derive(Debug, Clone)]
pub struct PureState {
    vec: Vec<C64>,
    dims: DimPair,
}

impl PureState {
    pub fn new(vec: Vec<C64>, dims: DimPair) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(dim_err(dims.total(), vec.len()));
        }
        let n = norm(&vec);
        if (n - 1.0).abs() > tol::NORM {
            return Err(Error::InvalidState(format!("state vector has norm {n}")));
        }
        Ok(Self { vec, dims })
    }

    /// Normalizes the input; rejects the zero vector.
    pub fn normalized(vec: Vec<C64>, dims: DimPair) -> Result<Self> {
        if vec.len() != dims.total() {
            return Err(dim_err(dims.total(), vec.len()));
        }
        let n = norm(&vec);
        if n < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self {
            vec: vec.iter().map(|z| z / n).collect(),
            dims,
        })
    }

    pub fn from_real(values: &[f64], dims: DimPair) -> Result<Self> {
        Self::normalized(values.iter().map(|&x| r(x)).collect(), dims)
    }

    /// `|a⟩ ⊗ |b⟩`.
    pub fn product(a: &[C64], b: &[C64]) -> Result<Self> {
        let dims = DimPair::new(a.len(), b.len())?;
        Self::normalized(kron_vec(a, b), dims)
    }

    /// `Σᵢ |i⟩|i⟩ / √min(dA,dB)`.
    pub fn maximally_entangled(dims: DimPair) -> Self {
        let m = dims.a.min(dims.b);
        let mut v = vec![ZERO; dims.total()];
        for i in 0..m {
            v[i * dims.b + i] = r(1.0 / (m as f64).sqrt());
        }
        Self { vec: v, dims }
    }

    pub fn vec(&self) -> &[C64] {
        &self.vec
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn projector(&self) -> CMatrix {
        CMatrix::projector(&self.vec)
    }

    pub fn overlap(&self, other: &PureState) -> C64 {
        inner(&self.vec, &other.vec)
    }

    /// `dA × dB` coefficient matrix under the global index convention.
    pub fn coefficient_matrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dims.a, self.dims.b, |i, k| self.vec[i * self.dims.b + k])
    }
}

/// Schmidt decomposition `|ψ⟩ = Σᵢ sᵢ |aᵢ⟩|bᵢ⟩`.
#[derive(Debug, Clone)]
pub struct SchmidtForm {
    pub coefficients: Vec<f64>,
    pub left: Vec<Vec<C64>>,
    pub right: Vec<Vec<C64>>,
}

impl SchmidtForm {
    pub fn reconstruct(&self) -> Vec<C64> {
        let n = self.left[0].len() * self.right[0].len();
        let mut out = vec![ZERO; n];
        for ((s, a), b) in self.coefficients.iter().zip(&self.left).zip(&self.right) {
            for (o, v) in out.iter_mut().zip(kron_vec(a, b)) {
                *o += v * s;
            }
        }
        out
    }
}

/// Reshape to a `dA × dB` matrix and take its SVD.
pub fn schmidt_decompose(psi: &PureState) -> SchmidtForm {
    schmidt_of_vector(psi.vec(), psi.dims())
}

/// Schmidt form of an unnormalized vector; coefficients are then the
/// singular values of the reshaped vector.
pub(crate) fn schmidt_of_vector(v: &[C64], dims: DimPair) -> SchmidtForm {
    let m = CMatrix::from_fn(dims.a, dims.b, |i, k| v[i * dims.b + k]);
    let s = matcore::svd(&m);
    let k = s.singular_values.len();
    SchmidtForm {
        coefficients: s.singular_values.clone(),
        left: (0..k).map(|j| s.u.column(j)).collect(),
        right: (0..k).map(|j| s.v_adjoint.row(j)).collect(),
    }
}

/// Square of the largest Schmidt coefficient, `s(ψ)`.
pub fn max_schmidt_sq(psi: &PureState) -> f64 {
    let s = schmidt_decompose(psi).coefficients[0];
    (s * s).min(1.0)
}

/// PPT test with the global positivity window.
pub fn is_ppt(rho: &DensityOperator) -> Result<bool> {
    Ok(min_pt_eigenvalue(rho)? >= -tol::PSD)
}

/// Smallest eigenvalue of `ρ^{T_B}`.
pub fn min_pt_eigenvalue(rho: &DensityOperator) -> Result<f64> {
    matcore::min_eigenvalue(&rho.partial_transpose()?)
}

/// `p·|ψ⁻⟩⟨ψ⁻| + (1−p)·I/4`.
pub fn werner(p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("Werner parameter {p} outside [0,1]")));
    }
    let singlet = bell_states()[3].projector();
    let mixed = CMatrix::identity(4).scale_real(0.25);
    Ok(DensityOperator::from_raw(
        &singlet.scale_real(p) + &mixed.scale_real(1.0 - p),
        vec![2, 2],
    ))
}

/// `(|φ⁺⟩, |φ⁻⟩, |ψ⁺⟩, |ψ⁻⟩)`.
pub fn bell_states() -> [PureState; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let d = DimPair::qubits();
    let mk = |v: [f64; 4]| PureState {
        vec: v.iter().map(|&x| r(x * h)).collect(),
        dims: d,
    };
    [
        mk([1.0, 0.0, 0.0, 1.0]),
        mk([1.0, 0.0, 0.0, -1.0]),
        mk([0.0, 1.0, 1.0, 0.0]),
        mk([0.0, 1.0, -1.0, 0.0]),
    ]
}

pub fn singlet() -> DensityOperator {
    DensityOperator::from_pure(&bell_states()[3])
}

/// Mix a base seed with a sample index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

/// Normalized complex-Gaussian vector (uniform on the unit sphere).
pub fn random_ket<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        let nv = norm(&v);
        if nv > 1e-12 {
            return v.iter().map(|z| z / nv).collect();
        }
    }
}

/// Haar-random unitary from Gram-Schmidt on complex-Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian_c64(rng)).collect();
        for _ in 0..2 {
            for q in &cols {
                let proj = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-10 {
            cols.push(v.iter().map(|z| z / nv).collect());
        }
    }
    CMatrix::from_columns(&cols)
}

/// Random Hermitian matrix with Gaussian entries (GUE-like, unnormalized).
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_c64(rng));
    g.hermitian_part()
}

fn ginibre_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_c64(rng));
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    w.scale_real(1.0 / tr).hermitian_part()
}

fn simplex_weights<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

pub fn random_pure(dims: DimPair, seed: u64) -> PureState {
    let mut rng = rng_from_seed(seed);
    PureState {
        vec: random_ket(dims.total(), &mut rng),
        dims,
    }
}

/// Hilbert-Schmidt random mixed state `G·G†/Tr(G·G†)`.
pub fn random_density(dims: DimPair, seed: u64) -> DensityOperator {
    random_density_multi(&[dims.a, dims.b], seed)
}

pub fn random_density_multi(dims: &[usize], seed: u64) -> DensityOperator {
    let n: usize = dims.iter().product();
    let mut rng = rng_from_seed(seed);
    DensityOperator::from_raw(ginibre_state(n, &mut rng), dims.to_vec())
}

pub fn random_product_pure(dims: DimPair, seed: u64) -> PureState {
    let mut rng = rng_from_seed(seed);
    let a = random_ket(dims.a, &mut rng);
    let b = random_ket(dims.b, &mut rng);
    PureState {
        vec: kron_vec(&a, &b),
        dims,
    }
}

/// Default number of product terms for the separable oracle.
pub fn default_separable_terms(dims: DimPair) -> usize {
    if dims == DimPair::qubits() {
        8
    } else {
        2 * dims.total()
    }
}

/// `Σₖ pₖ |aₖ⟩⟨aₖ| ⊗ |bₖ⟩⟨bₖ|` with `p` uniform on the simplex.
/// Separable by construction.
pub fn random_separable(dims: DimPair, terms: usize, seed: u64) -> Result<DensityOperator> {
    random_fully_separable_multi(&[dims.a, dims.b], terms, seed)
}

/// Mixture of random products over any number of parties.
pub fn random_fully_separable_multi(
    dims: &[usize],
    terms: usize,
    seed: u64,
) -> Result<DensityOperator> {
    if terms == 0 {
        return Err(Error::InvalidParameter("terms must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    let weights = simplex_weights(terms, &mut rng);
    let n: usize = dims.iter().product();
    let mut acc = CMatrix::zeros(n, n);
    for w in weights {
        let mut factor = CMatrix::identity(1);
        for &d in dims {
            factor = kron(&factor, &CMatrix::projector(&random_ket(d, &mut rng)));
        }
        acc = &acc + &factor.scale_real(w);
    }
    Ok(DensityOperator::from_raw(acc.hermitian_part(), dims.to_vec()))
}

/// Rotate the global phase so the largest-magnitude entry is real positive.
pub fn fix_phase(v: &[C64]) -> Vec<C64> {
    let pivot = v
        .iter()
        .copied()
        .fold(ZERO, |best, z| if z.norm() > best.norm() + 1e-12 { z } else { best });
    if pivot.norm() == 0.0 {
        return v.to_vec();
    }
    let phase = pivot.conj() / pivot.norm();
    v.iter().map(|z| z * phase).collect()
}

/// Complete `first` to an orthonormal basis; the other vectors come from
/// Gram-Schmidt on the standard basis.
pub fn complete_basis(first: &[C64]) -> Vec<Vec<C64>> {
    let n = first.len();
    let mut basis = vec![matcore::normalize(first)];
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = vec![ZERO; n];
        v[e] = ONE;
        for _ in 0..2 {
            for q in &basis {
                let proj = inner(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= proj * qi;
                }
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            basis.push(v.iter().map(|z| z / nv).collect());
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d22() -> DimPair {
        DimPair::qubits()
    }

    #[test]
    fn schmidt_examples() {
        let p00 = PureState::from_real(&[1.0, 0.0, 0.0, 0.0], d22()).unwrap();
        let s = schmidt_decompose(&p00);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14 && s.coefficients[1].abs() < 1e-14);

        let s = schmidt_decompose(&bell_states()[0]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(s.coefficients.iter().all(|x| (x - h).abs() < 1e-14));

        let psi = random_pure(d22(), 11);
        let back = schmidt_decompose(&psi).reconstruct();
        assert!(back.iter().zip(psi.vec()).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn max_schmidt_examples() {
        let psi = PureState::from_real(&[0.0, 1.0, 1.0, 0.0], d22()).unwrap();
        assert!((max_schmidt_sq(&psi) - 0.5).abs() < 1e-14);
        let p00 = PureState::from_real(&[1.0, 0.0, 0.0, 0.0], d22()).unwrap();
        assert!((max_schmidt_sq(&p00) - 1.0).abs() < 1e-14);
        let uneven = PureState::from_real(&[0.9f64.sqrt(), 0.0, 0.0, 0.1f64.sqrt()], d22()).unwrap();
        assert!((max_schmidt_sq(&uneven) - 0.9).abs() < 1e-14);
    }

    #[test]
    fn ppt_examples() {
        assert!(is_ppt(&DensityOperator::maximally_mixed(&[2, 2])).unwrap());
        assert!(!is_ppt(&singlet()).unwrap());
        assert!(is_ppt(&werner(0.25).unwrap()).unwrap());
        // min eigenvalue of ρ_p^{T_B} is (1−3p)/4
        for p in [0.0, 0.2, 0.5, 0.9] {
            let m = min_pt_eigenvalue(&werner(p).unwrap()).unwrap();
            assert!((m - (1.0 - 3.0 * p) / 4.0).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn werner_examples() {
        assert!(werner(0.0).unwrap().matrix().approx_eq(&CMatrix::identity(4).scale_real(0.25), 1e-15));
        assert!(werner(1.0).unwrap().matrix().approx_eq(singlet().matrix(), 1e-15));
        assert!(!is_ppt(&werner(0.5).unwrap()).unwrap());
        assert!(werner(-0.1).is_err());
        assert!(werner(1.5).is_err());
        for p in [0.0, 0.3, 1.0] {
            let w = werner(p).unwrap();
            assert!(DensityOperator::new(w.matrix().clone(), vec![2, 2]).is_ok());
        }
    }

    #[test]
    fn bell_states_orthonormal() {
        let b = bell_states();
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((b[i].overlap(&b[j]) - r(want)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn random_samplers_are_valid_and_deterministic() {
        let d = DimPair::new(2, 3).unwrap();
        let rho = random_density(d, 7);
        assert!(DensityOperator::new(rho.matrix().clone(), vec![2, 3]).is_ok());
        assert_eq!(rho.matrix(), random_density(d, 7).matrix());
        assert_ne!(rho.matrix(), random_density(d, 8).matrix());

        let sep = random_separable(d22(), 10, 3).unwrap();
        assert!(DensityOperator::new(sep.matrix().clone(), vec![2, 2]).is_ok());
        assert!(is_ppt(&sep).unwrap());
        assert_eq!(sep.matrix(), random_separable(d22(), 10, 3).unwrap().matrix());
        assert!(random_separable(d22(), 0, 3).is_err());

        let prod = random_product_pure(d, 5);
        assert!((max_schmidt_sq(&prod) - 1.0).abs() < 1e-12);
        assert!((norm(random_pure(d, 1).vec()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn density_operator_validation_names_failure() {
        let bad_trace = CMatrix::identity(4);
        let err = DensityOperator::new(bad_trace, vec![2, 2]).unwrap_err().to_string();
        assert!(err.contains("trace"), "{err}");
        let non_herm = CMatrix::from_real(2, 2, &[0.5, 0.3, 0.0, 0.5]).unwrap();
        let err = DensityOperator::new(non_herm, vec![2]).unwrap_err().to_string();
        assert!(err.contains("Hermitian"), "{err}");
        let not_psd = CMatrix::diag_real(&[1.5, -0.5]);
        let err = DensityOperator::new(not_psd, vec![2]).unwrap_err().to_string();
        assert!(err.contains("positive"), "{err}");
        let err = DensityOperator::new(CMatrix::identity(3).scale_real(1.0 / 3.0), vec![2, 2])
            .unwrap_err()
            .to_string();
        assert!(err.contains("dims"), "{err}");
    }

    #[test]
    fn json_round_trip() {
        let rho = random_density(d22(), 42);
        let back = DensityOperator::from_json(&rho.to_json().unwrap()).unwrap();
        assert!(back.matrix().approx_eq(rho.matrix(), 0.0));
        assert_eq!(back.dims(), rho.dims());
        assert!(DensityOperator::from_json("{\"dims\": [2,2]}").is_err());
        let ragged = r#"{"dims":[2],"re":[[1,0],[0]],"im":[[0,0],[0,0]]}"#;
        assert!(DensityOperator::from_json(ragged).is_err());
    }

    #[test]
    fn unitary_sampler_is_unitary() {
        let mut rng = rng_from_seed(9);
        let u = random_unitary(6, &mut rng);
        assert!(matcore::unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn complete_basis_is_orthonormal() {
        let first = random_pure(d22(), 4);
        let b = complete_basis(first.vec());
        assert_eq!(b.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { ONE } else { ZERO };
                assert!((inner(&b[i], &b[j]) - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn many_separable_samples_are_ppt() {
        for i in 0..2000 {
            let rho = random_separable(d22(), 8, derive_seed(1, i)).unwrap();
            assert!(is_ppt(&rho).unwrap(), "sample {i}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn schmidt_reconstructs(seed in any::<u64>(), da in 1usize..4, db in 1usize..4) {
            let psi = random_pure(DimPair::new(da, db).unwrap(), seed);
            let s = schmidt_decompose(&psi);
            let back = s.reconstruct();
            prop_assert!(back.iter().zip(psi.vec()).all(|(a, b)| (a - b).norm() < 1e-9));
            let sq: f64 = s.coefficients.iter().map(|x| x * x).sum();
            prop_assert!((sq - 1.0).abs() < 1e-10);
            let m = da.min(db) as f64;
            let smax = max_schmidt_sq(&psi);
            prop_assert!(smax >= 1.0 / m - 1e-12 && smax <= 1.0 + 1e-12);
        }

        #[test]
        fn product_states_have_unit_schmidt(seed in any::<u64>()) {
            let psi = random_product_pure(DimPair::new(3, 2).unwrap(), seed);
            prop_assert!((max_schmidt_sq(&psi) - 1.0).abs() < 1e-12);
        }
    }
}

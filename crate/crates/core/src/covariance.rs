//! Second-moment matrices `η`, `η^{T_B}`, `χ`, `Γ = η^{T_B} − χ` over
//! product operator bases, rank-one `Q` certificates and their search.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    self, hermitian_basis, kron, partial_transpose, psd_sqrt, trace_inner, trace_product,
    unitarity_deviation, unitary_exp, CMatrix, DimPair, C64, ZERO,
};
use crate::nonlinear::MatrixParts;
use crate::par::{self, Execution};
use crate::states::{complete_basis, derive_seed, random_hermitian, random_unitary, rng_from_seed, DensityOperator};
use crate::tol;

/// Hermitian operator bases `{A_k}` for Alice and `{B_k}` for Bob.
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    a_ops: Vec<CMatrix>,
    b_ops: Vec<CMatrix>,
    dims: DimPair,
    id: String,
    orthonormal: bool,
}

fn gram(ops: &[CMatrix]) -> CMatrix {
    CMatrix::from_fn(ops.len(), ops.len(), |i, j| trace_product(&ops[i].adjoint(), &ops[j]))
}

fn orthonormal_deviation(ops: &[CMatrix]) -> f64 {
    gram(ops).max_abs_diff(&CMatrix::identity(ops.len()))
}

fn check_side(ops: &[CMatrix], d: usize, side: &str) -> Result<()> {
    if ops.len() != d * d {
        return Err(dim_err(format!("{} operators for {side}", d * d), ops.len()));
    }
    for op in ops {
        if op.rows() != d || op.cols() != d {
            return Err(dim_err(format!("{d}x{d}"), format!("{}x{}", op.rows(), op.cols())));
        }
        let deviation = op.hermitian_deviation();
        if deviation > tol::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
    }
    let smin = matcore::min_singular_value(&gram(ops));
    if smin < 1e-10 {
        return Err(Error::Singular(format!(
            "{side} operators are linearly dependent (smallest Gram singular value {smin:.3e})"
        )));
    }
    Ok(())
}

impl OperatorBasis {
    /// Generalized Gell-Mann operators plus `𝟙/√d`, orthonormal.
    pub fn standard(dims: DimPair) -> Self {
        Self {
            a_ops: hermitian_basis(dims.a),
            b_ops: hermitian_basis(dims.b),
            dims,
            id: "gell-mann".into(),
            orthonormal: true,
        }
    }

    /// User basis; must be Hermitian and span each operator space.
    pub fn custom(a_ops: Vec<CMatrix>, b_ops: Vec<CMatrix>, id: impl Into<String>) -> Result<Self> {
        let da = a_ops.first().map_or(0, CMatrix::rows);
        let db = b_ops.first().map_or(0, CMatrix::rows);
        let dims = DimPair::new(da, db)?;
        check_side(&a_ops, da, "A")?;
        check_side(&b_ops, db, "B")?;
        let orthonormal =
            orthonormal_deviation(&a_ops) <= tol::ORTHONORMAL && orthonormal_deviation(&b_ops) <= tol::ORTHONORMAL;
        Ok(Self {
            a_ops,
            b_ops,
            dims,
            id: id.into(),
            orthonormal,
        })
    }

    /// `Ã_k = Σ_l C_kl A_l`, `B̃_k = Σ_l D_kl B_l` for real invertible `C`, `D`.
    pub fn transformed(&self, c: &CMatrix, d: &CMatrix) -> Result<Self> {
        let combine = |m: &CMatrix, ops: &[CMatrix], side: &str| -> Result<Vec<CMatrix>> {
            let n = ops.len();
            if m.rows() != n || m.cols() != n {
                return Err(dim_err(format!("{n}x{n} {side} transformation"), format!("{}x{}", m.rows(), m.cols())));
            }
            if m.data().iter().any(|z| z.im.abs() > 1e-15) {
                return Err(Error::InvalidParameter(format!("{side} transformation must be real")));
            }
            let smin = matcore::min_singular_value(m);
            if smin < 1e-10 {
                return Err(Error::Singular(format!(
                    "{side} transformation is singular (smallest singular value {smin:.3e})"
                )));
            }
            Ok((0..n)
                .map(|k| {
                    ops.iter()
                        .enumerate()
                        .fold(CMatrix::zeros(ops[0].rows(), ops[0].rows()), |acc, (l, op)| {
                            &acc + &op.scale(m[(k, l)])
                        })
                })
                .collect())
        };
        Self::custom(
            combine(c, &self.a_ops, "A")?,
            combine(d, &self.b_ops, "B")?,
            format!("{}:transformed", self.id),
        )
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn is_orthonormal(&self) -> bool {
        self.orthonormal
    }

    pub fn a_ops(&self) -> &[CMatrix] {
        &self.a_ops
    }

    pub fn b_ops(&self) -> &[CMatrix] {
        &self.b_ops
    }

    /// Size `dA²·dB²` of the flattened index space.
    pub fn len(&self) -> usize {
        self.a_ops.len() * self.b_ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn split(&self, i: usize) -> (usize, usize) {
        (i / self.b_ops.len(), i % self.b_ops.len())
    }

    /// `A_{i₁} ⊗ B_{i₂}ᵀ`, the operators certificates are expanded in.
    pub fn factor_op(&self, i: usize) -> CMatrix {
        let (i1, i2) = self.split(i);
        kron(&self.a_ops[i1], &self.b_ops[i2].transpose())
    }

    /// `A_{i₁} ⊗ B_{i₂}`.
    pub fn product_op(&self, i: usize) -> CMatrix {
        let (i1, i2) = self.split(i);
        kron(&self.a_ops[i1], &self.b_ops[i2])
    }

    fn check_state(&self, rho: &DensityOperator) -> Result<()> {
        let d = rho.dim_pair()?;
        if d != self.dims {
            return Err(dim_err(self.dims, d));
        }
        Ok(())
    }
}

/// Convenience alias for [`OperatorBasis::standard`].
pub fn default_basis(dims: DimPair) -> OperatorBasis {
    OperatorBasis::standard(dims)
}

/// Shared kernel: `M_{ij} = Tr(ρ·A_{i₁}A_{j₁} ⊗ B_{i₂}B_{j₂})`, or with the
/// Bob product reversed when `swap_b` is set. Symmetrized on return.
fn second_moments(rho: &CMatrix, basis: &OperatorBasis, swap_b: bool) -> CMatrix {
    let (na, nb) = (basis.a_ops.len(), basis.b_ops.len());
    let aa: Vec<CMatrix> = (0..na * na)
        .map(|k| &basis.a_ops[k / na] * &basis.a_ops[k % na])
        .collect();
    let bb: Vec<CMatrix> = (0..nb * nb)
        .map(|k| &basis.b_ops[k / nb] * &basis.b_ops[k % nb])
        .collect();
    let n = na * nb;
    let m = CMatrix::from_fn(n, n, |i, j| {
        let (i1, i2) = (i / nb, i % nb);
        let (j1, j2) = (j / nb, j % nb);
        let b = if swap_b { &bb[j2 * nb + i2] } else { &bb[i2 * nb + j2] };
        trace_product(rho, &kron(&aa[i1 * na + j1], b))
    });
    m.hermitian_part()
}

/// `η_{ij} = ⟨A_{i₁}A_{j₁} ⊗ B_{i₂}B_{j₂}⟩`.
pub fn eta(rho: &DensityOperator, basis: &OperatorBasis) -> Result<CMatrix> {
    basis.check_state(rho)?;
    Ok(second_moments(rho.matrix(), basis, false))
}

/// Same moments for an arbitrary square matrix in place of a state.
pub fn eta_raw(m: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix> {
    let n = basis.dims.total();
    if m.rows() != n || m.cols() != n {
        return Err(dim_err(n, m.rows()));
    }
    Ok(second_moments(m, basis, false))
}

/// `η^{T_B}_{ij} = ⟨A_{i₁}A_{j₁} ⊗ B_{j₂}B_{i₂}⟩`.
pub fn eta_pt(rho: &DensityOperator, basis: &OperatorBasis) -> Result<CMatrix> {
    basis.check_state(rho)?;
    Ok(second_moments(rho.matrix(), basis, true))
}

/// `β_i = ⟨A_{i₁} ⊗ B_{i₂}⟩`.
pub fn first_moments(rho: &DensityOperator, basis: &OperatorBasis) -> Result<Vec<C64>> {
    basis.check_state(rho)?;
    Ok((0..basis.len())
        .map(|i| trace_product(rho.matrix(), &basis.product_op(i)))
        .collect())
}

/// `χ_{ij} = β_i β_j`.
pub fn chi(rho: &DensityOperator, basis: &OperatorBasis) -> Result<CMatrix> {
    let beta = first_moments(rho, basis)?;
    Ok(CMatrix::from_fn(beta.len(), beta.len(), |i, j| beta[i] * beta[j]))
}

/// `Γ = η^{T_B} − χ`.
pub fn gamma(rho: &DensityOperator, basis: &OperatorBasis) -> Result<CMatrix> {
    Ok(&eta_pt(rho, basis)? - &chi(rho, basis)?)
}

/// Rank-one certificate `Q = αα†` for the factor `X = Σ α_i A_{i₁}⊗B_{i₂}ᵀ`
/// of the target `P = XX†`.
#[derive(Debug, Clone)]
pub struct QCertificate {
    alpha: Vec<C64>,
    target: CMatrix,
    dims: DimPair,
    basis_id: String,
}

impl QCertificate {
    pub fn alpha(&self) -> &[C64] {
        &self.alpha
    }

    pub fn target(&self) -> &CMatrix {
        &self.target
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn q(&self) -> CMatrix {
        CMatrix::outer(&self.alpha, &self.alpha)
    }

    /// `X = Σ α_i A_{i₁}⊗B_{i₂}ᵀ`.
    pub fn factor(&self, basis: &OperatorBasis) -> CMatrix {
        let n = basis.dims.total();
        self.alpha
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(n, n), |acc, (i, a)| &acc + &basis.factor_op(i).scale(*a))
    }

    /// `Σ Q_{ij} A_{i₁}A_{j₁} ⊗ B_{i₂}ᵀB_{j₂}ᵀ`.
    pub fn reconstruct(&self, basis: &OperatorBasis) -> Result<CMatrix> {
        self.check_basis(basis)?;
        let q = self.q();
        let n = basis.dims.total();
        let ops: Vec<CMatrix> = (0..basis.len()).map(|i| basis.factor_op(i)).collect();
        let mut out = CMatrix::zeros(n, n);
        for (i, oi) in ops.iter().enumerate() {
            for (j, oj) in ops.iter().enumerate() {
                if q[(i, j)].norm() == 0.0 {
                    continue;
                }
                out = &out + &(oi * oj).scale(q[(i, j)]);
            }
        }
        Ok(out)
    }

    /// Max-entry distance between the reconstruction and the target.
    pub fn residual(&self, basis: &OperatorBasis) -> Result<f64> {
        Ok(self.reconstruct(basis)?.max_abs_diff(&self.target))
    }

    pub fn validate(&self, basis: &OperatorBasis) -> Result<f64> {
        let res = self.residual(basis)?;
        if res > tol::RECONSTRUCTION {
            return Err(Error::InvalidParameter(format!(
                "certificate reconstruction residual {res:.3e} exceeds {:.0e}",
                tol::RECONSTRUCTION
            )));
        }
        Ok(res)
    }

    fn check_basis(&self, basis: &OperatorBasis) -> Result<()> {
        if basis.dims != self.dims || basis.len() != self.alpha.len() {
            return Err(dim_err(self.dims, basis.dims));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let (re, im) = self.target.to_parts();
        Ok(serde_json::to_string_pretty(&CertificateFile {
            alpha_re: self.alpha.iter().map(|a| a.re).collect(),
            alpha_im: self.alpha.iter().map(|a| a.im).collect(),
            target: MatrixParts { re, im },
            dims: vec![self.dims.a, self.dims.b],
            basis: self.basis_id.clone(),
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: CertificateFile = serde_json::from_str(s)?;
        let dims = match f.dims.as_slice() {
            [a, b] => DimPair::new(*a, *b)?,
            other => return Err(dim_err("[dA, dB]", format!("{other:?}"))),
        };
        if f.alpha_re.len() != f.alpha_im.len() || f.alpha_re.len() != dims.a * dims.a * dims.b * dims.b {
            return Err(dim_err(dims.a * dims.a * dims.b * dims.b, f.alpha_re.len()));
        }
        let target = CMatrix::from_parts(&f.target.re, &f.target.im)?;
        if target.rows() != dims.total() || target.cols() != dims.total() {
            return Err(dim_err(dims.total(), target.rows()));
        }
        Ok(Self {
            alpha: f.alpha_re.iter().zip(&f.alpha_im).map(|(r, i)| C64::new(*r, *i)).collect(),
            target,
            dims,
            basis_id: f.basis,
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateFile {
    pub alpha_re: Vec<f64>,
    pub alpha_im: Vec<f64>,
    pub target: MatrixParts,
    pub dims: Vec<usize>,
    pub basis: String,
}

/// Expansion coefficients of `X` in `{A_{i₁}⊗B_{i₂}ᵀ}`; a Gram solve is used
/// when the basis is not orthonormal.
pub fn expand_factor(x: &CMatrix, basis: &OperatorBasis) -> Result<Vec<C64>> {
    let n = basis.dims.total();
    if x.rows() != n || x.cols() != n {
        return Err(dim_err(n, x.rows()));
    }
    let ops: Vec<CMatrix> = (0..basis.len()).map(|i| basis.factor_op(i)).collect();
    let rhs = ops.iter().map(|o| trace_inner(o, x)).collect::<Result<Vec<_>>>()?;
    if basis.orthonormal {
        return Ok(rhs);
    }
    let g = gram(&ops);
    matcore::solve(&g, &rhs).ok_or_else(|| Error::Singular("operator basis Gram matrix".into()))
}

/// Certificate for an explicit factor `X`; the target is `XX†`.
pub fn q_from_factor(x: &CMatrix, basis: &OperatorBasis) -> Result<QCertificate> {
    Ok(QCertificate {
        alpha: expand_factor(x, basis)?,
        target: x * &x.adjoint(),
        dims: basis.dims,
        basis_id: basis.id.clone(),
    })
}

fn check_target(p: &CMatrix, basis: &OperatorBasis) -> Result<CMatrix> {
    let n = basis.dims.total();
    if p.rows() != n || p.cols() != n {
        return Err(dim_err(format!("{n}x{n} target"), format!("{}x{}", p.rows(), p.cols())));
    }
    psd_sqrt(p)
}

/// Certificate with factor `X = √P·V`; `V = 𝟙` gives `X = √P`.
pub fn q_from_unitary(p: &CMatrix, v: &CMatrix, basis: &OperatorBasis) -> Result<QCertificate> {
    let root = check_target(p, basis)?;
    if v.rows() != p.rows() || v.cols() != p.rows() {
        return Err(dim_err(p.rows(), v.rows()));
    }
    let deviation = unitarity_deviation(v);
    if deviation > tol::HERMITIAN {
        return Err(Error::NotUnitary { deviation });
    }
    let mut cert = q_from_factor(&(&root * v), basis)?;
    cert.target = p.clone();
    Ok(cert)
}

/// A unitary with `V·from = to` for unit vectors.
pub fn unitary_mapping(from: &[C64], to: &[C64]) -> Result<CMatrix> {
    if from.len() != to.len() {
        return Err(dim_err(from.len(), to.len()));
    }
    for v in [from, to] {
        if (matcore::norm(v) - 1.0).abs() > tol::NORM.max(1e-10) {
            return Err(Error::InvalidParameter("unitary_mapping needs unit vectors".into()));
        }
    }
    let uf = CMatrix::from_columns(&complete_basis(from));
    let ut = CMatrix::from_columns(&complete_basis(to));
    Ok(&ut * &uf.adjoint())
}

/// `Σ_{ij} Γ_{ij} Q_{ij}` for a precomputed `Γ`.
fn pair_with_gamma(g: &CMatrix, alpha: &[C64]) -> f64 {
    let mut acc = ZERO;
    for (i, ai) in alpha.iter().enumerate() {
        if ai.norm() == 0.0 {
            continue;
        }
        for (j, aj) in alpha.iter().enumerate() {
            acc += g[(i, j)] * ai * aj.conj();
        }
    }
    acc.re
}

/// `Σ_{ij} Γ_{ij} Q_{ij}`, equal to `Tr(P^{T_B}ρ) − |⟨X^{T_B}⟩|²`.
pub fn functional(rho: &DensityOperator, cert: &QCertificate, basis: &OperatorBasis) -> Result<f64> {
    cert.check_basis(basis)?;
    Ok(pair_with_gamma(&gamma(rho, basis)?, &cert.alpha))
}

/// `(Tr(P^{T_B}ρ), Σ χ_{ij} Q_{ij})`, the two parts of [`functional`].
pub fn functional_parts(
    rho: &DensityOperator,
    cert: &QCertificate,
    basis: &OperatorBasis,
) -> Result<(f64, f64)> {
    cert.check_basis(basis)?;
    let lin = rho.expect(&partial_transpose(&cert.target, basis.dims)?)?.re;
    let nl = pair_with_gamma(&chi(rho, basis)?, &cert.alpha);
    Ok((lin, nl))
}

/// Search effort for [`optimize_q`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub samples: usize,
    pub refine_steps: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            samples: 2000,
            refine_steps: 200,
        }
    }
}

impl Budget {
    pub fn small() -> Self {
        Self {
            samples: 200,
            refine_steps: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Optimized {
    pub certificate: QCertificate,
    pub value: f64,
    /// Value at `V = 𝟙`.
    pub baseline: f64,
    pub unitary: CMatrix,
}

/// Minimizes the functional over rank-one certificates `X = √P·V`:
/// Haar-sampled `V` (index 0 is `𝟙`), then local moves `V·exp(iεG)` with a
/// shrinking step. Deterministic for a fixed seed regardless of execution.
pub fn optimize_q(
    rho: &DensityOperator,
    p: &CMatrix,
    basis: &OperatorBasis,
    budget: Budget,
    seed: u64,
    exec: Execution,
) -> Result<Optimized> {
    if budget.samples == 0 {
        return Err(Error::InvalidParameter("budget must allow at least one sample".into()));
    }
    basis.check_state(rho)?;
    let root = check_target(p, basis)?;
    let g = gamma(rho, basis)?;
    let n = p.rows();
    let value_of = |v: &CMatrix| -> Result<f64> {
        Ok(pair_with_gamma(&g, &expand_factor(&(&root * v), basis)?))
    };
    let unitary_for = |k: usize| -> CMatrix {
        if k == 0 {
            CMatrix::identity(n)
        } else {
            random_unitary(n, &mut rng_from_seed(derive_seed(seed, k as u64)))
        }
    };
    let scores = par::map_indices(budget.samples, exec, |k| value_of(&unitary_for(k)).map(|v| (v, k)));
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;
    let baseline = scores[0].0;
    let (mut best, best_k) = scores
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("non-empty");
    let mut v = unitary_for(best_k);

    let mut rng = rng_from_seed(derive_seed(seed, u64::MAX));
    let mut step = 0.5;
    for _ in 0..budget.refine_steps {
        let gen = random_hermitian(n, &mut rng);
        let gen = gen.scale_real(1.0 / gen.frobenius_norm().max(1e-300));
        let mut improved = false;
        for sign in [1.0, -1.0] {
            let cand = &v * &unitary_exp(&gen, sign * step)?;
            let val = value_of(&cand)?;
            if val < best {
                best = val;
                v = cand;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.7;
        }
    }
    let mut certificate = q_from_factor(&(&root * &v), basis)?;
    certificate.target = p.clone();
    Ok(Optimized {
        certificate,
        value: best,
        baseline,
        unitary: v,
    })
}

/// Outcome of [`basis_covariance_check`].
#[derive(Debug, Clone)]
pub struct CovarianceReport {
    /// Max deviation of `η(Ã,B̃)` from `(C⊗D)η(C⊗D)ᵀ`.
    pub eta_deviation: f64,
    pub eta_pt_deviation: f64,
    pub gamma_deviation: f64,
    /// Functional for the same factor `X` in both bases.
    pub value_original: f64,
    pub value_transformed: f64,
    pub detected_original: bool,
    pub detected_transformed: bool,
}

impl CovarianceReport {
    pub fn verdict_unchanged(&self) -> bool {
        self.detected_original == self.detected_transformed
    }
}

fn congruence(m: &CMatrix, t: &CMatrix) -> CMatrix {
    &(t * m) * &t.transpose()
}

/// Checks the transformation laws of `η`, `η^{T_B}`, `Γ` under the basis change
/// `(C, D)` and compares the functional of an optimized factor in both bases.
pub fn basis_covariance_check(
    rho: &DensityOperator,
    basis: &OperatorBasis,
    c: &CMatrix,
    d: &CMatrix,
    p: &CMatrix,
    budget: Budget,
    seed: u64,
) -> Result<CovarianceReport> {
    let other = basis.transformed(c, d)?;
    let t = kron(c, d);
    let eta_deviation = eta(rho, &other)?.max_abs_diff(&congruence(&eta(rho, basis)?, &t));
    let eta_pt_deviation = eta_pt(rho, &other)?.max_abs_diff(&congruence(&eta_pt(rho, basis)?, &t));
    let gamma_deviation = gamma(rho, &other)?.max_abs_diff(&congruence(&gamma(rho, basis)?, &t));
    let best = optimize_q(rho, p, basis, budget, seed, Execution::default())?;
    let x = best.certificate.factor(basis);
    let value_original = functional(rho, &q_from_factor(&x, basis)?, basis)?;
    let value_transformed = functional(rho, &q_from_factor(&x, &other)?, &other)?;
    Ok(CovarianceReport {
        eta_deviation,
        eta_pt_deviation,
        gamma_deviation,
        value_original,
        value_transformed,
        detected_original: value_original < -tol::STRICT,
        detected_transformed: value_transformed < -tol::STRICT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{is_psd, min_eigenvalue, Pauli};
    use crate::nonlinear::{improve_f1, pt_witness, QuadraticTerm, NonlinearWitness, Family};
    use crate::states::{
        bell_states, is_ppt, random_density, random_pure, random_separable, singlet, werner, PureState,
    };
    use proptest::prelude::*;

    fn d22() -> DimPair {
        DimPair::qubits()
    }

    fn phi_plus_proj() -> CMatrix {
        bell_states()[0].projector()
    }

    #[test]
    fn standard_basis_shapes() {
        let b = default_basis(d22());
        assert_eq!(b.len(), 16);
        assert!(orthonormal_deviation(b.a_ops()) < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(b.a_ops()[0].approx_eq(&CMatrix::identity(2).scale_real(s), 1e-15));
        let paulis = [Pauli::X, Pauli::Y, Pauli::Z];
        for op in &b.a_ops()[1..] {
            assert!(paulis.iter().any(|p| op.approx_eq(&p.matrix().scale_real(s), 1e-15)));
        }
        assert_eq!(default_basis(DimPair::new(3, 2).unwrap()).a_ops().len(), 9);
    }

    #[test]
    fn completeness() {
        let mut rng = rng_from_seed(2);
        let m = random_hermitian(3, &mut rng);
        let b = default_basis(DimPair::new(3, 3).unwrap());
        let back = b.a_ops().iter().fold(CMatrix::zeros(3, 3), |acc, a| {
            &acc + &a.scale(trace_inner(a, &m).unwrap())
        });
        assert!(back.approx_eq(&m, 1e-12));
    }

    #[test]
    fn eta_of_mixed_state() {
        let b = default_basis(d22());
        let e = eta(&DensityOperator::maximally_mixed(&[2, 2]), &b).unwrap();
        assert!(e.approx_eq(&CMatrix::identity(16).scale_real(0.25), 1e-14));
        let prod = DensityOperator::from_pure(&PureState::from_real(&[1.0, 0.0, 0.0, 0.0], d22()).unwrap());
        assert!(is_psd(&eta(&prod, &b).unwrap(), tol::ETA_PSD));
    }

    #[test]
    fn chi_of_mixed_state() {
        let b = default_basis(d22());
        let x = chi(&DensityOperator::maximally_mixed(&[2, 2]), &b).unwrap();
        let eig = matcore::herm_eig(&x).unwrap();
        assert!((eig.values[0] - 0.25).abs() < 1e-14);
        assert!(eig.values[1..].iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn singlet_gamma_and_eta_pt_negative() {
        let b = default_basis(d22());
        assert!(min_eigenvalue(&eta_pt(&singlet(), &b).unwrap()).unwrap() < -0.1);
        assert!(min_eigenvalue(&gamma(&singlet(), &b).unwrap()).unwrap() < -0.1);
    }

    #[test]
    fn pt_moments_identity() {
        let b = default_basis(DimPair::new(2, 3).unwrap());
        let bt = OperatorBasis::custom(
            b.a_ops().to_vec(),
            b.b_ops().iter().map(CMatrix::transpose).collect(),
            "transposed",
        )
        .unwrap();
        for seed in 0..100 {
            let rho = random_density(b.dims(), seed);
            let lhs = eta_pt(&rho, &b).unwrap();
            let rhs = eta_raw(&rho.partial_transpose().unwrap(), &bt).unwrap();
            assert!(lhs.max_abs_diff(&rhs) <= 1e-10);
        }
    }

    #[test]
    fn certificate_examples() {
        let b = default_basis(d22());
        let p = phi_plus_proj();
        let cert = q_from_unitary(&p, &CMatrix::identity(4), &b).unwrap();
        assert!(cert.factor(&b).approx_eq(&p, 1e-12));
        assert!(cert.validate(&b).unwrap() <= 1e-12);
        assert!(is_psd(&cert.q(), tol::PSD));
        // V = 𝟙 gives ⟨W⟩ − ⟨W⟩²
        let v = functional(&singlet(), &cert, &b).unwrap();
        assert!((v + 0.75).abs() < 1e-12);
        let rho = random_density(d22(), 8);
        let w = rho.expect(&partial_transpose(&p, d22()).unwrap()).unwrap().re;
        assert!((functional(&rho, &cert, &b).unwrap() - (w - w * w)).abs() < 1e-12);
    }

    #[test]
    fn certificate_rejections() {
        let b = default_basis(d22());
        let not_psd = CMatrix::diag_real(&[1.0, -0.5, 0.0, 0.0]);
        assert!(matches!(
            q_from_unitary(&not_psd, &CMatrix::identity(4), &b),
            Err(Error::NotPsd { .. })
        ));
        let not_unitary = CMatrix::identity(4).scale_real(2.0);
        assert!(matches!(
            q_from_unitary(&phi_plus_proj(), &not_unitary, &b),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn psi_direction_matches_f1_without_schmidt_factor() {
        let b = default_basis(d22());
        let phi = bell_states()[0].clone();
        for seed in 0..100 {
            let psi = random_pure(d22(), seed);
            let v = unitary_mapping(psi.vec(), phi.vec()).unwrap();
            let cert = q_from_unitary(&phi.projector(), &v, &b).unwrap();
            assert!(cert.factor(&b).approx_eq(&CMatrix::outer(phi.vec(), psi.vec()), 1e-10));
            let x = CMatrix::outer(phi.vec(), psi.vec());
            let unit = NonlinearWitness::new(
                pt_witness(&phi).unwrap(),
                vec![QuadraticTerm::from_x(&x, d22(), 1.0).unwrap()],
                Family::Covariance,
            )
            .unwrap();
            let rho = random_density(d22(), seed + 1000);
            let cov = functional(&rho, &cert, &b).unwrap();
            assert!((cov - unit.evaluate(&rho).unwrap()).abs() < 1e-9);
            let f1 = improve_f1(&phi, &psi).unwrap().evaluate(&rho).unwrap();
            assert!(cov >= f1 - 1e-12);
        }
    }

    #[test]
    fn functional_decomposes() {
        let b = default_basis(DimPair::new(2, 3).unwrap());
        for seed in 0..30 {
            let mut rng = rng_from_seed(seed);
            let h = random_hermitian(6, &mut rng);
            let p = &h * &h;
            let v = random_unitary(6, &mut rng);
            let cert = q_from_unitary(&p, &v, &b).unwrap();
            assert!(cert.residual(&b).unwrap() <= 1e-8);
            let rho = random_density(b.dims(), seed);
            let (lin, nl) = functional_parts(&rho, &cert, &b).unwrap();
            let x = cert.factor(&b);
            let direct = rho.expect(&partial_transpose(&x, b.dims()).unwrap()).unwrap().norm_sqr();
            assert!((nl - direct).abs() < 1e-8);
            assert!((functional(&rho, &cert, &b).unwrap() - (lin - nl)).abs() < 1e-8);
        }
    }

    #[test]
    fn optimize_singlet_improves() {
        let b = default_basis(d22());
        let out = optimize_q(&singlet(), &phi_plus_proj(), &b, Budget::small(), 5, Execution::Parallel).unwrap();
        assert!(out.value < -0.5);
        assert!(out.value <= out.baseline);
        assert!(out.certificate.validate(&b).is_ok());
        let again = optimize_q(&singlet(), &phi_plus_proj(), &b, Budget::small(), 5, Execution::Sequential).unwrap();
        assert_eq!(out.value.to_bits(), again.value.to_bits());
    }

    #[test]
    fn optimize_mixed_state_nonnegative() {
        let b = default_basis(d22());
        let out = optimize_q(
            &DensityOperator::maximally_mixed(&[2, 2]),
            &phi_plus_proj(),
            &b,
            Budget::small(),
            1,
            Execution::Parallel,
        )
        .unwrap();
        assert!(out.value >= -1e-8);
    }

    #[test]
    fn separable_states_have_nonnegative_gamma() {
        let b = default_basis(d22());
        for i in 0..200 {
            let rho = random_separable(d22(), 8, derive_seed(4, i)).unwrap();
            assert!(min_eigenvalue(&gamma(&rho, &b).unwrap()).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn eta_pt_psd_iff_ppt() {
        let b = default_basis(d22());
        for seed in 0..300 {
            let rho = random_density(d22(), seed);
            let m = min_eigenvalue(&eta_pt(&rho, &b).unwrap()).unwrap();
            let pt = crate::states::min_pt_eigenvalue(&rho).unwrap();
            if m.abs() < 1e-7 || pt.abs() < 1e-7 {
                continue;
            }
            assert_eq!(m > 0.0, is_ppt(&rho).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn basis_change_identity_and_random() {
        let b = default_basis(d22());
        let rho = werner(0.6).unwrap();
        let id = CMatrix::identity(4);
        let rep = basis_covariance_check(&rho, &b, &id, &id, &phi_plus_proj(), Budget::small(), 3).unwrap();
        assert!(rep.eta_deviation < 1e-14);
        assert!(rep.verdict_unchanged() && rep.detected_original);
        for k in 0..5 {
            let mut rng = rng_from_seed(100 + k);
            let c = CMatrix::from_fn(4, 4, |_, _| C64::new(crate::states::gaussian_c64(&mut rng).re, 0.0));
            let d = CMatrix::from_fn(4, 4, |_, _| C64::new(crate::states::gaussian_c64(&mut rng).re, 0.0));
            let rep = basis_covariance_check(&rho, &b, &c, &d, &phi_plus_proj(), Budget::small(), k).unwrap();
            assert!(rep.eta_deviation < 1e-9 && rep.gamma_deviation < 1e-9 && rep.eta_pt_deviation < 1e-9);
            assert!((rep.value_original - rep.value_transformed).abs() < 1e-8);
            assert!(rep.verdict_unchanged());
        }
    }

    #[test]
    fn singular_basis_change_rejected() {
        let b = default_basis(d22());
        let mut c = CMatrix::identity(4);
        c[(3, 3)] = C64::new(0.0, 0.0);
        let err = basis_covariance_check(&singlet(), &b, &c, &CMatrix::identity(4), &phi_plus_proj(), Budget::small(), 0);
        assert!(matches!(err, Err(Error::Singular(_))));
    }

    #[test]
    fn certificate_json_round_trip() {
        let b = default_basis(d22());
        let cert = q_from_unitary(&phi_plus_proj(), &random_unitary(4, &mut rng_from_seed(9)), &b).unwrap();
        let back = QCertificate::from_json(&cert.to_json().unwrap()).unwrap();
        assert!(back.validate(&b).unwrap() <= 1e-8);
        assert_eq!(back.basis_id(), "gell-mann");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn eta_is_psd(seed in any::<u64>()) {
            for dims in [d22(), DimPair::new(2, 3).unwrap()] {
                let rho = random_density(dims, seed);
                let e = eta(&rho, &default_basis(dims)).unwrap();
                prop_assert!(min_eigenvalue(&e).unwrap() >= -1e-8);
            }
        }

        #[test]
        fn reconstruction_holds(seed in any::<u64>()) {
            let b = default_basis(d22());
            let mut rng = rng_from_seed(seed);
            let h = random_hermitian(4, &mut rng);
            let p = &h * &h;
            let v = random_unitary(4, &mut rng);
            let cert = q_from_unitary(&p, &v, &b).unwrap();
            prop_assert!(cert.residual(&b).unwrap() <= 1e-8);
        }
    }
}

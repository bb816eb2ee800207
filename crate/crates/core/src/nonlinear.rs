//! Nonlinear improvements `F(ρ) = Tr(Wρ) − Σᵢ αᵢ |Tr(Xᵢ^{T_B} ρ)|²` of
//! linear witnesses, their detection conditions, and Pauli-level readout.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    self, partial_trace, partial_transpose, psd_sqrt_clamped, CMatrix, DimPair, Pauli, Subsystem,
    C64, I, ONE, ZERO,
};
use crate::states::{max_schmidt_sq, schmidt_of_vector, DensityOperator, PureState};
use crate::tol;
use crate::witness::{
    all_words, apply_local, map_from_operator, pauli_vector, LinearWitness, Provenance, WitnessFile,
};

/// One subtracted square `α·|⟨X^{T_B}⟩|²`, stored with its Hermitian split
/// `X^{T_B} = H + i·A`.
#[derive(Debug, Clone)]
pub struct QuadraticTerm {
    xtb: CMatrix,
    weight: f64,
    h: CMatrix,
    a: CMatrix,
}

impl QuadraticTerm {
    pub fn new(xtb: CMatrix, weight: f64) -> Result<Self> {
        if !xtb.is_square() {
            return Err(dim_err("square operator", format!("{}x{}", xtb.rows(), xtb.cols())));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "term weight must be positive and finite, got {weight}"
            )));
        }
        let h = xtb.hermitian_part();
        let a = (&xtb - &xtb.adjoint()).scale(C64::new(0.0, -0.5));
        Ok(Self { xtb, weight, h, a })
    }

    /// Term built from `X` itself; the partial transpose is taken here.
    pub fn from_x(x: &CMatrix, dims: DimPair, weight: f64) -> Result<Self> {
        Self::new(partial_transpose(x, dims)?, weight)
    }

    fn from_split(h: CMatrix, a: CMatrix, weight: f64) -> Result<Self> {
        let xtb = &h + &a.scale(I);
        Self::new(xtb, weight)
    }

    pub fn xtb(&self) -> &CMatrix {
        &self.xtb
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn h(&self) -> &CMatrix {
        &self.h
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }

    /// `(⟨H⟩, ⟨A⟩)`.
    pub fn expectations(&self, rho: &CMatrix) -> (f64, f64) {
        (
            matcore::trace_product(&self.h, rho).re,
            matcore::trace_product(&self.a, rho).re,
        )
    }

    /// `α(⟨H⟩² + ⟨A⟩²)`.
    pub fn penalty(&self, rho: &CMatrix) -> f64 {
        let (h, a) = self.expectations(rho);
        self.weight * (h * h + a * a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    F1,
    F2,
    Covariance,
    PositiveMap,
    Custom,
}

/// A linear witness together with subtracted squares.
#[derive(Debug, Clone)]
pub struct NonlinearWitness {
    linear: LinearWitness,
    terms: Vec<QuadraticTerm>,
    family: Family,
}

impl NonlinearWitness {
    pub fn new(linear: LinearWitness, terms: Vec<QuadraticTerm>, family: Family) -> Result<Self> {
        let n = linear.dims().total();
        if let Some(t) = terms.iter().find(|t| t.xtb.rows() != n) {
            return Err(dim_err(n, t.xtb.rows()));
        }
        Ok(Self {
            linear,
            terms,
            family,
        })
    }

    pub fn linear(&self) -> &LinearWitness {
        &self.linear
    }

    pub fn terms(&self) -> &[QuadraticTerm] {
        &self.terms
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dims(&self) -> DimPair {
        self.linear.dims()
    }

    /// Evaluation through the Hermitian split of each term.
    pub fn evaluate(&self, rho: &DensityOperator) -> Result<f64> {
        let lin = self.linear.evaluate(rho)?;
        Ok(lin - self.penalty_raw(rho.matrix()))
    }

    pub(crate) fn penalty_raw(&self, rho: &CMatrix) -> f64 {
        self.terms.iter().map(|t| t.penalty(rho)).sum()
    }

    /// Linear value and the full nonlinear value together.
    pub fn evaluate_both(&self, rho: &DensityOperator) -> Result<(f64, f64)> {
        let lin = self.linear.evaluate(rho)?;
        Ok((lin, lin - self.penalty_raw(rho.matrix())))
    }

    pub fn to_json(&self) -> Result<String> {
        let lin: WitnessFile = serde_json::from_str(&self.linear.to_json()?)?;
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let (hre, him) = t.h.to_parts();
                let (are, aim) = t.a.to_parts();
                TermFile {
                    h: MatrixParts { re: hre, im: him },
                    a: MatrixParts { re: are, im: aim },
                    weight: t.weight,
                }
            })
            .collect();
        Ok(serde_json::to_string_pretty(&NonlinearFile {
            linear: lin,
            terms,
            family: self.family,
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: NonlinearFile = serde_json::from_str(s)?;
        let linear = LinearWitness::from_json(&serde_json::to_string(&f.linear)?)?;
        let terms = f
            .terms
            .iter()
            .map(|t| {
                QuadraticTerm::from_split(
                    CMatrix::from_parts(&t.h.re, &t.h.im)?,
                    CMatrix::from_parts(&t.a.re, &t.a.im)?,
                    t.weight,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(linear, terms, f.family)
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
pub struct MatrixParts {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermFile {
    pub h: MatrixParts,
    pub a: MatrixParts,
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonlinearFile {
    pub linear: WitnessFile,
    pub terms: Vec<TermFile>,
    pub family: Family,
}

fn same_dims(phi: &PureState, psi: &PureState) -> Result<DimPair> {
    if phi.dims() != psi.dims() {
        return Err(dim_err(phi.dims(), psi.dims()));
    }
    Ok(phi.dims())
}

/// `W = (|φ⟩⟨φ|)^{T_B}`.
pub fn pt_witness(phi: &PureState) -> Result<LinearWitness> {
    LinearWitness::from_pt_of(&phi.projector(), phi.dims(), Provenance::NptEigenvector)
}

/// Single term `X = |φ⟩⟨ψ|` with weight `1/s(ψ)`.
pub fn improve_f1(phi: &PureState, psi: &PureState) -> Result<NonlinearWitness> {
    let dims = same_dims(phi, psi)?;
    let x = CMatrix::outer(phi.vec(), psi.vec());
    let term = QuadraticTerm::from_x(&x, dims, 1.0 / max_schmidt_sq(psi))?;
    NonlinearWitness::new(pt_witness(phi)?, vec![term], Family::F1)
}

/// Terms `Xᵢ = |φ⟩⟨ψᵢ|`, weight one, over a full orthonormal basis.
pub fn improve_f2(phi: &PureState, basis: &[PureState]) -> Result<NonlinearWitness> {
    let dims = phi.dims();
    if basis.len() != dims.total() {
        return Err(dim_err(
            format!("{} basis vectors", dims.total()),
            basis.len(),
        ));
    }
    for b in basis {
        same_dims(phi, b)?;
    }
    let deviation = gram_deviation(basis);
    if deviation > tol::ORTHONORMAL {
        return Err(Error::NotOrthonormal { deviation });
    }
    let terms = basis
        .iter()
        .map(|psi| QuadraticTerm::from_x(&CMatrix::outer(phi.vec(), psi.vec()), dims, 1.0))
        .collect::<Result<Vec<_>>>()?;
    NonlinearWitness::new(pt_witness(phi)?, terms, Family::F2)
}

fn gram_deviation(basis: &[PureState]) -> f64 {
    let mut dev = 0.0f64;
    for (i, u) in basis.iter().enumerate() {
        for (j, v) in basis.iter().enumerate() {
            let target = if i == j { ONE } else { ZERO };
            dev = dev.max((matcore::inner(u.vec(), v.vec()) - target).norm());
        }
    }
    dev
}

/// Computational basis of the bipartite space.
pub fn standard_basis(dims: DimPair) -> Vec<PureState> {
    (0..dims.total())
        .map(|k| {
            let mut v = vec![ZERO; dims.total()];
            v[k] = ONE;
            PureState::new(v, dims).expect("unit vector")
        })
        .collect()
}

/// Orthonormal basis whose first element is `φ`.
pub fn completed_basis(phi: &PureState) -> Vec<PureState> {
    crate::states::complete_basis(phi.vec())
        .into_iter()
        .map(|v| PureState::normalized(v, phi.dims()).expect("basis vector"))
        .collect()
}

/// `(detected, lhs, rhs)` of a detection condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub detected: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl Condition {
    fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            detected: lhs < rhs - tol::STRICT,
            lhs,
            rhs,
        }
    }
}

fn pt_and_image(rho: &DensityOperator, phi: &PureState) -> Result<(CMatrix, Vec<C64>, f64)> {
    let dims = rho.dim_pair()?;
    if dims != phi.dims() {
        return Err(dim_err(dims, phi.dims()));
    }
    let pt = rho.partial_transpose()?;
    let v = pt.matvec(phi.vec());
    let lhs = matcore::inner(phi.vec(), &v).re;
    Ok((pt, v, lhs))
}

/// Whether some single-term improvement of `(|φ⟩⟨φ|)^{T_B}` detects `ρ`:
/// `⟨φ|ρ^{T_B}|φ⟩ < (Tr √(Tr_A |v⟩⟨v|))²` with `v = ρ^{T_B}|φ⟩`.
pub fn detect_condition_f1(rho: &DensityOperator, phi: &PureState) -> Result<Condition> {
    let dims = phi.dims();
    let (_, v, lhs) = pt_and_image(rho, phi)?;
    let reduced = partial_trace(&CMatrix::projector(&v), dims, Subsystem::B)?;
    let root = psd_sqrt_clamped(&reduced.hermitian_part());
    let t = root.trace().re;
    Ok(Condition::new(lhs, t * t))
}

/// Whether every full-basis improvement of `(|φ⟩⟨φ|)^{T_B}` detects `ρ`:
/// `⟨φ|ρ^{T_B}|φ⟩ < ⟨φ|(ρ^{T_B})²|φ⟩`.
pub fn detect_condition_f2(rho: &DensityOperator, phi: &PureState) -> Result<Condition> {
    let (_, v, lhs) = pt_and_image(rho, phi)?;
    let rhs = matcore::inner(&v, &v).re;
    Ok(Condition::new(lhs, rhs))
}

/// Partner `ψ` minimizing the single-term witness on `ρ`: the flat
/// superposition of the Schmidt vectors of `ρ^{T_B}|φ⟩`. At this `ψ` the
/// witness value equals `lhs − rhs` of [`detect_condition_f1`].
pub fn optimal_f1_partner(rho: &DensityOperator, phi: &PureState) -> Result<PureState> {
    let (_, v, _) = pt_and_image(rho, phi)?;
    let dims = phi.dims();
    let form = schmidt_of_vector(&v, dims);
    let top = form.coefficients.first().copied().unwrap_or(0.0);
    if top <= tol::NORM {
        return Err(Error::InvalidState(
            "ρ^{T_B}|φ⟩ vanishes; every partner gives the linear value".into(),
        ));
    }
    let mut psi = vec![ZERO; dims.total()];
    for (k, &s) in form.coefficients.iter().enumerate() {
        if s <= top * 1e-10 {
            continue;
        }
        let term = matcore::kron_vec(&form.left[k], &form.right[k]);
        for (p, t) in psi.iter_mut().zip(term) {
            *p += t;
        }
    }
    PureState::normalized(psi, dims)
}

/// The strongest single-term improvement of the NPT witness of `ρ`.
pub fn best_f1_for_state(rho: &DensityOperator) -> Result<NonlinearWitness> {
    let npt = crate::witness::witness_from_npt(rho)?;
    let psi = optimal_f1_partner(rho, &npt.phi)?;
    improve_f1(&npt.phi, &psi)
}

/// Improvement of a general witness `W` through its Jamiołkowski map:
/// with `ε` the map of `W` and `Φ = Σ|ii⟩`, the term is
/// `((𝟙⊗ε)(|ψ⟩⟨Φ|))†` with weight `1/(s(ψ)·λ_max(Tr_A W))`.
/// `ψ` lives on `C^{dA} ⊗ C^{dA}`.
///
/// Only positivity of `W` on product vectors is used, so this also applies
/// to witnesses that are merely nonnegative on a smaller product class
/// (as long as `Tr_A W` is bounded through that class).
pub fn improve_via_map(w: &LinearWitness, psi: &PureState) -> Result<NonlinearWitness> {
    let dims = w.dims();
    if psi.dims() != DimPair::new(dims.a, dims.a)? {
        return Err(dim_err(
            format!("partner on {0}x{0}", dims.a),
            psi.dims(),
        ));
    }
    let eps = map_from_operator(w.matrix(), dims.a, dims.b)?;
    let mut phi = vec![ZERO; dims.a * dims.a];
    for i in 0..dims.a {
        phi[i * dims.a + i] = ONE;
    }
    let y = apply_local(&eps, &CMatrix::outer(psi.vec(), &phi), dims.a)?;
    let reduced = partial_trace(w.matrix(), dims, Subsystem::B)?;
    let top = matcore::herm_eig(&reduced)?.max_value();
    if top <= tol::PSD {
        return Err(Error::InvalidParameter(format!(
            "Tr_A W has no positive eigenvalue (max {top:.3e}); cannot rescale the map"
        )));
    }
    let term = QuadraticTerm::new(y.adjoint(), 1.0 / (max_schmidt_sq(psi) * top))?;
    NonlinearWitness::new(w.clone(), vec![term], Family::PositiveMap)
}

/// Quadratic-form view of a qubit witness in Pauli coordinates:
/// `F = Σ_w l_w⟨σ_w⟩ − Σ_{w,w'} Q_{ww'}⟨σ_w⟩⟨σ_{w'}⟩` with symmetric `Q`.
#[derive(Debug, Clone)]
pub struct PauliForm {
    pub qubits: usize,
    pub linear: Vec<f64>,
    pub quadratic: Vec<Vec<f64>>,
}

impl PauliForm {
    fn empty(n: usize) -> Self {
        let k = 4usize.pow(n as u32);
        Self {
            qubits: n,
            linear: vec![0.0; k],
            quadratic: vec![vec![0.0; k]; k],
        }
    }

    pub(crate) fn add_square(&mut self, weight: f64, g: &[f64]) {
        for (i, gi) in g.iter().enumerate() {
            if *gi == 0.0 {
                continue;
            }
            for (j, gj) in g.iter().enumerate() {
                self.quadratic[i][j] += weight * gi * gj;
            }
        }
    }

    /// Expansion of a constructed witness.
    pub fn from_witness(f: &NonlinearWitness) -> Result<Self> {
        let dims = f.dims();
        let local = local_qubits(dims)?;
        let n = local.len();
        let mut form = Self::empty(n);
        form.linear = real_coefficients(f.linear.matrix(), &local)?;
        for t in &f.terms {
            form.add_square(t.weight, &real_coefficients(&t.h, &local)?);
            form.add_square(t.weight, &real_coefficients(&t.a, &local)?);
        }
        Ok(form)
    }

    /// Form given as a linear Pauli vector and weighted squares of sparse
    /// Pauli combinations.
    pub fn from_squares(
        n: usize,
        linear: &[(f64, Vec<Pauli>)],
        squares: &[(f64, Vec<(f64, Vec<Pauli>)>)],
    ) -> Self {
        let mut form = Self::empty(n);
        form.linear = dense(n, linear);
        for (weight, combo) in squares {
            form.add_square(*weight, &dense(n, combo));
        }
        form
    }

    /// Largest coefficient difference, linear and quadratic parts together.
    pub fn max_diff(&self, other: &PauliForm) -> f64 {
        if self.qubits != other.qubits {
            return f64::INFINITY;
        }
        let lin = self
            .linear
            .iter()
            .zip(&other.linear)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let quad = self
            .quadratic
            .iter()
            .flatten()
            .zip(other.quadratic.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        lin.max(quad)
    }

    /// `Σ l_w e_w − Σ Q_{ww'} e_w e_{w'}` for Pauli expectations `e`.
    pub fn evaluate(&self, expectations: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(expectations).map(|(l, e)| l * e).sum();
        let quad: f64 = self
            .quadratic
            .iter()
            .zip(expectations)
            .map(|(row, ei)| ei * row.iter().zip(expectations).map(|(q, ej)| q * ej).sum::<f64>())
            .sum();
        lin - quad
    }

    /// Human-readable rendering: the linear part, then the quadratic matrix
    /// entries as `q·⟨a⟩⟨b⟩` for `a ≤ b`.
    pub fn render(&self) -> String {
        let words = all_words(self.qubits);
        let label = |w: &[Pauli]| w.iter().map(|p| p.symbol()).collect::<Vec<_>>().join("⊗");
        let mut out = String::from("linear:\n");
        for (w, l) in words.iter().zip(&self.linear) {
            if l.abs() >= 1e-12 {
                out += &format!("  {l:+.6} ⟨{}⟩\n", label(w));
            }
        }
        out += "quadratic (subtracted):\n";
        for i in 0..words.len() {
            for j in i..words.len() {
                let q = if i == j {
                    self.quadratic[i][j]
                } else {
                    self.quadratic[i][j] + self.quadratic[j][i]
                };
                if q.abs() >= 1e-12 {
                    out += &format!("  {q:+.6} ⟨{}⟩⟨{}⟩\n", label(&words[i]), label(&words[j]));
                }
            }
        }
        out
    }
}

fn local_qubits(dims: DimPair) -> Result<Vec<usize>> {
    let split = |d: usize| -> Result<usize> {
        if d.is_power_of_two() && d >= 2 {
            Ok(d.trailing_zeros() as usize)
        } else {
            Err(Error::InvalidParameter(format!(
                "Pauli expansion needs qubit subsystems, got local dimension {d}"
            )))
        }
    };
    Ok(vec![2; split(dims.a)? + split(dims.b)?])
}

fn real_coefficients(m: &CMatrix, local: &[usize]) -> Result<Vec<f64>> {
    Ok(pauli_vector(m, local)?.iter().map(|c| c.re).collect())
}

fn word_index(w: &[Pauli]) -> usize {
    w.iter().fold(0, |acc, p| {
        acc * 4
            + Pauli::ALL
                .iter()
                .position(|q| q == p)
                .expect("Pauli in ALL")
    })
}

fn dense(n: usize, sparse: &[(f64, Vec<Pauli>)]) -> Vec<f64> {
    let mut v = vec![0.0; 4usize.pow(n as u32)];
    for (c, w) in sparse {
        assert_eq!(w.len(), n, "Pauli word length");
        v[word_index(w)] += c;
    }
    v
}

/// `(|φ⁺⟩⟨φ⁺|)^{T_B}` in Pauli coordinates.
fn bell_witness_linear() -> Vec<(f64, Vec<Pauli>)> {
    use Pauli::*;
    vec![
        (0.25, vec![I, I]),
        (0.25, vec![X, X]),
        (0.25, vec![Y, Y]),
        (0.25, vec![Z, Z]),
    ]
}

fn sym(p: Pauli) -> Vec<(f64, Vec<Pauli>)> {
    vec![(1.0, vec![p, Pauli::I]), (1.0, vec![Pauli::I, p])]
}

fn antisym(p: Pauli, q: Pauli) -> Vec<(f64, Vec<Pauli>)> {
    vec![(1.0, vec![p, q]), (-1.0, vec![q, p])]
}

/// Reference form of the single-term improvement with `φ = |φ⁺⟩` and
/// `ψ = (|01⟩+|10⟩)/√2`.
pub fn reference_f1_bell() -> PauliForm {
    use Pauli::*;
    PauliForm::from_squares(
        2,
        &bell_witness_linear(),
        &[(1.0 / 8.0, sym(X)), (1.0 / 8.0, antisym(Y, Z))],
    )
}

/// Reference form of the full-basis improvement with `φ = |φ⁺⟩` over the
/// Bell basis.
pub fn reference_f2_bell() -> PauliForm {
    use Pauli::*;
    let c = 1.0 / 16.0;
    PauliForm::from_squares(
        2,
        &bell_witness_linear(),
        &[
            (c, sym(X)),
            (c, antisym(Y, Z)),
            (c, sym(Y)),
            (c, antisym(X, Z)),
            (c, sym(Z)),
            (c, antisym(X, Y)),
            (c, bell_witness_linear()),
        ],
    )
}

/// `(|01⟩+|10⟩)/√2`.
pub fn psi_plus() -> PureState {
    crate::states::bell_states()[2].clone()
}

/// Machine-built single-term witness for the reference example.
pub fn example_f1_bell() -> Result<NonlinearWitness> {
    improve_f1(&crate::states::bell_states()[0], &psi_plus())
}

/// Machine-built full-basis witness for the reference example.
pub fn example_f2_bell() -> Result<NonlinearWitness> {
    improve_f2(&crate::states::bell_states()[0], &crate::states::bell_states())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{
        bell_states, derive_seed, is_ppt, random_density, random_pure, random_separable, singlet,
        werner,
    };
    use proptest::prelude::*;

    fn phi_plus() -> PureState {
        bell_states()[0].clone()
    }

    fn d22() -> DimPair {
        DimPair::qubits()
    }

    #[test]
    fn quadratic_term_split() {
        let x = CMatrix::outer(phi_plus().vec(), psi_plus().vec());
        let t = QuadraticTerm::from_x(&x, d22(), 2.0).unwrap();
        assert!(t.h().is_hermitian(1e-12));
        assert!(t.a().is_hermitian(1e-12));
        assert!((t.h() + &t.a().scale(I)).approx_eq(t.xtb(), 1e-14));
        let rho = random_density(d22(), 5);
        let direct = matcore::trace_product(t.xtb(), rho.matrix()).norm_sqr();
        let (h, a) = t.expectations(rho.matrix());
        assert!((direct - h * h - a * a).abs() < 1e-12);
        assert!(QuadraticTerm::new(CMatrix::identity(4), 0.0).is_err());
        assert!(QuadraticTerm::new(CMatrix::identity(4), f64::NAN).is_err());
    }

    #[test]
    fn f1_reference_form_matches() {
        let built = PauliForm::from_witness(&example_f1_bell().unwrap()).unwrap();
        assert!(built.max_diff(&reference_f1_bell()) <= 1e-12);
        let f = example_f1_bell().unwrap();
        assert!((f.terms()[0].weight() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn f2_reference_form_matches() {
        let built = PauliForm::from_witness(&example_f2_bell().unwrap()).unwrap();
        let reference = reference_f2_bell();
        // the construction subtracts ⟨W⟩² with weight one; the reference
        // form carries 1/16 on that square, everything else agrees
        let mut corrected = reference.clone();
        corrected.add_square(15.0 / 16.0, &dense(2, &bell_witness_linear()));
        assert!(built.max_diff(&corrected) <= 1e-12);
        assert!((built.max_diff(&reference) - 15.0 / 256.0).abs() < 1e-12);
        assert!(built.max_diff(&reference_f1_bell()) > 1e-3);
    }

    #[test]
    fn reference_f2_singlet_values() {
        let e = |rho: &DensityOperator| -> Vec<f64> {
            all_words(2)
                .iter()
                .map(|w| rho.expect(&matcore::pauli_word(w)).unwrap().re)
                .collect()
        };
        let form = reference_f2_bell();
        assert!((form.evaluate(&e(&singlet())) + 33.0 / 64.0).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(&[2, 2]);
        assert!((form.evaluate(&e(&mixed)) - 63.0 / 256.0).abs() < 1e-12);
    }

    #[test]
    fn pauli_form_evaluate_agrees() {
        let f = example_f2_bell().unwrap();
        let form = PauliForm::from_witness(&f).unwrap();
        let rho = random_density(d22(), 11);
        let e: Vec<f64> = all_words(2)
            .iter()
            .map(|w| rho.expect(&matcore::pauli_word(w)).unwrap().re)
            .collect();
        assert!((form.evaluate(&e) - f.evaluate(&rho).unwrap()).abs() < 1e-12);
        assert!(form.render().contains("⟨σx⊗1⟩"));
    }

    #[test]
    fn werner_values() {
        let f1 = example_f1_bell().unwrap();
        for i in 0..=20 {
            let p = i as f64 * 0.05;
            let rho = werner(p).unwrap();
            let lambda = (1.0 - 3.0 * p) / 4.0;
            let (lin, v1) = f1.evaluate_both(&rho).unwrap();
            assert!((lin - lambda).abs() < 1e-12);
            assert!((v1 - lambda).abs() < 1e-12);
        }
    }

    #[test]
    fn f2_singlet_and_mixed() {
        // value is lhs − rhs of the full-basis condition for any basis
        let f2 = example_f2_bell().unwrap();
        assert!((f2.evaluate(&singlet()).unwrap() + 0.75).abs() < 1e-12);
        let mixed = DensityOperator::maximally_mixed(&[2, 2]);
        assert!((f2.evaluate(&mixed).unwrap() - 3.0 / 16.0).abs() < 1e-12);
    }

    #[test]
    fn f2_rejects_bad_basis() {
        let mut basis = bell_states().to_vec();
        basis[1] = basis[0].clone();
        assert!(matches!(
            improve_f2(&phi_plus(), &basis),
            Err(Error::NotOrthonormal { .. })
        ));
        assert!(improve_f2(&phi_plus(), &bell_states()[..3]).is_err());
    }

    #[test]
    fn condition_examples() {
        let c = detect_condition_f1(&singlet(), &phi_plus()).unwrap();
        assert!(c.detected);
        assert!((c.lhs + 0.5).abs() < 1e-12 && (c.rhs - 0.5).abs() < 1e-12);

        let mixed = DensityOperator::maximally_mixed(&[2, 2]);
        let c = detect_condition_f1(&mixed, &phi_plus()).unwrap();
        assert!(!c.detected);
        assert!(detect_condition_f1(&werner(0.4).unwrap(), &phi_plus()).unwrap().detected);

        let c = detect_condition_f2(&mixed, &phi_plus()).unwrap();
        assert!(!c.detected);
        assert!((c.lhs - 0.25).abs() < 1e-14 && (c.rhs - 1.0 / 16.0).abs() < 1e-14);

        let prod = DensityOperator::from_pure(&PureState::from_real(&[1.0, 0.0, 0.0, 0.0], d22()).unwrap());
        let c = detect_condition_f2(&prod, &phi_plus()).unwrap();
        assert!(!c.detected);
        assert!((c.lhs - 0.5).abs() < 1e-14 && (c.rhs - 0.5).abs() < 1e-14);
    }

    #[test]
    fn werner_thresholds() {
        for i in 0..=20 {
            let p = i as f64 * 0.05;
            let rho = werner(p).unwrap();
            let lam = (1.0 - 3.0 * p) / 4.0;
            let want = p > 1.0 / 3.0 + 1e-9;
            let c2 = detect_condition_f2(&rho, &phi_plus()).unwrap();
            assert!((c2.lhs - lam).abs() < 1e-12 && (c2.rhs - lam * lam).abs() < 1e-12);
            assert_eq!(c2.detected, want, "p={p}");
            let c1 = detect_condition_f1(&rho, &phi_plus()).unwrap();
            assert!((c1.rhs - 2.0 * lam * lam).abs() < 1e-10, "p={p}");
            assert_eq!(c1.detected, want, "p={p}");
        }
    }

    #[test]
    fn optimal_partner_attains_condition() {
        for seed in 0..200 {
            let rho = random_density(d22(), seed);
            let phi = random_pure(d22(), derive_seed(seed, 1));
            let c = detect_condition_f1(&rho, &phi).unwrap();
            let psi = optimal_f1_partner(&rho, &phi).unwrap();
            let v = improve_f1(&phi, &psi).unwrap().evaluate(&rho).unwrap();
            assert!((v - (c.lhs - c.rhs)).abs() < 1e-9, "seed {seed}");
            // no sampled partner beats the optimum
            for k in 0..5 {
                let other = random_pure(d22(), derive_seed(seed, 100 + k));
                let w = improve_f1(&phi, &other).unwrap().evaluate(&rho).unwrap();
                assert!(w >= v - 1e-9);
            }
        }
    }

    #[test]
    fn singlet_optimal_partner_is_phi_plus() {
        let psi = optimal_f1_partner(&singlet(), &phi_plus()).unwrap();
        assert!((psi.overlap(&phi_plus()).norm() - 1.0).abs() < 1e-10);
        let v = improve_f1(&phi_plus(), &psi).unwrap().evaluate(&singlet()).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
    }

    #[test]
    fn f2_condition_matches_basis_witnesses() {
        let mut hits = 0;
        for seed in 0..300 {
            let rho = random_density(d22(), seed);
            let c = detect_condition_f2(&rho, &phi_plus()).unwrap();
            let v1 = improve_f2(&phi_plus(), &bell_states()).unwrap().evaluate(&rho).unwrap();
            let v2 = improve_f2(&phi_plus(), &completed_basis(&phi_plus()))
                .unwrap()
                .evaluate(&rho)
                .unwrap();
            // every full basis gives the same value lhs − rhs
            assert!((v1 - (c.lhs - c.rhs)).abs() < 1e-10);
            assert!((v2 - v1).abs() < 1e-10);
            assert_eq!(c.detected, v1 < -tol::STRICT);
            hits += c.detected as usize;
        }
        assert!(hits > 0);
    }

    #[test]
    fn ppt_states_never_satisfy_conditions() {
        let mut checked = 0;
        for seed in 0..3000 {
            let rho = random_density(d22(), seed);
            if !is_ppt(&rho).unwrap() {
                continue;
            }
            let phi = random_pure(d22(), derive_seed(seed, 9));
            assert!(!detect_condition_f1(&rho, &phi).unwrap().detected);
            assert!(!detect_condition_f2(&rho, &phi).unwrap().detected);
            checked += 1;
        }
        assert!(checked > 100);
    }

    #[test]
    fn map_route_reproduces_pt_bound_on_bell_witness() {
        let w = pt_witness(&phi_plus()).unwrap();
        let psi = PureState::maximally_entangled(d22());
        let f = improve_via_map(&w, &psi).unwrap();
        for i in 0..500 {
            let sep = random_separable(d22(), 8, derive_seed(21, i)).unwrap();
            assert!(f.evaluate(&sep).unwrap() >= -1e-9);
        }
        let (lin, nl) = f.evaluate_both(&singlet()).unwrap();
        assert!(nl < lin);
    }

    #[test]
    fn map_route_on_non_decomposable_form() {
        // a witness that is not a partial transpose of a rank-one projector
        let w = &CMatrix::identity(4).scale_real(0.5) - &bell_states()[3].projector();
        let lw = LinearWitness::new(w, d22(), Provenance::User).unwrap();
        assert!((lw.evaluate(&singlet()).unwrap() + 0.5).abs() < 1e-12);
        for seed in 0..20 {
            let psi = random_pure(d22(), seed);
            let f = improve_via_map(&lw, &psi).unwrap();
            for i in 0..200 {
                let sep = random_separable(d22(), 8, derive_seed(seed, i)).unwrap();
                assert!(f.evaluate(&sep).unwrap() >= -1e-9);
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let f = example_f2_bell().unwrap();
        let back = NonlinearWitness::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back.family(), Family::F2);
        let rho = random_density(d22(), 4);
        assert!((back.evaluate(&rho).unwrap() - f.evaluate(&rho).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let f = example_f1_bell().unwrap();
        let rho = random_density(DimPair::new(2, 3).unwrap(), 1);
        assert!(f.evaluate(&rho).is_err());
        assert!(detect_condition_f1(&rho, &phi_plus()).is_err());
        assert!(improve_f1(&phi_plus(), &random_pure(DimPair::new(2, 3).unwrap(), 1)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn hierarchy_on_random_states(seed in any::<u64>()) {
            let rho = random_density(d22(), seed);
            let phi = random_pure(d22(), derive_seed(seed, 3));
            let c1 = detect_condition_f1(&rho, &phi).unwrap();
            let c2 = detect_condition_f2(&rho, &phi).unwrap();
            prop_assert!(c1.rhs >= c2.rhs - 1e-12);
            if c2.detected { prop_assert!(c1.detected); }
            if c1.detected { prop_assert!(!is_ppt(&rho).unwrap()); }
        }

        #[test]
        fn nonlinear_below_linear(seed in any::<u64>()) {
            let rho = random_density(d22(), seed);
            let phi = random_pure(d22(), derive_seed(seed, 1));
            let psi = random_pure(d22(), derive_seed(seed, 2));
            let (lin, nl) = improve_f1(&phi, &psi).unwrap().evaluate_both(&rho).unwrap();
            prop_assert!(nl <= lin + 1e-12);
        }

        #[test]
        fn concave_on_pairs(seed in any::<u64>(), t in 0.0f64..1.0) {
            let r1 = random_density(d22(), derive_seed(seed, 1));
            let r2 = random_density(d22(), derive_seed(seed, 2));
            let mix = DensityOperator::mixture(&[(t, &r1), (1.0 - t, &r2)]).unwrap();
            let f = example_f2_bell().unwrap();
            let lhs = f.evaluate(&mix).unwrap();
            let rhs = t * f.evaluate(&r1).unwrap() + (1.0 - t) * f.evaluate(&r2).unwrap();
            prop_assert!(lhs >= rhs - 1e-9);
        }
    }
}

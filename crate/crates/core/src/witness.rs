//! Linear entanglement witnesses: the NPT-eigenvector construction, the
//! positive-map construction via the adjoint map, the Jamiołkowski
//! isomorphism, and Pauli readout for qubit systems.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::matcore::{
    self, hermitian_basis, kron, partial_transpose, trace_inner, CMatrix, DimPair, HermEig, Pauli,
    C64, ONE, ZERO,
};
use crate::states::{fix_phase, DensityOperator, PureState};
use crate::tol;

/// Where a witness came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    NptEigenvector,
    PositiveMap,
    User,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::NptEigenvector => "npt-eigenvector",
            Provenance::PositiveMap => "positive-map",
            Provenance::User => "user",
        })
    }
}

/// Hermitian observable `W` with `Tr(Wρ) ≥ 0` on separable states.
#[derive(Debug, Clone)]
pub struct LinearWitness {
    w: CMatrix,
    dims: DimPair,
    provenance: Provenance,
}

impl LinearWitness {
    pub fn new(w: CMatrix, dims: DimPair, provenance: Provenance) -> Result<Self> {
        if w.rows() != dims.total() || w.cols() != dims.total() {
            return Err(dim_err(
                format!("{0}x{0} operator on {dims}", dims.total()),
                format!("{}x{}", w.rows(), w.cols()),
            ));
        }
        let deviation = w.hermitian_deviation();
        if deviation > tol::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self {
            w: w.hermitian_part(),
            dims,
            provenance,
        })
    }

    /// `W = P^{T_B}`.
    pub fn from_pt_of(p: &CMatrix, dims: DimPair, provenance: Provenance) -> Result<Self> {
        Self::new(partial_transpose(p, dims)?, dims, provenance)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    pub fn dims(&self) -> DimPair {
        self.dims
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// `Tr(Wρ)`; the imaginary residue is discarded.
    pub fn evaluate(&self, rho: &DensityOperator) -> Result<f64> {
        let d = rho.dim_pair()?;
        if d != self.dims {
            return Err(dim_err(self.dims, d));
        }
        Ok(rho.expect(&self.w)?.re)
    }

    pub fn to_json(&self) -> Result<String> {
        let (re, im) = self.w.to_parts();
        Ok(serde_json::to_string_pretty(&WitnessFile {
            dims: vec![self.dims.a, self.dims.b],
            re,
            im,
            provenance: self.provenance,
        })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: WitnessFile = serde_json::from_str(s)?;
        let dims = match f.dims.as_slice() {
            [a, b] => DimPair::new(*a, *b)?,
            other => return Err(dim_err("[dA, dB]", format!("{other:?}"))),
        };
        Self::new(CMatrix::from_parts(&f.re, &f.im)?, dims, f.provenance)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// State schema plus a `provenance` tag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub dims: Vec<usize>,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

/// Output of [`witness_from_npt`].
#[derive(Debug, Clone)]
pub struct NptWitness {
    pub witness: LinearWitness,
    pub lambda_min: f64,
    pub phi: PureState,
}

/// Index of the minimal eigenvalue; among degenerate minima the one listed
/// first in the descending order wins.
pub(crate) fn min_index(eig: &HermEig) -> usize {
    let min = eig.min_value();
    eig.values
        .iter()
        .position(|&v| v - min <= 1e-12)
        .expect("non-empty spectrum")
}

/// Minimal eigenpair of `ρ^{T_B}`, phase-fixed. Defined for any state.
pub fn min_pt_eigenpair(rho: &DensityOperator) -> Result<(f64, PureState)> {
    let dims = rho.dim_pair()?;
    let eig = matcore::herm_eig(&rho.partial_transpose()?)?;
    let idx = min_index(&eig);
    let phi = PureState::normalized(fix_phase(&eig.vector(idx)), dims)?;
    Ok((eig.values[idx], phi))
}

/// `W = (|φ⟩⟨φ|)^{T_B}` with `φ` the eigenvector for the most negative
/// eigenvalue of `ρ^{T_B}`.
pub fn witness_from_npt(rho: &DensityOperator) -> Result<NptWitness> {
    let dims = rho.dim_pair()?;
    let (lambda_min, phi) = min_pt_eigenpair(rho)?;
    if lambda_min >= -tol::PSD {
        return Err(Error::NotNpt {
            min_eigenvalue: lambda_min,
        });
    }
    let witness = LinearWitness::from_pt_of(&phi.projector(), dims, Provenance::NptEigenvector)?;
    Ok(NptWitness {
        witness,
        lambda_min,
        phi,
    })
}

/// One term `c·σ_{w₁}⊗…⊗σ_{wₙ}` of a Pauli expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub word: Vec<Pauli>,
}

impl PauliTerm {
    pub fn label(&self) -> String {
        self.word
            .iter()
            .map(|p| p.symbol())
            .collect::<Vec<_>>()
            .join("⊗")
    }
}

/// Number of qubits if every local dimension is 2.
pub(crate) fn qubit_count(m: &CMatrix, local_dims: &[usize]) -> Result<usize> {
    if local_dims.is_empty() || local_dims.iter().any(|&d| d != 2) {
        return Err(Error::InvalidParameter(format!(
            "Pauli expansion needs qubit subsystems, got dims {local_dims:?}"
        )));
    }
    let n = local_dims.len();
    if m.rows() != 1 << n || m.cols() != 1 << n {
        return Err(dim_err(
            format!("{0}x{0}", 1 << n),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    Ok(n)
}

pub(crate) fn all_words(n: usize) -> Vec<Vec<Pauli>> {
    (0..4usize.pow(n as u32))
        .map(|mut idx| {
            let mut w = vec![Pauli::I; n];
            for slot in w.iter_mut().rev() {
                *slot = Pauli::ALL[idx % 4];
                idx /= 4;
            }
            w
        })
        .collect()
}

/// Dense vector of Pauli coefficients `Tr(M·σ_w)/2ⁿ` over all `4ⁿ` words in
/// lexicographic order (I < X < Y < Z).
pub fn pauli_vector(m: &CMatrix, local_dims: &[usize]) -> Result<Vec<C64>> {
    let n = qubit_count(m, local_dims)?;
    let scale = 1.0 / (1u64 << n) as f64;
    Ok(all_words(n)
        .iter()
        .map(|w| matcore::trace_product(m, &matcore::pauli_word(w)) * scale)
        .collect())
}

/// `M = Σ c_w σ_w` with real `c_w` for Hermitian `M`; terms with
/// `|c_w| < 1e−12` are dropped.
pub fn pauli_decompose(m: &CMatrix, local_dims: &[usize]) -> Result<Vec<PauliTerm>> {
    let n = qubit_count(m, local_dims)?;
    let deviation = m.hermitian_deviation();
    if deviation > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    let coeffs = pauli_vector(m, local_dims)?;
    Ok(all_words(n)
        .into_iter()
        .zip(coeffs)
        .filter(|(_, c)| c.re.abs() >= 1e-12)
        .map(|(word, c)| PauliTerm {
            coefficient: c.re,
            word,
        })
        .collect())
}

pub fn pauli_reconstruct(terms: &[PauliTerm], n: usize) -> CMatrix {
    terms.iter().fold(CMatrix::zeros(1 << n, 1 << n), |acc, t| {
        &acc + &matcore::pauli_word(&t.word).scale_real(t.coefficient)
    })
}

pub fn format_pauli(terms: &[PauliTerm]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let sign = if t.coefficient < 0.0 { "-" } else if i > 0 { "+" } else { "" };
            format!("{sign}{:.6}·{}", t.coefficient.abs(), t.label())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A linear map `B(C^{d_in}) → B(C^{d_out})`.
pub trait OperatorMap: Send + Sync {
    fn input_dim(&self) -> usize;
    fn output_dim(&self) -> usize;
    fn apply(&self, x: &CMatrix) -> Result<CMatrix>;
}

fn check_input(map: &dyn OperatorMap, x: &CMatrix) -> Result<()> {
    let d = map.input_dim();
    if x.rows() != d || x.cols() != d {
        return Err(dim_err(format!("{d}x{d} input"), format!("{}x{}", x.rows(), x.cols())));
    }
    Ok(())
}

/// Map defined by its Jamiołkowski operator `E` on `H_in ⊗ H_out`:
/// `ε(X) = Tr_in(E·(Xᵀ ⊗ 𝟙))`.
#[derive(Debug, Clone)]
pub struct ChoiMap {
    choi: CMatrix,
    d_in: usize,
    d_out: usize,
}

impl ChoiMap {
    pub fn choi(&self) -> &CMatrix {
        &self.choi
    }

    /// Hermiticity-preserving iff the operator is Hermitian.
    pub fn is_hermiticity_preserving(&self) -> bool {
        self.choi.is_hermitian(tol::HERMITIAN)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            choi: self.choi.scale_real(s),
            d_in: self.d_in,
            d_out: self.d_out,
        }
    }
}

impl OperatorMap for ChoiMap {
    fn input_dim(&self) -> usize {
        self.d_in
    }

    fn output_dim(&self) -> usize {
        self.d_out
    }

    fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_input(self, x)?;
        let (di, dout) = (self.d_in, self.d_out);
        // out[c, c'] = Σ_{b,b'} E[(b,c),(b',c')] · X[b,b']
        Ok(CMatrix::from_fn(dout, dout, |cc, cp| {
            let mut acc = ZERO;
            for b in 0..di {
                for bp in 0..di {
                    acc += self.choi[(b * dout + cc, bp * dout + cp)] * x[(b, bp)];
                }
            }
            acc
        }))
    }
}

/// Transposition on `d × d` matrices.
#[derive(Debug, Clone, Copy)]
pub struct Transposition(pub usize);

impl OperatorMap for Transposition {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_input(self, x)?;
        Ok(x.transpose())
    }
}

/// Identity channel on `d × d` matrices.
#[derive(Debug, Clone, Copy)]
pub struct IdentityMap(pub usize);

impl OperatorMap for IdentityMap {
    fn input_dim(&self) -> usize {
        self.0
    }
    fn output_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_input(self, x)?;
        Ok(x.clone())
    }
}

/// Closure-backed map.
pub struct FnMap<F> {
    pub d_in: usize,
    pub d_out: usize,
    pub f: F,
}

impl<F> OperatorMap for FnMap<F>
where
    F: Fn(&CMatrix) -> CMatrix + Send + Sync,
{
    fn input_dim(&self) -> usize {
        self.d_in
    }
    fn output_dim(&self) -> usize {
        self.d_out
    }
    fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        check_input(self, x)?;
        Ok((self.f)(x))
    }
}

/// Interpret `E` on `C^{d_in} ⊗ C^{d_out}` as a map.
pub fn map_from_operator(e: &CMatrix, d_in: usize, d_out: usize) -> Result<ChoiMap> {
    let n = d_in * d_out;
    if e.rows() != n || e.cols() != n {
        return Err(dim_err(
            format!("{n}x{n} operator on {d_in}x{d_out}"),
            format!("{}x{}", e.rows(), e.cols()),
        ));
    }
    Ok(ChoiMap {
        choi: e.clone(),
        d_in,
        d_out,
    })
}

/// `E = (𝟙 ⊗ ε)(|φ⁺⟩⟨φ⁺|)` with unnormalized `|φ⁺⟩ = Σ|ii⟩`, i.e.
/// `E[(i,k),(j,l)] = ε(|i⟩⟨j|)[k,l]`.
pub fn operator_from_map(map: &dyn OperatorMap) -> Result<CMatrix> {
    let (di, dout) = (map.input_dim(), map.output_dim());
    let mut e = CMatrix::zeros(di * dout, di * dout);
    for i in 0..di {
        for j in 0..di {
            let mut unit = CMatrix::zeros(di, di);
            unit[(i, j)] = ONE;
            let img = map.apply(&unit)?;
            if img.rows() != dout || img.cols() != dout {
                return Err(dim_err(dout, img.rows()));
            }
            for k in 0..dout {
                for l in 0..dout {
                    e[(i * dout + k, j * dout + l)] = img[(k, l)];
                }
            }
        }
    }
    Ok(e)
}

/// `(𝟙_A ⊗ ε)(M)` for `M` on `C^{dA} ⊗ C^{d_in}`.
pub fn apply_local(map: &dyn OperatorMap, m: &CMatrix, da: usize) -> Result<CMatrix> {
    let (di, dout) = (map.input_dim(), map.output_dim());
    if m.rows() != da * di || m.cols() != da * di {
        return Err(dim_err(
            format!("{0}x{0} operator on {da}x{di}", da * di),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    let mut out = CMatrix::zeros(da * dout, da * dout);
    for i in 0..da {
        for j in 0..da {
            let block = CMatrix::from_fn(di, di, |k, l| m[(i * di + k, j * di + l)]);
            let img = map.apply(&block)?;
            for k in 0..dout {
                for l in 0..dout {
                    out[(i * dout + k, j * dout + l)] = img[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Matrix of a map in the orthonormal Hermitian operator bases of input
/// and output: `M[a,b] = Tr(F_a† ε(G_b))`.
pub fn map_matrix(map: &dyn OperatorMap) -> Result<CMatrix> {
    let gin = hermitian_basis(map.input_dim());
    let gout = hermitian_basis(map.output_dim());
    let images = gin.iter().map(|g| map.apply(g)).collect::<Result<Vec<_>>>()?;
    let mut m = CMatrix::zeros(gout.len(), gin.len());
    for (b, img) in images.iter().enumerate() {
        for (a, f) in gout.iter().enumerate() {
            m[(a, b)] = trace_inner(f, img)?;
        }
    }
    Ok(m)
}

/// Adjoint map with respect to `Tr(X†Y)`, returned in Jamiołkowski form.
pub fn adjoint_map(map: &dyn OperatorMap) -> Result<ChoiMap> {
    let m = map_matrix(map)?;
    let madj = m.adjoint();
    let gin = hermitian_basis(map.input_dim());
    let gout = hermitian_basis(map.output_dim());
    let adj = FnMap {
        d_in: map.output_dim(),
        d_out: map.input_dim(),
        f: move |y: &CMatrix| {
            let coords: Vec<C64> = gout
                .iter()
                .map(|f| trace_inner(f, y).expect("shape checked"))
                .collect();
            let back = madj.matvec(&coords);
            gin.iter()
                .zip(back)
                .fold(CMatrix::zeros(gin[0].rows(), gin[0].rows()), |acc, (g, w)| {
                    &acc + &g.scale(w)
                })
        },
    };
    let e = operator_from_map(&adj)?;
    map_from_operator(&e, map.output_dim(), map.input_dim())
}

/// Largest singular value of the map as a linear operator.
pub fn map_norm(map: &dyn OperatorMap) -> Result<f64> {
    Ok(matcore::svd(&map_matrix(map)?).singular_values[0])
}

/// Output of [`witness_from_positive_map`].
#[derive(Debug, Clone)]
pub struct MapWitness {
    pub witness: LinearWitness,
    pub lambda_min: f64,
    pub phi: PureState,
    /// Factor the map was divided by before use.
    pub scale: f64,
}

/// `W = (𝟙_A ⊗ ε)⁺(|φ⟩⟨φ|)` where `φ` is the minimal eigenvector of
/// `(𝟙_A ⊗ ε)(ρ)`. The map is first divided by its largest singular value.
pub fn witness_from_positive_map(map: &dyn OperatorMap, rho: &DensityOperator) -> Result<MapWitness> {
    let dims = rho.dim_pair()?;
    if dims.b != map.input_dim() {
        return Err(dim_err(
            format!("state with B dimension {}", map.input_dim()),
            dims,
        ));
    }
    let scale = map_norm(map)?;
    if scale <= 0.0 {
        return Err(Error::InvalidParameter("zero map".into()));
    }
    let choi = operator_from_map(map)?.scale_real(1.0 / scale);
    let scaled = map_from_operator(&choi, map.input_dim(), map.output_dim())?;
    let image = apply_local(&scaled, rho.matrix(), dims.a)?;
    let eig = matcore::herm_eig_tol(&image, tol::ETA_HERMITIAN)?;
    let idx = min_index(&eig);
    let lambda_min = eig.values[idx];
    if lambda_min >= -tol::PSD {
        return Err(Error::MapDoesNotDetect {
            min_eigenvalue: lambda_min,
        });
    }
    let out_dims = DimPair::new(dims.a, map.output_dim())?;
    let phi = PureState::normalized(fix_phase(&eig.vector(idx)), out_dims)?;
    let adj = adjoint_map(&scaled)?;
    let w = apply_local(&adj, &phi.projector(), dims.a)?;
    let witness = LinearWitness::new(w.hermitian_part(), dims, Provenance::PositiveMap)?;
    Ok(MapWitness {
        witness,
        lambda_min,
        phi,
        scale,
    })
}

/// `|a⟩⟨a| ⊗ |b⟩⟨b|` helper for product-state checks.
pub fn product_projector(a: &[C64], b: &[C64]) -> CMatrix {
    kron(&CMatrix::projector(a), &CMatrix::projector(b))
}

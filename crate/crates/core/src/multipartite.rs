//! Three-qubit full-separability witnesses and their improvement by the
//! minimum over the three bipartitions.

use std::fmt;

use crate::error::{dim_err, Error, Result};
use crate::matcore::{self, kron, kron_vec, partial_transpose, CMatrix, DimPair, C64, ONE, ZERO};
use crate::nonlinear::{improve_via_map, Family, NonlinearWitness, QuadraticTerm};
use crate::par::{self, Execution};
use crate::states::{
    derive_seed, random_fully_separable_multi, random_ket, rng_from_seed, DensityOperator, PureState,
};
use crate::tol;
use crate::witness::{LinearWitness, Provenance};

const QUBITS: [usize; 3] = [2, 2, 2];

/// The three ways to split qubits `A`, `B`, `C` into one party and a pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bipartition {
    /// `A | BC`
    ABc,
    /// `AB | C`
    AbC,
    /// `AC | B`
    AcB,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [Bipartition::ABc, Bipartition::AbC, Bipartition::AcB];

    pub fn label(self) -> &'static str {
        match self {
            Bipartition::ABc => "A|BC",
            Bipartition::AbC => "AB|C",
            Bipartition::AcB => "AC|B",
        }
    }

    /// Qubit order after lifting: the singleton party comes first.
    pub fn order(self) -> [usize; 3] {
        match self {
            Bipartition::ABc => [0, 1, 2],
            Bipartition::AbC => [2, 1, 0],
            Bipartition::AcB => [1, 0, 2],
        }
    }

    pub fn dims(self) -> DimPair {
        DimPair { a: 2, b: 4 }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

fn permute_index(idx: usize, order: [usize; 3]) -> usize {
    let bit = |q: usize| (idx >> (2 - q)) & 1;
    (bit(order[0]) << 2) | (bit(order[1]) << 1) | bit(order[2])
}

/// Reorders qubits of an 8×8 operator: new qubit `k` is old qubit `order[k]`.
pub fn permute_qubits(m: &CMatrix, order: [usize; 3]) -> Result<CMatrix> {
    if m.rows() != 8 || m.cols() != 8 {
        return Err(dim_err("8x8 three-qubit operator", format!("{}x{}", m.rows(), m.cols())));
    }
    let mut out = CMatrix::zeros(8, 8);
    for i in 0..8 {
        for j in 0..8 {
            out[(permute_index(i, order), permute_index(j, order))] = m[(i, j)];
        }
    }
    Ok(out)
}

fn permute_vec(v: &[C64], order: [usize; 3]) -> Vec<C64> {
    let mut out = vec![ZERO; 8];
    for (i, z) in v.iter().enumerate() {
        out[permute_index(i, order)] = *z;
    }
    out
}

fn check_three_qubits(rho: &DensityOperator) -> Result<()> {
    if rho.dims() != QUBITS {
        return Err(dim_err("dims [2, 2, 2]", format!("{:?}", rho.dims())));
    }
    Ok(())
}

/// The state as a `2 × 4` bipartite state across `cut`.
pub fn lift(rho: &DensityOperator, cut: Bipartition) -> Result<DensityOperator> {
    check_three_qubits(rho)?;
    let m = permute_qubits(rho.matrix(), cut.order())?;
    Ok(DensityOperator::from_raw(m, vec![2, 4]))
}

/// Inverse of [`lift`].
pub fn unlift(rho: &DensityOperator, cut: Bipartition) -> Result<DensityOperator> {
    if rho.dims() != [2, 4] {
        return Err(dim_err("dims [2, 4]", format!("{:?}", rho.dims())));
    }
    let m = permute_qubits(rho.matrix(), cut.order())?;
    Ok(DensityOperator::from_raw(m, QUBITS.to_vec()))
}

/// Random mixture of triple products `|a⟩⟨a|⊗|b⟩⟨b|⊗|c⟩⟨c|`.
pub fn random_fully_separable(seed: u64, terms: usize) -> Result<DensityOperator> {
    random_fully_separable_multi(&QUBITS, terms, seed)
}

/// Pure state that is a product across `cut` (qubit pair entangled).
pub fn random_biseparable_pure(cut: Bipartition, seed: u64) -> PureState {
    let mut rng = rng_from_seed(seed);
    let single = random_ket(2, &mut rng);
    let pair = random_ket(4, &mut rng);
    let lifted = kron_vec(&single, &pair);
    PureState::new(permute_vec(&lifted, cut.order()), DimPair { a: 2, b: 4 })
        .expect("unit vector")
}

/// Hermitian three-qubit observable meant to be nonnegative on fully
/// separable states.
#[derive(Debug, Clone)]
pub struct TripartiteWitness {
    w: CMatrix,
}

impl TripartiteWitness {
    pub fn new(w: CMatrix) -> Result<Self> {
        if w.rows() != 8 || w.cols() != 8 {
            return Err(dim_err("8x8", format!("{}x{}", w.rows(), w.cols())));
        }
        let deviation = w.hermitian_deviation();
        if deviation > tol::HERMITIAN {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { w: w.hermitian_part() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.w
    }

    pub fn evaluate(&self, rho: &DensityOperator) -> Result<f64> {
        check_three_qubits(rho)?;
        Ok(rho.expect(&self.w)?.re)
    }

    /// The witness seen across `cut` as a `2 × 4` operator.
    pub fn lifted(&self, cut: Bipartition) -> Result<LinearWitness> {
        LinearWitness::new(permute_qubits(&self.w, cut.order())?, cut.dims(), Provenance::User)
    }

    /// `½𝟙 − |GHZ⟩⟨GHZ|`.
    pub fn ghz() -> Self {
        Self::new(&CMatrix::identity(8).scale_real(0.5) - &CMatrix::projector(&ghz_vector()))
            .expect("Hermitian")
    }

    /// `(4/9)𝟙 − |W⟩⟨W|` with `|W⟩ = (|001⟩+|010⟩+|100⟩)/√3`.
    pub fn w_state() -> Self {
        Self::new(&CMatrix::identity(8).scale_real(4.0 / 9.0) - &CMatrix::projector(&w_vector()))
            .expect("Hermitian")
    }
}

pub fn ghz_vector() -> Vec<C64> {
    let mut v = vec![ZERO; 8];
    v[0] = ONE;
    v[7] = ONE;
    matcore::normalize(&v)
}

pub fn w_vector() -> Vec<C64> {
    let mut v = vec![ZERO; 8];
    v[1] = ONE;
    v[2] = ONE;
    v[4] = ONE;
    matcore::normalize(&v)
}

/// Oracle options for certifying a witness before improving it.
#[derive(Debug, Clone, Copy)]
pub struct Certify {
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for Certify {
    fn default() -> Self {
        Self {
            samples: 2000,
            seed: 0x5eed,
            exec: Execution::default(),
        }
    }
}

/// Minimum of `Tr(Wρ)` over random triple-product pure states; errors if
/// any value is below `−1e−9`.
pub fn certify_full_sep(w: &TripartiteWitness, opts: Certify) -> Result<f64> {
    let values = par::map_indices(opts.samples, opts.exec, |k| {
        random_fully_separable(derive_seed(opts.seed, k as u64), 1).and_then(|rho| w.evaluate(&rho))
    });
    let min = values
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if min < -tol::PSD {
        return Err(Error::NotAWitness { min_value: min });
    }
    Ok(min)
}

/// Builds the nonlinear improvement of the lifted witness for one cut.
pub trait CutBuilder: Sync {
    fn build(&self, lifted: &LinearWitness, cut: Bipartition) -> Result<NonlinearWitness>;
}

/// Partial-transpose route when `P = W^{T_B}` is PSD across the cut
/// (term `X = √P·V`, valid on states that are PPT across the cut); the
/// Jamiołkowski-map route otherwise.
#[derive(Debug, Clone, Default)]
pub struct DefaultCutBuilder;

/// Cyclic shift `|k⟩ ↦ |k+1 mod n⟩`.
pub fn cyclic_shift(n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |i, j| if i == (j + 1) % n { ONE } else { ZERO })
}

impl CutBuilder for DefaultCutBuilder {
    fn build(&self, lifted: &LinearWitness, cut: Bipartition) -> Result<NonlinearWitness> {
        let dims = lifted.dims();
        let p = partial_transpose(lifted.matrix(), dims)?;
        if matcore::is_psd(&p, tol::PSD) {
            let x = &matcore::psd_sqrt(&p)? * &cyclic_shift(dims.total());
            let term = QuadraticTerm::from_x(&x, dims, 1.0)?;
            return NonlinearWitness::new(lifted.clone(), vec![term], Family::Covariance);
        }
        let psi = PureState::maximally_entangled(DimPair::new(dims.a, dims.a)?);
        improve_via_map(lifted, &psi).map_err(|e| Error::Cut {
            cut: cut.label().into(),
            reason: e.to_string(),
        })
    }
}

/// `F_tot(ρ) = min_cut F_cut(lift(ρ, cut))`.
#[derive(Debug, Clone)]
pub struct FullSepImprovement {
    witness: TripartiteWitness,
    per_cut: Vec<(Bipartition, NonlinearWitness)>,
}

impl FullSepImprovement {
    pub fn witness(&self) -> &TripartiteWitness {
        &self.witness
    }

    pub fn per_cut(&self) -> &[(Bipartition, NonlinearWitness)] {
        &self.per_cut
    }

    /// Values of the three per-cut functionals.
    pub fn evaluate_cuts(&self, rho: &DensityOperator) -> Result<Vec<(Bipartition, f64)>> {
        self.per_cut
            .iter()
            .map(|(cut, f)| Ok((*cut, f.evaluate(&lift(rho, *cut)?)?)))
            .collect()
    }

    pub fn evaluate(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(self
            .evaluate_cuts(rho)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::INFINITY, f64::min))
    }

    /// Maximum over cuts; not a valid witness on mixed biseparable states.
    pub fn evaluate_max(&self, rho: &DensityOperator) -> Result<f64> {
        Ok(self
            .evaluate_cuts(rho)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(f64::NEG_INFINITY, f64::max))
    }
}

/// Certifies `W` on the fully separable oracle, then improves it cut by cut.
pub fn improve_full_sep(
    w: &TripartiteWitness,
    builder: &dyn CutBuilder,
    opts: Certify,
) -> Result<FullSepImprovement> {
    certify_full_sep(w, opts)?;
    let per_cut = Bipartition::ALL
        .iter()
        .map(|&cut| {
            let lifted = w.lifted(cut)?;
            let f = builder.build(&lifted, cut).map_err(|e| match e {
                Error::Cut { .. } => e,
                other => Error::Cut {
                    cut: cut.label().into(),
                    reason: other.to_string(),
                },
            })?;
            Ok((cut, f))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FullSepImprovement {
        witness: w.clone(),
        per_cut,
    })
}

/// Result of [`max_over_cuts_search`].
#[derive(Debug, Clone)]
pub struct MaxCutSearch {
    pub samples: usize,
    pub negatives: usize,
    pub min_value: f64,
    pub min_seed: u64,
}

/// Looks for mixed biseparable states on which the maximum over cuts is
/// negative. Mixtures draw their components from different cuts.
pub fn max_over_cuts_search(
    f: &FullSepImprovement,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<MaxCutSearch> {
    let values = par::map_indices(samples, exec, |k| {
        let s = derive_seed(seed, k as u64);
        let mut rng = rng_from_seed(s);
        let weights: Vec<f64> = (0..3).map(|_| rand::Rng::random::<f64>(&mut rng) + 1e-3).collect();
        let total: f64 = weights.iter().sum();
        let parts: Vec<DensityOperator> = Bipartition::ALL
            .iter()
            .enumerate()
            .map(|(i, &cut)| {
                let psi = random_biseparable_pure(cut, derive_seed(s, i as u64));
                DensityOperator::from_raw(psi.projector(), QUBITS.to_vec())
            })
            .collect();
        let mix: Vec<(f64, &DensityOperator)> =
            weights.iter().zip(&parts).map(|(w, p)| (w / total, p)).collect();
        DensityOperator::mixture(&mix)
            .and_then(|rho| f.evaluate_max(&rho))
            .map(|v| (v, s))
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    let (min_value, min_seed) = values
        .iter()
        .copied()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((f64::INFINITY, seed));
    Ok(MaxCutSearch {
        samples,
        negatives: values.iter().filter(|(v, _)| *v < -tol::PSD).count(),
        min_value,
        min_seed,
    })
}

/// Result of [`common_term_search`].
#[derive(Debug, Clone)]
pub struct CommonTermSearch {
    /// Largest weight keeping `⟨W⟩ − c|⟨X⟩|²` nonnegative on every sampled
    /// biseparable pure state, for the best candidate.
    pub weight: f64,
    pub candidate_seed: u64,
    /// Value on the target at that weight.
    pub target_value: f64,
    pub target_linear: f64,
}

/// Random candidates `X` for a single quadratic term shared by all cuts of a
/// biseparability witness, scored on a target state. Sampling only; nothing
/// here certifies positivity.
pub fn common_term_search(
    w: &TripartiteWitness,
    target: &DensityOperator,
    candidates: usize,
    states_per_candidate: usize,
    seed: u64,
    exec: Execution,
) -> Result<CommonTermSearch> {
    let target_linear = w.evaluate(target)?;
    let pure: Vec<CMatrix> = (0..states_per_candidate)
        .map(|k| {
            let cut = Bipartition::ALL[k % 3];
            random_biseparable_pure(cut, derive_seed(seed ^ 0xb15e, k as u64)).projector()
        })
        .collect();
    let lin: Vec<f64> = pure.iter().map(|p| matcore::trace_product(w.matrix(), p).re).collect();
    if let Some(bad) = lin.iter().copied().find(|v| *v < -tol::PSD) {
        return Err(Error::NotAWitness { min_value: bad });
    }
    let scored = par::map_indices(candidates, exec, |k| {
        let s = derive_seed(seed, k as u64);
        let mut rng = rng_from_seed(s);
        let x = CMatrix::from_fn(8, 8, |_, _| crate::states::gaussian_c64(&mut rng));
        let x = x.scale_real(1.0 / x.frobenius_norm());
        let weight = pure
            .iter()
            .zip(&lin)
            .map(|(p, l)| {
                let e = matcore::trace_product(&x, p).norm_sqr();
                if e > 0.0 { l / e } else { f64::INFINITY }
            })
            .fold(f64::INFINITY, f64::min);
        let value = target_linear - weight * matcore::trace_product(&x, target.matrix()).norm_sqr();
        (value, weight, s)
    });
    let (target_value, weight, candidate_seed) = scored
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((target_linear, 0.0, seed));
    Ok(CommonTermSearch {
        weight,
        candidate_seed,
        target_value,
        target_linear,
    })
}

/// `|v⟩⟨v|` as a three-qubit state.
pub fn pure_three_qubit(v: &[C64]) -> Result<DensityOperator> {
    if v.len() != 8 {
        return Err(dim_err(8, v.len()));
    }
    let u = matcore::normalize(v);
    DensityOperator::new(CMatrix::projector(&u), QUBITS.to_vec())
}

/// `p|v⟩⟨v| + (1−p)𝟙/8`.
pub fn noisy_pure(v: &[C64], p: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("mixing weight {p} outside [0, 1]")));
    }
    let pure = pure_three_qubit(v)?;
    let mixed = DensityOperator::maximally_mixed(&QUBITS);
    DensityOperator::mixture(&[(p, &pure), (1.0 - p, &mixed)])
}

/// `|abc⟩` for single-qubit kets.
pub fn triple_product(a: &[C64], b: &[C64], c: &[C64]) -> Result<DensityOperator> {
    pure_three_qubit(&kron_vec(&kron_vec(a, b), c))
}

/// Kronecker product of three 2×2 operators.
pub fn kron3(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> CMatrix {
    kron(&kron(a, b), c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::herm_eig;
    use crate::states::{is_ppt, random_density_multi};
    use proptest::prelude::*;

    fn ket0() -> Vec<C64> {
        vec![ONE, ZERO]
    }

    #[test]
    fn cut_orders_are_involutions() {
        for cut in Bipartition::ALL {
            let o = cut.order();
            for i in 0..8 {
                assert_eq!(permute_index(permute_index(i, o), o), i);
            }
        }
    }

    #[test]
    fn lift_product_state() {
        let rho = triple_product(&ket0(), &ket0(), &ket0()).unwrap();
        let l = lift(&rho, Bipartition::ABc).unwrap();
        assert_eq!(l.dims(), [2, 4]);
        let mut want = CMatrix::zeros(8, 8);
        want[(0, 0)] = ONE;
        assert!(l.matrix().approx_eq(&want, 0.0));
    }

    #[test]
    fn lift_moves_singleton_first() {
        // |0⟩_A|0⟩_B|1⟩_C: across AB|C the first factor is C = |1⟩
        let one = vec![ZERO, ONE];
        let rho = triple_product(&ket0(), &ket0(), &one).unwrap();
        let l = lift(&rho, Bipartition::AbC).unwrap();
        let reduced = matcore::partial_trace(l.matrix(), DimPair { a: 2, b: 4 }, matcore::Subsystem::A).unwrap();
        assert!((reduced[(1, 1)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn wrong_dims_rejected() {
        let rho = DensityOperator::maximally_mixed(&[2, 4]);
        assert!(lift(&rho, Bipartition::ABc).is_err());
        assert!(unlift(&DensityOperator::maximally_mixed(&[2, 2, 2]), Bipartition::ABc).is_err());
    }

    #[test]
    fn builders_pick_expected_routes() {
        let ghz = improve_full_sep(&TripartiteWitness::ghz(), &DefaultCutBuilder, Certify::default()).unwrap();
        assert!(ghz.per_cut().iter().all(|(_, f)| f.family() == Family::Covariance));
        let w = improve_full_sep(&TripartiteWitness::w_state(), &DefaultCutBuilder, Certify::default()).unwrap();
        assert!(w.per_cut().iter().all(|(_, f)| f.family() == Family::PositiveMap));
    }

    #[test]
    fn non_witness_rejected() {
        let bad = TripartiteWitness::new(&CMatrix::identity(8).scale_real(0.1) - &CMatrix::projector(&ghz_vector())).unwrap();
        assert!(matches!(
            improve_full_sep(&bad, &DefaultCutBuilder, Certify::default()),
            Err(Error::NotAWitness { .. })
        ));
    }

    struct Failing;
    impl CutBuilder for Failing {
        fn build(&self, _: &LinearWitness, cut: Bipartition) -> Result<NonlinearWitness> {
            if cut == Bipartition::AcB {
                Err(Error::InvalidParameter("unsupported".into()))
            } else {
                Err(Error::Cut { cut: cut.label().into(), reason: "unsupported".into() })
            }
        }
    }

    #[test]
    fn failing_builder_names_cut() {
        let err = improve_full_sep(&TripartiteWitness::ghz(), &Failing, Certify::default()).unwrap_err();
        assert!(err.to_string().contains("A|BC"), "{err}");
    }

    #[test]
    fn fully_separable_nonnegative_and_below_linear() {
        for wit in [TripartiteWitness::ghz(), TripartiteWitness::w_state()] {
            let f = improve_full_sep(&wit, &DefaultCutBuilder, Certify::default()).unwrap();
            for k in 0..300 {
                let rho = random_fully_separable(derive_seed(8, k), 6).unwrap();
                assert!(f.evaluate(&rho).unwrap() >= -1e-9);
                let any = random_density_multi(&QUBITS, derive_seed(9, k));
                assert!(f.evaluate(&any).unwrap() <= wit.evaluate(&any).unwrap() + 1e-12);
            }
            let prod = triple_product(&ket0(), &ket0(), &ket0()).unwrap();
            assert!(f.evaluate(&prod).unwrap() >= 0.0);
        }
    }

    #[test]
    fn detected_states_stay_detected() {
        let ghz = improve_full_sep(&TripartiteWitness::ghz(), &DefaultCutBuilder, Certify::default()).unwrap();
        let rho = noisy_pure(&ghz_vector(), 0.8).unwrap();
        assert!(ghz.witness().evaluate(&rho).unwrap() < 0.0);
        assert!(ghz.evaluate(&rho).unwrap() < ghz.witness().evaluate(&rho).unwrap());
        let w = improve_full_sep(&TripartiteWitness::w_state(), &DefaultCutBuilder, Certify::default()).unwrap();
        let rho = noisy_pure(&w_vector(), 0.9).unwrap();
        assert!(w.evaluate(&rho).unwrap() < w.witness().evaluate(&rho).unwrap());
    }

    #[test]
    fn fully_separable_are_ppt_across_cuts() {
        for k in 0..50 {
            let rho = random_fully_separable(k, 5).unwrap();
            assert!((rho.matrix().trace().re - 1.0).abs() < 1e-12);
            for cut in Bipartition::ALL {
                assert!(is_ppt(&lift(&rho, cut).unwrap()).unwrap());
            }
        }
        let a = random_fully_separable(3, 4).unwrap();
        let b = random_fully_separable(3, 4).unwrap();
        assert!(a.matrix().approx_eq(b.matrix(), 0.0));
    }

    #[test]
    fn search_scaffolds_run() {
        let f = improve_full_sep(&TripartiteWitness::ghz(), &DefaultCutBuilder, Certify::default()).unwrap();
        let report = max_over_cuts_search(&f, 50, 1, Execution::Parallel).unwrap();
        assert_eq!(report.samples, 50);
        let seq = max_over_cuts_search(&f, 50, 1, Execution::Sequential).unwrap();
        assert_eq!(report.min_value.to_bits(), seq.min_value.to_bits());
        let target = noisy_pure(&ghz_vector(), 0.9).unwrap();
        let c = common_term_search(&TripartiteWitness::ghz(), &target, 20, 200, 2, Execution::Parallel).unwrap();
        assert!(c.target_value <= c.target_linear);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn lift_round_trip_and_spectrum(seed in any::<u64>()) {
            let rho = random_density_multi(&QUBITS, seed);
            for cut in Bipartition::ALL {
                let l = lift(&rho, cut).unwrap();
                let back = unlift(&l, cut).unwrap();
                prop_assert!(back.matrix().approx_eq(rho.matrix(), 0.0));
                let e1 = herm_eig(rho.matrix()).unwrap().values;
                let e2 = herm_eig(l.matrix()).unwrap().values;
                for (x, y) in e1.iter().zip(&e2) {
                    prop_assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }
}

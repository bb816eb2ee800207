//! Monte Carlo harnesses: minimum over the separable oracle, detection
//! hierarchy counts, and sampled concavity checks.

use crate::covariance::{default_basis, optimize_q, Budget};
use crate::error::Result;
use crate::matcore::DimPair;
use crate::nonlinear::{detect_condition_f1, detect_condition_f2};
use crate::par::{self, Execution};
use crate::states::{
    derive_seed, min_pt_eigenvalue, random_density, random_separable, rng_from_seed, DensityOperator,
    PureState,
};
use crate::tol;

/// Smallest value of `f` over `samples` oracle separable states, with the
/// seed that produced it.
pub fn separable_oracle_min<F>(
    dims: DimPair,
    samples: usize,
    terms: usize,
    seed: u64,
    exec: Execution,
    f: F,
) -> Result<(f64, u64)>
where
    F: Fn(&DensityOperator) -> Result<f64> + Sync + Send,
{
    let values = par::map_indices(samples, exec, |k| {
        let s = derive_seed(seed, k as u64);
        random_separable(dims, terms, s).and_then(|rho| f(&rho)).map(|v| (v, s))
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(values
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .unwrap_or((f64::INFINITY, seed)))
}

/// Detection verdicts for one state against the fixed witness
/// `(|φ⟩⟨φ|)^{T_B}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Verdicts {
    pub npt: bool,
    pub linear: bool,
    pub f1: bool,
    pub f2: bool,
    pub covariance: Option<bool>,
    pub linear_value: f64,
}

impl Verdicts {
    /// Containment failures: `F2 ⊄ F1`, `F1 ⊄ NPT`, linear or covariance
    /// detection on a PPT state.
    pub fn violations(&self) -> usize {
        (self.f2 && !self.f1) as usize
            + (self.f1 && !self.npt) as usize
            + (self.linear && !self.npt) as usize
            + (self.covariance == Some(true) && !self.npt) as usize
    }
}

pub fn classify(
    rho: &DensityOperator,
    phi: &PureState,
    covariance: Option<(Budget, u64)>,
    npt_tol: f64,
) -> Result<Verdicts> {
    let c1 = detect_condition_f1(rho, phi)?;
    let c2 = detect_condition_f2(rho, phi)?;
    let cov = match covariance {
        Some((budget, seed)) => {
            let basis = default_basis(phi.dims());
            let out = optimize_q(rho, &phi.projector(), &basis, budget, seed, Execution::Sequential)?;
            Some(out.value < -tol::STRICT)
        }
        None => None,
    };
    Ok(Verdicts {
        npt: min_pt_eigenvalue(rho)? < -npt_tol,
        linear: c1.lhs < -tol::STRICT,
        f1: c1.detected,
        f2: c2.detected,
        covariance: cov,
        linear_value: c1.lhs,
    })
}

/// Aggregate counts over Hilbert-Schmidt random states.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HierarchyCounts {
    pub samples: usize,
    pub npt: usize,
    pub linear: usize,
    pub f2: usize,
    pub f1: usize,
    pub covariance: usize,
    pub f1_beyond_linear: usize,
    pub violations: usize,
    /// Seeds of states with a containment failure.
    pub offending: Vec<u64>,
    /// Seed of one state detected by the single-term condition while the
    /// linear value is nonnegative.
    pub beyond_linear_seed: Option<u64>,
}

/// Classifies `samples` random states against the witness of `phi`.
pub fn hierarchy_survey(
    phi: &PureState,
    samples: usize,
    seed: u64,
    covariance: Option<Budget>,
    npt_tol: f64,
    exec: Execution,
) -> Result<HierarchyCounts> {
    let dims = phi.dims();
    let rows = par::map_indices(samples, exec, |k| {
        let s = derive_seed(seed, k as u64);
        let rho = random_density(dims, s);
        classify(&rho, phi, covariance.map(|b| (b, s)), npt_tol).map(|v| (v, s))
    });
    let mut counts = HierarchyCounts {
        samples,
        ..Default::default()
    };
    for row in rows {
        let (v, s) = row?;
        counts.npt += v.npt as usize;
        counts.linear += v.linear as usize;
        counts.f1 += v.f1 as usize;
        counts.f2 += v.f2 as usize;
        counts.covariance += (v.covariance == Some(true)) as usize;
        if v.f1 && v.linear_value >= 0.0 {
            counts.f1_beyond_linear += 1;
            counts.beyond_linear_seed.get_or_insert(s);
        }
        let bad = v.violations();
        if bad > 0 {
            counts.violations += bad;
            counts.offending.push(s);
        }
    }
    Ok(counts)
}

/// Random convex combination of up to `max_parts` random states, with its
/// components and weights.
pub fn random_mixture(
    dims: DimPair,
    max_parts: usize,
    seed: u64,
) -> Result<(DensityOperator, Vec<(f64, DensityOperator)>)> {
    use rand::Rng;
    let mut rng = rng_from_seed(seed);
    let k = rng.random_range(1..=max_parts.max(1));
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let parts: Vec<(f64, DensityOperator)> = raw
        .iter()
        .enumerate()
        .map(|(i, w)| (w / total, random_density(dims, derive_seed(seed, i as u64 + 1))))
        .collect();
    let refs: Vec<(f64, &DensityOperator)> = parts.iter().map(|(w, r)| (*w, r)).collect();
    Ok((DensityOperator::mixture(&refs)?, parts))
}

/// Worst `F(Σ pₖρₖ) − Σ pₖF(ρₖ)` over sampled mixtures (negative means a
/// concavity failure).
pub fn concavity_gap<F>(
    dims: DimPair,
    samples: usize,
    max_parts: usize,
    seed: u64,
    exec: Execution,
    f: F,
) -> Result<f64>
where
    F: Fn(&DensityOperator) -> Result<f64> + Sync + Send,
{
    let gaps = par::map_indices(samples, exec, |k| -> Result<f64> {
        let (mix, parts) = random_mixture(dims, max_parts, derive_seed(seed, k as u64))?;
        let avg = parts
            .iter()
            .map(|(w, r)| f(r).map(|v| w * v))
            .sum::<Result<f64>>()?;
        Ok(f(&mix)? - avg)
    });
    Ok(gaps
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::bell_states;

    #[test]
    fn survey_is_deterministic_across_execution() {
        let phi = bell_states()[0].clone();
        let a = hierarchy_survey(&phi, 300, 7, None, tol::PSD, Execution::Parallel).unwrap();
        let b = hierarchy_survey(&phi, 300, 7, None, tol::PSD, Execution::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.violations, 0);
        assert!(a.f2 <= a.f1 && a.f1 <= a.npt);
    }

    #[test]
    fn oracle_min_reports_seed() {
        let (v, s) = separable_oracle_min(DimPair::qubits(), 50, 8, 1, Execution::Parallel, |rho| {
            Ok(rho.matrix()[(0, 0)].re)
        })
        .unwrap();
        let rho = random_separable(DimPair::qubits(), 8, s).unwrap();
        assert_eq!(rho.matrix()[(0, 0)].re, v);
    }

    #[test]
    fn mixtures_are_valid() {
        for seed in 0..20 {
            let (mix, parts) = random_mixture(DimPair::qubits(), 4, seed).unwrap();
            assert!(parts.len() <= 4 && !parts.is_empty());
            assert!((mix.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }
}

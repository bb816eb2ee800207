//! Command-line front end. Exit codes: 0 separable-consistent / check
//! passed, 1 entangled / mismatch / containment violation, 2 input error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::covariance::{default_basis, optimize_q, Budget, QCertificate};
use crate::error::{Error, Result};
use crate::matcore::DimPair;
use crate::nonlinear::{
    completed_basis, detect_condition_f1, detect_condition_f2, example_f1_bell, example_f2_bell,
    improve_f1, improve_f2, optimal_f1_partner, reference_f1_bell, reference_f2_bell, Condition,
    PauliForm,
};
use crate::par::Execution;
use crate::states::{
    bell_states, random_density, random_separable, singlet, werner, DensityOperator, PureState,
};
use crate::survey::hierarchy_survey;
use crate::tol;
use crate::witness::{format_pauli, min_pt_eigenpair, pauli_decompose, witness_from_npt};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DETECTED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "nlwitness", version, about = "Linear and nonlinear entanglement witnesses")]
pub struct Cli {
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Monte Carlo sample count (benchmark states, or Haar draws for the
    /// covariance search).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Tolerance for calling a partial transpose negative.
    #[arg(long, global = true, default_value_t = tol::PSD)]
    pub tol: f64,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Run Monte Carlo loops on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every detection criterion on a state file.
    Detect {
        #[arg(long)]
        state: PathBuf,
    },
    /// Table of witness values along the Werner family.
    SweepWerner {
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
    /// Build a reference two-qubit example and compare it coefficient by
    /// coefficient with its hard-coded Pauli form.
    Example {
        #[arg(value_enum)]
        which: ExampleKind,
    },
    /// Detection counts over random two-qubit states against the witness of
    /// the maximally entangled state; fails on any containment violation.
    Benchmark {
        /// Haar draws per state for the covariance search (0 disables it).
        #[arg(long, default_value_t = 0)]
        cov_samples: usize,
    },
    /// Write a state file.
    State {
        #[arg(value_enum)]
        kind: StateKind,
        /// Mixing parameter for `werner`.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
    },
    /// Write the witness constructed for a state.
    Witness {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, value_enum, default_value_t = WitnessKind::Linear)]
        kind: WitnessKind,
    },
    /// Search a rank-one covariance certificate for a state and write it.
    Certify {
        #[arg(long)]
        state: PathBuf,
    },
    /// Re-check a stored certificate's reconstruction identity.
    ValidateCert {
        #[arg(long)]
        cert: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleKind {
    /// Single-term improvement with partner (|01⟩+|10⟩)/√2.
    F1,
    /// Full Bell-basis improvement.
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateKind {
    Singlet,
    Werner,
    Mixed,
    Random,
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WitnessKind {
    Linear,
    F1,
    F2,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_INPUT
        }
    }
}

fn exec(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn emit(cli: &Cli, body: &str) -> Result<()> {
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Detect { state } => cmd_detect(cli, state),
        Command::SweepWerner { step } => cmd_sweep_werner(cli, *step),
        Command::Example { which } => cmd_example(cli, *which),
        Command::Benchmark { cov_samples } => cmd_benchmark(cli, *cov_samples),
        Command::State { kind, p } => cmd_state(cli, *kind, *p),
        Command::Witness { state, kind } => cmd_witness(cli, state, *kind),
        Command::Certify { state } => cmd_certify(cli, state),
        Command::ValidateCert { cert } => cmd_validate_cert(cli, cert),
    }
}

fn budget(cli: &Cli, default: Budget) -> Budget {
    match cli.samples {
        Some(s) => Budget {
            samples: s.max(1),
            refine_steps: default.refine_steps,
        },
        None => default,
    }
}

#[derive(Debug, Serialize)]
pub struct ConditionReport {
    pub detected: bool,
    pub lhs: f64,
    pub rhs: f64,
}

impl From<Condition> for ConditionReport {
    fn from(c: Condition) -> Self {
        Self {
            detected: c.detected,
            lhs: c.lhs,
            rhs: c.rhs,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct DetectReport {
    pub dims: Vec<usize>,
    pub ppt: bool,
    pub min_pt_eigenvalue: f64,
    pub linear: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub f1_condition: ConditionReport,
    pub f2_condition: ConditionReport,
    pub covariance: f64,
    pub entangled: bool,
}

/// Every criterion against the witness built from the minimal
/// partial-transpose eigenvector.
pub fn detect_report(rho: &DensityOperator, npt_tol: f64, budget: Budget, seed: u64, exec: Execution) -> Result<DetectReport> {
    let (lambda, phi) = min_pt_eigenpair(rho)?;
    let npt = lambda < -npt_tol;
    let c1 = detect_condition_f1(rho, &phi)?;
    let c2 = detect_condition_f2(rho, &phi)?;
    let (linear, f1, f2) = if npt {
        let linear = witness_from_npt(rho)?.witness.evaluate(rho)?;
        let f1 = improve_f1(&phi, &optimal_f1_partner(rho, &phi)?)?.evaluate(rho)?;
        let f2 = improve_f2(&phi, &completed_basis(&phi))?.evaluate(rho)?;
        (Some(linear), Some(f1), Some(f2))
    } else {
        (None, None, None)
    };
    let cov = optimize_q(rho, &phi.projector(), &default_basis(phi.dims()), budget, seed, exec)?;
    let entangled = npt || c1.detected || c2.detected || cov.value < -tol::STRICT;
    Ok(DetectReport {
        dims: rho.dims().to_vec(),
        ppt: !npt,
        min_pt_eigenvalue: lambda,
        linear,
        f1,
        f2,
        f1_condition: c1.into(),
        f2_condition: c2.into(),
        covariance: cov.value,
        entangled,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| x.to_string())
}

fn cmd_detect(cli: &Cli, path: &PathBuf) -> Result<i32> {
    let rho = DensityOperator::read(path)?;
    rho.dim_pair()?;
    let report = detect_report(&rho, cli.tol, budget(cli, Budget::default()), cli.seed, exec(cli))?;
    let body = match cli.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => format!(
            "ppt,min_pt_eigenvalue,linear,f1,f2,f1_lhs,f1_rhs,f2_lhs,f2_rhs,covariance,entangled\n{},{},{},{},{},{},{},{},{},{},{}\n",
            report.ppt,
            report.min_pt_eigenvalue,
            opt(report.linear),
            opt(report.f1),
            opt(report.f2),
            report.f1_condition.lhs,
            report.f1_condition.rhs,
            report.f2_condition.lhs,
            report.f2_condition.rhs,
            report.covariance,
            report.entangled
        ),
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "dims                {:?}", report.dims);
            let _ = writeln!(s, "PPT                 {} (min eigenvalue of ρ^T_B {:.6e})", report.ppt, report.min_pt_eigenvalue);
            let _ = writeln!(s, "linear witness      {}", opt(report.linear));
            let _ = writeln!(s, "best single-term    {}", opt(report.f1));
            let _ = writeln!(s, "full-basis          {}", opt(report.f2));
            let _ = writeln!(
                s,
                "single-term cond.   detected={} lhs={:.6e} rhs={:.6e}",
                report.f1_condition.detected, report.f1_condition.lhs, report.f1_condition.rhs
            );
            let _ = writeln!(
                s,
                "full-basis cond.    detected={} lhs={:.6e} rhs={:.6e}",
                report.f2_condition.detected, report.f2_condition.lhs, report.f2_condition.rhs
            );
            let _ = writeln!(s, "covariance optimum  {:.6e}", report.covariance);
            if report.linear.is_some() && rho.dims().iter().all(|&d| d.is_power_of_two()) {
                if let Ok(w) = witness_from_npt(&rho) {
                    if let Ok(dims) = rho.dim_pair() {
                        if dims == DimPair::qubits() {
                            let _ = writeln!(s, "W = {}", format_pauli(&pauli_decompose(w.witness.matrix(), &[2, 2])?));
                        }
                    }
                }
            }
            let _ = writeln!(s, "verdict             {}", if report.entangled { "entangled" } else { "separable-consistent" });
            s
        }
    };
    emit(cli, &body)?;
    Ok(if report.entangled { EXIT_DETECTED } else { EXIT_OK })
}

/// One line of the Werner sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub linear: f64,
    pub f1: f64,
    pub f2: f64,
    pub f2_reference: f64,
    pub f1_lhs: f64,
    pub f1_rhs: f64,
    pub f2_lhs: f64,
    pub f2_rhs: f64,
    pub covariance: f64,
    pub detected: bool,
}

pub const SWEEP_HEADER: &str = "p,linear,f1,f2,f2_reference,f1_lhs,f1_rhs,f2_lhs,f2_rhs,covariance,detected";

/// Rows at `p = i·step` for `i = 0, 1, …` while `p ≤ 1`.
pub fn werner_sweep(step: f64, budget: Budget, seed: u64, exec: Execution) -> Result<Vec<SweepRow>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidParameter(format!("step {step} must lie in (0, 1]")));
    }
    let phi = bell_states()[0].clone();
    let f1w = example_f1_bell()?;
    let f2w = example_f2_bell()?;
    let reference = reference_f2_bell();
    let basis = default_basis(DimPair::qubits());
    let n = (1.0 / step + 1e-9).floor() as usize;
    let exact = (n as f64 * step - 1.0).abs() < 1e-9;
    (0..=n)
        .map(|i| {
            let p = if exact { i as f64 / n as f64 } else { (i as f64 * step).min(1.0) };
            let rho = werner(p)?;
            let (linear, f1) = f1w.evaluate_both(&rho)?;
            let c1 = detect_condition_f1(&rho, &phi)?;
            let c2 = detect_condition_f2(&rho, &phi)?;
            let cov = optimize_q(&rho, &phi.projector(), &basis, budget, seed, exec)?;
            Ok(SweepRow {
                p,
                linear,
                f1,
                f2: f2w.evaluate(&rho)?,
                f2_reference: reference.evaluate(&pauli_expectations(&rho)?),
                f1_lhs: c1.lhs,
                f1_rhs: c1.rhs,
                f2_lhs: c2.lhs,
                f2_rhs: c2.rhs,
                covariance: cov.value,
                detected: linear < -tol::STRICT || c1.detected || c2.detected,
            })
        })
        .collect()
}

/// `⟨σ_w⟩` over all two-qubit Pauli words in lexicographic order.
pub fn pauli_expectations(rho: &DensityOperator) -> Result<Vec<f64>> {
    crate::witness::pauli_vector(rho.matrix(), &[2, 2])
        .map(|v| v.iter().map(|c| c.re * 4.0).collect())
}

fn cmd_sweep_werner(cli: &Cli, step: f64) -> Result<i32> {
    let rows = werner_sweep(step, budget(cli, Budget::small()), cli.seed, exec(cli))?;
    let body = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
        Format::Csv | Format::Text => {
            let mut s = String::from(SWEEP_HEADER);
            s.push('\n');
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.p, r.linear, r.f1, r.f2, r.f2_reference, r.f1_lhs, r.f1_rhs, r.f2_lhs, r.f2_rhs, r.covariance, r.detected
                );
            }
            s
        }
    };
    emit(cli, &body)?;
    Ok(EXIT_OK)
}

/// Machine-built and hard-coded forms with their largest coefficient gap.
pub fn example_forms(which: ExampleKind) -> Result<(PauliForm, PauliForm, f64)> {
    let (built, reference) = match which {
        ExampleKind::F1 => (PauliForm::from_witness(&example_f1_bell()?)?, reference_f1_bell()),
        ExampleKind::F2 => (PauliForm::from_witness(&example_f2_bell()?)?, reference_f2_bell()),
    };
    let diff = built.max_diff(&reference);
    Ok((built, reference, diff))
}

fn cmd_example(cli: &Cli, which: ExampleKind) -> Result<i32> {
    let (built, reference, diff) = example_forms(which)?;
    let ok = diff <= 1e-12;
    let body = match cli.format.unwrap_or(Format::Text) {
        Format::Json => {
            serde_json::to_string_pretty(&serde_json::json!({
                "example": format!("{which:?}").to_lowercase(),
                "max_coefficient_difference": diff,
                "match": ok,
            }))? + "\n"
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "machine-built form\n{}", built.render());
            let _ = writeln!(s, "hard-coded form\n{}", reference.render());
            let _ = writeln!(s, "max coefficient difference {diff:.3e}");
            let _ = writeln!(s, "{}", if ok { "MATCH" } else { "MISMATCH" });
            s
        }
    };
    emit(cli, &body)?;
    Ok(if ok { EXIT_OK } else { EXIT_DETECTED })
}

pub const BENCHMARK_HEADER: &str = "samples,npt,linear,f2,f1,covariance,f1_beyond_linear,violations";

fn cmd_benchmark(cli: &Cli, cov_samples: usize) -> Result<i32> {
    let samples = cli.samples.unwrap_or(10_000);
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let cov = (cov_samples > 0).then(|| Budget {
        samples: cov_samples,
        refine_steps: 20,
    });
    let phi = PureState::maximally_entangled(DimPair::qubits());
    let c = hierarchy_survey(&phi, samples, cli.seed, cov, cli.tol, exec(cli))?;
    let body = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => serde_json::to_string_pretty(&serde_json::json!({
            "samples": c.samples, "npt": c.npt, "linear": c.linear, "f2": c.f2, "f1": c.f1,
            "covariance": c.covariance, "f1_beyond_linear": c.f1_beyond_linear,
            "violations": c.violations, "offending_seeds": c.offending,
        }))? + "\n",
        _ => format!(
            "{BENCHMARK_HEADER}\n{},{},{},{},{},{},{},{}\n",
            c.samples, c.npt, c.linear, c.f2, c.f1, c.covariance, c.f1_beyond_linear, c.violations
        ),
    };
    emit(cli, &body)?;
    if c.violations > 0 {
        eprintln!("containment violation; offending seeds: {:?}", c.offending);
        return Ok(EXIT_DETECTED);
    }
    Ok(EXIT_OK)
}

fn cmd_state(cli: &Cli, kind: StateKind, p: f64) -> Result<i32> {
    let q = DimPair::qubits();
    let rho = match kind {
        StateKind::Singlet => singlet(),
        StateKind::Werner => werner(p)?,
        StateKind::Mixed => DensityOperator::maximally_mixed(&[2, 2]),
        StateKind::Random => random_density(q, cli.seed),
        StateKind::Separable => random_separable(q, 8, cli.seed)?,
    };
    emit(cli, &(rho.to_json()? + "\n"))?;
    Ok(EXIT_OK)
}

fn cmd_witness(cli: &Cli, path: &PathBuf, kind: WitnessKind) -> Result<i32> {
    let rho = DensityOperator::read(path)?;
    let npt = witness_from_npt(&rho)?;
    let body = match kind {
        WitnessKind::Linear => npt.witness.to_json()?,
        WitnessKind::F1 => improve_f1(&npt.phi, &optimal_f1_partner(&rho, &npt.phi)?)?.to_json()?,
        WitnessKind::F2 => improve_f2(&npt.phi, &completed_basis(&npt.phi))?.to_json()?,
    };
    emit(cli, &(body + "\n"))?;
    Ok(EXIT_OK)
}

fn cmd_certify(cli: &Cli, path: &PathBuf) -> Result<i32> {
    let rho = DensityOperator::read(path)?;
    let (_, phi) = min_pt_eigenpair(&rho)?;
    let basis = default_basis(phi.dims());
    let best = optimize_q(&rho, &phi.projector(), &basis, budget(cli, Budget::default()), cli.seed, exec(cli))?;
    best.certificate.validate(&basis)?;
    emit(cli, &(best.certificate.to_json()? + "\n"))?;
    eprintln!("functional value {:.6e}", best.value);
    Ok(if best.value < -tol::STRICT { EXIT_DETECTED } else { EXIT_OK })
}

fn cmd_validate_cert(cli: &Cli, path: &PathBuf) -> Result<i32> {
    let cert = QCertificate::read(path)?;
    let basis = default_basis(cert.dims());
    if cert.basis_id() != basis.id() {
        return Err(Error::InvalidParameter(format!("unknown basis `{}`", cert.basis_id())));
    }
    let residual = cert.residual(&basis)?;
    let ok = residual <= tol::RECONSTRUCTION;
    emit(cli, &format!("residual {residual:.3e} {}\n", if ok { "valid" } else { "invalid" }))?;
    Ok(if ok { EXIT_OK } else { EXIT_DETECTED })
}

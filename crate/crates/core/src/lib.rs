//! Linear and nonlinear entanglement witnesses for finite-dimensional
//! bipartite and three-qubit systems.

pub mod cli;
pub mod covariance;
pub mod error;
pub mod matcore;
pub mod multipartite;
pub mod nonlinear;
pub mod par;
pub mod states;
pub mod survey;
pub mod tol;
pub mod witness;

pub use error::{Error, Result};
pub use matcore::{CMatrix, DimPair, C64};
pub use nonlinear::{NonlinearWitness, QuadraticTerm};
pub use par::Execution;
pub use states::{DensityOperator, PureState};
pub use witness::{LinearWitness, Provenance};

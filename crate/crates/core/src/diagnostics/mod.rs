//! Checks that audit computed trajectories.

pub mod boundary;
pub mod cone;
pub mod dissipative;
pub mod energy;
pub mod kato;
pub(crate) mod quadrature;
pub mod report;
pub mod testfn;
pub mod translation;

pub use boundary::{boundary_check, boundary_summary, BoundarySummary};
pub use cone::{cone_check, data_support};
pub use dissipative::{dissipative_verify, KappaGrid, DISSIPATIVE_TOL};
pub use energy::{energy_audit, EnergyLedger, LedgerRow, ENERGY_TOL};
pub use kato::{kato_check, KATO_TOL};
pub use report::{Tolerance, VerificationReport};
pub use testfn::{TestFunction, TestFunctionDictionary};
pub use translation::{translation_probe, TranslationRow};

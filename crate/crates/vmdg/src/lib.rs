//! Runge-Kutta discontinuous Galerkin solver for the Vlasov-Maxwell system.
//!
//! The phase-space distribution advects under the self-consistent
//! electromagnetic field on a Cartesian `x × v` mesh (periodic in x, compact
//! support in v), discretized with modal DG of total degree `k` and upwind
//! fluxes, and advanced with the three-stage SSP Runge-Kutta scheme. The
//! crate doubles as a verification harness: the discrete dissipation and
//! energy identities of the operators are checked against independent
//! edge-walking assemblies, and convergence orders are measured on scenarios
//! with exact or manufactured solutions.
//!
//! Modules follow the data flow: [`mesh`] and [`basis`] build the discrete
//! space, [`field`] holds coefficients, [`vlasov`] and [`maxwell`] evaluate
//! the spatial operators, [`stepper`] advances the coupled system,
//! [`diagnostics`]/[`verify`]/[`study`] measure it, and [`scenario`] supplies
//! the problems.

pub mod basis;
pub mod config;
pub mod csv;
pub mod diagnostics;
pub mod error;
pub mod field;
pub mod maxwell;
pub mod mesh;
pub mod scenario;
pub mod stepper;
pub mod study;
pub mod verify;
pub mod vlasov;

pub use error::{Error, Result};

/// Cap the worker pool from `VM_RKDG_THREADS`; call once at startup.
/// Results are bit-identical for any thread count (cells own their outputs
/// and reductions are sequential), so this only trades speed.
pub fn configure_threads_from_env() {
    if let Ok(v) = std::env::var("VM_RKDG_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

//! Two-qubit noisy-channel toolkit: exact Kraus-channel evolution, entanglement
//! diagnostics (PPT criterion, Wootters concurrence), probabilistic local
//! filtering between channels, derivative-free filter optimization and
//! phase-diagram scans over the channel parameters.
//!
//! Conventions used throughout the crate:
//! - two-qubit basis order is `{|00>, |01>, |10>, |11>}` with qubit A as the
//!   left tensor factor;
//! - partial transposition acts on subsystem A;
//! - a "filter" is a probabilistic local operation `rho -> F rho F† / Tr(..)`
//!   with `F†F <= 1`, canonically `F = U diag(1, sqrt(r)) V`.

pub mod adaptation;
pub mod channels;
pub mod entanglement;
pub mod linalg;
pub mod optimize;
pub mod sampling;
pub mod scan;
pub mod states;

pub use adaptation::{
    apply_filter, loss_mixture_concurrence, loss_mixture_state, loss_mixture_threshold,
    post_channel_filter_limit, run_pipeline, sufficient_filter_bound, swap_adapted_state,
    Configuration, FilterOutcome, LocalFilter, PipelineInput, PipelineRun, PipelineSpec, StageOp,
};
pub use channels::{amplitude_damping, depolarizing, replace_channel, KrausChannel};
pub use entanglement::{concurrence, is_entangled, partial_transpose_a, EntanglementReport};
pub use linalg::{kron, CMat2, CMat4, C64};
pub use optimize::{
    genetic_optimize, grid_search_diag, GaConfig, Objective, OptimizationProblem,
    OptimizationResult, PipelineTemplate, SearchSpace, TemplateStage,
};
pub use scan::{classify_point, scan_grid, Classification, ScanConfig, ScanOutput, ScanRecord};
pub use states::{bell, embed, werner, BellKind, Side, TwoQubitState};

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max |m - m†| = {deviation:.3e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("channel violates Kraus completeness (max deviation {deviation:.3e})")]
    InvalidChannel { deviation: f64 },
    #[error("filter annihilated the state (trace {trace:.3e})")]
    ZeroSuccess { trace: f64 },
    #[error("no feasible point in the search space")]
    NoFeasiblePoint,
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Formats a float with 12 significant digits, the precision used by every
/// textual artifact (CSV cells, CLI reports).
pub fn fmt_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

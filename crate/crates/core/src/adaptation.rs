//! Probabilistic local filters, filtered channel pipelines with success-rate
//! accounting, and the closed-form predicates for the asymmetric loss-channel
//! example (mixture state, entanglement boundary, post-swap concurrence) and
//! the symmetric Werner + amplitude-damping example (filter bound).

use crate::channels::KrausChannel;
use crate::entanglement::{is_entangled, EntanglementReport, DEFAULT_PT_TOLERANCE};
use crate::linalg::{CMat2, CMat4, C64};
use crate::states::{bell, embed, werner, BellKind, Side, TwoQubitState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Below this trace the filtered operator cannot be renormalized meaningfully.
pub const ZERO_SUCCESS_TOL: f64 = 1e-12;

fn rz(angle: f64) -> CMat2 {
    let half = angle / 2.0;
    let mut m = CMat2::zero();
    m[(0, 0)] = C64::from_polar(1.0, -half);
    m[(1, 1)] = C64::from_polar(1.0, half);
    m
}

fn ry(angle: f64) -> CMat2 {
    let half = angle / 2.0;
    CMat2::from_real([[half.cos(), -half.sin()], [half.sin(), half.cos()]])
}

/// Single-qubit unitary `Rz(α)·Ry(β)·Rz(δ)`; covers SU(2) up to the global
/// phase, which cancels in density-matrix conjugation.
pub fn unitary_from_angles(angles: [f64; 3]) -> CMat2 {
    rz(angles[0]) * ry(angles[1]) * rz(angles[2])
}

const SWAP_ANGLES: [f64; 3] = [std::f64::consts::PI, std::f64::consts::PI, 0.0];

/// A probabilistic local filter in canonical form `F = U·diag(1,√r)·V` with
/// `r ∈ [0,1]`, so `F†F ≤ 1` holds by construction. `r = 1` degenerates to a
/// plain unitary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FilterRepr", into = "FilterRepr")]
pub struct LocalFilter {
    r: f64,
    u_angles: [f64; 3],
    v_angles: [f64; 3],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilterRepr {
    r: f64,
    #[serde(default)]
    u_angles: [f64; 3],
    #[serde(default)]
    v_angles: [f64; 3],
}

impl TryFrom<FilterRepr> for LocalFilter {
    type Error = Error;
    fn try_from(repr: FilterRepr) -> Result<Self> {
        LocalFilter::new(repr.r, repr.u_angles, repr.v_angles)
    }
}

impl From<LocalFilter> for FilterRepr {
    fn from(f: LocalFilter) -> Self {
        FilterRepr {
            r: f.r,
            u_angles: f.u_angles,
            v_angles: f.v_angles,
        }
    }
}

impl LocalFilter {
    pub fn new(r: f64, u_angles: [f64; 3], v_angles: [f64; 3]) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::domain(format!(
                "filter parameter r={r} outside [0,1]"
            )));
        }
        Ok(Self {
            r,
            u_angles,
            v_angles,
        })
    }

    pub fn identity() -> Self {
        Self {
            r: 1.0,
            u_angles: [0.0; 3],
            v_angles: [0.0; 3],
        }
    }

    /// `diag(1, √r)` — filtering in the computational basis.
    pub fn diagonal(r: f64) -> Result<Self> {
        Self::new(r, [0.0; 3], [0.0; 3])
    }

    /// `diag(√r, 1)` up to a global phase (the diagonal filter conjugated by
    /// the basis swap).
    pub fn flipped_diagonal(r: f64) -> Result<Self> {
        Self::new(r, SWAP_ANGLES, SWAP_ANGLES)
    }

    /// Pure unitary adapter (`r = 1`).
    pub fn unitary(angles: [f64; 3]) -> Self {
        Self {
            r: 1.0,
            u_angles: angles,
            v_angles: [0.0; 3],
        }
    }

    /// The `|0> <-> |1>` exchange (σ₁ up to a global phase).
    pub fn swap() -> Self {
        Self::unitary(SWAP_ANGLES)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn u_angles(&self) -> [f64; 3] {
        self.u_angles
    }

    pub fn v_angles(&self) -> [f64; 3] {
        self.v_angles
    }

    pub fn is_identity(&self) -> bool {
        self.r == 1.0 && self.u_angles == [0.0; 3] && self.v_angles == [0.0; 3]
    }

    /// Realizes the filter matrix `U·diag(1,√r)·V`.
    pub fn matrix(&self) -> CMat2 {
        let f0 = CMat2::from_diag([1.0, self.r.sqrt()]);
        unitary_from_angles(self.u_angles) * f0 * unitary_from_angles(self.v_angles)
    }
}

/// Normalized post-filter state plus the success probability of the filter.
#[derive(Debug, Clone, Copy)]
pub struct FilterOutcome {
    pub state: TwoQubitState,
    pub success_rate: f64,
}

/// Applies a filter to one qubit: `rho' = E rho E† / S` with `E` the embedded
/// filter and `S = Tr(E rho E†)` the success rate.
pub fn apply_filter(state: &TwoQubitState, f: &LocalFilter, side: Side) -> Result<FilterOutcome> {
    let e = embed(&f.matrix(), side);
    let unnormalized = e * *state.rho() * e.adjoint();
    let trace = unnormalized.trace().re;
    if trace < ZERO_SUCCESS_TOL {
        return Err(Error::ZeroSuccess { trace });
    }
    Ok(FilterOutcome {
        state: TwoQubitState::unchecked(unnormalized.scale(1.0 / trace)),
        success_rate: trace,
    })
}

/// Whether noise stages hit one qubit or both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Configuration {
    /// All stages act on qubit B only.
    Asymmetric,
    /// Stages mirrored on qubits A and B.
    Symmetric,
}

/// One pipeline element on a single qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOp {
    Channel(KrausChannel),
    Filter(LocalFilter),
}

impl StageOp {
    fn kind(&self) -> &'static str {
        match self {
            StageOp::Channel(_) => "channel",
            StageOp::Filter(_) => "filter",
        }
    }
}

/// Input to a pipeline: a Bell state, or a Bell state already carrying
/// isotropic noise (the output of a depolarizing preparation stage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineInput {
    Bell(BellKind),
    Werner { kind: BellKind, p: f64 },
}

impl PipelineInput {
    pub fn state(&self) -> Result<TwoQubitState> {
        match *self {
            PipelineInput::Bell(kind) => Ok(bell(kind)),
            PipelineInput::Werner { kind, p } => werner(kind, p),
        }
    }
}

/// Declarative channel/filter sequence per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub configuration: Configuration,
    pub input: PipelineInput,
    #[serde(default)]
    pub stages_a: Vec<StageOp>,
    pub stages_b: Vec<StageOp>,
}

impl PipelineSpec {
    /// Asymmetric pipeline: every stage acts on qubit B.
    pub fn asymmetric(input: BellKind, stages: Vec<StageOp>) -> Self {
        Self {
            configuration: Configuration::Asymmetric,
            input: PipelineInput::Bell(input),
            stages_a: Vec::new(),
            stages_b: stages,
        }
    }

    /// Symmetric pipeline with identical stages mirrored on both qubits.
    pub fn symmetric(input: PipelineInput, stages: Vec<StageOp>) -> Self {
        Self {
            configuration: Configuration::Symmetric,
            input,
            stages_a: stages.clone(),
            stages_b: stages,
        }
    }

    /// Symmetric pipeline with per-side stage lists (stage kinds must still
    /// mirror position by position).
    pub fn symmetric_with(
        input: PipelineInput,
        stages_a: Vec<StageOp>,
        stages_b: Vec<StageOp>,
    ) -> Self {
        Self {
            configuration: Configuration::Symmetric,
            input,
            stages_a,
            stages_b,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.configuration {
            Configuration::Asymmetric => {
                if !self.stages_a.is_empty() {
                    return Err(Error::domain(
                        "asymmetric pipelines must leave qubit A untouched",
                    ));
                }
            }
            Configuration::Symmetric => {
                if self.stages_a.len() != self.stages_b.len() {
                    return Err(Error::domain(format!(
                        "symmetric pipeline sides differ in length ({} vs {})",
                        self.stages_a.len(),
                        self.stages_b.len()
                    )));
                }
                for (i, (a, b)) in self.stages_a.iter().zip(&self.stages_b).enumerate() {
                    if a.kind() != b.kind() {
                        return Err(Error::domain(format!(
                            "symmetric pipeline stage {i} mixes {} and {}",
                            a.kind(),
                            b.kind()
                        )));
                    }
                }
            }
        }
        if let PipelineInput::Werner { p, .. } = self.input {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::domain(format!(
                    "werner parameter p={p} outside [0,1]"
                )));
            }
        }
        Ok(())
    }
}

/// Final pipeline state with cumulative success rate and its entanglement
/// diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct PipelineRun {
    pub outcome: FilterOutcome,
    pub report: EntanglementReport,
}

/// Runs a pipeline: stages are applied in declared order, qubit B first, then
/// qubit A (single-qubit operations on different qubits commute). The
/// cumulative success rate is the product of the per-filter traces, which
/// equals the trace of the final unnormalized operator because channels are
/// trace preserving.
pub fn run_pipeline(spec: &PipelineSpec) -> Result<PipelineRun> {
    spec.validate()?;
    let mut state = spec.input.state()?;
    let mut success_rate = 1.0;
    for (stages, side) in [(&spec.stages_b, Side::B), (&spec.stages_a, Side::A)] {
        for op in stages.iter() {
            match op {
                StageOp::Channel(ch) => {
                    state = ch.apply(&state, side)?;
                }
                StageOp::Filter(f) => {
                    let out = apply_filter(&state, f, side)?;
                    state = out.state;
                    success_rate *= out.success_rate;
                }
            }
        }
    }
    let report = is_entangled(&state, DEFAULT_PT_TOLERANCE)?;
    Ok(PipelineRun {
        outcome: FilterOutcome {
            state,
            success_rate,
        },
        report,
    })
}

/// The mixture produced by two consecutive loss-and-replace channels
/// (replacement states |0> then |1>) on one qubit of |Ψ−>:
/// `p₁p₂|Ψ−><Ψ−| + p₂(1-p₁)/2 · 1⊗|0><0| + (1-p₂)/2 · 1⊗|1><1|`.
pub fn loss_mixture_state(p1: f64, p2: f64) -> Result<TwoQubitState> {
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;
    let q = p1 * p2;
    let rho = bell(BellKind::PsiMinus).rho().scale(q)
        + CMat4::from_diag([1.0, 0.0, 1.0, 0.0]).scale(p2 * (1.0 - p1) / 2.0)
        + CMat4::from_diag([0.0, 1.0, 0.0, 1.0]).scale((1.0 - p2) / 2.0);
    Ok(TwoQubitState::unchecked(rho))
}

/// The same composite with the swap unitary inserted between the channels:
/// `p₁p₂|Φ−><Φ−| + (1-p₁p₂)/2 · 1⊗|1><1|`.
pub fn swap_adapted_state(p1: f64, p2: f64) -> Result<TwoQubitState> {
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;
    let q = p1 * p2;
    let rho = bell(BellKind::PhiMinus).rho().scale(q)
        + CMat4::from_diag([0.0, 1.0, 0.0, 1.0]).scale((1.0 - q) / 2.0);
    Ok(TwoQubitState::unchecked(rho))
}

/// Closed-form concurrence of the unadapted mixture:
/// `p₁p₂ - √((1-p₁)(1-p₂)p₂)` (negative values mean separable).
pub fn loss_mixture_concurrence(p1: f64, p2: f64) -> f64 {
    p1 * p2 - ((1.0 - p1) * (1.0 - p2) * p2).sqrt()
}

/// Entanglement boundary of the unadapted mixture: entangled iff
/// `p₂ > (1-p₁)/(1-p₁+p₁²)`.
pub fn loss_mixture_threshold(p1: f64) -> f64 {
    (1.0 - p1) / (1.0 - p1 + p1 * p1)
}

/// Sufficient filter bound for the symmetric Werner + amplitude-damping
/// pipeline: returns `(2√(p(1+p)) - (1+p)) / (γ(1-p))`, the largest admissible
/// `√r`. Non-positive values mean no filter can help (p ≤ 1/3); values above 1
/// mean even the identity filter keeps the state entangled.
pub fn sufficient_filter_bound(p: f64, gamma: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::domain(format!(
            "filter bound needs 0 < p < 1 (got p={p}); at p=1 no filtering is required"
        )));
    }
    if !(0.0 < gamma && gamma <= 1.0) {
        return Err(Error::domain(format!(
            "filter bound needs 0 < gamma <= 1 (got gamma={gamma})"
        )));
    }
    Ok((2.0 * (p * (1.0 + p)).sqrt() - (1.0 + p)) / (gamma * (1.0 - p)))
}

/// Finite-ε stand-in for the limiting post-channel filtration
/// `|11> -> √(p₁p₂)|11>`, `|01> -> ε|01>` applied to the swap-adapted output.
#[derive(Debug, Clone, Copy)]
pub struct LimitFiltration {
    pub concurrence: f64,
    pub success_rate: f64,
    pub state: TwoQubitState,
}

/// Applies the limiting filtration at finite `eps` to the swap-adapted
/// mixture and reports the resulting concurrence together with the (vanishing
/// as ε → 0) success rate. The concurrence approaches `√(p₁p₂)` monotonically
/// from below as `eps` shrinks.
pub fn post_channel_filter_limit(p1: f64, p2: f64, eps: f64) -> Result<LimitFiltration> {
    check_unit("p1", p1)?;
    check_unit("p2", p2)?;
    let q = p1 * p2;
    if q <= 0.0 {
        return Err(Error::domain("p1*p2 must be positive".to_string()));
    }
    if !(0.0 < eps && eps <= 0.1) {
        return Err(Error::domain(format!("eps={eps} outside (0, 0.1]")));
    }
    if eps >= q.sqrt() {
        return Err(Error::domain(format!(
            "eps={eps} must stay below sqrt(p1*p2)={}",
            q.sqrt()
        )));
    }
    let state = swap_adapted_state(p1, p2)?;
    // per-basis weights |00>:1, |01>:ε, |11>:√q realized (up to scale) by
    // F_A = diag(ε/√q, 1), F_B = diag(1, ε)
    let f_a = LocalFilter::flipped_diagonal((eps / q.sqrt()).powi(2))?;
    let f_b = LocalFilter::diagonal(eps * eps)?;
    let step_a = apply_filter(&state, &f_a, Side::A)?;
    let step_b = apply_filter(&step_a.state, &f_b, Side::B)?;
    let concurrence = crate::entanglement::concurrence(&step_b.state)?;
    Ok(LimitFiltration {
        concurrence,
        success_rate: step_a.success_rate * step_b.success_rate,
        state: step_b.state,
    })
}

fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name}={x} outside [0,1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, ket0, ket1, replace_channel};
    use crate::entanglement::concurrence;

    #[test]
    fn identity_filter_preserves_state() {
        let s = werner(BellKind::PsiMinus, 0.6).unwrap();
        let out = apply_filter(&s, &LocalFilter::identity(), Side::A).unwrap();
        assert!((out.success_rate - 1.0).abs() < 1e-12);
        assert!(out.state.rho().max_abs_diff(s.rho()) < 1e-12);
    }

    #[test]
    fn swap_filter_realizes_sigma_x() {
        let m = LocalFilter::swap().matrix();
        // equal to σ₁ up to a global phase
        let phase = m[(0, 1)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        let normalized = m.scale_c(phase.conj());
        assert!(normalized.max_abs_diff(&CMat2::pauli_x()) < 1e-12);
    }

    #[test]
    fn flipped_diagonal_matrix() {
        let r: f64 = 0.36;
        let m = LocalFilter::flipped_diagonal(r).unwrap().matrix();
        let phase = m[(0, 0)] / m[(0, 0)].norm();
        let normalized = m.scale_c(phase.conj());
        assert!(normalized.max_abs_diff(&CMat2::from_diag([r.sqrt(), 1.0])) < 1e-12);
    }

    #[test]
    fn annihilating_filter_reports_zero_success() {
        // |00><00| filtered by diag(0,1)-like projector on B: |0> component killed
        let mut rho = CMat4::zero();
        rho[(0, 0)] = C64::new(1.0, 0.0);
        let state = TwoQubitState::from_matrix(rho).unwrap();
        let f = LocalFilter::flipped_diagonal(0.0).unwrap(); // diag(0, 1)
        assert!(matches!(
            apply_filter(&state, &f, Side::B),
            Err(Error::ZeroSuccess { .. })
        ));
    }

    #[test]
    fn diagonal_filter_success_rate_is_trace() {
        let s = werner(BellKind::PsiMinus, 0.8).unwrap();
        let r = 0.49;
        let f = LocalFilter::diagonal(r).unwrap();
        let first = apply_filter(&s, &f, Side::A).unwrap();
        let second = apply_filter(&first.state, &f, Side::B).unwrap();
        let s_product = first.success_rate * second.success_rate;
        // recompute S directly as the trace of the doubly filtered operator
        let e = crate::linalg::kron(&f.matrix(), &f.matrix());
        let expected = (e * *s.rho() * e.adjoint()).trace().re;
        assert!((s_product - expected).abs() < 1e-12);
    }

    #[test]
    fn filter_contract_keeps_f_dagger_f_below_identity() {
        for (r, u, v) in [
            (1.0, [0.0; 3], [0.0; 3]),
            (0.3, [0.5, 1.0, -0.7], [2.0, 0.1, 0.9]),
            (0.0, [1.0, 2.0, 3.0], [0.0; 3]),
        ] {
            let f = LocalFilter::new(r, u, v).unwrap().matrix();
            let prod = f.adjoint() * f;
            // max eigenvalue of a 2x2 Hermitian PSD matrix
            let tr = prod.trace().re;
            let det = (prod[(0, 0)] * prod[(1, 1)] - prod[(0, 1)] * prod[(1, 0)]).re;
            let max_ev = 0.5 * (tr + (tr * tr - 4.0 * det).max(0.0).sqrt());
            assert!(max_ev <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn filter_rejects_bad_r() {
        assert!(LocalFilter::diagonal(-0.1).is_err());
        assert!(LocalFilter::diagonal(1.1).is_err());
    }

    #[test]
    fn asymmetric_pipeline_reproduces_the_mixture_state() {
        for (p1, p2) in [(0.9, 0.9), (0.5, 0.5), (0.3, 0.8), (1.0, 1.0)] {
            let spec = PipelineSpec::asymmetric(
                BellKind::PsiMinus,
                vec![
                    StageOp::Channel(replace_channel(p1, ket0()).unwrap()),
                    StageOp::Channel(replace_channel(p2, ket1()).unwrap()),
                ],
            );
            let run = run_pipeline(&spec).unwrap();
            let expected = loss_mixture_state(p1, p2).unwrap();
            assert!(run.outcome.state.rho().max_abs_diff(expected.rho()) < 1e-12);
            assert!((run.outcome.success_rate - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn swap_adapter_reproduces_the_converted_mixture() {
        for (p1, p2) in [(0.5, 0.5), (0.9, 0.4), (0.2, 0.7)] {
            let spec = PipelineSpec::asymmetric(
                BellKind::PsiMinus,
                vec![
                    StageOp::Channel(replace_channel(p1, ket0()).unwrap()),
                    StageOp::Filter(LocalFilter::swap()),
                    StageOp::Channel(replace_channel(p2, ket1()).unwrap()),
                ],
            );
            let run = run_pipeline(&spec).unwrap();
            let expected = swap_adapted_state(p1, p2).unwrap();
            assert!(run.outcome.state.rho().max_abs_diff(expected.rho()) < 1e-12);
            // post-swap concurrence is exactly p1*p2
            assert!((run.report.concurrence - p1 * p2).abs() < 1e-9);
        }
    }

    #[test]
    fn mixture_boundary_matches_the_threshold_formula() {
        let p1 = 0.6;
        let threshold = loss_mixture_threshold(p1);
        let c_above = concurrence(&loss_mixture_state(p1, threshold + 1e-3).unwrap()).unwrap();
        let c_below = concurrence(&loss_mixture_state(p1, threshold - 1e-3).unwrap()).unwrap();
        assert!(c_above > 0.0);
        assert!(c_below == 0.0);
    }

    #[test]
    fn mixture_state_limits() {
        let s = loss_mixture_state(1.0, 1.0).unwrap();
        assert!(s.rho().max_abs_diff(bell(BellKind::PsiMinus).rho()) < 1e-15);
    }

    #[test]
    fn filter_bound_values() {
        // algebraic zero at p = 1/3
        assert!(sufficient_filter_bound(1.0 / 3.0, 0.7).unwrap().abs() < 1e-12);
        // printed-formula value at (0.5, 0.8): (√3 - 1.5)/0.4
        let b = sufficient_filter_bound(0.5, 0.8).unwrap();
        assert!((b - (3.0f64.sqrt() - 1.5) / 0.4).abs() < 1e-12);
        assert!((b - 0.580127018922).abs() < 1e-9);
        // negative below the Werner threshold
        assert!(sufficient_filter_bound(0.2, 0.5).unwrap() < 0.0);
        assert!(sufficient_filter_bound(1.0, 0.5).is_err());
        assert!(sufficient_filter_bound(0.5, 0.0).is_err());
    }

    #[test]
    fn filtered_symmetric_pipeline_crosses_the_bound() {
        // at (p, γ) = (0.4, 0.9) the unfiltered Φ− input dies; a filter obeying
        // the bound revives it
        let (p, gamma) = (0.4, 0.9);
        let unfiltered = PipelineSpec::symmetric(
            PipelineInput::Werner {
                kind: BellKind::PhiMinus,
                p,
            },
            vec![StageOp::Channel(amplitude_damping(gamma).unwrap())],
        );
        let run = run_pipeline(&unfiltered).unwrap();
        assert!(!run.report.entangled);

        let sqrt_r = 0.5 * sufficient_filter_bound(p, gamma).unwrap();
        let filtered = PipelineSpec::symmetric(
            PipelineInput::Werner {
                kind: BellKind::PhiMinus,
                p,
            },
            vec![
                StageOp::Filter(LocalFilter::diagonal(sqrt_r * sqrt_r).unwrap()),
                StageOp::Channel(amplitude_damping(gamma).unwrap()),
            ],
        );
        let run = run_pipeline(&filtered).unwrap();
        assert!(
            run.report.entangled,
            "min PT {}",
            run.report.min_pt_eigenvalue
        );
        assert!(run.outcome.success_rate > 0.0 && run.outcome.success_rate <= 1.0);
    }

    #[test]
    fn pipeline_success_rate_matches_final_trace() {
        // run the same symmetric filtered pipeline while tracking the
        // unnormalized operator by hand
        let (p, gamma, r) = (0.6, 0.7, 0.3);
        let spec = PipelineSpec::symmetric(
            PipelineInput::Werner {
                kind: BellKind::PsiMinus,
                p,
            },
            vec![
                StageOp::Filter(LocalFilter::diagonal(r).unwrap()),
                StageOp::Channel(amplitude_damping(gamma).unwrap()),
            ],
        );
        let run = run_pipeline(&spec).unwrap();

        let f = embed(&LocalFilter::diagonal(r).unwrap().matrix(), Side::B);
        let mut un = f * *werner(BellKind::PsiMinus, p).unwrap().rho() * f.adjoint();
        let f = embed(&LocalFilter::diagonal(r).unwrap().matrix(), Side::A);
        un = f * un * f.adjoint();
        let ad = amplitude_damping(gamma).unwrap();
        for side in [Side::B, Side::A] {
            let mut acc = CMat4::zero();
            for k in ad.kraus() {
                let e = embed(k, side);
                acc = acc + e * un * e.adjoint();
            }
            un = acc;
        }
        assert!((run.outcome.success_rate - un.trace().re).abs() < 1e-12);
    }

    #[test]
    fn pipeline_validation_rejects_malformed_specs() {
        let mut spec = PipelineSpec::asymmetric(BellKind::PsiMinus, vec![]);
        spec.stages_a.push(StageOp::Filter(LocalFilter::identity()));
        assert!(spec.validate().is_err());

        let bad_sym = PipelineSpec::symmetric_with(
            PipelineInput::Bell(BellKind::PhiMinus),
            vec![StageOp::Filter(LocalFilter::identity())],
            vec![StageOp::Channel(KrausChannel::identity())],
        );
        assert!(bad_sym.validate().is_err());
    }

    #[test]
    fn limit_filtration_approaches_sqrt_concurrence() {
        let (p1, p2) = (0.5f64, 0.5f64);
        let target = (p1 * p2).sqrt();
        let mut last = 0.0;
        for eps in [1e-1, 1e-2, 1e-3] {
            let out = post_channel_filter_limit(p1, p2, eps).unwrap();
            assert!(out.concurrence > last, "not monotone at eps={eps}");
            assert!(out.success_rate > 0.0);
            last = out.concurrence;
        }
        assert!((last - target).abs() / target < 0.02);

        // degenerate lossless case stays maximally entangled at any eps
        let out = post_channel_filter_limit(1.0, 1.0, 0.05).unwrap();
        assert!((out.concurrence - 1.0).abs() < 1e-9);
    }

    #[test]
    fn limit_filtration_domain_errors() {
        assert!(post_channel_filter_limit(0.0, 0.5, 0.01).is_err());
        assert!(post_channel_filter_limit(0.5, 0.5, 0.0).is_err());
        assert!(post_channel_filter_limit(0.5, 0.5, 0.2).is_err());
        // eps above sqrt(p1 p2)
        assert!(post_channel_filter_limit(0.01, 0.01, 0.05).is_err());
    }

    #[test]
    fn pipeline_spec_json_round_trip() {
        let spec = PipelineSpec::symmetric(
            PipelineInput::Werner {
                kind: BellKind::PhiMinus,
                p: 0.4,
            },
            vec![
                StageOp::Filter(LocalFilter::diagonal(0.25).unwrap()),
                StageOp::Channel(amplitude_damping(0.9).unwrap()),
            ],
        );
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back: PipelineSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        let r1 = run_pipeline(&spec).unwrap();
        let r2 = run_pipeline(&back).unwrap();
        assert_eq!(r1.report.min_pt_eigenvalue, r2.report.min_pt_eigenvalue);
    }
}

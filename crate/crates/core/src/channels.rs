//! Kraus-operator channels: validation, application to one qubit of a
//! two-qubit state, composition, and the three channel families used by the
//! adaptation workflows (depolarizing, amplitude damping, state replacement).

use crate::linalg::{CMat2, C64};
use crate::states::{embed, Side, TwoQubitState};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Completeness deviation below which `validate` reports ok.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Deviation beyond which `apply` refuses to run the channel.
pub const APPLY_COMPLETENESS_TOL: f64 = 1e-8;

/// A quantum channel in Kraus form: `rho -> Σ_k A_k rho A_k†` with
/// `Σ_k A_k† A_k = 1`.
///
/// Serializes as `{"label": .., "kraus": [[[re,im]; 4]; N]}` with each
/// operator stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "ChannelRepr", into = "ChannelRepr")]
pub struct KrausChannel {
    label: String,
    kraus: Vec<CMat2>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    label: String,
    kraus: Vec<[[f64; 2]; 4]>,
}

impl From<ChannelRepr> for KrausChannel {
    fn from(repr: ChannelRepr) -> Self {
        let kraus = repr
            .kraus
            .iter()
            .map(|flat| {
                CMat2::new([
                    [
                        C64::new(flat[0][0], flat[0][1]),
                        C64::new(flat[1][0], flat[1][1]),
                    ],
                    [
                        C64::new(flat[2][0], flat[2][1]),
                        C64::new(flat[3][0], flat[3][1]),
                    ],
                ])
            })
            .collect();
        KrausChannel {
            label: repr.label,
            kraus,
        }
    }
}

impl From<KrausChannel> for ChannelRepr {
    fn from(ch: KrausChannel) -> Self {
        let kraus = ch
            .kraus
            .iter()
            .map(|m| {
                [
                    [m[(0, 0)].re, m[(0, 0)].im],
                    [m[(0, 1)].re, m[(0, 1)].im],
                    [m[(1, 0)].re, m[(1, 0)].im],
                    [m[(1, 1)].re, m[(1, 1)].im],
                ]
            })
            .collect();
        ChannelRepr {
            label: ch.label,
            kraus,
        }
    }
}

/// Outcome of the completeness diagnostic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelValidation {
    /// Max entry of |Σ A_k†A_k - 1|.
    pub deviation: f64,
    pub ok: bool,
}

impl KrausChannel {
    pub fn new(label: impl Into<String>, kraus: Vec<CMat2>) -> Self {
        Self {
            label: label.into(),
            kraus,
        }
    }

    pub fn identity() -> Self {
        Self::new("identity", vec![CMat2::identity()])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kraus(&self) -> &[CMat2] {
        &self.kraus
    }

    /// Max entry of `|Σ_k A_k†A_k - 1|`.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = CMat2::zero();
        for a in &self.kraus {
            sum = sum + a.adjoint() * *a;
        }
        sum.max_abs_diff(&CMat2::identity())
    }

    /// Diagnostic check of the trace-preservation constraint.
    pub fn validate(&self) -> ChannelValidation {
        let deviation = self.completeness_deviation();
        ChannelValidation {
            deviation,
            ok: deviation < COMPLETENESS_TOL,
        }
    }

    /// Applies the channel to one qubit:
    /// `rho' = Σ_k (A_k on side) rho (A_k on side)†`.
    pub fn apply(&self, state: &TwoQubitState, side: Side) -> Result<TwoQubitState> {
        let deviation = self.completeness_deviation();
        if deviation > APPLY_COMPLETENESS_TOL {
            return Err(Error::InvalidChannel { deviation });
        }
        let rho = *state.rho();
        let mut out = crate::linalg::CMat4::zero();
        for a in &self.kraus {
            let e = embed(a, side);
            out = out + e * rho * e.adjoint();
        }
        Ok(TwoQubitState::unchecked(out))
    }

    /// Sequential composition: applying the result equals applying `first`
    /// then `second`. The Kraus set is the full product set `{B_j A_i}`.
    pub fn compose(first: &KrausChannel, second: &KrausChannel) -> KrausChannel {
        let mut kraus = Vec::with_capacity(first.kraus.len() * second.kraus.len());
        for a in &first.kraus {
            for b in &second.kraus {
                kraus.push(*b * *a);
            }
        }
        KrausChannel::new(format!("{}∘{}", second.label, first.label), kraus)
    }

    /// Drops Kraus elements with Frobenius norm below `eps`. Composition never
    /// prunes on its own so that success-rate bookkeeping stays transparent.
    pub fn prune(&self, eps: f64) -> KrausChannel {
        let kraus = self
            .kraus
            .iter()
            .filter(|a| frobenius(a) >= eps)
            .copied()
            .collect();
        KrausChannel::new(self.label.clone(), kraus)
    }
}

fn frobenius(m: &CMat2) -> f64 {
    let mut sum = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            sum += m[(i, j)].norm_sqr();
        }
    }
    sum.sqrt()
}

/// Depolarizing channel, Kraus set
/// `{√((1+3p)/4)·1, √((1-p)/4)·σ₁, √((1-p)/4)·σ₂, √((1-p)/4)·σ₃}`;
/// acts as `rho -> p·rho + (1-p)·1/2`.
pub fn depolarizing(p: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "depolarizing parameter p={p} outside [0,1]"
        )));
    }
    let w_id = ((1.0 + 3.0 * p) / 4.0).sqrt();
    let w_pauli = ((1.0 - p) / 4.0).sqrt();
    Ok(KrausChannel::new(
        format!("depolarizing({p})"),
        vec![
            CMat2::identity().scale(w_id),
            CMat2::pauli_x().scale(w_pauli),
            CMat2::pauli_y().scale(w_pauli),
            CMat2::pauli_z().scale(w_pauli),
        ],
    ))
}

/// Amplitude damping channel, Kraus set
/// `{diag(1, √(1-γ)), [[0, √γ], [0, 0]]}`; non-unital, damps |1> toward |0>.
pub fn amplitude_damping(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!(
            "damping parameter gamma={gamma} outside [0,1]"
        )));
    }
    let mut a2 = CMat2::zero();
    a2[(0, 1)] = C64::new(gamma.sqrt(), 0.0);
    Ok(KrausChannel::new(
        format!("amplitude_damping({gamma})"),
        vec![CMat2::from_diag([1.0, (1.0 - gamma).sqrt()]), a2],
    ))
}

/// Loss-and-replace channel: the qubit passes untouched with probability `p`,
/// otherwise it is replaced by the pure state `|s>`:
/// `rho -> p·rho + (1-p)·|s><s|`. Kraus set
/// `{√p·1, √(1-p)·|s><0|, √(1-p)·|s><1|}`.
pub fn replace_channel(p: f64, replacement: [C64; 2]) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "transmission probability p={p} outside [0,1]"
        )));
    }
    let norm = replacement[0].norm_sqr() + replacement[1].norm_sqr();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!(
            "replacement state norm² = {norm}, expected 1"
        )));
    }
    let w = (1.0 - p).sqrt();
    // |s><0| and |s><1|
    let mut k0 = CMat2::zero();
    k0[(0, 0)] = replacement[0] * w;
    k0[(1, 0)] = replacement[1] * w;
    let mut k1 = CMat2::zero();
    k1[(0, 1)] = replacement[0] * w;
    k1[(1, 1)] = replacement[1] * w;
    Ok(KrausChannel::new(
        format!("replace({p})"),
        vec![CMat2::identity().scale(p.sqrt()), k0, k1],
    ))
}

/// Computational-basis kets as replacement states.
pub fn ket0() -> [C64; 2] {
    [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]
}

pub fn ket1() -> [C64; 2] {
    [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]
}

//! Two-qubit state construction: Bell states, Werner (isotropic-noise) states
//! and single-qubit operator embedding.
//!
//! Basis order is `{|00>, |01>, |10>, |11>}`; qubit A is the left tensor
//! factor. Every partial-transpose and filter-placement convention in the
//! crate hangs off this single choice.

use crate::linalg::{eig_hermitian, kron, CMat2, CMat4, C64};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Max |rho - rho†| entry allowed by the state invariant.
pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
/// |trace - 1| allowed by the state invariant.
pub const STATE_TRACE_TOL: f64 = 1e-10;
/// Smallest admissible eigenvalue of a density matrix.
pub const STATE_PSD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellKind {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellKind {
    /// State-vector amplitudes over `{|00>, |01>, |10>, |11>}`.
    fn amplitudes(self) -> [f64; 4] {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        match self {
            BellKind::PsiMinus => [0.0, s, -s, 0.0],
            BellKind::PsiPlus => [0.0, s, s, 0.0],
            BellKind::PhiMinus => [s, 0.0, 0.0, -s],
            BellKind::PhiPlus => [s, 0.0, 0.0, s],
        }
    }
}

/// Which qubit a single-qubit operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

/// A two-qubit density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    rho: CMat4,
}

impl TwoQubitState {
    /// Validates the density-matrix invariants before accepting the matrix.
    pub fn from_matrix(rho: CMat4) -> Result<Self> {
        let state = Self { rho };
        state.validate()?;
        Ok(state)
    }

    /// Wraps a matrix that is known to satisfy the invariants (outputs of
    /// trace-preserving channels, normalized filter outputs, convex mixes).
    pub(crate) fn unchecked(rho: CMat4) -> Self {
        Self { rho }
    }

    pub fn rho(&self) -> &CMat4 {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// Tr(rho²).
    pub fn purity(&self) -> f64 {
        (self.rho * self.rho).trace().re
    }

    /// Checks Hermiticity, unit trace and positive semidefiniteness.
    pub fn validate(&self) -> Result<()> {
        let dev = self.rho.hermiticity_deviation();
        if dev > STATE_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = self.rho.trace();
        if (tr.re - 1.0).abs() > STATE_TRACE_TOL || tr.im.abs() > STATE_TRACE_TOL {
            return Err(Error::domain(format!(
                "density matrix trace {} is not 1",
                tr.re
            )));
        }
        let eig = eig_hermitian(&self.rho.hermitized())?;
        let min_eigenvalue = eig.eigenvalues[3];
        if min_eigenvalue < -STATE_PSD_TOL {
            return Err(Error::NotPsd { min_eigenvalue });
        }
        Ok(())
    }
}

/// The four maximally entangled Bell states as density matrices.
pub fn bell(kind: BellKind) -> TwoQubitState {
    let amps = kind.amplitudes();
    let mut rho = CMat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            rho[(i, j)] = C64::new(amps[i] * amps[j], 0.0);
        }
    }
    TwoQubitState::unchecked(rho)
}

/// Werner-type state with isotropic noise:
/// `rho = p |Bell><Bell| + (1-p)/4 · 1`.
///
/// Only the `PsiMinus` / `PhiMinus` kinds are accepted; arbitrary states mix
/// through [`isotropic_mix`].
pub fn werner(kind: BellKind, p: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!(
            "werner parameter p={p} outside [0,1]"
        )));
    }
    match kind {
        BellKind::PsiMinus | BellKind::PhiMinus => isotropic_mix(&bell(kind), p),
        other => Err(Error::domain(format!(
            "werner states are built from PsiMinus or PhiMinus, not {other:?}"
        ))),
    }
}

/// `p·rho + (1-p)/4 · 1` for any input state.
pub fn isotropic_mix(state: &TwoQubitState, p: f64) -> Result<TwoQubitState> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("mixing weight p={p} outside [0,1]")));
    }
    let rho = state.rho().scale(p) + CMat4::identity().scale((1.0 - p) / 4.0);
    Ok(TwoQubitState::unchecked(rho))
}

/// Embeds a single-qubit operator into the two-qubit space:
/// side A gives `op ⊗ 1`, side B gives `1 ⊗ op`.
pub fn embed(op: &CMat2, side: Side) -> CMat4 {
    match side {
        Side::A => kron(op, &CMat2::identity()),
        Side::B => kron(&CMat2::identity(), op),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMat2;

    #[test]
    fn psi_minus_matrix_entries() {
        let rho = *bell(BellKind::PsiMinus).rho();
        assert!((rho[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((rho[(2, 2)].re - 0.5).abs() < 1e-15);
        assert!((rho[(1, 2)].re + 0.5).abs() < 1e-15);
        assert!((rho[(2, 1)].re + 0.5).abs() < 1e-15);
        assert!(rho[(0, 0)].norm() < 1e-15 && rho[(3, 3)].norm() < 1e-15);
    }

    #[test]
    fn phi_minus_matrix_entries() {
        let rho = *bell(BellKind::PhiMinus).rho();
        assert!((rho[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((rho[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!((rho[(0, 3)].re + 0.5).abs() < 1e-15);
        assert!((rho[(3, 0)].re + 0.5).abs() < 1e-15);
    }

    #[test]
    fn bell_states_are_pure() {
        for kind in [
            BellKind::PsiMinus,
            BellKind::PsiPlus,
            BellKind::PhiMinus,
            BellKind::PhiPlus,
        ] {
            let s = bell(kind);
            assert!((s.trace() - 1.0).abs() < 1e-14);
            assert!((s.purity() - 1.0).abs() < 1e-14);
            s.validate().unwrap();
        }
    }

    #[test]
    fn werner_limits() {
        let w1 = werner(BellKind::PsiMinus, 1.0).unwrap();
        assert!(w1.rho().max_abs_diff(bell(BellKind::PsiMinus).rho()) < 1e-15);
        let w0 = werner(BellKind::PsiMinus, 0.0).unwrap();
        assert!(w0.rho().max_abs_diff(&CMat4::identity().scale(0.25)) < 1e-15);
    }

    #[test]
    fn werner_validates_for_all_p() {
        for k in 0..=20 {
            let p = k as f64 / 20.0;
            werner(BellKind::PhiMinus, p).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn werner_rejects_bad_inputs() {
        assert!(werner(BellKind::PsiMinus, -0.1).is_err());
        assert!(werner(BellKind::PsiMinus, 1.1).is_err());
        assert!(werner(BellKind::PhiPlus, 0.5).is_err());
    }

    #[test]
    fn embed_examples() {
        assert_eq!(embed(&CMat2::identity(), Side::A), CMat4::identity());

        let z_on_b = embed(&CMat2::pauli_z(), Side::B);
        assert!(z_on_b.max_abs_diff(&CMat4::from_diag([1.0, -1.0, 1.0, -1.0])) < 1e-15);

        let r: f64 = 0.25;
        let f = CMat2::from_diag([1.0, r.sqrt()]);
        let f_on_a = embed(&f, Side::A);
        assert!(f_on_a.max_abs_diff(&CMat4::from_diag([1.0, 1.0, 0.5, 0.5])) < 1e-15);
    }
}

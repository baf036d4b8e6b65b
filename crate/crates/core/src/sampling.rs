//! Seeded random generators for states, unitaries and channels; shared by the
//! property suites, the verification command and the genetic optimizer's
//! randomized cross-checks.

use crate::channels::KrausChannel;
use crate::linalg::{CMat2, CMat4, C64};
use crate::states::TwoQubitState;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

fn ginibre2<R: Rng>(rng: &mut R) -> CMat2 {
    let mut m = CMat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = C64::new(gauss(rng), gauss(rng));
        }
    }
    m
}

fn ginibre4<R: Rng>(rng: &mut R) -> CMat4 {
    let mut m = CMat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            m[(i, j)] = C64::new(gauss(rng), gauss(rng));
        }
    }
    m
}

/// Random two-qubit density matrix from the Ginibre (Hilbert-Schmidt) ensemble.
pub fn random_state<R: Rng>(rng: &mut R) -> TwoQubitState {
    loop {
        let g = ginibre4(rng);
        let rho = g * g.adjoint();
        let tr = rho.trace().re;
        if tr > 1e-12 {
            return TwoQubitState::unchecked(rho.scale(1.0 / tr));
        }
    }
}

/// Random pure two-qubit state.
pub fn random_pure_state<R: Rng>(rng: &mut R) -> TwoQubitState {
    let mut amps = [C64::new(0.0, 0.0); 4];
    loop {
        let mut norm = 0.0;
        for a in amps.iter_mut() {
            *a = C64::new(gauss(rng), gauss(rng));
            norm += a.norm_sqr();
        }
        if norm > 1e-12 {
            let scale = norm.sqrt();
            let mut rho = CMat4::zero();
            for i in 0..4 {
                for j in 0..4 {
                    rho[(i, j)] = amps[i] / scale * (amps[j] / scale).conj();
                }
            }
            return TwoQubitState::unchecked(rho);
        }
    }
}

/// Haar-ish random single-qubit unitary from three uniform Euler angles.
pub fn random_unitary2<R: Rng>(rng: &mut R) -> CMat2 {
    let tau = std::f64::consts::TAU;
    crate::adaptation::unitary_from_angles([
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
        rng.random::<f64>() * tau,
    ])
}

/// Random trace-preserving channel with `n_kraus` elements, built by
/// whitening Ginibre samples: `A_k = G_k · (Σ G_j†G_j)^{-1/2}`.
pub fn random_channel<R: Rng>(rng: &mut R, n_kraus: usize) -> KrausChannel {
    assert!(n_kraus >= 1);
    loop {
        let gs: Vec<CMat2> = (0..n_kraus).map(|_| ginibre2(rng)).collect();
        let mut m = CMat2::zero();
        for g in &gs {
            m = m + g.adjoint() * *g;
        }
        if let Some(w) = inv_sqrt_psd2(&m) {
            let kraus = gs.iter().map(|g| *g * w).collect();
            return KrausChannel::new("random", kraus);
        }
    }
}

/// Inverse square root of a 2x2 Hermitian positive definite matrix via the
/// closed-form eigendecomposition; None when near-singular.
fn inv_sqrt_psd2(m: &CMat2) -> Option<CMat2> {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = m[(0, 1)];
    let tr = a + d;
    let det = a * d - b.norm_sqr();
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    if l2 < 1e-9 {
        return None;
    }
    // eigenvector for l1: (b, l1 - a) unless b ~ 0
    let (v1, v2) = if b.norm() > 1e-14 {
        ([b, C64::new(l1 - a, 0.0)], [b, C64::new(l2 - a, 0.0)])
    } else {
        return Some(CMat2::from_diag([1.0 / l1.sqrt(), 1.0 / l2.sqrt()]));
    };
    let n1 = (v1[0].norm_sqr() + v1[1].norm_sqr()).sqrt();
    let n2 = (v2[0].norm_sqr() + v2[1].norm_sqr()).sqrt();
    let w1 = 1.0 / l1.sqrt();
    let w2 = 1.0 / l2.sqrt();
    let mut out = CMat2::zero();
    for i in 0..2 {
        for j in 0..2 {
            let e1 = [v1[0] / n1, v1[1] / n1];
            let e2 = [v2[0] / n2, v2[1] / n2];
            out[(i, j)] = e1[i] * e1[j].conj() * w1 + e2[i] * e2[j].conj() * w2;
        }
    }
    Some(out)
}

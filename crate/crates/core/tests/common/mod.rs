//! Shared helpers for the integration suites: an eigenvalue oracle that is
//! independent of the library's Jacobi path (characteristic polynomial via
//! Faddeev–LeVerrier plus Durand–Kerner root finding), and small utilities.
#![allow(dead_code)] // each test target uses a different subset

use esd_adapt_core::linalg::{CMat4, C64};

/// Characteristic polynomial coefficients of a 4x4 matrix by the
/// Faddeev–LeVerrier recursion: returns `[c0, c1, c2, c3]` for
/// `λ⁴ + c3·λ³ + c2·λ² + c1·λ + c0`.
pub fn char_poly(m: &CMat4) -> [C64; 4] {
    let a = *m;
    let i4 = CMat4::identity;
    let m1 = a;
    let c3 = -m1.trace();
    let m2 = a * (m1 + i4().scale_c(c3));
    let c2 = -m2.trace() / 2.0;
    let m3 = a * (m2 + i4().scale_c(c2));
    let c1 = -m3.trace() / 3.0;
    let m4 = a * (m3 + i4().scale_c(c1));
    let c0 = -m4.trace() / 4.0;
    [c0, c1, c2, c3]
}

/// Verifies that `claimed` is exactly the eigenvalue multiset of `m` by
/// comparing elementary symmetric polynomials against the characteristic
/// polynomial coefficients (immune to eigenvalue multiplicity).
pub fn assert_spectrum(m: &CMat4, claimed: [f64; 4], tol: f64) {
    let [c0, c1, c2, c3] = char_poly(m);
    let e1: f64 = claimed.iter().sum();
    let mut e2 = 0.0;
    let mut e3 = 0.0;
    for i in 0..4 {
        for j in (i + 1)..4 {
            e2 += claimed[i] * claimed[j];
            for k in (j + 1)..4 {
                e3 += claimed[i] * claimed[j] * claimed[k];
            }
        }
    }
    let e4: f64 = claimed.iter().product();
    // p(λ) = λ⁴ - e1 λ³ + e2 λ² - e3 λ + e4
    assert!(
        (c3.re + e1).abs() < tol,
        "e1 mismatch: {} vs {}",
        -c3.re,
        e1
    );
    assert!((c2.re - e2).abs() < tol, "e2 mismatch: {} vs {}", c2.re, e2);
    assert!(
        (c1.re + e3).abs() < tol,
        "e3 mismatch: {} vs {}",
        -c1.re,
        e3
    );
    assert!((c0.re - e4).abs() < tol, "e4 mismatch: {} vs {}", c0.re, e4);
    assert!(c3.im.abs() < tol && c2.im.abs() < tol && c1.im.abs() < tol && c0.im.abs() < tol);
}

/// All roots of the quartic `λ⁴ + c3λ³ + c2λ² + c1λ + c0` by Durand–Kerner.
pub fn quartic_roots(coeffs: [C64; 4]) -> [C64; 4] {
    let [c0, c1, c2, c3] = coeffs;
    let eval = |z: C64| ((z + c3) * z + c2) * z * z + c1 * z + c0;
    let mut roots = [
        C64::new(0.4, 0.9),
        C64::new(0.4, 0.9) * C64::new(0.4, 0.9),
        C64::new(0.4, 0.9) * C64::new(0.4, 0.9) * C64::new(0.4, 0.9),
        C64::new(0.4, 0.9) * C64::new(0.4, 0.9) * C64::new(0.4, 0.9) * C64::new(0.4, 0.9),
    ];
    for _ in 0..500 {
        let mut next = roots;
        let mut moved = 0.0f64;
        for i in 0..4 {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-30 {
                continue;
            }
            let step = eval(roots[i]) / denom;
            next[i] = roots[i] - step;
            moved = moved.max(step.norm());
        }
        roots = next;
        if moved < 1e-14 {
            break;
        }
    }
    roots
}

/// Eigenvalues of a Hermitian matrix through the characteristic-polynomial
/// route, sorted descending. Accurate for well-separated spectra.
pub fn eig_oracle(m: &CMat4) -> [f64; 4] {
    let roots = quartic_roots(char_poly(m));
    let mut evs = roots.map(|z| z.re);
    evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
    evs
}

/// Wootters concurrence through the oracle eigensolver on the (diagonalizable)
/// product rho·rho~, fully independent of the library's Hermitian route.
pub fn concurrence_oracle(rho: &CMat4) -> f64 {
    use esd_adapt_core::linalg::{kron, CMat2};
    let yy = kron(&CMat2::pauli_y(), &CMat2::pauli_y());
    let rr = *rho * (yy * rho.conj() * yy);
    let mut lam = eig_oracle(&rr).map(|x| x.max(0.0).sqrt());
    lam.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

//! Dense complex 2x2 / 4x4 matrix kernel: arithmetic, tensor product,
//! Hermitian eigendecomposition via cyclic complex Jacobi rotations, and the
//! Hermitian PSD matrix square root.
//!
//! Everything is stack-allocated and `Copy`; the sizes are fixed because the
//! whole toolkit lives in the one- and two-qubit Hilbert spaces.

use crate::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub type C64 = Complex64;

/// Hermiticity precondition tolerance for the eigensolver (max |m - m†| entry).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalues above `-PSD_CLIP` are clipped to zero by PSD operations;
/// anything below is a genuine PSD violation.
pub const PSD_CLIP: f64 = 1e-10;

const JACOBI_OFF_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

macro_rules! impl_cmat {
    ($name:ident, $n:expr) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name {
            e: [[C64; $n]; $n],
        }

        impl $name {
            pub const fn new(entries: [[C64; $n]; $n]) -> Self {
                Self { e: entries }
            }

            pub fn from_real(entries: [[f64; $n]; $n]) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = C64::new(entries[i][j], 0.0);
                    }
                }
                m
            }

            pub fn from_diag(diag: [f64; $n]) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    m.e[i][i] = C64::new(diag[i], 0.0);
                }
                m
            }

            pub fn zero() -> Self {
                Self {
                    e: [[C64::new(0.0, 0.0); $n]; $n],
                }
            }

            pub fn identity() -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    m.e[i][i] = C64::new(1.0, 0.0);
                }
                m
            }

            /// Conjugate transpose.
            pub fn adjoint(&self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[j][i].conj();
                    }
                }
                m
            }

            /// Entrywise complex conjugation (no transpose).
            pub fn conj(&self) -> Self {
                let mut m = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = m.e[i][j].conj();
                    }
                }
                m
            }

            pub fn transpose(&self) -> Self {
                let mut m = Self::zero();
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] = self.e[j][i];
                    }
                }
                m
            }

            pub fn trace(&self) -> C64 {
                let mut t = C64::new(0.0, 0.0);
                for i in 0..$n {
                    t += self.e[i][i];
                }
                t
            }

            pub fn scale(&self, s: f64) -> Self {
                self.scale_c(C64::new(s, 0.0))
            }

            pub fn scale_c(&self, s: C64) -> Self {
                let mut m = *self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] *= s;
                    }
                }
                m
            }

            /// Largest entry magnitude.
            pub fn max_abs(&self) -> f64 {
                let mut acc = 0.0f64;
                for i in 0..$n {
                    for j in 0..$n {
                        acc = acc.max(self.e[i][j].norm());
                    }
                }
                acc
            }

            pub fn max_abs_diff(&self, other: &Self) -> f64 {
                (*self - *other).max_abs()
            }

            /// Max |m - m†| entry.
            pub fn hermiticity_deviation(&self) -> f64 {
                self.max_abs_diff(&self.adjoint())
            }

            /// Averages the matrix with its adjoint, removing rounding-level
            /// asymmetry before Hermitian-only algorithms.
            pub fn hermitized(&self) -> Self {
                (*self + self.adjoint()).scale(0.5)
            }

            pub fn is_finite(&self) -> bool {
                self.e
                    .iter()
                    .flatten()
                    .all(|z| z.re.is_finite() && z.im.is_finite())
            }
        }

        impl Index<(usize, usize)> for $name {
            type Output = C64;
            fn index(&self, (i, j): (usize, usize)) -> &C64 {
                &self.e[i][j]
            }
        }

        impl IndexMut<(usize, usize)> for $name {
            fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
                &mut self.e[i][j]
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                let mut m = self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] += rhs.e[i][j];
                    }
                }
                m
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                let mut m = self;
                for i in 0..$n {
                    for j in 0..$n {
                        m.e[i][j] -= rhs.e[i][j];
                    }
                }
                m
            }
        }

        impl Mul for $name {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                let mut m = $name::zero();
                for i in 0..$n {
                    for k in 0..$n {
                        let a = self.e[i][k];
                        if a.re == 0.0 && a.im == 0.0 {
                            continue;
                        }
                        for j in 0..$n {
                            m.e[i][j] += a * rhs.e[k][j];
                        }
                    }
                }
                m
            }
        }
    };
}

impl_cmat!(CMat2, 2);
impl_cmat!(CMat4, 4);

impl CMat2 {
    pub fn pauli_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn pauli_y() -> Self {
        Self::new([
            [C64::new(0.0, 0.0), C64::new(0.0, -1.0)],
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }
}

/// Tensor product with A as the left factor:
/// `(a ⊗ b)[2i+k][2j+l] = a[i][j] * b[k][l]`.
pub fn kron(a: &CMat2, b: &CMat2) -> CMat4 {
    let mut m = CMat4::zero();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    m[(2 * i + k, 2 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Eigendecomposition of a Hermitian 4x4 matrix, `m = V Λ V†`.
///
/// Eigenvalues are sorted descending; `eigenvectors` holds the matching
/// eigenvectors as columns and is unitary.
#[derive(Debug, Clone, Copy)]
pub struct HermitianEig {
    pub eigenvalues: [f64; 4],
    pub eigenvectors: CMat4,
}

/// Diagonalizes a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below 1e-13, or after
/// 100 sweeps. Fails with `NotHermitian` when max |m - m†| exceeds 1e-12.
pub fn eig_hermitian(m: &CMat4) -> Result<HermitianEig> {
    let deviation = m.hermiticity_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut a = m.hermitized();
    let mut v = CMat4::identity();

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diag_norm(&a) < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..3 {
            for q in (p + 1)..4 {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order = [0usize, 1, 2, 3];
    let evs = [a[(0, 0)].re, a[(1, 1)].re, a[(2, 2)].re, a[(3, 3)].re];
    // stable insertion sort, descending
    for i in 1..4 {
        let mut k = i;
        while k > 0 && evs[order[k - 1]] < evs[order[k]] {
            order.swap(k - 1, k);
            k -= 1;
        }
    }

    let mut eigenvalues = [0.0f64; 4];
    let mut eigenvectors = CMat4::zero();
    for (dst, &src) in order.iter().enumerate() {
        eigenvalues[dst] = evs[src];
        for row in 0..4 {
            eigenvectors[(row, dst)] = v[(row, src)];
        }
    }
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diag_norm(a: &CMat4) -> f64 {
    let mut sum = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                sum += a[(i, j)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// One complex Jacobi rotation annihilating a[(p,q)]; accumulates V <- V·J.
fn jacobi_rotate(a: &mut CMat4, v: &mut CMat4, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag < 1e-300 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let phase = apq / mag;
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = phase * (t * c);

    // columns: B = A·J with J[p][p]=c, J[p][q]=s, J[q][p]=-s̄, J[q][q]=c
    for k in 0..4 {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * s.conj();
        a[(k, q)] = akp * s + akq * c;
    }
    // rows: A' = J†·B
    for k in 0..4 {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * s;
        a[(q, k)] = apk * s.conj() + aqk * c;
    }
    // the rotation zeroes (p,q) analytically; pin the rounding residue
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..4 {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s.conj();
        v[(k, q)] = vkp * s + vkq * c;
    }
}

/// Rebuilds `V diag(d) V†`.
pub(crate) fn reconstruct(v: &CMat4, diag: [f64; 4]) -> CMat4 {
    let mut m = CMat4::zero();
    for i in 0..4 {
        for j in 0..4 {
            let mut acc = C64::new(0.0, 0.0);
            for k in 0..4 {
                acc += v[(i, k)] * C64::new(diag[k], 0.0) * v[(j, k)].conj();
            }
            m[(i, j)] = acc;
        }
    }
    m
}

/// Hermitian PSD square root: `s` with `s·s = m`, eigenvalues clipped at zero.
///
/// Fails with `NotPsd` when an eigenvalue sits below `-PSD_CLIP`.
pub fn sqrt_psd(m: &CMat4) -> Result<CMat4> {
    let eig = eig_hermitian(m)?;
    let min_eigenvalue = eig.eigenvalues[3];
    if min_eigenvalue < -PSD_CLIP {
        return Err(Error::NotPsd { min_eigenvalue });
    }
    let d = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
    Ok(reconstruct(&eig.eigenvectors, d))
}

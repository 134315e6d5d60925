//! Dense 4×4 complex matrices over the spin-pair Hilbert space.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

pub const DIM: usize = 4;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Row-major 4×4 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat4(pub [[C64; DIM]; DIM]);

impl Mat4 {
    pub const fn zeros() -> Self {
        Mat4([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(d: [f64; DIM]) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = C64::new(d[i], 0.0);
        }
        m
    }

    pub fn from_diagonal(d: [C64; DIM]) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = d[i];
        }
        m
    }

    /// |a⟩⟨b|
    pub fn outer(a: &[C64; DIM], b: &[C64; DIM]) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = a[i] * b[j].conj();
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = self.0[j][i];
            }
        }
        m
    }

    pub fn trace(&self) -> C64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn diagonal(&self) -> [C64; DIM] {
        std::array::from_fn(|i| self.0[i][i])
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn apply(&self, v: &[C64; DIM]) -> [C64; DIM] {
        std::array::from_fn(|i| (0..DIM).map(|j| self.0[i][j] * v[j]).sum())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.adjoint()) <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (self.adjoint() * *self).max_abs_diff(&Mat4::identity()) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.0
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm of the strictly off-diagonal part.
    fn off_diagonal_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..DIM {
            for j in 0..DIM {
                if i != j {
                    s += self.0[i][j].norm_sqr();
                }
            }
        }
        s.sqrt()
    }
}

impl Mul for Mat4 {
    type Output = Mat4;

    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut m = Mat4::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl Add for Mat4 {
    type Output = Mat4;

    fn add(self, rhs: Mat4) -> Mat4 {
        let mut m = self;
        for (a, b) in m.0.iter_mut().flatten().zip(rhs.0.iter().flatten()) {
            *a += b;
        }
        m
    }
}

impl Sub for Mat4 {
    type Output = Mat4;

    fn sub(self, rhs: Mat4) -> Mat4 {
        self + (-rhs)
    }
}

impl Neg for Mat4 {
    type Output = Mat4;

    fn neg(self) -> Mat4 {
        self.scale_real(-1.0)
    }
}

/// Eigenvalues of a Hermitian 4×4 matrix, ascending.
///
/// Cyclic complex Jacobi: each pivot `a_pq = |a_pq| e^{iθ}` is first made real
/// by a diagonal phase on column `q`, then annihilated by a real plane
/// rotation. Only the Hermitian part of the input is used.
pub fn hermitian_eigenvalues(m: &Mat4) -> [f64; DIM] {
    const MAX_SWEEPS: usize = 64;

    let mut a = (*m + m.adjoint()).scale_real(0.5);
    let scale = a.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return [0.0; DIM];
    }
    let tol = 1e-17 * scale;

    for _ in 0..MAX_SWEEPS {
        if a.off_diagonal_norm() <= tol {
            break;
        }
        for p in 0..DIM - 1 {
            for q in p + 1..DIM {
                let apq = a.0[p][q];
                let g = apq.norm();
                if g <= tol * 1e-3 {
                    continue;
                }
                let phase = apq / g;
                let app = a.0[p][p].re;
                let aqq = a.0[q][q].re;
                let theta = (aqq - app) / (2.0 * g);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // J = D R with D = diag(.., e^{-iθ} at q, ..), R real rotation in (p,q).
                let mut j = Mat4::identity();
                j.0[p][p] = C64::new(c, 0.0);
                j.0[p][q] = C64::new(s, 0.0);
                j.0[q][p] = -phase.conj() * s;
                j.0[q][q] = phase.conj() * c;
                a = j.adjoint() * a * j;
                a.0[p][q] = ZERO;
                a.0[q][p] = ZERO;
            }
        }
    }

    let mut ev: [f64; DIM] = std::array::from_fn(|i| a.0[i][i].re);
    ev.sort_by(|x, y| x.total_cmp(y));
    ev
}

//! 2×2 complex matrices.

use std::ops::{Mul, Neg, Sub};

use num_complex::Complex;

use crate::scalar::{Real, C};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T: Real>(pub [[C<T>; 2]; 2]);

impl<T: Real> Mat2<T> {
    pub fn new(a: C<T>, b: C<T>, c: C<T>, d: C<T>) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn identity() -> Self {
        let (o, z) = (
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::zero()),
        );
        Mat2([[o, z], [z, o]])
    }

    pub fn diag(a: C<T>, d: C<T>) -> Self {
        let z = Complex::new(T::zero(), T::zero());
        Mat2([[a, z], [z, d]])
    }

    pub fn from_columns(c0: [C<T>; 2], c1: [C<T>; 2]) -> Self {
        Mat2([[c0[0], c1[0]], [c0[1], c1[1]]])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C<T> {
        self.0[i][j]
    }

    pub fn column(&self, j: usize) -> [C<T>; 2] {
        [self.0[0][j], self.0[1][j]]
    }

    pub fn det(&self) -> C<T> {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C<T> {
        self.0[0][0] + self.0[1][1]
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn scale(&self, k: C<T>) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn inverse(&self) -> Self {
        let m = &self.0;
        let d = self.det();
        Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]])
    }

    pub fn apply(&self, v: [C<T>; 2]) -> [C<T>; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Frobenius norm.
    pub fn norm(&self) -> T {
        self.0
            .iter()
            .flatten()
            .map(|x| x.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Eigenvalues `(λ₊, λ₋)` with `λ± = tr/2 ± √(tr²/4 − det)`.
    pub fn eigenvalues(&self) -> (C<T>, C<T>) {
        let half = T::lit(0.5);
        let m = self.trace() * half;
        let disc = (m * m - self.det()).sqrt();
        (m + disc, m - disc)
    }

    /// Unit eigenvector for eigenvalue `lambda`, from the better-conditioned
    /// row of `M − λI`.
    pub fn eigenvector(&self, lambda: C<T>) -> [C<T>; 2] {
        let m = &self.0;
        let a = m[0][0] - lambda;
        let b = m[0][1];
        let c = m[1][0];
        let d = m[1][1] - lambda;
        let row0 = a.norm() + b.norm();
        let row1 = c.norm() + d.norm();
        let v = if row0 >= row1 {
            if row0 == T::zero() {
                [
                    Complex::new(T::one(), T::zero()),
                    Complex::new(T::zero(), T::zero()),
                ]
            } else {
                [b, -a]
            }
        } else {
            [d, -c]
        };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    }
}

impl<T: Real> Mul for Mat2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }
}

impl<T: Real> Sub for Mat2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        let mut out = self.0;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = out[i][j] - o.0[i][j];
            }
        }
        Mat2(out)
    }
}

impl<T: Real> Neg for Mat2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(Complex::new(-T::one(), T::zero()))
    }
}

//! Small dense complex matrices and a Hermitian eigensolver.
//!
//! Matrices here are at most a few dozen rows (one row per mode of a given
//! order), so a cyclic Jacobi sweep is both accurate and fast enough.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::scalar::Scalar;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex<T>>(dim: usize, mut f: F) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(values: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim, "vector length must match matrix dimension");
        (0..self.dim)
            .map(|i| (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, j| acc + self[(i, j)] * v[j]))
            .collect()
    }

    /// `<v| M |v>`.
    pub fn expectation(&self, v: &[Complex<T>]) -> Complex<T> {
        let mv = self.apply(v);
        inner(v, &mv)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `max |M - M^dagger|`.
    pub fn hermiticity_residual(&self) -> T {
        (self - &self.adjoint()).max_abs()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi
    /// rotations. Eigenvalues are returned in descending order, with the
    /// eigenvectors as the matching columns of `vectors`.
    pub fn hermitian_eigen(&self) -> HermitianEigen<T> {
        let n = self.dim;
        let mut a = self.clone();
        let mut v = Self::identity(n);
        let tol = T::epsilon() * T::lit(0.5);
        let scale = a.max_abs().max(T::min_positive_value());
        for _sweep in 0..100 {
            let mut off = T::zero();
            for p in 0..n {
                for q in (p + 1)..n {
                    off += a[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= tol * scale {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let b = apq.norm();
                    if b <= tol * scale * T::lit(1e-3) {
                        continue;
                    }
                    let phase = apq / b; // e^{i alpha}
                    let app = a[(p, p)].re;
                    let aqq = a[(q, q)].re;
                    let zeta = (aqq - app) / (b + b);
                    let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                    let c = T::one() / (T::one() + t * t).sqrt();
                    let s = t * c;
                    // G = diag(1, e^{-i alpha}) * [[c, s], [-s, c]]
                    let g_pp = Complex::new(c, T::zero());
                    let g_pq = Complex::new(s, T::zero());
                    let g_qp = -phase.conj() * s;
                    let g_qq = phase.conj() * c;
                    // A <- A G
                    for k in 0..n {
                        let akp = a[(k, p)];
                        let akq = a[(k, q)];
                        a[(k, p)] = akp * g_pp + akq * g_qp;
                        a[(k, q)] = akp * g_pq + akq * g_qq;
                    }
                    // A <- G^dagger A
                    for k in 0..n {
                        let apk = a[(p, k)];
                        let aqk = a[(q, k)];
                        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
                        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
                    }
                    a[(p, q)] = Complex::new(T::zero(), T::zero());
                    a[(q, p)] = Complex::new(T::zero(), T::zero());
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = vkp * g_pp + vkq * g_qp;
                        v[(k, q)] = vkp * g_pq + vkq * g_qq;
                    }
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[(j, j)]
                .re
                .partial_cmp(&a[(i, i)].re)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let values = order.iter().map(|&i| a[(i, i)].re).collect();
        let vectors = Self::from_fn(n, |r, c| v[(r, order[c])]);
        HermitianEigen { values, vectors }
    }

    /// `exp(-i t H)` for Hermitian `H`, through its eigen-decomposition.
    pub fn exp_i_hermitian(&self, t: T) -> Self {
        let eig = self.hermitian_eigen();
        let phases: Vec<Complex<T>> = eig
            .values
            .iter()
            .map(|&l| Complex::from_polar(T::one(), -t * l))
            .collect();
        let vd = Self::from_fn(self.dim, |i, j| eig.vectors[(i, j)] * phases[j]);
        &vd * &eig.vectors.adjoint()
    }
}

#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

/// `<a|b>` (conjugate-linear in the first argument).
pub fn inner<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Scalar> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Scalar> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.dim, rhs.dim);
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_hermitian(n: usize, seed: &[f64]) -> CMatrix<f64> {
        let mut m = CMatrix::zeros(n);
        let mut k = 0;
        for i in 0..n {
            m[(i, i)] = c(seed[k % seed.len()], 0.0);
            k += 1;
            for j in (i + 1)..n {
                let v = c(seed[k % seed.len()], seed[(k + 1) % seed.len()]);
                k += 2;
                m[(i, j)] = v;
                m[(j, i)] = v.conj();
            }
        }
        m
    }

    #[test]
    fn pauli_y_eigen() {
        let sy = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        });
        let e = sy.hermitian_eigen();
        assert!((e.values[0] - 1.0).abs() < 1e-15);
        assert!((e.values[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let m = CMatrix::<f64>::zeros(3);
        assert_eq!(m.exp_i_hermitian(1.3), CMatrix::identity(3));
    }

    proptest! {
        #[test]
        fn eigen_reconstructs_matrix(seed in proptest::collection::vec(-2.0f64..2.0, 30), n in 1usize..7) {
            let m = random_hermitian(n, &seed);
            let e = m.hermitian_eigen();
            let d = CMatrix::diagonal(&e.values.iter().map(|&v| c(v, 0.0)).collect::<Vec<_>>());
            let back = &(&e.vectors * &d) * &e.vectors.adjoint();
            prop_assert!((&back - &m).max_abs() < 1e-12);
            let unit = &e.vectors.adjoint() * &e.vectors;
            prop_assert!((&unit - &CMatrix::identity(n)).max_abs() < 1e-12);
            prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }

        #[test]
        fn exponential_is_unitary(seed in proptest::collection::vec(-2.0f64..2.0, 30), t in -5.0f64..5.0) {
            let m = random_hermitian(4, &seed);
            let u = m.exp_i_hermitian(t);
            let unit = &u.adjoint() * &u;
            prop_assert!((&unit - &CMatrix::identity(4)).max_abs() < 1e-12);
            // group law: U(t) U(-t) = 1
            let back = &u * &m.exp_i_hermitian(-t);
            prop_assert!((&back - &CMatrix::identity(4)).max_abs() < 1e-12);
        }
    }
}

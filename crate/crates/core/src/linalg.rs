//! Small dense complex linear algebra.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// tanh that does not overflow for large |Re z|.
pub fn stanh(z: C64) -> C64 {
    if z.re >= 0.0 {
        let e = (-z * 2.0).exp();
        (ONE - e) / (ONE + e)
    } else {
        -stanh(-z)
    }
}

/// 2x2 complex matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const SIGMA1: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);
    pub const SIGMA2: Mat2 = Mat2([[ZERO, C64 { re: 0.0, im: -1.0 }], [I, ZERO]]);
    pub const SIGMA3: Mat2 = Mat2([[ONE, ZERO], [ZERO, C64 { re: -1.0, im: 0.0 }]]);

    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
    pub fn inv(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }
    pub fn scale(&self, s: C64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }
    pub fn conj(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]])
    }
    pub fn col(&self, j: usize) -> [C64; 2] {
        [self.0[0][j], self.0[1][j]]
    }
    /// Max-abs entry norm.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        let mut r = [[ZERO; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self.0;
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] += o.0[i][j];
            }
        }
        Mat2(r)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

/// Dense LU factorization with partial pivoting, column-major free: `a[i*n+j]`.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<C64>,
    piv: Vec<usize>,
    norm1: f64,
}

impl Lu {
    /// Returns `None` if a zero pivot is met.
    pub fn factor(n: usize, a: &[C64]) -> Option<Lu> {
        assert_eq!(a.len(), n * n);
        let norm1 = (0..n)
            .map(|j| (0..n).map(|i| a[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut lu = a.to_vec();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pmax) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
            if pmax == 0.0 || !pmax.is_finite() {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let d = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / d;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    let v = lu[k * n + j];
                    lu[i * n + j] -= f * v;
                }
            }
        }
        Some(Lu { n, lu, piv, norm1 })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let u = self.lu[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// 1-norm condition number via the explicit inverse (n is small here).
    pub fn condition(&self) -> f64 {
        let n = self.n;
        let mut inv_norm: f64 = 0.0;
        let mut col_sums = vec![0.0; n];
        for j in 0..n {
            let mut e = vec![ZERO; n];
            e[j] = ONE;
            let x = self.solve(&e);
            col_sums[j] = x.iter().map(|z| z.norm()).sum();
            inv_norm = inv_norm.max(col_sums[j]);
        }
        self.norm1 * inv_norm
    }
}

/// Solve `a x = b` once; returns the solution and the condition estimate.
pub fn solve_dense(n: usize, a: &[C64], b: &[C64]) -> Option<(Vec<C64>, f64)> {
    let lu = Lu::factor(n, a)?;
    let x = lu.solve(b);
    Some((x, lu.condition()))
}

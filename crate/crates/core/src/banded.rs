//! Square banded matrices with dense diagonal storage.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Zero;

/// Numeric element of a [`Banded`] matrix.
pub trait Entry:
    Copy + Zero + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + std::fmt::Debug
{
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn from_f64(x: f64) -> Self;
}

impl Entry for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }

    fn conj(self) -> Self {
        self
    }

    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Entry for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }

    fn conj(self) -> Self {
        Complex64::conj(&self)
    }

    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// `n × n` matrix whose entries vanish outside `−lower ≤ j − i ≤ upper`.
///
/// Row `i` is stored contiguously as the `lower + upper + 1` entries for
/// columns `i − lower ..= i + upper`; slots falling outside the matrix stay
/// zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Banded<T> {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Entry> Banded<T> {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        Banded {
            n,
            lower,
            upper,
            data: vec![T::zero(); n * (lower + upper + 1)],
        }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), 0, 0);
        m.data.copy_from_slice(diag);
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![T::from_f64(1.0); n])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Storage bandwidths `(lower, upper)`.
    pub fn bands(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.n || j >= self.n {
            return None;
        }
        if j + self.lower < i || j > i + self.upper {
            return None;
        }
        Some(i * self.width() + (j + self.lower - i))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |s| self.data[s])
    }

    /// Panics if `(i, j)` lies outside the storage band.
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        let s = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band ({}, {})", self.lower, self.upper));
        self.data[s] = value;
    }

    pub fn add_to(&mut self, i: usize, j: usize, value: T) {
        let current = self.get(i, j);
        self.set(i, j, current + value);
    }

    /// Column range of the storage band in row `i`.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        i.saturating_sub(self.lower)..(i + self.upper + 1).min(self.n)
    }

    /// Nonzero-or-not entries of row `i` within the band.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        self.row_range(i).map(move |j| (j, self.get(i, j)))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| self.row(i).fold(T::zero(), |acc, (j, a)| acc + a * x[j]))
            .collect()
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> Banded<U> {
        Banded {
            n: self.n,
            lower: self.lower,
            upper: self.upper,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// `diag(left)·A·diag(right)`.
    pub fn scale_rows_cols(&self, left: &[T], right: &[T]) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            for j in self.row_range(i) {
                let s = self.slot(i, j).expect("in band");
                out.data[s] = left[i] * self.data[s] * right[j];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.n, self.upper, self.lower);
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                out.set(j, i, a);
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        self.transpose().map(Entry::conj)
    }

    fn widen(&self, lower: usize, upper: usize) -> Self {
        let mut out = Self::zeros(self.n, lower.max(self.lower), upper.max(self.upper));
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                out.set(i, j, a);
            }
        }
        out
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = Self::zeros(self.n, self.lower + rhs.lower, self.upper + rhs.upper);
        for i in 0..self.n {
            for (k, a) in self.row(i) {
                if a == T::zero() {
                    continue;
                }
                for (j, b) in rhs.row(k) {
                    out.add_to(i, j, a * b);
                }
            }
        }
        out
    }

    /// Largest `|i − j|` over entries that are actually nonzero.
    pub fn effective_bandwidth(&self) -> usize {
        let mut bw = 0;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                if a != T::zero() {
                    bw = bw.max(i.abs_diff(j));
                }
            }
        }
        bw
    }

    /// Drops storage bands that hold only zeros.
    pub fn trimmed(&self) -> Self {
        let mut lower = 0;
        let mut upper = 0;
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                if a != T::zero() {
                    if j < i {
                        lower = lower.max(i - j);
                    } else {
                        upper = upper.max(j - i);
                    }
                }
            }
        }
        let mut out = Self::zeros(self.n, lower, upper);
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                if a != T::zero() {
                    out.set(i, j, a);
                }
            }
        }
        out
    }

    pub fn max_modulus(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn is_diagonal(&self) -> bool {
        self.effective_bandwidth() == 0
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<T>
    where
        T: nalgebra::Scalar,
    {
        let mut m = DMatrix::from_element(self.n, self.n, T::zero());
        for i in 0..self.n {
            for (j, a) in self.row(i) {
                m[(i, j)] = a;
            }
        }
        m
    }
}

impl Banded<f64> {
    pub fn to_complex(&self) -> Banded<Complex64> {
        self.map(|x| Complex64::new(x, 0.0))
    }
}

impl Banded<Complex64> {
    /// True when every entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn real_part(&self) -> Banded<f64> {
        self.map(|z| z.re)
    }
}

impl<T: Entry> Add for &Banded<T> {
    type Output = Banded<T>;

    fn add(self, rhs: Self) -> Banded<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.widen(rhs.lower, rhs.upper);
        for i in 0..rhs.n {
            for (j, b) in rhs.row(i) {
                out.add_to(i, j, b);
            }
        }
        out
    }
}

impl<T: Entry> Sub for &Banded<T> {
    type Output = Banded<T>;

    fn sub(self, rhs: Self) -> Banded<T> {
        assert_eq!(self.n, rhs.n, "dimension mismatch");
        let mut out = self.widen(rhs.lower, rhs.upper);
        for i in 0..rhs.n {
            for (j, b) in rhs.row(i) {
                let current = out.get(i, j);
                out.set(i, j, current - b);
            }
        }
        out
    }
}

impl<T: Entry> Mul for &Banded<T> {
    type Output = Banded<T>;

    fn mul(self, rhs: Self) -> Banded<T> {
        self.matmul(rhs)
    }
}

/// Cholesky factor of a symmetric positive definite banded matrix, used for
/// inverse iteration.
pub(crate) struct BandedCholesky {
    n: usize,
    bw: usize,
    // l[i][k] = L(i, i - bw + k)
    l: Vec<f64>,
}

impl BandedCholesky {
    /// Returns `None` if the matrix is not numerically positive definite.
    pub(crate) fn factor(a: &Banded<f64>) -> Option<Self> {
        let n = a.dim();
        let (lo, up) = a.bands();
        let bw = lo.max(up);
        let width = bw + 1;
        let mut l = vec![0.0; n * width];
        let at = |i: usize, j: usize| i * width + (j + bw - i);
        for i in 0..n {
            let j0 = i.saturating_sub(bw);
            for j in j0..=i {
                let mut sum = a.get(i, j);
                let k0 = j0.max(j.saturating_sub(bw));
                for k in k0..j {
                    sum -= l[at(i, k)] * l[at(j, k)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return None;
                    }
                    l[at(i, i)] = sum.sqrt();
                } else {
                    l[at(i, j)] = sum / l[at(j, j)];
                }
            }
        }
        Some(BandedCholesky { n, bw, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let width = self.bw + 1;
        let at = |i: usize, j: usize| i * width + (j + self.bw - i);
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= self.l[at(i, k)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + self.bw + 1).min(self.n) {
                s -= self.l[at(k, i)] * y[k];
            }
            y[i] = s / self.l[at(i, i)];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> Banded<f64> {
        let mut m = Banded::zeros(n, 1, 1);
        for i in 0..n {
            m.set(i, i, 2.0 + i as f64);
            if i + 1 < n {
                m.set(i, i + 1, -1.0);
                m.set(i + 1, i, -0.5);
            }
        }
        m
    }

    #[test]
    fn product_matches_dense() {
        let a = tridiag(7);
        let b = tridiag(7).transpose();
        let dense = a.to_dense() * b.to_dense();
        let banded = (&a * &b).to_dense();
        assert!((dense - banded).abs().max() < 1e-14);
    }

    #[test]
    fn sum_widens_band() {
        let a = tridiag(5);
        let d = Banded::from_diagonal(&[1.0; 5]);
        let s = &d - &a;
        assert_eq!(s.bands(), (1, 1));
        assert_eq!(s.get(2, 2), 1.0 - 4.0);
        assert_eq!(s.get(0, 1), 1.0);
    }

    #[test]
    fn trimming_and_bandwidth() {
        let mut a = Banded::<f64>::zeros(6, 3, 3);
        a.set(2, 3, 1.0);
        assert_eq!(a.effective_bandwidth(), 1);
        assert_eq!(a.trimmed().bands(), (0, 1));
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = tridiag(9);
        let spd = &a.transpose() * &a;
        let chol = BandedCholesky::factor(&spd).unwrap();
        let b: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let x = chol.solve(&b);
        let r = spd.matvec(&x);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).abs() < 1e-12);
        }
        let mut neg = Banded::<f64>::identity(3);
        neg.set(1, 1, -1.0);
        assert!(BandedCholesky::factor(&neg).is_none());
    }
}

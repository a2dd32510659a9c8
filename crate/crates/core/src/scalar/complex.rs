use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::EuclideanScalar;

/// Element of `𝔼 + i𝔼`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComplexEuclidean {
    pub re: EuclideanScalar,
    pub im: EuclideanScalar,
}

impl ComplexEuclidean {
    pub fn new(re: EuclideanScalar, im: EuclideanScalar) -> Self {
        ComplexEuclidean { re, im }
    }

    pub fn i() -> Self {
        Self::new(EuclideanScalar::zero(), EuclideanScalar::one())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|² = re² + im²`, itself a Euclidean number.
    pub fn norm_sqr(&self) -> EuclideanScalar {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    /// Componentwise standard part.
    pub fn standard_part(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.standard_part(), self.im.standard_part())
    }
}

impl From<EuclideanScalar> for ComplexEuclidean {
    fn from(re: EuclideanScalar) -> Self {
        Self::new(re, EuclideanScalar::zero())
    }
}

impl Add for ComplexEuclidean {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for ComplexEuclidean {
    type Output = Self;

    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Neg for ComplexEuclidean {
    type Output = Self;

    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl Mul for ComplexEuclidean {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        let re = self.re.clone() * rhs.re.clone() - self.im.clone() * rhs.im.clone();
        let im = self.re * rhs.im + self.im * rhs.re;
        Self::new(re, im)
    }
}

impl fmt::Display for ComplexEuclidean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) + i({})", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn i_squared_is_minus_one() {
        let i = ComplexEuclidean::i();
        assert_eq!(i.clone() * i, EuclideanScalar::from_real(-1.0).into());
    }

    #[test]
    fn modulus_of_infinitesimal_perturbation() {
        let eps: EuclideanScalar = "a^-1".parse().unwrap();
        let z = ComplexEuclidean::new(EuclideanScalar::one(), eps.clone());
        let n = z.norm_sqr();
        assert_eq!(n, EuclideanScalar::one() + eps.clone() * eps);
        assert_eq!(z.conj().standard_part(), num_complex::Complex64::new(1.0, 0.0));
    }
}

use std::sync::Arc;

use num_complex::Complex64;

use super::Grid;
use crate::error::{Error, Result};

/// A complex grid function `u: Γ → ℂ` bound to one level's grid.
#[derive(Clone, Debug)]
pub struct Ultrafunction {
    grid: Arc<Grid>,
    values: Vec<Complex64>,
}

/// Two ultrafunctions live in the same space when their grids coincide.
pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl PartialEq for Ultrafunction {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

impl Ultrafunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.dim() {
            return Err(Error::domain(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.dim()
            )));
        }
        Ok(Ultrafunction { grid, values })
    }

    pub fn from_real(grid: Arc<Grid>, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.dim();
        Ultrafunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Characteristic function `χ_a` of node `i`.
    pub fn indicator(grid: Arc<Grid>, i: usize) -> Result<Self> {
        let mut u = Self::zeros(grid);
        let slot = u
            .values
            .get_mut(i)
            .ok_or_else(|| Error::domain(format!("node index {i} out of range")))?;
        *slot = Complex64::new(1.0, 0.0);
        Ok(u)
    }

    /// Delta ultrafunction `δ_a = χ_a/d(a)` at the node `a`.
    pub fn delta(grid: Arc<Grid>, a: f64) -> Result<Self> {
        let i = grid
            .index_of(a)
            .ok_or_else(|| Error::domain(format!("{a} is not a grid node")))?;
        Self::delta_at(grid, i)
    }

    pub fn delta_at(grid: Arc<Grid>, i: usize) -> Result<Self> {
        let d = *grid
            .weights()
            .get(i)
            .ok_or_else(|| Error::domain(format!("node index {i} out of range")))?;
        let mut u = Self::zeros(grid);
        u.values[i] = Complex64::new(1.0 / d, 0.0);
        Ok(u)
    }

    /// Delta-basis element `δ_a·√d(a)`, of unit norm.
    pub fn normalized_delta_at(grid: Arc<Grid>, i: usize) -> Result<Self> {
        let d = *grid
            .weights()
            .get(i)
            .ok_or_else(|| Error::domain(format!("node index {i} out of range")))?;
        let mut u = Self::zeros(grid);
        u.values[i] = Complex64::new(1.0 / d.sqrt(), 0.0);
        Ok(u)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn value_at(&self, x: f64) -> Option<Complex64> {
        self.grid.index_of(x).map(|i| self.values[i])
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::domain("ultrafunctions live on different grids"))
        }
    }

    /// Pointwise integral `∮u = Σ u(a)·d(a)`.
    pub fn pointwise_integral(&self) -> Complex64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(u, d)| u * d)
            .sum()
    }

    /// `∮ u·v` without conjugation.
    pub fn integral_of_product(&self, other: &Self) -> Result<Complex64> {
        self.check_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((u, v), d)| u * v * d)
            .sum())
    }

    /// Weighted scalar product `Σ u(x)·conj(v(x))·d(x)`.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_grid(other)?;
        Ok(weighted_dot(&self.values, &other.values, self.grid.weights()))
    }

    pub fn norm(&self) -> f64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(u, d)| u.norm_sqr() * d)
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Ultrafunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `u / ‖u‖`; a zero function is a domain error.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("cannot normalize a zero or non-finite ultrafunction"));
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.check_grid(other)?;
        Ok(Ultrafunction {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    /// Rebuilds `u` from its delta coefficients: `Σ_a (∮ u·δ_a)·χ_a`.
    pub fn reconstruct(&self) -> Self {
        let w = self.grid.weights();
        let values = self
            .values
            .iter()
            .zip(w)
            .map(|(u, d)| (u * d) * (1.0 / d))
            .collect();
        Ultrafunction {
            grid: self.grid.clone(),
            values,
        }
    }
}

pub(crate) fn weighted_dot(u: &[Complex64], v: &[Complex64], w: &[f64]) -> Complex64 {
    u.iter().zip(v).zip(w).map(|((a, b), d)| a * b.conj() * d).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    fn grid() -> Arc<Grid> {
        build_grid(3, (0.0, 1.0), 0.25, &[]).unwrap()
    }

    #[test]
    fn indicator_integral_is_weight() {
        let g = grid();
        for i in [0, 7, g.dim() - 1] {
            let chi = Ultrafunction::indicator(g.clone(), i).unwrap();
            assert_eq!(chi.pointwise_integral().re, g.weights()[i]);
            assert!(chi.pointwise_integral().re > 0.0);
        }
    }

    #[test]
    fn delta_properties() {
        let g = grid();
        let d = Ultrafunction::delta(g.clone(), 0.5).unwrap();
        assert_eq!(d.pointwise_integral(), Complex64::new(1.0, 0.0));
        let i = g.index_of(0.5).unwrap();
        assert!(d.values().iter().enumerate().all(|(j, z)| j == i || *z == Complex64::new(0.0, 0.0)));
        let other = Ultrafunction::delta_at(g.clone(), i + 1).unwrap();
        assert_eq!(d.inner_product(&other).unwrap(), Complex64::new(0.0, 0.0));
        let self_ip = d.inner_product(&d).unwrap().re;
        assert!((self_ip - 1.0 / g.weights()[i]).abs() <= 1e-15 * self_ip);
        let unit = Ultrafunction::normalized_delta_at(g.clone(), i).unwrap();
        assert!((unit.norm() - 1.0).abs() < 1e-15);
        assert!(Ultrafunction::delta(g, 0.5 + 1e-3).is_err());
    }

    #[test]
    fn grid_mismatch() {
        let a = Ultrafunction::zeros(grid());
        let b = Ultrafunction::zeros(build_grid(4, (0.0, 1.0), 0.25, &[]).unwrap());
        assert!(matches!(a.inner_product(&b), Err(Error::Domain(_))));
        assert!(Ultrafunction::new(grid(), vec![]).is_err());
    }

    #[test]
    fn equal_grids_built_twice_are_compatible() {
        let a = Ultrafunction::zeros(grid());
        let b = Ultrafunction::zeros(grid());
        assert!(a.inner_product(&b).is_ok());
    }
}

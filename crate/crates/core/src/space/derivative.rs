use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use super::{ultrafunction::same_grid, Grid, Ultrafunction};
use crate::banded::{Banded, BandedCholesky};
use crate::error::{Error, Result};

/// Below `KERNEL_FLOOR / h` the smallest singular value counts as zero.
pub const KERNEL_FLOOR: f64 = 1e-8;

const INVERSE_ITERATION_MAX: usize = 2000;

/// Construction-time diagnostics of a [`DerivativeOperator`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `max |(W·D + (W·D)ᵀ)_ij|`.
    pub antisymmetry_defect: f64,
    /// Largest `|i − j|` with `D_ij ≠ 0`.
    pub bandwidth: usize,
    /// Whether `bandwidth ≤ w + 1`.
    pub locality_pass: bool,
    /// Sup-norm error of `D` on `sin` over rows clear of the edge closures.
    pub consistency_error: f64,
    pub sigma_min: f64,
}

/// Generalized derivative on one grid: `D = W⁻¹·A` with `A` exactly
/// antisymmetric, so that `∮ Du·v = −∮ u·Dv` holds for all real `u`, `v`.
#[derive(Clone, Debug)]
pub struct DerivativeOperator {
    grid: Arc<Grid>,
    matrix: Banded<f64>,
    skew: Banded<f64>,
    order: usize,
    bandwidth: usize,
    sigma_min: f64,
    diagnostics: Diagnostics,
}

/// Finite-difference weights for the first derivative at `z` on `xs`
/// (Fornberg's recursion).
pub fn fornberg_first_derivative(z: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|r| r[1]).collect()
}

/// Builds the derivative of interior consistency order `p ∈ {2, 4}`.
///
/// Rows use the centered `p + 1`-point stencil, truncated at the ends of the
/// grid. The base operator `D₀` is then antisymmetrized in the weighted
/// product, `D = ½(D₀ − W⁻¹D₀ᵀW)`, and its kernel is checked through the
/// smallest singular value.
pub fn build_derivative(grid: &Arc<Grid>, p: usize, w: usize) -> Result<DerivativeOperator> {
    if p != 2 && p != 4 {
        return Err(Error::domain(format!("consistency order must be 2 or 4, got {p}")));
    }
    let half = p / 2;
    if w < half {
        return Err(Error::domain(format!("bandwidth {w} is below p/2 = {half}")));
    }
    let n = grid.dim();
    if n % 2 == 1 {
        return Err(Error::domain(format!(
            "grid has odd dimension {n}; a weighted-antisymmetric operator would have a kernel"
        )));
    }
    let x = grid.nodes();
    let d = grid.weights();
    let h = grid.spacing();

    let mut weighted = Banded::<f64>::zeros(n, half, half);
    for i in 0..n {
        let lo = i.saturating_sub(half);
        let hi = (i + half).min(n - 1);
        let coeffs = fornberg_first_derivative(x[i], &x[lo..=hi]);
        for (k, c) in coeffs.into_iter().enumerate() {
            weighted.set(i, lo + k, d[i] * c);
        }
    }
    let mut skew = Banded::<f64>::zeros(n, half, half);
    for i in 0..n {
        for j in i + 1..(i + half + 1).min(n) {
            let a = 0.5 * (weighted.get(i, j) - weighted.get(j, i));
            skew.set(i, j, a);
            skew.set(j, i, -a);
        }
    }
    let mut matrix = Banded::<f64>::zeros(n, half, half);
    for i in 0..n {
        for (j, a) in skew.row(i) {
            matrix.set(i, j, a / d[i]);
        }
    }

    let mut antisymmetry_defect: f64 = 0.0;
    for i in 0..n {
        for (j, v) in matrix.row(i) {
            antisymmetry_defect = antisymmetry_defect.max((d[i] * v + d[j] * matrix.get(j, i)).abs());
        }
    }
    let bandwidth = matrix.effective_bandwidth();
    let sigma_min = smallest_singular_value(&skew, d)?;
    if !(sigma_min > KERNEL_FLOOR / h) {
        return Err(Error::construction(format!(
            "derivative has a numerical kernel (sigma_min = {sigma_min:e} at level {}); \
             try another (level, bandwidth) pair",
            grid.level()
        )));
    }
    let mut op = DerivativeOperator {
        grid: grid.clone(),
        matrix,
        skew,
        order: p,
        bandwidth: w,
        sigma_min,
        diagnostics: Diagnostics {
            antisymmetry_defect,
            bandwidth,
            locality_pass: bandwidth <= w + 1,
            consistency_error: 0.0,
            sigma_min,
        },
    };
    let margin = op.closure_margin();
    op.diagnostics.consistency_error = op.consistency_error(f64::sin, f64::cos, margin);
    Ok(op)
}

/// Smallest singular value of `W^(−1/2)·A·W^(−1/2)` by inverse iteration on
/// its (banded, positive definite) Gram matrix.
fn smallest_singular_value(skew: &Banded<f64>, d: &[f64]) -> Result<f64> {
    let n = d.len();
    let s: Vec<f64> = d.iter().map(|v| 1.0 / v.sqrt()).collect();
    let sym = skew.scale_rows_cols(&s, &s);
    let gram = sym.transpose().matmul(&sym);
    let Some(chol) = BandedCholesky::factor(&gram) else {
        return Ok(0.0);
    };
    let mut v: Vec<f64> = (0..n).map(|k| 1.0 + 0.5 * (1.3 * k as f64 + 0.4).sin()).collect();
    normalize(&mut v);
    let mut lambda = f64::INFINITY;
    for _ in 0..INVERSE_ITERATION_MAX {
        let mut y = chol.solve(&v);
        if y.iter().any(|t| !t.is_finite()) {
            return Err(Error::numeric("inverse iteration diverged"));
        }
        normalize(&mut y);
        let gy = gram.matvec(&y);
        let next: f64 = y.iter().zip(&gy).map(|(a, b)| a * b).sum();
        v = y;
        let converged = (next - lambda).abs() <= 1e-14 * next.abs();
        lambda = next;
        if converged {
            break;
        }
    }
    Ok(lambda.max(0.0).sqrt())
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|t| t * t).sum::<f64>().sqrt();
    v.iter_mut().for_each(|t| *t /= n);
}

impl DerivativeOperator {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// The banded coefficient table of `D`.
    pub fn matrix(&self) -> &Banded<f64> {
        &self.matrix
    }

    /// `A = W·D`, exactly antisymmetric.
    pub fn skew(&self) -> &Banded<f64> {
        &self.skew
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    /// Number of rows at each end touched by the truncated edge stencils.
    pub fn closure_margin(&self) -> usize {
        self.order
    }

    pub fn apply_values(&self, u: &[Complex64]) -> Vec<Complex64> {
        (0..self.matrix.dim())
            .map(|i| self.matrix.row(i).map(|(j, a)| u[j] * a).sum())
            .collect()
    }

    pub fn apply_real(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.matvec(u)
    }

    pub fn apply(&self, u: &Ultrafunction) -> Result<Ultrafunction> {
        if !same_grid(&self.grid, u.grid()) {
            return Err(Error::domain("operator and ultrafunction live on different grids"));
        }
        Ultrafunction::new(self.grid.clone(), self.apply_values(u.values()))
    }

    /// `max |D f°(a) − f′(a)|` over nodes at least `margin` rows from
    /// either end.
    pub fn consistency_error(&self, f: impl Fn(f64) -> f64, fprime: impl Fn(f64) -> f64, margin: usize) -> f64 {
        let x = self.grid.nodes();
        let n = x.len();
        let samples: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let du = self.matrix.matvec(&samples);
        (margin..n.saturating_sub(margin))
            .map(|i| (du[i] - fprime(x[i])).abs())
            .fold(0.0, f64::max)
    }
}

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{embed_real, DerivativeOperator, Grid, Ultrafunction};
use crate::error::{Error, Result};
use crate::quadrature;

/// Exponent of the battery bumps `(1 − r²)^k`; `k = 6` makes them `C⁵`,
/// enough for the order-4 Taylor remainder.
const BUMP_POWER: usize = 6;

/// Pass/fail thresholds of [`check_axioms`]. `None` selects the default
/// derived from the grid and operator.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomThresholds {
    /// Relative reconstruction residual in the nodal basis.
    pub representability: f64,
    /// Absolute error of the pointwise integral of a Gaussian.
    pub integral: f64,
    /// Absolute consistency error; default `safety·C_p·h^p·max|f^(p+1)|`.
    pub consistency: Option<f64>,
    pub consistency_safety: f64,
    /// Lower bound for `sigma_min·h`.
    pub kernel: f64,
    /// Default `w + 1`.
    pub bandwidth: Option<usize>,
    /// Default `10⁻¹⁴/h`.
    pub antisymmetry: Option<f64>,
    /// Seed of the random members used for representability.
    pub seed: u64,
}

impl Default for AxiomThresholds {
    fn default() -> Self {
        AxiomThresholds {
            representability: 1e-13,
            integral: 1e-4,
            consistency: None,
            consistency_safety: 1.5,
            kernel: super::derivative::KERNEL_FLOOR,
            bandwidth: None,
            antisymmetry: None,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomEntry {
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl AxiomEntry {
    fn at_most(value: f64, threshold: f64) -> Self {
        AxiomEntry {
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn above(value: f64, threshold: f64) -> Self {
        AxiomEntry {
            value,
            threshold,
            pass: value > threshold,
        }
    }
}

/// One numeric entry per axiom.
///
/// 1. nodal representability residual; 2. pointwise-integral error;
/// 3. minimum weight; 4. consistency error on the bump battery;
/// 5. `sigma_min·h`; 6. bandwidth of `D`; 7. antisymmetry defect.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub axiom1: AxiomEntry,
    pub axiom2: AxiomEntry,
    pub axiom3: AxiomEntry,
    pub axiom4: AxiomEntry,
    pub axiom5: AxiomEntry,
    pub axiom6: AxiomEntry,
    pub axiom7: AxiomEntry,
}

impl AxiomReport {
    pub fn entries(&self) -> [(&'static str, &AxiomEntry); 7] {
        [
            ("axiom1", &self.axiom1),
            ("axiom2", &self.axiom2),
            ("axiom3", &self.axiom3),
            ("axiom4", &self.axiom4),
            ("axiom5", &self.axiom5),
            ("axiom6", &self.axiom6),
            ("axiom7", &self.axiom7),
        ]
    }

    pub fn all_pass(&self) -> bool {
        self.entries().iter().all(|(_, e)| e.pass)
    }
}

pub fn check_axioms(grid: &Arc<Grid>, d: &DerivativeOperator, thresholds: &AxiomThresholds) -> Result<AxiomReport> {
    if !super::ultrafunction::same_grid(grid, d.grid()) {
        return Err(Error::domain("operator was built on a different grid"));
    }
    let h = grid.spacing();
    let diag = d.diagnostics();

    let axiom1 = AxiomEntry::at_most(representability_residual(grid, thresholds.seed), thresholds.representability);
    let axiom2 = AxiomEntry::at_most(gaussian_integral_error(grid)?, thresholds.integral);
    let axiom3 = AxiomEntry::above(grid.min_weight(), 0.0);
    let consistency_threshold = thresholds
        .consistency
        .unwrap_or_else(|| battery_threshold(grid, d.order(), thresholds.consistency_safety));
    let axiom4 = AxiomEntry::at_most(battery_error(d), consistency_threshold);
    let axiom5 = AxiomEntry::above(d.sigma_min() * h, thresholds.kernel);
    let bandwidth_threshold = thresholds.bandwidth.unwrap_or(d.bandwidth() + 1);
    let axiom6 = AxiomEntry::at_most(diag.bandwidth as f64, bandwidth_threshold as f64);
    let axiom7 = AxiomEntry::at_most(diag.antisymmetry_defect, thresholds.antisymmetry.unwrap_or(1e-14 / h));
    Ok(AxiomReport {
        axiom1,
        axiom2,
        axiom3,
        axiom4,
        axiom5,
        axiom6,
        axiom7,
    })
}

/// Largest relative residual of `Σ_a (∮ u·δ_a)·χ_a − u` over random members.
fn representability_residual(grid: &Arc<Grid>, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let values: Vec<Complex64> = (0..grid.dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let u = Ultrafunction::new(grid.clone(), values).expect("sized to grid");
        let scale = u.max_modulus();
        let back = u.reconstruct();
        let residual = back
            .values()
            .iter()
            .zip(u.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        worst = worst.max(residual / scale);
    }
    worst
}

/// The Gaussian of the integral check: centred in the physical domain with
/// width a tenth of it.
fn test_gaussian(grid: &Grid) -> impl Fn(f64) -> f64 {
    let (a, b) = grid.domain();
    let c = 0.5 * (a + b);
    let s = 0.1 * (b - a);
    move |x| (-(x - c) * (x - c) / (2.0 * s * s)).exp()
}

fn gaussian_integral_error(grid: &Arc<Grid>) -> Result<f64> {
    let g = test_gaussian(grid);
    let u = embed_real(grid, &g);
    let nodes = grid.nodes();
    let exact = quadrature::integrate(&g, nodes[0], nodes[nodes.len() - 1], 1e-14)?;
    Ok((u.pointwise_integral().re - exact).abs())
}

/// Bump battery: `(1 − r²)^6` with `r = (x − c)/R`, `R` a quarter of the
/// physical domain and `c` at its quarter points.
fn battery(grid: &Grid) -> (f64, Vec<f64>) {
    let (a, b) = grid.domain();
    let len = b - a;
    (0.25 * len, vec![a + 0.25 * len, a + 0.5 * len, a + 0.75 * len])
}

fn bump_poly() -> Vec<f64> {
    // (1 − s)^k expanded in s = r², stored by powers of r.
    let k = BUMP_POWER;
    let mut coeffs = vec![0.0; 2 * k + 1];
    let mut binom = 1.0;
    for j in 0..=k {
        coeffs[2 * j] = if j % 2 == 0 { binom } else { -binom };
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    coeffs
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect()
}

fn poly_eval(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * r + v)
}

/// `max_{|r|≤1} |g^(q)(r)|` for the battery profile.
fn bump_derivative_bound(q: usize) -> f64 {
    let mut c = bump_poly();
    for _ in 0..q {
        c = poly_derivative(&c);
    }
    (0..=20_000)
        .map(|k| poly_eval(&c, -1.0 + k as f64 * 1e-4).abs())
        .fold(0.0, f64::max)
}

/// Taylor-remainder bound for the centered stencils on a uniform grid,
/// times `safety`.
pub fn battery_threshold(grid: &Grid, p: usize, safety: f64) -> f64 {
    let (radius, _) = battery(grid);
    let c_p = if p == 2 { 1.0 / 6.0 } else { 1.0 / 30.0 };
    let h = grid.spacing();
    safety * c_p * h.powi(p as i32) * bump_derivative_bound(p + 1) / radius.powi(p as i32 + 1)
}

/// Largest consistency error of `D` over the bump battery.
pub fn battery_error(d: &DerivativeOperator) -> f64 {
    let grid = d.grid();
    let (radius, centers) = battery(grid);
    let g = bump_poly();
    let dg = poly_derivative(&g);
    let margin = d.closure_margin();
    centers
        .iter()
        .map(|&c| {
            let f = |x: f64| {
                let r = (x - c) / radius;
                if r.abs() < 1.0 {
                    poly_eval(&g, r)
                } else {
                    0.0
                }
            };
            let fp = |x: f64| {
                let r = (x - c) / radius;
                if r.abs() < 1.0 {
                    poly_eval(&dg, r) / radius
                } else {
                    0.0
                }
            };
            d.consistency_error(f, fp, margin)
        })
        .fold(0.0, f64::max)
}

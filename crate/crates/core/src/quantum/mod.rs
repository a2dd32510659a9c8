//! Observables on one grid: weighted-Hermitian matrices, their spectra,
//! measurement statistics and the physical/ideal classification of states.

mod measure;
mod spectrum;
mod states;

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use num_complex::Complex64;

use crate::banded::Banded;
use crate::error::{Error, Result};
use crate::space::{same_grid, weighted_dot, DerivativeOperator, Grid, Ultrafunction};

pub use measure::{measure, MeasurementDistribution, Outcome};
pub use spectrum::{spectrum, spectrum_with, SpectrumOptions, SpectrumResult, StGroup};
pub use states::{
    classify_state, delta_ratio, gaussian, normalized_delta, sine_mode, singular_bump, StateClass, StateKind,
    PHYSICAL_EXPONENT_MAX,
};

/// Relative weighted-Hermitian defect tolerated by [`Observable::new`].
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// A linear map on the ultrafunctions of one grid.
#[derive(Clone, Debug)]
pub struct Operator {
    grid: Arc<Grid>,
    matrix: Banded<Complex64>,
}

impl Operator {
    pub fn new(grid: Arc<Grid>, matrix: Banded<Complex64>) -> Result<Self> {
        if matrix.dim() != grid.dim() {
            return Err(Error::domain(format!(
                "matrix of dimension {} on a grid of {} nodes",
                matrix.dim(),
                grid.dim()
            )));
        }
        Ok(Operator { grid, matrix })
    }

    pub fn from_real(grid: Arc<Grid>, matrix: &Banded<f64>) -> Result<Self> {
        Self::new(grid, matrix.to_complex())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn matrix(&self) -> &Banded<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn apply_values(&self, u: &[Complex64]) -> Vec<Complex64> {
        self.matrix.matvec(u)
    }

    pub fn apply(&self, u: &Ultrafunction) -> Result<Ultrafunction> {
        if !same_grid(&self.grid, u.grid()) {
            return Err(Error::domain("operator and ultrafunction live on different grids"));
        }
        Ultrafunction::new(self.grid.clone(), self.apply_values(u.values()))
    }

    fn check_grid(&self, other: &Operator) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::domain("operators live on different grids"))
        }
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.check_grid(other)?;
        Operator::new(self.grid.clone(), (&self.matrix + &other.matrix).trimmed())
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.check_grid(other)?;
        Operator::new(self.grid.clone(), (&self.matrix - &other.matrix).trimmed())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        self.check_grid(other)?;
        Operator::new(self.grid.clone(), self.matrix.matmul(&other.matrix).trimmed())
    }

    pub fn scale(&self, s: Complex64) -> Operator {
        Operator {
            grid: self.grid.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn max_modulus(&self) -> f64 {
        self.matrix.max_modulus()
    }

    /// `max |(W·A)_ij − conj((W·A)_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.weighted_defect(|a, b| a - b.conj())
    }

    /// `max |(W·A)_ij + conj((W·A)_ji)|`.
    pub fn anti_hermitian_defect(&self) -> f64 {
        self.weighted_defect(|a, b| a + b.conj())
    }

    fn weighted_defect(&self, f: impl Fn(Complex64, Complex64) -> Complex64) -> f64 {
        let d = self.grid.weights();
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            for (j, a) in self.matrix.row(i) {
                let b = self.matrix.get(j, i);
                worst = worst.max(f(a * d[i], b * d[j]).norm());
            }
        }
        worst
    }

    /// `max |(W·A)_ij|`, the scale of [`Self::hermitian_defect`].
    pub fn weighted_scale(&self) -> f64 {
        let d = self.grid.weights();
        (0..self.dim())
            .flat_map(|i| self.matrix.row(i).map(move |(_, a)| a.norm() * d[i]))
            .fold(0.0, f64::max)
    }
}

/// An operator certified weighted-Hermitian: `W·A = (W·A)ᴴ` to
/// [`HERMITIAN_TOLERANCE`] relative.
#[derive(Clone, Debug)]
pub struct Observable {
    op: Operator,
    defect: f64,
}

impl Observable {
    pub fn new(op: Operator) -> Result<Self> {
        let defect = op.hermitian_defect();
        let scale = op.weighted_scale();
        if defect > HERMITIAN_TOLERANCE * scale {
            return Err(Error::domain(format!(
                "operator is not weighted-Hermitian (defect {defect:e}, scale {scale:e})"
            )));
        }
        Ok(Observable { op, defect })
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.defect
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn into_operator(self) -> Operator {
        self.op
    }

    pub fn add(&self, other: &Observable) -> Result<Observable> {
        Observable::new(self.op.add(&other.op)?)
    }
}

impl Deref for Observable {
    type Target = Operator;

    fn deref(&self) -> &Operator {
        &self.op
    }
}

impl AsRef<Operator> for Operator {
    fn as_ref(&self) -> &Operator {
        self
    }
}

impl AsRef<Operator> for Observable {
    fn as_ref(&self) -> &Operator {
        &self.op
    }
}

/// Multiplication by the node coordinate.
pub fn position_operator(grid: &Arc<Grid>) -> Observable {
    let diag: Vec<Complex64> = grid.nodes().iter().map(|&x| Complex64::new(x, 0.0)).collect();
    Observable {
        op: Operator {
            grid: grid.clone(),
            matrix: Banded::from_diagonal(&diag),
        },
        defect: 0.0,
    }
}

/// `P = −i·D`.
pub fn momentum_operator(d: &DerivativeOperator) -> Result<Observable> {
    let matrix = d.matrix().map(|v| Complex64::new(0.0, -v));
    Observable::new(Operator::new(d.grid().clone(), matrix)?)
}

/// Potential term of a Hamiltonian.
#[derive(Clone)]
pub enum PotentialSpec {
    Zero,
    /// `V = f°`, with non-finite samples set to 0.
    Sampled(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// `k·δ_a`: adds `k/d(a)` at the node `a`.
    DeltaBump { strength: f64, at: f64 },
    /// `α·χ_Ω` on the nodes of `Ω = [lo, hi]`.
    IndicatorPenalty { lo: f64, hi: f64 },
    /// `α` on the nodes outside `Ω = [lo, hi]`.
    DirichletBox { lo: f64, hi: f64 },
}

impl PotentialSpec {
    pub fn sampled(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        PotentialSpec::Sampled(Arc::new(f))
    }

    /// `½ω²x²`.
    pub fn harmonic(omega: f64) -> Self {
        Self::sampled(move |x| 0.5 * omega * omega * x * x)
    }

    fn diagonal(&self, grid: &Grid) -> Result<Vec<f64>> {
        let n = grid.dim();
        let alpha = grid.alpha();
        Ok(match self {
            PotentialSpec::Zero => vec![0.0; n],
            PotentialSpec::Sampled(f) => grid
                .nodes()
                .iter()
                .map(|&x| {
                    let v = f(x);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                })
                .collect(),
            PotentialSpec::DeltaBump { strength, at } => {
                let i = grid
                    .index_of(*at)
                    .ok_or_else(|| Error::domain(format!("delta bump point {at} is not a grid node")))?;
                let mut v = vec![0.0; n];
                v[i] = strength / grid.weights()[i];
                v
            }
            PotentialSpec::IndicatorPenalty { lo, hi } => (0..n)
                .map(|i| if grid.in_interval(i, *lo, *hi) { alpha } else { 0.0 })
                .collect(),
            PotentialSpec::DirichletBox { lo, hi } => (0..n)
                .map(|i| if grid.in_interval(i, *lo, *hi) { 0.0 } else { alpha })
                .collect(),
        })
    }
}

impl fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Zero => write!(f, "Zero"),
            PotentialSpec::Sampled(_) => write!(f, "Sampled(..)"),
            PotentialSpec::DeltaBump { strength, at } => write!(f, "DeltaBump {{ strength: {strength}, at: {at} }}"),
            PotentialSpec::IndicatorPenalty { lo, hi } => write!(f, "IndicatorPenalty {{ lo: {lo}, hi: {hi} }}"),
            PotentialSpec::DirichletBox { lo, hi } => write!(f, "DirichletBox {{ lo: {lo}, hi: {hi} }}"),
        }
    }
}

/// `H = −½D² + V`.
pub fn hamiltonian(d: &DerivativeOperator, potential: &PotentialSpec) -> Result<Observable> {
    let grid = d.grid();
    let mut kinetic = d.matrix().matmul(d.matrix()).scale(-0.5);
    for (i, v) in potential.diagonal(grid)?.into_iter().enumerate() {
        if v != 0.0 {
            kinetic.add_to(i, i, v);
        }
    }
    Observable::new(Operator::from_real(grid.clone(), &kinetic.trimmed())?)
}

/// `H_N = −½·D·χ_Ω·D`, diffusion switched off outside `Ω = [lo, hi]`.
pub fn neumann_hamiltonian(d: &DerivativeOperator, omega: (f64, f64)) -> Result<Observable> {
    let grid = d.grid();
    let (lo, hi) = omega;
    if lo >= hi {
        return Err(Error::domain(format!("empty interval [{lo}, {hi}]")));
    }
    for e in [lo, hi] {
        if grid.index_of(e).is_none() {
            return Err(Error::domain(format!("interval endpoint {e} is not a grid node")));
        }
    }
    let mask: Vec<f64> = (0..grid.dim())
        .map(|i| if grid.in_interval(i, lo, hi) { 1.0 } else { 0.0 })
        .collect();
    let masked = Banded::from_diagonal(&mask).matmul(d.matrix());
    let h = d.matrix().matmul(&masked).scale(-0.5);
    Observable::new(Operator::from_real(grid.clone(), &h.trimmed())?)
}

/// `A·B − B·A`. Commutators of observables are weighted-anti-Hermitian, so
/// the result is a plain [`Operator`].
pub fn commutator(a: &Operator, b: &Operator) -> Result<Operator> {
    a.compose(b)?.sub(&b.compose(a)?)
}

/// `⟨Aψ, ψ⟩`.
pub fn expectation(a: &Operator, psi: &Ultrafunction) -> Result<Complex64> {
    let a_psi = a.apply(psi)?;
    Ok(weighted_dot(a_psi.values(), psi.values(), psi.grid().weights()))
}

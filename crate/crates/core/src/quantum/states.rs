use std::sync::Arc;

use num_complex::Complex64;

use super::{expectation, Observable};
use crate::error::{Error, Result};
use crate::levels::{asymptotic_profile, LevelChain, Net, Profile};
use crate::space::{embed_real, DerivativeOperator, Grid, Ultrafunction};

/// States whose energy grows no faster than `h^(−1/4)` count as physical.
pub const PHYSICAL_EXPONENT_MAX: f64 = 0.25;

/// Unit discrete Gaussian `exp(−(x − c)²/(2σ²))`.
pub fn gaussian(grid: &Arc<Grid>, center: f64, sigma: f64) -> Result<Ultrafunction> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    embed_real(grid, |x| (-(x - center) * (x - center) / (2.0 * sigma * sigma)).exp()).normalized()
}

/// Delta-basis element `δ_a·√d(a)` at the node `a`.
pub fn normalized_delta(grid: &Arc<Grid>, a: f64) -> Result<Ultrafunction> {
    let i = grid
        .index_of(a)
        .ok_or_else(|| Error::domain(format!("{a} is not a grid node")))?;
    Ultrafunction::normalized_delta_at(grid.clone(), i)
}

/// Unit `|x − c|^(−1/4)·(1 − r²)²` with `r = (x − c)/R`; the singular node
/// gets the value 0.
pub fn singular_bump(grid: &Arc<Grid>, center: f64, radius: f64) -> Result<Ultrafunction> {
    if !(radius > 0.0) {
        return Err(Error::domain(format!("radius must be positive, got {radius}")));
    }
    embed_real(grid, |x| {
        let r = (x - center) / radius;
        if r.abs() >= 1.0 {
            0.0
        } else {
            (x - center).abs().powf(-0.25) * (1.0 - r * r).powi(2)
        }
    })
    .normalized()
}

/// `sin(nπ(x − lo)/(hi − lo))` on `[lo, hi]`, zero elsewhere (not normalized).
pub fn sine_mode(grid: &Arc<Grid>, n: u32, lo: f64, hi: f64) -> Ultrafunction {
    let k = n as f64 * std::f64::consts::PI / (hi - lo);
    let g = grid.clone();
    let mut u = embed_real(grid, |x| (k * (x - lo)).sin());
    for (i, v) in u.values_mut().iter_mut().enumerate() {
        if !g.in_interval(i, lo, hi) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    u
}

/// `‖Dδ_a‖/‖δ_a‖` at node index `i`.
pub fn delta_ratio(d: &DerivativeOperator, i: usize) -> Result<f64> {
    let delta = Ultrafunction::delta_at(d.grid().clone(), i)?;
    Ok(d.apply(&delta)?.norm() / delta.norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateKind {
    Physical,
    Ideal,
}

#[derive(Clone, Debug)]
pub struct StateClass {
    pub kind: StateKind,
    pub exponent: f64,
    pub r_squared: f64,
    /// `(m, ⟨Hψ, ψ⟩)` per level.
    pub energies: Vec<(i32, f64)>,
    pub profile: Profile,
}

/// Fits the growth of `⟨Hψ_m, ψ_m⟩` along the chain; `build(m)` supplies
/// the level-`m` Hamiltonian and unit state.
pub fn classify_state(
    chain: &LevelChain,
    build: impl Fn(i32) -> Result<(Observable, Ultrafunction)>,
) -> Result<StateClass> {
    let mut energies = Vec::with_capacity(chain.len());
    for m in chain.levels() {
        let (h, psi) = build(m)?;
        energies.push((m, expectation(&h, &psi)?.re));
    }
    let profile = asymptotic_profile(&Net::from_samples(energies.iter().copied()), chain)?;
    let kind = if profile.exponent <= PHYSICAL_EXPONENT_MAX {
        StateKind::Physical
    } else {
        StateKind::Ideal
    };
    Ok(StateClass {
        kind,
        exponent: profile.exponent,
        r_squared: profile.r_squared,
        energies,
        profile,
    })
}

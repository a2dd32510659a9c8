//! Refinement levels standing in for the directed family of finite sets.
//!
//! A [`LevelChain`] fixes one increasing chain of levels `m`. At level `m`
//! the grid spacing is `h(m) = h₀·2^(−m)` with `h₀ = 1/4`, the infinite unit
//! is `α(m) = 4^m = (h₀/h)²`, and the natural numbers seen by the level are
//! `{1, …, 4^m}`. Λ-limits of real nets become asymptotic profiles along the
//! chain.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{EuclideanScalar, Exponent};

/// Spacing at level zero.
pub const BASE_SPACING: f64 = 0.25;

/// Fitted exponents are rendered on this dyadic lattice.
const RENDER_EXPONENT_DENOM: i64 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelChain {
    m_min: i32,
    m_max: i32,
}

impl LevelChain {
    pub fn new(m_min: i32, m_max: i32) -> Result<Self> {
        if m_min > m_max {
            return Err(Error::domain(format!("empty level range {m_min}..{m_max}")));
        }
        if m_min < 0 || m_max > 30 {
            return Err(Error::domain(format!("levels must lie in 0..=30, got {m_min}..{m_max}")));
        }
        Ok(LevelChain { m_min, m_max })
    }

    pub fn m_min(&self) -> i32 {
        self.m_min
    }

    pub fn m_max(&self) -> i32 {
        self.m_max
    }

    pub fn levels(&self) -> impl Iterator<Item = i32> {
        self.m_min..=self.m_max
    }

    pub fn len(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i32) -> bool {
        (self.m_min..=self.m_max).contains(&m)
    }
}

/// Grid spacing at level `m`.
pub fn spacing(m: i32) -> f64 {
    BASE_SPACING * (-m as f64).exp2()
}

/// Level value of the infinite unit `α`, i.e. `|ℕ ∩ λ_m| = 4^m`.
pub fn alpha(m: i32) -> f64 {
    (2.0 * m as f64).exp2()
}

/// `h(m)` written as a Euclidean number: `h₀·α^(−1/2)`.
pub fn spacing_scalar() -> EuclideanScalar {
    EuclideanScalar::monomial(BASE_SPACING, Exponent::new(-1, 2))
}

/// A real-valued net sampled along a chain.
#[derive(Clone, Debug, PartialEq)]
pub struct Net {
    samples: Vec<(i32, f64)>,
}

impl Net {
    pub fn from_fn(chain: &LevelChain, f: impl Fn(i32) -> f64) -> Self {
        Net {
            samples: chain.levels().map(|m| (m, f(m))).collect(),
        }
    }

    pub fn try_from_fn(chain: &LevelChain, f: impl Fn(i32) -> Result<f64>) -> Result<Self> {
        let samples = chain.levels().map(|m| Ok((m, f(m)?))).collect::<Result<_>>()?;
        Ok(Net { samples })
    }

    /// Samples need not be sorted; duplicates keep the last value.
    pub fn from_samples(samples: impl IntoIterator<Item = (i32, f64)>) -> Self {
        let mut samples: Vec<(i32, f64)> = samples.into_iter().collect();
        samples.sort_by_key(|s| s.0);
        samples.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 = b.1;
                true
            } else {
                false
            }
        });
        Net { samples }
    }

    pub fn samples(&self) -> &[(i32, f64)] {
        &self.samples
    }

    pub fn value(&self, m: i32) -> Option<f64> {
        self.samples.iter().find(|s| s.0 == m).map(|s| s.1)
    }

    fn within(&self, chain: &LevelChain) -> Vec<(i32, f64)> {
        self.samples.iter().copied().filter(|s| chain.contains(s.0)).collect()
    }
}

/// Power-law fit `value(m) ≈ coefficient·h(m)^(−exponent)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub exponent: f64,
    pub coefficient: f64,
    /// Coefficient of determination of the log–log fit.
    pub r_squared: f64,
    /// Set when some values were zero or of mixed sign, so the fit used
    /// `|value|` (zeros dropped).
    pub used_abs: bool,
    /// The profile as a Euclidean number, see [`asymptotic_profile`].
    pub rendered: EuclideanScalar,
}

/// Fits the divergence order of a net by least squares on
/// `(−ln h(m), ln |value(m)|)`.
///
/// The fitted exponent is rounded to a multiple of 1/8 for rendering. A
/// non-zero rounded exponent renders as `c·4^q·α^(q/2)` (since
/// `h^(−q) = 4^q·α^(q/2)`); a zero one renders as the real extrapolated
/// limit of the net.
pub fn asymptotic_profile(net: &Net, chain: &LevelChain) -> Result<Profile> {
    let samples = net.within(chain);
    if samples.len() < 3 {
        return Err(Error::domain(format!(
            "asymptotic profile needs at least 3 levels, got {}",
            samples.len()
        )));
    }
    let first_sign = samples[0].1.signum();
    let used_abs = samples.iter().any(|s| s.1 == 0.0 || s.1.signum() != first_sign);
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.1 != 0.0)
        .map(|&(m, v)| (-spacing(m).ln(), v.abs().ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::domain("asymptotic profile needs at least 3 nonzero values"));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum();
    // A perfectly flat net has no variance to explain.
    let r_squared = if syy <= 1e-24 * n { 1.0 } else { (1.0 - sse / syy).clamp(0.0, 1.0) };
    let sign = if used_abs { 1.0 } else { first_sign };
    let coefficient = sign * intercept.exp();

    let rounded = Exponent::new((exponent * RENDER_EXPONENT_DENOM as f64).round() as i64, RENDER_EXPONENT_DENOM);
    let rendered = if rounded.is_zero() {
        EuclideanScalar::from_real(extrapolated_limit(&samples))
    } else {
        let q = *rounded.numer() as f64 / *rounded.denom() as f64;
        let scale = (BASE_SPACING).powf(-q);
        EuclideanScalar::monomial(coefficient * scale, rounded / Exponent::from_integer(2))
    };
    Ok(Profile {
        exponent,
        coefficient,
        r_squared,
        used_abs,
        rendered,
    })
}

/// Aitken Δ² on the last three samples when they contract geometrically,
/// otherwise the last sample.
fn extrapolated_limit(samples: &[(i32, f64)]) -> f64 {
    let k = samples.len();
    let last = samples[k - 1].1;
    if k < 3 {
        return last;
    }
    let (v0, v1, v2) = (samples[k - 3].1, samples[k - 2].1, last);
    let d1 = v1 - v0;
    let d2 = v2 - v1;
    let denom = d2 - d1;
    if d1 == 0.0 || denom == 0.0 || (d2 / d1).abs() >= 1.0 {
        return last;
    }
    v2 - d2 * d2 / denom
}

/// Cauchy-limit detection: when successive differences shrink and the last
/// one is below `tol`, returns the extrapolated limit (the standard part of
/// the net's Λ-limit); otherwise `None`.
pub fn standard_limit_check(net: &Net, chain: &LevelChain, tol: f64) -> Option<f64> {
    let samples = net.within(chain);
    if samples.len() < 3 {
        return None;
    }
    let diffs: Vec<f64> = samples.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    let last = *diffs.last()?;
    let shrinking = diffs.windows(2).rev().take(2).all(|w| w[1] <= w[0]);
    if last < tol && shrinking && samples.iter().all(|s| s.1.is_finite()) {
        Some(extrapolated_limit(&samples))
    } else {
        None
    }
}

/// A set whose numerosity is requested.
#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Finite(Vec<f64>),
    Naturals,
}

/// Numerosity at level `m`: the count of the set's points seen by `λ_m`.
///
/// A finite set's distinct points enter the level in list order, at most
/// `4^m` of them, so the count is eventually `|E|`. The natural numbers give
/// `|ℕ ∩ λ_m| = 4^m`.
pub fn numerosity(set: &SetSpec, m: i32) -> u64 {
    let section = alpha(m) as u64;
    match set {
        SetSpec::Naturals => section,
        SetSpec::Finite(points) => {
            let distinct: BTreeSet<u64> = points
                .iter()
                .map(|x| if *x == 0.0 { 0.0f64.to_bits() } else { x.to_bits() })
                .collect();
            (distinct.len() as u64).min(section)
        }
    }
}

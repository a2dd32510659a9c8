//! Heat and Schrödinger evolution through the spectral exponential.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{expectation, spectrum, Observable, Operator, SpectrumResult};
use crate::space::Ultrafunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    /// `u(t) = e^(−tH)·u₀`.
    Heat,
    /// `ψ(t) = e^(−itH)·ψ₀`, solving `i∂ψ/∂t = Hψ`.
    Schrodinger,
}

impl EvolutionMode {
    fn factor(self, t: f64, mu: f64) -> Complex64 {
        match self {
            EvolutionMode::Heat => Complex64::new((-t * mu).exp(), 0.0),
            EvolutionMode::Schrodinger => Complex64::from_polar(1.0, -t * mu),
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub mode: EvolutionMode,
    pub times: Vec<f64>,
    pub states: Vec<Ultrafunction>,
}

/// One row of [`conservation_traces`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub norm: f64,
    /// `Re ⟨Hu, u⟩`.
    pub energy: f64,
    /// `∮ u`.
    pub integral: Complex64,
}

pub fn evolve(h: &Observable, mode: EvolutionMode, psi0: &Ultrafunction, times: &[f64]) -> Result<EvolutionResult> {
    let spec = spectrum(h)?;
    evolve_with_spectrum(&spec, mode, psi0, times)
}

/// Like [`evolve`] with a precomputed spectrum. `times` must start at 0 and
/// be non-decreasing; the state at `t = 0` is `psi0` itself.
pub fn evolve_with_spectrum(
    spec: &SpectrumResult,
    mode: EvolutionMode,
    psi0: &Ultrafunction,
    times: &[f64],
) -> Result<EvolutionResult> {
    if times.first() != Some(&0.0) {
        return Err(Error::domain("evolution times must start at 0"));
    }
    if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("evolution times must be finite and ascending"));
    }
    let coeffs = spec.coefficients(psi0)?;
    let mut states = Vec::with_capacity(times.len());
    for &t in times {
        if t == 0.0 {
            states.push(psi0.clone());
            continue;
        }
        let scaled: Vec<Complex64> = coeffs
            .iter()
            .zip(spec.eigenvalues())
            .map(|(c, &mu)| {
                let f = mode.factor(t, mu);
                if f == Complex64::new(0.0, 0.0) {
                    f
                } else {
                    c * f
                }
            })
            .collect();
        states.push(spec.synthesize(&scaled)?);
    }
    Ok(EvolutionResult {
        mode,
        times: times.to_vec(),
        states,
    })
}

/// Norm, energy and total integral at every time.
pub fn conservation_traces(result: &EvolutionResult, h: &Operator) -> Result<Vec<TraceRow>> {
    result
        .times
        .iter()
        .zip(&result.states)
        .map(|(&t, u)| {
            Ok(TraceRow {
                t,
                norm: u.norm(),
                energy: expectation(h, u)?.re,
                integral: u.pointwise_integral(),
            })
        })
        .collect()
}

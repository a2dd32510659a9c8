use serde::Serialize;

use super::SpectrumResult;
use crate::error::{Error, Result};
use crate::space::Ultrafunction;

/// Allowed deviation of `‖ψ‖` from 1 for a measurable state.
pub const UNIT_TOLERANCE: f64 = 1e-8;

/// One observable outcome: the standard part of a group of eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    #[serde(rename = "outcome")]
    pub value: f64,
    pub probability: f64,
    pub group_size: usize,
    /// Index `j` of the eigenvector the state collapses to: the most probable
    /// one within the group.
    #[serde(skip)]
    pub post_state: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MeasurementDistribution {
    pub outcomes: Vec<Outcome>,
}

impl MeasurementDistribution {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// The outcome with the largest probability (first on ties).
    pub fn most_likely(&self) -> Option<&Outcome> {
        self.outcomes
            .iter()
            .reduce(|best, o| if o.probability > best.probability { o } else { best })
    }
}

/// Outcome statistics of measuring the observable with spectrum `spec` in
/// the unit state `psi`: `p_j = |⟨ψ, ψ_j⟩|²`, summed over each group.
pub fn measure(psi: &Ultrafunction, spec: &SpectrumResult) -> Result<MeasurementDistribution> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::domain(format!("state has norm {norm}, expected 1")));
    }
    let coeffs = spec.coefficients(psi)?;
    let outcomes = spec
        .groups()
        .iter()
        .map(|g| {
            let probs: Vec<f64> = g.indices().map(|j| coeffs[j].norm_sqr()).collect();
            let (best, _) = probs
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (k, &p)| if p > acc.1 { (k, p) } else { acc });
            Outcome {
                value: g.value,
                probability: probs.iter().sum(),
                group_size: g.len(),
                post_state: g.start + best,
            }
        })
        .collect();
    Ok(MeasurementDistribution { outcomes })
}

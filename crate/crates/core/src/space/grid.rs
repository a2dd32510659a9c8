use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::levels;

/// Relative distance (in units of `h`) below which a required point replaces
/// an existing node instead of creating a new one.
const SNAP: f64 = 1e-9;

/// One level's hyperfinite grid: sorted nodes with trapezoid weights `d(a)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    level: i32,
    spacing: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    domain: (f64, f64),
    pad: f64,
    uniform: bool,
}

/// Builds the level-`m` grid over `[a − pad, b + pad]`.
///
/// Nodes sit at `a + k·h(m)`; `a`, `b` and every required point are nodes
/// (a required point within `10⁻⁹·h` of a lattice node replaces it). If the
/// node count is odd one node is appended at `last + h`.
pub fn build_grid(m: i32, domain: (f64, f64), pad: f64, required: &[f64]) -> Result<Arc<Grid>> {
    let (a, b) = domain;
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::domain(format!("invalid domain [{a}, {b}]")));
    }
    if !(pad >= 0.0 && pad.is_finite()) {
        return Err(Error::domain(format!("pad must be finite and non-negative, got {pad}")));
    }
    if !(0..=30).contains(&m) {
        return Err(Error::domain(format!("level {m} outside 0..=30")));
    }
    let h = levels::spacing(m);
    let (lo, hi) = (a - pad, b + pad);
    for &r in required {
        if !(r >= lo - SNAP * h && r <= hi + SNAP * h) {
            return Err(Error::domain(format!("required point {r} outside padded domain [{lo}, {hi}]")));
        }
    }
    let k_lo = ((lo - a) / h - SNAP).ceil() as i64;
    let k_hi = ((hi - a) / h + SNAP).floor() as i64;
    let count = k_hi - k_lo + 1;
    if count > 1 << 24 {
        return Err(Error::domain(format!("grid with {count} nodes is too large")));
    }
    let mut nodes: Vec<f64> = (k_lo..=k_hi).map(|k| a + k as f64 * h).collect();
    let mut uniform = true;
    for &r in std::iter::once(&b).chain(required) {
        let pos = nodes.partition_point(|&x| x < r);
        let near = [pos.wrapping_sub(1), pos]
            .into_iter()
            .filter(|&i| i < nodes.len())
            .find(|&i| (nodes[i] - r).abs() <= SNAP * h);
        match near {
            Some(i) => nodes[i] = r,
            None => {
                nodes.insert(pos, r);
                uniform = false;
            }
        }
    }
    if nodes.len() % 2 == 1 {
        let last = *nodes.last().expect("grid has nodes");
        nodes.push(last + h);
    }
    if nodes.len() < 2 || nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::construction("grid nodes are not strictly increasing"));
    }
    let weights = trapezoid_weights(&nodes);
    Ok(Arc::new(Grid {
        level: m,
        spacing: h,
        nodes,
        weights,
        domain,
        pad,
        uniform,
    }))
}

fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let half = 0.5 * (nodes[i + 1] - nodes[i]);
        w[i] += half;
        w[i + 1] += half;
    }
    w
}

impl Grid {
    pub fn level(&self) -> i32 {
        self.level
    }

    /// Lattice spacing `h(m)`.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.nodes.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn pad(&self) -> f64 {
        self.pad
    }

    /// False when a required point was inserted between lattice nodes.
    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    /// `α(m)` for this grid's level.
    pub fn alpha(&self) -> f64 {
        levels::alpha(self.level)
    }

    /// Index of the node equal to `x` (within `10⁻⁹·h`).
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let pos = self.nodes.partition_point(|&v| v < x);
        [pos.wrapping_sub(1), pos]
            .into_iter()
            .filter(|&i| i < self.nodes.len())
            .find(|&i| (self.nodes[i] - x).abs() <= SNAP * self.spacing)
    }

    /// Index of the node closest to `x`.
    pub fn nearest_index(&self, x: f64) -> usize {
        let pos = self.nodes.partition_point(|&v| v < x);
        match pos {
            0 => 0,
            p if p == self.nodes.len() => p - 1,
            p => {
                if x - self.nodes[p - 1] <= self.nodes[p] - x {
                    p - 1
                } else {
                    p
                }
            }
        }
    }

    /// Whether node `i` lies in the closed interval `[lo, hi]`.
    pub fn in_interval(&self, i: usize, lo: f64, hi: f64) -> bool {
        let tol = SNAP * self.spacing;
        let x = self.nodes[i];
        x >= lo - tol && x <= hi + tol
    }

    /// Total weight, equal to the node extent `last − first`.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn min_weight(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

use std::sync::Arc;

use num_complex::Complex64;

use super::{Grid, Ultrafunction};
use crate::error::Result;
use crate::quadrature;

/// Restriction `f°` of a function to the nodes. Points where `f` is not
/// finite get the value 0.
pub fn embed_continuous(grid: &Arc<Grid>, f: impl Fn(f64) -> Complex64) -> Ultrafunction {
    let values = grid
        .nodes()
        .iter()
        .map(|&x| {
            let z = f(x);
            if z.re.is_finite() && z.im.is_finite() {
                z
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Ultrafunction::new(grid.clone(), values).expect("one value per node")
}

/// Real-valued convenience form of [`embed_continuous`].
pub fn embed_real(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Ultrafunction {
    embed_continuous(grid, |x| Complex64::new(f(x), 0.0))
}

/// A locally integrable function known through point evaluation.
pub trait WeakSource {
    fn eval(&self, x: f64) -> f64;

    /// Points where the function jumps or blows up; integration panels are
    /// split there.
    fn breaks(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> WeakSource for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Wraps a function together with its singular points.
pub struct WithBreaks<F> {
    pub f: F,
    pub breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> WeakSource for WithBreaks<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn breaks(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Riesz representative of `ψ` on the hat-function space of the grid:
/// `ψ°(a) = (1/d(a))·∫ ψ·hat_a`.
///
/// Because trapezoid weights integrate products with piecewise-linear
/// functions exactly, `∮ ψ°·v = ∫ ψ·v` for every such `v`. `tol` is the
/// absolute tolerance of each cell integral.
pub fn embed_weak(grid: &Arc<Grid>, psi: &dyn WeakSource, tol: f64) -> Result<Ultrafunction> {
    let x = grid.nodes();
    let n = x.len();
    let breaks = psi.breaks();
    let mut moments = vec![0.0; n];
    for k in 0..n - 1 {
        let (l, r) = (x[k], x[k + 1]);
        let len = r - l;
        let inner: Vec<f64> = breaks.iter().copied().filter(|&b| b > l && b < r).collect();
        let f = |t: f64| {
            let v = psi.eval(t);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        // hat_k falls and hat_{k+1} rises across the cell.
        let left = quadrature::integrate_with_breaks(|t| f(t) * (r - t) / len, l, r, &inner, tol)?;
        let right = quadrature::integrate_with_breaks(|t| f(t) * (t - l) / len, l, r, &inner, tol)?;
        moments[k] += left;
        moments[k + 1] += right;
    }
    let values = moments
        .iter()
        .zip(grid.weights())
        .map(|(mm, d)| Complex64::new(mm / d, 0.0))
        .collect();
    Ultrafunction::new(grid.clone(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::build_grid;

    #[test]
    fn constant_and_singular_embeddings() {
        let g = build_grid(3, (-1.0, 1.0), 0.0, &[]).unwrap();
        let ones = embed_real(&g, |_| 1.0);
        assert!(ones.values().iter().all(|z| *z == Complex64::new(1.0, 0.0)));
        let inv = embed_real(&g, |x| 1.0 / x.abs());
        let zero = g.index_of(0.0).unwrap();
        assert_eq!(inv.values()[zero], Complex64::new(0.0, 0.0));
        assert_eq!(inv.values()[zero + 1].re, 1.0 / g.nodes()[zero + 1]);
    }

    #[test]
    fn indicator_jump_nodes_get_half() {
        let g = build_grid(3, (0.0, 1.0), 0.25, &[]).unwrap();
        let ind = WithBreaks {
            f: |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 },
            breaks: vec![0.0, 1.0],
        };
        let u = embed_weak(&g, &ind, 1e-13).unwrap();
        for (i, &x) in g.nodes().iter().enumerate() {
            let v = u.values()[i].re;
            let expected = if x == 0.0 || x == 1.0 {
                0.5
            } else if x > 0.0 && x < 1.0 {
                1.0
            } else {
                0.0
            };
            assert!((v - expected).abs() < 1e-12, "x = {x}: {v}");
        }
    }

    #[test]
    fn zero_source() {
        let g = build_grid(2, (0.0, 1.0), 0.25, &[]).unwrap();
        let u = embed_weak(&g, &|_x: f64| 0.0, 1e-12).unwrap();
        assert_eq!(u.max_modulus(), 0.0);
    }
}

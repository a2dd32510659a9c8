//! Real symmetric tridiagonal eigensolver: implicit QL for the eigenvalues,
//! inverse iteration for the eigenvectors.

use nalgebra::DMatrix;

const MAX_QL_ITERATIONS: usize = 60;
const INVERSE_ITERATIONS: usize = 3;
/// Eigenvalues closer than this fraction of `‖T‖` are reorthogonalized
/// against each other.
const CLUSTER_GAP: f64 = 1e-4;

/// Eigenvalues of the tridiagonal matrix with diagonal `diag` and
/// off-diagonal `off` (`off[i]` couples `i` and `i + 1`), ascending.
pub(crate) fn eigenvalues(diag: &[f64], off: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return None;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Some(d)
}

/// Pivoted LU of a tridiagonal matrix, as in LAPACK `dgttrf`.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(mut dl: Vec<f64>, mut d: Vec<f64>, mut du: Vec<f64>, tiny: f64) -> Self {
        let n = d.len();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagonalLu { dl, d, du, du2, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Full eigendecomposition; column `j` of the matrix belongs to the `j`-th
/// (ascending) eigenvalue. Returns `None` if QL fails to converge or inverse
/// iteration breaks down; callers verify the result.
pub(crate) fn eigen(diag: &[f64], off: &[f64]) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let n = diag.len();
    let values = eigenvalues(diag, off)?;
    let norm = (0..n)
        .map(|i| {
            diag[i].abs() + if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 }
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let tiny = f64::EPSILON * norm;
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    let mut cluster_start = 0;
    let mut seed: u64 = 0x9E37_79B9_7F4A_7C15;
    for j in 0..n {
        if j > 0 && values[j] - values[j - 1] > CLUSTER_GAP * norm {
            cluster_start = j;
        }
        let shifted: Vec<f64> = diag.iter().map(|v| v - values[j]).collect();
        let lu = TridiagonalLu::factor(off.to_vec(), shifted, off.to_vec(), tiny);
        let mut x: Vec<f64> = (0..n)
            .map(|_| {
                seed ^= seed << 13;
                seed ^= seed >> 7;
                seed ^= seed << 17;
                (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        for _ in 0..INVERSE_ITERATIONS {
            lu.solve(&mut x);
            for k in cluster_start..j {
                let col = vectors.column(k);
                let dot: f64 = col.iter().zip(&x).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(col.iter()).for_each(|(xi, ci)| *xi -= dot * ci);
            }
            if !normalize(&mut x) {
                return None;
            }
        }
        vectors.column_mut(j).copy_from_slice(&x);
    }
    Some((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn check(diag: &[f64], off: &[f64]) {
        let n = diag.len();
        let (values, vectors) = eigen(diag, off).unwrap();
        let t = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 {
                off[i]
            } else if i == j + 1 {
                off[j]
            } else {
                0.0
            }
        });
        let mut reference: Vec<f64> = SymmetricEigen::new(t.clone()).eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        let scale = reference.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in values.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12 * scale, "{a} vs {b}");
        }
        let residual = (&t * &vectors - &vectors * DMatrix::from_diagonal(&values.clone().into())).amax();
        assert!(residual < 1e-11 * scale, "residual {residual}");
        let gram = vectors.tr_mul(&vectors) - DMatrix::identity(n, n);
        assert!(gram.amax() < 1e-11, "orthogonality {}", gram.amax());
    }

    #[test]
    fn discrete_laplacian() {
        let n = 200;
        check(&vec![2.0; n], &vec![-1.0; n - 1]);
    }

    #[test]
    fn wilkinson_matrix_has_close_pairs() {
        // W21+: eigenvalues come in pairs agreeing to ~1e-14.
        let diag: Vec<f64> = (0..21i32).map(|i| (10 - i).abs() as f64).collect();
        check(&diag, &[1.0; 20]);
    }

    #[test]
    fn penalized_blocks() {
        let n = 300;
        let diag: Vec<f64> = (0..n).map(|i| if !(50..=250).contains(&i) { 1e5 } else { 0.0 } + 2.0e3).collect();
        check(&diag, &vec![-1.0e3; n - 1]);
    }

    #[test]
    fn tiny_sizes() {
        check(&[3.0], &[]);
        check(&[1.0, 2.0], &[0.5]);
    }
}

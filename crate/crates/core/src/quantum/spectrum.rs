use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::Observable;
use crate::banded::Banded;
use crate::error::{Error, Result};
use crate::space::{same_grid, Grid, Ultrafunction};
use crate::tridiag;

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumOptions {
    /// Eigenvalues closer than this times the spectral radius share a
    /// standard part.
    pub st_tolerance: f64,
    /// Bound on `‖Aψ − μψ‖` relative to `max |μ|`.
    pub residual_tolerance: f64,
    /// Bound on `|⟨ψ_i, ψ_j⟩ − δ_ij|`.
    pub orthonormality_tolerance: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions {
            st_tolerance: 1e-6,
            residual_tolerance: 1e-9,
            orthonormality_tolerance: 1e-10,
        }
    }
}

/// Consecutive eigenvalues `start..end` with a common standard part.
#[derive(Clone, Debug, PartialEq)]
pub struct StGroup {
    pub start: usize,
    pub end: usize,
    /// Mean of the member eigenvalues.
    pub value: f64,
}

impl StGroup {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }

    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.end
    }
}

#[derive(Clone, Debug)]
enum Vectors {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

/// Eigenvectors of one connected block of the symmetrized matrix. Entry
/// `(k, c)` belongs to node `nodes[k]`, multiplied by `phases[k]` if the
/// block was gauged to real form.
#[derive(Clone, Debug)]
struct Component {
    nodes: Vec<usize>,
    phases: Option<Vec<Complex64>>,
    vectors: Vectors,
}

impl Component {
    fn phase(&self, k: usize) -> Complex64 {
        self.phases.as_ref().map_or(Complex64::new(1.0, 0.0), |p| p[k])
    }

    /// Column `c` in the unit-Euclidean frame, phases applied.
    fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.nodes.len())
            .map(|k| {
                let v = match &self.vectors {
                    Vectors::Real(m) => Complex64::new(m[(k, c)], 0.0),
                    Vectors::Complex(m) => m[(k, c)],
                };
                self.phase(k) * v
            })
            .collect()
    }
}

/// Complete eigendecomposition of an observable, sorted ascending, with
/// eigenvectors orthonormal in the weighted product.
#[derive(Clone, Debug)]
pub struct SpectrumResult {
    grid: Arc<Grid>,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    locate: Vec<(usize, usize)>,
    components: Vec<Component>,
    groups: Vec<StGroup>,
    group_of: Vec<usize>,
    sqrt_weights: Vec<f64>,
}

pub fn spectrum(a: &Observable) -> Result<SpectrumResult> {
    spectrum_with(a, &SpectrumOptions::default())
}

/// Diagonalizes `S = W^(1/2)·A·W^(−1/2)`, which is Hermitian.
///
/// `S` is split into the connected components of its sparsity graph. Real
/// blocks and blocks whose graph is a path (gauged to real form by a
/// diagonal unitary) go to the real symmetric solver; other blocks to the
/// complex Hermitian one. Residuals and orthonormality are verified before
/// returning.
pub fn spectrum_with(a: &Observable, options: &SpectrumOptions) -> Result<SpectrumResult> {
    let grid = a.grid().clone();
    let n = grid.dim();
    let sw: Vec<f64> = grid.weights().iter().map(|d| d.sqrt()).collect();
    // Diagonal entries are invariant under the similarity; keep them exact.
    let mut scaled = a.matrix().clone();
    for i in 0..n {
        for (j, v) in a.matrix().row(i) {
            if j != i {
                scaled.set(i, j, v * (sw[i] / sw[j]));
            }
        }
    }
    let s = symmetrize(&scaled);

    let mut components = Vec::new();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n);
    for nodes in connected_components(&s) {
        let (values, comp) = solve_component(&s, nodes, options)?;
        let id = components.len();
        pairs.extend(values.into_iter().enumerate().map(|(c, mu)| (mu, id, c)));
        components.push(comp);
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let locate: Vec<(usize, usize)> = pairs.iter().map(|p| (p.1, p.2)).collect();

    let radius = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut residuals = vec![0.0; n];
    for (j, &(ci, c)) in locate.iter().enumerate() {
        residuals[j] = residual(&s, &components[ci], c, eigenvalues[j]);
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > options.residual_tolerance * radius.max(f64::MIN_POSITIVE) {
        return Err(Error::numeric(format!(
            "eigen-residual {worst:e} exceeds {:e} x spectral radius {radius:e}",
            options.residual_tolerance
        )));
    }

    let tau = options.st_tolerance * radius;
    let mut groups = Vec::new();
    let mut group_of = vec![0; n];
    let mut start = 0;
    for j in 1..=n {
        if j == n || eigenvalues[j] - eigenvalues[j - 1] > tau {
            let value = eigenvalues[start..j].iter().sum::<f64>() / (j - start) as f64;
            group_of[start..j].fill(groups.len());
            groups.push(StGroup { start, end: j, value });
            start = j;
        }
    }

    Ok(SpectrumResult {
        grid,
        eigenvalues,
        residuals,
        locate,
        components,
        groups,
        group_of,
        sqrt_weights: sw,
    })
}

/// `(S + Sᴴ)/2`, removing the rounding asymmetry of the similarity scaling.
fn symmetrize(s: &Banded<Complex64>) -> Banded<Complex64> {
    let mut out = s.clone();
    for i in 0..s.dim() {
        for (j, v) in s.row(i) {
            if j >= i {
                let avg = 0.5 * (v + s.get(j, i).conj());
                let avg = if i == j { Complex64::new(avg.re, 0.0) } else { avg };
                out.set(i, j, avg);
                if j != i {
                    out.set(j, i, avg.conj());
                }
            }
        }
    }
    out
}

fn connected_components(s: &Banded<Complex64>) -> Vec<Vec<usize>> {
    let n = s.dim();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for (j, v) in s.row(i) {
            if j > i && v != Complex64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        buckets[r].push(i);
    }
    buckets.into_iter().filter(|b| !b.is_empty()).collect()
}

fn solve_component(s: &Banded<Complex64>, nodes: Vec<usize>, options: &SpectrumOptions) -> Result<(Vec<f64>, Component)> {
    let k = nodes.len();
    if k == 1 {
        let mu = s.get(nodes[0], nodes[0]).re;
        return Ok((
            vec![mu],
            Component {
                nodes,
                phases: None,
                vectors: Vectors::Real(DMatrix::from_element(1, 1, 1.0)),
            },
        ));
    }
    let local = |i: usize| nodes.binary_search(&i).ok();
    let mut entries = Vec::new();
    let mut real = true;
    let mut path = true;
    for (a, &i) in nodes.iter().enumerate() {
        for (j, v) in s.row(i) {
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let b = local(j).expect("component is closed under the sparsity graph");
            real &= v.im == 0.0;
            path &= a.abs_diff(b) <= 1;
            entries.push((a, b, v));
        }
    }
    let phases = if real || !path { None } else { Some(path_gauge(&entries, k)) };
    let gauged = |a: usize, b: usize, v: Complex64| match &phases {
        None => v.re,
        Some(p) => (p[a].conj() * v * p[b]).re,
    };

    if path {
        let mut diag = vec![0.0; k];
        let mut off = vec![0.0; k - 1];
        for &(a, b, v) in &entries {
            if a == b {
                diag[a] = v.re;
            } else if b == a + 1 {
                off[a] = gauged(a, b, v);
            }
        }
        if let Some((values, vectors)) = tridiag::eigen(&diag, &off) {
            let comp = Component {
                nodes: nodes.clone(),
                phases: phases.clone(),
                vectors: Vectors::Real(vectors),
            };
            if verify(s, &comp, &values, options).is_ok() {
                return Ok((values, comp));
            }
        }
    }

    let (values, comp) = if real || path {
        let mut m = DMatrix::<f64>::zeros(k, k);
        for &(a, b, v) in &entries {
            m[(a, b)] = gauged(a, b, v);
        }
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
            .ok_or_else(|| Error::numeric("symmetric eigensolver did not converge"))?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let comp = Component {
            nodes,
            phases,
            vectors: Vectors::Real(eig.eigenvectors),
        };
        (values, comp)
    } else {
        let mut m = DMatrix::<Complex64>::zeros(k, k);
        for &(a, b, v) in &entries {
            m[(a, b)] = v;
        }
        let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
            .ok_or_else(|| Error::numeric("Hermitian eigensolver did not converge"))?;
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let comp = Component {
            nodes,
            phases: None,
            vectors: Vectors::Complex(eig.eigenvectors),
        };
        (values, comp)
    };
    verify(s, &comp, &values, options)?;
    Ok((values, comp))
}

/// Residuals relative to the block's own spectral radius, and
/// orthonormality of its eigenvectors.
fn verify(s: &Banded<Complex64>, comp: &Component, values: &[f64], options: &SpectrumOptions) -> Result<()> {
    let radius = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    for (c, &mu) in values.iter().enumerate() {
        let r = residual(s, comp, c, mu);
        if !(r <= options.residual_tolerance * radius) {
            return Err(Error::numeric(format!(
                "eigen-residual {r:e} exceeds {:e} x block radius {radius:e}",
                options.residual_tolerance
            )));
        }
    }
    let defect = orthonormality_defect(comp);
    if !(defect <= options.orthonormality_tolerance) {
        return Err(Error::numeric(format!("eigenvectors not orthonormal (defect {defect:e})")));
    }
    Ok(())
}

/// Diagonal unitary making a Hermitian path matrix real:
/// `φ₀ = 1`, `φ_{k+1} = φ_k·conj(t_k)/|t_k|` with `t_k = S_{k,k+1}`.
fn path_gauge(entries: &[(usize, usize, Complex64)], k: usize) -> Vec<Complex64> {
    let mut t = vec![Complex64::new(0.0, 0.0); k.saturating_sub(1)];
    for &(a, b, v) in entries {
        if b == a + 1 {
            t[a] = v;
        }
    }
    let mut phases = Vec::with_capacity(k);
    phases.push(Complex64::new(1.0, 0.0));
    for tk in t {
        let prev = *phases.last().expect("seeded");
        phases.push(prev * tk.conj() / tk.norm());
    }
    phases
}

fn residual(s: &Banded<Complex64>, comp: &Component, c: usize, mu: f64) -> f64 {
    let v = comp.column(c);
    let mut full = vec![Complex64::new(0.0, 0.0); s.dim()];
    for (k, &i) in comp.nodes.iter().enumerate() {
        full[i] = v[k];
    }
    comp.nodes
        .iter()
        .map(|&i| {
            let sv: Complex64 = s.row(i).map(|(j, a)| a * full[j]).sum();
            (sv - full[i] * mu).norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

fn orthonormality_defect(comp: &Component) -> f64 {
    let k = comp.nodes.len();
    match &comp.vectors {
        Vectors::Real(m) => {
            // The explicit transpose routes through the blocked GEMM kernel.
            let g = m.transpose() * m;
            g.iter()
                .enumerate()
                .map(|(idx, v)| (v - if idx % (k + 1) == 0 { 1.0 } else { 0.0 }).abs())
                .fold(0.0, f64::max)
        }
        Vectors::Complex(m) => {
            let g = m.adjoint() * m;
            g.iter()
                .enumerate()
                .map(|(idx, v)| (v - Complex64::new(if idx % (k + 1) == 0 { 1.0 } else { 0.0 }, 0.0)).norm())
                .fold(0.0, f64::max)
        }
    }
}

impl SpectrumResult {
    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `‖Aψ_j − μ_jψ_j‖` in the weighted norm.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn groups(&self) -> &[StGroup] {
        &self.groups
    }

    pub fn group_of(&self, j: usize) -> usize {
        self.group_of[j]
    }

    /// Number of connected blocks the solver worked on.
    pub fn block_count(&self) -> usize {
        self.components.len()
    }

    /// Unit eigenvector `ψ_j`.
    pub fn eigenvector(&self, j: usize) -> Ultrafunction {
        let (ci, c) = self.locate[j];
        let comp = &self.components[ci];
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.dim()];
        for (k, v) in comp.column(c).into_iter().enumerate() {
            let i = comp.nodes[k];
            values[i] = v / self.sqrt_weights[i];
        }
        Ultrafunction::new(self.grid.clone(), values).expect("sized to grid")
    }

    /// `c_j = ⟨u, ψ_j⟩` for every `j`.
    pub fn coefficients(&self, u: &Ultrafunction) -> Result<Vec<Complex64>> {
        if !same_grid(&self.grid, u.grid()) {
            return Err(Error::domain("state and spectrum live on different grids"));
        }
        let mut per_comp: Vec<Vec<Complex64>> = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            let g: Vec<Complex64> = comp
                .nodes
                .iter()
                .enumerate()
                .map(|(k, &i)| u.values()[i] * self.sqrt_weights[i] * comp.phase(k).conj())
                .collect();
            per_comp.push(match &comp.vectors {
                Vectors::Real(m) => {
                    let re = m.tr_mul(&DVector::from_iterator(g.len(), g.iter().map(|z| z.re)));
                    let im = m.tr_mul(&DVector::from_iterator(g.len(), g.iter().map(|z| z.im)));
                    re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
                }
                Vectors::Complex(m) => m.ad_mul(&DVector::from_vec(g)).iter().copied().collect(),
            });
        }
        Ok(self.locate.iter().map(|&(ci, c)| per_comp[ci][c]).collect())
    }

    /// `Σ_j c_j·ψ_j`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Ultrafunction> {
        if coeffs.len() != self.len() {
            return Err(Error::domain(format!("{} coefficients for {} eigenpairs", coeffs.len(), self.len())));
        }
        let mut per_comp: Vec<Vec<Complex64>> = self
            .components
            .iter()
            .map(|c| vec![Complex64::new(0.0, 0.0); c.nodes.len()])
            .collect();
        for (j, &(ci, c)) in self.locate.iter().enumerate() {
            per_comp[ci][c] = coeffs[j];
        }
        let mut values = vec![Complex64::new(0.0, 0.0); self.grid.dim()];
        for (comp, cs) in self.components.iter().zip(per_comp) {
            let y: Vec<Complex64> = match &comp.vectors {
                Vectors::Real(m) => {
                    let re = m * DVector::from_iterator(cs.len(), cs.iter().map(|z| z.re));
                    let im = m * DVector::from_iterator(cs.len(), cs.iter().map(|z| z.im));
                    re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
                }
                Vectors::Complex(m) => (m * DVector::from_vec(cs)).iter().copied().collect(),
            };
            for (k, &i) in comp.nodes.iter().enumerate() {
                values[i] = comp.phase(k) * y[k] / self.sqrt_weights[i];
            }
        }
        Ultrafunction::new(self.grid.clone(), values)
    }

    /// `g(A)·u = Σ_j g(μ_j)·⟨u, ψ_j⟩·ψ_j`.
    pub fn apply_function(&self, u: &Ultrafunction, g: impl Fn(f64) -> Complex64) -> Result<Ultrafunction> {
        let coeffs = self.coefficients(u)?;
        let scaled: Vec<Complex64> = coeffs
            .iter()
            .zip(&self.eigenvalues)
            .map(|(c, &mu)| {
                let f = g(mu);
                if f == Complex64::new(0.0, 0.0) {
                    f
                } else {
                    c * f
                }
            })
            .collect();
        self.synthesize(&scaled)
    }

    /// Relative weighted-L² distance from `f` to the span of the group's
    /// eigenvectors, both restricted to the nodes in `[lo, hi]`.
    pub fn restricted_projection_error(&self, group: usize, f: &Ultrafunction, lo: f64, hi: f64) -> Result<f64> {
        if !same_grid(&self.grid, f.grid()) {
            return Err(Error::domain("function and spectrum live on different grids"));
        }
        let inside: Vec<usize> = (0..self.grid.dim()).filter(|&i| self.grid.in_interval(i, lo, hi)).collect();
        let g = &self.groups[group];
        let rows = inside.len();
        let cols = g.len();
        let mut basis = DMatrix::<Complex64>::zeros(rows, cols);
        for (c, j) in g.indices().enumerate() {
            let v = self.eigenvector(j);
            for (r, &i) in inside.iter().enumerate() {
                basis[(r, c)] = v.values()[i] * self.sqrt_weights[i];
            }
        }
        let target = DVector::from_iterator(rows, inside.iter().map(|&i| f.values()[i] * self.sqrt_weights[i]));
        let norm = target.norm();
        if norm == 0.0 {
            return Err(Error::domain("target vanishes on the interval"));
        }
        let svd = basis.clone().svd(true, true);
        let coeffs = svd
            .solve(&target, 1e-12)
            .map_err(|e| Error::numeric(format!("least squares failed: {e}")))?;
        Ok((target - &basis * coeffs).norm() / norm)
    }
}

use std::sync::Arc;

use proptest::prelude::*;
use ultralab_core::evolution::evolve_with_spectrum;
use ultralab_core::quantum::{gaussian, sine_mode};
use ultralab_core::{
    build_derivative, build_grid, commutator, conservation_traces, expectation, hamiltonian, measure,
    momentum_operator, neumann_hamiltonian, position_operator, spectrum, Complex64, EvolutionMode, Grid, Observable,
    PotentialSpec, Ultrafunction,
};

fn grid(m: i32) -> Arc<Grid> {
    build_grid(m, (0.0, 1.0), 0.25, &[]).unwrap()
}

fn observables(g: &Arc<Grid>) -> Vec<Observable> {
    let d = build_derivative(g, 2, 1).unwrap();
    vec![
        position_operator(g),
        momentum_operator(&d).unwrap(),
        hamiltonian(&d, &PotentialSpec::harmonic(2.0)).unwrap(),
        hamiltonian(&d, &PotentialSpec::DirichletBox { lo: 0.0, hi: 1.0 }).unwrap(),
        hamiltonian(&d, &PotentialSpec::DeltaBump { strength: 3.0, at: 0.5 }).unwrap(),
        neumann_hamiltonian(&d, (0.0, 1.0)).unwrap(),
    ]
}

fn complex_vec(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn observables_are_weighted_self_adjoint(u in complex_vec(grid(4).dim()), v in complex_vec(grid(4).dim())) {
        let g = grid(4);
        let u = Ultrafunction::new(g.clone(), u).unwrap();
        let v = Ultrafunction::new(g.clone(), v).unwrap();
        for a in observables(&g) {
            let lhs = a.apply(&u).unwrap().inner_product(&v).unwrap();
            let rhs = u.inner_product(&a.apply(&v).unwrap()).unwrap();
            let scale = a.max_modulus() * u.norm() * v.norm() / g.min_weight() * g.spacing();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0), "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn spectral_completeness(u in complex_vec(grid(4).dim())) {
        let g = grid(4);
        let u = Ultrafunction::new(g.clone(), u).unwrap();
        let d = build_derivative(&g, 2, 1).unwrap();
        let spec = spectrum(&hamiltonian(&d, &PotentialSpec::harmonic(2.0)).unwrap()).unwrap();
        let total: f64 = spec.coefficients(&u).unwrap().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((total - u.norm().powi(2)).abs() <= 1e-10 * total);
    }
}

#[test]
fn spectra_meet_residual_and_orthonormality_bounds() {
    let g = grid(5);
    for a in observables(&g) {
        let spec = spectrum(&a).unwrap();
        assert_eq!(spec.len(), g.dim());
        assert!(spec.max_residual() <= 1e-9 * spec.spectral_radius());
        for i in (0..g.dim()).step_by(7) {
            for j in (0..g.dim()).step_by(5) {
                let dot = spec.eigenvector(i).inner_product(&spec.eigenvector(j)).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((dot - target).norm() <= 1e-10, "({i},{j}) {dot}");
            }
        }
    }
}

#[test]
fn position_spectrum_is_the_delta_basis_for_any_weights() {
    let g = build_grid(4, (0.0, 1.0), 0.25, &[std::f64::consts::FRAC_1_SQRT_2, 0.3]).unwrap();
    assert!(!g.is_uniform());
    let spec = spectrum(&position_operator(&g)).unwrap();
    for (j, &mu) in spec.eigenvalues().iter().enumerate() {
        let i = g.index_of(mu).expect("eigenvalue is a node");
        let v = spec.eigenvector(j);
        let delta = Ultrafunction::normalized_delta_at(g.clone(), i).unwrap();
        assert!((v.inner_product(&delta).unwrap().norm() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn delta_bump_sits_on_the_diagonal() {
    let g = grid(4);
    let d = build_derivative(&g, 2, 1).unwrap();
    let free = hamiltonian(&d, &PotentialSpec::Zero).unwrap();
    let bumped = hamiltonian(&d, &PotentialSpec::DeltaBump { strength: 2.5, at: 0.5 }).unwrap();
    let i = g.index_of(0.5).unwrap();
    let diff = bumped.matrix().get(i, i) - free.matrix().get(i, i);
    assert!((diff.re - 2.5 / g.weights()[i]).abs() < 1e-12 * diff.re);
}

#[test]
fn expectation_is_linear_and_position_is_diagonal() {
    let g = grid(5);
    let d = build_derivative(&g, 2, 1).unwrap();
    let q = position_operator(&g);
    let h = hamiltonian(&d, &PotentialSpec::harmonic(1.0)).unwrap();
    let psi = gaussian(&g, 0.5, 0.15).unwrap();
    let sum = q.add(&h).unwrap();
    let lhs = expectation(&sum, &psi).unwrap();
    let rhs = expectation(&q, &psi).unwrap() + expectation(&h, &psi).unwrap();
    assert!((lhs - rhs).norm() < 1e-12 * lhs.norm());
    let a = 0.375;
    let delta = Ultrafunction::normalized_delta_at(g.clone(), g.index_of(a).unwrap()).unwrap();
    assert!((expectation(&q, &delta).unwrap() - a).norm() <= 4.0 * f64::EPSILON * a);
}

#[test]
fn commutator_oracles() {
    let g = grid(6);
    let d = build_derivative(&g, 2, 1).unwrap();
    let q = position_operator(&g);
    let p = momentum_operator(&d).unwrap();
    let qq = commutator(&q, &q).unwrap();
    assert_eq!(qq.max_modulus(), 0.0);
    let pq = commutator(&p, &q).unwrap();
    assert!(pq.anti_hermitian_defect() < 1e-12 * pq.max_modulus().max(1.0));
    for i in [3, g.dim() / 2, g.dim() - 4] {
        let delta = Ultrafunction::normalized_delta_at(g.clone(), i).unwrap();
        let value = expectation(&pq, &delta).unwrap();
        assert!(value.norm() <= 1e-10 / g.spacing(), "{value}");
    }
}

#[test]
fn measurement_of_an_eigenstate_is_certain() {
    let g = grid(5);
    let d = build_derivative(&g, 2, 1).unwrap();
    let spec = spectrum(&hamiltonian(&d, &PotentialSpec::harmonic(3.0)).unwrap()).unwrap();
    let psi = spec.eigenvector(4);
    let dist = measure(&psi, &spec).unwrap();
    let top = dist.most_likely().unwrap();
    assert!((top.probability - 1.0).abs() < 1e-10);
    assert_eq!(top.value, spec.groups()[spec.group_of(4)].value);
    assert!((dist.total_probability() - 1.0).abs() < 1e-10);
    assert!(measure(&psi.scale(Complex64::new(2.0, 0.0)), &spec).is_err());
}

#[test]
fn position_measurement_probabilities() {
    let g = grid(5);
    let psi = gaussian(&g, 0.4, 0.1).unwrap();
    let spec = spectrum(&position_operator(&g)).unwrap();
    let dist = measure(&psi, &spec).unwrap();
    for o in &dist.outcomes {
        let i = g.index_of(o.value).unwrap();
        let expected = psi.values()[i].norm_sqr() * g.weights()[i];
        assert!((o.probability - expected).abs() <= 1e-12);
    }
}

#[test]
fn neumann_spectrum_is_nonnegative() {
    let g = grid(6);
    let d = build_derivative(&g, 2, 1).unwrap();
    let spec = spectrum(&neumann_hamiltonian(&d, (0.0, 1.0)).unwrap()).unwrap();
    assert!(spec.eigenvalues().iter().all(|&mu| mu >= -1e-10));
}

#[test]
fn semigroup_property_in_both_modes() {
    let g = grid(5);
    let d = build_derivative(&g, 2, 1).unwrap();
    let h = hamiltonian(&d, &PotentialSpec::harmonic(2.0)).unwrap();
    let spec = spectrum(&h).unwrap();
    let psi = gaussian(&g, 0.45, 0.1).unwrap();
    for mode in [EvolutionMode::Heat, EvolutionMode::Schrodinger] {
        let direct = evolve_with_spectrum(&spec, mode, &psi, &[0.0, 0.3]).unwrap();
        let first = evolve_with_spectrum(&spec, mode, &psi, &[0.0, 0.1]).unwrap();
        let second = evolve_with_spectrum(&spec, mode, &first.states[1], &[0.0, 0.2]).unwrap();
        let diff = direct.states[1].sub(&second.states[1]).unwrap().norm();
        assert!(diff <= 1e-9 * direct.states[1].norm(), "{mode:?}: {diff}");
    }
}

#[test]
fn heat_evolution_of_an_eigenvector() {
    let g = grid(5);
    let d = build_derivative(&g, 2, 1).unwrap();
    let spec = spectrum(&hamiltonian(&d, &PotentialSpec::harmonic(2.0)).unwrap()).unwrap();
    let j = 2;
    let psi = spec.eigenvector(j);
    let t = 0.4;
    let r = evolve_with_spectrum(&spec, EvolutionMode::Heat, &psi, &[0.0, t]).unwrap();
    let expected = psi.scale(Complex64::new((-t * spec.eigenvalues()[j]).exp(), 0.0));
    assert!(r.states[1].sub(&expected).unwrap().norm() < 1e-12);
}

#[test]
fn heat_energy_is_non_increasing() {
    let g = grid(6);
    let d = build_derivative(&g, 2, 1).unwrap();
    let h = hamiltonian(&d, &PotentialSpec::DirichletBox { lo: 0.0, hi: 1.0 }).unwrap();
    let spec = spectrum(&h).unwrap();
    let psi = sine_mode(&g, 1, 0.0, 1.0).add(&sine_mode(&g, 3, 0.0, 1.0)).unwrap();
    let r = evolve_with_spectrum(&spec, EvolutionMode::Heat, &psi, &[0.0, 0.01, 0.05, 0.1, 0.5]).unwrap();
    let traces = conservation_traces(&r, h.operator()).unwrap();
    for w in traces.windows(2) {
        assert!(w[1].energy <= w[0].energy * (1.0 + 1e-12));
        assert!(w[1].norm <= w[0].norm);
    }
}

#[test]
fn box_leakage_scales_as_inverse_square_root_of_alpha() {
    let mut scaled = Vec::new();
    for m in 5..=7 {
        let g = grid(m);
        let d = build_derivative(&g, 2, 1).unwrap();
        let h = hamiltonian(&d, &PotentialSpec::DirichletBox { lo: 0.0, hi: 1.0 }).unwrap();
        let spec = spectrum(&h).unwrap();
        let group = &spec.groups()[0];
        let outside = group
            .indices()
            .flat_map(|j| {
                let v = spec.eigenvector(j);
                g.nodes()
                    .iter()
                    .zip(v.values())
                    .filter(|(x, _)| **x < 0.0 || **x > 1.0)
                    .map(|(_, c)| c.norm())
                    .collect::<Vec<_>>()
            })
            .fold(0.0, f64::max);
        scaled.push(outside * g.alpha().sqrt());
    }
    // Continuum barrier estimate: |u'(0)| / sqrt(2 alpha) with |u'(0)| = sqrt(2) pi.
    for s in &scaled {
        assert!((s - std::f64::consts::PI).abs() < 0.3, "{scaled:?}");
    }
    for w in scaled.windows(2) {
        assert!((w[1] / w[0] - 1.0).abs() < 0.1, "{scaled:?}");
    }
}

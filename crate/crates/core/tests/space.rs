use std::sync::Arc;

use proptest::prelude::*;
use ultralab_core::space::{embed_real, WithBreaks};
use ultralab_core::{
    asymptotic_profile, build_derivative, build_grid, embed_weak, standard_limit_check, Complex64, Grid, LevelChain,
    Net, Ultrafunction,
};

fn grid(m: i32) -> Arc<Grid> {
    build_grid(m, (0.0, 1.0), 0.25, &[]).unwrap()
}

fn random_values(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n).prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

/// `Σ u(a)·conj(v(a))·d(a)` written out by hand.
fn direct_sum(g: &Grid, u: &[Complex64], v: &[Complex64]) -> Complex64 {
    (0..g.dim()).map(|i| u[i] * v[i].conj() * g.weights()[i]).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sifting_is_exact(values in random_values(grid(3).dim())) {
        let g = grid(3);
        let u = Ultrafunction::new(g.clone(), values.clone()).unwrap();
        for (i, value) in values.iter().enumerate() {
            let delta = Ultrafunction::delta_at(g.clone(), i).unwrap();
            let sifted = delta.integral_of_product(&u).unwrap();
            let err = (sifted - value).norm();
            prop_assert!(err <= 2.0 * f64::EPSILON * value.norm(), "node {i}: {err}");
        }
    }

    #[test]
    fn parseval_on_the_delta_basis(values in random_values(grid(3).dim())) {
        let g = grid(3);
        let u = Ultrafunction::new(g.clone(), values).unwrap();
        let total: f64 = (0..g.dim())
            .map(|i| u.inner_product(&Ultrafunction::normalized_delta_at(g.clone(), i).unwrap()).unwrap().norm_sqr())
            .sum();
        prop_assert!((total - u.norm().powi(2)).abs() <= 1e-10 * total);
    }

    #[test]
    fn reconstruction_reproduces_values(values in random_values(grid(3).dim())) {
        let g = grid(3);
        let u = Ultrafunction::new(g, values).unwrap();
        let r = u.reconstruct();
        for (a, b) in r.values().iter().zip(u.values()) {
            prop_assert!((a - b).norm() <= 1e-13 * b.norm().max(1.0));
        }
    }

    #[test]
    fn inner_product_matches_direct_sum(u in random_values(grid(3).dim()), v in random_values(grid(3).dim())) {
        let g = grid(3);
        let expected = direct_sum(&g, &u, &v);
        let uu = Ultrafunction::new(g.clone(), u).unwrap();
        let vv = Ultrafunction::new(g, v).unwrap();
        let got = uu.inner_product(&vv).unwrap();
        prop_assert!((got - expected).norm() <= 1e-12 * expected.norm().max(1.0));
        let self_product = uu.inner_product(&uu).unwrap();
        prop_assert!(self_product.im == 0.0 && self_product.re >= 0.0);
    }

    #[test]
    fn integration_by_parts(u in prop::collection::vec(-1.0f64..1.0, grid(4).dim()),
                            v in prop::collection::vec(-1.0f64..1.0, grid(4).dim()),
                            p in prop::sample::select(vec![2usize, 4])) {
        let g = grid(4);
        let d = build_derivative(&g, p, p / 2).unwrap();
        let uu = Ultrafunction::from_real(g.clone(), &u).unwrap();
        let vv = Ultrafunction::from_real(g.clone(), &v).unwrap();
        let lhs = d.apply(&uu).unwrap().inner_product(&vv).unwrap();
        let rhs = uu.inner_product(&d.apply(&vv).unwrap()).unwrap();
        let scale = 1.0 / g.spacing();
        prop_assert!((lhs + rhs).norm() <= 1e-13 * scale * g.dim() as f64);
    }

    #[test]
    fn weak_embedding_is_exact_on_hats(coeffs in prop::collection::vec(-1.0f64..1.0, grid(3).dim())) {
        let g = grid(3);
        let psi = WithBreaks { f: |x: f64| (3.0 * x).sin() * (-x * x).exp(), breaks: vec![] };
        let weak = embed_weak(&g, &psi, 1e-13).unwrap();
        let v = Ultrafunction::from_real(g.clone(), &coeffs).unwrap();
        let lhs = weak.integral_of_product(&v).unwrap().re;
        let nodes = g.nodes();
        let hat = |x: f64| -> f64 {
            let k = nodes.partition_point(|&t| t <= x);
            if k == 0 || k == nodes.len() {
                return 0.0;
            }
            let (x0, x1) = (nodes[k - 1], nodes[k]);
            let s = (x - x0) / (x1 - x0);
            coeffs[k - 1] * (1.0 - s) + coeffs[k] * s
        };
        let rhs = ultralab_core::quadrature::integrate_with_breaks(
            |x| (psi.f)(x) * hat(x),
            nodes[0],
            nodes[nodes.len() - 1],
            nodes,
            1e-13,
        ).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-11, "{lhs} vs {rhs}");
    }
}

#[test]
fn weak_embedding_of_smooth_function_is_second_order() {
    let errors: Vec<f64> = (4..=7)
        .map(|m| {
            let g = grid(m);
            let weak = embed_weak(&g, &|x: f64| (2.0 * x).cos(), 1e-13).unwrap();
            let n = g.dim();
            (2..n - 2)
                .map(|i| (weak.values()[i].re - (2.0 * g.nodes()[i]).cos()).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }
}

#[test]
fn weak_embedding_of_indicator() {
    let g = grid(4);
    let chi = WithBreaks { f: |x: f64| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }, breaks: vec![0.0, 1.0] };
    let u = embed_weak(&g, &chi, 1e-13).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        let v = u.values()[i].re;
        let expected = if x > 0.0 && x < 1.0 {
            1.0
        } else if x == 0.0 || x == 1.0 {
            0.5
        } else {
            0.0
        };
        assert!((v - expected).abs() < 1e-12, "x = {x}: {v}");
    }
}

#[test]
fn gaussian_integral_on_a_wide_domain() {
    let g = build_grid(8, (-6.0, 6.0), 0.0, &[]).unwrap();
    let u = embed_real(&g, |x| (-x * x).exp());
    let oracle = ultralab_core::quadrature::integrate(|x| (-x * x).exp(), -6.0, 6.0, 1e-13).unwrap();
    assert!((u.pointwise_integral().re - oracle).abs() < 1e-4);
    assert!((oracle - std::f64::consts::PI.sqrt()).abs() < 1e-10);
}

#[test]
fn trapezoid_net_has_standard_part_root_pi() {
    let chain = LevelChain::new(2, 8).unwrap();
    let net = Net::from_fn(&chain, |m| {
        let g = build_grid(m, (-4.0, 4.0), 0.0, &[]).unwrap();
        embed_real(&g, |x| (-x * x).exp()).pointwise_integral().re
    });
    let limit = standard_limit_check(&net, &chain, 1e-6).expect("net converges");
    assert!((limit - 1.7724539).abs() < 1e-4, "{limit}");
}

#[test]
fn derivative_error_drops_fourfold_per_level() {
    let f = |x: f64| (1.0 - (2.0 * x - 1.0).powi(2)).max(0.0).powi(6);
    let fp = |x: f64| {
        let r = 2.0 * x - 1.0;
        if r.abs() >= 1.0 {
            0.0
        } else {
            -24.0 * r * (1.0 - r * r).powi(5)
        }
    };
    let errors: Vec<f64> = (5..=9)
        .map(|m| {
            let g = grid(m);
            let d = build_derivative(&g, 2, 1).unwrap();
            d.consistency_error(f, fp, d.closure_margin())
        })
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio} in {errors:?}");
    }
}

#[test]
fn product_net_exponents_add() {
    let chain = LevelChain::new(3, 9).unwrap();
    let a = Net::from_fn(&chain, |m| 2.0 / ultralab_core::levels::spacing(m) + 1.0);
    let b = Net::from_fn(&chain, |m| 0.5 * ultralab_core::levels::spacing(m).powf(-0.5));
    let ab = Net::from_fn(&chain, |m| a.value(m).unwrap() * b.value(m).unwrap());
    let (pa, pb, pab) = (
        asymptotic_profile(&a, &chain).unwrap(),
        asymptotic_profile(&b, &chain).unwrap(),
        asymptotic_profile(&ab, &chain).unwrap(),
    );
    assert!(pa.r_squared > 0.999 && pb.r_squared > 0.999);
    assert!((pab.exponent - (pa.exponent + pb.exponent)).abs() <= 0.05);
}

#[test]
fn eventually_constant_net_has_exponent_zero() {
    let chain = LevelChain::new(0, 6).unwrap();
    let net = Net::from_fn(&chain, |m| if m < 2 { 100.0 * m as f64 } else { 5.0 });
    let late = LevelChain::new(2, 6).unwrap();
    let p = asymptotic_profile(&net, &late).unwrap();
    assert!(p.exponent.abs() < 1e-12);
    assert!((p.coefficient - 5.0).abs() < 1e-12);
    let st = standard_limit_check(&net, &late, 1e-9).unwrap();
    assert!((st - p.rendered.standard_part()).abs() <= 1e-9);
}

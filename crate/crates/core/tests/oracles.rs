//! Known values checked against independent computations.

use std::f64::consts::TAU;

use foliation_forge::constructions::bsymplectic::{assemble_bsymplectic, bivector_pfaffian, degeneration_order, GluingMode};
use foliation_forge::constructions::circular::{default_circular_k, lambda_closed, lambda_profile};
use foliation_forge::constructions::profiles::p_ell_eval;
use foliation_forge::exterior::FormField;
use foliation_forge::link_model::{build_link_model, geometry_constants, n_grid, reeb_field, ModelKind};
use foliation_forge::sl2z::{
    brute_force_conjugator, conjugate_to_inverse, monodromy_matrix, topological_invariants, trace_identity_check,
    unipotent_parameter, Sl2Matrix,
};
use foliation_forge::verify_suite::{build_end, SuiteConfig};

fn m(rows: [[i64; 2]; 2]) -> Sl2Matrix {
    Sl2Matrix::from_rows(rows).unwrap()
}

// ---- published values ----

#[test]
fn monodromy_237_and_444() {
    assert_eq!(monodromy_matrix(2, 3, 7).unwrap().rows(), [[5, -11], [1, -2]]);
    assert_eq!(monodromy_matrix(4, 4, 4).unwrap().rows(), [[21, -8], [8, -3]]);
}

#[test]
fn monodromies_conjugate_to_symmetric_forms() {
    for (t, sym, sym_inv) in [
        ([2, 3, 7], [[2, 1], [1, 1]], [[1, -1], [-1, 2]]),
        ([4, 4, 4], [[13, 8], [8, 5]], [[5, -8], [-8, 13]]),
    ] {
        let a = monodromy_matrix(t[0], t[1], t[2]).unwrap();
        let s = m(sym);
        assert_eq!(s.inverse().unwrap(), m(sym_inv));
        let p = brute_force_conjugator(&a, &s, 60).expect("conjugator within bound");
        assert_eq!(p.mul(&a).unwrap(), s.mul(&p).unwrap());
        assert!(conjugate_to_inverse(&a).unwrap());
    }
}

#[test]
fn nil_monodromies_are_the_unipotents_3_2_1() {
    for (t, ell) in [([3, 3, 3], 3), ([2, 4, 4], 2), ([2, 3, 6], 1)] {
        let a = monodromy_matrix(t[0], t[1], t[2]).unwrap();
        let target = m([[1, 0], [ell, 1]]);
        let p = brute_force_conjugator(&a, &target, 60).expect("conjugate to [[1,0],[l,1]]");
        assert_eq!(p.mul(&a).unwrap(), target.mul(&p).unwrap());
        assert_eq!(unipotent_parameter(&a).unwrap().abs(), ell);
    }
}

#[test]
fn euler_numbers_of_nil_links() {
    for (t, e) in [([3, 3, 3], -3), ([2, 4, 4], -2), ([2, 3, 6], -1)] {
        assert_eq!(topological_invariants(t[0], t[1], t[2]).unwrap().euler_number_if_nil, Some(e));
    }
}

#[test]
fn milnor_fiber_and_glued_euler_characteristics() {
    for t in [[2, 3, 7], [4, 4, 4]] {
        let inv = topological_invariants(t[0], t[1], t[2]).unwrap();
        assert_eq!(inv.mu, 11);
        assert_eq!(inv.chi_fiber, 12);
        assert_eq!(inv.chi_glued, 24);
    }
}

// ---- derived values, independent routes ----

fn plain_product(p: i64, q: i64, r: i64) -> [[i64; 2]; 2] {
    let f = |k: i64| [[k - 1, -1], [1, 0]];
    let mul = |x: [[i64; 2]; 2], y: [[i64; 2]; 2]| {
        [
            [x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]],
            [x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]],
        ]
    };
    mul(mul(f(r), f(q)), f(p))
}

#[test]
fn trace_against_plain_products() {
    for p in 2..=12 {
        for q in p..=12 {
            for r in q..=12 {
                let a = plain_product(p, q, r);
                assert_eq!(monodromy_matrix(p, q, r).unwrap().rows(), a);
                let t = trace_identity_check(p, q, r).unwrap();
                assert!(t.equal);
                assert_eq!(t.trace_computed, a[0][0] + a[1][1]);
                // pqr − qr − pr − pq + 2, all in integers
                assert_eq!(t.trace_computed, p * q * r - q * r - p * r - p * q + 2);
            }
        }
    }
}

#[test]
fn solv_exponent_from_eigenvalue() {
    for t in [[2, 3, 7], [4, 4, 4], [3, 4, 5]] {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let tr = plain_product(t[0], t[1], t[2]);
        let tr = (tr[0][0] + tr[1][1]) as f64;
        let mu = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
        match model.kind {
            ModelKind::Solv { lambda_hat, .. } => assert!((lambda_hat - mu.ln() / TAU).abs() < 1e-14),
            _ => panic!("expected solv"),
        }
    }
}

#[test]
fn nil_constants_on_grid() {
    for (t, ell) in [([3, 3, 3], 3.0), ([2, 4, 4], 2.0), ([2, 3, 6], 1.0)] {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let gc = geometry_constants(&model, &n_grid(16).unwrap()).unwrap();
        let a = ell / TAU;
        assert!((gc.a_min - a).abs() <= 1e-8 && (gc.a_max - a).abs() <= 1e-8);
        assert!(gc.c_max.abs() <= 1e-12);
        assert!((gc.m_min - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn reeb_solver_matches_closed_form() {
    for t in [[3, 3, 3], [2, 3, 7], [4, 4, 4]] {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let da = model.alpha.d().unwrap();
        for p in n_grid(6).unwrap().points() {
            let r = reeb_field(&model.alpha.at(&p).unwrap(), &da.at(&p).unwrap(), &p).unwrap();
            let c = model.reeb_closed_form(&p).unwrap();
            let scale = c.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            for i in 0..3 {
                assert!((r[i] - c[i]).abs() <= 1e-10 * scale, "{t:?} {p:?}");
            }
        }
    }
}

#[test]
fn end_form_square_expansion() {
    for t in [[2, 3, 7], [3, 3, 3]] {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let end = build_end(&SuiteConfig::for_triple(t), &model).unwrap();
        let a = &model.alpha;
        let a_da = a.wedge(&a.d().unwrap()).unwrap();
        let a_w = a.wedge(&model.omega_sigma).unwrap();
        let dx_w = FormField::dx(3, 0).unwrap().wedge(&model.omega_sigma).unwrap();
        for rho in [1.5, 2.5, 3.1, 4.7, 6.0, 7.9, 9.0] {
            for link in n_grid(4).unwrap().points() {
                let p = [rho, link[0], link[1], link[2]];
                let w = end.omega.at(&p).unwrap();
                let lhs = w.wedge(&w).unwrap().top();
                let [k, k1, _] = end.k.eval(rho);
                let l = end.l.value(rho);
                let rhs = 2.0
                    * (k1 * k * a_da.at(&link).unwrap().top()
                        + end.b * k1 * a_w.at(&link).unwrap().top()
                        + end.b * l * dx_w.at(&link).unwrap().top());
                assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()), "{t:?} {p:?}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn circular_lambda_on_nil() {
    for (t, ell) in [([3, 3, 3], 3.0), ([2, 4, 4], 2.0), ([2, 3, 6], 1.0)] {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let k = default_circular_k();
        let thetas: Vec<f64> = (0..12).map(|i| i as f64 * TAU / 12.0).collect();
        let grid = lambda_profile(&model, &k, &thetas, &n_grid(16).unwrap()).unwrap();
        for (th, lam) in thetas.iter().zip(&grid) {
            // K = 1 + sin/2, K' = cos/2
            let oracle = -(ell / TAU) * 0.5 * th.cos() * (1.0 + 0.5 * th.sin());
            assert!((lam - oracle).abs() <= 1e-8);
            assert!((lam - lambda_closed(&model, &k, *th)).abs() <= 1e-8);
        }
    }
}

#[test]
fn bivector_pfaffian_is_reciprocal_of_p() {
    let model = build_link_model(2, 3, 7).unwrap();
    for (ell, mode) in [(1, GluingMode::Double), (2, GluingMode::BaseReversed), (3, GluingMode::Double)] {
        let b = assemble_bsymplectic(&model, ell, mode).unwrap();
        for tau in [0.01, 0.1, 0.3] {
            let p = p_ell_eval(ell, tau)[0];
            let pf = bivector_pfaffian(&b.omega.at(&[tau, 0.4, 0.2, 0.9]).unwrap()).unwrap();
            assert!((pf.abs() - 1.0 / p.abs()).abs() <= 1e-12 * (1.0 / p.abs()).max(1.0));
        }
        let (_, slope) = degeneration_order(&b).unwrap();
        assert!((slope - ell as f64).abs() <= 0.05, "l = {ell}: slope {slope}");
    }
}

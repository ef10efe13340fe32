use std::f64::consts::TAU;

use proptest::prelude::*;

use foliation_forge::constructions::end_form::default_k;
use foliation_forge::constructions::foliated::default_phi;
use foliation_forge::constructions::profiles::{build_profile, ProfileParams};
use foliation_forge::constructions::tubular::default_psi;
use foliation_forge::exterior::{multi_indices, Form, FormField, Jet};
use foliation_forge::link_model::{build_link_model, reeb_field, LinkModel};
use foliation_forge::report::{CheckResult, Status};
use foliation_forge::sl2z::{are_conjugate, monodromy_matrix, rl_word, trace_identity_check, ConjugacyKind, Sl2Matrix};

/// Smooth random coefficient `c₀ + c₁ sin(k·x + s)`.
#[derive(Clone, Debug)]
struct Wave {
    c0: f64,
    c1: f64,
    k: Vec<f64>,
    s: f64,
}

impl Wave {
    fn eval(&self, x: &[Jet]) -> Jet {
        let arg = x.iter().zip(&self.k).fold(Jet::constant(self.s), |acc, (xi, ki)| acc + xi.scale(*ki));
        Jet::constant(self.c0) + arg.sin().scale(self.c1)
    }
}

fn wave(dim: usize) -> impl Strategy<Value = Wave> {
    (-2.0..2.0f64, -2.0..2.0f64, prop::collection::vec(-1.5..1.5f64, dim), 0.0..TAU)
        .prop_map(|(c0, c1, k, s)| Wave { c0, c1, k, s })
}

fn random_form(dim: usize, degree: usize) -> impl Strategy<Value = FormField> {
    let n = multi_indices(dim, degree).len();
    prop::collection::vec(wave(dim), n).prop_map(move |ws| {
        FormField::new(dim, degree, move |x| Form { dim, degree, coeffs: ws.iter().map(|w| w.eval(x)).collect() })
            .unwrap()
    })
}

fn point(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, dim)
}

fn close(a: &FormField, b: &FormField, p: &[f64], tol: f64) -> bool {
    let (x, y) = (a.at(p).unwrap(), b.at(p).unwrap());
    x.max_abs_diff(&y) <= tol * (1.0 + x.max_abs().max(y.max_abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn d_squared_vanishes(deg in 0usize..3, f in (0usize..3).prop_flat_map(|d| random_form(4, d)), p in point(4)) {
        let _ = deg;
        let dd = f.d().unwrap().d().unwrap();
        prop_assert!(dd.at(&p).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn graded_commutativity(a in random_form(4, 1), b in random_form(4, 2), c in random_form(4, 1), p in point(4)) {
        // deg 1 × deg 2 commute; deg 1 × deg 1 anticommute
        prop_assert!(close(&a.wedge(&b).unwrap(), &b.wedge(&a).unwrap(), &p, 1e-13));
        prop_assert!(close(&a.wedge(&c).unwrap(), &c.wedge(&a).unwrap().scale(-1.0), &p, 1e-13));
    }

    #[test]
    fn leibniz(a in random_form(5, 1), b in random_form(5, 2), p in point(5)) {
        let lhs = a.wedge(&b).unwrap().d().unwrap();
        let rhs = a.d().unwrap().wedge(&b).unwrap().sub(&a.wedge(&b.d().unwrap()).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, &p, 1e-12));
    }

    #[test]
    fn pullback_respects_wedge_and_d(
        a in random_form(3, 1),
        b in random_form(3, 1),
        m in prop::collection::vec(prop::collection::vec(-2.0..2.0f64, 4), 3),
        c in prop::collection::vec(-1.0..1.0f64, 3),
        p in point(4),
    ) {
        let pa = a.pull_affine(&m, &c).unwrap();
        let pb = b.pull_affine(&m, &c).unwrap();
        let pw = a.wedge(&b).unwrap().pull_affine(&m, &c).unwrap();
        prop_assert!(close(&pw, &pa.wedge(&pb).unwrap(), &p, 1e-12));
        let pd = a.d().unwrap().pull_affine(&m, &c).unwrap();
        let (x, y) = (pd.at(&p).unwrap(), pa.d().unwrap().at(&p).unwrap());
        prop_assert!(close(&pd, &pa.d().unwrap(), &p, 1e-12), "{:?} vs {:?}", x, y);
    }

    #[test]
    fn trace_identity_random(p in 2i64..200, q in 2i64..200, r in 2i64..200) {
        prop_assert!(trace_identity_check(p, q, r).unwrap().equal);
    }

    #[test]
    fn conjugation_preserves_class(
        t in prop::sample::select(vec![[2, 3, 7], [4, 4, 4], [3, 3, 3], [2, 4, 4], [2, 3, 6], [3, 4, 5], [2, 5, 5]]),
        word in prop::collection::vec(0u8..4, 0..6),
    ) {
        let a = monodromy_matrix(t[0], t[1], t[2]).unwrap();
        let gens = [Sl2Matrix::R, Sl2Matrix::L, Sl2Matrix::R.inverse().unwrap(), Sl2Matrix::L.inverse().unwrap()];
        let pm = word.iter().fold(Sl2Matrix::IDENTITY, |acc, &g| acc.mul(&gens[g as usize]).unwrap());
        let b = a.conjugate_by(&pm).unwrap();
        prop_assert_eq!(b.trace(), a.trace());
        prop_assert!(are_conjugate(&a, &b).unwrap());
        if a.conjugacy_type().kind == ConjugacyKind::Hyperbolic {
            prop_assert_eq!(rl_word(&a).unwrap(), rl_word(&b).unwrap());
        }
    }

    #[test]
    fn rl_word_product_conjugate(p in 2i64..9, q in 2i64..9, r in 2i64..9) {
        let a = monodromy_matrix(p, q, r).unwrap();
        prop_assume!(a.trace() >= 3);
        let w = rl_word(&a).unwrap();
        prop_assert!(are_conjugate(&w.product().unwrap(), &a).unwrap());
    }

    #[test]
    fn profile_conditions(t in 0.0..1.0f64) {
        let k = default_k().unwrap();
        let rho = 1.0 + 9.0 * t;
        let [kv, k1, _] = k.eval(rho);
        if rho <= 3.0 { prop_assert!((kv - rho).abs() <= 1e-12); }
        if rho > 3.0 && rho < 4.0 { prop_assert!((-1e-15..=1.0 + 1e-15).contains(&k1)); }
        if rho > 4.0 && rho <= 8.0 { prop_assert!((-1.0..=0.0).contains(&k1)); prop_assert!((kv * k1).abs() < 2.2); }
        if rho >= 8.0 { prop_assert_eq!(kv, 0.0); prop_assert_eq!(k1, 0.0); }

        let l = build_profile(&ProfileParams::L { a: 0.7 }).unwrap();
        if rho <= 2.0 { prop_assert_eq!(l.value(rho), 0.0); }
        if rho >= 3.0 { prop_assert!((l.value(rho) - 0.7).abs() <= 1e-15); }
        if rho > 2.0 && rho < 3.0 { prop_assert!(l.deriv(rho) > 0.0); }

        let psi = default_psi().unwrap();
        let s = psi.value(t);
        prop_assert!((0.0..=1.0).contains(&s));
        if t > 0.5 { prop_assert!(psi.deriv(t) < 0.0); }

        let phi = default_phi().unwrap();
        let tau = 4.0 * t - 2.0;
        prop_assert!(phi.deriv(tau) >= -1e-15);
        prop_assert!((0.0..=std::f64::consts::PI + 1e-15).contains(&phi.value(tau)));
    }

    #[test]
    fn reeb_conditions(t in prop::sample::select(vec![[3, 3, 3], [2, 4, 4], [2, 3, 6], [2, 3, 7], [4, 4, 4]]),
                       x in 0.0..TAU, u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let model = build_link_model(t[0], t[1], t[2]).unwrap();
        let p = [x, u, v];
        let (a, da) = (model.alpha.at(&p).unwrap(), model.alpha.d().unwrap().at(&p).unwrap());
        let r = reeb_field(&a, &da, &p).unwrap();
        prop_assert!((a.evaluate(&[r.to_vec()]).unwrap() - 1.0).abs() <= 1e-10);
        for j in 0..3 {
            let mut e = vec![0.0; 3];
            e[j] = 1.0;
            prop_assert!(da.evaluate(&[r.to_vec(), e]).unwrap().abs() <= 1e-10);
        }
        // tangent to the fibres of the projection to x
        prop_assert!(r[0].abs() <= 1e-10);
    }

    #[test]
    fn deck_invariance(t in prop::sample::select(vec![[3, 3, 3], [2, 3, 7], [4, 4, 4]]),
                       x in 0.0..TAU, u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let model: LinkModel = build_link_model(t[0], t[1], t[2]).unwrap();
        let p = [x, u, v];
        for deck in &model.deck {
            let q = deck.apply(&p);
            for f in [&model.alpha, &model.omega_sigma] {
                let pulled = f.at(&q).unwrap().pullback(&deck.jacobian).unwrap();
                let here = f.at(&p).unwrap();
                prop_assert!(pulled.max_abs_diff(&here) <= 1e-10 * (1.0 + here.max_abs()));
            }
        }
    }

    #[test]
    fn check_result_json_round_trip(
        name in "[a-z-]{1,16}",
        status in prop::sample::select(vec![Status::Pass, Status::Fail, Status::Skipped, Status::Vacuous]),
        margin in prop::option::of(-1e6..1e6f64),
        residual in prop::option::of(0.0..1.0f64),
        witness in prop::option::of(prop::collection::vec(-10.0..10.0f64, 0..5)),
        notes in prop::collection::vec("[ -~]{0,20}", 0..3),
    ) {
        let mut c = CheckResult::new(&name, "ref", "grid").status(status).witness(witness);
        if let Some(m) = margin { c = c.margin(m); }
        if let Some(r) = residual { c = c.residual(r); }
        for n in notes { c = c.note(n); }
        let back: CheckResult = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        prop_assert_eq!(back, c);
    }
}

use std::sync::Arc;

use heatjet::dist::{derivative, derived, heat_kernel, pair, Atom, Distribution, PhiCurve};
use heatjet::halfline::reflection_weights;
use heatjet::oracle::{Elementary, ScalarOracle};
use heatjet::quad::QuadratureConfig;
use heatjet::richardson::richardson;
use heatjet::testfn::{Smooth, TestFunction};
use heatjet::weil::{
    parse_poly, reduction_check, taylor_lift, truncated_algebra, TruncatedPoly, WeilAlgebra, WeilElement,
};
use proptest::prelude::*;

fn algebras() -> Vec<Arc<WeilAlgebra>> {
    vec![
        Arc::new(WeilAlgebra::dual_numbers()),
        Arc::new(WeilAlgebra::build(2, 3, vec![parse_poly("s1^2 - s2", 2, 3).unwrap()]).unwrap()),
        Arc::new(WeilAlgebra::build(2, 4, vec![parse_poly("s1 s2", 2, 4).unwrap()]).unwrap()),
        truncated_algebra(2, 3),
        truncated_algebra(1, 5),
    ]
}

fn elements(n: usize) -> impl Strategy<Value = (usize, Vec<Vec<f64>>)> {
    (0..algebras().len()).prop_flat_map(move |i| {
        let dim = algebras()[i].dim();
        (Just(i), proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, dim), n))
    })
}

fn el(w: &Arc<WeilAlgebra>, c: &[f64]) -> WeilElement {
    WeilElement::from_coords(w.clone(), c.to_vec()).unwrap()
}

fn close(x: &WeilElement, y: &WeilElement, rel: f64) -> bool {
    let scale = x.coords().iter().chain(y.coords()).fold(1.0f64, |m, v| m.max(v.abs()));
    x.coords().iter().zip(y.coords()).all(|(a, b)| (a - b).abs() <= rel * scale)
}

fn bump_on(a: f64, w: f64) -> TestFunction {
    TestFunction::bump(a, a + w).unwrap()
}

proptest! {
    #[test]
    fn weil_axioms((i, c) in elements(3)) {
        let w = &algebras()[i];
        let (x, y, z) = (el(w, &c[0]), el(w, &c[1]), el(w, &c[2]));
        prop_assert!(close(&(&(&x * &y) * &z), &(&x * &(&y * &z)), 1e-12));
        prop_assert!(close(&(&x * &y), &(&y * &x), 1e-12));
        prop_assert!(close(&(&x * &WeilElement::one(w)), &x, 1e-12));
        prop_assert!(close(&(&x * &(&y + &z)), &(&(&x * &y) + &(&x * &z)), 1e-12));
    }

    #[test]
    fn dyadic_arithmetic_is_exact((i, c) in elements(3)) {
        let w = &algebras()[i];
        let d: Vec<Vec<f64>> = c.iter().map(|v| v.iter().map(|a| (a * 8.0).round() / 8.0).collect()).collect();
        let (x, y, z) = (el(w, &d[0]), el(w, &d[1]), el(w, &d[2]));
        prop_assert_eq!((&(&x * &y) * &z).coords().to_vec(), (&x * &(&y * &z)).coords().to_vec());
        prop_assert_eq!((&x * &y).coords().to_vec(), (&y * &x).coords().to_vec());
    }

    #[test]
    fn lift_composes_with_products((i, c) in elements(1)) {
        // exp(x) exp(-x) = 1
        let w = &algebras()[i];
        let x = el(w, &c[0]).scale(0.25);
        let prod = &x.lift(&Elementary::Exp).unwrap() * &x.scale(-1.0).lift(&Elementary::Exp).unwrap();
        prop_assert!(close(&prod, &WeilElement::one(w), 1e-12));
    }

    #[test]
    fn polynomial_lift_is_arithmetic((i, c) in elements(1), k in proptest::collection::vec(-2.0f64..2.0, 3)) {
        struct Q(Vec<f64>);
        impl ScalarOracle for Q {
            fn derivatives(&self, x: f64, order: usize) -> Result<Vec<f64>, heatjet::oracle::OracleError> {
                let d = [self.0[0] + self.0[1] * x + self.0[2] * x * x, self.0[1] + 2.0 * self.0[2] * x, 2.0 * self.0[2]];
                Ok((0..=order).map(|j| d.get(j).copied().unwrap_or(0.0)).collect())
            }
        }
        let w = &algebras()[i];
        let x = el(w, &c[0]);
        let lifted = taylor_lift(&Q(k.clone()), &x).unwrap();
        let direct = (&x.scale(k[1]) + &(&x * &x).scale(k[2])).add_scalar(k[0]);
        prop_assert!(close(&lifted, &direct, 1e-12));
    }

    #[test]
    fn reduction_of_polynomials(c in proptest::collection::vec(-3.0f64..3.0, 6)) {
        let w = WeilAlgebra::build(2, 3, vec![parse_poly("s1^2 - s2", 2, 3).unwrap()]).unwrap();
        let names = ["1", "s1", "s2", "s1^2", "s1 s2", "s2^2"];
        let mut p = TruncatedPoly::zero(2, 3);
        for (n, k) in names.iter().zip(&c) {
            p = p.add(&parse_poly(n, 2, 3).unwrap().scale(*k));
        }
        let rep = reduction_check(&p, &w, 1e-9).unwrap();
        prop_assert!(rep.max_violation < 1e-12, "{rep:?}");
    }

    #[test]
    fn pairing_is_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, x0 in -1.5f64..0.0, w0 in 0.5f64..2.0, x1 in -1.0f64..0.5, w1 in 0.5f64..2.0, t in 0.05f64..2.0) {
        let q = QuadratureConfig::default();
        let phi = bump_on(x0, w0);
        let chi = bump_on(x1, w1).mul_poly(&[0.5, 1.0]);
        let mix = phi.scale(a).add(&chi.scale(b));
        let k = heat_kernel(t).unwrap();
        let d = Distribution::from_atoms(vec![Atom::new(0.1, 2, 1.5), Atom::new(-0.2, 0, -1.0)]).add(&k);
        let lhs = pair(&d, &mix, &q).unwrap().value;
        let rhs = a * pair(&d, &phi, &q).unwrap().value + b * pair(&d, &chi, &q).unwrap().value;
        let scale = lhs.abs().max(rhs.abs()).max(1.0);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} {rhs}");
    }

    #[test]
    fn derivative_adjunction(x0 in -1.5f64..0.0, w0 in 0.5f64..2.5, p in -1.0f64..1.0, m in 0usize..4, t in 0.05f64..1.0) {
        let q = QuadratureConfig::default();
        let phi = bump_on(x0, w0);
        let dphi = derived(Arc::new(phi.clone()), 1).unwrap();
        let atoms = Distribution::from_atoms(vec![Atom::new(p, m, 1.0)]);
        let lhs = pair(&derivative(&atoms, 1), &phi, &q).unwrap().value;
        let rhs = pair(&atoms, &dphi, &q).unwrap().value;
        prop_assert_eq!(lhs, -rhs);
        let k = heat_kernel(t).unwrap();
        let lhs = pair(&derivative(&k, 1), &phi, &q).unwrap().value;
        let rhs = pair(&k, &dphi, &q).unwrap().value;
        prop_assert!((lhs + rhs).abs() < 1e-10, "{lhs} {rhs}");
    }

    #[test]
    fn phi_curve_starts_at_phi0(x0 in -1.5f64..-0.1, w0 in 0.5f64..2.5) {
        let phi = bump_on(x0, w0);
        let c = PhiCurve::new(Arc::new(phi.clone()), QuadratureConfig::default());
        prop_assert_eq!(c.value(0.0).unwrap(), phi.value(0.0));
    }

    #[test]
    fn richardson_removes_polynomial_terms(l in -5.0f64..5.0, a in proptest::collection::vec(-3.0f64..3.0, 4)) {
        let vals: Vec<f64> = (0..14).map(|j| {
            let h = 0.5f64.powi(j);
            l + a[0] * h + a[1] * h * h + a[2] * h.powi(3) + a[3] * h.powi(4)
        }).collect();
        let e = richardson(&vals, 2.0, 4).unwrap();
        prop_assert!((e.value - l).abs() < 1e-10);
    }

    #[test]
    fn reflection_matches_derivatives(n in 1usize..=8) {
        let (b, a) = reflection_weights(n);
        for m in 0..=n {
            let terms: Vec<f64> = b.iter().zip(&a).map(|(b, a)| a * (-b).powi(m as i32)).collect();
            let s: f64 = terms.iter().sum();
            let mag: f64 = terms.iter().map(|v| v.abs()).sum();
            prop_assert!((s - 1.0).abs() <= 1e-13 * mag.max(1.0));
        }
    }
}

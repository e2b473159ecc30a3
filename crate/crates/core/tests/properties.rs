use std::sync::Arc;

use ham_core::algebra::{parse_expr, symbolic_equal, Expr, Float, Rational, VarSet, Wrt};
use ham_core::engine::{deformation_step, History};
use ham_core::problems::{ProblemParams, ProblemRegistry};
use proptest::prelude::*;

const PREC: u32 = 256;

fn vars() -> Arc<VarSet> {
    VarSet::new(["x", "y"]).unwrap()
}

fn coeff() -> impl Strategy<Value = String> {
    (-9i32..=9, 1u32..=5).prop_map(|(n, d)| format!("({n}/{d})"))
}

fn term() -> impl Strategy<Value = String> {
    let trig = prop_oneof![
        Just(String::new()),
        (
            prop_oneof![Just("sin"), Just("cos")],
            -2i32..=2,
            -2i32..=2,
            -3i32..=3,
            0u32..4
        )
            .prop_map(|(k, a, b, c, j)| format!("*{k}({a}*x + {b}*y + {c}/2 + {j}/2*pi)")),
    ];
    let gauss = prop_oneof![Just(""), Just("*exp(-2*x^2)"), Just("*exp(-2*y^2)")];
    (coeff(), 0u32..3, 0u32..3, 0u32..3, gauss, trig)
        .prop_map(|(c, tp, xp, yp, g, tr)| format!("{c}*t^{tp}*x^{xp}*y^{yp}{g}{tr}"))
}

fn expr_src() -> impl Strategy<Value = String> {
    prop::collection::vec(term(), 0..5).prop_map(|ts| if ts.is_empty() { "0".into() } else { ts.join(" + ") })
}

fn expr() -> impl Strategy<Value = Expr> {
    expr_src().prop_map(|s| parse_expr(&s, &vars()).unwrap())
}

fn unit() -> impl Strategy<Value = f64> {
    -1.0f64..1.0
}

fn point() -> impl Strategy<Value = (f64, f64, f64)> {
    (0.0f64..1.0, unit(), unit())
}

fn eval(e: &Expr, (t, x, y): (f64, f64, f64)) -> Float {
    let f = |v: f64| Float::with_val(PREC, v);
    e.evaluate_at(&f(t), &[f(x), f(y)], PREC)
}

fn small(v: Float, scale: &Float) -> bool {
    let tol = Float::with_val(PREC, Float::i_exp(1, -100)) * Float::with_val(PREC, scale.clone().abs() + 1u32);
    v.abs() < tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_is_idempotent(e in expr()) {
        let again = Expr::from_terms(e.vars(), e.terms().iter().cloned());
        prop_assert_eq!(&again, &e);
        prop_assert_eq!(parse_expr(&e.to_string(), &vars()).unwrap(), e);
    }

    #[test]
    fn multiplication_commutes_with_evaluation(
        a in expr(),
        b in expr(),
        pts in prop::collection::vec(point(), 50),
    ) {
        let ab = a.mul(&b).unwrap();
        for p in pts {
            let (va, vb) = (eval(&a, p), eval(&b, p));
            let prod = Float::with_val(PREC, &va * &vb);
            let diff = Float::with_val(PREC, eval(&ab, p) - &prod);
            prop_assert!(small(diff, &prod), "{} * {} at {:?}", a, b, p);
        }
    }

    #[test]
    fn linear_combination_commutes_with_evaluation(
        a in expr(),
        b in expr(),
        (n, d) in (-7i64..=7, 1i64..=4),
        pts in prop::collection::vec(point(), 50),
    ) {
        let c = Rational::from((n, d));
        let r = Expr::linear_combine(&vars(), &[(Rational::from(1), &a), (c.clone(), &b)]).unwrap();
        let cf = Float::with_val(PREC, &c);
        for p in pts {
            let want = Float::with_val(PREC, eval(&a, p) + Float::with_val(PREC, &cf * eval(&b, p)));
            let diff = Float::with_val(PREC, eval(&r, p) - &want);
            prop_assert!(small(diff, &want));
        }
    }

    #[test]
    fn derivative_matches_finite_difference(e in expr(), p in point(), wrt in 0usize..3) {
        let w = if wrt == 0 { Wrt::T } else { Wrt::Var(wrt - 1) };
        let de = e.differentiate(w);
        let h = Float::with_val(PREC, Float::i_exp(1, -30));
        let f = |k: i32| {
            let s = Float::with_val(PREC, &h * k);
            let f = |v: f64| Float::with_val(PREC, v);
            let mut args = [f(p.0), f(p.1), f(p.2)];
            args[wrt] += &s;
            let [t, x, y] = args;
            e.evaluate_at(&t, &[x, y], PREC)
        };
        // five-point central stencil
        let num = Float::with_val(PREC, f(-2) - f(2)) + Float::with_val(PREC, f(1) - f(-1)) * 8u32;
        let fd = num / Float::with_val(PREC, &h * 12u32);
        let exact = eval(&de, p);
        let tol = Float::with_val(PREC, Float::i_exp(1, -60)) * Float::with_val(PREC, exact.clone().abs() + 1u32);
        let err = Float::with_val(PREC, fd - &exact).abs();
        prop_assert!(err < tol, "{} d/{:?} at {:?}: {}", e, w, p, err);
    }

    #[test]
    fn calculus_stays_in_the_algebra(e in expr(), (n, d) in (-3i64..=3, 1i64..=3)) {
        let anchor = Rational::from((n, d));
        for out in [e.differentiate(Wrt::T), e.differentiate(Wrt::Var(0)), e.differentiate(Wrt::Var(1)), e.integrate_t(&anchor)] {
            let json = out.to_json_value();
            for term in json["terms"].as_array().unwrap() {
                for atom in term["atoms"].as_array().unwrap() {
                    let kind = atom["kind"].as_str().unwrap();
                    prop_assert!(["monomial", "gauss", "sin", "cos"].contains(&kind), "{}", kind);
                    if let Some(coeffs) = atom.get("coeffs") {
                        prop_assert!(coeffs.get("t").is_none());
                    }
                }
            }
            prop_assert_eq!(Expr::from_json_value(json, &vars()).unwrap(), out);
        }
    }

    #[test]
    fn integration_inverts_differentiation(e in expr(), (n, d) in (-3i64..=3, 1i64..=3)) {
        let anchor = Rational::from((n, d));
        let i = e.integrate_t(&anchor);
        prop_assert!(symbolic_equal(&i.differentiate(Wrt::T), &e));
        prop_assert!(i.substitute_t(&anchor).is_zero());
    }

    #[test]
    fn json_round_trip(e in expr()) {
        let text = serde_json::to_string(&e).unwrap();
        let back: Expr = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn first_order_is_affine_in_c0(id in prop::sample::select(vec!["bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd", "fbsdeNd(2)"]),
                                   (n, d) in (-9i64..=9, 1i64..=7)) {
        let pr = ProblemRegistry::builtin().create(id, &ProblemParams::default()).unwrap();
        let h = History::new(pr.initial_guess());
        let at = |c: &Rational| deformation_step(&*pr, &h, c, 1).unwrap();
        let c = Rational::from((n, d));
        let (zero, one, mid) = (at(&Rational::new()), at(&Rational::from(1)), at(&c));
        for k in 0..zero.len() {
            let slope = one[k].sub(&zero[k]).unwrap();
            let want = zero[k].add(&slope.scale(&c)).unwrap();
            prop_assert_eq!(&mid[k], &want);
        }
    }
}

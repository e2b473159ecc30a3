use std::sync::Arc;

use ham_core::algebra::{parse_expr, symbolic_equal, Expr, Float, Rational, VarSet, Wrt};

fn vars(names: &[&str]) -> Arc<VarSet> {
    VarSet::new(names.iter().copied()).unwrap()
}

fn p(src: &str, v: &Arc<VarSet>) -> Expr {
    parse_expr(src, v).unwrap()
}

#[test]
fn linear_combine_cancels_and_merges() {
    let v = vars(&["theta"]);
    let th = p("theta", &v);
    let zero = Expr::linear_combine(&v, &[(Rational::from(1), &th), (Rational::from(-1), &th)]).unwrap();
    assert!(zero.is_zero());
    let a = p("t*theta + theta^2", &v);
    let b = p("theta^2", &v);
    let r = Expr::linear_combine(&v, &[(Rational::from(1), &a), (Rational::from(-1), &b)]).unwrap();
    assert_eq!(r, p("t*theta", &v));
}

#[test]
fn mixed_universes_are_rejected() {
    let a = p("x", &vars(&["x"]));
    let b = p("y", &vars(&["y"]));
    assert!(a.add(&b).is_err());
    assert!(a.mul(&b).is_err());
}

#[test]
fn product_to_sum() {
    let v = vars(&["x"]);
    let s = p("sin(x)", &v);
    assert_eq!(s.mul(&s).unwrap(), p("1/2 - 1/2*cos(2*x)", &v));
    let sc = p("sin(x)", &v).mul(&p("cos(x)", &v)).unwrap();
    assert!(symbolic_equal(&sc, &p("1/2*sin(2*x)", &v)));
    assert_eq!(p("theta*(1 - theta)", &vars(&["theta"])), p("theta - theta^2", &vars(&["theta"])));
}

#[test]
fn gauss_multiplicities_add() {
    let v = vars(&["x"]);
    let r = p("exp(-2*x^2)", &v).mul(&p("x*exp(-2*x^2)", &v)).unwrap();
    assert_eq!(r, p("x*exp(-4*x^2)", &v));
}

#[test]
fn derivatives() {
    let v = vars(&["theta"]);
    assert_eq!(p("t^2*theta", &v).differentiate(Wrt::T), p("2*t*theta", &v));
    let x = vars(&["x"]);
    assert_eq!(p("sin(x + 1)", &x).differentiate(Wrt::Var(0)), p("cos(x + 1)", &x));
    let g = p("x*exp(-2*x^2)", &x).differentiate(Wrt::Var(0));
    assert_eq!(g, p("exp(-2*x^2) - 4*x^2*exp(-2*x^2)", &x));
}

#[test]
fn gauss_derivative_matches_finite_difference() {
    let x = vars(&["x"]);
    let e = p("x*exp(-2*x^2)", &x);
    let de = e.differentiate(Wrt::Var(0));
    let prec = 256;
    let h = Float::with_val(prec, Float::i_exp(1, -30));
    let x0 = Float::with_val(prec, 0.7);
    let t = Float::new(prec);
    // five-point central stencil: truncation error O(h^4)
    let f = |k: i32| e.evaluate_at(&t, &[Float::with_val(prec, &x0 + Float::with_val(prec, &h * k))], prec);
    let num = Float::with_val(prec, f(-2) - f(2)) + Float::with_val(prec, f(1) - f(-1)) * 8u32;
    let fd = num / Float::with_val(prec, &h * 12u32);
    let exact = de.evaluate_at(&t, &[x0], prec);
    let err = Float::with_val(prec, fd - exact).abs();
    assert!(err < Float::with_val(prec, Float::i_exp(1, -60)), "{err}");
}

#[test]
fn integrate_t_anchors() {
    let v = vars(&["theta"]);
    let r = p("theta", &v).integrate_t(&Rational::from(1));
    assert_eq!(r, p("t*theta - theta", &v));
    let phi1 = p("-theta + theta^2", &v).integrate_t(&Rational::from(1)).scale(&Rational::from(-1));
    assert_eq!(phi1, p("(t - 1)*(theta - theta^2)", &v));
    let x = vars(&["x"]);
    // int_0^t z^2/2 sin(x + 3pi/2) dz = t^3/6 sin(x + 3pi/2)
    let r = p("1/2*t^2*sin(x + 3/2*pi)", &x).integrate_t(&Rational::new());
    assert_eq!(r, p("1/6*t^3*sin(x + 3/2*pi)", &x));
    assert_eq!(r, p("-1/6*t^3*cos(x)", &x));
}

#[test]
fn evaluation() {
    let v = vars(&["theta"]);
    let prec = 256;
    let e = Float::with_val(prec, 1u32).exp();
    let theta0 = Float::with_val(prec, &e / Float::with_val(prec, &e + 1u32));
    let val = p("theta", &v).evaluate_at(&Float::new(prec), std::slice::from_ref(&theta0), prec);
    assert_eq!(val, theta0);
    assert!((val.to_f64() - 0.731_058_578_630_004_9).abs() < 1e-15);
    assert_eq!(Expr::zero(&v).evaluate_at(&Float::new(prec), &[theta0], prec), 0);
}

#[test]
fn unbound_variable_is_an_error() {
    let v = vars(&["x", "y"]);
    let mut point = std::collections::BTreeMap::new();
    point.insert("x".to_string(), Float::with_val(64, 1));
    assert!(p("x + y", &v).evaluate(&point, &Float::new(64), 64).is_err());
}

#[test]
fn display_parses_back() {
    let v = vars(&["x1", "x2"]);
    for src in [
        "0",
        "1/3*t^2*x1 - x2^3 + 7",
        "sin(x1 - 2*x2 + 1/3 + 1/4*pi)*t - 3/2*cos(x2)",
        "x1*exp(-2*x1^2)*exp(-2*x2^2) + exp(-6*x2^2)",
        "-sin(-x1 + 2)",
    ] {
        let e = p(src, &v);
        let again = p(&e.to_string(), &v);
        assert_eq!(e, again, "{src} -> {e}");
    }
}

#[test]
fn json_round_trip() {
    let v = vars(&["x1", "x2"]);
    let e = p("1/3*t^2*x1*sin(x1 + x2 + 1) - 2*exp(-2*x2^2) + cos(2*x1 + 1/4*pi)", &v);
    let s = serde_json::to_string(&e).unwrap();
    let back: Expr = serde_json::from_str(&s).unwrap();
    assert_eq!(back.to_string(), e.to_string());
    let back = Expr::from_json_value(e.to_json_value(), &v).unwrap();
    assert_eq!(back, e);
}

#[test]
fn parse_errors() {
    let v = vars(&["x"]);
    for bad in ["y", "sin(t)", "exp(x)", "x/x", "pi", "sin(x*x)", "1 +", "sin(1/2*x)"] {
        assert!(parse_expr(bad, &v).is_err(), "{bad}");
    }
}

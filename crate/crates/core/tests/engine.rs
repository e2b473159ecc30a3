use std::sync::Arc;

use ham_core::algebra::{parse_expr, Expr, LinearArg, Phase, Rational, TrigKind, VarSet};
use ham_core::engine::{
    cauchy2, cauchy3, chi, deformation_step, embedded_trig_coefficient, partial_sum, run_series, run_series_with,
    EngineOptions, History,
};
use ham_core::problems::{Problem, ProblemParams, ProblemRegistry};
use ham_core::Error;

fn problem(id: &str) -> Box<dyn Problem> {
    ProblemRegistry::builtin().create(id, &ProblemParams::default()).unwrap()
}

fn p(src: &str, v: &Arc<VarSet>) -> Expr {
    parse_expr(src, v).unwrap()
}

fn minus_one() -> Rational {
    Rational::from(-1)
}

#[test]
fn chi_values() {
    assert_eq!(chi(0), 0);
    assert_eq!(chi(1), 0);
    assert_eq!(chi(2), 1);
    assert_eq!(chi(100), 1);
}

#[test]
fn cauchy_products() {
    let pr = problem("bsde1d");
    let v = pr.vars();
    let s = run_series(&*pr, 2, &minus_one()).unwrap();
    let phi = s.phis();
    assert_eq!(cauchy2(phi, phi, 0).unwrap(), p("theta^2", v));
    assert_eq!(cauchy2(phi, phi, 1).unwrap(), phi[0].mul(&phi[1]).unwrap().scale(&Rational::from(2)));
    assert_eq!(cauchy3(phi, phi, phi, 0).unwrap(), p("theta^3", v));
    let three = phi[0].mul(&phi[0]).unwrap().mul(&phi[1]).unwrap().scale(&Rational::from(3));
    assert_eq!(cauchy3(phi, phi, phi, 1).unwrap(), three);
    assert!(matches!(cauchy2(phi, phi, 5), Err(Error::Index { .. })));
}

#[test]
fn embedded_trig() {
    let v = VarSet::new(["x"]).unwrap();
    let x = LinearArg::new(vec![1], Phase::new(0, 0));
    assert_eq!(embedded_trig_coefficient(&v, TrigKind::Sin, 1, &x, 0), p("sin(x)", &v));
    assert_eq!(embedded_trig_coefficient(&v, TrigKind::Sin, 1, &x, 2), p("-1/2*t^2*sin(x)", &v));
    let two_x = LinearArg::new(vec![2], Phase::new(0, 0));
    for i in 0..6u32 {
        let want = p(&format!("2^{i}/{}*t^{i}*cos(2*x + {i}/2*pi)", (1..=i).product::<u32>()), &v);
        assert_eq!(embedded_trig_coefficient(&v, TrigKind::Cos, 2, &two_x, i), want, "i = {i}");
    }
}

#[test]
fn first_deformation_steps() {
    let ex1 = problem("bsde1d");
    let h = History::new(ex1.initial_guess());
    let phi1 = deformation_step(&*ex1, &h, &minus_one(), 1).unwrap();
    assert_eq!(phi1[0], p("(t - 1)*(theta - theta^2)", ex1.vars()));

    let ex4 = problem("fbsde");
    let h = History::new(ex4.initial_guess());
    let phi1 = deformation_step(&*ex4, &h, &minus_one(), 1).unwrap();
    assert_eq!(phi1[0], p("t*cos(x)", ex4.vars()));
}

#[test]
fn zero_c0_leaves_only_the_boundary_correction() {
    for id in ["bsde1d", "bsde2d", "fbsde", "fbsde2nd"] {
        let pr = problem(id);
        let h = History::new(pr.initial_guess());
        let phi1 = deformation_step(&*pr, &h, &Rational::new(), 1).unwrap();
        for (c, e) in phi1.iter().enumerate() {
            assert_eq!(*e, pr.boundary_rule(c, 1), "{id}");
            assert!(e.differentiate(ham_core::algebra::Wrt::T).is_zero(), "{id}");
        }
    }
}

#[test]
fn partial_sums_from_the_printed_lists() {
    let ex2 = problem("bsde2d");
    let s = run_series(&*ex2, 1, &minus_one()).unwrap();
    assert_eq!(partial_sum(&s, 1).unwrap()[0], p("(t - 1)*cos(1 + x) + sin(1 + x)", ex2.vars()));

    let ex3 = problem("bsde2w");
    let s = run_series(&*ex3, 2, &minus_one()).unwrap();
    let want = p("(t - 1)*cos(1 + x1 + x2) - 1/2*(t^2 - 2*t - 1)*sin(1 + x1 + x2)", ex3.vars());
    assert_eq!(partial_sum(&s, 2).unwrap()[0], want);

    let ex5 = problem("fbsde2nd");
    let s = run_series(&*ex5, 3, &minus_one()).unwrap();
    let want = p("sin(x) + t*cos(x) - 1/2*t^2*sin(x) - 1/6*t^3*cos(x)", ex5.vars());
    assert_eq!(partial_sum(&s, 3).unwrap()[0], want);

    assert_eq!(partial_sum(&s, 0).unwrap(), ex5.initial_guess());
    assert!(matches!(partial_sum(&s, 4), Err(Error::Index { .. })));
}

#[test]
fn term_cap_names_the_order() {
    let pr = ProblemRegistry::builtin()
        .create("fbsdeNd", &ProblemParams { d: Some(4) })
        .unwrap();
    let err = run_series_with(&*pr, 6, &minus_one(), &EngineOptions { term_cap: 50 }).unwrap_err();
    match err {
        Error::TermCap { order, terms, cap } => {
            assert!(order >= 1 && terms > cap && cap == 50);
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn series_is_linear_in_c0_at_first_order() {
    let pr = problem("bsde2w");
    let vars = pr.vars().clone();
    let h = History::new(pr.initial_guess());
    let at = |c: i64| deformation_step(&*pr, &h, &Rational::from(c), 1).unwrap()[0].clone();
    let (a, b, c) = (at(0), at(1), at(2));
    let second_diff = Expr::linear_combine(
        &vars,
        &[(Rational::from(1), &c), (Rational::from(-2), &b), (Rational::from(1), &a)],
    )
    .unwrap();
    assert!(second_diff.is_zero());
}

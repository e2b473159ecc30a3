//! Fixture and invariant checks behind `ham verify`.

use std::collections::BTreeMap;
use std::path::Path;

use ham_core::algebra::rational::parse_rational;
use ham_core::algebra::{parse_expr, Float, Rational, VarSet};
use ham_core::diagnostics::{exact_residual_norm, NormSpec, QuadratureSpec};
use ham_core::engine::{partial_sum, run_series, SeriesSolution};
use ham_core::problems::{observable_errors, Problem, ProblemParams, ProblemRegistry};
use ham_core::{Error, Result};
use serde::{Deserialize, Serialize};

pub const BUILTIN_FIXTURES: &str = include_str!("../../../fixtures/printed_series.json");

/// Printed partial sums `phi~_1, phi~_2, ...` of one problem, one list entry
/// per component.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub vars: Vec<String>,
    pub c0: String,
    pub partial_sums: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn from(name: impl Into<String>, r: Result<String>) -> Self {
        let name = name.into();
        match r {
            Ok(detail) => Check {
                name,
                passed: true,
                detail,
            },
            Err(e) => Check {
                name,
                passed: false,
                detail: e.to_string(),
            },
        }
    }
}

fn fail(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}

fn problem(id: &str) -> Result<Box<dyn Problem>> {
    ProblemRegistry::builtin().create(id, &ProblemParams::default())
}

fn check_fixture(id: &str, fx: &Fixture) -> Result<String> {
    let p = problem(id)?;
    let vars = VarSet::new(fx.vars.iter().cloned())?;
    if *vars != **p.vars() {
        return Err(fail(format!("fixture variables {vars} differ from the problem's {}", p.vars())));
    }
    let c0 = parse_rational(&fx.c0)?;
    let series = run_series(&*p, fx.partial_sums.len(), &c0)?;
    for (i, printed) in fx.partial_sums.iter().enumerate() {
        let m = i + 1;
        let got = partial_sum(&series, m)?;
        if printed.len() != got.len() {
            return Err(fail(format!("order {m}: {} components printed, {} computed", printed.len(), got.len())));
        }
        for (c, (src, g)) in printed.iter().zip(&got).enumerate() {
            let want = parse_expr(src, p.vars())?;
            if want != *g {
                return Err(fail(format!("order {m} component {c}: printed {want}, computed {g}")));
            }
        }
    }
    Ok(format!("{} orders match", fx.partial_sums.len()))
}

/// `phi_i = t^i/i! sin(x + i pi/2)` for example 4 at `c0 = -1`.
fn check_appendix() -> Result<String> {
    let p = problem("fbsde")?;
    let s = run_series(&*p, 12, &Rational::from(-1))?;
    for (i, phi) in s.components[0].iter().enumerate() {
        let want = parse_expr(&format!("1/{}*t^{i}*sin(x + {i}/2*pi)", factorial(i)), p.vars())?;
        if *phi != want {
            return Err(fail(format!("phi_{i} = {phi}, expected {want}")));
        }
    }
    Ok("phi_0..phi_12 match".into())
}

fn factorial(n: usize) -> String {
    ham_core::algebra::rational::factorial(n as u32).to_string()
}

fn small_problems() -> Vec<&'static str> {
    vec!["bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd", "fbsdeNd(3)"]
}

fn check_boundary(id: &str) -> Result<String> {
    let p = problem(id)?;
    let s = run_series(&*p, 5, &Rational::from((-7, 10)))?;
    let t = p.terminal_time();
    for (c, comp) in s.components.iter().enumerate() {
        for (m, phi) in comp.iter().enumerate() {
            if phi.substitute_t(&t) != p.boundary_rule(c, m) {
                return Err(fail(format!("phi_{m} component {c} misses its terminal value")));
            }
        }
    }
    Ok("orders 0..5 at c0 = -7/10".into())
}

fn check_exact_residual(id: &str) -> Result<String> {
    let p = problem(id)?;
    let mut spec = NormSpec::for_problem(&*p, 256);
    spec.quadrature = match spec.quadrature {
        QuadratureSpec::TensorGauss { .. } => QuadratureSpec::TensorGauss { nodes: 12 },
        _ => QuadratureSpec::QuasiRandom { samples: 256, seed: 42 },
    };
    let r = exact_residual_norm(&*p, &spec)?;
    let bound = Float::with_val(64, Float::i_exp(1, -100));
    if r < bound {
        Ok(format!("{:.3e}", r.to_f64()))
    } else {
        Err(fail(format!("residual {r:.3e} is not below 2^-100")))
    }
}

fn check_roundtrip(id: &str) -> Result<String> {
    let p = problem(id)?;
    let s = run_series(&*p, 3, &Rational::from(-1))?;
    let text = serde_json::to_string(&s)?;
    let back: SeriesSolution = serde_json::from_str(&text)?;
    let same = back.components.len() == s.components.len()
        && back
            .components
            .iter()
            .zip(&s.components)
            .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x == y));
    if same && back.c0 == s.c0 {
        Ok(format!("{} bytes", text.len()))
    } else {
        Err(fail("series changed across a JSON round trip"))
    }
}

fn check_symmetry() -> Result<String> {
    let p = problem("bsde2w")?;
    let s = run_series(&*p, 8, &Rational::from(-1))?;
    let errs = observable_errors(&*p, &partial_sum(&s, 8)?, 256)?;
    if errs.z0.len() == 2 && errs.z0[0] == errs.z0[1] {
        Ok("z0 components bit-identical at order 8".into())
    } else {
        Err(fail(format!("z0 components differ: {:?}", errs.z0)))
    }
}

fn check_zero_observables(id: &str) -> Result<String> {
    let p = problem(id)?;
    let s = run_series(&*p, 8, &Rational::from(-1))?;
    for m in [4, 8] {
        let errs = observable_errors(&*p, &partial_sum(&s, m)?, 256)?;
        for (name, v) in errs.named() {
            if !v.is_zero() {
                return Err(fail(format!("order {m}: {name} error is {v:.3e}")));
            }
        }
    }
    Ok("all observable errors exactly zero at orders 4, 8".into())
}

/// Runs every check whose name starts with `only` (all when `None`).
pub fn run(fixtures: Option<&Path>, only: Option<&str>) -> Result<Vec<Check>> {
    let text = match fixtures {
        Some(path) => std::fs::read_to_string(path)?,
        None => BUILTIN_FIXTURES.to_string(),
    };
    let selected = |name: &str| only.is_none_or(|o| name.starts_with(o));
    let mut checks = Vec::new();
    match serde_json::from_str::<BTreeMap<String, Fixture>>(&text) {
        Ok(fixtures) => {
            for (id, fx) in &fixtures {
                let name = format!("fixture:{id}");
                if selected(&name) {
                    checks.push(Check::from(name, check_fixture(id, fx)));
                }
            }
        }
        Err(e) => {
            if selected("fixture") {
                let origin = fixtures.map_or("built-in fixtures".to_string(), |p| p.display().to_string());
                checks.push(Check::from("fixture:file", Err(fail(format!("{origin}: {e}")))));
            }
        }
    }
    if selected("appendix-identity") {
        checks.push(Check::from("appendix-identity", check_appendix()));
    }
    for id in small_problems() {
        for (prefix, f) in [
            ("boundary", check_boundary as fn(&str) -> Result<String>),
            ("exact-residual", check_exact_residual),
            ("json-roundtrip", check_roundtrip),
        ] {
            let name = format!("{prefix}:{id}");
            if selected(&name) {
                checks.push(Check::from(name, f(id)));
            }
        }
    }
    if selected("z-symmetry") {
        checks.push(Check::from("z-symmetry", check_symmetry()));
    }
    for id in ["fbsde", "fbsde2nd"] {
        let name = format!("zero-observables:{id}");
        if selected(&name) {
            checks.push(Check::from(name, check_zero_observables(id)));
        }
    }
    if checks.is_empty() {
        return Err(Error::Config(format!("no check matches `{}`", only.unwrap_or_default())));
    }
    Ok(checks)
}

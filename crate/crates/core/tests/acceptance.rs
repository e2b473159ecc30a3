//! End-to-end reproduction of the published results. Prints one PASS/FAIL
//! line per criterion and exits non-zero on any unexplained failure.
//!
//! Set `HAM_ACCEPT_LARGE_D=1` to include the d = 8, 10, 12 tables.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ham_core::algebra::rational::parse_rational;
use ham_core::algebra::{parse_expr, Expr, Float, Rational, Wrt};
use ham_core::diagnostics::{
    cpu_time_models, error_norm_exact, exact_residual_norm, parse_grid, sweep_c0, NormSpec,
    QuadratureSpec,
};
use ham_core::engine::{partial_sum, run_series, run_series_with, EngineOptions, SeriesSolution};
use ham_core::problems::{observable_errors, Problem, ProblemParams, ProblemRegistry};
use ham_core::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

const PREC: u32 = 256;

/// Entries that cannot be reproduced faithfully; each is analysed in the
/// project notes. They are still computed and reported.
const DOCUMENTED: &[&str] = &[
    "table1 m=15 E~",
    "table3 m=20 y0",
    "table3 m=20 z0_1",
    "table6 m=8 y0",
];

#[derive(Default)]
struct Outcome {
    checks: usize,
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks += 1;
        let name = name.into();
        if !ok {
            self.failures.push(format!("{name}: {}", detail.into()));
        }
    }

    fn budget(&mut self, what: &str, took: Duration, limit: Duration) {
        self.check(
            format!("{what} runtime"),
            took < limit,
            format!("{:.1} s over the {} s budget", took.as_secs_f64(), limit.as_secs()),
        );
    }

    fn try_run(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<()>) {
        if let Err(e) = f(self) {
            self.check(name, false, e.to_string());
        }
    }
}

fn problem(id: &str) -> Result<Box<dyn Problem>> {
    ProblemRegistry::builtin().create(id, &ProblemParams::default())
}

fn nd(d: usize) -> Result<Box<dyn Problem>> {
    ProblemRegistry::builtin().create("fbsdeNd", &ProblemParams { d: Some(d) })
}

fn series(pr: &dyn Problem, m: usize) -> Result<SeriesSolution> {
    run_series(pr, m, &Rational::from(-1))
}

/// `-8e-9` style: one significant figure with the exponent.
fn one_figure(v: &Float) -> String {
    if v.is_zero() {
        return "0".into();
    }
    let s = format!("{:.0e}", v.to_f64());
    s.replace("e-0", "e-")
}

fn matches_printed(v: &Float, printed: &str) -> bool {
    one_figure(v) == printed
}

#[derive(Deserialize)]
struct Fixture {
    vars: Vec<String>,
    c0: String,
    partial_sums: Vec<Vec<String>>,
}

fn fixtures(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    let all: BTreeMap<String, Fixture> =
        serde_json::from_str(include_str!("../../../fixtures/printed_series.json"))?;
    for (id, fx) in &all {
        let pr = problem(id)?;
        o.check(format!("{id} vars"), pr.vars().names() == &fx.vars[..], "variable list differs");
        let s = run_series(&*pr, fx.partial_sums.len(), &parse_rational(&fx.c0)?)?;
        for (i, printed) in fx.partial_sums.iter().enumerate() {
            let got = partial_sum(&s, i + 1)?;
            for (c, src) in printed.iter().enumerate() {
                let want = parse_expr(src, pr.vars())?;
                o.check(format!("{id} phi~_{} [{c}]", i + 1), got[c] == want, format!("computed {}", got[c]));
            }
        }
    }
    o.notes.push(format!("{} problems", all.len()));
    o.budget("fixtures", start.elapsed(), Duration::from_secs(5));
    Ok(())
}

fn appendix(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    let pr = problem("fbsde")?;
    let s = series(&*pr, 12)?;
    let mut fact = 1u64;
    for (i, phi) in s.phis().iter().enumerate() {
        if i > 0 {
            fact *= i as u64;
        }
        let want = parse_expr(&format!("1/{fact}*t^{i}*sin(x + {i}/2*pi)"), pr.vars())?;
        o.check(format!("phi_{i}"), *phi == want, format!("computed {phi}"));
    }
    o.budget("appendix", start.elapsed(), Duration::from_secs(10));
    Ok(())
}

fn table1(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    let pr = problem("bsde1d")?;
    let rows: [(usize, f64, &str, &str); 5] = [
        (3, 1e-6, "-5e-3", "-8e-4"),
        (6, 8e-10, "8e-5", "2e-4"),
        (9, 5e-13, "3e-7", "-1e-5"),
        (12, 4e-16, "-8e-8", "5e-7"),
        (15, 6e-19, "3e-9", "-8e-9"),
    ];
    let s = series(&*pr, 15)?;
    let spec = NormSpec::for_problem(&*pr, PREC).with_quadrature(QuadratureSpec::TensorGauss { nodes: 128 });
    for (m, e_printed, y, z) in rows {
        let approx = partial_sum(&s, m)?;
        let e = error_norm_exact(&*pr, &approx, &spec)?.to_f64();
        let ratio = e / e_printed;
        o.check(
            format!("table1 m={m} E~"),
            (0.5..=2.0).contains(&ratio),
            format!("{e:.3e} vs printed {e_printed:e}"),
        );
        let errs = observable_errors(&*pr, &approx, PREC)?;
        o.check(format!("table1 m={m} y0"), matches_printed(&errs.y0[0], y), one_figure(&errs.y0[0]));
        o.check(format!("table1 m={m} z0"), matches_printed(&errs.z0[0], z), one_figure(&errs.z0[0]));
    }
    o.budget("table 1", start.elapsed(), Duration::from_secs(60));
    Ok(())
}

fn observable_table(
    o: &mut Outcome,
    label: &str,
    pr: &dyn Problem,
    rows: &[(usize, [&str; 2])],
    prec: u32,
) -> Result<()> {
    let top = rows.iter().map(|r| r.0).max().unwrap_or(0);
    let s = series(pr, top)?;
    let cols = pr.table_columns();
    for (m, printed) in rows {
        let errs = observable_errors(pr, &partial_sum(&s, *m)?, prec)?;
        for (col, want) in cols.iter().zip(printed) {
            let got = errs.get(col).expect("table column");
            o.check(
                format!("{label} m={m} {col}"),
                matches_printed(&got, want),
                format!("{} vs printed {want}", one_figure(&got)),
            );
        }
    }
    Ok(())
}

fn tables2_3(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    let t2 = [
        (4, ["6e-3", "-6e-3"]),
        (8, ["2e-6", "-2e-6"]),
        (12, ["1e-10", "-1e-10"]),
        (16, ["2e-15", "-2e-15"]),
        (20, ["1e-20", "-2e-20"]),
    ];
    observable_table(o, "table2", &*problem("bsde2d")?, &t2, 128)?;
    let t3 = [
        (4, ["6e-3", "-6e-3"]),
        (8, ["2e-6", "-2e-6"]),
        (12, ["1e-10", "-1e-10"]),
        (16, ["2e-15", "-2e-15"]),
        (20, ["-4e-17", "7e-17"]),
    ];
    let ex3 = problem("bsde2w")?;
    observable_table(o, "table3", &*ex3, &t3, 128)?;
    let s = series(&*ex3, 20)?;
    for m in [4, 8, 12, 16, 20] {
        let errs = observable_errors(&*ex3, &partial_sum(&s, m)?, PREC)?;
        let same = errs.z0[0].to_string_radix(16, None) == errs.z0[1].to_string_radix(16, None);
        o.check(format!("table3 m={m} z symmetry"), same, "z0 components differ");
    }
    o.budget("tables 2-3", start.elapsed(), Duration::from_secs(120));
    Ok(())
}

fn tables4_5(o: &mut Outcome) -> Result<()> {
    let start = Instant::now();
    for id in ["fbsde", "fbsde2nd"] {
        let pr = problem(id)?;
        let s = series(&*pr, 20)?;
        for m in [4, 8, 12, 16, 20] {
            let errs = observable_errors(&*pr, &partial_sum(&s, m)?, PREC)?;
            for (name, v) in errs.named() {
                o.check(format!("{id} m={m} {name}"), v.is_zero(), format!("{v:.3e}"));
            }
        }
    }
    o.budget("tables 4-5", start.elapsed(), Duration::from_secs(30));
    Ok(())
}

type Rows = &'static [(usize, [&'static str; 2])];

const TABLE6: Rows = &[
    (2, ["8e-3", "3e-4"]),
    (4, ["2e-6", "4e-7"]),
    (5, ["-2e-7", "8e-8"]),
    (6, ["-3e-8", "3e-9"]),
    (8, ["2e-9", "-7e-10"]),
    (10, ["-6e-11", "7e-11"]),
];
const TABLE7: Rows = &[
    (2, ["9e-3", "2e-4"]),
    (4, ["5e-7", "5e-8"]),
    (5, ["-2e-8", "4e-9"]),
    (6, ["-1e-9", "5e-11"]),
    (8, ["1e-11", "-3e-12"]),
    (10, ["-1e-13", "6e-14"]),
];
const TABLE8: Rows = &[
    (2, ["1e-2", "3e-4"]),
    (4, ["3e-7", "2e-8"]),
    (5, ["-6e-9", "5e-10"]),
    (6, ["-2e-10", "3e-12"]),
    (8, ["7e-13", "-8e-14"]),
];
const TABLE9: Rows = &[
    (2, ["2e-2", "4e-4"]),
    (4, ["2e-7", "8e-9"]),
    (5, ["-3e-9", "2e-10"]),
    (6, ["-6e-11", "4e-13"]),
];
const TABLE10: Rows = &[(2, ["5e-2", "7e-4"]), (3, ["1e-4", "2e-6"]), (4, ["2e-7", "6e-9"])];

fn tables6_10(o: &mut Outcome) -> Result<()> {
    let large = std::env::var("HAM_ACCEPT_LARGE_D").is_ok_and(|v| v == "1");
    let cases: [(usize, &str, Rows, u64); 5] = [
        (4, "table6", TABLE6, 120),
        (6, "table7", TABLE7, 1800),
        (8, "table8", TABLE8, 3600),
        (10, "table9", TABLE9, 3600),
        (12, "table10", TABLE10, 3600),
    ];
    for (d, label, rows, limit) in cases {
        if d > 6 && !large {
            o.notes.push(format!("d={d} skipped (HAM_ACCEPT_LARGE_D=1 to run)"));
            continue;
        }
        let start = Instant::now();
        let pr = nd(d)?;
        let top = rows.iter().map(|r| r.0).max().unwrap_or(0);
        let opts = EngineOptions { term_cap: usize::MAX };
        let s = run_series_with(&*pr, top, &Rational::from(-1), &opts)?;
        for (m, printed) in rows {
            let errs = observable_errors(&*pr, &partial_sum(&s, *m)?, 128)?;
            for (col, want) in ["y0", "z0_1"].iter().zip(printed) {
                let got = errs.get(col).expect("table column");
                o.check(
                    format!("{label} m={m} {col}"),
                    matches_printed(&got, want),
                    format!("{} vs printed {want}", one_figure(&got)),
                );
            }
        }
        let took = start.elapsed();
        o.notes.push(format!("d={d} order {top}: {:.1} s", took.as_secs_f64()));
        o.budget(&format!("d={d}"), took, Duration::from_secs(limit));
    }
    Ok(())
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn convergence_window(o: &mut Outcome) -> Result<()> {
    let ex1 = problem("bsde1d")?;
    let spec = NormSpec::for_problem(&*ex1, PREC).with_quadrature(QuadratureSpec::Symbolic);
    let grid = parse_grid("-1.6:-0.2:0.05")?;
    let orders = [5, 10, 15];
    let sweep = sweep_c0(&*ex1, &orders, &grid, &spec, &EngineOptions::default())?;
    let lo = Rational::from((-7, 5));
    let hi = Rational::from((-2, 5));
    for (j, c0) in grid.iter().enumerate() {
        if *c0 < lo || *c0 > hi {
            continue;
        }
        let v: Vec<f64> = (0..orders.len())
            .map(|i| sweep.value(i, j).map_or(f64::NAN, Float::to_f64))
            .collect();
        o.check(format!("example 1 c0={c0}"), strictly_decreasing(&v), format!("{v:?}"));
    }
    let (lo, hi) = (Rational::from((-6, 5)), Rational::from((-4, 5)));
    for (i, m) in orders.iter().enumerate() {
        let best = sweep.argmin(i).map(|j| grid[j].clone());
        let inside = best
            .as_ref()
            .is_some_and(|c| *c >= lo && *c <= hi);
        o.check(format!("example 1 order {m} argmin"), inside, format!("{best:?}"));
        if let Some(b) = best {
            o.notes.push(format!("order {m} argmin {b}"));
        }
    }

    let ex6 = nd(4)?;
    let spec = NormSpec::for_problem(&*ex6, 53)
        .with_quadrature(QuadratureSpec::QuasiRandom { samples: 4096, seed: 42 });
    let grid = parse_grid("-1.1:-0.6:0.05")?;
    let orders = [2, 3, 4, 5];
    let sweep = sweep_c0(&*ex6, &orders, &grid, &spec, &EngineOptions::default())?;
    for (j, c0) in grid.iter().enumerate() {
        let v: Vec<f64> = (0..orders.len())
            .map(|i| sweep.value(i, j).map_or(f64::NAN, Float::to_f64))
            .collect();
        o.check(format!("example 6 d=4 c0={c0}"), strictly_decreasing(&v), format!("{v:?}"));
    }
    Ok(())
}

fn sample_exprs(pr: &dyn Problem) -> Result<Vec<Expr>> {
    let s = series(pr, 3)?;
    let mut out = partial_sum(&s, 3)?;
    out.extend(s.components[0].iter().cloned());
    Ok(out)
}

fn properties(o: &mut Outcome) -> Result<()> {
    let tiny = Float::with_val(64, Float::i_exp(1, -100));
    let mut all: Vec<Box<dyn Problem>> = Vec::new();
    for id in ["bsde1d", "bsde2d", "bsde2w", "fbsde", "fbsde2nd"] {
        all.push(problem(id)?);
    }
    all.push(nd(4)?);

    for pr in &all {
        let q = match pr.vars().len() {
            1 => QuadratureSpec::TensorGauss { nodes: 64 },
            2 => QuadratureSpec::TensorGauss { nodes: 24 },
            _ => QuadratureSpec::QuasiRandom { samples: 512, seed: 42 },
        };
        let r = exact_residual_norm(&**pr, &NormSpec::for_problem(&**pr, PREC).with_quadrature(q))?;
        o.check(format!("{} exact residual", pr.id()), r < tiny, format!("{r:.3e}"));

        let top = if pr.vars().len() > 3 { 6 } else { 10 };
        let s = series(&**pr, top)?;
        for (c, comp) in s.components.iter().enumerate() {
            for (m, phi) in comp.iter().enumerate() {
                o.check(
                    format!("{} boundary m={m} [{c}]", pr.id()),
                    phi.substitute_t(&pr.terminal_time()) == pr.boundary_rule(c, m),
                    "terminal value differs",
                );
            }
        }

        let text = serde_json::to_string(&s)?;
        let back: SeriesSolution = serde_json::from_str(&text)?;
        o.check(format!("{} series json", pr.id()), back.components == s.components, "series changed");
        let spec = NormSpec::for_problem(&**pr, PREC);
        let back: NormSpec = serde_json::from_str(&serde_json::to_string(&spec)?)?;
        o.check(format!("{} norm spec json", pr.id()), back == spec, "norm spec changed");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let tol = |scale: &Float| Float::with_val(PREC, Float::i_exp(1, -100)) * Float::with_val(PREC, scale.clone().abs() + 1u32);
    for pr in &all[..5] {
        let exprs = sample_exprs(&**pr)?;
        let d = pr.vars().len();
        for (k, a) in exprs.iter().enumerate() {
            let b = &exprs[(k + 1) % exprs.len()];
            let ab = a.mul(b)?;
            let grads: Vec<Expr> = (0..d).map(|i| a.differentiate(Wrt::Var(i))).collect();
            let mut worst_mul = true;
            let mut worst_fd = true;
            for _ in 0..50 {
                let t = Float::with_val(PREC, rng.gen_range(0.0..1.0));
                let x: Vec<Float> = (0..d).map(|_| Float::with_val(PREC, rng.gen_range(-1.0..1.0))).collect();
                let prod = Float::with_val(PREC, a.evaluate_at(&t, &x, PREC) * b.evaluate_at(&t, &x, PREC));
                let diff = Float::with_val(PREC, ab.evaluate_at(&t, &x, PREC) - &prod).abs();
                worst_mul &= diff < tol(&prod);

                let i = rng.gen_range(0..d);
                let h = Float::with_val(PREC, Float::i_exp(1, -30));
                let f = |k: i32| {
                    let mut y = x.clone();
                    y[i] += Float::with_val(PREC, &h * k);
                    a.evaluate_at(&t, &y, PREC)
                };
                let num = Float::with_val(PREC, f(-2) - f(2)) + Float::with_val(PREC, f(1) - f(-1)) * 8u32;
                let fd = num / Float::with_val(PREC, &h * 12u32);
                let exact = grads[i].evaluate_at(&t, &x, PREC);
                let err = Float::with_val(PREC, fd - &exact).abs();
                worst_fd &= err < Float::with_val(PREC, Float::i_exp(1, -60)) * Float::with_val(PREC, exact.abs() + 1u32);
            }
            o.check(format!("{} multiply oracle #{k}", pr.id()), worst_mul, "product differs at a sample point");
            o.check(format!("{} derivative oracle #{k}", pr.id()), worst_fd, "finite difference differs");
            let back: Expr = serde_json::from_str(&serde_json::to_string(a)?)?;
            o.check(format!("{} expr json #{k}", pr.id()), back == *a, "expression changed");
        }
    }
    Ok(())
}

fn excluded(o: &mut Outcome) -> Result<()> {
    for d in 3..=12u32 {
        let (th, ts) = cpu_time_models(d)?;
        let want = ((-3.2 + 0.95 * d as f64).exp(), (-7.6 + 2.9 * d as f64).exp());
        o.check(format!("cpu model d={d}"), (th, ts) == want, format!("{th} {ts}"));
    }
    o.check("cpu model d=2", cpu_time_models(2).is_err(), "accepted d < 3");
    let (th, ts) = cpu_time_models(6)?;
    o.notes.push(format!("d=6: t_H {th:.2} s, t_S {ts:.0} s"));

    // Order-of-magnitude comparison only; the printed tables do not say
    // which domain they integrate over.
    for (id, printed) in [("bsde2d", [8e-6, 2e-41]), ("bsde2w", [4e-6, 1e-41])] {
        let pr = problem(id)?;
        let s = series(&*pr, 20)?;
        let spec = NormSpec::for_problem(&*pr, PREC).with_quadrature(QuadratureSpec::TensorGauss { nodes: 24 });
        for (m, p) in [4, 20].into_iter().zip(printed) {
            let e = error_norm_exact(&*pr, &partial_sum(&s, m)?, &spec)?.to_f64();
            o.notes.push(format!("{id} m={m} E~ {e:.1e} (printed {p:.0e})"));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    type Criterion = fn(&mut Outcome) -> Result<()>;
    let criteria: [(&str, Criterion); 9] = [
        ("1 symbolic fixtures", fixtures),
        ("2 appendix identity", appendix),
        ("3 table 1", table1),
        ("4 tables 2-3 observables", tables2_3),
        ("5 tables 4-5 exact zeros", tables4_5),
        ("6 tables 6-10 observables", tables6_10),
        ("7 convergence window", convergence_window),
        ("8 property suite", properties),
        ("9 cpu-time models", excluded),
    ];
    let mut unexplained = Vec::new();
    for (name, f) in criteria {
        let start = Instant::now();
        let mut o = Outcome::default();
        o.try_run(name, f);
        let secs = start.elapsed().as_secs_f64();
        let (known, other): (Vec<_>, Vec<_>) = o
            .failures
            .iter()
            .partition(|f| DOCUMENTED.iter().any(|d| f.starts_with(&format!("{d}:"))));
        let status = if o.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("{status} criterion {name}: {} checks, {secs:.1} s", o.checks);
        for n in &o.notes {
            println!("    {n}");
        }
        for f in &known {
            println!("    documented: {f}");
        }
        for f in &other {
            println!("    failed: {f}");
        }
        unexplained.extend(other.into_iter().map(|f| format!("[{name}] {f}")));
    }
    if unexplained.is_empty() {
        println!("acceptance: no unexplained failures");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} unexplained failures", unexplained.len());
        ExitCode::FAILURE
    }
}

//! The homotopy recursion
//! `phi_m = chi_m phi_{m-1} + c0 * int_anchor^t delta_{m-1} dz + A_m(x)`,
//! where the t-free correction `A_m` enforces the problem's boundary rule at `t = T`.

use std::sync::{Arc, Mutex};
use std::time::Instant;

use rug::ops::Pow;
use rug::Rational;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::{Expr, LinearArg, Phase, TrigKind, VarSet};
use crate::error::{Error, Result};
use crate::problems::Problem;

pub const DEFAULT_TERM_CAP: usize = 200_000;

/// `0` for `m <= 1`, `1` otherwise.
pub fn chi(m: usize) -> Rational {
    Rational::from(u32::from(m > 1))
}

fn need(len: usize, n: usize, what: &'static str) -> Result<()> {
    if n < len {
        Ok(())
    } else {
        Err(Error::Index { what, index: n, len })
    }
}

/// `sum_{i=0}^{n} a_i b_{n-i}`.
pub fn cauchy2(a: &[Expr], b: &[Expr], n: usize) -> Result<Expr> {
    need(a.len(), n, "cauchy2 history")?;
    need(b.len(), n, "cauchy2 history")?;
    let mut acc = Expr::zero(a[0].vars());
    for i in 0..=n {
        acc = acc.add(&a[i].mul(&b[n - i])?)?;
    }
    Ok(acc)
}

/// `sum_{i+j+k=n} a_i b_j c_k`.
pub fn cauchy3(a: &[Expr], b: &[Expr], c: &[Expr], n: usize) -> Result<Expr> {
    need(a.len(), n, "cauchy3 history")?;
    let mut acc = Expr::zero(a[0].vars());
    for (i, ai) in a[..=n].iter().enumerate() {
        acc = acc.add(&ai.mul(&cauchy2(b, c, n - i)?)?)?;
    }
    Ok(acc)
}

/// Coefficients `0..=n` of the q-series product of all `factors`.
pub fn cauchy_chain(factors: &[&[Expr]], n: usize) -> Result<Vec<Expr>> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| Error::Config("cauchy_chain needs at least one factor".into()))?;
    need(first.len(), n, "cauchy_chain history")?;
    let mut acc: Vec<Expr> = first[..=n].to_vec();
    for f in rest {
        acc = (0..=n).map(|k| cauchy2(&acc, f, k)).collect::<Result<_>>()?;
    }
    Ok(acc)
}

/// The `j`-th q-Taylor coefficient of `kind(freq * t * q + base)`:
/// `(freq t)^j / j! * kind(base + j pi/2)`.
pub fn embedded_trig_coefficient(
    vars: &Arc<VarSet>,
    kind: TrigKind,
    freq: u32,
    base: &LinearArg,
    j: u32,
) -> Expr {
    let shifted = base.with_phase_added(&Phase::new(0, Rational::from((j, 2u32))));
    let trig = Expr::trig(vars, kind, shifted);
    let mut scale = Rational::from(freq).pow(j);
    scale *= crate::algebra::rational::inv_factorial(j);
    trig.mul(&Expr::t(vars).pow(j))
        .expect("same variables")
        .scale(&scale)
}

/// The coefficients `phi_0..phi_k` computed so far, per component, plus a memo
/// of derived q-series (products, derivatives) keyed by a tag and an order.
/// Entries never go stale because the history only grows.
pub struct History {
    components: Vec<Vec<Expr>>,
    memo: Mutex<FxHashMap<(&'static str, usize), Arc<Expr>>>,
}

impl History {
    pub fn new(initial: Vec<Expr>) -> Self {
        Self {
            components: initial.into_iter().map(|e| vec![e]).collect(),
            memo: Mutex::new(FxHashMap::default()),
        }
    }

    pub fn component(&self, c: usize) -> Result<&[Expr]> {
        self.components
            .get(c)
            .map(Vec::as_slice)
            .ok_or(Error::Index {
                what: "component",
                index: c,
                len: self.components.len(),
            })
    }

    /// `phi_k` of component `c`.
    pub fn get(&self, c: usize, k: usize) -> Result<&Expr> {
        let comp = self.component(c)?;
        comp.get(k).ok_or(Error::Index {
            what: "history order",
            index: k,
            len: comp.len(),
        })
    }

    /// Highest order present.
    pub fn order(&self) -> usize {
        self.components[0].len() - 1
    }

    /// Memoised value of the series `tag` at order `k`.
    pub fn memo(&self, tag: &'static str, k: usize, f: impl FnOnce() -> Result<Expr>) -> Result<Arc<Expr>> {
        if let Some(v) = self.memo.lock().expect("memo lock").get(&(tag, k)) {
            return Ok(v.clone());
        }
        let v = Arc::new(f()?);
        self.memo.lock().expect("memo lock").insert((tag, k), v.clone());
        Ok(v)
    }

    fn push(&mut self, order: Vec<Expr>) {
        for (c, e) in order.into_iter().enumerate() {
            self.components[c].push(e);
        }
    }

    pub fn into_components(self) -> Vec<Vec<Expr>> {
        self.components
    }
}

/// Computes `phi_m` for every component from a history holding orders `0..m`.
pub fn deformation_step(problem: &dyn Problem, history: &History, c0: &Rational, m: usize) -> Result<Vec<Expr>> {
    if m == 0 || history.order() + 1 != m {
        return Err(Error::Index {
            what: "deformation order",
            index: m,
            len: history.order() + 1,
        });
    }
    let anchor = problem.anchor();
    let terminal = problem.terminal_time();
    let chi_m = chi(m);
    let vars = problem.vars().clone();
    let mut out = Vec::with_capacity(problem.components());
    for c in 0..problem.components() {
        let delta = problem.delta(c, m - 1, history)?;
        let integral = delta.integrate_t(&anchor);
        let prev = history.get(c, m - 1)?;
        let candidate = Expr::linear_combine(&vars, &[(chi_m.clone(), prev), (c0.clone(), &integral)])?;
        let target = problem.boundary_rule(c, m);
        let correction = target.sub(&candidate.substitute_t(&terminal))?;
        let phi = candidate.add(&correction)?;
        if phi.substitute_t(&terminal) != target {
            return Err(Error::Boundary { order: m, component: c });
        }
        out.push(phi);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct EngineOptions {
    pub term_cap: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            term_cap: DEFAULT_TERM_CAP,
        }
    }
}

/// `phi_0..phi_M` for every component of one problem at one `c0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesSolution {
    pub problem: String,
    #[serde(serialize_with = "ser_rational", deserialize_with = "de_rational")]
    pub c0: Rational,
    /// `components[c][m]` is `phi_m` of component `c`.
    pub components: Vec<Vec<Expr>>,
    /// Cumulative wall time after computing each order (seconds).
    #[serde(skip)]
    pub cumulative_seconds: Vec<f64>,
}

fn ser_rational<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn de_rational<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
    let s = String::deserialize(d)?;
    crate::algebra::rational::parse_rational(&s).map_err(serde::de::Error::custom)
}

impl SeriesSolution {
    pub fn order(&self) -> usize {
        self.components[0].len() - 1
    }

    /// `phi_0..phi_M` of the first component.
    pub fn phis(&self) -> &[Expr] {
        &self.components[0]
    }
}

pub fn run_series(problem: &dyn Problem, order: usize, c0: &Rational) -> Result<SeriesSolution> {
    run_series_with(problem, order, c0, &EngineOptions::default())
}

pub fn run_series_with(
    problem: &dyn Problem,
    order: usize,
    c0: &Rational,
    opts: &EngineOptions,
) -> Result<SeriesSolution> {
    let start = Instant::now();
    let initial = problem.initial_guess();
    for (c, phi0) in initial.iter().enumerate() {
        if phi0.substitute_t(&problem.terminal_time()) != problem.boundary_rule(c, 0) {
            return Err(Error::Boundary { order: 0, component: c });
        }
    }
    let mut history = History::new(initial);
    let mut cumulative = vec![start.elapsed().as_secs_f64()];
    for m in 1..=order {
        let step = deformation_step(problem, &history, c0, m)?;
        for phi in &step {
            if phi.len() > opts.term_cap {
                return Err(Error::TermCap {
                    order: m,
                    terms: phi.len(),
                    cap: opts.term_cap,
                });
            }
        }
        history.push(step);
        cumulative.push(start.elapsed().as_secs_f64());
    }
    Ok(SeriesSolution {
        problem: problem.id(),
        c0: c0.clone(),
        components: history.into_components(),
        cumulative_seconds: cumulative,
    })
}

/// `phi~_M = sum_{m<=M} phi_m` per component.
pub fn partial_sum(s: &SeriesSolution, m: usize) -> Result<Vec<Expr>> {
    if m > s.order() {
        return Err(Error::Index {
            what: "partial sum order",
            index: m,
            len: s.order() + 1,
        });
    }
    s.components
        .iter()
        .map(|phis| {
            let vars = phis[0].vars().clone();
            let pairs: Vec<(Rational, &Expr)> = phis[..=m].iter().map(|p| (Rational::from(1), p)).collect();
            Expr::linear_combine(&vars, &pairs)
        })
        .collect()
}

/// Partial sums for several orders, built incrementally.
pub fn partial_sums(s: &SeriesSolution, orders: &[usize]) -> Result<Vec<Vec<Expr>>> {
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    if let Some(&max) = sorted.last() {
        if max > s.order() {
            return Err(Error::Index {
                what: "partial sum order",
                index: max,
                len: s.order() + 1,
            });
        }
    }
    let mut running: Vec<Expr> = s.components.iter().map(|p| p[0].clone()).collect();
    let mut at = 0;
    let mut by_order = std::collections::BTreeMap::new();
    for &m in &sorted {
        while at < m {
            at += 1;
            for (c, r) in running.iter_mut().enumerate() {
                *r = r.add(&s.components[c][at])?;
            }
        }
        by_order.insert(m, running.clone());
    }
    Ok(orders.iter().map(|m| by_order[m].clone()).collect())
}

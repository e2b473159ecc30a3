use rug::Float;
use serde::{Serialize, Serializer};

use super::{ObsKind, Probe, Problem};
use crate::algebra::{Evaluator, Expr};
use crate::error::{Error, Result};

/// Initial values `y0`, `z0`, `Gamma0`, `A0` (or errors in them). Coupled
/// problems carry one `y0` per component; `z0` has one entry per Brownian
/// direction or per component.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ObservableSet {
    pub y0: Vec<Float>,
    pub z0: Vec<Float>,
    pub gamma0: Option<Float>,
    pub a0: Option<Float>,
}

impl ObservableSet {
    /// `(column name, value)` pairs in a fixed order: `y0`, `z0`, `gamma0`, `a0`.
    /// Vector entries are suffixed `_1`, `_2`, ... when there is more than one.
    pub fn named(&self) -> Vec<(String, Float)> {
        let mut out = Vec::new();
        let mut push_vec = |name: &str, v: &[Float]| {
            if v.len() == 1 {
                out.push((name.to_string(), v[0].clone()));
            } else {
                for (i, x) in v.iter().enumerate() {
                    out.push((format!("{name}_{}", i + 1), x.clone()));
                }
            }
        };
        push_vec("y0", &self.y0);
        push_vec("z0", &self.z0);
        if let Some(g) = &self.gamma0 {
            out.push(("gamma0".into(), g.clone()));
        }
        if let Some(a) = &self.a0 {
            out.push(("a0".into(), a.clone()));
        }
        out
    }

    pub fn get(&self, name: &str) -> Option<Float> {
        self.named().into_iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    fn insert(&mut self, kind: ObsKind, index: usize, value: Float) {
        let slot = match kind {
            ObsKind::Y => &mut self.y0,
            ObsKind::Z => &mut self.z0,
            ObsKind::Gamma => {
                self.gamma0 = Some(value);
                return;
            }
            ObsKind::A => {
                self.a0 = Some(value);
                return;
            }
        };
        if slot.len() <= index {
            slot.resize(index + 1, Float::new(value.prec()));
        }
        slot[index] = value;
    }
}

impl Serialize for ObservableSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let named = self.named();
        let mut m = s.serialize_map(Some(named.len()))?;
        for (k, v) in &named {
            m.serialize_entry(k, &format_float(v))?;
        }
        m.end()
    }
}

/// Decimal rendering with enough digits to round-trip the value's precision.
pub fn format_float(v: &Float) -> String {
    let digits = (v.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
    v.to_string_radix(10, Some(digits))
}

fn evaluate_probes(problem: &dyn Problem, probes: &[(ObsKind, usize, &Expr, Option<&Float>)], prec: u32) -> ObservableSet {
    let point = problem.evaluation_point(prec);
    let exprs: Vec<&Expr> = probes.iter().map(|p| p.2).collect();
    let values = Evaluator::<Float>::new(&exprs, prec).eval(&Float::new(prec), &point);
    let mut set = ObservableSet::default();
    for (p, v) in probes.iter().zip(values) {
        let v = match p.3 {
            Some(w) => v * w,
            None => v,
        };
        set.insert(p.0, p.1, v);
    }
    set
}

fn as_rows(probes: &[Probe]) -> Vec<(ObsKind, usize, &Expr, Option<&Float>)> {
    probes.iter().map(|p| (p.kind, p.index, &p.expr, p.weight.as_ref())).collect()
}

/// Observables of an approximation (the partial sum, one entry per component),
/// evaluated at the problem's evaluation point with `prec` bits.
pub fn extract_observables(problem: &dyn Problem, approx: &[Expr], prec: u32) -> Result<ObservableSet> {
    let probes = problem.observable_probes(approx, prec)?;
    Ok(evaluate_probes(problem, &as_rows(&probes), prec))
}

/// Closed-form observables at the evaluation point.
pub fn exact_initial_values(problem: &dyn Problem, prec: u32) -> Result<ObservableSet> {
    let probes = problem.exact_probes(prec)?;
    Ok(evaluate_probes(problem, &as_rows(&probes), prec))
}

/// `approx - exact` for every observable. The difference is formed
/// symbolically before evaluation, so observables that agree as expressions
/// give an exact zero.
pub fn observable_errors(problem: &dyn Problem, approx: &[Expr], prec: u32) -> Result<ObservableSet> {
    let got = problem.observable_probes(approx, prec)?;
    let want = problem.exact_probes(prec)?;
    let mut diffs = Vec::with_capacity(got.len());
    for g in &got {
        let w = want
            .iter()
            .find(|w| w.kind == g.kind && w.index == g.index)
            .ok_or_else(|| Error::Unsupported(format!("no exact value for {:?} {}", g.kind, g.index)))?;
        diffs.push((g, g.expr.sub(&w.expr)?));
    }
    let rows: Vec<_> = diffs
        .iter()
        .map(|(g, e)| (g.kind, g.index, e, g.weight.as_ref()))
        .collect();
    Ok(evaluate_probes(problem, &rows, prec))
}

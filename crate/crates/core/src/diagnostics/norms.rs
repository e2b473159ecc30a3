//! The global error against the exact solution and the operator residual norm.

use rug::Float;
use serde::{Deserialize, Serialize};

use super::domain::Domain;
use super::quadrature::{Integrand, QuadratureSpec};
use crate::algebra::{Evaluator, Expr, Wrt};
use crate::error::{Error, Result};
use crate::problems::{Jet, Problem};

/// Where and how a norm is integrated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSpec {
    pub domain: Domain,
    pub quadrature: QuadratureSpec,
    pub prec: u32,
}

impl NormSpec {
    /// The problem's default domain and quadrature at `prec` bits.
    pub fn for_problem(problem: &dyn Problem, prec: u32) -> Self {
        Self {
            domain: problem.default_domain(),
            quadrature: problem.default_quadrature(),
            prec,
        }
    }

    pub fn with_quadrature(mut self, q: QuadratureSpec) -> Self {
        self.quadrature = q;
        self
    }
}

/// `[u, u_t, u_x.., u_xx..]` for each component, concatenated.
fn jet_exprs(fields: &[Expr]) -> Vec<Expr> {
    let mut out = Vec::new();
    for u in fields {
        let d = u.vars().len();
        out.push(u.clone());
        out.push(u.differentiate(Wrt::T));
        let grads: Vec<Expr> = (0..d).map(|i| u.differentiate(Wrt::Var(i))).collect();
        out.extend(grads.iter().cloned());
        for (i, g) in grads.iter().enumerate() {
            out.push(g.differentiate(Wrt::Var(i)));
        }
    }
    out
}

fn unpack(values: Vec<Float>, ncomp: usize, d: usize) -> Vec<Jet> {
    let mut it = values.into_iter();
    (0..ncomp)
        .map(|_| {
            let u = it.next().expect("jet value");
            let u_t = it.next().expect("jet value");
            let u_x = it.by_ref().take(d).collect();
            let u_xx = it.by_ref().take(d).collect();
            Jet { u, u_t, u_x, u_xx }
        })
        .collect()
}

fn to_float(v: &[f64]) -> Vec<Float> {
    v.iter().map(|x| Float::with_val(53, *x)).collect()
}

/// Sum over components of `N[u]^2`, with jets from expressions or from the
/// problem's closed form.
struct ResidualIntegrand<'a> {
    problem: &'a dyn Problem,
    fields: Option<Vec<Expr>>,
    ev64: Option<Evaluator<f64>>,
    ev: Option<Evaluator<Float>>,
}

impl<'a> ResidualIntegrand<'a> {
    fn new(problem: &'a dyn Problem, fields: Option<Vec<Expr>>, prec: u32) -> Self {
        let jets = fields.as_deref().map(jet_exprs);
        let refs: Option<Vec<&Expr>> = jets.as_ref().map(|j| j.iter().collect());
        Self {
            problem,
            ev64: refs.as_ref().map(|r| Evaluator::new(r, ())),
            ev: refs.as_ref().map(|r| Evaluator::new(r, prec)),
            fields,
        }
    }

    fn jets(&self, t: &Float, x: &[Float]) -> Vec<Jet> {
        match &self.ev {
            Some(ev) => unpack(ev.eval(t, x), self.problem.components(), x.len()),
            None => self.problem.exact_jets(t, x).expect("closed-form jets"),
        }
    }

    fn sum_sq(&self, t: &Float, x: &[Float], jets: &[Jet]) -> Float {
        let mut s = Float::new(t.prec());
        for c in 0..self.problem.components() {
            s += self.problem.residual_at(c, t, x, jets).square();
        }
        s
    }
}

impl Integrand for ResidualIntegrand<'_> {
    fn symbolic(&self) -> Option<Result<Expr>> {
        let fields = self.fields.as_ref()?;
        let rs = self.problem.residual_exprs(fields)?;
        Some(rs.and_then(|rs| {
            rs.iter()
                .try_fold(Expr::zero(self.problem.vars()), |acc, r| acc.add(&r.mul(r)?))
        }))
    }

    fn eval_f64(&self, t: f64, x: &[f64]) -> f64 {
        let (tf, xf) = (Float::with_val(53, t), to_float(x));
        let jets = match &self.ev64 {
            Some(ev) => unpack(to_float(&ev.eval(&t, x)), self.problem.components(), x.len()),
            None => self.jets(&tf, &xf),
        };
        self.sum_sq(&tf, &xf, &jets).to_f64()
    }

    fn eval_float(&self, t: &Float, x: &[Float]) -> Float {
        let jets = self.jets(t, x);
        self.sum_sq(t, x, &jets)
    }
}

/// Sum over components of `(approx - exact)^2`.
struct ErrorIntegrand<'a> {
    problem: &'a dyn Problem,
    /// `approx - exact` when the exact solution is an expression, else `approx`.
    fields: Vec<Expr>,
    symbolic_diff: bool,
    ev64: Evaluator<f64>,
    ev: Evaluator<Float>,
}

impl<'a> ErrorIntegrand<'a> {
    fn new(problem: &'a dyn Problem, approx: &[Expr], prec: u32) -> Result<Self> {
        let (fields, symbolic_diff) = match problem.exact_exprs() {
            Some(exact) => (
                approx.iter().zip(&exact).map(|(a, e)| a.sub(e)).collect::<Result<Vec<_>>>()?,
                true,
            ),
            None if problem.has_exact_solution() => (approx.to_vec(), false),
            None => {
                return Err(Error::Unsupported(format!("{} has no exact solution", problem.id())));
            }
        };
        let refs: Vec<&Expr> = fields.iter().collect();
        Ok(Self {
            problem,
            ev64: Evaluator::new(&refs, ()),
            ev: Evaluator::new(&refs, prec),
            fields,
            symbolic_diff,
        })
    }

    fn sum_sq(&self, t: &Float, x: &[Float], mut vals: Vec<Float>) -> Float {
        if !self.symbolic_diff {
            let exact = self.problem.exact_jets(t, x).expect("closed-form jets");
            for (v, j) in vals.iter_mut().zip(exact) {
                *v -= j.u;
            }
        }
        vals.into_iter().fold(Float::new(t.prec()), |acc, v| acc + v.square())
    }
}

impl Integrand for ErrorIntegrand<'_> {
    fn symbolic(&self) -> Option<Result<Expr>> {
        if !self.symbolic_diff {
            return None;
        }
        Some(
            self.fields
                .iter()
                .try_fold(Expr::zero(self.problem.vars()), |acc, d| acc.add(&d.mul(d)?)),
        )
    }

    fn eval_f64(&self, t: f64, x: &[f64]) -> f64 {
        let vals = to_float(&self.ev64.eval(&t, x));
        self.sum_sq(&Float::with_val(53, t), &to_float(x), vals).to_f64()
    }

    fn eval_float(&self, t: &Float, x: &[Float]) -> Float {
        self.sum_sq(t, x, self.ev.eval(t, x))
    }
}

fn integrate(problem: &dyn Problem, f: &dyn Integrand, spec: &NormSpec) -> Result<Float> {
    if spec.domain.x.len() != problem.vars().len() {
        return Err(Error::Domain(format!(
            "domain has {} spatial intervals, {} needs {}",
            spec.domain.x.len(),
            problem.id(),
            problem.vars().len()
        )));
    }
    let rule = spec.quadrature.build()?;
    let raw = rule.integrate(f, &spec.domain, spec.prec)?;
    Ok(if spec.domain.normalize {
        raw / spec.domain.spatial_volume(spec.prec)
    } else {
        raw
    })
}

/// Integral of the squared difference between `approx` (one expression per
/// component) and the exact solution, summed over components.
pub fn error_norm_exact(problem: &dyn Problem, approx: &[Expr], spec: &NormSpec) -> Result<Float> {
    let f = ErrorIntegrand::new(problem, approx, spec.prec)?;
    integrate(problem, &f, spec)
}

/// Integral of the squared operator residual of `approx`, summed over components.
pub fn residual_norm_operator(problem: &dyn Problem, approx: &[Expr], spec: &NormSpec) -> Result<Float> {
    let f = ResidualIntegrand::new(problem, Some(approx.to_vec()), spec.prec);
    integrate(problem, &f, spec)
}

/// The operator residual norm of the exact solution itself, which should vanish.
pub fn exact_residual_norm(problem: &dyn Problem, spec: &NormSpec) -> Result<Float> {
    let f = match problem.exact_exprs() {
        Some(exact) => ResidualIntegrand::new(problem, Some(exact), spec.prec),
        None if problem.has_exact_solution() => ResidualIntegrand::new(problem, None, spec.prec),
        None => return Err(Error::Unsupported(format!("{} has no exact solution", problem.id()))),
    };
    integrate(problem, &f, spec)
}

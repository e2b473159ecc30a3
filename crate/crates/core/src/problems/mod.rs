//! The problem contract and the six built-in problems.

mod bsde1d;
mod bsde2d;
mod bsde2w;
mod fbsde;
mod fbsde2nd;
mod fbsde_nd;
mod observables;

use std::collections::BTreeMap;
use std::sync::Arc;

use rug::{Float, Rational};

pub use bsde1d::Bsde1d;
pub use bsde2d::Bsde2d;
pub use bsde2w::Bsde2w;
pub use fbsde::Fbsde;
pub use fbsde2nd::Fbsde2nd;
pub use fbsde_nd::FbsdeNd;
pub use observables::{exact_initial_values, extract_observables, observable_errors, ObservableSet};

use crate::algebra::{parse_expr, Expr, LinearArg, Phase, TrigKind, VarSet};
use crate::diagnostics::{Domain, QuadratureSpec};
use crate::engine::{embedded_trig_coefficient, History};
use crate::error::{Error, Result};

/// Pointwise derivatives of one component: value, time derivative, gradient
/// and the diagonal of the Hessian.
#[derive(Debug, Clone)]
pub struct Jet {
    pub u: Float,
    pub u_t: Float,
    pub u_x: Vec<Float>,
    pub u_xx: Vec<Float>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ObsKind {
    Y,
    Z,
    Gamma,
    A,
}

/// One initial-value observable as a t-free expression, read at the
/// evaluation point and multiplied by `weight` when present.
#[derive(Debug, Clone)]
pub struct Probe {
    pub kind: ObsKind,
    pub index: usize,
    pub expr: Expr,
    pub weight: Option<Float>,
}

impl Probe {
    pub fn new(kind: ObsKind, index: usize, expr: Expr) -> Self {
        Self {
            kind,
            index,
            expr,
            weight: None,
        }
    }

    pub fn weighted(mut self, w: Float) -> Self {
        self.weight = Some(w);
        self
    }
}

/// A terminal value problem solved by the homotopy recursion. Implementations
/// supply the initial guess, the order-n residual `delta_n`, the boundary
/// rule and the anchor; exact solutions and observables are optional extras.
pub trait Problem: Send + Sync {
    fn id(&self) -> String;
    fn vars(&self) -> &Arc<VarSet>;

    fn components(&self) -> usize {
        1
    }

    /// Dimension of the driving Brownian motion (length of `z0`).
    fn brownian_dim(&self) -> usize;

    fn terminal_time(&self) -> Rational {
        Rational::from(1)
    }

    /// Lower limit of the t-integral in the recursion.
    fn anchor(&self) -> Rational;

    fn initial_guess(&self) -> Vec<Expr>;

    fn delta(&self, component: usize, n: usize, history: &History) -> Result<Expr>;

    /// Required value of `phi_m` at `t = T` (`m = 0` gives the terminal condition).
    fn boundary_rule(&self, component: usize, m: usize) -> Expr;

    fn evaluation_point(&self, prec: u32) -> Vec<Float>;

    /// Observables of `approx` (one expression per component) at `t = 0`.
    fn observable_probes(&self, approx: &[Expr], prec: u32) -> Result<Vec<Probe>>;

    /// The same observables for the exact solution.
    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        Err(Error::Unsupported(format!("{} has no exact solution", self.id())))
    }

    /// Observable names printed as error columns, mirroring the published table.
    fn table_columns(&self) -> Vec<String>;

    fn default_domain(&self) -> Domain;

    fn default_quadrature(&self) -> QuadratureSpec {
        if self.vars().len() <= 3 {
            QuadratureSpec::TensorGauss { nodes: 64 }
        } else {
            QuadratureSpec::QuasiRandom {
                samples: 4096 * self.vars().len(),
                seed: crate::diagnostics::DEFAULT_SEED,
            }
        }
    }

    /// The original (q = 1) operator of component `component` at one point.
    fn residual_at(&self, component: usize, t: &Float, x: &[Float], jets: &[Jet]) -> Float;

    /// The operator applied symbolically, when it stays inside the term algebra.
    fn residual_exprs(&self, _approx: &[Expr]) -> Option<Result<Vec<Expr>>> {
        None
    }

    /// Exact solution jets at one point, for problems with a closed form
    /// outside the term algebra.
    fn exact_jets(&self, _t: &Float, _x: &[Float]) -> Option<Vec<Jet>> {
        None
    }

    /// Exact solution as expressions, when it lies in the term algebra.
    fn exact_exprs(&self) -> Option<Vec<Expr>> {
        None
    }

    fn has_exact_solution(&self) -> bool {
        self.exact_exprs().is_some()
    }
}

/// Constructor parameters shared by all problems.
#[derive(Debug, Clone, Default)]
pub struct ProblemParams {
    /// Spatial dimension, only meaningful for `fbsdeNd`.
    pub d: Option<usize>,
}

pub type ProblemFactory = fn(&ProblemParams) -> Result<Box<dyn Problem>>;

struct Entry {
    description: &'static str,
    factory: ProblemFactory,
}

/// Problems registered by id and built at run time from CLI or config input.
pub struct ProblemRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("bsde1d", "cubic BSDE in the theta variable", |_| Ok(Box::new(Bsde1d::new())));
        r.register("bsde2d", "coupled two-component BSDE", |_| Ok(Box::new(Bsde2d::new())));
        r.register("bsde2w", "linear BSDE driven by a two-dimensional Brownian motion", |_| {
            Ok(Box::new(Bsde2w::new()))
        });
        r.register("fbsde", "coupled nonlinear FBSDE", |_| Ok(Box::new(Fbsde::new())));
        r.register("fbsde2nd", "second-order FBSDE", |_| Ok(Box::new(Fbsde2nd::new())));
        r.register("fbsdeNd", "d-dimensional decoupled FBSDE", |p| {
            let d = p
                .d
                .ok_or_else(|| Error::Config("fbsdeNd needs a dimension d".into()))?;
            Ok(Box::new(FbsdeNd::new(d)?))
        });
        r
    }

    pub fn register(&mut self, id: &'static str, description: &'static str, factory: ProblemFactory) {
        self.entries.insert(id, Entry { description, factory });
    }

    pub fn ids(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    pub fn describe(&self) -> Vec<(&'static str, &'static str)> {
        self.entries.iter().map(|(k, e)| (*k, e.description)).collect()
    }

    /// Builds a problem. `fbsdeNd(4)` is accepted as shorthand for id `fbsdeNd` with `d = 4`.
    pub fn create(&self, id: &str, params: &ProblemParams) -> Result<Box<dyn Problem>> {
        let (name, params) = match id.split_once('(') {
            Some((name, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Config(format!("malformed problem id `{id}`")))?;
                let d: usize = inner
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("malformed dimension in `{id}`")))?;
                if params.d.is_some_and(|pd| pd != d) {
                    return Err(Error::Config(format!("`{id}` conflicts with d = {:?}", params.d)));
                }
                (name, ProblemParams { d: Some(d) })
            }
            None => (id, params.clone()),
        };
        let entry = self.entries.get(name).ok_or_else(|| {
            Error::Config(format!("unknown problem `{name}` (known: {})", self.ids().join(", ")))
        })?;
        (entry.factory)(&params)
    }
}

/// Parses a fixed expression over `vars`; inputs are compile-time constants.
pub(crate) fn fixed(src: &str, vars: &Arc<VarSet>) -> Expr {
    parse_expr(src, vars).unwrap_or_else(|e| panic!("built-in expression `{src}`: {e}"))
}

/// Adds `coeff * e` for each pair.
pub(crate) fn combine(vars: &Arc<VarSet>, parts: &[(Rational, &Expr)]) -> Result<Expr> {
    Expr::linear_combine(vars, parts)
}

pub(crate) fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

pub(crate) fn check_component(c: usize, n: usize) -> Result<()> {
    if c < n {
        Ok(())
    } else {
        Err(Error::Index {
            what: "component",
            index: c,
            len: n,
        })
    }
}

/// The `j`-th coefficient in `q` of `kind(freq * (t q + x))` for a single
/// spatial variable.
pub(crate) fn embedded(vars: &Arc<VarSet>, kind: TrigKind, freq: u32, j: usize) -> Expr {
    let base = LinearArg::new(vec![freq as i64], Phase::new(0, 0));
    embedded_trig_coefficient(vars, kind, freq, &base, j as u32)
}

/// `(sin s, cos s)` for `s = freq * (t + x)`.
pub(crate) fn sin_cos_of(freq: u32, t: &Float, x: &Float) -> (Float, Float) {
    let prec = t.prec().max(x.prec());
    let s = Float::with_val(prec, t + x) * freq;
    s.sin_cos(Float::new(prec))
}

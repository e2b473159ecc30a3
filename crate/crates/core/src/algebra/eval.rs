//! Numeric evaluation of expressions over a generic real type: `f64` for fast
//! sweeps and `rug::Float` for arbitrary precision.

use std::collections::BTreeMap;

use rug::float::Constant;
use rug::{Float, Rational};
use smallvec::SmallVec;

use super::expr::Expr;
use super::trig::{LinearArg, TrigKind};
use crate::error::{Error, Result};

pub trait Real: Clone + Send + Sync + 'static {
    /// Precision context: `()` for `f64`, bits for `Float`.
    type Ctx: Copy + Send + Sync;

    fn from_rational(r: &Rational, ctx: Self::Ctx) -> Self;
    fn from_f64(v: f64, ctx: Self::Ctx) -> Self;
    fn pi(ctx: Self::Ctx) -> Self;
    fn add_ref(&mut self, o: &Self);
    fn sub_ref(&mut self, o: &Self);
    fn mul_ref(&mut self, o: &Self);
    fn sin_cos(&self) -> (Self, Self);
    fn exp(&self) -> Self;
    fn to_f64(&self) -> f64;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_f64(0.0, ctx)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_f64(1.0, ctx)
    }
}

impl Real for f64 {
    type Ctx = ();

    fn from_rational(r: &Rational, _: ()) -> Self {
        r.to_f64()
    }
    fn from_f64(v: f64, _: ()) -> Self {
        v
    }
    fn pi(_: ()) -> Self {
        std::f64::consts::PI
    }
    fn add_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_ref(&mut self, o: &Self) {
        *self -= o;
    }
    fn mul_ref(&mut self, o: &Self) {
        *self *= o;
    }
    fn sin_cos(&self) -> (Self, Self) {
        f64::sin_cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Real for Float {
    type Ctx = u32;

    fn from_rational(r: &Rational, prec: u32) -> Self {
        Float::with_val(prec, r)
    }
    fn from_f64(v: f64, prec: u32) -> Self {
        Float::with_val(prec, v)
    }
    fn pi(prec: u32) -> Self {
        Float::with_val(prec, Constant::Pi)
    }
    fn add_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_ref(&mut self, o: &Self) {
        *self -= o;
    }
    fn mul_ref(&mut self, o: &Self) {
        *self *= o;
    }
    fn sin_cos(&self) -> (Self, Self) {
        self.clone().sin_cos(Float::new(self.prec()))
    }
    fn exp(&self) -> Self {
        self.clone().exp()
    }
    fn to_f64(&self) -> f64 {
        Float::to_f64(self)
    }
}

struct CompiledTerm<R> {
    coeff: R,
    t: u32,
    xs: SmallVec<[(u16, u16); 4]>,
    gs: SmallVec<[(u16, u16); 2]>,
    trig: Option<(u32, TrigKind)>,
}

/// Evaluates a fixed list of expressions at many points, sharing power tables,
/// Gauss factors and trig values across all terms of all expressions.
pub struct Evaluator<R: Real> {
    ctx: R::Ctx,
    nvars: usize,
    max_t: u32,
    max_pow: Vec<u32>,
    max_gauss: Vec<u32>,
    args: Vec<LinearArg>,
    arg_phase: Vec<R>,
    exprs: Vec<Vec<CompiledTerm<R>>>,
}

impl<R: Real> Evaluator<R> {
    pub fn new(exprs: &[&Expr], ctx: R::Ctx) -> Self {
        let nvars = exprs.first().map_or(0, |e| e.vars().len());
        let mut max_t = 0;
        let mut max_pow = vec![0u32; nvars];
        let mut max_gauss = vec![0u32; nvars];
        let mut args: Vec<LinearArg> = Vec::new();
        let mut arg_index = std::collections::HashMap::new();
        let mut compiled = Vec::with_capacity(exprs.len());
        for e in exprs {
            assert_eq!(e.vars().len(), nvars, "evaluator expressions share one variable set");
            let mut ct = Vec::with_capacity(e.len());
            for term in e.terms() {
                let k = &term.key;
                max_t = max_t.max(k.t_power());
                let mut xs = SmallVec::new();
                let mut gs = SmallVec::new();
                for v in 0..nvars {
                    let p = k.exponent(v);
                    if p > 0 {
                        max_pow[v] = max_pow[v].max(p);
                        xs.push((v as u16, p as u16));
                    }
                    let g = k.gauss(v);
                    if g > 0 {
                        max_gauss[v] = max_gauss[v].max(g);
                        gs.push((v as u16, g as u16));
                    }
                }
                let trig = k.trig().map(|a| {
                    let idx = *arg_index.entry(a.arg().clone()).or_insert_with(|| {
                        args.push(a.arg().clone());
                        args.len() - 1
                    });
                    (idx as u32, a.kind())
                });
                ct.push(CompiledTerm {
                    coeff: R::from_rational(&term.coeff, ctx),
                    t: k.t_power(),
                    xs,
                    gs,
                    trig,
                });
            }
            compiled.push(ct);
        }
        let pi = R::pi(ctx);
        let arg_phase = args
            .iter()
            .map(|a| {
                let mut v = R::from_rational(&a.phase().pi, ctx);
                v.mul_ref(&pi);
                v.add_ref(&R::from_rational(&a.phase().rational, ctx));
                v
            })
            .collect();
        Self {
            ctx,
            nvars,
            max_t,
            max_pow,
            max_gauss,
            args,
            arg_phase,
            exprs: compiled,
        }
    }

    pub fn len(&self) -> usize {
        self.exprs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exprs.is_empty()
    }

    fn powers(base: &R, max: u32, ctx: R::Ctx) -> Vec<R> {
        let mut out = Vec::with_capacity(max as usize + 1);
        out.push(R::one(ctx));
        for i in 1..=max as usize {
            let mut v = out[i - 1].clone();
            v.mul_ref(base);
            out.push(v);
        }
        out
    }

    /// Values of every expression at `(t, x)`.
    pub fn eval(&self, t: &R, x: &[R]) -> Vec<R> {
        assert_eq!(x.len(), self.nvars, "point dimension");
        let ctx = self.ctx;
        let tp = Self::powers(t, self.max_t, ctx);
        let xp: Vec<Vec<R>> = (0..self.nvars)
            .map(|v| Self::powers(&x[v], self.max_pow[v], ctx))
            .collect();
        let gp: Vec<Vec<R>> = (0..self.nvars)
            .map(|v| {
                if self.max_gauss[v] == 0 {
                    return vec![R::one(ctx)];
                }
                let mut e = x[v].clone();
                e.mul_ref(&x[v]);
                e.mul_ref(&R::from_f64(-2.0, ctx));
                Self::powers(&e.exp(), self.max_gauss[v], ctx)
            })
            .collect();
        let trig: Vec<(R, R)> = self
            .args
            .iter()
            .zip(&self.arg_phase)
            .map(|(a, phase)| {
                let mut v = phase.clone();
                for (i, &c) in a.coeffs().iter().enumerate() {
                    if c != 0 {
                        let mut term = R::from_f64(c as f64, ctx);
                        term.mul_ref(&x[i]);
                        v.add_ref(&term);
                    }
                }
                v.sin_cos()
            })
            .collect();
        self.exprs
            .iter()
            .map(|terms| {
                let mut sum = R::zero(ctx);
                for ct in terms {
                    let mut v = ct.coeff.clone();
                    if ct.t > 0 {
                        v.mul_ref(&tp[ct.t as usize]);
                    }
                    for &(var, p) in &ct.xs {
                        v.mul_ref(&xp[var as usize][p as usize]);
                    }
                    for &(var, g) in &ct.gs {
                        v.mul_ref(&gp[var as usize][g as usize]);
                    }
                    if let Some((idx, kind)) = ct.trig {
                        let (s, c) = &trig[idx as usize];
                        v.mul_ref(match kind {
                            TrigKind::Sin => s,
                            TrigKind::Cos => c,
                        });
                    }
                    sum.add_ref(&v);
                }
                sum
            })
            .collect()
    }
}

impl Expr {
    /// Value at `(t, x)` with `x` indexed by variable id.
    pub fn evaluate_at(&self, t: &Float, x: &[Float], prec: u32) -> Float {
        let ev = Evaluator::<Float>::new(&[self], prec);
        let x: Vec<Float> = x.iter().map(|v| Float::with_val(prec, v)).collect();
        ev.eval(&Float::with_val(prec, t), &x).pop().expect("one value")
    }

    /// Value at a named point. Every variable of the expression's universe must be bound.
    pub fn evaluate(&self, point: &BTreeMap<String, Float>, t: &Float, prec: u32) -> Result<Float> {
        let mut x = Vec::with_capacity(self.vars().len());
        for name in self.vars().names() {
            let v = point
                .get(name)
                .ok_or_else(|| Error::UnboundVariable(name.clone()))?;
            x.push(v.clone());
        }
        Ok(self.evaluate_at(t, &x, prec))
    }
}

use std::sync::Arc;

use rug::{Float, Rational};

use super::{check_component, combine, fixed, q, Jet, ObsKind, Probe, Problem};
use crate::algebra::{Expr, VarSet, Wrt};
use crate::diagnostics::{Domain, Interval};
use crate::engine::{cauchy2, History};
use crate::error::Result;

/// Coupled pair
/// `u1_t + 1/2 u1_xx + (u1/2 - u2)(u1^2 + u2^2) = 0`,
/// `u2_t + 1/2 u2_xx + (u1 + u2/2)(u1^2 + u2^2) = 0`,
/// with `u = (sin(x+1), cos(x+1))` at `t = 1` and exact solution `(sin(x+t), cos(x+t))`.
pub struct Bsde2d {
    vars: Arc<VarSet>,
}

/// `(a, b)` such that component `c` carries `(a*u1 + b*u2) * (u1^2 + u2^2)`.
fn weights(c: usize) -> (Rational, Rational) {
    if c == 0 {
        (q(1, 2), q(-1, 1))
    } else {
        (q(1, 1), q(1, 2))
    }
}

impl Bsde2d {
    pub fn new() -> Self {
        Self {
            vars: VarSet::new(["x"]).expect("valid variables"),
        }
    }

    fn operator(&self, u: &Expr, u_t: &Expr, nonlinear: &Expr) -> Result<Expr> {
        let u_xx = u.differentiate(Wrt::Var(0)).differentiate(Wrt::Var(0));
        combine(&self.vars, &[(q(1, 1), u_t), (q(1, 2), &u_xx), (q(1, 1), nonlinear)])
    }
}

impl Default for Bsde2d {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for Bsde2d {
    fn id(&self) -> String {
        "bsde2d".into()
    }

    fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    fn components(&self) -> usize {
        2
    }

    fn brownian_dim(&self) -> usize {
        1
    }

    fn anchor(&self) -> Rational {
        Rational::from(1)
    }

    fn initial_guess(&self) -> Vec<Expr> {
        vec![self.boundary_rule(0, 0), self.boundary_rule(1, 0)]
    }

    fn delta(&self, component: usize, n: usize, history: &History) -> Result<Expr> {
        check_component(component, 2)?;
        let phi = history.component(0)?;
        let s = history.component(1)?;
        let norm = |k: usize| history.memo("phi^2+S^2", k, || cauchy2(phi, phi, k)?.add(&cauchy2(s, s, k)?));
        let (a, b) = weights(component);
        let mut nonlinear = Expr::zero(&self.vars);
        for i in 0..=n {
            let lin = combine(&self.vars, &[(a.clone(), &phi[i]), (b.clone(), &s[i])])?;
            nonlinear = nonlinear.add(&lin.mul(&*norm(n - i)?)?)?;
        }
        let own = history.get(component, n)?;
        self.operator(own, &own.differentiate(Wrt::T), &nonlinear)
    }

    fn boundary_rule(&self, component: usize, m: usize) -> Expr {
        match (m, component) {
            (0, 0) => fixed("sin(x + 1)", &self.vars),
            (0, _) => fixed("cos(x + 1)", &self.vars),
            _ => Expr::zero(&self.vars),
        }
    }

    fn evaluation_point(&self, prec: u32) -> Vec<Float> {
        vec![Float::new(prec)]
    }

    fn observable_probes(&self, approx: &[Expr], _prec: u32) -> Result<Vec<Probe>> {
        let mut out = Vec::new();
        for (c, a) in approx.iter().enumerate() {
            let at0 = a.substitute_t(&Rational::new());
            out.push(Probe::new(ObsKind::Z, c, at0.differentiate(Wrt::Var(0))));
            out.push(Probe::new(ObsKind::Y, c, at0));
        }
        Ok(out)
    }

    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        let v = &self.vars;
        Ok(vec![
            Probe::new(ObsKind::Y, 0, fixed("sin(x)", v)),
            Probe::new(ObsKind::Y, 1, fixed("cos(x)", v)),
            Probe::new(ObsKind::Z, 0, fixed("cos(x)", v)),
            Probe::new(ObsKind::Z, 1, fixed("-sin(x)", v)),
        ])
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0_1".into(), "y0_2".into()]
    }

    fn default_domain(&self) -> Domain {
        Domain::new(Interval::unit(), vec![Interval::period()], true)
    }

    fn residual_at(&self, component: usize, _t: &Float, _x: &[Float], jets: &[Jet]) -> Float {
        let prec = jets[0].u.prec();
        let (a, b) = weights(component);
        let (u1, u2) = (&jets[0].u, &jets[1].u);
        let norm = Float::with_val(prec, u1.square_ref()) + Float::with_val(prec, u2.square_ref());
        let lin = Float::with_val(prec, u1 * &a) + Float::with_val(prec, u2 * &b);
        let j = &jets[component];
        Float::with_val(prec, &j.u_t + Float::with_val(prec, &j.u_xx[0] / 2u32)) + lin * norm
    }

    fn residual_exprs(&self, approx: &[Expr]) -> Option<Result<Vec<Expr>>> {
        Some((|| {
            let norm = approx[0].mul(&approx[0])?.add(&approx[1].mul(&approx[1])?)?;
            (0..2)
                .map(|c| {
                    let (a, b) = weights(c);
                    let lin = combine(&self.vars, &[(a, &approx[0]), (b, &approx[1])])?;
                    let u = &approx[c];
                    self.operator(u, &u.differentiate(Wrt::T), &lin.mul(&norm)?)
                })
                .collect()
        })())
    }

    fn exact_jets(&self, t: &Float, x: &[Float]) -> Option<Vec<Jet>> {
        let prec = t.prec().max(x[0].prec());
        let s = Float::with_val(prec, &x[0] + t);
        let (sin, cos) = s.sin_cos(Float::new(prec));
        let neg_sin = Float::with_val(prec, -&sin);
        let neg_cos = Float::with_val(prec, -&cos);
        Some(vec![
            Jet {
                u: sin.clone(),
                u_t: cos.clone(),
                u_x: vec![cos.clone()],
                u_xx: vec![neg_sin.clone()],
            },
            Jet {
                u: cos,
                u_t: neg_sin.clone(),
                u_x: vec![neg_sin],
                u_xx: vec![neg_cos],
            },
        ])
    }

    fn has_exact_solution(&self) -> bool {
        true
    }
}

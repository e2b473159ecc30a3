use std::sync::Arc;

use rug::{Float, Rational};

use super::{check_component, combine, fixed, q, Jet, ObsKind, Probe, Problem};
use crate::algebra::{Expr, VarSet, Wrt};
use crate::diagnostics::{Domain, Interval};
use crate::engine::History;
use crate::error::Result;

/// `u_t + 1/2 (u_11 + u_22) + u - 1/2 (u_1 + u_2) = 0`, `u(1) = sin(x1 + x2 + 1)`,
/// exact solution `sin(x1 + x2 + t)`.
pub struct Bsde2w {
    vars: Arc<VarSet>,
}

impl Bsde2w {
    pub fn new() -> Self {
        Self {
            vars: VarSet::new(["x1", "x2"]).expect("valid variables"),
        }
    }

    fn operator(&self, u: &Expr) -> Result<Expr> {
        let u1 = u.differentiate(Wrt::Var(0));
        let u2 = u.differentiate(Wrt::Var(1));
        let u11 = u1.differentiate(Wrt::Var(0));
        let u22 = u2.differentiate(Wrt::Var(1));
        combine(
            &self.vars,
            &[
                (q(1, 1), &u.differentiate(Wrt::T)),
                (q(1, 2), &u11),
                (q(1, 2), &u22),
                (q(1, 1), u),
                (q(-1, 2), &u1),
                (q(-1, 2), &u2),
            ],
        )
    }
}

impl Default for Bsde2w {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for Bsde2w {
    fn id(&self) -> String {
        "bsde2w".into()
    }

    fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    fn brownian_dim(&self) -> usize {
        2
    }

    fn anchor(&self) -> Rational {
        Rational::from(1)
    }

    fn initial_guess(&self) -> Vec<Expr> {
        vec![self.boundary_rule(0, 0)]
    }

    fn delta(&self, component: usize, n: usize, history: &History) -> Result<Expr> {
        check_component(component, 1)?;
        self.operator(history.get(0, n)?)
    }

    fn boundary_rule(&self, _component: usize, m: usize) -> Expr {
        if m == 0 {
            fixed("sin(x1 + x2 + 1)", &self.vars)
        } else {
            Expr::zero(&self.vars)
        }
    }

    fn evaluation_point(&self, prec: u32) -> Vec<Float> {
        vec![Float::new(prec), Float::new(prec)]
    }

    fn observable_probes(&self, approx: &[Expr], _prec: u32) -> Result<Vec<Probe>> {
        let at0 = approx[0].substitute_t(&Rational::new());
        Ok(vec![
            Probe::new(ObsKind::Z, 0, at0.differentiate(Wrt::Var(0))),
            Probe::new(ObsKind::Z, 1, at0.differentiate(Wrt::Var(1))),
            Probe::new(ObsKind::Y, 0, at0),
        ])
    }

    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        let v = &self.vars;
        Ok(vec![
            Probe::new(ObsKind::Y, 0, fixed("sin(x1 + x2)", v)),
            Probe::new(ObsKind::Z, 0, fixed("cos(x1 + x2)", v)),
            Probe::new(ObsKind::Z, 1, fixed("cos(x1 + x2)", v)),
        ])
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0".into(), "z0_1".into()]
    }

    fn default_domain(&self) -> Domain {
        Domain::new(Interval::unit(), vec![Interval::period(), Interval::period()], true)
    }

    fn residual_at(&self, _component: usize, _t: &Float, _x: &[Float], jets: &[Jet]) -> Float {
        let j = &jets[0];
        let prec = j.u.prec();
        let second = Float::with_val(prec, &j.u_xx[0] + &j.u_xx[1]) / 2u32;
        let first = Float::with_val(prec, &j.u_x[0] + &j.u_x[1]) / 2u32;
        Float::with_val(prec, &j.u_t + second) + &j.u - first
    }

    fn residual_exprs(&self, approx: &[Expr]) -> Option<Result<Vec<Expr>>> {
        Some(self.operator(&approx[0]).map(|e| vec![e]))
    }

    fn exact_jets(&self, t: &Float, x: &[Float]) -> Option<Vec<Jet>> {
        let prec = t.prec().max(x[0].prec());
        let s = Float::with_val(prec, &x[0] + &x[1]) + t;
        let (sin, cos) = s.sin_cos(Float::new(prec));
        let neg_sin = Float::with_val(prec, -&sin);
        Some(vec![Jet {
            u: sin,
            u_t: cos.clone(),
            u_x: vec![cos.clone(), cos],
            u_xx: vec![neg_sin.clone(), neg_sin],
        }])
    }

    fn has_exact_solution(&self) -> bool {
        true
    }
}

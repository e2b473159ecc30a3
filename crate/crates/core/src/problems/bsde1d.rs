use std::sync::Arc;

use rug::{Float, Rational};

use super::{check_component, combine, fixed, q, Jet, ObsKind, Probe, Problem};
use crate::algebra::{Expr, VarSet, Wrt};
use crate::diagnostics::{Domain, Interval};
use crate::engine::{cauchy2, History};
use crate::error::Result;

/// `u_t + 1/2 th(1-th)(1-2th) u_th + 1/2 th^2 (1-th)^2 u_thth - u^3 + 5/2 u^2 - 3/2 u = 0`,
/// `u(1, th) = th`, exact solution `th e^t / (th e^t + (1-th) e)`.
pub struct Bsde1d {
    vars: Arc<VarSet>,
    drift: Expr,
    diffusion: Expr,
}

impl Bsde1d {
    pub fn new() -> Self {
        let vars = VarSet::new(["theta"]).expect("valid variables");
        let drift = fixed("1/2*theta*(1 - theta)*(1 - 2*theta)", &vars);
        let diffusion = fixed("1/2*theta^2*(1 - theta)^2", &vars);
        Self { vars, drift, diffusion }
    }

    fn operator(&self, u: &Expr, u_t: &Expr, cube: &Expr, square: &Expr) -> Result<Expr> {
        let u_th = u.differentiate(Wrt::Var(0));
        let u_thth = u_th.differentiate(Wrt::Var(0));
        let drift = self.drift.mul(&u_th)?;
        let diffusion = self.diffusion.mul(&u_thth)?;
        combine(
            &self.vars,
            &[
                (q(1, 1), u_t),
                (q(1, 1), &drift),
                (q(1, 1), &diffusion),
                (q(-1, 1), cube),
                (q(5, 2), square),
                (q(-3, 2), u),
            ],
        )
    }
}

impl Default for Bsde1d {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for Bsde1d {
    fn id(&self) -> String {
        "bsde1d".into()
    }

    fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    fn brownian_dim(&self) -> usize {
        1
    }

    fn anchor(&self) -> Rational {
        Rational::from(1)
    }

    fn initial_guess(&self) -> Vec<Expr> {
        vec![Expr::var_id(&self.vars, 0)]
    }

    fn delta(&self, component: usize, n: usize, history: &History) -> Result<Expr> {
        check_component(component, 1)?;
        let phi = history.component(0)?;
        let square = |k: usize| history.memo("phi^2", k, || cauchy2(phi, phi, k));
        let mut cube = Expr::zero(&self.vars);
        for (i, p) in phi[..=n].iter().enumerate() {
            cube = cube.add(&p.mul(&*square(n - i)?)?)?;
        }
        let phi_n = history.get(0, n)?;
        self.operator(phi_n, &phi_n.differentiate(Wrt::T), &cube, &*square(n)?)
    }

    fn boundary_rule(&self, _component: usize, m: usize) -> Expr {
        if m == 0 {
            Expr::var_id(&self.vars, 0)
        } else {
            Expr::zero(&self.vars)
        }
    }

    fn evaluation_point(&self, prec: u32) -> Vec<Float> {
        let e = Float::with_val(prec, 1).exp();
        let denom = Float::with_val(prec, &e + 1u32);
        vec![e / denom]
    }

    fn observable_probes(&self, approx: &[Expr], _prec: u32) -> Result<Vec<Probe>> {
        let at0 = approx[0].substitute_t(&Rational::new());
        let z = fixed("theta*(1 - theta)", &self.vars).mul(&at0.differentiate(Wrt::Var(0)))?;
        Ok(vec![Probe::new(ObsKind::Y, 0, at0), Probe::new(ObsKind::Z, 0, z)])
    }

    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        Ok(vec![
            Probe::new(ObsKind::Y, 0, Expr::constant(&self.vars, q(1, 2))),
            Probe::new(ObsKind::Z, 0, Expr::constant(&self.vars, q(1, 4))),
        ])
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0".into(), "z0".into()]
    }

    fn default_domain(&self) -> Domain {
        Domain::new(Interval::unit(), vec![Interval::unit()], false)
    }

    fn residual_at(&self, _component: usize, _t: &Float, x: &[Float], jets: &[Jet]) -> Float {
        let prec = jets[0].u.prec();
        let th = &x[0];
        let j = &jets[0];
        let one_m = Float::with_val(prec, 1 - th);
        let th1 = Float::with_val(prec, th * &one_m);
        let drift = Float::with_val(prec, &th1 * Float::with_val(prec, 1 - Float::with_val(prec, th * 2u32))) / 2u32;
        let diffusion = Float::with_val(prec, th1.square_ref()) / 2u32;
        let u = &j.u;
        let u2 = Float::with_val(prec, u.square_ref());
        let poly = Float::with_val(prec, &u2 * u) * -1i32 + Float::with_val(prec, &u2 * 5u32) / 2u32
            - Float::with_val(prec, u * 3u32) / 2u32;
        Float::with_val(prec, &j.u_t + drift * &j.u_x[0]) + diffusion * &j.u_xx[0] + poly
    }

    fn residual_exprs(&self, approx: &[Expr]) -> Option<Result<Vec<Expr>>> {
        let u = &approx[0];
        Some((|| {
            let square = u.mul(u)?;
            let cube = square.mul(u)?;
            Ok(vec![self.operator(u, &u.differentiate(Wrt::T), &cube, &square)?])
        })())
    }

    fn exact_jets(&self, t: &Float, x: &[Float]) -> Option<Vec<Jet>> {
        let prec = t.prec().max(x[0].prec());
        let th = &x[0];
        let et = Float::with_val(prec, t.exp_ref());
        let e = Float::with_val(prec, 1).exp();
        let a = Float::with_val(prec, th * &et);
        let b = Float::with_val(prec, 1 - th) * &e;
        let s = Float::with_val(prec, &a + &b);
        let s2 = Float::with_val(prec, s.square_ref());
        let s3 = Float::with_val(prec, &s2 * &s);
        let et1 = Float::with_val(prec, &et * &e);
        let u = Float::with_val(prec, &a / &s);
        let u_t = Float::with_val(prec, &a * &b) / &s2;
        let u_th = Float::with_val(prec, &et1 / &s2);
        let u_thth = Float::with_val(prec, &et1 * -2i32) * Float::with_val(prec, &et - &e) / s3;
        Some(vec![Jet {
            u,
            u_t,
            u_x: vec![u_th],
            u_xx: vec![u_thth],
        }])
    }

    fn has_exact_solution(&self) -> bool {
        true
    }
}

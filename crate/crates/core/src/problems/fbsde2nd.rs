use std::sync::Arc;

use rug::{Float, Rational};

use super::fbsde::{at_zero, convolve, trig_series};
use super::{check_component, combine, fixed, q, sin_cos_of, Jet, ObsKind, Probe, Problem};
use crate::algebra::rational::inv_factorial;
use crate::algebra::{Expr, TrigKind, VarSet, Wrt};
use crate::diagnostics::{Domain, Interval};
use crate::engine::{cauchy2, History};
use crate::error::Result;

/// Second-order system with `b = sin(t+x)`, `sigma = cos(t+x)`, reduced to
/// `u_t + 1/8 (1 + cos 2s) u_xx - cos(s)(u^2 + u) + [sin s + 1/8 sin 2s - 1/2 cos 2s - 1/2] u_x = 0`
/// with `s = t + x`, `u(1, x) = sin(1 + x)`, exact solution `sin(t + x)`.
pub struct Fbsde2nd {
    vars: Arc<VarSet>,
}

impl Fbsde2nd {
    pub fn new() -> Self {
        Self {
            vars: VarSet::new(["x"]).expect("valid variables"),
        }
    }
}

impl Default for Fbsde2nd {
    fn default() -> Self {
        Self::new()
    }
}

impl Problem for Fbsde2nd {
    fn id(&self) -> String {
        "fbsde2nd".into()
    }

    fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    fn brownian_dim(&self) -> usize {
        1
    }

    fn anchor(&self) -> Rational {
        Rational::new()
    }

    fn initial_guess(&self) -> Vec<Expr> {
        vec![self.boundary_rule(0, 0)]
    }

    fn delta(&self, component: usize, n: usize, h: &History) -> Result<Expr> {
        check_component(component, 1)?;
        let v = &self.vars;
        let phi = h.component(0)?;
        let p = |k: usize| Ok(Arc::new(phi[k].clone()));
        let dx = |k: usize| h.memo("phi_x", k, || Ok(phi[k].differentiate(Wrt::Var(0))));
        let dxx = |k: usize| h.memo("phi_xx", k, || Ok(dx(k)?.differentiate(Wrt::Var(0))));
        let pp = |k: usize| h.memo("phi^2", k, || cauchy2(phi, phi, k));
        let sin1 = trig_series(v, TrigKind::Sin, 1);
        let cos1 = trig_series(v, TrigKind::Cos, 1);
        let sin2 = trig_series(v, TrigKind::Sin, 2);
        let cos2 = trig_series(v, TrigKind::Cos, 2);
        let drift2 = |j: usize| -> Result<Arc<Expr>> {
            Ok(Arc::new(combine(v, &[(q(1, 8), &*sin2(j)?), (q(-1, 2), &*cos2(j)?)])?))
        };

        let u_t = phi[n].differentiate(Wrt::T);
        let a = convolve(v, n, &sin1, &dx)?;
        let b = convolve(v, n, &cos2, &dxx)?;
        let c = convolve(v, n, &cos1, &p)?;
        let d = convolve(v, n, &drift2, &dx)?;
        let e = convolve(v, n, &cos1, &pp)?;
        combine(
            v,
            &[
                (q(1, 1), &u_t),
                (q(-1, 2), &*dx(n)?),
                (q(1, 8), &*dxx(n)?),
                (q(1, 1), &a),
                (q(1, 8), &b),
                (q(-1, 1), &c),
                (q(1, 1), &d),
                (q(-1, 1), &e),
            ],
        )
    }

    fn boundary_rule(&self, _component: usize, m: usize) -> Expr {
        let shifted = fixed(&format!("sin(x + {m}/2*pi)"), &self.vars);
        shifted.scale(&inv_factorial(m as u32))
    }

    fn evaluation_point(&self, prec: u32) -> Vec<Float> {
        vec![Float::with_val(prec, 0.5)]
    }

    /// `z = sigma u_x`, `Gamma = sigma (sigma u_x)_x` and `A = L(sigma u_x)` with
    /// `L = d/dt + b d/dx + 1/2 sigma^2 d2/dx2`, all read at `t = 0` with the
    /// time-dependent `sigma = cos(t + x)`.
    fn observable_probes(&self, approx: &[Expr], _prec: u32) -> Result<Vec<Probe>> {
        let v = &self.vars;
        let dx = |e: &Expr| e.differentiate(Wrt::Var(0));
        let (sin, cos) = (fixed("sin(x)", v), fixed("cos(x)", v));
        let p = at_zero(&approx[0]);
        let px = dx(&p);
        let pxx = dx(&px);
        let pxxx = dx(&pxx);
        let pxt = dx(&at_zero(&approx[0].differentiate(Wrt::T)));

        let z = cos.mul(&px)?;
        let gamma = cos.mul(&dx(&z))?;
        let w_t = cos.mul(&pxt)?.sub(&sin.mul(&px)?)?;
        let w_x = cos.mul(&pxx)?.sub(&sin.mul(&px)?)?;
        let w_xx = cos
            .mul(&pxxx)?
            .sub(&cos.mul(&px)?)?
            .sub(&sin.mul(&pxx)?.scale(&q(2, 1)))?;
        let a = w_t
            .add(&sin.mul(&w_x)?)?
            .add(&cos.mul(&cos)?.mul(&w_xx)?.scale(&q(1, 2)))?;
        Ok(vec![
            Probe::new(ObsKind::Y, 0, p),
            Probe::new(ObsKind::Z, 0, z),
            Probe::new(ObsKind::Gamma, 0, gamma),
            Probe::new(ObsKind::A, 0, a),
        ])
    }

    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        let v = &self.vars;
        Ok(vec![
            Probe::new(ObsKind::Y, 0, fixed("sin(x)", v)),
            Probe::new(ObsKind::Z, 0, fixed("cos(x)^2", v)),
            Probe::new(ObsKind::Gamma, 0, fixed("-2*sin(x)*cos(x)^2", v)),
            Probe::new(ObsKind::A, 0, fixed("-sin(2*x)*(1 + sin(x)) - cos(2*x)*cos(x)^2", v)),
        ])
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0".into(), "z0".into(), "gamma0".into(), "a0".into()]
    }

    fn default_domain(&self) -> Domain {
        Domain::new(Interval::unit(), vec![Interval::period()], true)
    }

    fn residual_at(&self, _component: usize, t: &Float, x: &[Float], jets: &[Jet]) -> Float {
        let j = &jets[0];
        let prec = j.u.prec();
        let (s1, c1) = sin_cos_of(1, t, &x[0]);
        let (s2, c2) = sin_cos_of(2, t, &x[0]);
        let mut r = j.u_t.clone();
        r += Float::with_val(prec, &c2 + 1u32) * &j.u_xx[0] / 8u32;
        r -= c1 * (Float::with_val(prec, j.u.square_ref()) + &j.u);
        let half_c2 = c2 / 2u32;
        let coeff = s1 + s2 / 8u32 - half_c2 - Float::with_val(prec, 0.5);
        r += coeff * &j.u_x[0];
        r
    }

    fn exact_jets(&self, t: &Float, x: &[Float]) -> Option<Vec<Jet>> {
        let (sin, cos) = sin_cos_of(1, t, &x[0]);
        let neg_sin = Float::with_val(sin.prec(), -&sin);
        Some(vec![Jet {
            u: sin,
            u_t: cos.clone(),
            u_x: vec![cos],
            u_xx: vec![neg_sin],
        }])
    }

    fn has_exact_solution(&self) -> bool {
        true
    }
}

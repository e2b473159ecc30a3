use std::sync::Arc;

use rug::{Float, Rational};

use super::{check_component, combine, embedded, fixed, q, sin_cos_of, Jet, ObsKind, Probe, Problem};
use crate::algebra::rational::inv_factorial;
use crate::algebra::{Expr, TrigKind, VarSet, Wrt};
use crate::diagnostics::{Domain, Interval};
use crate::engine::{cauchy2, History};
use crate::error::Result;

/// Decoupled forward-backward system with `b = sin(t+x)`, `sigma = cos(t+x) u`,
/// reduced to
/// `u_t + sin(s) u u_x + 1/4 cos(2s) u^2 u_xx + 1/4 u^2 u_xx + 1/2 cos(s) u^3 u_x - cos(s)(u^2 + 1) = 0`
/// with `s = t + x`, `u(1, x) = sin(1 + x)`, exact solution `sin(t + x)`.
///
/// The time dependence of the coefficients and of the terminal value is
/// embedded in the homotopy parameter (`t -> t q`, `1 -> q`), which keeps
/// every `phi_m` polynomial in `t`.
pub struct Fbsde {
    vars: Arc<VarSet>,
}

impl Fbsde {
    pub fn new() -> Self {
        Self {
            vars: VarSet::new(["x"]).expect("valid variables"),
        }
    }
}

impl Default for Fbsde {
    fn default() -> Self {
        Self::new()
    }
}

type Series<'a> = &'a dyn Fn(usize) -> Result<Arc<Expr>>;

/// Order-`n` coefficient of the product of two q-series.
pub(crate) fn convolve(vars: &Arc<VarSet>, n: usize, f: Series<'_>, g: Series<'_>) -> Result<Expr> {
    let mut acc = Expr::zero(vars);
    for a in 0..=n {
        acc = acc.add(&f(a)?.mul(&*g(n - a)?)?)?;
    }
    Ok(acc)
}

pub(crate) fn trig_series(vars: &Arc<VarSet>, kind: TrigKind, freq: u32) -> impl Fn(usize) -> Result<Arc<Expr>> + '_ {
    move |j| Ok(Arc::new(embedded(vars, kind, freq, j)))
}

pub(crate) fn at_zero(e: &Expr) -> Expr {
    e.substitute_t(&Rational::new())
}

impl Problem for Fbsde {
    fn id(&self) -> String {
        "fbsde".into()
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
        let dx = |k: usize| h.memo("phi_x", k, || Ok(phi[k].differentiate(Wrt::Var(0))));
        let dxx = |k: usize| h.memo("phi_xx", k, || Ok(dx(k)?.differentiate(Wrt::Var(0))));
        let pp = |k: usize| h.memo("phi^2", k, || cauchy2(phi, phi, k));
        let ppx = |k: usize| {
            h.memo("phi*phi_x", k, || {
                let dxs = (0..=k).map(|i| dx(i).map(|e| (*e).clone())).collect::<Result<Vec<_>>>()?;
                cauchy2(phi, &dxs, k)
            })
        };
        let pppx = |k: usize| h.memo("phi^3*phi_x", k, || convolve(v, k, &pp, &ppx));
        let ppxx = |k: usize| h.memo("phi^2*phi_xx", k, || convolve(v, k, &pp, &dxx));
        let sin1 = trig_series(v, TrigKind::Sin, 1);
        let cos1 = trig_series(v, TrigKind::Cos, 1);
        let cos2 = trig_series(v, TrigKind::Cos, 2);

        let drift = convolve(v, n, &sin1, &ppx)?;
        let cubic = convolve(v, n, &cos1, &pppx)?;
        let curv = convolve(v, n, &cos2, &ppxx)?;
        let source = convolve(v, n, &cos1, &pp)?;
        let u_t = phi[n].differentiate(Wrt::T);
        combine(
            v,
            &[
                (q(1, 1), &u_t),
                (q(1, 1), &drift),
                (q(1, 2), &cubic),
                (q(1, 4), &curv),
                (q(1, 4), &*ppxx(n)?),
                (q(-1, 1), &source),
                (q(-1, 1), &*cos1(n)?),
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

    fn observable_probes(&self, approx: &[Expr], _prec: u32) -> Result<Vec<Probe>> {
        let p = at_zero(&approx[0]);
        let px = p.differentiate(Wrt::Var(0));
        let z = fixed("cos(x)", &self.vars).mul(&p)?.mul(&px)?;
        Ok(vec![Probe::new(ObsKind::Y, 0, p), Probe::new(ObsKind::Z, 0, z)])
    }

    fn exact_probes(&self, _prec: u32) -> Result<Vec<Probe>> {
        let v = &self.vars;
        Ok(vec![
            Probe::new(ObsKind::Y, 0, fixed("sin(x)", v)),
            Probe::new(ObsKind::Z, 0, fixed("cos(x)^2*sin(x)", v)),
        ])
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0".into(), "z0".into()]
    }

    fn default_domain(&self) -> Domain {
        Domain::new(Interval::unit(), vec![Interval::period()], true)
    }

    fn residual_at(&self, _component: usize, t: &Float, x: &[Float], jets: &[Jet]) -> Float {
        let j = &jets[0];
        let prec = j.u.prec();
        let (s1, c1) = sin_cos_of(1, t, &x[0]);
        let (_, c2) = sin_cos_of(2, t, &x[0]);
        let u2 = Float::with_val(prec, j.u.square_ref());
        let u3 = Float::with_val(prec, &u2 * &j.u);
        let mut r = j.u_t.clone();
        r += s1 * Float::with_val(prec, &j.u * &j.u_x[0]);
        let quarter = Float::with_val(prec, &u2 * &j.u_xx[0]) / 4u32;
        r += Float::with_val(prec, &quarter * &c2) + &quarter;
        r += Float::with_val(prec, &c1 * &u3) * &j.u_x[0] / 2u32;
        r -= c1 * (u2 + 1u32);
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

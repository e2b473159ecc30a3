use std::sync::Arc;

use rug::{Float, Rational};

use super::fbsde::at_zero;
use super::{check_component, combine, Jet, ObsKind, Probe, Problem};
use crate::algebra::{Expr, VarSet, Wrt};
use crate::diagnostics::{Bound, Domain, Interval};
use crate::engine::History;
use crate::error::{Error, Result};

/// `d`-dimensional decoupled system with `b_i = x_i e^{-x_i^2} / d` and
/// `sigma_ii = e^{-x_i^2} / d`, reduced to
/// `u_t + 1/(2d^2) sum_i e^{-2x_i^2} u_ii + u/d^2 - F = 0` with
/// `F = 1/d^3 sum_i (x_i^2 + e^{-2x_i^2}) P_i + 1/d sum_i x_i^2 dP_i/dt`,
/// `P_i = prod_{k != i} (x_k + t)`, and exact solution `u = 1/d sum_j x_j^2 P_j`.
pub struct FbsdeNd {
    d: usize,
    vars: Arc<VarSet>,
    forcing: Expr,
    exact: Expr,
}

impl FbsdeNd {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Config("fbsdeNd needs d >= 1".into()));
        }
        let vars = VarSet::indexed("x", d)?;
        let shifted: Vec<Expr> = (0..d)
            .map(|k| Expr::var_id(&vars, k).add(&Expr::t(&vars)))
            .collect::<Result<_>>()?;
        let mut prefix = vec![Expr::one(&vars)];
        for s in &shifted {
            let next = prefix.last().expect("nonempty").mul(s)?;
            prefix.push(next);
        }
        let mut suffix = vec![Expr::one(&vars)];
        for s in shifted.iter().rev() {
            let next = suffix.last().expect("nonempty").mul(s)?;
            suffix.push(next);
        }
        suffix.reverse();

        let dd = Rational::from(d as u64);
        let inv_d = Rational::from(dd.recip_ref());
        let inv_d3 = inv_d.clone().square() * &inv_d;
        let mut forcing = Expr::zero(&vars);
        let mut exact = Expr::zero(&vars);
        for i in 0..d {
            let p_i = prefix[i].mul(&suffix[i + 1])?;
            let x2 = Expr::var_id(&vars, i).pow(2);
            let x2_p = x2.mul(&p_i)?;
            let g_p = Expr::gauss(&vars, i, 1).mul(&p_i)?;
            let x2_dp = x2.mul(&p_i.differentiate(Wrt::T))?;
            forcing = combine(
                &vars,
                &[
                    (Rational::from(1), &forcing),
                    (inv_d3.clone(), &x2_p),
                    (inv_d3.clone(), &g_p),
                    (inv_d.clone(), &x2_dp),
                ],
            )?;
            exact = combine(&vars, &[(Rational::from(1), &exact), (inv_d.clone(), &x2_p)])?;
        }
        Ok(Self { d, vars, forcing, exact })
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    /// The time-dependent source `F`.
    pub fn forcing(&self) -> &Expr {
        &self.forcing
    }

    fn inv_d2(&self) -> Rational {
        Rational::from((1, (self.d * self.d) as u64))
    }

    fn operator(&self, u: &Expr) -> Result<Expr> {
        let v = &self.vars;
        let mut diffusion = Expr::zero(v);
        for i in 0..self.d {
            let uii = u.differentiate(Wrt::Var(i)).differentiate(Wrt::Var(i));
            diffusion = diffusion.add(&Expr::gauss(v, i, 1).mul(&uii)?)?;
        }
        let inv_d2 = self.inv_d2();
        let half = Rational::from(&inv_d2 / 2u32);
        combine(
            v,
            &[
                (Rational::from(1), &u.differentiate(Wrt::T)),
                (inv_d2, u),
                (half, &diffusion),
            ],
        )
    }
}

impl Problem for FbsdeNd {
    fn id(&self) -> String {
        format!("fbsdeNd({})", self.d)
    }

    fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    fn brownian_dim(&self) -> usize {
        self.d
    }

    fn anchor(&self) -> Rational {
        Rational::from(1)
    }

    fn initial_guess(&self) -> Vec<Expr> {
        vec![self.boundary_rule(0, 0)]
    }

    fn delta(&self, component: usize, n: usize, history: &History) -> Result<Expr> {
        check_component(component, 1)?;
        let linear = self.operator(history.get(0, n)?)?;
        if n == 0 {
            linear.sub(&self.forcing)
        } else {
            Ok(linear)
        }
    }

    fn boundary_rule(&self, _component: usize, m: usize) -> Expr {
        if m == 0 {
            self.exact.substitute_t(&Rational::from(1))
        } else {
            Expr::zero(&self.vars)
        }
    }

    fn evaluation_point(&self, prec: u32) -> Vec<Float> {
        vec![Float::with_val(prec, 1); self.d]
    }

    /// `z_i = e^{-x_i^2} / d * du/dx_i`; at `x_i = 1` the factor is the constant `1/(e d)`.
    fn observable_probes(&self, approx: &[Expr], prec: u32) -> Result<Vec<Probe>> {
        let p = at_zero(&approx[0]);
        let w = Float::with_val(prec, -1).exp() / self.d as u32;
        let mut out = vec![Probe::new(ObsKind::Y, 0, p.clone())];
        for i in 0..self.d {
            out.push(Probe::new(ObsKind::Z, i, p.differentiate(Wrt::Var(i))).weighted(w.clone()));
        }
        Ok(out)
    }

    fn exact_probes(&self, prec: u32) -> Result<Vec<Probe>> {
        self.observable_probes(std::slice::from_ref(&self.exact), prec)
    }

    fn table_columns(&self) -> Vec<String> {
        vec!["y0".into(), "z0_1".into()]
    }

    fn default_domain(&self) -> Domain {
        let edge = Interval::new(Bound::rational(0), Bound::rational(2));
        Domain::new(Interval::unit(), vec![edge; self.d], false)
    }

    fn residual_at(&self, _component: usize, t: &Float, x: &[Float], jets: &[Jet]) -> Float {
        let j = &jets[0];
        let prec = j.u.prec();
        let d = self.d;
        let shifted: Vec<Float> = x.iter().map(|xk| Float::with_val(prec, xk + t)).collect();
        let gauss: Vec<Float> = x
            .iter()
            .map(|xk| (Float::with_val(prec, xk.square_ref()) * -2i32).exp())
            .collect();
        let prod_except = |skip: &[usize]| {
            let mut p = Float::with_val(prec, 1);
            for (k, s) in shifted.iter().enumerate() {
                if !skip.contains(&k) {
                    p *= s;
                }
            }
            p
        };
        let dd = Float::with_val(prec, d);
        let d2 = Float::with_val(prec, dd.square_ref());
        let d3 = Float::with_val(prec, &d2 * &dd);
        let mut forcing = Float::new(prec);
        let mut diffusion = Float::new(prec);
        for i in 0..d {
            let x2 = Float::with_val(prec, x[i].square_ref());
            let p_i = prod_except(&[i]);
            forcing += Float::with_val(prec, &x2 + &gauss[i]) * p_i / &d3;
            let mut dp = Float::new(prec);
            for jj in (0..d).filter(|&jj| jj != i) {
                dp += prod_except(&[i, jj]);
            }
            forcing += x2 * dp / &dd;
            diffusion += Float::with_val(prec, &gauss[i] * &j.u_xx[i]);
        }
        let mut r = j.u_t.clone();
        r += diffusion / Float::with_val(prec, &d2 * 2u32);
        r += Float::with_val(prec, &j.u / &d2);
        r - forcing
    }

    fn residual_exprs(&self, approx: &[Expr]) -> Option<Result<Vec<Expr>>> {
        Some(self.operator(&approx[0]).and_then(|e| e.sub(&self.forcing)).map(|e| vec![e]))
    }

    fn exact_exprs(&self) -> Option<Vec<Expr>> {
        Some(vec![self.exact.clone()])
    }
}

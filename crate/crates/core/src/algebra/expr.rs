use std::cmp::Ordering;
use std::collections::hash_map::Entry;
use std::fmt;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Assign, Integer, Rational};
use rustc_hash::FxHashMap;

use super::rational::denominator_lcm;
use super::term::{Atom, Term, TermKey};
use super::trig::{canonical_trig, LinearArg, TrigCanon, TrigKind};
use super::vars::{same_vars, VarSet};
use crate::error::{Error, Result};

/// Differentiation target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wrt {
    T,
    Var(usize),
}

/// A finite sum of terms in canonical form: like terms merged, no zero
/// coefficients, terms sorted by key. Two canonical expressions are
/// mathematically equal exactly when they are structurally equal.
#[derive(Clone, Debug)]
pub struct Expr {
    vars: Arc<VarSet>,
    terms: Vec<Term>,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        same_vars(&self.vars, &other.vars) && self.terms == other.terms
    }
}

impl Eq for Expr {}

/// Structural equality of canonical forms, which is mathematical equality.
pub fn symbolic_equal(a: &Expr, b: &Expr) -> bool {
    a == b
}

#[derive(Default)]
pub(crate) struct Accumulator {
    map: FxHashMap<TermKey, Rational>,
}

impl Accumulator {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self {
            map: FxHashMap::with_capacity_and_hasher(n, Default::default()),
        }
    }

    pub(crate) fn add(&mut self, key: TermKey, coeff: Rational) {
        match self.map.entry(key) {
            Entry::Occupied(mut e) => *e.get_mut() += coeff,
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
        }
    }

    /// Adds `coeff * canon` where `base` carries no trig atom.
    fn add_canon(&mut self, mut base: TermKey, canon: TrigCanon, coeff: Rational) {
        match canon {
            TrigCanon::Zero => {}
            TrigCanon::Scalar(s) => self.add(base, coeff * s),
            TrigCanon::Atom(s, atom) => {
                base.trig = Some(atom);
                self.add(base, coeff * s);
            }
        }
    }

    pub(crate) fn finish(self, vars: &Arc<VarSet>) -> Expr {
        let terms = self
            .map
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(key, coeff)| Term { coeff, key })
            .collect();
        Expr::from_unsorted_unique(vars, terms)
    }
}

impl Expr {
    pub fn zero(vars: &Arc<VarSet>) -> Expr {
        Expr {
            vars: vars.clone(),
            terms: Vec::new(),
        }
    }

    pub fn constant(vars: &Arc<VarSet>, c: impl Into<Rational>) -> Expr {
        Self::single(vars, c.into(), TermKey::one(vars.len()))
    }

    pub fn one(vars: &Arc<VarSet>) -> Expr {
        Self::constant(vars, 1)
    }

    pub fn t(vars: &Arc<VarSet>) -> Expr {
        let mut k = TermKey::one(vars.len());
        k.set_t(1);
        Self::single(vars, Rational::from(1), k)
    }

    pub fn var(vars: &Arc<VarSet>, name: &str) -> Result<Expr> {
        Ok(Self::var_id(vars, vars.require(name)?))
    }

    pub fn var_id(vars: &Arc<VarSet>, id: usize) -> Expr {
        let mut k = TermKey::one(vars.len());
        k.set_exponent(id, 1);
        Self::single(vars, Rational::from(1), k)
    }

    /// `exp(-2 x_id^2)^mult`.
    pub fn gauss(vars: &Arc<VarSet>, id: usize, mult: u32) -> Expr {
        let mut k = TermKey::one(vars.len());
        k.set_gauss(id, mult);
        Self::single(vars, Rational::from(1), k)
    }

    pub fn trig(vars: &Arc<VarSet>, kind: TrigKind, arg: LinearArg) -> Expr {
        assert_eq!(arg.coeffs().len(), vars.len(), "trig argument arity");
        let mut acc = Accumulator::default();
        acc.add_canon(TermKey::one(vars.len()), canonical_trig(kind, arg), Rational::from(1));
        acc.finish(vars)
    }

    pub fn sin(vars: &Arc<VarSet>, arg: LinearArg) -> Expr {
        Self::trig(vars, TrigKind::Sin, arg)
    }

    pub fn cos(vars: &Arc<VarSet>, arg: LinearArg) -> Expr {
        Self::trig(vars, TrigKind::Cos, arg)
    }

    /// `coeff * t^t_pow * prod(atoms)`, canonicalised (trig products are linearised).
    pub fn from_atoms(vars: &Arc<VarSet>, coeff: Rational, t_pow: u32, atoms: &[Atom]) -> Result<Expr> {
        let n = vars.len();
        let mut key = TermKey::one(n);
        key.set_t(t_pow);
        let mut result = Expr::zero(vars);
        let mut trig_factors = Vec::new();
        for atom in atoms {
            match atom {
                Atom::Monomial { var, exp } => {
                    check_var(*var, n)?;
                    key.set_exponent(*var, key.exponent(*var) + exp);
                }
                Atom::Gauss { var, mult } => {
                    check_var(*var, n)?;
                    key.set_gauss(*var, key.gauss(*var) + mult);
                }
                Atom::Trig(a) => {
                    if a.arg().coeffs().len() != n {
                        return Err(Error::Index {
                            what: "trig argument arity",
                            index: a.arg().coeffs().len(),
                            len: n,
                        });
                    }
                    trig_factors.push(Expr::trig(vars, a.kind(), a.arg().clone()));
                }
            }
        }
        if coeff != 0 {
            result = Self::single(vars, coeff, key);
        }
        for f in &trig_factors {
            result = result.mul(f)?;
        }
        Ok(result)
    }

    fn single(vars: &Arc<VarSet>, coeff: Rational, key: TermKey) -> Expr {
        let terms = if coeff == 0 { Vec::new() } else { vec![Term { coeff, key }] };
        Expr {
            vars: vars.clone(),
            terms,
        }
    }

    /// Keys must already be unique and coefficients non-zero.
    fn from_unsorted_unique(vars: &Arc<VarSet>, mut terms: Vec<Term>) -> Expr {
        terms.sort_unstable_by(|a, b| a.key.cmp(&b.key));
        Expr {
            vars: vars.clone(),
            terms,
        }
    }

    /// Builds a canonical expression from arbitrary (possibly repeated) terms.
    pub fn from_terms(vars: &Arc<VarSet>, terms: impl IntoIterator<Item = Term>) -> Expr {
        let mut acc = Accumulator::default();
        for t in terms {
            acc.add(t.key, t.coeff);
        }
        acc.finish(vars)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn has_trig(&self) -> bool {
        self.terms.iter().any(|t| t.key.trig.is_some())
    }

    pub fn is_monomial_only(&self) -> bool {
        self.terms.iter().all(|t| t.key.is_monomial_only())
    }

    pub fn max_t_power(&self) -> u32 {
        self.terms.iter().map(|t| t.key.t).max().unwrap_or(0)
    }

    pub fn is_t_free(&self) -> bool {
        self.terms.iter().all(|t| t.key.t == 0)
    }

    /// Coefficient of the like-term class `key` (zero if absent).
    pub fn coefficient(&self, key: &TermKey) -> Rational {
        match self.terms.binary_search_by(|t| t.key.cmp(key)) {
            Ok(i) => self.terms[i].coeff.clone(),
            Err(_) => Rational::new(),
        }
    }

    /// The constant term.
    pub fn constant_term(&self) -> Rational {
        self.coefficient(&TermKey::one(self.vars.len()))
    }

    pub fn check_compatible(&self, o: &Expr) -> Result<()> {
        if same_vars(&self.vars, &o.vars) {
            Ok(())
        } else {
            Err(Error::VariableMismatch {
                left: self.vars.to_string(),
                right: o.vars.to_string(),
            })
        }
    }

    pub fn add(&self, o: &Expr) -> Result<Expr> {
        self.check_compatible(o)?;
        Ok(self.merge(o, false))
    }

    pub fn sub(&self, o: &Expr) -> Result<Expr> {
        self.check_compatible(o)?;
        Ok(self.merge(o, true))
    }

    pub fn neg(&self) -> Expr {
        Expr {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: Rational::from(-&t.coeff),
                    key: t.key.clone(),
                })
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if *c == 0 {
            return Expr::zero(&self.vars);
        }
        Expr {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: Rational::from(&t.coeff * c),
                    key: t.key.clone(),
                })
                .collect(),
        }
    }

    fn merge(&self, o: &Expr, negate_other: bool) -> Expr {
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let other_coeff = |c: &Rational| if negate_other { Rational::from(-c) } else { c.clone() };
        while i < self.terms.len() && j < o.terms.len() {
            let (a, b) = (&self.terms[i], &o.terms[j]);
            match a.key.cmp(&b.key) {
                Ordering::Less => {
                    out.push(a.clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(Term {
                        coeff: other_coeff(&b.coeff),
                        key: b.key.clone(),
                    });
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other {
                        Rational::from(&a.coeff - &b.coeff)
                    } else {
                        Rational::from(&a.coeff + &b.coeff)
                    };
                    if c != 0 {
                        out.push(Term { coeff: c, key: a.key.clone() });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend(self.terms[i..].iter().cloned());
        out.extend(o.terms[j..].iter().map(|b| Term {
            coeff: other_coeff(&b.coeff),
            key: b.key.clone(),
        }));
        Expr {
            vars: self.vars.clone(),
            terms: out,
        }
    }

    /// `sum_i c_i * e_i`.
    pub fn linear_combine(vars: &Arc<VarSet>, pairs: &[(Rational, &Expr)]) -> Result<Expr> {
        for (_, e) in pairs {
            if !same_vars(vars, &e.vars) {
                return Err(Error::VariableMismatch {
                    left: vars.to_string(),
                    right: e.vars.to_string(),
                });
            }
        }
        let live: Vec<&(Rational, &Expr)> = pairs.iter().filter(|(c, e)| *c != 0 && !e.is_zero()).collect();
        match live.len() {
            0 => Ok(Expr::zero(vars)),
            1 => Ok(live[0].1.scale(&live[0].0)),
            2 => Ok(live[0].1.scale(&live[0].0).merge(&live[1].1.scale(&live[1].0), false)),
            _ => {
                let total: usize = live.iter().map(|(_, e)| e.len()).sum();
                let mut acc = Accumulator::with_capacity(total);
                for (c, e) in live {
                    for t in &e.terms {
                        acc.add(t.key.clone(), Rational::from(&t.coeff * c));
                    }
                }
                Ok(acc.finish(vars))
            }
        }
    }

    pub fn mul(&self, o: &Expr) -> Result<Expr> {
        self.check_compatible(o)?;
        if self.is_zero() || o.is_zero() {
            return Ok(Expr::zero(&self.vars));
        }
        let (small, large) = if self.len() <= o.len() { (self, o) } else { (o, self) };
        if small.len() == 1 && !(small.has_trig() && large.has_trig()) {
            let s = &small.terms[0];
            let terms = large
                .terms
                .iter()
                .map(|t| {
                    let trig = t.key.trig.clone().or_else(|| s.key.trig.clone());
                    Term {
                        coeff: Rational::from(&t.coeff * &s.coeff),
                        key: t.key.mul_plain(&s.key, trig),
                    }
                })
                .collect();
            return Ok(Expr::from_unsorted_unique(&self.vars, terms));
        }

        // Scale both operands to integer coefficients, accumulate integer
        // products in units of one half, divide once at the end.
        let (la, ia) = integer_scaled(&self.terms);
        let (lb, ib) = integer_scaled(&o.terms);
        let halves = self.has_trig() && o.has_trig();
        let mut acc: FxHashMap<TermKey, Integer> =
            FxHashMap::with_capacity_and_hasher(self.len() * o.len() / 4 + 16, Default::default());
        let mut prod = Integer::new();
        for (ta, ca) in self.terms.iter().zip(&ia) {
            for (tb, cb) in o.terms.iter().zip(&ib) {
                prod.assign(ca * cb);
                ta.key.mul_into(&tb.key, |key, w| {
                    let e = acc.entry(key).or_default();
                    match (halves, w) {
                        (false, _) | (true, 1) => *e += &prod,
                        (true, -1) => *e -= &prod,
                        (true, 2) => {
                            *e += &prod;
                            *e += &prod;
                        }
                        (true, -2) => {
                            *e -= &prod;
                            *e -= &prod;
                        }
                        _ => unreachable!(),
                    }
                });
            }
        }
        let mut den = la * lb;
        if halves {
            den *= 2u32;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(key, c)| Term {
                coeff: Rational::from((c, den.clone())),
                key,
            })
            .collect();
        Ok(Expr::from_unsorted_unique(&self.vars, terms))
    }

    pub fn pow(&self, n: u32) -> Expr {
        let mut result = Expr::one(&self.vars);
        for _ in 0..n {
            result = result.mul(self).expect("same variables");
        }
        result
    }

    pub fn differentiate(&self, wrt: Wrt) -> Expr {
        match wrt {
            Wrt::T => {
                // Lowering every t power by one preserves the key order.
                let terms = self
                    .terms
                    .iter()
                    .filter(|t| t.key.t > 0)
                    .map(|t| {
                        let mut key = t.key.clone();
                        key.t -= 1;
                        Term {
                            coeff: Rational::from(&t.coeff * t.key.t),
                            key,
                        }
                    })
                    .collect();
                Expr {
                    vars: self.vars.clone(),
                    terms,
                }
            }
            Wrt::Var(i) => {
                assert!(i < self.vars.len(), "variable id out of range");
                let mut acc = Accumulator::with_capacity(2 * self.len());
                for t in &self.terms {
                    let e = t.key.exponent(i);
                    let g = t.key.gauss(i);
                    if e > 0 {
                        let mut key = t.key.clone();
                        key.set_exponent(i, e - 1);
                        acc.add(key, Rational::from(&t.coeff * e));
                    }
                    if g > 0 {
                        let mut key = t.key.clone();
                        key.set_exponent(i, e + 1);
                        acc.add(key, Rational::from(&t.coeff * (-4 * g as i64)));
                    }
                    if let Some(atom) = &t.key.trig {
                        let k = atom.arg().coeffs()[i];
                        if k != 0 {
                            let mut key = t.key.clone();
                            let (kind, sign) = match atom.kind() {
                                TrigKind::Sin => (TrigKind::Cos, 1),
                                TrigKind::Cos => (TrigKind::Sin, -1),
                            };
                            key.trig = Some(atom.with_kind(kind));
                            acc.add(key, Rational::from(&t.coeff * (sign * k)));
                        }
                    }
                }
                acc.finish(&self.vars)
            }
        }
    }

    pub fn diff_var(&self, name: &str) -> Result<Expr> {
        Ok(self.differentiate(Wrt::Var(self.vars.require(name)?)))
    }

    /// `int_anchor^t self(z) dz`.
    pub fn integrate_t(&self, anchor: &Rational) -> Expr {
        let mut acc = Accumulator::with_capacity(2 * self.len());
        for t in &self.terms {
            let k1 = t.key.t + 1;
            let c = Rational::from(&t.coeff / k1);
            if *anchor != 0 {
                let mut key0 = t.key.clone();
                key0.t = 0;
                acc.add(key0, -(&c * Rational::from(anchor.pow(k1))));
            }
            let mut key = t.key.clone();
            key.t = k1;
            acc.add(key, c);
        }
        acc.finish(&self.vars)
    }

    /// The t-free expression `self(t = value)`.
    pub fn substitute_t(&self, value: &Rational) -> Expr {
        let mut acc = Accumulator::with_capacity(self.len());
        for t in &self.terms {
            let mut key = t.key.clone();
            let k = key.t;
            key.t = 0;
            let c = if k == 0 {
                t.coeff.clone()
            } else {
                &t.coeff * Rational::from(value.pow(k))
            };
            acc.add(key, c);
        }
        acc.finish(&self.vars)
    }

    /// Exact integral over `[t0,t1] x prod [a_i,b_i]`. Only polynomial
    /// integrands (no trig or Gauss atoms) are admissible.
    pub fn integrate_box(&self, t: (&Rational, &Rational), x: &[(Rational, Rational)]) -> Result<Rational> {
        if x.len() != self.vars.len() {
            return Err(Error::Index {
                what: "integration box",
                index: x.len(),
                len: self.vars.len(),
            });
        }
        if !self.is_monomial_only() {
            return Err(Error::Unsupported(
                "exact box integration needs a polynomial integrand".into(),
            ));
        }
        let antider = |lo: &Rational, hi: &Rational, k: u32| -> Rational {
            let k1 = k + 1;
            (Rational::from(hi.pow(k1)) - Rational::from(lo.pow(k1))) / k1
        };
        let mut total = Rational::new();
        for term in &self.terms {
            let mut v = term.coeff.clone() * antider(t.0, t.1, term.key.t);
            for (i, (a, b)) in x.iter().enumerate() {
                v *= antider(a, b, term.key.exponent(i));
            }
            total += v;
        }
        Ok(total)
    }

    pub(crate) fn fmt_term(&self, term: &Term, first: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let negative = term.coeff < 0;
        match (first, negative) {
            (true, true) => write!(f, "-")?,
            (true, false) => {}
            (false, true) => write!(f, " - ")?,
            (false, false) => write!(f, " + ")?,
        }
        let mag = Rational::from(term.coeff.abs_ref());
        let key = &term.key;
        let mut factors: Vec<String> = Vec::new();
        match key.t {
            0 => {}
            1 => factors.push("t".into()),
            k => factors.push(format!("t^{k}")),
        }
        let n = self.vars.len();
        for v in 0..n {
            match key.exponent(v) {
                0 => {}
                1 => factors.push(self.vars.name(v).to_string()),
                e => factors.push(format!("{}^{e}", self.vars.name(v))),
            }
        }
        for v in 0..n {
            let g = key.gauss(v);
            if g > 0 {
                factors.push(format!("exp(-{}*{}^2)", 2 * g, self.vars.name(v)));
            }
        }
        if let Some(a) = &key.trig {
            factors.push(TrigDisplay(a, &self.vars).to_string());
        }
        if factors.is_empty() {
            write!(f, "{mag}")
        } else if mag == 1 {
            write!(f, "{}", factors.join("*"))
        } else {
            write!(f, "{mag}*{}", factors.join("*"))
        }
    }
}

struct TrigDisplay<'a>(&'a super::trig::TrigAtom, &'a VarSet);

impl fmt::Display for TrigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt_with(self.1, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            self.fmt_term(t, i == 0, f)?;
        }
        Ok(())
    }
}

fn check_var(var: usize, n: usize) -> Result<()> {
    if var < n {
        Ok(())
    } else {
        Err(Error::Index {
            what: "variable id",
            index: var,
            len: n,
        })
    }
}

fn integer_scaled(terms: &[Term]) -> (Integer, Vec<Integer>) {
    let l = denominator_lcm(terms.iter().map(|t| &t.coeff));
    let ints = terms
        .iter()
        .map(|t| {
            let mut v = Integer::from(&l / t.coeff.denom());
            v *= t.coeff.numer();
            v
        })
        .collect();
    (l, ints)
}

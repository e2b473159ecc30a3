use rug::Rational;
use smallvec::SmallVec;

use super::trig::{trig_product, TrigAtom, TrigCanon};

/// One multiplicative factor of a term, as exposed to callers and to JSON.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Atom {
    /// `x_var ^ exp`
    Monomial { var: usize, exp: u32 },
    Trig(TrigAtom),
    /// `exp(-2 * x_var^2) ^ mult`
    Gauss { var: usize, mult: u32 },
}

pub(crate) type Powers = SmallVec<[u16; 8]>;

/// The non-coefficient part of a term: `t^k`, per-variable monomial and Gauss
/// exponents, and at most one trig atom. Two terms with equal keys are like terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermKey {
    pub(crate) t: u32,
    /// `[x_0 .. x_{n-1} exponents, gauss_0 .. gauss_{n-1} multiplicities]`
    pub(crate) powers: Powers,
    pub(crate) trig: Option<TrigAtom>,
}

impl TermKey {
    pub fn one(nvars: usize) -> Self {
        Self {
            t: 0,
            powers: SmallVec::from_elem(0, 2 * nvars),
            trig: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.powers.len() / 2
    }

    pub fn t_power(&self) -> u32 {
        self.t
    }

    pub fn exponent(&self, var: usize) -> u32 {
        self.powers[var] as u32
    }

    pub fn gauss(&self, var: usize) -> u32 {
        self.powers[self.nvars() + var] as u32
    }

    pub fn trig(&self) -> Option<&TrigAtom> {
        self.trig.as_ref()
    }

    pub fn is_monomial_only(&self) -> bool {
        self.trig.is_none() && self.powers[self.nvars()..].iter().all(|&g| g == 0)
    }

    /// Atoms in canonical order: monomials by variable, Gauss factors by variable, then trig.
    pub fn atoms(&self) -> Vec<Atom> {
        let n = self.nvars();
        let mut out = Vec::new();
        for v in 0..n {
            if self.powers[v] > 0 {
                out.push(Atom::Monomial { var: v, exp: self.powers[v] as u32 });
            }
        }
        for v in 0..n {
            if self.powers[n + v] > 0 {
                out.push(Atom::Gauss { var: v, mult: self.powers[n + v] as u32 });
            }
        }
        if let Some(a) = &self.trig {
            out.push(Atom::Trig(a.clone()));
        }
        out
    }

    pub(crate) fn set_exponent(&mut self, var: usize, exp: u32) {
        self.powers[var] = to_u16(exp);
    }

    pub(crate) fn set_gauss(&mut self, var: usize, mult: u32) {
        let n = self.nvars();
        self.powers[n + var] = to_u16(mult);
    }

    pub(crate) fn set_t(&mut self, t: u32) {
        self.t = t;
    }

    /// Product of the non-trig parts, with `trig` as the trig slot.
    pub(crate) fn mul_plain(&self, o: &TermKey, trig: Option<TrigAtom>) -> TermKey {
        TermKey {
            t: self.t + o.t,
            powers: self
                .powers
                .iter()
                .zip(o.powers.iter())
                .map(|(&a, &b)| to_u16(a as u32 + b as u32))
                .collect(),
            trig,
        }
    }

    /// Expands `self * o` into canonical keys with weights in units of one half:
    /// `2` for a full product, `+1`/`-1` for a half-weight product-to-sum branch.
    pub(crate) fn mul_into(&self, o: &TermKey, mut emit: impl FnMut(TermKey, i32)) {
        match (&self.trig, &o.trig) {
            (None, None) => emit(self.mul_plain(o, None), 2),
            (Some(a), None) | (None, Some(a)) => emit(self.mul_plain(o, Some(a.clone())), 2),
            (Some(a), Some(b)) => {
                for branch in trig_product(a, b) {
                    match branch {
                        TrigCanon::Zero => {}
                        TrigCanon::Scalar(s) => emit(self.mul_plain(o, None), s),
                        TrigCanon::Atom(s, atom) => emit(self.mul_plain(o, Some(atom)), s),
                    }
                }
            }
        }
    }
}

fn to_u16(v: u32) -> u16 {
    u16::try_from(v).expect("exponent exceeds 65535")
}

/// `coeff * key`, with `coeff != 0` inside a canonical expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub key: TermKey,
}

//! Trigonometric atoms `sin(L)` / `cos(L)` with `L` an integer-linear form in the
//! spatial variables plus a phase `r + p*pi`, kept in a canonical representation.

use std::fmt;

use rug::Rational;

use super::vars::VarSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrigKind {
    Sin,
    Cos,
}

impl TrigKind {
    pub fn name(self) -> &'static str {
        match self {
            TrigKind::Sin => "sin",
            TrigKind::Cos => "cos",
        }
    }
}

/// The constant `rational + pi * pi_coeff`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Phase {
    pub rational: Rational,
    pub pi: Rational,
}

impl Phase {
    pub fn new(rational: impl Into<Rational>, pi: impl Into<Rational>) -> Self {
        Self {
            rational: rational.into(),
            pi: pi.into(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational == 0 && self.pi == 0
    }

    pub fn add(&self, o: &Phase) -> Phase {
        Phase {
            rational: Rational::from(&self.rational + &o.rational),
            pi: Rational::from(&self.pi + &o.pi),
        }
    }

    pub fn neg(&self) -> Phase {
        Phase {
            rational: Rational::from(-&self.rational),
            pi: Rational::from(-&self.pi),
        }
    }
}

/// `sum_i coeffs[i] * x_i + phase`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearArg {
    coeffs: Box<[i64]>,
    phase: Phase,
}

impl LinearArg {
    pub fn new(coeffs: Vec<i64>, phase: Phase) -> Self {
        Self {
            coeffs: coeffs.into_boxed_slice(),
            phase,
        }
    }

    pub fn constant(nvars: usize, phase: Phase) -> Self {
        Self::new(vec![0; nvars], phase)
    }

    /// `x_var + phase`.
    pub fn shifted_var(nvars: usize, var: usize, phase: Phase) -> Self {
        let mut c = vec![0; nvars];
        c[var] = 1;
        Self::new(c, phase)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn phase(&self) -> &Phase {
        &self.phase
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn add(&self, o: &LinearArg) -> LinearArg {
        LinearArg {
            coeffs: self.coeffs.iter().zip(o.coeffs.iter()).map(|(a, b)| a + b).collect(),
            phase: self.phase.add(&o.phase),
        }
    }

    pub fn sub(&self, o: &LinearArg) -> LinearArg {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> LinearArg {
        LinearArg {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            phase: self.phase.neg(),
        }
    }

    pub fn with_phase_added(&self, p: &Phase) -> LinearArg {
        LinearArg {
            coeffs: self.coeffs.clone(),
            phase: self.phase.add(p),
        }
    }

    pub(crate) fn fmt_with(&self, vars: &VarSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut sep = |f: &mut fmt::Formatter<'_>, negative: bool| -> fmt::Result {
            let r = match (first, negative) {
                (true, true) => write!(f, "-"),
                (true, false) => Ok(()),
                (false, true) => write!(f, " - "),
                (false, false) => write!(f, " + "),
            };
            first = false;
            r
        };
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            sep(f, c < 0)?;
            if c.abs() != 1 {
                write!(f, "{}*", c.unsigned_abs())?;
            }
            write!(f, "{}", vars.name(i))?;
        }
        if self.phase.rational != 0 {
            sep(f, self.phase.rational < 0)?;
            write!(f, "{}", Rational::from(self.phase.rational.abs_ref()))?;
        }
        if self.phase.pi != 0 {
            sep(f, self.phase.pi < 0)?;
            let p = Rational::from(self.phase.pi.abs_ref());
            if p == 1 {
                write!(f, "pi")?;
            } else {
                write!(f, "{p}*pi")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// A canonical `sin`/`cos` atom. Construct through [`canonical_trig`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrigAtom {
    kind: TrigKind,
    arg: LinearArg,
}

impl TrigAtom {
    pub fn kind(&self) -> TrigKind {
        self.kind
    }

    pub fn arg(&self) -> &LinearArg {
        &self.arg
    }

    /// Same argument, other function. Canonicality of the argument does not depend on the kind
    /// as long as the argument is not constant.
    pub(crate) fn with_kind(&self, kind: TrigKind) -> TrigAtom {
        debug_assert!(!self.arg.is_constant());
        TrigAtom {
            kind,
            arg: self.arg.clone(),
        }
    }

    pub(crate) fn fmt_with(&self, vars: &VarSet, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.kind.name())?;
        self.arg.fmt_with(vars, f)?;
        write!(f, ")")
    }
}

/// Result of canonicalising `kind(arg)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TrigCanon {
    Zero,
    /// `sign * 1`.
    Scalar(i32),
    /// `sign * atom`.
    Atom(i32, TrigAtom),
}

impl TrigCanon {
    fn negated(self) -> TrigCanon {
        match self {
            TrigCanon::Zero => TrigCanon::Zero,
            TrigCanon::Scalar(s) => TrigCanon::Scalar(-s),
            TrigCanon::Atom(s, a) => TrigCanon::Atom(-s, a),
        }
    }
}

/// Canonical form: the leading non-zero variable coefficient is positive (for a
/// constant argument the rational part is non-negative), the pi part lies in
/// `[0, 1/2)`, and `sin(0)`, `cos(0)` collapse to scalars.
pub fn canonical_trig(kind: TrigKind, arg: LinearArg) -> TrigCanon {
    let mut kind = kind;
    let mut sign = 1;
    let mut arg = arg;

    let leading_negative = match arg.coeffs.iter().find(|&&c| c != 0) {
        Some(&c) => c < 0,
        None => arg.phase.rational < 0,
    };
    if leading_negative {
        arg = arg.neg();
        if kind == TrigKind::Sin {
            sign = -sign;
        }
    }

    // Reduce the pi part modulo 2.
    let half_turns = Rational::from(&arg.phase.pi / 2u32).floor();
    arg.phase.pi -= half_turns * 2u32;

    // Shift by pi/2 until the pi part is below 1/2.
    let half = Rational::from((1, 2));
    while arg.phase.pi >= half {
        arg.phase.pi -= &half;
        match kind {
            TrigKind::Sin => kind = TrigKind::Cos,
            TrigKind::Cos => {
                kind = TrigKind::Sin;
                sign = -sign;
            }
        }
    }

    if arg.is_constant() && arg.phase.is_zero() {
        return match kind {
            TrigKind::Sin => TrigCanon::Zero,
            TrigKind::Cos => TrigCanon::Scalar(sign),
        };
    }
    TrigCanon::Atom(sign, TrigAtom { kind, arg })
}

/// Product-to-sum: `a * b = 1/2 * (first) + 1/2 * (second)`.
pub fn trig_product(a: &TrigAtom, b: &TrigAtom) -> [TrigCanon; 2] {
    let diff = a.arg.sub(&b.arg);
    let sum = a.arg.add(&b.arg);
    use TrigKind::*;
    match (a.kind, b.kind) {
        (Sin, Sin) => [canonical_trig(Cos, diff), canonical_trig(Cos, sum).negated()],
        (Cos, Cos) => [canonical_trig(Cos, diff), canonical_trig(Cos, sum)],
        (Sin, Cos) => [canonical_trig(Sin, sum), canonical_trig(Sin, diff)],
        (Cos, Sin) => [canonical_trig(Sin, sum), canonical_trig(Sin, diff).negated()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arg(c: &[i64], r: (i64, i64), p: (i64, i64)) -> LinearArg {
        LinearArg::new(c.to_vec(), Phase::new(Rational::from(r), Rational::from(p)))
    }

    #[test]
    fn sign_normalisation() {
        match canonical_trig(TrigKind::Sin, arg(&[-1], (-1, 1), (0, 1))) {
            TrigCanon::Atom(s, a) => {
                assert_eq!(s, -1);
                assert_eq!(a.arg(), &arg(&[1], (1, 1), (0, 1)));
            }
            other => panic!("{other:?}"),
        }
        match canonical_trig(TrigKind::Cos, arg(&[0, -2], (3, 1), (0, 1))) {
            TrigCanon::Atom(s, a) => {
                assert_eq!(s, 1);
                assert_eq!(a.arg(), &arg(&[0, 2], (-3, 1), (0, 1)));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quarter_turn_rotation() {
        // sin(x + pi/2) = cos x
        match canonical_trig(TrigKind::Sin, arg(&[1], (0, 1), (1, 2))) {
            TrigCanon::Atom(1, a) => assert_eq!(a.kind(), TrigKind::Cos),
            other => panic!("{other:?}"),
        }
        // cos(x + 3pi/2) = sin x
        match canonical_trig(TrigKind::Cos, arg(&[1], (0, 1), (3, 2))) {
            TrigCanon::Atom(1, a) => {
                assert_eq!(a.kind(), TrigKind::Sin);
                assert!(a.arg().phase().is_zero());
            }
            other => panic!("{other:?}"),
        }
        // sin(x - 7pi/2) = sin(x + pi/2) = cos x
        match canonical_trig(TrigKind::Sin, arg(&[1], (0, 1), (-7, 2))) {
            TrigCanon::Atom(1, a) => assert_eq!(a.kind(), TrigKind::Cos),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_arguments() {
        assert_eq!(canonical_trig(TrigKind::Sin, arg(&[0], (0, 1), (1, 1))), TrigCanon::Zero);
        assert_eq!(canonical_trig(TrigKind::Cos, arg(&[0], (0, 1), (1, 1))), TrigCanon::Scalar(-1));
        assert_eq!(canonical_trig(TrigKind::Sin, arg(&[0], (0, 1), (1, 2))), TrigCanon::Scalar(1));
    }

    #[test]
    fn canonicalisation_is_idempotent() {
        for (kind, a) in [
            (TrigKind::Sin, arg(&[-3, 2], (5, 7), (9, 4))),
            (TrigKind::Cos, arg(&[0, -1], (-1, 3), (-5, 3))),
            (TrigKind::Cos, arg(&[0, 0], (-2, 1), (1, 3))),
        ] {
            if let TrigCanon::Atom(_, atom) = canonical_trig(kind, a) {
                match canonical_trig(atom.kind(), atom.arg().clone()) {
                    TrigCanon::Atom(1, again) => assert_eq!(again, atom),
                    other => panic!("{other:?}"),
                }
            }
        }
    }
}

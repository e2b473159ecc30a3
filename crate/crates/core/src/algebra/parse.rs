//! Parser for the human-readable expression syntax produced by `Display`, e.g.
//! `1/2*t^2*theta - sin(x1 + x2 + 1) + 3*x*exp(-2*x^2) + cos(x + 1/2*pi)`.

use std::sync::Arc;

use rug::Rational;

use super::expr::Expr;
use super::rational::parse_rational;
use super::term::TermKey;
use super::trig::{LinearArg, Phase, TrigKind};
use super::vars::VarSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            out.push(Tok::Num(chars[start..i].iter().collect()));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
enum Ast {
    Num(Rational),
    Ident(String),
    Neg(Box<Ast>),
    Bin(char, Box<Ast>, Box<Ast>),
    Pow(Box<Ast>, u32),
    Call(String, Box<Ast>),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(Error::Parse(format!("expected `{op}` at token {}", self.pos)))
        }
    }

    fn sum(&mut self) -> Result<Ast> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('+') {
                lhs = Ast::Bin('+', Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('-') {
                lhs = Ast::Bin('-', Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Ast> {
        if self.eat('-') {
            Ok(Ast::Neg(Box::new(self.unary()?)))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.product()
        }
    }

    fn product(&mut self) -> Result<Ast> {
        let mut lhs = self.power()?;
        loop {
            if self.eat('*') {
                lhs = Ast::Bin('*', Box::new(lhs), Box::new(self.power()?));
            } else if self.eat('/') {
                lhs = Ast::Bin('/', Box::new(lhs), Box::new(self.power()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn power(&mut self) -> Result<Ast> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n
                        .parse()
                        .map_err(|_| Error::Parse(format!("exponent `{n}` is not a non-negative integer")))?;
                    Ok(Ast::Pow(Box::new(base), e))
                }
                _ => Err(Error::Parse("exponent must be an integer literal".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Ast> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Ast::Num(parse_rational(&n)?))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let arg = self.sum()?;
                    self.expect(')')?;
                    Ok(Ast::Call(name, Box::new(arg)))
                } else {
                    Ok(Ast::Ident(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(')')?;
                Ok(inner)
            }
            other => Err(Error::Parse(format!("unexpected token {other:?}"))),
        }
    }
}

/// Linear form `sum c_i x_i + r + p*pi` with rational coefficients.
#[derive(Clone)]
struct Linear {
    coeffs: Vec<Rational>,
    rational: Rational,
    pi: Rational,
}

impl Linear {
    fn zero(n: usize) -> Self {
        Self {
            coeffs: vec![Rational::new(); n],
            rational: Rational::new(),
            pi: Rational::new(),
        }
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0) && self.pi == 0
    }

    fn combine(mut self, o: &Linear, sign: i32) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(&o.coeffs) {
            *a += Rational::from(b * sign);
        }
        self.rational += Rational::from(&o.rational * sign);
        self.pi += Rational::from(&o.pi * sign);
        self
    }

    fn scale(mut self, k: &Rational) -> Self {
        for a in self.coeffs.iter_mut() {
            *a *= k;
        }
        self.rational *= k;
        self.pi *= k;
        self
    }
}

fn lower_linear(ast: &Ast, vars: &VarSet) -> Result<Linear> {
    let n = vars.len();
    Ok(match ast {
        Ast::Num(r) => {
            let mut l = Linear::zero(n);
            l.rational = r.clone();
            l
        }
        Ast::Ident(name) if name == "pi" => {
            let mut l = Linear::zero(n);
            l.pi = Rational::from(1);
            l
        }
        Ast::Ident(name) if name == "t" => {
            return Err(Error::Parse("trig arguments may not depend on t".into()))
        }
        Ast::Ident(name) => {
            let mut l = Linear::zero(n);
            l.coeffs[vars.require(name)?] = Rational::from(1);
            l
        }
        Ast::Neg(a) => lower_linear(a, vars)?.scale(&Rational::from(-1)),
        Ast::Bin(op @ ('+' | '-'), a, b) => {
            let sign = if *op == '+' { 1 } else { -1 };
            lower_linear(a, vars)?.combine(&lower_linear(b, vars)?, sign)
        }
        Ast::Bin('*', a, b) => {
            let (la, lb) = (lower_linear(a, vars)?, lower_linear(b, vars)?);
            if la.is_constant() {
                lb.scale(&la.rational)
            } else if lb.is_constant() {
                la.scale(&lb.rational)
            } else {
                return Err(Error::Parse("trig argument is not linear".into()));
            }
        }
        Ast::Bin('/', a, b) => {
            let lb = lower_linear(b, vars)?;
            if !lb.is_constant() || lb.rational == 0 {
                return Err(Error::Parse("division by a non-constant in trig argument".into()));
            }
            lower_linear(a, vars)?.scale(&Rational::from(lb.rational.recip_ref()))
        }
        _ => return Err(Error::Parse("unsupported construct in trig argument".into())),
    })
}

fn lower(ast: &Ast, vars: &Arc<VarSet>) -> Result<Expr> {
    Ok(match ast {
        Ast::Num(r) => Expr::constant(vars, r.clone()),
        Ast::Ident(name) if name == "t" => Expr::t(vars),
        Ast::Ident(name) if name == "pi" => {
            return Err(Error::Parse("pi may only appear inside sin/cos arguments".into()))
        }
        Ast::Ident(name) => Expr::var(vars, name)?,
        Ast::Neg(a) => lower(a, vars)?.neg(),
        Ast::Bin('+', a, b) => lower(a, vars)?.add(&lower(b, vars)?)?,
        Ast::Bin('-', a, b) => lower(a, vars)?.sub(&lower(b, vars)?)?,
        Ast::Bin('*', a, b) => lower(a, vars)?.mul(&lower(b, vars)?)?,
        Ast::Bin('/', a, b) => {
            let den = lower(b, vars)?;
            let c = den.constant_term();
            if den.len() != 1 || c == 0 {
                return Err(Error::Parse("division is only allowed by a non-zero constant".into()));
            }
            lower(a, vars)?.scale(&Rational::from(c.recip_ref()))
        }
        Ast::Bin(op, _, _) => return Err(Error::Parse(format!("unknown operator `{op}`"))),
        Ast::Pow(a, e) => lower(a, vars)?.pow(*e),
        Ast::Call(f, arg) => match f.as_str() {
            "sin" | "cos" => {
                let l = lower_linear(arg, vars)?;
                let mut coeffs = Vec::with_capacity(l.coeffs.len());
                for c in &l.coeffs {
                    if *c.denom() != 1 {
                        return Err(Error::Parse("trig variable coefficients must be integers".into()));
                    }
                    coeffs.push(c.numer().to_i64().ok_or_else(|| {
                        Error::Parse("trig coefficient out of range".into())
                    })?);
                }
                let kind = if f == "sin" { TrigKind::Sin } else { TrigKind::Cos };
                Expr::trig(vars, kind, LinearArg::new(coeffs, Phase::new(l.rational, l.pi)))
            }
            "exp" => lower_gauss(&lower(arg, vars)?, vars)?,
            other => return Err(Error::Parse(format!("unknown function `{other}`"))),
        },
    })
}

/// `exp(-2c * x^2)` with `c` a positive integer.
fn lower_gauss(arg: &Expr, vars: &Arc<VarSet>) -> Result<Expr> {
    let bad = || Error::Parse("exp() only accepts -2c*x^2 with c a positive integer".into());
    if arg.len() != 1 {
        return Err(bad());
    }
    let term = &arg.terms()[0];
    let n = vars.len();
    let var = (0..n).find(|&v| term.key.exponent(v) == 2).ok_or_else(bad)?;
    let mut expected = TermKey::one(n);
    expected.set_exponent(var, 2);
    if term.key != expected {
        return Err(bad());
    }
    let mult = Rational::from(&term.coeff / -2);
    if *mult.denom() != 1 || mult <= 0 {
        return Err(bad());
    }
    let mult = mult.numer().to_u32().ok_or_else(bad)?;
    Ok(Expr::gauss(vars, var, mult))
}

/// Parses an expression over `vars`. Any unknown identifier is an error.
pub fn parse_expr(src: &str, vars: &Arc<VarSet>) -> Result<Expr> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let ast = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    lower(&ast, vars)
}

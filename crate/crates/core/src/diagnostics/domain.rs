use std::fmt;
use std::str::FromStr;

use rug::float::Constant;
use rug::{Float, Rational};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::rational::{format_rational, parse_rational};
use crate::algebra::VarSet;
use crate::error::{Error, Result};

/// An interval endpoint `rational + pi_coeff * pi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub rational: Rational,
    pub pi: Rational,
}

impl Bound {
    pub fn rational(v: impl Into<Rational>) -> Self {
        Self {
            rational: v.into(),
            pi: Rational::new(),
        }
    }

    pub fn pi_multiple(v: impl Into<Rational>) -> Self {
        Self {
            rational: Rational::new(),
            pi: v.into(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        (self.pi == 0).then_some(&self.rational)
    }

    pub fn to_float(&self, prec: u32) -> Float {
        let pi = Float::with_val(prec, Constant::Pi);
        Float::with_val(prec, &self.rational) + pi * &self.pi
    }

    /// Accepts `p`, `p/q`, decimals, `pi`, `-pi`, `c*pi` and `c pi`.
    pub fn parse(src: &str) -> Result<Self> {
        let s = src.trim();
        let Some(head) = s.strip_suffix("pi") else {
            return Ok(Self::rational(parse_rational(s)?));
        };
        let head = head.trim().trim_end_matches('*').trim();
        let coeff = match head {
            "" | "+" => Rational::from(1),
            "-" => Rational::from(-1),
            h => parse_rational(h).map_err(|_| Error::Parse(format!("bad bound `{src}`")))?,
        };
        Ok(Self::pi_multiple(coeff))
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.rational == 0, self.pi == 0) {
            (_, true) => write!(f, "{}", format_rational(&self.rational)),
            (true, false) if self.pi == 1 => write!(f, "pi"),
            (true, false) if self.pi == -1 => write!(f, "-pi"),
            (true, false) => write!(f, "{}*pi", format_rational(&self.pi)),
            (false, false) => write!(f, "{}+{}*pi", format_rational(&self.rational), format_rational(&self.pi)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Bound,
    pub hi: Bound,
}

impl Interval {
    pub fn new(lo: Bound, hi: Bound) -> Self {
        Self { lo, hi }
    }

    pub fn unit() -> Self {
        Self::new(Bound::rational(0), Bound::rational(1))
    }

    /// `[-pi, pi]`.
    pub fn period() -> Self {
        Self::new(Bound::pi_multiple(-1), Bound::pi_multiple(1))
    }

    pub fn as_rational(&self) -> Option<(Rational, Rational)> {
        Some((self.lo.as_rational()?.clone(), self.hi.as_rational()?.clone()))
    }

    pub fn length(&self, prec: u32) -> Float {
        self.hi.to_float(prec) - self.lo.to_float(prec)
    }

    pub fn parse(src: &str) -> Result<Self> {
        let (a, b) = src
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("interval `{src}` must look like `lo:hi`")))?;
        Ok(Self::new(Bound::parse(a)?, Bound::parse(b)?))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

/// Integration region `t x x_1 x ... x x_d`. With `normalize`, spatial
/// integrals are divided by the spatial volume.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    pub t: Interval,
    pub x: Vec<Interval>,
    pub normalize: bool,
}

impl Domain {
    pub fn new(t: Interval, x: Vec<Interval>, normalize: bool) -> Self {
        Self { t, x, normalize }
    }

    /// Applies an override such as `t=0:1,x=-pi:pi,*=0:2,normalized` on top
    /// of `self`. Keys are `t`, a variable name, or `*` for every spatial
    /// variable; the bare words `normalized` and `raw` set the flag.
    pub fn with_overrides(&self, spec: &str, vars: &VarSet) -> Result<Domain> {
        let mut out = self.clone();
        if out.x.len() != vars.len() {
            return Err(Error::Domain(format!(
                "domain has {} spatial intervals but the problem has {} variables",
                out.x.len(),
                vars.len()
            )));
        }
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "normalized" => out.normalize = true,
                "raw" => out.normalize = false,
                _ => {
                    let (key, range) = item
                        .split_once('=')
                        .ok_or_else(|| Error::Parse(format!("domain entry `{item}` must be key=lo:hi")))?;
                    let iv = Interval::parse(range)?;
                    match key.trim() {
                        "t" => out.t = iv,
                        "*" => out.x.iter_mut().for_each(|x| *x = iv.clone()),
                        name => out.x[vars.require(name)?] = iv,
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn spatial_volume(&self, prec: u32) -> Float {
        self.x
            .iter()
            .fold(Float::with_val(prec, 1), |acc, iv| acc * iv.length(prec))
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x: Vec<String> = self.x.iter().map(|i| i.to_string()).collect();
        write!(
            f,
            "t in {}, x in [{}], {}",
            self.t,
            x.join(" x "),
            if self.normalize { "normalized" } else { "raw" }
        )
    }
}

impl FromStr for Bound {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Bound::parse(s)
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            t: String,
            x: Vec<String>,
            normalize: bool,
        }
        Repr {
            t: self.t.to_string(),
            x: self.x.iter().map(|i| i.to_string()).collect(),
            normalize: self.normalize,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Domain {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            t: String,
            x: Vec<String>,
            normalize: bool,
        }
        let r = Repr::deserialize(d)?;
        let conv = |s: &str| Interval::parse(s).map_err(serde::de::Error::custom);
        Ok(Domain {
            t: conv(&r.t)?,
            x: r.x.iter().map(|s| conv(s)).collect::<std::result::Result<_, _>>()?,
            normalize: r.normalize,
        })
    }
}

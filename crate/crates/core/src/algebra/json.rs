//! JSON form of expressions. Deserialisation re-canonicalises its input.

use std::collections::BTreeMap;
use std::sync::Arc;

use rug::Rational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::expr::Expr;
use super::rational::parse_rational;
use super::term::Atom;
use super::trig::{canonical_trig, LinearArg, Phase, TrigCanon, TrigKind};
use super::vars::VarSet;
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExprJson {
    vars: Vec<String>,
    terms: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    coeff: String,
    #[serde(default)]
    t_pow: u32,
    #[serde(default)]
    atoms: Vec<AtomJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum AtomJson {
    Monomial { var: String, exp: u32 },
    Gauss { var: String, mult: u32 },
    Sin { arg: ArgJson },
    Cos { arg: ArgJson },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArgJson {
    #[serde(default)]
    coeffs: BTreeMap<String, i64>,
    #[serde(default = "zero_string")]
    rational: String,
    #[serde(default = "zero_string")]
    pi: String,
}

fn zero_string() -> String {
    "0".into()
}

fn to_json(e: &Expr) -> ExprJson {
    let vars = e.vars();
    let terms = e
        .terms()
        .iter()
        .map(|t| TermJson {
            coeff: t.coeff.to_string(),
            t_pow: t.key.t_power(),
            atoms: t
                .key
                .atoms()
                .into_iter()
                .map(|a| match a {
                    Atom::Monomial { var, exp } => AtomJson::Monomial {
                        var: vars.name(var).into(),
                        exp,
                    },
                    Atom::Gauss { var, mult } => AtomJson::Gauss {
                        var: vars.name(var).into(),
                        mult,
                    },
                    Atom::Trig(atom) => {
                        let arg = ArgJson {
                            coeffs: atom
                                .arg()
                                .coeffs()
                                .iter()
                                .enumerate()
                                .filter(|(_, c)| **c != 0)
                                .map(|(i, c)| (vars.name(i).to_string(), *c))
                                .collect(),
                            rational: atom.arg().phase().rational.to_string(),
                            pi: atom.arg().phase().pi.to_string(),
                        };
                        match atom.kind() {
                            TrigKind::Sin => AtomJson::Sin { arg },
                            TrigKind::Cos => AtomJson::Cos { arg },
                        }
                    }
                })
                .collect(),
        })
        .collect();
    ExprJson {
        vars: vars.names().to_vec(),
        terms,
    }
}

fn from_json(j: ExprJson, universe: Option<&Arc<VarSet>>) -> Result<Expr> {
    let vars = match universe {
        Some(u) => {
            if u.names() != j.vars.as_slice() {
                return Err(Error::VariableMismatch {
                    left: u.to_string(),
                    right: format!("[{}]", j.vars.join(", ")),
                });
            }
            u.clone()
        }
        None => VarSet::new(j.vars.clone())?,
    };
    let n = vars.len();
    let mut parts = Vec::with_capacity(j.terms.len());
    for t in j.terms {
        let coeff: Rational = parse_rational(&t.coeff)?;
        let mut atoms = Vec::with_capacity(t.atoms.len());
        let mut sign = 1;
        for a in t.atoms {
            match a {
                AtomJson::Monomial { var, exp } => atoms.push(Atom::Monomial {
                    var: vars.require(&var)?,
                    exp,
                }),
                AtomJson::Gauss { var, mult } => atoms.push(Atom::Gauss {
                    var: vars.require(&var)?,
                    mult,
                }),
                AtomJson::Sin { arg } => push_trig(&mut atoms, &mut sign, TrigKind::Sin, arg, &vars, n)?,
                AtomJson::Cos { arg } => push_trig(&mut atoms, &mut sign, TrigKind::Cos, arg, &vars, n)?,
            }
        }
        if sign == 0 {
            continue;
        }
        parts.push(Expr::from_atoms(&vars, coeff * sign, t.t_pow, &atoms)?);
    }
    let mut total = Expr::zero(&vars);
    for p in &parts {
        total = total.add(p)?;
    }
    Ok(total)
}

fn push_trig(
    atoms: &mut Vec<Atom>,
    sign: &mut i32,
    kind: TrigKind,
    arg: ArgJson,
    vars: &VarSet,
    n: usize,
) -> Result<()> {
    let mut coeffs = vec![0i64; n];
    for (name, c) in arg.coeffs {
        coeffs[vars.require(&name)?] = c;
    }
    let phase = Phase::new(parse_rational(&arg.rational)?, parse_rational(&arg.pi)?);
    match canonical_trig(kind, LinearArg::new(coeffs, phase)) {
        TrigCanon::Zero => *sign = 0,
        TrigCanon::Scalar(s) => *sign *= s,
        TrigCanon::Atom(s, atom) => {
            *sign *= s;
            atoms.push(Atom::Trig(atom));
        }
    }
    Ok(())
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_json(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ExprJson::deserialize(d)?;
        from_json(j, None).map_err(serde::de::Error::custom)
    }
}

impl Expr {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(to_json(self)).expect("expression JSON")
    }

    /// Decodes into an existing variable universe, so the result shares it.
    pub fn from_json_value(v: serde_json::Value, vars: &Arc<VarSet>) -> Result<Expr> {
        let j: ExprJson = serde_json::from_value(v)?;
        from_json(j, Some(vars))
    }
}

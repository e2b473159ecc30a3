//! Exact symbolic algebra: rational-coefficient sums of products of `t^k`,
//! variable monomials, Gauss factors `exp(-2 x^2)^c` and one trig atom.

mod eval;
mod expr;
mod json;
mod parse;
pub mod rational;
mod term;
mod trig;
mod vars;

pub use eval::{Evaluator, Real};
pub use expr::{symbolic_equal, Expr, Wrt};
pub use parse::parse_expr;
pub use rug::{Float, Integer, Rational};
pub use term::{Atom, Term, TermKey};
pub use trig::{canonical_trig, LinearArg, Phase, TrigAtom, TrigCanon, TrigKind};
pub use vars::VarSet;

//! Quadrature rules over a [`Domain`], selected by name at run time.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::domain::Domain;
use crate::algebra::Expr;
use crate::error::{Error, Result};

/// Largest number of tensor-product points a rule will visit.
pub const MAX_TENSOR_POINTS: u128 = 200_000_000;

/// A function of `(t, x)` that quadrature rules can sample.
pub trait Integrand: Sync {
    /// The integrand as an expression, when it is one. Only the symbolic rule asks.
    fn symbolic(&self) -> Option<Result<Expr>> {
        None
    }
    fn eval_f64(&self, t: f64, x: &[f64]) -> f64;
    fn eval_float(&self, t: &Float, x: &[Float]) -> Float;
}

/// Integrates over the full box (no normalisation) with `prec` bits; rules
/// use plain `f64` arithmetic when `prec <= 53`.
pub trait QuadratureRule: Send + Sync {
    fn spec(&self) -> String;
    fn integrate(&self, f: &dyn Integrand, domain: &Domain, prec: u32) -> Result<Float>;
}

pub struct SymbolicRule;

impl QuadratureRule for SymbolicRule {
    fn spec(&self) -> String {
        "symbolic".into()
    }

    fn integrate(&self, f: &dyn Integrand, domain: &Domain, prec: u32) -> Result<Float> {
        let expr = f
            .symbolic()
            .ok_or_else(|| Error::Config("symbolic quadrature needs an integrand in the term algebra".into()))??;
        let t = domain
            .t
            .as_rational()
            .ok_or_else(|| Error::Config("symbolic quadrature needs rational bounds".into()))?;
        let x = domain
            .x
            .iter()
            .map(|iv| iv.as_rational())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Config("symbolic quadrature needs rational bounds".into()))?;
        let value = expr.integrate_box((&t.0, &t.1), &x).map_err(|e| match e {
            Error::Unsupported(m) => Error::Config(format!("symbolic quadrature: {m}")),
            other => other,
        })?;
        Ok(Float::with_val(prec, &value))
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration at `prec` bits and cached.
pub fn gauss_legendre(n: usize, prec: u32) -> Arc<(Vec<Float>, Vec<Float>)> {
    type Nodes = Arc<(Vec<Float>, Vec<Float>)>;
    static CACHE: OnceLock<Mutex<FxHashMap<(usize, u32), Nodes>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("node cache").get(&(n, prec)) {
        return v.clone();
    }
    let v = Arc::new(compute_gauss_legendre(n, prec));
    cache.lock().expect("node cache").insert((n, prec), v.clone());
    v
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: &Float, wp: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(wp, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let a = Float::with_val(wp, x * &p1) * (2 * k - 1) as u32;
        let p2 = (a - Float::with_val(wp, &p0 * (k - 1) as u32)) / k as u32;
        p0 = std::mem::replace(&mut p1, p2);
    }
    let denom = Float::with_val(wp, x.square_ref()) - 1u32;
    let dp = (Float::with_val(wp, x * &p1) - &p0) * n as u32 / denom;
    (p1, dp)
}

fn compute_gauss_legendre(n: usize, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let wp = prec + 64;
    let pi = Float::with_val(wp, Constant::Pi);
    let tol = Float::with_val(wp, 2).pow(-(prec as i32) - 16);
    let mut nodes = vec![Float::new(prec); n];
    let mut weights = vec![Float::new(prec); n];
    for i in 0..n.div_ceil(2) {
        let guess = Float::with_val(wp, &pi * (4 * i + 3) as u32) / (4 * n + 2) as u32;
        let mut x = guess.cos();
        for _ in 0..200 {
            let (p, dp) = legendre(n, &x, wp);
            let step = p / &dp;
            x -= &step;
            if step.abs() < tol {
                break;
            }
        }
        let (_, dp) = legendre(n, &x, wp);
        let one_minus = Float::with_val(wp, 1) - Float::with_val(wp, x.square_ref());
        let w = Float::with_val(wp, 2) / (one_minus * dp.square());
        nodes[i] = Float::with_val(prec, -&x);
        nodes[n - 1 - i] = Float::with_val(prec, &x);
        weights[i] = Float::with_val(prec, &w);
        weights[n - 1 - i] = Float::with_val(prec, &w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = Float::new(prec);
    }
    (nodes, weights)
}

pub struct TensorGauss {
    pub nodes: usize,
}

/// Nodes and weights of one axis mapped onto `[lo, hi]`.
fn axis(base: &(Vec<Float>, Vec<Float>), lo: &Float, hi: &Float, prec: u32) -> (Vec<Float>, Vec<Float>) {
    let half = Float::with_val(prec, hi - lo) / 2u32;
    let mid = Float::with_val(prec, hi + lo) / 2u32;
    let xs = base.0.iter().map(|z| Float::with_val(prec, z * &half) + &mid).collect();
    let ws = base.1.iter().map(|w| Float::with_val(prec, w * &half)).collect();
    (xs, ws)
}

impl QuadratureRule for TensorGauss {
    fn spec(&self) -> String {
        format!("tensor-gauss:{}", self.nodes)
    }

    fn integrate(&self, f: &dyn Integrand, domain: &Domain, prec: u32) -> Result<Float> {
        let n = self.nodes;
        if n == 0 {
            return Err(Error::Config("tensor-gauss needs at least one node".into()));
        }
        let dims = domain.x.len() + 1;
        if (n as u128).pow(dims as u32) > MAX_TENSOR_POINTS {
            return Err(Error::Config(format!(
                "tensor-gauss:{n} in {dims} dimensions is too many points; use quasi-random"
            )));
        }
        let base = gauss_legendre(n, prec.max(64));
        let ivs: Vec<_> = std::iter::once(&domain.t).chain(domain.x.iter()).collect();
        let axes: Vec<(Vec<Float>, Vec<Float>)> = ivs
            .iter()
            .map(|iv| axis(&base, &iv.lo.to_float(prec), &iv.hi.to_float(prec), prec))
            .collect();
        let inner = n.pow(dims as u32 - 1);
        let index = |mut k: usize, out: &mut [usize]| {
            for slot in out.iter_mut().rev() {
                *slot = k % n;
                k /= n;
            }
        };
        if prec <= 53 {
            let axes64: Vec<(Vec<f64>, Vec<f64>)> = axes
                .iter()
                .map(|(x, w)| (x.iter().map(Float::to_f64).collect(), w.iter().map(Float::to_f64).collect()))
                .collect();
            let partial: Vec<f64> = (0..n)
                .into_par_iter()
                .map(|it| {
                    let mut idx = vec![0; dims - 1];
                    let mut x = vec![0.0; dims - 1];
                    let mut s = 0.0;
                    for k in 0..inner {
                        index(k, &mut idx);
                        let mut w = 1.0;
                        for (d, &i) in idx.iter().enumerate() {
                            x[d] = axes64[d + 1].0[i];
                            w *= axes64[d + 1].1[i];
                        }
                        s += w * f.eval_f64(axes64[0].0[it], &x);
                    }
                    s * axes64[0].1[it]
                })
                .collect();
            return Ok(Float::with_val(prec, partial.iter().sum::<f64>()));
        }
        let partial: Vec<Float> = (0..n)
            .into_par_iter()
            .map(|it| {
                let mut idx = vec![0; dims - 1];
                let mut x = vec![Float::new(prec); dims - 1];
                let mut s = Float::new(prec);
                for k in 0..inner {
                    index(k, &mut idx);
                    let mut w = Float::with_val(prec, 1);
                    for (d, &i) in idx.iter().enumerate() {
                        x[d].clone_from(&axes[d + 1].0[i]);
                        w *= &axes[d + 1].1[i];
                    }
                    s += w * f.eval_float(&axes[0].0[it], &x);
                }
                s * &axes[0].1[it]
            })
            .collect();
        Ok(partial.into_iter().fold(Float::new(prec), |a, b| a + b))
    }
}

/// Halton points with a seeded Cranley-Patterson shift; the estimate is the
/// box volume times the sample mean.
pub struct QuasiRandom {
    pub samples: usize,
    pub seed: u64,
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131,
];

/// Radical inverse of `i` in `base`.
pub fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

impl QuasiRandom {
    /// Unit-cube points `0..samples` in `dims` dimensions.
    pub fn points(&self, dims: usize) -> Result<Vec<Vec<f64>>> {
        if dims > PRIMES.len() {
            return Err(Error::Config(format!("quasi-random supports at most {} dimensions", PRIMES.len())));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let shift: Vec<f64> = (0..dims).map(|_| rng.gen::<f64>()).collect();
        Ok((0..self.samples as u64)
            .map(|i| {
                (0..dims)
                    .map(|d| (radical_inverse(i + 1, PRIMES[d]) + shift[d]).fract())
                    .collect()
            })
            .collect())
    }
}

impl QuadratureRule for QuasiRandom {
    fn spec(&self) -> String {
        format!("quasi-random:{}:{}", self.samples, self.seed)
    }

    fn integrate(&self, f: &dyn Integrand, domain: &Domain, prec: u32) -> Result<Float> {
        if self.samples == 0 {
            return Err(Error::Config("quasi-random needs at least one sample".into()));
        }
        let ivs: Vec<_> = std::iter::once(&domain.t).chain(domain.x.iter()).collect();
        let lo: Vec<Float> = ivs.iter().map(|iv| iv.lo.to_float(prec)).collect();
        let len: Vec<Float> = ivs.iter().map(|iv| iv.length(prec)).collect();
        let volume = len.iter().fold(Float::with_val(prec, 1), |a, b| a * b);
        let pts = self.points(ivs.len())?;
        let total = if prec <= 53 {
            let lo: Vec<f64> = lo.iter().map(Float::to_f64).collect();
            let len: Vec<f64> = len.iter().map(Float::to_f64).collect();
            let vals: Vec<f64> = pts
                .par_iter()
                .map(|p| {
                    let y: Vec<f64> = p.iter().enumerate().map(|(d, u)| lo[d] + len[d] * u).collect();
                    f.eval_f64(y[0], &y[1..])
                })
                .collect();
            Float::with_val(prec, vals.iter().sum::<f64>())
        } else {
            let vals: Vec<Float> = pts
                .par_iter()
                .map(|p| {
                    let y: Vec<Float> = p
                        .iter()
                        .enumerate()
                        .map(|(d, u)| Float::with_val(prec, &len[d] * *u) + &lo[d])
                        .collect();
                    f.eval_float(&y[0], &y[1..])
                })
                .collect();
            vals.into_iter().fold(Float::new(prec), |a, b| a + b)
        };
        Ok(total * volume / self.samples as u64)
    }
}

/// The built-in rules as data, for configs and defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuadratureSpec {
    Symbolic,
    TensorGauss { nodes: usize },
    QuasiRandom { samples: usize, seed: u64 },
    /// Any other registered rule, as `name:arg:...`.
    Named(String),
}

impl QuadratureSpec {
    pub fn build(&self) -> Result<Box<dyn QuadratureRule>> {
        QuadratureRegistry::builtin().build(&self.to_string())
    }
}

impl fmt::Display for QuadratureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Symbolic => write!(f, "symbolic"),
            Self::TensorGauss { nodes } => write!(f, "tensor-gauss:{nodes}"),
            Self::QuasiRandom { samples, seed } => write!(f, "quasi-random:{samples}:{seed}"),
            Self::Named(s) => write!(f, "{s}"),
        }
    }
}

fn parse_arg<T: FromStr>(args: &[&str], i: usize, what: &str) -> Result<T> {
    args.get(i)
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} `{}`", args[i])))
}

/// Seed used when a quasi-random spec omits one.
pub const DEFAULT_SEED: u64 = 42;

impl FromStr for QuadratureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let args: Vec<&str> = parts.collect();
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!("`{name}` takes {n} argument(s), got `{s}`")))
            }
        };
        match name {
            "symbolic" => arity(0).map(|_| Self::Symbolic),
            "tensor-gauss" => {
                arity(1)?;
                Ok(Self::TensorGauss {
                    nodes: parse_arg(&args, 0, "node count")?,
                })
            }
            "quasi-random" => {
                if args.len() == 1 {
                    return Ok(Self::QuasiRandom {
                        samples: parse_arg(&args, 0, "sample count")?,
                        seed: DEFAULT_SEED,
                    });
                }
                arity(2)?;
                Ok(Self::QuasiRandom {
                    samples: parse_arg(&args, 0, "sample count")?,
                    seed: parse_arg(&args, 1, "seed")?,
                })
            }
            _ => Ok(Self::Named(s.trim().to_string())),
        }
    }
}

impl Serialize for QuadratureSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for QuadratureSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub type RuleFactory = fn(&QuadratureSpec) -> Result<Box<dyn QuadratureRule>>;

/// Quadrature rules keyed by the name before the first `:`.
pub struct QuadratureRegistry {
    entries: BTreeMap<String, RuleFactory>,
}

impl QuadratureRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("symbolic", |_| Ok(Box::new(SymbolicRule)));
        r.register("tensor-gauss", |s| match s {
            QuadratureSpec::TensorGauss { nodes } => Ok(Box::new(TensorGauss { nodes: *nodes })),
            _ => Err(Error::Config(format!("bad tensor-gauss spec `{s}`"))),
        });
        r.register("quasi-random", |s| match s {
            QuadratureSpec::QuasiRandom { samples, seed } => Ok(Box::new(QuasiRandom {
                samples: *samples,
                seed: *seed,
            })),
            _ => Err(Error::Config(format!("bad quasi-random spec `{s}`"))),
        });
        r
    }

    pub fn register(&mut self, name: &str, factory: RuleFactory) {
        self.entries.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<&str> {
        self.entries.keys().map(String::as_str).collect()
    }

    pub fn build(&self, spec: &str) -> Result<Box<dyn QuadratureRule>> {
        let parsed: QuadratureSpec = spec.parse()?;
        let name = spec.trim().split(':').next().unwrap_or_default();
        let factory = self.entries.get(name).ok_or_else(|| {
            Error::Config(format!("unknown quadrature `{name}` (known: {})", self.names().join(", ")))
        })?;
        factory(&parsed)
    }
}

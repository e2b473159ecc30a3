//! Run configuration: a JSON file with the same keys as the flags, flags win.

use std::path::{Path, PathBuf};

use ham_core::algebra::rational::parse_rational;
use ham_core::algebra::Rational;
use ham_core::diagnostics::{parse_grid, NormSpec, QuadratureSpec};
use ham_core::engine::{EngineOptions, DEFAULT_TERM_CAP};
use ham_core::problems::{Problem, ProblemParams, ProblemRegistry};
use ham_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every setting any subcommand reads. All fields are optional so a file and
/// the command line can each supply a subset.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub d: Option<usize>,
    pub order: Option<usize>,
    pub orders: Option<Vec<usize>>,
    pub c0: Option<String>,
    pub c0_grid: Option<String>,
    pub precision_bits: Option<u32>,
    pub domain: Option<String>,
    pub quadrature: Option<String>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub term_cap: Option<usize>,
    pub residual: Option<bool>,
}

pub const DEFAULT_PRECISION: u32 = 256;

macro_rules! overlay {
    ($dst:ident, $src:ident, $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// `self` with every field that `flags` sets replaced.
    pub fn overlaid(mut self, flags: RunConfig) -> Self {
        overlay!(
            self, flags, problem, d, order, orders, c0, c0_grid, precision_bits, domain, quadrature, seed, out, format,
            term_cap, residual
        );
        self
    }

    pub fn problem(&self) -> Result<Box<dyn Problem>> {
        let id = self
            .problem
            .as_deref()
            .ok_or_else(|| Error::Config("missing --problem".into()))?;
        ProblemRegistry::builtin().create(id, &ProblemParams { d: self.d })
    }

    pub fn c0(&self) -> Result<Rational> {
        let s = self.c0.as_deref().unwrap_or("-1");
        parse_rational(s).map_err(|e| Error::Config(format!("c0: {e}")))
    }

    pub fn order(&self) -> Result<usize> {
        self.order.ok_or_else(|| Error::Config("missing --order".into()))
    }

    pub fn orders(&self) -> Result<Vec<usize>> {
        let orders = self.orders.clone().unwrap_or_default();
        if orders.is_empty() {
            return Err(Error::Config("--orders must list at least one order".into()));
        }
        Ok(orders)
    }

    pub fn grid(&self) -> Result<Vec<Rational>> {
        match &self.c0_grid {
            Some(g) => parse_grid(g).map_err(|e| Error::Config(format!("c0 grid: {e}"))),
            None => Ok(vec![self.c0()?]),
        }
    }

    pub fn precision(&self) -> Result<u32> {
        let p = self.precision_bits.unwrap_or(DEFAULT_PRECISION);
        if p < 2 {
            return Err(Error::Config("--precision-bits must be at least 2".into()));
        }
        Ok(p)
    }

    pub fn engine(&self) -> EngineOptions {
        EngineOptions {
            term_cap: self.term_cap.unwrap_or(DEFAULT_TERM_CAP),
        }
    }

    pub fn formats(&self) -> Vec<Format> {
        self.format.clone().unwrap_or_else(|| vec![Format::Csv, Format::Json])
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("runs"))
    }

    /// The problem's default norm with domain, quadrature and seed overrides.
    pub fn norm_spec(&self, problem: &dyn Problem) -> Result<NormSpec> {
        let mut spec = NormSpec::for_problem(problem, self.precision()?);
        if let Some(d) = &self.domain {
            spec.domain = spec.domain.with_overrides(d, problem.vars())?;
        }
        if let Some(q) = &self.quadrature {
            spec.quadrature = q.parse()?;
        }
        if let Some(seed) = self.seed {
            match &mut spec.quadrature {
                QuadratureSpec::QuasiRandom { seed: s, .. } => *s = seed,
                other => {
                    return Err(Error::Config(format!("--seed only applies to quasi-random quadrature, not {other}")))
                }
            }
        }
        spec.quadrature.build()?;
        Ok(spec)
    }
}

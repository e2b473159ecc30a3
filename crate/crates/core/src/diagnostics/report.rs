use std::io::Write;

use rayon::prelude::*;
use rug::{Float, Rational};

use super::format_sci;
use super::norms::{error_norm_exact, residual_norm_operator, NormSpec};
use super::sweep::csv_err;
use crate::algebra::rational::format_rational;
use crate::engine::{partial_sum, run_series_with, EngineOptions};
use crate::error::{Error, Result};
use crate::problems::{observable_errors, ObservableSet, Problem};

/// What a table run computes besides the series itself.
#[derive(Debug, Clone)]
pub struct TableOptions {
    /// Global error against the exact solution, when set.
    pub exact: Option<NormSpec>,
    /// Operator residual norm, when set.
    pub residual: Option<NormSpec>,
    /// Bits used to evaluate observable errors.
    pub obs_prec: u32,
    pub engine: EngineOptions,
}

impl TableOptions {
    pub fn for_problem(problem: &dyn Problem, prec: u32) -> Self {
        Self {
            exact: problem
                .has_exact_solution()
                .then(|| NormSpec::for_problem(problem, prec)),
            residual: None,
            obs_prec: prec,
            engine: EngineOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReportRow {
    pub order: usize,
    pub exact_error: Option<Float>,
    pub residual: Option<Float>,
    pub observables: Option<ObservableSet>,
    /// Cumulative series time up to this order.
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct DiagnosticsReport {
    pub problem: String,
    pub c0: Rational,
    /// Observable-error columns written to CSV.
    pub columns: Vec<String>,
    pub rows: Vec<ReportRow>,
}

/// Runs the series once to the largest order and reports each requested order.
pub fn reproduce_table(
    problem: &dyn Problem,
    orders: &[usize],
    c0: &Rational,
    opts: &TableOptions,
) -> Result<DiagnosticsReport> {
    if orders.is_empty() {
        return Err(Error::Config("no orders given".into()));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("orders must be strictly increasing".into()));
    }
    let series = run_series_with(problem, *orders.last().expect("nonempty"), c0, &opts.engine)?;
    let has_probes = problem.exact_probes(opts.obs_prec).is_ok();
    let rows = orders
        .par_iter()
        .map(|&m| {
            let approx = partial_sum(&series, m)?;
            let exact_error = opts
                .exact
                .as_ref()
                .map(|s| error_norm_exact(problem, &approx, s))
                .transpose()?;
            let residual = opts
                .residual
                .as_ref()
                .map(|s| residual_norm_operator(problem, &approx, s))
                .transpose()?;
            let observables = has_probes
                .then(|| observable_errors(problem, &approx, opts.obs_prec))
                .transpose()?;
            Ok(ReportRow {
                order: m,
                exact_error,
                residual,
                observables,
                seconds: series.cumulative_seconds[m],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DiagnosticsReport {
        problem: problem.id(),
        c0: c0.clone(),
        columns: problem.table_columns(),
        rows,
    })
}

impl DiagnosticsReport {
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["m".to_string()];
        if self.rows.iter().any(|r| r.exact_error.is_some()) {
            h.push("E_exact".into());
        }
        if self.rows.iter().any(|r| r.residual.is_some()) {
            h.push("E_residual".into());
        }
        h.extend(self.columns.iter().map(|c| format!("err_{c}")));
        h
    }

    /// One row per order; timing lives in [`DiagnosticsReport::write_timing`]
    /// so this output is reproducible byte for byte.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let header = self.header();
        out.write_record(&header).map_err(csv_err)?;
        let with_exact = header.iter().any(|h| h == "E_exact");
        let with_residual = header.iter().any(|h| h == "E_residual");
        for r in &self.rows {
            let mut rec = vec![r.order.to_string()];
            let opt = |v: &Option<Float>| v.as_ref().map(format_sci).unwrap_or_default();
            if with_exact {
                rec.push(opt(&r.exact_error));
            }
            if with_residual {
                rec.push(opt(&r.residual));
            }
            for c in &self.columns {
                rec.push(r.observables.as_ref().and_then(|o| o.get(c)).as_ref().map(format_sci).unwrap_or_default());
            }
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<_> = self
            .rows
            .iter()
            .map(|r| {
                serde_json::json!({
                    "m": r.order,
                    "exact_error": r.exact_error.as_ref().map(format_sci),
                    "residual": r.residual.as_ref().map(format_sci),
                    "observable_errors": r.observables,
                })
            })
            .collect();
        serde_json::json!({
            "problem": self.problem,
            "c0": format_rational(&self.c0),
            "columns": self.columns,
            "rows": rows,
        })
    }

    pub fn write_timing<W: Write>(&self, w: W) -> Result<()> {
        let t: Vec<_> = self
            .rows
            .iter()
            .map(|r| serde_json::json!({"m": r.order, "seconds": r.seconds}))
            .collect();
        serde_json::to_writer_pretty(w, &serde_json::json!({ "series_seconds": t }))?;
        Ok(())
    }
}

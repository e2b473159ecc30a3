use std::io::Write;

use rayon::prelude::*;
use rug::{Float, Rational};
use serde::Serialize;

use super::norms::{residual_norm_operator, NormSpec};
use super::format_sci;
use crate::algebra::rational::{format_rational, parse_rational};
use crate::engine::{partial_sum, run_series_with, EngineOptions};
use crate::error::{Error, Result};
use crate::problems::Problem;

/// One `(order, c0)` entry: the residual norm or the reason it failed.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub value: Option<Float>,
    pub error: Option<String>,
}

/// Operator residual norms over orders (rows) and a `c0` grid (columns).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub problem: String,
    pub orders: Vec<usize>,
    pub c0_grid: Vec<Rational>,
    pub cells: Vec<Vec<SweepCell>>,
}

/// `start:stop:step` with exact rational arithmetic, both ends inclusive, or a
/// comma-separated list of values.
pub fn parse_grid(src: &str) -> Result<Vec<Rational>> {
    let parts: Vec<&str> = src.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (parse_rational(start)?, parse_rational(stop)?, parse_rational(step)?);
            if step <= 0 || start > stop {
                return Err(Error::Config(format!("grid `{src}` needs start <= stop and a positive step")));
            }
            let mut out = Vec::new();
            let mut c = start;
            while c <= stop {
                out.push(c.clone());
                c += &step;
            }
            out
        }
        [_] => src.split(',').map(|s| parse_rational(s.trim())).collect::<Result<_>>()?,
        _ => return Err(Error::Parse(format!("grid `{src}` must be start:stop:step or a list"))),
    };
    if grid.is_empty() {
        return Err(Error::Config("empty c0 grid".into()));
    }
    Ok(grid)
}

/// Residual norm at every `(order, c0)`. Each `c0` runs the series once to
/// the highest order; grid columns are computed in parallel.
pub fn sweep_c0(
    problem: &dyn Problem,
    orders: &[usize],
    grid: &[Rational],
    spec: &NormSpec,
    opts: &EngineOptions,
) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty c0 grid".into()));
    }
    if orders.is_empty() {
        return Err(Error::Config("no orders given".into()));
    }
    let max = *orders.iter().max().expect("nonempty");
    let columns: Vec<Vec<SweepCell>> = grid
        .par_iter()
        .map(|c0| {
            let fail = |e: &Error| SweepCell {
                value: None,
                error: Some(e.to_string()),
            };
            match run_series_with(problem, max, c0, opts) {
                Err(e) => orders.iter().map(|_| fail(&e)).collect(),
                Ok(series) => orders
                    .par_iter()
                    .map(|&m| {
                        match partial_sum(&series, m).and_then(|s| residual_norm_operator(problem, &s, spec)) {
                            Ok(v) => SweepCell {
                                value: Some(v),
                                error: None,
                            },
                            Err(e) => fail(&e),
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    let cells = (0..orders.len())
        .map(|i| columns.iter().map(|col| col[i].clone()).collect())
        .collect();
    Ok(SweepResult {
        problem: problem.id(),
        orders: orders.to_vec(),
        c0_grid: grid.to_vec(),
        cells,
    })
}

impl SweepResult {
    pub fn value(&self, order_index: usize, c0_index: usize) -> Option<&Float> {
        self.cells[order_index][c0_index].value.as_ref()
    }

    /// Grid index of the smallest residual at the given order row.
    pub fn argmin(&self, order_index: usize) -> Option<usize> {
        let row = &self.cells[order_index];
        (0..row.len())
            .filter(|&i| row[i].value.is_some())
            .min_by(|&a, &b| {
                let (x, y) = (row[a].value.as_ref().unwrap(), row[b].value.as_ref().unwrap());
                x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal)
            })
    }

    /// Matrix layout: one row per order, one column per `c0`. Failed cells are empty.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["order".to_string()];
        header.extend(self.c0_grid.iter().map(|c| format!("c0={}", format_rational(c))));
        out.write_record(&header).map_err(csv_err)?;
        for (i, m) in self.orders.iter().enumerate() {
            let mut rec = vec![m.to_string()];
            rec.extend(self.cells[i].iter().map(|c| c.value.as_ref().map(format_sci).unwrap_or_default()));
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Whitespace-separated `c0 order residual` lines, one block per order,
    /// blocks separated by a blank line.
    pub fn write_long<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# c0 order residual")?;
        for (i, m) in self.orders.iter().enumerate() {
            for (j, c0) in self.c0_grid.iter().enumerate() {
                if let Some(v) = &self.cells[i][j].value {
                    writeln!(w, "{} {} {}", c0.to_f64(), m, format_sci(v))?;
                }
            }
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Cell {
            order: usize,
            c0: String,
            residual: Option<String>,
            error: Option<String>,
        }
        let mut cells = Vec::new();
        for (i, m) in self.orders.iter().enumerate() {
            for (j, c0) in self.c0_grid.iter().enumerate() {
                let c = &self.cells[i][j];
                cells.push(Cell {
                    order: *m,
                    c0: format_rational(c0),
                    residual: c.value.as_ref().map(format_sci),
                    error: c.error.clone(),
                });
            }
        }
        serde_json::json!({
            "problem": self.problem,
            "orders": self.orders,
            "c0_grid": self.c0_grid.iter().map(format_rational).collect::<Vec<_>>(),
            "cells": cells,
        })
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

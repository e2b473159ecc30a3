use std::io::Write;
use std::path::PathBuf;

use ham_core::diagnostics::{format_sci, reproduce_table, sweep_c0, TableOptions};
use ham_core::engine::{partial_sum, run_series_with};
use ham_core::problems::{exact_initial_values, extract_observables, observable_errors};
use ham_core::Result;

use crate::config::{Format, RunConfig};
use crate::output::RunDir;

pub fn solve(cfg: &RunConfig) -> Result<PathBuf> {
    let problem = cfg.problem()?;
    let (order, c0, prec) = (cfg.order()?, cfg.c0()?, cfg.precision()?);
    let formats = cfg.formats();
    let series = run_series_with(&*problem, order, &c0, &cfg.engine())?;
    let approx = partial_sum(&series, order)?;
    let values = extract_observables(&*problem, &approx, prec)?;
    let exact = exact_initial_values(&*problem, prec).ok();
    let errors = match exact {
        Some(_) => Some(observable_errors(&*problem, &approx, prec)?),
        None => None,
    };

    let mut dir = RunDir::create(&cfg.out_dir(), &problem.id(), &order.to_string(), &c0)?;
    dir.write_json("series.json", &series)?;
    let obs = serde_json::json!({ "approx": values, "exact": exact, "error": errors });
    if formats.contains(&Format::Json) {
        dir.write_json("observables.json", &obs)?;
    }
    if formats.contains(&Format::Csv) {
        dir.write_with("observables.csv", |w| {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(["name", "approx", "exact", "error"]).map_err(csv_err)?;
            for (name, v) in values.named() {
                let e = exact.as_ref().and_then(|s| s.get(&name));
                let err = errors.as_ref().and_then(|s| s.get(&name));
                out.write_record([
                    name.clone(),
                    format_sci(&v),
                    e.as_ref().map(format_sci).unwrap_or_default(),
                    err.as_ref().map(format_sci).unwrap_or_default(),
                ])
                .map_err(csv_err)?;
            }
            out.flush()?;
            Ok(())
        })?;
    }
    dir.write_json("timing.json", &serde_json::json!({ "series_seconds": series.cumulative_seconds }))?;
    let mut stdout = std::io::stdout().lock();
    for (name, v) in values.named() {
        match errors.as_ref().and_then(|s| s.get(&name)) {
            Some(e) => writeln!(stdout, "{name} = {}  error = {}", format_sci(&v), format_sci(&e))?,
            None => writeln!(stdout, "{name} = {}", format_sci(&v))?,
        }
    }
    dir.finish("solve", cfg)
}

pub fn table(cfg: &RunConfig) -> Result<PathBuf> {
    let problem = cfg.problem()?;
    let (orders, c0, prec) = (cfg.orders()?, cfg.c0()?, cfg.precision()?);
    let spec = cfg.norm_spec(&*problem)?;
    let opts = TableOptions {
        exact: problem.has_exact_solution().then(|| spec.clone()),
        residual: cfg.residual.unwrap_or(false).then(|| spec.clone()),
        obs_prec: prec,
        engine: cfg.engine(),
    };
    let report = reproduce_table(&*problem, &orders, &c0, &opts)?;
    let last = orders.last().expect("validated nonempty").to_string();
    let mut dir = RunDir::create(&cfg.out_dir(), &problem.id(), &last, &c0)?;
    let formats = cfg.formats();
    if formats.contains(&Format::Csv) {
        dir.write_with("table.csv", |w| report.write_csv(w))?;
    }
    if formats.contains(&Format::Json) {
        dir.write_json("table.json", &report.to_json())?;
    }
    dir.write_json("norm.json", &spec)?;
    dir.write_with("timing.json", |w| report.write_timing(w))?;
    report.write_csv(std::io::stdout().lock())?;
    dir.finish("table", cfg)
}

pub fn sweep(cfg: &RunConfig) -> Result<PathBuf> {
    let problem = cfg.problem()?;
    let (orders, grid) = (cfg.orders()?, cfg.grid()?);
    let spec = cfg.norm_spec(&*problem)?;
    let result = sweep_c0(&*problem, &orders, &grid, &spec, &cfg.engine())?;
    let last = orders.iter().max().expect("validated nonempty").to_string();
    let mut dir = RunDir::create(&cfg.out_dir(), &problem.id(), &last, &grid[0])?;
    let formats = cfg.formats();
    if formats.contains(&Format::Csv) {
        dir.write_with("sweep.csv", |w| result.write_csv(w))?;
    }
    if formats.contains(&Format::Json) {
        dir.write_json("sweep.json", &result.to_json())?;
    }
    dir.write_with("sweep.dat", |w| result.write_long(w))?;
    dir.write_json("norm.json", &spec)?;
    let mut stdout = std::io::stdout().lock();
    for (i, m) in orders.iter().enumerate() {
        match result.argmin(i) {
            Some(j) => writeln!(
                stdout,
                "order {m}: min residual {} at c0 = {}",
                format_sci(result.value(i, j).expect("argmin has a value")),
                grid[j]
            )?,
            None => writeln!(stdout, "order {m}: every cell failed")?,
        }
    }
    dir.finish("sweep", cfg)
}

pub(crate) fn csv_err(e: csv::Error) -> ham_core::Error {
    ham_core::Error::Io(std::io::Error::other(e.to_string()))
}

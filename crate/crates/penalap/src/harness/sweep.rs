//! Cartesian (n, eta) sweeps of one case template.

use std::fs::File;
use std::path::Path;

use super::cases::run_error_case;
use super::config::CaseConfig;
use super::metrics::fit_order;
use super::report::{write_error_csv, write_failures_csv, write_orders_csv, ErrorReport, Failure, OrderFit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    /// One row per cell sorted by `(h, eta)`; failed cells carry NaN errors.
    pub rows: Vec<ErrorReport>,
    pub failures: Vec<Failure>,
    /// One entry per eta, in ascending eta.
    pub orders: Vec<OrderFit>,
}

/// Grid size for a requested spacing on a box of side `extent`.
pub fn n_for_h(extent: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!("grid spacing must be positive, got {h}")));
    }
    let n = (extent / h).round();
    if n < 4.0 {
        return Err(Error::Config(format!("h = {h} leaves fewer than 4 points on a box of side {extent}")));
    }
    Ok(n as usize)
}

fn fit_or_nan(points: &[(f64, f64)]) -> f64 {
    fit_order(points).unwrap_or(f64::NAN)
}

/// Runs every `(n, eta)` pair; errors in one cell are recorded and the
/// sweep continues. `progress` sees each finished row.
pub fn sweep(template: &CaseConfig, n_list: &[usize], eta_list: &[f64], mut progress: impl FnMut(&ErrorReport)) -> Result<SweepResult> {
    if n_list.is_empty() || eta_list.is_empty() {
        return Err(Error::Config("sweep lists must be non-empty".into()));
    }
    let problem = template.problem()?;
    let extent = problem.extent();
    let mut result = SweepResult::default();
    for &eta in eta_list {
        for &n in n_list {
            let cfg = template.with_n(n).with_eta(eta);
            let row = match run_error_case(&cfg) {
                Ok(out) => out.report,
                Err(e) => {
                    let h = extent / n as f64;
                    result.failures.push(Failure { n, h, eta, error: e.to_string() });
                    ErrorReport::failed(problem.as_str(), n, h, eta)
                }
            };
            progress(&row);
            result.rows.push(row);
        }
    }
    result.rows.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.eta.total_cmp(&b.eta)));
    result.failures.sort_by(|a, b| a.h.total_cmp(&b.h).then(a.eta.total_cmp(&b.eta)));

    let mut etas = eta_list.to_vec();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    for eta in etas {
        let ok: Vec<&ErrorReport> = result.rows.iter().filter(|r| r.eta == eta && r.err_linf.is_finite()).collect();
        let pts = |f: fn(&ErrorReport) -> f64| ok.iter().map(|r| (r.h, f(r))).collect::<Vec<_>>();
        let fit = OrderFit {
            eta,
            points: ok.len(),
            order_linf: fit_or_nan(&pts(|r| r.err_linf)),
            order_l1: fit_or_nan(&pts(|r| r.err_l1)),
            order_l2: fit_or_nan(&pts(|r| r.err_l2)),
        };
        for r in result.rows.iter_mut().filter(|r| r.eta == eta && r.err_linf.is_finite()) {
            r.fitted_order = fit.order_l2.is_finite().then_some(fit.order_l2);
        }
        result.orders.push(fit);
    }
    Ok(result)
}

/// Writes `errors.csv`, `orders.csv` and, when any cell failed,
/// `failures.csv` into `dir`.
pub fn write_sweep(dir: &Path, result: &SweepResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_error_csv(File::create(dir.join("errors.csv"))?, &result.rows)?;
    write_orders_csv(File::create(dir.join("orders.csv"))?, &result.orders)?;
    if !result.failures.is_empty() {
        write_failures_csv(File::create(dir.join("failures.csv"))?, &result.failures)?;
    }
    Ok(())
}

//! Fluid-restricted error norms and convergence-order fits.

use crate::error::{Error, Result};
use crate::grid::{MaskField, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub linf: f64,
    pub l1: f64,
    pub l2: f64,
}

/// Norms of `numerical - reference` over points with `chi <= 1/2`, so
/// interface points count as fluid. `l1` and `l2` carry the cell measure.
pub fn error_norms(numerical: &ScalarField, reference: impl Fn([f64; 2]) -> f64, mask: &MaskField) -> Result<ErrorNorms> {
    numerical.same_layout(mask.grid(), mask.location())?;
    let grid = numerical.grid();
    let (mut linf, mut s1, mut s2, mut count) = (0.0f64, 0.0, 0.0, 0usize);
    for (k, v) in numerical.values().iter().enumerate() {
        if !mask.is_fluid_point(k) {
            continue;
        }
        let e = v - reference(grid.position(numerical.location(), k));
        linf = linf.max(e.abs());
        s1 += e.abs();
        s2 += e * e;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidArgument("no fluid points".into()));
    }
    let w = grid.cell_measure();
    Ok(ErrorNorms { linf, l1: w * s1, l2: (w * s2).sqrt() })
}

/// Least-squares slope of `log err` against `log h`.
pub fn fit_order(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(h, e)| !(h > 0.0 && e > 0.0) || !h.is_finite() || !e.is_finite()) {
        return Err(Error::InvalidArgument("h and err must be positive and finite".into()));
    }
    let mut hs: Vec<f64> = points.iter().map(|p| p.0).collect();
    hs.sort_by(f64::total_cmp);
    if hs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("h values must be distinct".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Slopes between consecutive points sorted by decreasing `h`, each
/// reported at the geometric mean of its two spacings.
pub fn local_orders(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| b.0.total_cmp(&a.0));
    p.windows(2).map(|w| ((w[0].0 * w[1].0).sqrt(), (w[0].1 / w[1].1).ln() / (w[0].0 / w[1].0).ln())).collect()
}

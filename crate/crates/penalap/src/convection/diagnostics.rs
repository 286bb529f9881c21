//! Post-processing of converged convection states.

use super::FlowState;
use crate::error::{Error, Result};
use crate::grid::{Grid, Location, ScalarField};
use crate::solvers::Sor;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub theta_deg: f64,
    pub phi: f64,
}

/// How `phi` is read off at the inner wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WallSampling {
    /// Bilinear interpolation of cell-centred `phi` at `r = r_inner`. Mixes
    /// in the (cold) solid cells, so it biases the wall value low.
    Bilinear,
    /// Bilinear samples at `r_inner + 1.5h, 2.5h, 3.5h`, extrapolated to the
    /// wall by the interpolating quadratic.
    #[default]
    FluidExtrapolation,
}

// At 1.5 h and beyond all four bilinear neighbours have centres outside the
// inner circle, so the samples never touch a solid cell.
const OFFSETS: [f64; 3] = [1.5, 2.5, 3.5];

fn lagrange_at_zero(s: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let mut value = [0.0; 3];
    let mut slope = [0.0; 3];
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        let den = (s[a] - s[b]) * (s[a] - s[c]);
        value[a] = s[b] * s[c] / den;
        slope[a] = -(s[b] + s[c]) / den;
    }
    (value, slope)
}

/// Bilinear interpolation of a cell-centred field; with `exclude_within`
/// only cells whose centre lies outside that radius contribute.
fn bilinear(field: &ScalarField, p: [f64; 2], exclude_within: Option<f64>) -> Result<f64> {
    let g = match field.grid() {
        Grid::Two(g) => *g,
        Grid::One(_) => return Err(Error::InvalidArgument("wall sampling needs a 2D field".into())),
    };
    let (n, m) = (g.nx(), g.ny());
    let h = g.spacing();
    let o = g.origin();
    let fx = (p[0] - o[0]) / h[0];
    let fy = (p[1] - o[1]) / h[1];
    let (i0, j0) = (fx.floor(), fy.floor());
    let (tx, ty) = (fx - i0, fy - j0);
    let (mut acc, mut wsum) = (0.0, 0.0);
    for (di, wx) in [(0, 1.0 - tx), (1, tx)] {
        for (dj, wy) in [(0, 1.0 - ty), (1, ty)] {
            let i = (i0 as i64 + di).rem_euclid(n as i64) as usize;
            let j = (j0 as i64 + dj).rem_euclid(m as i64) as usize;
            if let Some(r0) = exclude_within {
                let c = g.node(i, j);
                if c[0].hypot(c[1]) <= r0 {
                    continue;
                }
            }
            let w = wx * wy;
            acc += w * field.values()[g.index(i, j)];
            wsum += w;
        }
    }
    if wsum <= 0.0 {
        return Err(Error::InvalidArgument(format!("no fluid cell near {p:?}")));
    }
    Ok(acc / wsum)
}

/// Unit vector at angle `theta_deg` measured counterclockwise from the top.
fn direction(theta_deg: f64) -> [f64; 2] {
    let t = theta_deg.to_radians();
    [-t.sin(), t.cos()]
}

fn spacing(state: &FlowState) -> Result<f64> {
    match state.phi.grid() {
        Grid::Two(g) => Ok(g.spacing()[0]),
        Grid::One(_) => Err(Error::InvalidArgument("convection state must be 2D".into())),
    }
}

/// Fluid-side samples along the ray at `theta_deg`.
fn ray_samples(state: &FlowState, theta_deg: f64, r_inner: f64) -> Result<[f64; 3]> {
    let h = spacing(state)?;
    let d = direction(theta_deg);
    let mut out = [0.0; 3];
    for (o, s) in out.iter_mut().zip(OFFSETS) {
        let r = r_inner + s * h;
        *o = bilinear(&state.phi, [r * d[0], r * d[1]], Some(r_inner))?;
    }
    Ok(out)
}

/// `phi` on the circle `r = r_inner` at `n_angles` equally spaced angles,
/// starting from the top and turning counterclockwise.
pub fn inner_wall_profile_with(state: &FlowState, n_angles: usize, r_inner: f64, sampling: WallSampling) -> Result<Vec<ProfilePoint>> {
    if n_angles == 0 {
        return Err(Error::InvalidArgument("n_angles must be positive".into()));
    }
    let (value, _) = lagrange_at_zero(&OFFSETS);
    (0..n_angles)
        .map(|k| {
            let theta_deg = 360.0 * k as f64 / n_angles as f64;
            let phi = match sampling {
                WallSampling::Bilinear => {
                    let d = direction(theta_deg);
                    bilinear(&state.phi, [r_inner * d[0], r_inner * d[1]], None)?
                }
                WallSampling::FluidExtrapolation => {
                    let s = ray_samples(state, theta_deg, r_inner)?;
                    value.iter().zip(s).map(|(w, v)| w * v).sum()
                }
            };
            Ok(ProfilePoint { theta_deg, phi })
        })
        .collect()
}

/// Inner-wall profile at `r = 1` with the default sampling.
pub fn inner_wall_profile(state: &FlowState, n_angles: usize) -> Result<Vec<ProfilePoint>> {
    inner_wall_profile_with(state, n_angles, 1.0, WallSampling::default())
}

/// Outward heat flux `-d phi/dr` at the inner wall per angle, from the
/// derivative of the same quadratic fit used for the profile.
pub fn inner_wall_flux(state: &FlowState, n_angles: usize, r_inner: f64) -> Result<Vec<f64>> {
    if n_angles == 0 {
        return Err(Error::InvalidArgument("n_angles must be positive".into()));
    }
    let h = spacing(state)?;
    let (_, slope) = lagrange_at_zero(&OFFSETS);
    (0..n_angles)
        .map(|k| {
            let s = ray_samples(state, 360.0 * k as f64 / n_angles as f64, r_inner)?;
            Ok(-slope.iter().zip(s).map(|(w, v)| w * v).sum::<f64>() / h)
        })
        .collect()
}

/// Reciprocal of the angular mean of the wall temperature.
pub fn average_nusselt(profile: &[ProfilePoint]) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::InvalidArgument("empty profile".into()));
    }
    let mean = profile.iter().map(|p| p.phi).sum::<f64>() / profile.len() as f64;
    if !(mean > 0.0) {
        return Err(Error::InvalidArgument(format!("mean wall temperature {mean} is not positive")));
    }
    Ok(1.0 / mean)
}

/// Deviation from mirror symmetry about `x = 0`: `[phi, |u|]`, each as the
/// largest pointwise difference over the largest magnitude.
pub fn mirror_asymmetry(state: &FlowState) -> Result<[f64; 2]> {
    let g = match state.phi.grid() {
        Grid::Two(g) => *g,
        Grid::One(_) => return Err(Error::InvalidArgument("convection state must be 2D".into())),
    };
    let n = g.nx();
    let m = g.ny();
    let phi = state.phi.values();
    let (u, v) = (state.u.x.values(), state.u.y.values());
    let speed = |i: usize, j: usize| {
        let uc = 0.5 * (u[g.index(i, j)] + u[g.index((i + n - 1) % n, j)]);
        let vc = 0.5 * (v[g.index(i, j)] + v[g.index(i, (j + m - 1) % m)]);
        uc.hypot(vc)
    };
    let (mut dphi, mut mphi, mut dsp, mut msp) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for j in 0..m {
        for i in 0..n {
            let mi = n - 1 - i;
            dphi = dphi.max((phi[g.index(i, j)] - phi[g.index(mi, j)]).abs());
            mphi = mphi.max(phi[g.index(i, j)].abs());
            let s = speed(i, j);
            dsp = dsp.max((s - speed(mi, j)).abs());
            msp = msp.max(s);
        }
    }
    let rel = |d: f64, m: f64| if m > 0.0 { d / m } else { 0.0 };
    Ok([rel(dphi, mphi), rel(dsp, msp)])
}

/// Stream function at cell corners: `lap psi = -omega` with
/// `omega = dv/dx - du/dy`, so that `u = dpsi/dy` and `v = -dpsi/dx`.
pub fn stream_function(state: &FlowState, omega: f64, rel_l1_tol: f64) -> Result<ScalarField> {
    let grid = *state.phi.grid();
    let g = match grid {
        Grid::Two(g) => g,
        Grid::One(_) => return Err(Error::InvalidArgument("convection state must be 2D".into())),
    };
    let (n, m) = (g.nx(), g.ny());
    let h = g.spacing();
    let (u, v) = (state.u.x.values(), state.u.y.values());
    let mut rhs = vec![0.0; n * m];
    for j in 0..m {
        let jp = (j + 1) % m;
        for i in 0..n {
            let ip = (i + 1) % n;
            let k = g.index(i, j);
            let vort = (v[g.index(ip, j)] - v[k]) / h[0] - (u[g.index(i, jp)] - u[k]) / h[1];
            rhs[k] = -vort;
        }
    }
    let mut psi = vec![0.0; n * m];
    Sor::new(n, m, h, omega)?.solve(&mut psi, &mut rhs, rel_l1_tol, 1_000_000)?;
    ScalarField::new(grid, Location::Corner, psi)
}

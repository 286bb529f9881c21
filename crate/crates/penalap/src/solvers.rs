//! Linear solvers and time steppers for the penalized problems.
//!
//! The Poisson solves use Jacobi-preconditioned conjugate gradients on the
//! matrix-free operator. The pure Neumann operator has the constants as its
//! kernel; residuals are projected onto mean-zero vectors each iteration
//! and the result is shifted to zero fluid mean.

use crate::error::{Error, Result};
use crate::grid::{fluid_measure, integrate_fluid, Grid, Location, MaskField, ScalarField};
use crate::operators::{relative_grid_sum, PenalizedProblem};

/// Grid-sum level above which a Neumann right-hand side is rejected.
pub const RHS_COMPATIBILITY_LIMIT: f64 = 1e-8;

/// What to do with a right-hand side whose grid sum does not vanish.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhsPolicy {
    /// Reject when the relative grid sum exceeds [`RHS_COMPATIBILITY_LIMIT`].
    #[default]
    Strict,
    /// Subtract the mean. Needed where the staircase boundary breaks the
    /// discrete compatibility at O(h), e.g. curved interfaces.
    ProjectMean,
}

/// Quadrature behind the zero-fluid-mean constraint that fixes the
/// Neumann constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeanRule {
    /// Unit weight at every node of the closed fluid region, interface
    /// nodes included. Off by `h/2 (v(0) + v(pi))` in 1D, so the constant
    /// carries an O(h) error unless the boundary values cancel.
    #[default]
    Midpoint,
    /// Weights `1 - chi` as in [`integrate_fluid`]; interface nodes count half.
    Trapezoid,
}

impl MeanRule {
    pub fn as_str(self) -> &'static str {
        match self {
            MeanRule::Midpoint => "midpoint",
            MeanRule::Trapezoid => "trapezoid",
        }
    }
}

impl std::str::FromStr for MeanRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midpoint" => Ok(MeanRule::Midpoint),
            "trapezoid" => Ok(MeanRule::Trapezoid),
            _ => Err(Error::Config(format!("mean rule must be midpoint or trapezoid, got `{s}`"))),
        }
    }
}

/// Mean of `v` over the fluid under `rule`.
pub fn fluid_mean(v: &ScalarField, mask: &MaskField, rule: MeanRule) -> Result<f64> {
    match rule {
        MeanRule::Trapezoid => {
            let measure = fluid_measure(mask);
            if measure <= 0.0 {
                return Err(Error::InvalidArgument("problem has no fluid".into()));
            }
            Ok(integrate_fluid(v, mask)? / measure)
        }
        MeanRule::Midpoint => {
            v.same_layout(mask.grid(), mask.location())?;
            let (mut s, mut count) = (0.0, 0usize);
            for (x, c) in v.values().iter().zip(mask.values()) {
                if *c < 1.0 {
                    s += x;
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::InvalidArgument("problem has no fluid".into()));
            }
            Ok(s / count as f64)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Target for `||F v - b||_2 / ||b||_2`.
    pub rel_tolerance: f64,
    pub max_iterations: usize,
    pub sor_omega: f64,
    /// Target for the relative l1 residual of SOR.
    pub sor_rel_l1_tol: f64,
    pub rhs_policy: RhsPolicy,
    pub mean_rule: MeanRule,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-12,
            max_iterations: 200_000,
            sor_omega: 1.7,
            sor_rel_l1_tol: 1e-6,
            rhs_policy: RhsPolicy::Strict,
            mean_rule: MeanRule::Midpoint,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tolerance > 0.0) || !(self.sor_rel_l1_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if !(self.sor_omega > 0.0 && self.sor_omega < 2.0) {
            return Err(Error::InvalidArgument(format!("SOR omega must lie in (0, 2), got {}", self.sor_omega)));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub iterations: usize,
    /// True (recomputed) relative residual on return.
    pub relative_residual: f64,
    /// Tolerance actually applied; exceeds the requested one only when
    /// rounding in `F v` makes the request unattainable.
    pub effective_tolerance: f64,
}

/// Symmetric operator for conjugate gradients.
pub trait LinearOperator {
    fn len(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// `identity * I + scale * (F + reaction)` built on a penalized problem.
pub struct PenalizedOperator<'a> {
    pub problem: &'a PenalizedProblem,
    pub identity: f64,
    pub scale: f64,
    pub reaction: bool,
}

impl<'a> PenalizedOperator<'a> {
    pub fn plain(problem: &'a PenalizedProblem) -> Self {
        Self { problem, identity: 0.0, scale: 1.0, reaction: false }
    }

    pub fn with_reaction(problem: &'a PenalizedProblem) -> Self {
        Self { problem, identity: 0.0, scale: 1.0, reaction: true }
    }
}

impl LinearOperator for PenalizedOperator<'_> {
    fn len(&self) -> usize {
        self.problem.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if self.reaction {
            self.problem.apply_with_reaction(x, y);
        } else {
            self.problem.apply_flux_form(x, y);
        }
        if self.scale != 1.0 || self.identity != 0.0 {
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi = self.identity * xi + self.scale * *yi;
            }
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.problem.diagonal(self.reaction).into_iter().map(|d| self.identity + self.scale * d).collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn remove_mean(v: &mut [f64]) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// Smallest relative residual that rounding in `A x` allows, estimated
/// from `|A| |x| <= 2 |D| |x|` for diagonally dominant stencils.
fn rounding_floor(diag: &[f64], x: &[f64], b_norm: f64) -> f64 {
    let s: f64 = diag.iter().zip(x).map(|(d, xi)| (2.0 * d * xi).powi(2)).sum();
    4.0 * f64::EPSILON * s.sqrt() / b_norm
}

/// Jacobi-preconditioned conjugate gradients, starting from `x`. With
/// `project_constant` the residual is kept orthogonal to the constants,
/// which makes the semidefinite periodic Neumann system well posed.
pub fn conjugate_gradient(
    op: &dyn LinearOperator,
    b: &[f64],
    x: &mut [f64],
    opts: &SolveOptions,
    project_constant: bool,
) -> Result<SolveStats> {
    let n = op.len();
    if b.len() != n || x.len() != n {
        return Err(Error::Mismatch(format!("operator of size {n}, vectors {} and {}", b.len(), x.len())));
    }
    opts.validate()?;
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats { iterations: 0, relative_residual: 0.0, effective_tolerance: opts.rel_tolerance });
    }
    let inv_diag: Vec<f64> = op.diagonal().iter().map(|d| 1.0 / d).collect();
    let diag: Vec<f64> = inv_diag.iter().map(|d| 1.0 / d).collect();

    let mut r = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let true_residual = |x: &[f64], r: &mut [f64], q: &mut [f64]| {
        op.apply(x, q);
        for i in 0..n {
            r[i] = b[i] - q[i];
        }
        if project_constant {
            remove_mean(r);
        }
        norm2(r) / b_norm
    };

    let mut iterations = 0;
    // a few restarts absorb drift between the recursive and true residual
    for _restart in 0..4 {
        let mut rel = true_residual(x, &mut r, &mut q);
        let tol = opts.rel_tolerance.max(rounding_floor(&diag, x, b_norm));
        if rel <= tol {
            return Ok(SolveStats { iterations, relative_residual: rel, effective_tolerance: tol });
        }
        for i in 0..n {
            z[i] = inv_diag[i] * r[i];
        }
        p.copy_from_slice(&z);
        let mut rz = dot(&r, &z);
        let mut stalled = 0usize;
        let mut best = rel;
        loop {
            if iterations >= opts.max_iterations {
                return Err(Error::NotConverged { solver: "conjugate gradient", iterations, residual: rel });
            }
            iterations += 1;
            op.apply(&p, &mut q);
            let pq = dot(&p, &q);
            if !(pq > 0.0) {
                break;
            }
            let a = rz / pq;
            for i in 0..n {
                x[i] += a * p[i];
                r[i] -= a * q[i];
            }
            if project_constant {
                remove_mean(&mut r);
            }
            rel = norm2(&r) / b_norm;
            if !rel.is_finite() {
                return Err(Error::Diverged { solver: "conjugate gradient", iterations });
            }
            if rel <= tol {
                break;
            }
            if rel < 0.5 * best {
                best = rel;
                stalled = 0;
            } else {
                stalled += 1;
                if stalled > 2 * n + 100 {
                    break;
                }
            }
            for i in 0..n {
                z[i] = inv_diag[i] * r[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
    }
    let rel = true_residual(x, &mut r, &mut q);
    let tol = opts.rel_tolerance.max(rounding_floor(&diag, x, b_norm));
    if rel <= tol {
        Ok(SolveStats { iterations, relative_residual: rel, effective_tolerance: tol })
    } else {
        Err(Error::NotConverged { solver: "conjugate gradient", iterations, residual: rel })
    }
}

/// Shifts `v` so that its fluid mean vanishes.
fn shift_to_zero_fluid_mean(v: &mut ScalarField, prob: &PenalizedProblem, rule: MeanRule) -> Result<()> {
    let mean = fluid_mean(v, prob.mask(), rule)?;
    v.values_mut().iter_mut().for_each(|x| *x -= mean);
    Ok(())
}

/// Solves `F v = b` for the pure Neumann problem and returns the solution
/// with zero fluid mean.
pub fn solve_poisson_neumann(prob: &PenalizedProblem, opts: &SolveOptions) -> Result<ScalarField> {
    solve_poisson_neumann_with_stats(prob, opts).map(|(v, _)| v)
}

pub fn solve_poisson_neumann_with_stats(prob: &PenalizedProblem, opts: &SolveOptions) -> Result<(ScalarField, SolveStats)> {
    if prob.dirichlet_mask().is_some() {
        return Err(Error::InvalidArgument("problem has a Dirichlet solid; use the mixed solver".into()));
    }
    opts.validate()?;
    let mut b = prob.assemble_rhs_at(0.0).into_values();
    let rel = relative_grid_sum(&b);
    if rel > RHS_COMPATIBILITY_LIMIT && opts.rhs_policy == RhsPolicy::Strict {
        return Err(Error::IncompatibleRhs { relative: rel, limit: RHS_COMPATIBILITY_LIMIT });
    }
    remove_mean(&mut b);
    let mut x = vec![0.0; b.len()];
    let stats = conjugate_gradient(&PenalizedOperator::plain(prob), &b, &mut x, opts, true)?;
    let mut v = ScalarField::from_parts(*prob.grid(), Location::Node, x);
    shift_to_zero_fluid_mean(&mut v, prob, opts.mean_rule)?;
    Ok((v, stats))
}

/// Solves `(F + diag(chi_d/eta_d)) v = b`. The reaction term removes the
/// kernel, so no projection is applied.
pub fn solve_poisson_dirichlet_neumann(prob: &PenalizedProblem, opts: &SolveOptions) -> Result<ScalarField> {
    solve_poisson_dirichlet_neumann_with_stats(prob, opts).map(|(v, _)| v)
}

pub fn solve_poisson_dirichlet_neumann_with_stats(prob: &PenalizedProblem, opts: &SolveOptions) -> Result<(ScalarField, SolveStats)> {
    if prob.dirichlet_mask().is_none() {
        return Err(Error::InvalidArgument("problem has no Dirichlet solid".into()));
    }
    opts.validate()?;
    let b = prob.assemble_rhs_at(0.0).into_values();
    let mut x = vec![0.0; b.len()];
    let stats = conjugate_gradient(&PenalizedOperator::with_reaction(prob), &b, &mut x, opts, false)?;
    Ok((ScalarField::from_parts(*prob.grid(), Location::Node, x), stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SorStats {
    pub sweeps: usize,
    pub relative_l1_residual: f64,
}

/// In-place SOR for the periodic 5-point Laplacian `lap p = rhs` on an
/// `nx x ny` grid.
#[derive(Debug, Clone, Copy)]
pub struct Sor {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    omega: f64,
}

impl Sor {
    pub fn new(nx: usize, ny: usize, h: [f64; 2], omega: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidArgument("SOR grid needs at least 3 points per direction".into()));
        }
        if !(omega > 0.0 && omega < 2.0) {
            return Err(Error::InvalidArgument(format!("SOR omega must lie in (0, 2), got {omega}")));
        }
        Ok(Self { nx, ny, cx: 1.0 / (h[0] * h[0]), cy: 1.0 / (h[1] * h[1]), omega })
    }

    /// `2 / (1 + sin(pi / n))`, the classical optimum for an `n x n` grid.
    pub fn optimal_omega(n: usize) -> f64 {
        2.0 / (1.0 + (std::f64::consts::PI / n as f64).sin())
    }

    /// `||rhs - lap p||_1`.
    pub fn residual_l1(&self, p: &[f64], rhs: &[f64]) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let mut s = 0.0;
        for j in 0..ny {
            let jm = if j == 0 { ny - 1 } else { j - 1 } * nx;
            let jp = if j + 1 == ny { 0 } else { j + 1 } * nx;
            let row = j * nx;
            for i in 0..nx {
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let c = p[row + i];
                let lap = self.cx * (p[row + ip] + p[row + im] - 2.0 * c) + self.cy * (p[jp + i] + p[jm + i] - 2.0 * c);
                s += (rhs[row + i] - lap).abs();
            }
        }
        s
    }

    /// One sweep; returns the l1 norm of the residuals met along the way.
    /// Even grids use red-black ordering, which has no loop-carried
    /// dependency; odd periodic grids cannot be two-coloured and fall back
    /// to lexicographic order.
    fn sweep(&self, p: &mut [f64], rhs: &[f64]) -> f64 {
        if self.nx % 2 == 0 && self.ny % 2 == 0 {
            self.colour_sweep(p, rhs, 0) + self.colour_sweep(p, rhs, 1)
        } else {
            self.lexicographic_sweep(p, rhs)
        }
    }

    fn colour_sweep(&self, p: &mut [f64], rhs: &[f64], colour: usize) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let (cx, cy) = (self.cx, self.cy);
        let diag = 2.0 * (cx + cy);
        let w = self.omega / diag;
        let mut s = 0.0;
        for j in 0..ny {
            let jm = if j == 0 { ny - 1 } else { j - 1 } * nx;
            let jp = if j + 1 == ny { 0 } else { j + 1 } * nx;
            let row = j * nx;
            let mut i = (j + colour) % 2;
            while i < nx {
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let c = p[row + i];
                let lap = cx * (p[row + ip] + p[row + im]) + cy * (p[jp + i] + p[jm + i]) - diag * c;
                let r = lap - rhs[row + i];
                s += r.abs();
                p[row + i] = c + w * r;
                i += 2;
            }
        }
        s
    }

    fn lexicographic_sweep(&self, p: &mut [f64], rhs: &[f64]) -> f64 {
        let (nx, ny) = (self.nx, self.ny);
        let diag = 2.0 * (self.cx + self.cy);
        let w = self.omega / diag;
        let mut s = 0.0;
        for j in 0..ny {
            let jm = if j == 0 { ny - 1 } else { j - 1 } * nx;
            let jp = if j + 1 == ny { 0 } else { j + 1 } * nx;
            let row = j * nx;
            for i in 0..nx {
                let im = if i == 0 { nx - 1 } else { i - 1 };
                let ip = if i + 1 == nx { 0 } else { i + 1 };
                let c = p[row + i];
                let lap = self.cx * (p[row + ip] + p[row + im] - 2.0 * c) + self.cy * (p[jp + i] + p[jm + i] - 2.0 * c);
                let r = lap - rhs[row + i];
                s += r.abs();
                p[row + i] = c + w * r;
            }
        }
        s
    }

    /// Iterates until the relative l1 residual drops below `tol`. The mean
    /// of `rhs` is removed first (callers check compatibility) and the mean
    /// of `p` is pinned to zero.
    pub fn solve(&self, p: &mut [f64], rhs: &mut [f64], tol: f64, max_sweeps: usize) -> Result<SorStats> {
        let n = self.nx * self.ny;
        if p.len() != n || rhs.len() != n {
            return Err(Error::Mismatch("SOR vectors do not match the grid".into()));
        }
        remove_mean(rhs);
        let rhs_norm: f64 = rhs.iter().map(|v| v.abs()).sum();
        if rhs_norm == 0.0 {
            p.iter_mut().for_each(|v| *v = 0.0);
            return Ok(SorStats { sweeps: 0, relative_l1_residual: 0.0 });
        }
        let mut rel = self.residual_l1(p, rhs) / rhs_norm;
        let mut sweeps = 0;
        let mut growth = 0usize;
        let mut last = f64::INFINITY;
        while rel >= tol {
            if sweeps >= max_sweeps {
                return Err(Error::NotConverged { solver: "SOR", iterations: sweeps, residual: rel });
            }
            let est = self.sweep(p, rhs) / rhs_norm;
            sweeps += 1;
            if !est.is_finite() {
                return Err(Error::Diverged { solver: "SOR", iterations: sweeps });
            }
            growth = if est > last { growth + 1 } else { 0 };
            if growth >= 100 {
                return Err(Error::Diverged { solver: "SOR", iterations: sweeps });
            }
            last = est;
            // the in-sweep estimate lags one sweep; confirm with the true residual
            if est < tol {
                rel = self.residual_l1(p, rhs) / rhs_norm;
            }
        }
        remove_mean(p);
        Ok(SorStats { sweeps, relative_l1_residual: rel })
    }
}

/// Solves the periodic 5-point `lap p = rhs` by SOR from `initial` until the
/// relative l1 residual is below `opts.sor_rel_l1_tol`; the mean of `p` is 0.
pub fn sor_poisson(rhs: &ScalarField, opts: &SolveOptions, initial: &ScalarField) -> Result<(ScalarField, SorStats)> {
    let g = match rhs.grid() {
        Grid::Two(g) => *g,
        Grid::One(_) => return Err(Error::InvalidArgument("SOR solver is 2D".into())),
    };
    initial.same_layout(rhs.grid(), rhs.location())?;
    opts.validate()?;
    let sor = Sor::new(g.nx(), g.ny(), g.spacing(), opts.sor_omega)?;
    let mut p = initial.values().to_vec();
    let mut b = rhs.values().to_vec();
    let rel_sum = relative_grid_sum(&b);
    if rel_sum > RHS_COMPATIBILITY_LIMIT && opts.rhs_policy == RhsPolicy::Strict {
        return Err(Error::IncompatibleRhs { relative: rel_sum, limit: RHS_COMPATIBILITY_LIMIT });
    }
    let stats = sor.solve(&mut p, &mut b, opts.sor_rel_l1_tol, opts.max_iterations)?;
    Ok((ScalarField::from_parts(*rhs.grid(), rhs.location(), p), stats))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeStepper {
    pub scheme: Scheme,
    pub dt: f64,
}

impl TimeStepper {
    pub fn new(scheme: Scheme, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { scheme, dt })
    }

    /// Explicit penalty terms need `dt` below each limit (`eta_d`, `eta_n`,
    /// `1/Ra`). `allow_unstable` turns violations into no-ops.
    pub fn check_stability(&self, limits: &[(&str, f64)], allow_unstable: bool) -> Result<()> {
        if self.scheme != Scheme::ExplicitEuler || allow_unstable {
            return Ok(());
        }
        for (name, limit) in limits {
            if !(self.dt < *limit) {
                return Err(Error::Stability(format!("dt = {} must be below {name} = {limit}", self.dt)));
            }
        }
        Ok(())
    }
}

/// Crank-Nicolson integrator for `d_t phi = -F phi + b(t)` with the beta
/// terms of `b` taken at the half step.
pub struct CrankNicolson<'a> {
    problem: &'a PenalizedProblem,
    dt: f64,
    opts: SolveOptions,
    rhs: Vec<f64>,
    work: Vec<f64>,
    reaction: bool,
    pub last_stats: SolveStats,
}

impl<'a> CrankNicolson<'a> {
    pub fn new(problem: &'a PenalizedProblem, stepper: TimeStepper, opts: SolveOptions) -> Result<Self> {
        if stepper.scheme != Scheme::CrankNicolson {
            return Err(Error::InvalidArgument("stepper scheme must be Crank-Nicolson".into()));
        }
        opts.validate()?;
        let n = problem.len();
        Ok(Self {
            problem,
            dt: stepper.dt,
            opts,
            rhs: vec![0.0; n],
            work: vec![0.0; n],
            reaction: problem.dirichlet_mask().is_some(),
            last_stats: SolveStats::default(),
        })
    }

    /// Advances `phi` from `t` to `t + dt` in place.
    pub fn step(&mut self, phi: &mut [f64], t: f64) -> Result<()> {
        let half = 0.5 * self.dt;
        let explicit = PenalizedOperator { problem: self.problem, identity: 1.0, scale: -half, reaction: self.reaction };
        explicit.apply(phi, &mut self.work);
        let b = self.problem.assemble_rhs_at(t + half);
        for ((r, w), bi) in self.rhs.iter_mut().zip(&self.work).zip(b.values()) {
            *r = w + self.dt * bi;
        }
        let implicit = PenalizedOperator { problem: self.problem, identity: 1.0, scale: half, reaction: self.reaction };
        self.last_stats = conjugate_gradient(&implicit, &self.rhs, phi, &self.opts, false)?;
        Ok(())
    }
}

/// One Crank-Nicolson step of the penalized heat equation from time `t`.
pub fn step_heat_crank_nicolson(
    phi: &ScalarField,
    prob: &PenalizedProblem,
    stepper: TimeStepper,
    t: f64,
    opts: &SolveOptions,
) -> Result<ScalarField> {
    phi.same_layout(prob.grid(), Location::Node)?;
    let mut cn = CrankNicolson::new(prob, stepper, *opts)?;
    let mut v = phi.values().to_vec();
    cn.step(&mut v, t)?;
    Ok(ScalarField::from_parts(*prob.grid(), Location::Node, v))
}

/// `state + dt * rhs_function(state)`, rejecting non-finite results.
pub fn step_explicit_euler(state: &[f64], rhs_function: impl Fn(&[f64]) -> Vec<f64>, dt: f64) -> Result<Vec<f64>> {
    let rhs = rhs_function(state);
    if rhs.len() != state.len() {
        return Err(Error::Mismatch("rhs length differs from state".into()));
    }
    let mut next: Vec<f64> = state.iter().zip(&rhs).map(|(s, r)| s + dt * r).collect();
    euler_guard(&mut next, 0)?;
    Ok(next)
}

/// NaN/Inf guard used after every explicit step.
pub fn euler_guard(state: &mut [f64], step: usize) -> Result<()> {
    if state.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlowUp { step })
    }
}

//! Flat `key = value` case files.
//!
//! ```text
//! # same-flux case
//! problem = poisson1d-same
//! m = 1
//! alpha = 1
//! eta = 1e-8
//! n = 256
//! ```
//!
//! `#` starts a comment, blank lines are ignored, and unknown or repeated
//! keys are errors. `alpha` takes one number or a pair `ax, ay`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::{MeanRule, RhsPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    Poisson1dSame,
    Poisson1dDiff,
    Poisson1dEpsmix,
    Poisson1dMixedDn,
    Poisson2dSquare,
    Poisson2dAnnulus,
    Heat1d,
    Convection,
}

impl Problem {
    pub const ALL: [Problem; 8] = [
        Problem::Poisson1dSame,
        Problem::Poisson1dDiff,
        Problem::Poisson1dEpsmix,
        Problem::Poisson1dMixedDn,
        Problem::Poisson2dSquare,
        Problem::Poisson2dAnnulus,
        Problem::Heat1d,
        Problem::Convection,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Poisson1dSame => "poisson1d-same",
            Problem::Poisson1dDiff => "poisson1d-diff",
            Problem::Poisson1dEpsmix => "poisson1d-epsmix",
            Problem::Poisson1dMixedDn => "poisson1d-mixed-dn",
            Problem::Poisson2dSquare => "poisson2d-square",
            Problem::Poisson2dAnnulus => "poisson2d-annulus",
            Problem::Heat1d => "heat1d",
            Problem::Convection => "convection",
        }
    }

    pub fn is_2d(self) -> bool {
        matches!(self, Problem::Poisson2dSquare | Problem::Poisson2dAnnulus | Problem::Convection)
    }

    /// Side length of the periodic box.
    pub fn extent(self) -> f64 {
        match self {
            Problem::Heat1d => 2.0 * std::f64::consts::PI + 0.4,
            Problem::Convection => 2.0 * crate::convection::HALF_WIDTH,
            _ => 2.0 * std::f64::consts::PI,
        }
    }

    fn required(self) -> &'static [&'static str] {
        match self {
            Problem::Poisson1dSame | Problem::Poisson1dDiff => &["m", "alpha", "eta", "n"],
            Problem::Poisson1dEpsmix => &["epsilon", "alpha", "eta", "n"],
            Problem::Poisson1dMixedDn => &["alpha", "n"],
            Problem::Poisson2dSquare | Problem::Poisson2dAnnulus => &["alpha", "eta"],
            Problem::Heat1d => &["eta", "n", "dt", "t_end"],
            Problem::Convection => &["ra", "pr"],
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Problem::ALL.into_iter().find(|p| p.as_str() == s).ok_or_else(|| Error::Config(format!("unknown problem `{s}`")))
    }
}

/// A scalar or a per-direction pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    Scalar(f64),
    Pair(f64, f64),
}

impl Alpha {
    pub fn scalar(self) -> Result<f64> {
        match self {
            Alpha::Scalar(a) => Ok(a),
            Alpha::Pair(..) => Err(Error::Config("alpha must be a single number for this problem".into())),
        }
    }

    pub fn pair(self) -> [f64; 2] {
        match self {
            Alpha::Scalar(a) => [a, a],
            Alpha::Pair(a, b) => [a, b],
        }
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::Scalar(a) => write!(f, "{a:e}"),
            Alpha::Pair(a, b) => write!(f, "{a:e}, {b:e}"),
        }
    }
}

/// Mask value of the node on the Dirichlet wall of the mixed case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WallNode {
    /// `chi_d = 0`: the wall node is solved as fluid and the solid starts
    /// one node out, which costs first order in h.
    #[default]
    Fluid,
    /// `chi_d = 1/2`, the generic interface value.
    Half,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CaseConfig {
    pub problem: Option<Problem>,
    pub m: Option<u32>,
    pub alpha: Option<Alpha>,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub eta_d: Option<f64>,
    pub eta_n: Option<f64>,
    pub n: Option<usize>,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub ra: Option<f64>,
    pub pr: Option<f64>,
    pub rel_tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub rhs_policy: Option<RhsPolicy>,
    pub mean_rule: Option<MeanRule>,
    pub dirichlet_wall: Option<WallNode>,
    pub sor_omega: Option<f64>,
    pub sor_tol: Option<f64>,
    pub steady_rel_tol: Option<f64>,
    pub max_steps: Option<usize>,
    pub max_wall_seconds: Option<f64>,
    pub check_interval: Option<usize>,
    pub n_angles: Option<usize>,
    pub output_path: Option<PathBuf>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
}

impl CaseConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        text.parse()
    }

    pub fn problem(&self) -> Result<Problem> {
        self.problem.ok_or_else(|| Error::Config("missing required key `problem`".into()))
    }

    fn set(&mut self, key: &str, v: &str) -> Result<()> {
        fn put<T>(slot: &mut Option<T>, key: &str, value: T) -> Result<()> {
            if slot.is_some() {
                return Err(Error::Config(format!("key `{key}` given twice")));
            }
            *slot = Some(value);
            Ok(())
        }
        match key {
            "problem" => put(&mut self.problem, key, v.parse()?),
            "m" => put(&mut self.m, key, parse_num(key, v)?),
            "alpha" => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                let a = match parts.as_slice() {
                    [a] => Alpha::Scalar(parse_num(key, a)?),
                    [a, b] => Alpha::Pair(parse_num(key, a)?, parse_num(key, b)?),
                    _ => return Err(Error::Config(format!("`alpha`: expected one or two numbers, got `{v}`"))),
                };
                put(&mut self.alpha, key, a)
            }
            "epsilon" => put(&mut self.epsilon, key, parse_num(key, v)?),
            "eta" => put(&mut self.eta, key, parse_num(key, v)?),
            "eta_d" => put(&mut self.eta_d, key, parse_num(key, v)?),
            "eta_n" => put(&mut self.eta_n, key, parse_num(key, v)?),
            "n" => put(&mut self.n, key, parse_num(key, v)?),
            "nx" => put(&mut self.nx, key, parse_num(key, v)?),
            "ny" => put(&mut self.ny, key, parse_num(key, v)?),
            "dt" => put(&mut self.dt, key, parse_num(key, v)?),
            "t_end" => put(&mut self.t_end, key, parse_num(key, v)?),
            "ra" => put(&mut self.ra, key, parse_num(key, v)?),
            "pr" => put(&mut self.pr, key, parse_num(key, v)?),
            "rel_tolerance" => put(&mut self.rel_tolerance, key, parse_num(key, v)?),
            "max_iterations" => put(&mut self.max_iterations, key, parse_num(key, v)?),
            "rhs_policy" => {
                let p = match v {
                    "strict" => RhsPolicy::Strict,
                    "project-mean" => RhsPolicy::ProjectMean,
                    _ => return Err(Error::Config(format!("`rhs_policy`: expected strict or project-mean, got `{v}`"))),
                };
                put(&mut self.rhs_policy, key, p)
            }
            "mean_rule" => put(&mut self.mean_rule, key, v.parse()?),
            "dirichlet_wall" => {
                let w = match v {
                    "fluid" => WallNode::Fluid,
                    "half" => WallNode::Half,
                    _ => return Err(Error::Config(format!("`dirichlet_wall`: expected fluid or half, got `{v}`"))),
                };
                put(&mut self.dirichlet_wall, key, w)
            }
            "sor_omega" => put(&mut self.sor_omega, key, parse_num(key, v)?),
            "sor_tol" => put(&mut self.sor_tol, key, parse_num(key, v)?),
            "steady_rel_tol" => put(&mut self.steady_rel_tol, key, parse_num(key, v)?),
            "max_steps" => put(&mut self.max_steps, key, parse_num(key, v)?),
            "max_wall_seconds" => put(&mut self.max_wall_seconds, key, parse_num(key, v)?),
            "check_interval" => put(&mut self.check_interval, key, parse_num(key, v)?),
            "n_angles" => put(&mut self.n_angles, key, parse_num(key, v)?),
            "output_path" => put(&mut self.output_path, key, PathBuf::from(v)),
            _ => Err(Error::Config(format!("unknown key `{key}`"))),
        }
    }

    fn has(&self, key: &str) -> bool {
        match key {
            "m" => self.m.is_some(),
            "alpha" => self.alpha.is_some(),
            "epsilon" => self.epsilon.is_some(),
            "eta" => self.eta.is_some(),
            "n" => self.n.is_some(),
            "dt" => self.dt.is_some(),
            "t_end" => self.t_end.is_some(),
            "ra" => self.ra.is_some(),
            "pr" => self.pr.is_some(),
            _ => false,
        }
    }

    /// Checks that the keys the problem needs are present and in range.
    pub fn validate(&self) -> Result<()> {
        let problem = self.problem()?;
        for key in problem.required() {
            if !self.has(key) {
                return Err(Error::Config(format!("missing required key `{key}` for problem {problem}")));
            }
        }
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(Error::Config(format!("`{name}` must be positive, got {x}"))),
            _ => Ok(()),
        };
        positive("eta", self.eta)?;
        positive("eta_d", self.eta_d)?;
        positive("eta_n", self.eta_n)?;
        positive("dt", self.dt)?;
        positive("t_end", self.t_end)?;
        positive("pr", self.pr)?;
        positive("rel_tolerance", self.rel_tolerance)?;
        positive("sor_tol", self.sor_tol)?;
        positive("steady_rel_tol", self.steady_rel_tol)?;
        match problem {
            Problem::Poisson2dSquare | Problem::Poisson2dAnnulus => {
                if self.n.is_none() && (self.nx.is_none() || self.ny.is_none()) {
                    return Err(Error::Config(format!("missing required key `n` (or `nx` and `ny`) for problem {problem}")));
                }
            }
            Problem::Poisson1dMixedDn => {
                if self.eta.is_none() && (self.eta_d.is_none() || self.eta_n.is_none()) {
                    return Err(Error::Config(format!("missing required key `eta` (or `eta_d` and `eta_n`) for problem {problem}")));
                }
            }
            Problem::Convection => {
                if self.n.is_none() && (self.nx.is_none() || self.ny.is_none()) {
                    return Err(Error::Config(format!("missing required key `n` (or `nx` and `ny`) for problem {problem}")));
                }
                if self.eta.is_none() && (self.eta_d.is_none() || self.eta_n.is_none()) {
                    return Err(Error::Config(format!("missing required key `eta` (or `eta_d` and `eta_n`) for problem {problem}")));
                }
                if self.ra.is_some_and(|r| r < 0.0) {
                    return Err(Error::Config("`ra` must be non-negative".into()));
                }
            }
            _ => {}
        }
        if let (Some(m), Problem::Poisson1dDiff) = (self.m, problem) {
            if m % 2 == 0 {
                return Err(Error::Config("`m` must be odd for poisson1d-diff".into()));
            }
        }
        if self.m == Some(0) {
            return Err(Error::Config("`m` must be positive".into()));
        }
        if let Some(a) = self.alpha {
            if matches!(a, Alpha::Pair(..)) && problem != Problem::Poisson2dSquare {
                return Err(Error::Config(format!("`alpha` pair is only valid for poisson2d-square, not {problem}")));
            }
        }
        Ok(())
    }

    /// Grid sizes: `[n, 1]` in 1D, `[nx, ny]` in 2D.
    pub fn grid_size(&self) -> Result<[usize; 2]> {
        let problem = self.problem()?;
        let need = |v: Option<usize>, k: &str| v.ok_or_else(|| Error::Config(format!("missing required key `{k}`")));
        if problem.is_2d() {
            match (self.nx, self.ny) {
                (Some(x), Some(y)) => Ok([x, y]),
                _ => {
                    let n = need(self.n, "n")?;
                    Ok([self.nx.unwrap_or(n), self.ny.unwrap_or(n)])
                }
            }
        } else {
            Ok([need(self.n, "n")?, 1])
        }
    }

    pub fn eta_d(&self) -> Option<f64> {
        self.eta_d.or(self.eta)
    }

    pub fn eta_n(&self) -> Option<f64> {
        self.eta_n.or(self.eta)
    }

    /// The penalization parameter reported in tables.
    pub fn reported_eta(&self) -> f64 {
        self.eta.or(self.eta_n).unwrap_or(f64::NAN)
    }

    /// Copy with every grid direction set to `n`.
    pub fn with_n(&self, n: usize) -> Self {
        let mut c = self.clone();
        c.n = Some(n);
        c.nx = None;
        c.ny = None;
        c
    }

    /// Copy with all penalization parameters set to `eta`.
    pub fn with_eta(&self, eta: f64) -> Self {
        let mut c = self.clone();
        c.eta = Some(eta);
        c.eta_d = None;
        c.eta_n = None;
        c
    }
}

impl FromStr for CaseConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut cfg = CaseConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(Error::Config(format!("line {}: empty value for `{key}`", lineno + 1)));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", lineno + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

impl fmt::Display for CaseConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        macro_rules! line {
            ($name:literal, $v:expr) => {
                if let Some(v) = &$v {
                    writeln!(f, "{} = {}", $name, v)?;
                }
            };
        }
        line!("problem", self.problem);
        line!("m", self.m);
        line!("alpha", self.alpha);
        line!("epsilon", self.epsilon);
        line!("eta", self.eta);
        line!("eta_d", self.eta_d);
        line!("eta_n", self.eta_n);
        line!("n", self.n);
        line!("nx", self.nx);
        line!("ny", self.ny);
        line!("dt", self.dt);
        line!("t_end", self.t_end);
        line!("ra", self.ra);
        line!("pr", self.pr);
        line!("rel_tolerance", self.rel_tolerance);
        line!("max_iterations", self.max_iterations);
        if let Some(p) = self.rhs_policy {
            writeln!(f, "rhs_policy = {}", if p == RhsPolicy::Strict { "strict" } else { "project-mean" })?;
        }
        if let Some(r) = self.mean_rule {
            writeln!(f, "mean_rule = {}", r.as_str())?;
        }
        if let Some(w) = self.dirichlet_wall {
            writeln!(f, "dirichlet_wall = {}", if w == WallNode::Fluid { "fluid" } else { "half" })?;
        }
        line!("sor_omega", self.sor_omega);
        line!("sor_tol", self.sor_tol);
        line!("steady_rel_tol", self.steady_rel_tol);
        line!("max_steps", self.max_steps);
        line!("max_wall_seconds", self.max_wall_seconds);
        line!("check_interval", self.check_interval);
        line!("n_angles", self.n_angles);
        if let Some(p) = &self.output_path {
            writeln!(f, "output_path = {}", p.display())?;
        }
        Ok(())
    }
}

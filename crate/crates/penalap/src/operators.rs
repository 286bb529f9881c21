//! Second-order face stencils and the matrix-free penalized operator
//! `F v = -div(theta grad v)`, plus right-hand-side assembly.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{mask_at, theta_field, Geometry, Grid, Location, MaskField, ScalarField, ScalarFn, VectorFn};

/// Flux-like values at faces. Same layout type as any other field; the
/// location is `FaceX` or `FaceY`.
pub type FluxField = ScalarField;

/// Index of the neighbour of `k` one step forward (`+1`) or backward (`-1`)
/// along direction `d`, wrapping periodically.
#[inline]
pub(crate) fn neighbor(shape: [usize; 2], k: usize, d: usize, forward: bool) -> usize {
    let [nx, ny] = shape;
    if d == 0 {
        let i = k % nx;
        let base = k - i;
        if forward {
            base + if i + 1 == nx { 0 } else { i + 1 }
        } else {
            base + if i == 0 { nx - 1 } else { i - 1 }
        }
    } else {
        let n = nx * ny;
        if forward {
            if k + nx >= n {
                k + nx - n
            } else {
                k + nx
            }
        } else if k < nx {
            k + n - nx
        } else {
            k - nx
        }
    }
}

fn check_direction(grid: &Grid, d: usize) -> Result<()> {
    if d >= grid.dims() {
        return Err(Error::InvalidArgument(format!("direction {d} on a {}D grid", grid.dims())));
    }
    Ok(())
}

/// `(f_{i+1} - f_i)/h` at the face between node `i` and its forward
/// neighbour along `direction`.
pub fn diff_half(field: &ScalarField, direction: usize) -> Result<FluxField> {
    let grid = *field.grid();
    check_direction(&grid, direction)?;
    field.same_layout(&grid, Location::Node)?;
    let h = grid.spacing()[direction];
    let shape = grid.shape();
    let v = field.values();
    let out = (0..v.len()).map(|k| (v[neighbor(shape, k, direction, true)] - v[k]) / h).collect();
    Ok(ScalarField::from_parts(grid, Location::face(direction), out))
}

/// `(f_i + f_{i+1})/2` at the face between node `i` and its forward neighbour.
pub fn interp_half(field: &ScalarField, direction: usize) -> Result<FluxField> {
    let grid = *field.grid();
    check_direction(&grid, direction)?;
    field.same_layout(&grid, Location::Node)?;
    let shape = grid.shape();
    let v = field.values();
    let out = (0..v.len()).map(|k| 0.5 * (v[k] + v[neighbor(shape, k, direction, true)])).collect();
    Ok(ScalarField::from_parts(grid, Location::face(direction), out))
}

/// Prescribed flux offset `beta` carrying the Neumann data.
#[derive(Clone)]
pub enum Beta {
    Zero,
    /// Spatially constant vector (1D reads the first entry).
    Constant([f64; 2]),
    /// Closed-form vector field with optional closed-form divergence.
    Field {
        value: VectorFn,
        divergence: Option<ScalarFn>,
    },
}

impl Beta {
    pub fn constant_1d(alpha: f64) -> Self {
        Beta::Constant([alpha, 0.0])
    }

    pub fn field(
        value: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + 'static,
        divergence: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Beta::Field { value: Arc::new(value), divergence: Some(Arc::new(divergence)) }
    }

    pub fn value(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            Beta::Zero => [0.0, 0.0],
            Beta::Constant(c) => *c,
            Beta::Field { value, .. } => value(p[0], p[1]),
        }
    }
}

impl fmt::Debug for Beta {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Beta::Zero => write!(f, "Beta::Zero"),
            Beta::Constant(c) => write!(f, "Beta::Constant({c:?})"),
            Beta::Field { divergence, .. } => {
                write!(f, "Beta::Field {{ divergence: {} }}", if divergence.is_some() { "analytic" } else { "none" })
            }
        }
    }
}

/// Source term `f` of the Poisson problem.
#[derive(Clone)]
pub enum Source {
    Zero,
    Analytic(ScalarFn),
    /// Node values, one per grid point.
    Sampled(Vec<f64>),
}

impl Source {
    pub fn analytic(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Source::Analytic(Arc::new(f))
    }
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Zero => write!(f, "Source::Zero"),
            Source::Analytic(_) => write!(f, "Source::Analytic"),
            Source::Sampled(v) => write!(f, "Source::Sampled({} values)", v.len()),
        }
    }
}

/// How mask-dependent coefficients are obtained at faces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaceCoefficients {
    /// Evaluate the analytic mask and beta at the face position.
    #[default]
    Analytic,
    /// Average the two neighbouring node values.
    Interpolated,
}

/// How `div beta` is evaluated at nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DivergenceMode {
    #[default]
    Analytic,
    /// `(beta(x + h/2) - beta(x - h/2))/h` per direction. Adds its own O(h^2) error.
    CentralDifference,
}

#[derive(Debug, Clone)]
struct DirichletPenalty {
    chi: MaskField,
    eta: f64,
}

/// Everything needed to apply the penalized operator and build its
/// right-hand side on one grid.
#[derive(Clone)]
pub struct PenalizedProblem {
    grid: Grid,
    chi: MaskField,
    chi_n: MaskField,
    theta_faces: Vec<ScalarField>,
    flux_offset_faces: Vec<Vec<f64>>,
    div_beta: Vec<f64>,
    source_nodes: Vec<f64>,
    dirichlet: Option<DirichletPenalty>,
    eta_n: f64,
    beta: Beta,
    beta_scale: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl fmt::Debug for PenalizedProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PenalizedProblem")
            .field("grid", &self.grid)
            .field("eta_n", &self.eta_n)
            .field("beta", &self.beta)
            .field("eta_d", &self.dirichlet.as_ref().map(|d| d.eta))
            .field("time_dependent", &self.beta_scale.is_some())
            .finish()
    }
}

pub struct ProblemBuilder {
    grid: Grid,
    neumann: Geometry,
    eta_n: f64,
    beta: Beta,
    source: Source,
    dirichlet: Option<(Geometry, f64)>,
    beta_scale: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    faces: FaceCoefficients,
    divergence: DivergenceMode,
}

impl ProblemBuilder {
    pub fn beta(mut self, beta: Beta) -> Self {
        self.beta = beta;
        self
    }

    pub fn source(mut self, source: Source) -> Self {
        self.source = source;
        self
    }

    /// Adds a Dirichlet solid whose fluid side is `fluid` (mask 1 where the
    /// value should be pinned to zero), penalized with `eta_d`.
    pub fn dirichlet(mut self, fluid: Geometry, eta_d: f64) -> Self {
        self.dirichlet = Some((fluid, eta_d));
        self
    }

    /// Multiplies beta by `s(t)`; used for time-dependent Neumann data.
    pub fn beta_time_scale(mut self, s: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.beta_scale = Some(Arc::new(s));
        self
    }

    pub fn face_coefficients(mut self, mode: FaceCoefficients) -> Self {
        self.faces = mode;
        self
    }

    pub fn divergence(mut self, mode: DivergenceMode) -> Self {
        self.divergence = mode;
        self
    }

    pub fn build(self) -> Result<PenalizedProblem> {
        let grid = self.grid;
        let n = grid.len();
        let dims = grid.dims();
        let chi_n = MaskField::from_geometry(grid, Location::Node, &self.neumann)?;
        // theta_field validates eta_n
        theta_field(&chi_n, self.eta_n)?;

        let dirichlet = match self.dirichlet {
            Some((geom, eta_d)) => {
                if !(eta_d > 0.0) || !eta_d.is_finite() {
                    return Err(Error::InvalidArgument(format!("eta_d must be positive, got {eta_d}")));
                }
                Some(DirichletPenalty { chi: MaskField::from_geometry(grid, Location::Node, &geom)?, eta: eta_d })
            }
            None => None,
        };
        let chi = match &dirichlet {
            Some(d) => chi_n.union(&d.chi)?,
            None => chi_n.clone(),
        };

        if let (Beta::Field { divergence: None, .. }, DivergenceMode::Analytic) = (&self.beta, self.divergence) {
            return Err(Error::InvalidArgument("non-constant beta needs an analytic divergence (or central-difference mode)".into()));
        }

        let h = grid.spacing();
        let mut theta_faces = Vec::with_capacity(dims);
        let mut flux_offset_faces = Vec::with_capacity(dims);
        for d in 0..dims {
            let loc = Location::face(d);
            let (chi_face, offset): (Vec<f64>, Vec<f64>) = match self.faces {
                FaceCoefficients::Analytic => grid
                    .positions(loc)
                    .map(|p| {
                        let c = mask_at(&self.neumann, p);
                        let b = if c > 0.0 { c * self.beta.value(p)[d] } else { 0.0 };
                        (c, b)
                    })
                    .unzip(),
                FaceCoefficients::Interpolated => {
                    let shape = grid.shape();
                    let cb: Vec<f64> = grid
                        .positions(Location::Node)
                        .zip(chi_n.values())
                        .map(|(p, &c)| if c > 0.0 { c * self.beta.value(p)[d] } else { 0.0 })
                        .collect();
                    (0..n)
                        .map(|k| {
                            let kp = neighbor(shape, k, d, true);
                            (0.5 * (chi_n.values()[k] + chi_n.values()[kp]), 0.5 * (cb[k] + cb[kp]))
                        })
                        .unzip()
                }
            };
            let theta = chi_face.iter().map(|&c| 1.0 - c + self.eta_n * c).collect();
            theta_faces.push(ScalarField::from_parts(grid, loc, theta));
            flux_offset_faces.push(offset);
        }

        let div_beta: Vec<f64> = match (&self.beta, self.divergence) {
            (Beta::Zero | Beta::Constant(_), _) => vec![0.0; n],
            (Beta::Field { divergence: Some(div), .. }, DivergenceMode::Analytic) => {
                grid.positions(Location::Node).zip(chi_n.values()).map(|(p, &c)| if c > 0.0 { div(p[0], p[1]) } else { 0.0 }).collect()
            }
            (Beta::Field { .. }, _) => grid
                .positions(Location::Node)
                .map(|p| {
                    (0..dims)
                        .map(|d| {
                            let mut lo = p;
                            let mut hi = p;
                            lo[d] -= 0.5 * h[d];
                            hi[d] += 0.5 * h[d];
                            (self.beta.value(hi)[d] - self.beta.value(lo)[d]) / h[d]
                        })
                        .sum()
                })
                .collect(),
        };

        let fluid = chi.values();
        let source_nodes = match &self.source {
            Source::Zero => vec![0.0; n],
            Source::Analytic(f) => {
                grid.positions(Location::Node).zip(fluid).map(|(p, &c)| if c < 1.0 { f(p[0], p[1]) } else { 0.0 }).collect()
            }
            Source::Sampled(v) => {
                if v.len() != n {
                    return Err(Error::Mismatch(format!("sampled source has {} values, grid has {n}", v.len())));
                }
                v.clone()
            }
        };
        if source_nodes.iter().zip(fluid).any(|(f, &c)| c < 1.0 && !f.is_finite()) {
            return Err(Error::InvalidArgument("source is not finite in the fluid".into()));
        }

        Ok(PenalizedProblem {
            grid,
            chi,
            chi_n,
            theta_faces,
            flux_offset_faces,
            div_beta,
            source_nodes,
            dirichlet,
            eta_n: self.eta_n,
            beta: self.beta,
            beta_scale: self.beta_scale,
        })
    }
}

impl PenalizedProblem {
    /// Starts a problem whose Neumann solid is the complement of `neumann`.
    pub fn builder(grid: Grid, neumann: Geometry, eta_n: f64) -> ProblemBuilder {
        ProblemBuilder {
            grid,
            neumann,
            eta_n,
            beta: Beta::Zero,
            source: Source::Zero,
            dirichlet: None,
            beta_scale: None,
            faces: FaceCoefficients::Analytic,
            divergence: DivergenceMode::Analytic,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Total mask (Neumann plus Dirichlet solids) at nodes.
    pub fn mask(&self) -> &MaskField {
        &self.chi
    }

    pub fn neumann_mask(&self) -> &MaskField {
        &self.chi_n
    }

    pub fn dirichlet_mask(&self) -> Option<&MaskField> {
        self.dirichlet.as_ref().map(|d| &d.chi)
    }

    pub fn eta_d(&self) -> Option<f64> {
        self.dirichlet.as_ref().map(|d| d.eta)
    }

    pub fn eta_n(&self) -> f64 {
        self.eta_n
    }

    pub fn beta(&self) -> &Beta {
        &self.beta
    }

    pub fn theta(&self, direction: usize) -> &ScalarField {
        &self.theta_faces[direction]
    }

    pub fn beta_scale(&self, t: f64) -> f64 {
        self.beta_scale.as_ref().map_or(1.0, |s| s(t))
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `y = F x` for the flux-form operator without reaction terms.
    pub fn apply_flux_form(&self, x: &[f64], y: &mut [f64]) {
        let shape = self.grid.shape();
        let h = self.grid.spacing();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (d, theta) in self.theta_faces.iter().enumerate() {
            let t = theta.values();
            let inv_h2 = 1.0 / (h[d] * h[d]);
            if d == 0 {
                let nx = shape[0];
                for (row_x, row_y, row_t) in
                    x.chunks_exact(nx).zip(y.chunks_exact_mut(nx)).zip(t.chunks_exact(nx)).map(|((a, b), c)| (a, b, c))
                {
                    // flux through face i+1/2, scattered to both neighbours
                    for i in 0..nx {
                        let ip = if i + 1 == nx { 0 } else { i + 1 };
                        let q = row_t[i] * (row_x[ip] - row_x[i]) * inv_h2;
                        row_y[i] -= q;
                        row_y[ip] += q;
                    }
                }
            } else {
                let n = x.len();
                for k in 0..n {
                    let kp = neighbor(shape, k, 1, true);
                    let q = t[k] * (x[kp] - x[k]) * inv_h2;
                    y[k] -= q;
                    y[kp] += q;
                }
            }
        }
    }

    /// `y = (F + diag(chi_d/eta_d)) x`; equals `F x` without a Dirichlet solid.
    pub fn apply_with_reaction(&self, x: &[f64], y: &mut [f64]) {
        self.apply_flux_form(x, y);
        if let Some(dp) = &self.dirichlet {
            let inv = 1.0 / dp.eta;
            for ((yi, xi), c) in y.iter_mut().zip(x).zip(dp.chi.values()) {
                *yi += c * inv * xi;
            }
        }
    }

    /// Diagonal of `F` (plus the reaction term when `reaction` is set).
    pub fn diagonal(&self, reaction: bool) -> Vec<f64> {
        let shape = self.grid.shape();
        let h = self.grid.spacing();
        let mut diag = vec![0.0; self.len()];
        for (d, theta) in self.theta_faces.iter().enumerate() {
            let t = theta.values();
            let inv_h2 = 1.0 / (h[d] * h[d]);
            for (k, dk) in diag.iter_mut().enumerate() {
                *dk += (t[k] + t[neighbor(shape, k, d, false)]) * inv_h2;
            }
        }
        if let (true, Some(dp)) = (reaction, &self.dirichlet) {
            for (dk, c) in diag.iter_mut().zip(dp.chi.values()) {
                *dk += c / dp.eta;
            }
        }
        diag
    }

    /// Right-hand side with the beta terms scaled to time `t`.
    pub fn assemble_rhs_at(&self, t: f64) -> ScalarField {
        let s = self.beta_scale(t);
        let shape = self.grid.shape();
        let h = self.grid.spacing();
        let chi = self.chi.values();
        let chi_n = self.chi_n.values();
        let mut b: Vec<f64> = (0..self.len()).map(|k| (1.0 - chi[k]) * self.source_nodes[k] - s * chi_n[k] * self.div_beta[k]).collect();
        for (d, off) in self.flux_offset_faces.iter().enumerate() {
            let inv_h = s / h[d];
            for (k, bk) in b.iter_mut().enumerate() {
                *bk += (off[k] - off[neighbor(shape, k, d, false)]) * inv_h;
            }
        }
        ScalarField::from_parts(self.grid, Location::Node, b)
    }
}

/// `F v` with `(Fv)_i = -(1/h)[theta_{i+1/2}(v_{i+1}-v_i)/h - theta_{i-1/2}(v_i-v_{i-1})/h]`
/// summed over directions. The beta offset is not included.
pub fn apply_penalized_laplacian(v: &ScalarField, prob: &PenalizedProblem) -> Result<ScalarField> {
    v.same_layout(prob.grid(), Location::Node)?;
    let mut out = vec![0.0; v.values().len()];
    prob.apply_flux_form(v.values(), &mut out);
    Ok(ScalarField::from_parts(*prob.grid(), Location::Node, out))
}

/// `b = (1-chi) f - chi_n div(beta) + D(chi_n beta)` with `D` the face
/// divergence stencil.
pub fn assemble_rhs(prob: &PenalizedProblem) -> ScalarField {
    prob.assemble_rhs_at(0.0)
}

/// `|sum b| / sum |b|`; zero for an all-zero vector.
pub fn relative_grid_sum(b: &[f64]) -> f64 {
    let abs: f64 = b.iter().map(|v| v.abs()).sum();
    if abs == 0.0 {
        0.0
    } else {
        b.iter().sum::<f64>().abs() / abs
    }
}

/// For each 1D interface node, `|fluid flux - (eta * solid flux + beta)|`
/// with one-sided second-order differences on each side.
pub fn residual_flux_continuity(v: &ScalarField, prob: &PenalizedProblem, interface_points: &[f64]) -> Result<Vec<f64>> {
    let grid = match prob.grid() {
        Grid::One(g) => *g,
        Grid::Two(_) => return Err(Error::InvalidArgument("flux continuity check is 1D only".into())),
    };
    v.same_layout(prob.grid(), Location::Node)?;
    let n = grid.n() as isize;
    let h = grid.spacing();
    let chi = prob.neumann_mask().values();
    let vals = v.values();
    let at = |i: isize| vals[i.rem_euclid(n) as usize];
    let mask = |i: isize| chi[i.rem_euclid(n) as usize];
    interface_points
        .iter()
        .map(|&xs| {
            let s = ((xs - grid.origin()) / h).round() as isize;
            let node_x = grid.origin() + s as f64 * h;
            if (node_x - xs).abs() > 1e-9 * h || mask(s) != 0.5 {
                return Err(Error::InvalidArgument(format!("{xs} is not an interface node")));
            }
            let right = |i: isize| (-3.0 * at(i) + 4.0 * at(i + 1) - at(i + 2)) / (2.0 * h);
            let left = |i: isize| (3.0 * at(i) - 4.0 * at(i - 1) + at(i - 2)) / (2.0 * h);
            let (fluid, solid) = match (mask(s - 1), mask(s + 1)) {
                (l, r) if l < 0.5 && r > 0.5 => (left(s), right(s)),
                (l, r) if l > 0.5 && r < 0.5 => (right(s), left(s)),
                _ => return Err(Error::InvalidArgument(format!("{xs} does not separate fluid from solid"))),
            };
            let beta = prob.beta().value([xs, 0.0])[0] * prob.beta_scale(0.0);
            Ok((fluid - (prob.eta_n() * solid + beta)).abs())
        })
        .collect()
}

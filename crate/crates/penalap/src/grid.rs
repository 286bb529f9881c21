//! Periodic Cartesian grids, staggered locations, geometry masks and
//! fluid-weighted quadrature.
//!
//! Grids are node based: node `i` sits at `origin + i*h`. Staggered
//! quantities live half a spacing to the right (and/or up) of their node.
//! 2D storage is row-major with `x` fastest, index `j*nx + i`.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative width of the band in which a point counts as on an interface.
pub const INTERFACE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    origin: f64,
    extent: f64,
}

impl Grid1D {
    pub fn new(n: usize, origin: f64, extent: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 points, got {n}")));
        }
        if !(extent > 0.0) || !extent.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidArgument(format!("bad grid extent {extent} or origin {origin}")));
        }
        Ok(Self { n, origin, extent })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    extent: [f64; 2],
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, origin: [f64; 2], extent: [f64; 2]) -> Result<Self> {
        Grid1D::new(nx, origin[0], extent[0])?;
        Grid1D::new(ny, origin[1], extent[1])?;
        Ok(Self { nx, ny, origin, extent })
    }

    /// Square `n x n` grid.
    pub fn square(n: usize, origin: f64, extent: f64) -> Result<Self> {
        Self::new(n, n, [origin, origin], [extent, extent])
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }

    pub fn spacing(&self) -> [f64; 2] {
        [self.extent[0] / self.nx as f64, self.extent[1] / self.ny as f64]
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [self.origin[0] + i as f64 * h[0], self.origin[1] + j as f64 * h[1]]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    One(Grid1D),
    Two(Grid2D),
}

impl Grid {
    pub fn dims(&self) -> usize {
        match self {
            Grid::One(_) => 1,
            Grid::Two(_) => 2,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Grid::One(g) => g.n,
            Grid::Two(g) => g.nx * g.ny,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points per direction; the second entry is 1 in 1D.
    pub fn shape(&self) -> [usize; 2] {
        match self {
            Grid::One(g) => [g.n, 1],
            Grid::Two(g) => [g.nx, g.ny],
        }
    }

    /// Spacings per direction; the second entry is 1 in 1D so that
    /// products give the cell measure in either dimension.
    pub fn spacing(&self) -> [f64; 2] {
        match self {
            Grid::One(g) => [g.spacing(), 1.0],
            Grid::Two(g) => g.spacing(),
        }
    }

    /// Length (1D) or area (2D) of one cell.
    pub fn cell_measure(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1]
    }

    pub fn max_extent(&self) -> f64 {
        match self {
            Grid::One(g) => g.extent,
            Grid::Two(g) => g.extent[0].max(g.extent[1]),
        }
    }

    /// Coordinates of entry `idx` at `location`. 1D grids report `y = 0`.
    pub fn position(&self, location: Location, idx: usize) -> [f64; 2] {
        let off = location.offset();
        match self {
            Grid::One(g) => [g.origin + (idx as f64 + off[0]) * g.spacing(), 0.0],
            Grid::Two(g) => {
                let h = g.spacing();
                let (i, j) = (idx % g.nx, idx / g.nx);
                [g.origin[0] + (i as f64 + off[0]) * h[0], g.origin[1] + (j as f64 + off[1]) * h[1]]
            }
        }
    }

    pub fn positions(&self, location: Location) -> impl Iterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(move |k| self.position(location, k))
    }

    pub fn check_location(&self, location: Location) -> Result<()> {
        if self.dims() == 1 && matches!(location, Location::FaceY | Location::Corner) {
            return Err(Error::Mismatch(format!("{location:?} is not a 1D location")));
        }
        Ok(())
    }
}

impl From<Grid1D> for Grid {
    fn from(g: Grid1D) -> Self {
        Grid::One(g)
    }
}

impl From<Grid2D> for Grid {
    fn from(g: Grid2D) -> Self {
        Grid::Two(g)
    }
}

/// Where on the grid a value lives. In 1D `FaceX` is the half point `x_{i+1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Location {
    Node,
    FaceX,
    FaceY,
    Corner,
}

impl Location {
    /// Offset from the owning node in units of the spacing.
    pub fn offset(self) -> [f64; 2] {
        match self {
            Location::Node => [0.0, 0.0],
            Location::FaceX => [0.5, 0.0],
            Location::FaceY => [0.0, 0.5],
            Location::Corner => [0.5, 0.5],
        }
    }

    /// Face location normal to direction `d`.
    pub fn face(d: usize) -> Location {
        if d == 0 {
            Location::FaceX
        } else {
            Location::FaceY
        }
    }
}

/// Fluid region described as a closed-form shape. Points strictly inside
/// the shape are fluid (mask 0); the shape boundary gets fractional values.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Interval {
        a: f64,
        b: f64,
    },
    Box {
        x0: f64,
        x1: f64,
        y0: f64,
        y1: f64,
    },
    Annulus {
        center: [f64; 2],
        r_in: f64,
        r_out: f64,
    },
    Disk {
        center: [f64; 2],
        r: f64,
    },
    /// Fluid outside the inner shape.
    Complement(Box<Shape>),
}

impl Shape {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match self {
            Shape::Interval { a, b } if !(a < b) => bad(format!("interval needs a < b, got ({a}, {b})")),
            Shape::Box { x0, x1, y0, y1 } if !(x0 < x1 && y0 < y1) => bad("degenerate box".into()),
            Shape::Annulus { r_in, r_out, .. } if !(0.0 <= *r_in && r_in < r_out) => {
                bad(format!("annulus needs 0 <= r_in < r_out, got ({r_in}, {r_out})"))
            }
            Shape::Disk { r, .. } if !(*r > 0.0) => bad(format!("disk radius must be positive, got {r}")),
            Shape::Complement(inner) => inner.validate(),
            _ => Ok(()),
        }
    }

    fn eval(&self, p: [f64; 2], tol: f64) -> f64 {
        match self {
            Shape::Interval { a, b } => {
                let x = p[0];
                if (x - a).abs() <= tol || (x - b).abs() <= tol {
                    0.5
                } else if *a < x && x < *b {
                    0.0
                } else {
                    1.0
                }
            }
            Shape::Box { x0, x1, y0, y1 } => {
                let on_x = (p[0] - x0).abs() <= tol || (p[0] - x1).abs() <= tol;
                let on_y = (p[1] - y0).abs() <= tol || (p[1] - y1).abs() <= tol;
                let in_x = *x0 < p[0] && p[0] < *x1 && !on_x;
                let in_y = *y0 < p[1] && p[1] < *y1 && !on_y;
                match (in_x, on_x, in_y, on_y) {
                    (true, _, true, _) => 0.0,
                    (_, true, _, true) => 0.25,
                    (true, _, _, true) | (_, true, true, _) => 0.5,
                    _ => 1.0,
                }
            }
            Shape::Annulus { center, r_in, r_out } => {
                let r = radius(p, *center);
                if (r - r_in).abs() <= tol || (r - r_out).abs() <= tol {
                    0.5
                } else if *r_in < r && r < *r_out {
                    0.0
                } else {
                    1.0
                }
            }
            Shape::Disk { center, r } => {
                let d = radius(p, *center);
                if (d - r).abs() <= tol {
                    0.5
                } else if d < *r {
                    0.0
                } else {
                    1.0
                }
            }
            Shape::Complement(inner) => match inner.eval(p, tol) {
                // corners keep the quarter value from either side
                0.25 => 0.25,
                c => 1.0 - c,
            },
        }
    }
}

fn radius(p: [f64; 2], c: [f64; 2]) -> f64 {
    (p[0] - c[0]).hypot(p[1] - c[1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    shape: Shape,
    tolerance: f64,
}

impl Geometry {
    /// Geometry inside a periodic box of the given (largest) extent; the
    /// interface band is `INTERFACE_TOLERANCE * extent`.
    pub fn new(shape: Shape, extent: f64) -> Result<Self> {
        shape.validate()?;
        if !(extent > 0.0) {
            return Err(Error::InvalidArgument(format!("extent must be positive, got {extent}")));
        }
        Ok(Self { shape, tolerance: INTERFACE_TOLERANCE * extent })
    }

    pub fn with_tolerance(shape: Shape, tolerance: f64) -> Result<Self> {
        shape.validate()?;
        if !(tolerance >= 0.0) {
            return Err(Error::InvalidArgument("negative interface tolerance".into()));
        }
        Ok(Self { shape, tolerance })
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Mask value of `geometry` at `position`: 0 in fluid, 1 in solid, 1/2 on an
/// interface, 1/4 at a box corner. 1D geometries read only `position[0]`.
pub fn mask_at(geometry: &Geometry, position: [f64; 2]) -> f64 {
    geometry.shape.eval(position, geometry.tolerance)
}

/// Closed-form scalar function of position.
pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// Closed-form vector function of position.
pub type VectorFn = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    location: Location,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, location: Location, values: Vec<f64>) -> Result<Self> {
        grid.check_location(location)?;
        if values.len() != grid.len() {
            return Err(Error::Mismatch(format!("{} values for a grid of {}", values.len(), grid.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value at index {k}")));
        }
        Ok(Self { grid, location, values })
    }

    pub fn zeros(grid: Grid, location: Location) -> Self {
        Self { grid, location, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, location: Location, c: f64) -> Self {
        Self { grid, location, values: vec![c; grid.len()] }
    }

    /// Samples `f(x, y)` at every entry of `location`.
    pub fn from_fn(grid: Grid, location: Location, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.positions(location).map(|p| f(p[0], p[1])).collect();
        Self { grid, location, values }
    }

    pub(crate) fn from_parts(grid: Grid, location: Location, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, location, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn location(&self) -> Location {
        self.location
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn same_layout(&self, grid: &Grid, location: Location) -> Result<()> {
        if &self.grid != grid || self.location != location {
            return Err(Error::Mismatch(format!("expected {location:?} on {grid:?}, got {:?} on {:?}", self.location, self.grid)));
        }
        Ok(())
    }
}

/// Velocity-like field: one component per direction, each at its own location.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub x: ScalarField,
    pub y: ScalarField,
}

impl VectorField {
    /// MAC staggering: x-component on x-faces, y-component on y-faces.
    pub fn staggered_zeros(grid: Grid2D) -> Self {
        Self { x: ScalarField::zeros(grid.into(), Location::FaceX), y: ScalarField::zeros(grid.into(), Location::FaceY) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskField {
    grid: Grid,
    location: Location,
    values: Vec<f64>,
}

impl MaskField {
    /// Evaluates the analytic mask at every entry of `location`.
    pub fn from_geometry(grid: Grid, location: Location, geometry: &Geometry) -> Result<Self> {
        grid.check_location(location)?;
        let values = grid.positions(location).map(|p| mask_at(geometry, p)).collect();
        Ok(Self { grid, location, values })
    }

    /// Pointwise sum of masks with disjoint supports, e.g. Dirichlet plus
    /// Neumann solids.
    pub fn union(&self, other: &MaskField) -> Result<Self> {
        if self.grid != other.grid || self.location != other.location {
            return Err(Error::Mismatch("masks on different layouts".into()));
        }
        let values: Vec<f64> = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        if values.iter().any(|&v| v > 1.0) {
            return Err(Error::InvalidArgument("mask supports overlap".into()));
        }
        Ok(Self { grid: self.grid, location: self.location, values })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn location(&self) -> Location {
        self.location
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The fluid indicator `1 - chi`.
    pub fn fluid_indicator(&self) -> ScalarField {
        ScalarField::from_parts(self.grid, self.location, self.values.iter().map(|c| 1.0 - c).collect())
    }

    /// Entries that count as fluid for error measurement: `chi <= 1/2`.
    pub fn is_fluid_point(&self, k: usize) -> bool {
        self.values[k] <= 0.5
    }
}

/// `theta = 1 - chi + eta*chi` at the mask's locations.
pub fn theta_field(mask: &MaskField, eta: f64) -> Result<ScalarField> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    let values = mask.values.iter().map(|&c| 1.0 - c + eta * c).collect();
    Ok(ScalarField::from_parts(mask.grid, mask.location, values))
}

/// Integral over the fluid with weights `1 - chi`, `h * sum (1 - chi_i) f_i`;
/// on-interface nodes get the half weight of the trapezoid rule.
pub fn integrate_fluid(field: &ScalarField, mask: &MaskField) -> Result<f64> {
    field.same_layout(&mask.grid, mask.location)?;
    let s: f64 = field.values.iter().zip(&mask.values).map(|(f, c)| (1.0 - c) * f).sum();
    Ok(s * field.grid.cell_measure())
}

/// Measure of the fluid region as seen by [`integrate_fluid`].
pub fn fluid_measure(mask: &MaskField) -> f64 {
    mask.values.iter().map(|c| 1.0 - c).sum::<f64>() * mask.grid.cell_measure()
}

//! Uniform symmetric discretization of `[-L, L]` with an odd node count so
//! that `x = 0` is a node, plus the quadrature, parity, and finite-difference
//! operators every other module is built on.

use crate::error::{CoreError, Result};
use crate::linalg::BandedSym;
use std::sync::Arc;

/// Uniform truncated mesh on `[-L, L]`. Nodes are constructed symmetrically
/// (`x_i = (i - m) * dx`, `m = (n-1)/2`), so `x_m == 0.0` exactly and
/// `x_i == -x_{n-1-i}` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
    dx: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Arc<Self>> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(CoreError::InvalidGrid(format!("half_width must be positive, got {half_width}")));
        }
        if n < 3 || n % 2 == 0 {
            return Err(CoreError::InvalidGrid(format!("n must be odd and >= 3, got {n}")));
        }
        let m = (n - 1) / 2;
        let dx = half_width / m as f64;
        let nodes = (0..n).map(|i| (i as f64 - m as f64) * dx).collect();
        Ok(Arc::new(Self { half_width, n, dx, nodes }))
    }

    /// Grid with spacing no coarser than `dx_max`.
    pub fn from_spacing(half_width: f64, dx_max: f64) -> Result<Arc<Self>> {
        if !(dx_max > 0.0) {
            return Err(CoreError::InvalidGrid(format!("dx must be positive, got {dx_max}")));
        }
        let m = (half_width / dx_max - 1e-12).ceil().max(1.0) as usize;
        Self::new(half_width, 2 * m + 1)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Index of the node at `x = 0`.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Number of interior (non-boundary) nodes; always odd.
    pub fn n_interior(&self) -> usize {
        self.n - 2
    }

    /// Index of `x = 0` within the interior numbering.
    pub fn interior_center(&self) -> usize {
        self.center() - 1
    }
}

/// Real-valued samples on the grid nodes. States keep homogeneous Dirichlet
/// values (exact zeros) at the two boundary nodes.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.n(), "value vector length must match grid");
        Self { grid, values }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self { grid: grid.clone(), values: vec![0.0; grid.n()] }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self { grid: grid.clone(), values }
    }

    /// Build from interior values, zero-padding the boundary nodes.
    pub fn from_interior(grid: &Arc<Grid>, interior: &[f64]) -> Self {
        assert_eq!(interior.len(), grid.n_interior());
        let mut values = vec![0.0; grid.n()];
        values[1..grid.n() - 1].copy_from_slice(interior);
        Self { grid: grid.clone(), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn interior(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn reflect(&self) -> GridFunction {
        let mut values = self.values.clone();
        values.reverse();
        Self { grid: self.grid.clone(), values }
    }

    pub fn symmetrize(&self) -> GridFunction {
        let n = self.values.len();
        let values = (0..n).map(|i| 0.5 * (self.values[i] + self.values[n - 1 - i])).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn antisymmetric_part(&self) -> GridFunction {
        let n = self.values.len();
        let values = (0..n).map(|i| 0.5 * (self.values[i] - self.values[n - 1 - i])).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    pub fn add_scaled(&self, other: &GridFunction, c: f64) -> GridFunction {
        assert_eq!(self.values.len(), other.values.len());
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// L² norm under the grid quadrature.
    pub fn l2_norm(&self) -> f64 {
        quadrature_of(&self.grid, |i| self.values[i] * self.values[i]).sqrt()
    }
}

/// Trapezoidal quadrature over the grid; exact for piecewise-linear
/// interpolants. Kahan-compensated so symmetric cancellations stay at
/// machine level.
pub fn quadrature(f: &GridFunction) -> f64 {
    quadrature_of(f.grid(), |i| f.values()[i])
}

/// Quadrature of a node-indexed integrand.
pub fn quadrature_of(grid: &Grid, f: impl Fn(usize) -> f64) -> f64 {
    let n = grid.n();
    let dx = grid.dx();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut add = |term: f64| {
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    };
    add(0.5 * f(0));
    for i in 1..n - 1 {
        add(f(i));
    }
    add(0.5 * f(n - 1));
    sum * dx
}

/// Weighted inner product `∫ f g` under the same trapezoid rule.
pub fn inner(f: &GridFunction, g: &GridFunction) -> f64 {
    assert_eq!(f.grid().n(), g.grid().n());
    quadrature_of(f.grid(), |i| f.values()[i] * g.values()[i])
}

/// Central finite-difference stencil for `-d²/dx²` on the interior nodes with
/// homogeneous Dirichlet data (ghost nodes treated as zero): 3-point for
/// order 2, 5-point for order 4. Symmetric and positive semidefinite.
pub fn second_derivative_matrix(grid: &Grid, order: usize) -> Result<BandedSym> {
    let n = grid.n_interior();
    let h2 = grid.dx() * grid.dx();
    match order {
        2 => {
            let diag = vec![2.0 / h2; n];
            let off1 = vec![-1.0 / h2; n - 1];
            Ok(BandedSym::from_bands(diag, vec![off1]))
        }
        4 => {
            let diag = vec![30.0 / (12.0 * h2); n];
            let off1 = vec![-16.0 / (12.0 * h2); n - 1];
            let off2 = vec![1.0 / (12.0 * h2); n - 2];
            Ok(BandedSym::from_bands(diag, vec![off1, off2]))
        }
        other => Err(CoreError::InvalidOrder(other)),
    }
}

/// Discrete first derivative by central differences (one-sided at the two
/// boundary nodes); used for diagnostics and plots, not for the solver core.
pub fn first_derivative(f: &GridFunction) -> GridFunction {
    let n = f.grid().n();
    let dx = f.grid().dx();
    let v = f.values();
    let mut out = vec![0.0; n];
    out[0] = (v[1] - v[0]) / dx;
    out[n - 1] = (v[n - 1] - v[n - 2]) / dx;
    for i in 1..n - 1 {
        out[i] = (v[i + 1] - v[i - 1]) / (2.0 * dx);
    }
    GridFunction::new(f.grid().clone(), out)
}

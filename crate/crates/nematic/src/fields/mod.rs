//! Structured-grid fields on a periodic box.
//!
//! The domain is the periodic torus `[0,L1) × [0,L2) × [0,L3)` sampled on a
//! regular grid of `n1 × n2 × n3` nodes (`x_i = i·h`). A "2D-in-3D" mode is
//! supported by setting `n3 = 1`: fields depend on `(x1, x2)` only but keep
//! full 3-component vectors and 3×3 matrices, so the complete tensor algebra
//! is exercised.
//!
//! Derivatives come in two backends (spectral via FFT, 2nd-order central
//! differences); see [`diff`]. Discrete norms use the cell-sum quadrature
//! `∫ f ≈ Σ f(x) · h1 h2 h3`.

pub mod diff;
pub(crate) mod fft;
pub mod q;

pub use diff::{
    curl, div_matrix, div_vector, grad_scalar, grad_vector, laplacian_scalar, laplacian_vector,
    project_divfree, Backend,
};
pub use q::{frank_energy, variational_q, variational_q_expanded};

use crate::tensor::{Mat3, Vec3};
use crate::{Error, Result};

/// Default tolerance for the unit-norm director invariant.
pub const UNIT_TOL: f64 = 1e-8;

/// A periodic structured grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    /// Nodes per axis; an axis with `n = 1` is inactive (2D mode).
    pub n: [usize; 3],
    /// Box length per axis.
    pub len: [f64; 3],
}

impl Grid {
    /// Creates a grid. Active axes need `n ≥ 4`; inactive axes have `n = 1`.
    pub fn new(n: [usize; 3], len: [f64; 3]) -> Result<Grid> {
        for a in 0..3 {
            if n[a] != 1 && n[a] < 4 {
                return Err(Error::InvalidConfig(format!(
                    "grid needs n >= 4 on active axes (axis {a} has n = {})",
                    n[a]
                )));
            }
            if !(len[a] > 0.0) || !len[a].is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "grid box length must be positive (axis {a} has L = {})",
                    len[a]
                )));
            }
        }
        Ok(Grid { n, len })
    }

    /// Square 2D-in-3D grid with `n × n × 1` nodes on `[0,l)²`.
    pub fn square_2d(n: usize, l: f64) -> Result<Grid> {
        Grid::new([n, n, 1], [l, l, l])
    }

    /// Cubic 3D grid with `n³` nodes on `[0,l)³`.
    pub fn cube(n: usize, l: f64) -> Result<Grid> {
        Grid::new([n, n, n], [l, l, l])
    }

    /// Total number of nodes.
    pub fn cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    /// Grid spacing per axis, `h = L/n`.
    pub fn spacing(&self) -> [f64; 3] {
        [
            self.len[0] / self.n[0] as f64,
            self.len[1] / self.n[1] as f64,
            self.len[2] / self.n[2] as f64,
        ]
    }

    /// Smallest spacing over the active axes (CFL scale).
    pub fn min_spacing(&self) -> f64 {
        let h = self.spacing();
        (0..3)
            .filter(|&a| self.n[a] > 1)
            .map(|a| h[a])
            .fold(f64::INFINITY, f64::min)
    }

    /// Cell volume `h1 h2 h3`.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h[0] * h[1] * h[2]
    }

    /// Box volume `L1 L2 L3`.
    pub fn volume(&self) -> f64 {
        self.len[0] * self.len[1] * self.len[2]
    }

    /// Flat index of node `(i, j, k)`; the first axis is fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.n[1] + j) * self.n[0] + i
    }

    /// Node coordinates of flat index `c`.
    pub fn coords(&self, c: usize) -> Vec3 {
        let (i, j, k) = self.unpack(c);
        let h = self.spacing();
        Vec3([i as f64 * h[0], j as f64 * h[1], k as f64 * h[2]])
    }

    /// Inverse of [`Grid::idx`].
    #[inline]
    pub fn unpack(&self, c: usize) -> (usize, usize, usize) {
        let i = c % self.n[0];
        let j = (c / self.n[0]) % self.n[1];
        let k = c / (self.n[0] * self.n[1]);
        (i, j, k)
    }

    /// Signed integer frequency for spectral index `i` on an axis with `n`
    /// nodes: `0, 1, …, n/2, −n/2+1, …, −1`.
    pub(crate) fn freq(n: usize, i: usize) -> i64 {
        if i as i64 <= n as i64 / 2 {
            i as i64
        } else {
            i as i64 - n as i64
        }
    }

    /// Angular wavenumber `2π·freq/L` for spectral index `i` on `axis`.
    pub fn wavenumber(&self, axis: usize, i: usize) -> f64 {
        2.0 * std::f64::consts::PI * Grid::freq(self.n[axis], i) as f64 / self.len[axis]
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::FieldInvariant(format!(
                "grid mismatch: {:?} vs {:?}",
                self, other
            )));
        }
        Ok(())
    }
}

macro_rules! field_type {
    ($(#[$doc:meta])* $name:ident, $elem:ty, $zero:expr) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq)]
        pub struct $name {
            /// The grid the per-node values live on.
            pub grid: Grid,
            /// Per-node values, indexed by [`Grid::idx`].
            pub data: Vec<$elem>,
        }

        impl $name {
            /// Constant-zero field.
            pub fn zeros(grid: Grid) -> Self {
                Self { grid, data: vec![$zero; grid.cells()] }
            }

            /// Builds a field by evaluating `f` at every node position.
            pub fn from_fn(grid: Grid, mut f: impl FnMut(Vec3) -> $elem) -> Self {
                let data = (0..grid.cells()).map(|c| f(grid.coords(c))).collect();
                Self { grid, data }
            }

            /// Pointwise map into a new field of the same shape.
            pub fn map(&self, mut f: impl FnMut(&$elem) -> $elem) -> Self {
                Self { grid: self.grid, data: self.data.iter().map(|x| f(x)).collect() }
            }

            /// Fails unless both fields share one grid.
            pub fn check_same_grid(&self, other: &$name) -> Result<()> {
                self.grid.check_same(&other.grid)
            }

            /// True iff every entry is finite.
            pub fn is_finite(&self) -> bool {
                self.data.iter().all(|x| x.is_finite())
            }
        }
    };
}

field_type!(
    /// A scalar field (pressure, energy density, ...).
    ScalarField, f64, 0.0
);
field_type!(
    /// A 3-vector field (velocity, director, forcing, ...).
    VectorField, Vec3, Vec3::ZERO
);
field_type!(
    /// A 3×3-matrix field (gradients, stresses, ...).
    MatrixField, Mat3, Mat3::ZERO
);

impl ScalarField {
    /// Linear combination `self + other·s`.
    pub fn axpy(&self, s: f64, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + s * b)
                .collect(),
        }
    }
}

impl VectorField {
    /// Linear combination `self + other·s`.
    pub fn axpy(&self, s: f64, other: &VectorField) -> VectorField {
        VectorField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b * s)
                .collect(),
        }
    }

    /// Pointwise difference.
    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.axpy(-1.0, other)
    }

    /// One scalar component as a field.
    pub fn component(&self, c: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|v| v[c]).collect(),
        }
    }

    /// Assembles a vector field from three scalar components.
    pub fn from_components(x: &ScalarField, y: &ScalarField, z: &ScalarField) -> VectorField {
        VectorField {
            grid: x.grid,
            data: (0..x.data.len())
                .map(|c| Vec3([x.data[c], y.data[c], z.data[c]]))
                .collect(),
        }
    }
}

impl MatrixField {
    /// One scalar entry as a field.
    pub fn entry(&self, i: usize, j: usize) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|m| m[(i, j)]).collect(),
        }
    }
}

/// A unit-norm director field wrapper; construction validates
/// `| |d(x)| − 1 | ≤ unit_tol` at every node.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectorField {
    /// The underlying vector field.
    pub field: VectorField,
}

impl DirectorField {
    /// Validates the unit-norm invariant and wraps the field.
    pub fn new(field: VectorField, unit_tol: f64) -> Result<DirectorField> {
        let worst = unit_norm_drift(&field);
        if worst > unit_tol {
            return Err(Error::FieldInvariant(format!(
                "director norm drift {worst:.3e} exceeds tolerance {unit_tol:.3e}"
            )));
        }
        Ok(DirectorField { field })
    }

    /// Builds a director by normalizing `f`'s values pointwise.
    pub fn from_fn_normalized(grid: Grid, mut f: impl FnMut(Vec3) -> Vec3) -> DirectorField {
        DirectorField {
            field: VectorField::from_fn(grid, |x| f(x).normalized()),
        }
    }

    /// Renormalizes every node to exact unit length.
    pub fn renormalize(&mut self) {
        for d in &mut self.field.data {
            *d = d.normalized();
        }
    }
}

/// Worst-case `| |d(x)| − 1 |` over the grid.
pub fn unit_norm_drift(field: &VectorField) -> f64 {
    field
        .data
        .iter()
        .map(|d| (d.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}

/// A discretely divergence-free velocity wrapper; construction validates
/// `‖div v‖∞ ≤ div_tol` with the spectral divergence.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityField {
    /// The underlying vector field.
    pub field: VectorField,
}

impl VelocityField {
    /// Validates the divergence-free invariant and wraps the field.
    pub fn new(field: VectorField, div_tol: f64) -> Result<VelocityField> {
        let d = div_vector(&field, Backend::Spectral);
        let worst = linf(&d);
        if worst > div_tol {
            return Err(Error::FieldInvariant(format!(
                "velocity divergence {worst:.3e} exceeds tolerance {div_tol:.3e}"
            )));
        }
        Ok(VelocityField { field })
    }
}

// ──────────────────────────────────────────────────────────────────────
// Norms and quadrature
// ──────────────────────────────────────────────────────────────────────

/// `∫ f dx` by the cell-sum quadrature.
pub fn integrate(f: &ScalarField) -> f64 {
    f.data.iter().sum::<f64>() * f.grid.cell_volume()
}

/// `L²` norm of a scalar field.
pub fn l2(f: &ScalarField) -> f64 {
    lp(f, 2.0)
}

/// `L⁶` norm of a scalar field.
pub fn l6(f: &ScalarField) -> f64 {
    lp(f, 6.0)
}

/// `L^p` norm of a scalar field.
pub fn lp(f: &ScalarField, p: f64) -> f64 {
    (f.data.iter().map(|x| x.abs().powf(p)).sum::<f64>() * f.grid.cell_volume()).powf(1.0 / p)
}

/// `L^∞` norm of a scalar field.
pub fn linf(f: &ScalarField) -> f64 {
    f.data.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// `H¹` seminorm of a scalar field, `‖∇f‖_L²` with the given backend.
pub fn h1_seminorm(f: &ScalarField, backend: Backend) -> f64 {
    l2_vec(&grad_scalar(f, backend))
}

/// `L²` norm of a vector field.
pub fn l2_vec(v: &VectorField) -> f64 {
    lp_vec(v, 2.0)
}

/// `L^p` norm of a vector field (pointwise Euclidean magnitude).
pub fn lp_vec(v: &VectorField, p: f64) -> f64 {
    (v.data.iter().map(|x| x.norm().powf(p)).sum::<f64>() * v.grid.cell_volume()).powf(1.0 / p)
}

/// `L^∞` norm of a vector field.
pub fn linf_vec(v: &VectorField) -> f64 {
    v.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `L²` norm of a matrix field (pointwise Frobenius magnitude).
pub fn l2_mat(m: &MatrixField) -> f64 {
    lp_mat(m, 2.0)
}

/// `L^p` norm of a matrix field.
pub fn lp_mat(m: &MatrixField, p: f64) -> f64 {
    (m.data.iter().map(|x| x.norm().powf(p)).sum::<f64>() * m.grid.cell_volume()).powf(1.0 / p)
}

/// `L^∞` norm of a matrix field.
pub fn linf_mat(m: &MatrixField) -> f64 {
    m.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// `L²` inner product of two scalar fields.
pub fn inner(a: &ScalarField, b: &ScalarField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x * y)
        .sum::<f64>()
        * a.grid.cell_volume()
}

/// `L²` inner product of two vector fields.
pub fn inner_vec(a: &VectorField, b: &VectorField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.dot(*y))
        .sum::<f64>()
        * a.grid.cell_volume()
}

/// `L²` inner product of two matrix fields.
pub fn inner_mat(a: &MatrixField, b: &MatrixField) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.ddot(*y))
        .sum::<f64>()
        * a.grid.cell_volume()
}

/// Sobolev `W^{1,p}` norm of a vector field:
/// `(‖v‖_p^p + ‖∇v‖_p^p)^{1/p}`.
pub fn w1p_vec(v: &VectorField, p: f64, backend: Backend) -> f64 {
    let g = grad_vector(v, backend);
    (lp_vec(v, p).powf(p) + lp_mat(&g, p).powf(p)).powf(1.0 / p)
}

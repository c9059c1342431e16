//! Derivative operators on periodic fields.
//!
//! Two interchangeable backends are provided:
//!
//! * [`Backend::Spectral`] — exact differentiation of the trigonometric
//!   interpolant via FFT (Nyquist mode zeroed for first derivatives).
//! * [`Backend::Central`] — 2nd-order periodic central differences.
//!
//! All operators follow the convention `(∇v)_ij = ∂_j v_i`, so the rows of
//! a vector gradient are component gradients, and `(div T)_i = Σ_j ∂_j T_ij`
//! contracts the second (derivative) index.

use super::fft;
use super::{Grid, MatrixField, ScalarField, VectorField};
use crate::tensor::{uncross, Mat3, Vec3};

/// Which discrete differentiation scheme to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// FFT-based spectral differentiation.
    #[default]
    Spectral,
    /// Second-order periodic central differences.
    Central,
}

impl std::str::FromStr for Backend {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Backend> {
        match s {
            "spectral" => Ok(Backend::Spectral),
            "central" => Ok(Backend::Central),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown backend '{other}' (expected 'spectral' or 'central')"
            ))),
        }
    }
}

/// Central-difference `∂_axis` of flat scalar data.
fn central_deriv(grid: Grid, data: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.n[axis];
    if n == 1 {
        return vec![0.0; data.len()];
    }
    let h = grid.spacing()[axis];
    let mut out = vec![0.0; data.len()];
    for c in 0..data.len() {
        let (i, j, k) = grid.unpack(c);
        let mut up = [i, j, k];
        let mut dn = [i, j, k];
        up[axis] = (up[axis] + 1) % n;
        dn[axis] = (dn[axis] + n - 1) % n;
        out[c] = (data[grid.idx(up[0], up[1], up[2])] - data[grid.idx(dn[0], dn[1], dn[2])])
            / (2.0 * h);
    }
    out
}

/// Central-difference Laplacian of flat scalar data.
fn central_laplacian(grid: Grid, data: &[f64]) -> Vec<f64> {
    let h = grid.spacing();
    let mut out = vec![0.0; data.len()];
    for c in 0..data.len() {
        let (i, j, k) = grid.unpack(c);
        let here = data[c];
        let mut acc = 0.0;
        for axis in 0..3 {
            let n = grid.n[axis];
            if n == 1 {
                continue;
            }
            let mut up = [i, j, k];
            let mut dn = [i, j, k];
            up[axis] = (up[axis] + 1) % n;
            dn[axis] = (dn[axis] + n - 1) % n;
            acc += (data[grid.idx(up[0], up[1], up[2])] - 2.0 * here
                + data[grid.idx(dn[0], dn[1], dn[2])])
                / (h[axis] * h[axis]);
        }
        out[c] = acc;
    }
    out
}

fn deriv_flat(grid: Grid, data: &[f64], axis: usize, backend: Backend) -> Vec<f64> {
    match backend {
        Backend::Spectral => fft::deriv(grid, data, axis),
        Backend::Central => central_deriv(grid, data, axis),
    }
}

/// Gradient `∇f` of a scalar field.
pub fn grad_scalar(f: &ScalarField, backend: Backend) -> VectorField {
    let parts: Vec<Vec<f64>> = (0..3)
        .map(|axis| deriv_flat(f.grid, &f.data, axis, backend))
        .collect();
    VectorField {
        grid: f.grid,
        data: (0..f.data.len())
            .map(|c| Vec3([parts[0][c], parts[1][c], parts[2][c]]))
            .collect(),
    }
}

/// Gradient `(∇v)_ij = ∂_j v_i` of a vector field.
pub fn grad_vector(v: &VectorField, backend: Backend) -> MatrixField {
    let mut cols = Vec::with_capacity(9);
    for i in 0..3 {
        let comp: Vec<f64> = v.data.iter().map(|x| x[i]).collect();
        for j in 0..3 {
            cols.push(deriv_flat(v.grid, &comp, j, backend));
        }
    }
    MatrixField {
        grid: v.grid,
        data: (0..v.data.len())
            .map(|c| {
                Mat3::from_fn(|i, j| cols[3 * i + j][c])
            })
            .collect(),
    }
}

/// Divergence `div v = Σ_i ∂_i v_i` of a vector field.
pub fn div_vector(v: &VectorField, backend: Backend) -> ScalarField {
    let mut out = vec![0.0; v.data.len()];
    for i in 0..3 {
        let comp: Vec<f64> = v.data.iter().map(|x| x[i]).collect();
        let d = deriv_flat(v.grid, &comp, i, backend);
        for (o, x) in out.iter_mut().zip(d) {
            *o += x;
        }
    }
    ScalarField { grid: v.grid, data: out }
}

/// Row-wise divergence `(div T)_i = Σ_j ∂_j T_ij` of a matrix field.
pub fn div_matrix(t: &MatrixField, backend: Backend) -> VectorField {
    let mut out = vec![Vec3::ZERO; t.data.len()];
    for i in 0..3 {
        for j in 0..3 {
            let comp: Vec<f64> = t.data.iter().map(|m| m[(i, j)]).collect();
            let d = deriv_flat(t.grid, &comp, j, backend);
            for (o, x) in out.iter_mut().zip(d) {
                o.0[i] += x;
            }
        }
    }
    VectorField { grid: t.grid, data: out }
}

/// Curl of a vector field, computed as `2·uncross((∇v)_skw)`.
pub fn curl(v: &VectorField, backend: Backend) -> VectorField {
    let g = grad_vector(v, backend);
    VectorField {
        grid: v.grid,
        data: g.data.iter().map(|m| uncross(m.skw()) * 2.0).collect(),
    }
}

/// Laplacian of a scalar field.
pub fn laplacian_scalar(f: &ScalarField, backend: Backend) -> ScalarField {
    let data = match backend {
        Backend::Spectral => fft::laplacian(f.grid, &f.data),
        Backend::Central => central_laplacian(f.grid, &f.data),
    };
    ScalarField { grid: f.grid, data }
}

/// Componentwise Laplacian of a vector field.
pub fn laplacian_vector(v: &VectorField, backend: Backend) -> VectorField {
    let mut comps = Vec::with_capacity(3);
    for i in 0..3 {
        let comp: Vec<f64> = v.data.iter().map(|x| x[i]).collect();
        comps.push(match backend {
            Backend::Spectral => fft::laplacian(v.grid, &comp),
            Backend::Central => central_laplacian(v.grid, &comp),
        });
    }
    VectorField {
        grid: v.grid,
        data: (0..v.data.len())
            .map(|c| Vec3([comps[0][c], comps[1][c], comps[2][c]]))
            .collect(),
    }
}

/// Solves the Helmholtz problem `(I − αΔ) u = f` componentwise in Fourier
/// space (`α ≥ 0`); the backbone of the semi-implicit time stepper.
pub fn helmholtz_inverse(f: &VectorField, alpha: f64) -> VectorField {
    let grid = f.grid;
    let mut comps = Vec::with_capacity(3);
    for i in 0..3 {
        let comp: Vec<f64> = f.data.iter().map(|x| x[i]).collect();
        let mut spec = fft::fft3(grid, &comp);
        for (c, z) in spec.iter_mut().enumerate() {
            let (a, b, d) = grid.unpack(c);
            let idx3 = [a, b, d];
            let mut k2 = 0.0;
            for axis in 0..3 {
                let kv = grid.wavenumber(axis, idx3[axis]);
                k2 += kv * kv;
            }
            *z /= 1.0 + alpha * k2;
        }
        comps.push(fft::ifft3_real(grid, spec));
    }
    VectorField {
        grid,
        data: (0..grid.cells())
            .map(|c| Vec3([comps[0][c], comps[1][c], comps[2][c]]))
            .collect(),
    }
}

/// Leray projection onto divergence-free fields.
///
/// In Fourier space `P v̂(k) = v̂ − k (k·v̂)/|k|²` for `k ≠ 0`; the mean mode
/// is preserved. Returns the projected field together with the scalar
/// potential `φ` such that `v = Pv + ∇φ` (mean-zero).
pub fn project_divfree(v: &VectorField) -> (VectorField, ScalarField) {
    let grid = v.grid;
    let mut spec: Vec<Vec<fft::C64>> = (0..3)
        .map(|i| {
            let comp: Vec<f64> = v.data.iter().map(|x| x[i]).collect();
            fft::fft3(grid, &comp)
        })
        .collect();
    // Wavenumbers consistent with the spectral first-derivative operator,
    // which zeroes the (signless) Nyquist mode: using the raw Nyquist k here
    // would leave a residual divergence as measured by `div_vector`.
    let kd = |axis: usize, m: usize| {
        let n = grid.n[axis];
        if n % 2 == 0 && m == n / 2 {
            0.0
        } else {
            grid.wavenumber(axis, m)
        }
    };
    let mut phi_spec = vec![fft::C64::new(0.0, 0.0); grid.cells()];
    for c in 0..grid.cells() {
        let (i, j, k) = grid.unpack(c);
        let idx3 = [i, j, k];
        let kv = [kd(0, idx3[0]), kd(1, idx3[1]), kd(2, idx3[2])];
        let k2 = kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2];
        if k2 == 0.0 {
            continue;
        }
        let kdotv = kv[0] * spec[0][c] + kv[1] * spec[1][c] + kv[2] * spec[2][c];
        // v̂ = Pv̂ + i k φ̂  ⇒  φ̂ = (k·v̂)/(i|k|²) = −i (k·v̂)/|k|².
        phi_spec[c] = fft::C64::new(0.0, -1.0) * kdotv / k2;
        for a in 0..3 {
            spec[a][c] -= kv[a] * kdotv / k2;
        }
    }
    let comps: Vec<Vec<f64>> = spec
        .into_iter()
        .map(|s| fft::ifft3_real(grid, s))
        .collect();
    let projected = VectorField {
        grid,
        data: (0..grid.cells())
            .map(|c| Vec3([comps[0][c], comps[1][c], comps[2][c]]))
            .collect(),
    };
    let phi = ScalarField {
        grid,
        data: fft::ifft3_real(grid, phi_spec),
    };
    (projected, phi)
}

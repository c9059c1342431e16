//! Minimal 3D FFT engine on top of `rustfft`.
//!
//! Transforms are applied axis by axis on the flat, first-axis-fastest
//! layout of [`super::Grid`]. Forward transforms are unnormalized; the
//! inverse divides by the total node count, so `ifft3(fft3(f)) = f`.

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::Grid;

/// Complex scalar used throughout the spectral backend.
pub type C64 = Complex<f64>;

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

/// Applies a 1D FFT along `axis` to every grid line of `data` in place.
fn fft_axis(grid: Grid, data: &mut [C64], axis: usize, inverse: bool) {
    let n = grid.n[axis];
    if n == 1 {
        return;
    }
    let fft = plan(n, inverse);
    let stride = match axis {
        0 => 1,
        1 => grid.n[0],
        _ => grid.n[0] * grid.n[1],
    };
    let mut line = vec![C64::new(0.0, 0.0); n];
    // Enumerate the starting node of every line along `axis`.
    let (na, nb, nc) = (grid.n[0], grid.n[1], grid.n[2]);
    for k in 0..nc {
        for j in 0..nb {
            for i in 0..na {
                let fixed = match axis {
                    0 => i == 0,
                    1 => j == 0,
                    _ => k == 0,
                };
                if !fixed {
                    continue;
                }
                let start = grid.idx(i, j, k);
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + m * stride];
                }
                fft.process(&mut line);
                for (m, slot) in line.iter().enumerate() {
                    data[start + m * stride] = *slot;
                }
            }
        }
    }
}

/// Forward 3D FFT of a real field.
pub fn fft3(grid: Grid, data: &[f64]) -> Vec<C64> {
    let mut out: Vec<C64> = data.iter().map(|&x| C64::new(x, 0.0)).collect();
    for axis in 0..3 {
        fft_axis(grid, &mut out, axis, false);
    }
    out
}

/// Inverse 3D FFT, returning the real part (the imaginary part is
/// numerical noise for transforms of real data).
pub fn ifft3_real(grid: Grid, mut spec: Vec<C64>) -> Vec<f64> {
    for axis in 0..3 {
        fft_axis(grid, &mut spec, axis, true);
    }
    let scale = 1.0 / grid.cells() as f64;
    spec.iter().map(|z| z.re * scale).collect()
}

/// Spectral partial derivative `∂_axis f` of a real field.
///
/// The derivative multiplier is `i·k`; the Nyquist mode (even `n`) has no
/// well-defined sign of `k` and is zeroed, which keeps the operator
/// skew-adjoint on the grid.
pub fn deriv(grid: Grid, data: &[f64], axis: usize) -> Vec<f64> {
    if grid.n[axis] == 1 {
        return vec![0.0; data.len()];
    }
    let mut spec = fft3(grid, data);
    let n = grid.n[axis];
    for (c, z) in spec.iter_mut().enumerate() {
        let (i, j, k) = grid.unpack(c);
        let m = [i, j, k][axis];
        let kval = if n % 2 == 0 && m == n / 2 {
            0.0
        } else {
            grid.wavenumber(axis, m)
        };
        *z *= C64::new(0.0, kval);
    }
    ifft3_real(grid, spec)
}

/// Spectral Laplacian `Δf` of a real field.
pub fn laplacian(grid: Grid, data: &[f64]) -> Vec<f64> {
    let mut spec = fft3(grid, data);
    for (c, z) in spec.iter_mut().enumerate() {
        let (i, j, k) = grid.unpack(c);
        let idx3 = [i, j, k];
        let mut k2 = 0.0;
        for axis in 0..3 {
            let kv = grid.wavenumber(axis, idx3[axis]);
            k2 += kv * kv;
        }
        *z *= -k2;
    }
    ifft3_real(grid, spec)
}

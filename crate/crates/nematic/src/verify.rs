//! The named property-check suite behind `nematic verify`.
//!
//! Every check mirrors one of the library's core identities — tensor-algebra
//! oracle equivalences, energy-form equivalences, derivative correctness,
//! the dissipation identity, and the discrete-calculus properties of the
//! field layer — as a deterministic pass/fail entry with a one-line detail.
//!
//! The dense Θ assembly used by the oracle comparisons is injectable so a
//! deliberately corrupted builder (sign flip in one delta block) is caught
//! and named by the report; see the tests.

use crate::fields::q::{frank_energy, variational_q_expanded, variational_q_unchecked};
use crate::fields::{
    curl, div_vector, grad_scalar, grad_vector, inner, inner_vec, l2_mat, linf, linf_vec,
    project_divfree, Backend, DirectorField, Grid, MatrixField, ScalarField, VectorField,
};
use crate::frank::{
    build_theta, energy_density_k_form, energy_density_small_k_form,
    energy_density_tensor_form, f_h, f_s, ElasticTensors, FrankConstants, ThetaTensor,
};
use crate::leslie::{
    dissipation_density, dissipation_identity_residual, leslie_stress,
    leslie_stress_reference, LeslieCoefficients,
};
use crate::tensor::{
    delta, eps, skw, sym, t3_dot_t3, t4_mat, t6_t3, Mat3, Tensor3, Tensor6, Vec3,
};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Result of one named property check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    /// Check group (e.g. `"tensor_kernel"`).
    pub group: &'static str,
    /// Name of the property.
    pub name: &'static str,
    /// Pass/fail.
    pub passed: bool,
    /// One-line diagnostic (max error, counts, …).
    pub detail: String,
}

/// Report of the full verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// All checks in execution order.
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    /// True iff every check passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `(group, passed, total)` counts in first-seen group order.
    pub fn group_counts(&self) -> Vec<(&'static str, usize, usize)> {
        let mut counts: Vec<(&'static str, usize, usize)> = Vec::new();
        for c in &self.checks {
            match counts.iter_mut().find(|(g, _, _)| *g == c.group) {
                Some(entry) => {
                    entry.2 += 1;
                    if c.passed {
                        entry.1 += 1;
                    }
                }
                None => counts.push((c.group, c.passed as usize, 1)),
            }
        }
        counts
    }

    /// Plain-text pass/fail table with per-group counts.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  [{}] {} — {}", c.group, c.name, c.detail);
        }
        let _ = writeln!(out);
        for (group, passed, total) in self.group_counts() {
            let _ = writeln!(out, "{group}: {passed}/{total} passed");
        }
        let verdict = if self.all_passed() { "ok" } else { "FAILED" };
        let _ = writeln!(out, "overall: {verdict}");
        out
    }
}

/// Assembles the dense rank-6 Θ from its closed-form coefficients; the
/// production path, overridable for mutation testing.
pub type DenseThetaBuilder<'a> = &'a dyn Fn(&ThetaTensor) -> Tensor6;

/// Runs the full suite with the production Θ assembly.
pub fn run_suite() -> VerifyReport {
    run_suite_with(&|t: &ThetaTensor| t.dense())
}

fn push(
    checks: &mut Vec<PropertyCheck>,
    group: &'static str,
    name: &'static str,
    outcome: Result<String, String>,
) {
    let (passed, detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    checks.push(PropertyCheck {
        group,
        name,
        passed,
        detail,
    });
}

/// `Ok(detail)` if `err ≤ tol`, `Err` otherwise.
fn tol_check(err: f64, tol: f64, label: &str) -> Result<String, String> {
    let msg = format!("max {label} {err:.2e} (tol {tol:.0e})");
    if err <= tol && err.is_finite() {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn rand_vec(r: &mut ChaCha8Rng) -> Vec3 {
    Vec3([
        r.gen_range(-2.0..2.0),
        r.gen_range(-2.0..2.0),
        r.gen_range(-2.0..2.0),
    ])
}

fn rand_unit(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = rand_vec(r);
        if v.norm() > 0.3 {
            return v.normalized();
        }
    }
}

fn rand_mat(r: &mut ChaCha8Rng) -> Mat3 {
    Mat3::from_fn(|_, _| r.gen_range(-2.0..2.0))
}

fn rand_constants(r: &mut ChaCha8Rng) -> FrankConstants {
    FrankConstants::new(
        r.gen_range(0.2..2.0),
        r.gen_range(0.2..2.0),
        r.gen_range(0.2..2.0),
    )
    .expect("positive moduli")
}

fn rand_admissible(r: &mut ChaCha8Rng) -> LeslieCoefficients {
    loop {
        let c = LeslieCoefficients {
            mu1: r.gen_range(0.1..2.0),
            mu2: r.gen_range(-1.0..1.0),
            mu3: r.gen_range(-1.0..1.0),
            mu4: r.gen_range(0.1..2.0),
            mu5: r.gen_range(0.0..2.0),
            mu6: r.gen_range(0.0..2.0),
            lambda: r.gen_range(-1.0..1.0),
        };
        if crate::leslie::validate_dissipativity(&c).is_empty() {
            return c;
        }
    }
}

/// A smooth band-limited periodic scalar (handful of Fourier modes).
fn random_trig_scalar(grid: Grid, rng: &mut ChaCha8Rng, kmax: i64) -> ScalarField {
    let modes: Vec<([i64; 3], f64, f64)> = (0..6)
        .map(|_| {
            let k = [
                if grid.n[0] > 1 { rng.gen_range(-kmax..=kmax) } else { 0 },
                if grid.n[1] > 1 { rng.gen_range(-kmax..=kmax) } else { 0 },
                if grid.n[2] > 1 { rng.gen_range(-kmax..=kmax) } else { 0 },
            ];
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .collect();
    ScalarField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|(k, a, b)| {
                let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
                a * phase.cos() + b * phase.sin()
            })
            .sum()
    })
}

fn random_trig_vector(grid: Grid, rng: &mut ChaCha8Rng, kmax: i64) -> VectorField {
    let x = random_trig_scalar(grid, rng, kmax);
    let y = random_trig_scalar(grid, rng, kmax);
    let z = random_trig_scalar(grid, rng, kmax);
    VectorField::from_components(&x, &y, &z)
}

/// Runs the full suite with an injectable dense Θ assembly.
pub fn run_suite_with(dense_theta: DenseThetaBuilder) -> VerifyReport {
    let mut checks = Vec::new();
    tensor_kernel_checks(&mut checks, dense_theta);
    oseen_frank_checks(&mut checks);
    leslie_checks(&mut checks);
    fields_checks(&mut checks);
    VerifyReport { checks }
}

fn tensor_kernel_checks(checks: &mut Vec<PropertyCheck>, dense_theta: DenseThetaBuilder) {
    // Levi-Civita contraction identity, exhaustively over all 3⁶ tuples:
    // ε_ijk ε_lmn = det[[δ_il, δ_im, δ_in], [δ_jl, …], [δ_kl, …]].
    let mut max_err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    for m in 0..3 {
                        for n in 0..3 {
                            let lhs = eps(i, j, k) * eps(l, m, n);
                            let rhs = delta(i, l) * (delta(j, m) * delta(k, n) - delta(j, n) * delta(k, m))
                                - delta(i, m) * (delta(j, l) * delta(k, n) - delta(j, n) * delta(k, l))
                                + delta(i, n) * (delta(j, l) * delta(k, m) - delta(j, m) * delta(k, l));
                            max_err = max_err.max((lhs - rhs).abs());
                        }
                    }
                }
            }
        }
    }
    push(
        checks,
        "tensor_kernel",
        "Levi-Civita product identity over all 3^6 index tuples",
        tol_check(max_err, 0.0, "error"),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(101);

    // Λ closed-form contraction vs dense nested loops.
    let mut max_err: f64 = 0.0;
    for _ in 0..500 {
        let c = rand_constants(&mut rng);
        let lam = crate::frank::build_lambda(c.k1, c.k2);
        let s = rand_mat(&mut rng);
        let diff = lam.contract(s) - t4_mat(&lam.dense(), s);
        max_err = max_err.max(diff.norm());
    }
    push(
        checks,
        "tensor_kernel",
        "Lambda closed-form contraction matches dense tensor (500 random)",
        tol_check(max_err, 1e-12, "error"),
    );

    // Θ closed-form contraction vs dense nested loops.
    let mut max_err: f64 = 0.0;
    for _ in 0..500 {
        let c = rand_constants(&mut rng);
        let th = build_theta(c.k3, c.k4, c.k5);
        let dense = dense_theta(&th);
        let (s, h) = (rand_mat(&mut rng), rand_vec(&mut rng));
        let closed = th.contract(s, h);
        let brute = t6_t3(&dense, &Tensor3::dyad(s, h));
        let diff = t3_dot_t3(closed - brute, closed - brute).sqrt();
        max_err = max_err.max(diff);
    }
    push(
        checks,
        "tensor_kernel",
        "Theta closed-form contraction matches dense tensor (500 random)",
        tol_check(max_err, 1e-12, "error"),
    );

    // Θ twist block (k4) is the Levi-Civita product Υ_kji Υ_nml, exhaustively.
    let twist = dense_theta(&build_theta(0.0, 1.0, 0.0));
    let mut max_err: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    for m in 0..3 {
                        for n in 0..3 {
                            let expect = eps(k, j, i) * eps(n, m, l);
                            max_err = max_err.max((twist[(i, j, k, l, m, n)] - expect).abs());
                        }
                    }
                }
            }
        }
    }
    push(
        checks,
        "tensor_kernel",
        "Theta twist block equals the Levi-Civita product over all 3^6 tuples",
        tol_check(max_err, 0.0, "error"),
    );

    // Cross-product matrix identities: [h]ₓ v = h × v and uncross(skw([h]ₓ)) = h.
    let mut max_err: f64 = 0.0;
    for _ in 0..200 {
        let (h, v) = (rand_vec(&mut rng), rand_vec(&mut rng));
        let a = crate::tensor::cross_matrix(h).mul_vec(v) - h.cross(v);
        let b = crate::tensor::uncross(skw(crate::tensor::cross_matrix(h))) - h;
        max_err = max_err.max(a.norm()).max(b.norm());
    }
    push(
        checks,
        "tensor_kernel",
        "cross-product matrix and uncross identities (200 random)",
        tol_check(max_err, 1e-14, "error"),
    );
}

fn oseen_frank_checks(checks: &mut Vec<PropertyCheck>) {
    let mut rng = ChaCha8Rng::seed_from_u64(102);

    // K-form ≡ small-k form on |h| = 1.
    let mut max_err: f64 = 0.0;
    for _ in 0..200 {
        let c = rand_constants(&mut rng);
        let (h, s) = (rand_unit(&mut rng), rand_mat(&mut rng));
        let a = energy_density_k_form(h, s, &c);
        let b = energy_density_small_k_form(h, s, &c);
        max_err = max_err.max((a - b).abs() / (1.0 + a.abs()));
    }
    push(
        checks,
        "oseen_frank",
        "K-form energy equals small-k form on unit directors (200 random)",
        tol_check(max_err, 1e-12, "rel error"),
    );

    // Small-k form ≡ tensor form for arbitrary (h, S).
    let mut max_err: f64 = 0.0;
    for _ in 0..200 {
        let c = rand_constants(&mut rng);
        let et = ElasticTensors::new(c);
        let (h, s) = (rand_vec(&mut rng), rand_mat(&mut rng));
        let a = energy_density_small_k_form(h, s, &c);
        let b = energy_density_tensor_form(h, s, &et);
        max_err = max_err.max((a - b).abs() / (1.0 + a.abs()));
    }
    push(
        checks,
        "oseen_frank",
        "small-k energy equals tensor form everywhere (200 random)",
        tol_check(max_err, 1e-12, "rel error"),
    );

    // F_S and F_h against central differences of the energy density.
    let fd = 1e-5;
    let mut max_s: f64 = 0.0;
    let mut max_h: f64 = 0.0;
    for _ in 0..200 {
        let c = rand_constants(&mut rng);
        let (h, s) = (rand_vec(&mut rng), rand_mat(&mut rng));
        let fs = f_s(h, s, &c);
        let fh = f_h(h, s, &c);
        let mut fs_err: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let mut sp = s;
                let mut sm = s;
                sp[(i, j)] += fd;
                sm[(i, j)] -= fd;
                let num = (energy_density_small_k_form(h, sp, &c)
                    - energy_density_small_k_form(h, sm, &c))
                    / (2.0 * fd);
                fs_err = fs_err.max((fs[(i, j)] - num).abs() / (1.0 + num.abs()));
            }
        }
        let mut fh_err: f64 = 0.0;
        for i in 0..3 {
            let mut hp = h;
            let mut hm = h;
            hp[i] += fd;
            hm[i] -= fd;
            let num = (energy_density_small_k_form(hp, s, &c)
                - energy_density_small_k_form(hm, s, &c))
                / (2.0 * fd);
            fh_err = fh_err.max((fh[i] - num).abs() / (1.0 + num.abs()));
        }
        max_s = max_s.max(fs_err);
        max_h = max_h.max(fh_err);
    }
    push(
        checks,
        "oseen_frank",
        "F_S matches central differences of the energy (200 random)",
        tol_check(max_s, 1e-6, "rel error"),
    );
    push(
        checks,
        "oseen_frank",
        "F_h matches central differences of the energy (200 random)",
        tol_check(max_h, 1e-6, "rel error"),
    );
}

fn leslie_checks(checks: &mut Vec<PropertyCheck>) {
    let mut rng = ChaCha8Rng::seed_from_u64(103);

    // Single-pass Leslie stress vs term-by-term reference.
    let mut max_err: f64 = 0.0;
    for _ in 0..300 {
        let c = rand_admissible(&mut rng);
        let (d, e, gv) = (rand_unit(&mut rng), rand_vec(&mut rng), rand_mat(&mut rng));
        let diff = leslie_stress(d, e, gv, &c) - leslie_stress_reference(d, e, gv, &c);
        max_err = max_err.max(diff.norm());
    }
    push(
        checks,
        "leslie",
        "Leslie stress matches term-by-term reference oracle (300 random)",
        tol_check(max_err, 1e-12, "error"),
    );

    // Pointwise dissipation identity.
    let mut max_err: f64 = 0.0;
    for _ in 0..500 {
        let c = rand_admissible(&mut rng);
        let (d, gv, q) = (rand_unit(&mut rng), rand_mat(&mut rng), rand_vec(&mut rng));
        let res = dissipation_identity_residual(d, gv, q, &c)
            / (1.0 + gv.norm_sq() + q.norm_sq());
        max_err = max_err.max(res.abs());
    }
    push(
        checks,
        "leslie",
        "pointwise dissipation identity (500 random)",
        tol_check(max_err, 1e-12, "rel residual"),
    );

    // Cross term vanishes identically under Parodi.
    let mut max_err: f64 = 0.0;
    for _ in 0..100 {
        let mut c = rand_admissible(&mut rng);
        c.lambda = c.mu23();
        let (_, cross) =
            dissipation_density(rand_unit(&mut rng), sym(rand_mat(&mut rng)), rand_vec(&mut rng), &c);
        max_err = max_err.max(cross.abs());
    }
    push(
        checks,
        "leslie",
        "dissipation cross term vanishes under Parodi (100 random)",
        tol_check(max_err, 0.0, "error"),
    );
}

fn fields_checks(checks: &mut Vec<PropertyCheck>) {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    let grid = Grid::square_2d(16, 2.0 * PI).unwrap();

    // Discrete integration by parts, exact at the spectral backend.
    let mut max_err: f64 = 0.0;
    for _ in 0..5 {
        let f = random_trig_scalar(grid, &mut rng, 4);
        let g = random_trig_vector(grid, &mut rng, 4);
        let lhs = inner_vec(&grad_scalar(&f, Backend::Spectral), &g);
        let rhs = -inner(&f, &div_vector(&g, Backend::Spectral));
        max_err = max_err.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    push(
        checks,
        "fields",
        "discrete integration by parts exact (spectral backend)",
        tol_check(max_err, 1e-12, "rel error"),
    );

    // Korn equality for divergence-free fields.
    let mut max_err: f64 = 0.0;
    for _ in 0..5 {
        let (v, _) = project_divfree(&random_trig_vector(grid, &mut rng, 4));
        let gv = grad_vector(&v, Backend::Spectral);
        let symn = l2_mat(&MatrixField {
            grid,
            data: gv.data.iter().map(|m| m.sym()).collect(),
        });
        let skwn = l2_mat(&MatrixField {
            grid,
            data: gv.data.iter().map(|m| m.skw()).collect(),
        });
        max_err = max_err.max((symn - skwn).abs() / symn);
    }
    push(
        checks,
        "fields",
        "Korn equality for divergence-free fields (spectral backend)",
        tol_check(max_err, 1e-10, "rel error"),
    );

    // curl(grad f) = 0 and div(curl v) = 0.
    let f = random_trig_scalar(grid, &mut rng, 4);
    let v = random_trig_vector(grid, &mut rng, 4);
    let cg = linf_vec(&curl(&grad_scalar(&f, Backend::Spectral), Backend::Spectral));
    let dc = linf(&div_vector(&curl(&v, Backend::Spectral), Backend::Spectral));
    push(
        checks,
        "fields",
        "curl of gradient and divergence of curl vanish (spectral backend)",
        tol_check(cg.max(dc), 1e-11, "error"),
    );

    // Variational q vs Gateaux derivative of the discrete energy.
    let et = ElasticTensors::from_moduli(1.0, 1.2, 0.8).unwrap();
    let d = DirectorField::from_fn_normalized(grid, |x| {
        Vec3([1.0, 0.4 * x[0].sin() + 0.2 * x[1].cos(), 0.3 * (x[0] + x[1]).cos()])
    });
    let psi = random_trig_vector(grid, &mut rng, 3);
    let q = variational_q_unchecked(&d.field, &et, Backend::Spectral);
    let lhs = inner_vec(&q, &psi);
    let eps_fd = 1e-5;
    let plus = frank_energy(&d.field.axpy(eps_fd, &psi), &et, Backend::Spectral);
    let minus = frank_energy(&d.field.axpy(-eps_fd, &psi), &et, Backend::Spectral);
    let num = (plus - minus) / (2.0 * eps_fd);
    push(
        checks,
        "fields",
        "variational q is the Gateaux derivative of the discrete energy",
        tol_check((lhs - num).abs() / (1.0 + num.abs()), 1e-4, "rel error"),
    );

    // Compact vs expanded q assemblies.
    let qe = variational_q_expanded(&d.field, &et, Backend::Spectral);
    let scale = 1.0 + linf_vec(&q);
    push(
        checks,
        "fields",
        "compact q equals the term-by-term expanded q",
        tol_check(linf_vec(&q.sub(&qe)) / scale, 1e-10, "rel error"),
    );
}

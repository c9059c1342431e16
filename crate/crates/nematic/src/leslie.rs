//! Leslie viscous stress, Ericksen elastic stress, the co-rotational rate,
//! coefficient admissibility, and the pointwise dissipation identity behind
//! the energy equality.
//!
//! Conventions: `(∇v)_ij = ∂_j v_i`, `Dv = sym(∇v)`, `W = skw(∇v)`,
//! `(A ; B) = Σ_ij A_ij B_ij`. The co-rotational rate is
//! `e = ∂t d + (v·∇)d − W d`; along solutions of the director equation it
//! equals `−(I − d⊗d)(λ Dv d + q)` (the corollary path), which is the form
//! the dissipation identity assumes.

use crate::tensor::{skw, sym, Mat3, Vec3};

/// The Leslie viscosity coefficients `μ1..μ6` and the shape parameter `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeslieCoefficients {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu6: f64,
    pub lambda: f64,
}

impl LeslieCoefficients {
    /// A simple admissible default: co-rotational (`λ = 0`, `μ2 = μ3 = 0`)
    /// with unit Newtonian viscosity.
    pub fn co_rotational(mu1: f64, mu4: f64, mu56: f64) -> Self {
        LeslieCoefficients {
            mu1,
            mu2: 0.0,
            mu3: 0.0,
            mu4,
            mu5: mu56 / 2.0,
            mu6: mu56 / 2.0,
            lambda: 0.0,
        }
    }

    /// `μ2 + μ3`.
    pub fn mu23(&self) -> f64 {
        self.mu2 + self.mu3
    }

    /// `μ5 + μ6`.
    pub fn mu56(&self) -> f64 {
        self.mu5 + self.mu6
    }

    /// Coefficient `μ1 + λ(μ2+μ3)` of the `|d·Dv d|²` dissipation channel.
    pub fn c_stretch(&self) -> f64 {
        self.mu1 + self.lambda * self.mu23()
    }

    /// Coefficient `(μ5+μ6) − λ(μ2+μ3)` of the `|Dv d|²` dissipation channel.
    pub fn c_aniso(&self) -> f64 {
        self.mu56() - self.lambda * self.mu23()
    }

    /// Coefficient `(μ2+μ3) − λ` of the dissipation cross term; zero under
    /// Parodi's relation.
    pub fn c_cross(&self) -> f64 {
        self.mu23() - self.lambda
    }
}

/// One violated dissipativity inequality, by name.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityViolation {
    /// Human-readable name of the inequality, e.g. `"mu1 > 0"`.
    pub name: &'static str,
    /// The value whose sign/magnitude failed the check.
    pub value: f64,
}

/// Checks the five dissipativity inequalities:
///
/// ```text
/// μ1 > 0,   μ4 > 0,   (μ5+μ6) − λ(μ2+μ3) > 0,   μ1 + λ(μ2+μ3) > 0,
/// 4((μ5+μ6) − λ(μ2+μ3)) > ((μ2+μ3) − λ)² .
/// ```
///
/// Returns every violated inequality (empty = admissible). All inequalities
/// are strict.
pub fn validate_dissipativity(c: &LeslieCoefficients) -> Vec<DissipativityViolation> {
    let mut violations = Vec::new();
    if !(c.mu1 > 0.0) {
        violations.push(DissipativityViolation { name: "mu1 > 0", value: c.mu1 });
    }
    if !(c.mu4 > 0.0) {
        violations.push(DissipativityViolation { name: "mu4 > 0", value: c.mu4 });
    }
    if !(c.c_aniso() > 0.0) {
        violations.push(DissipativityViolation {
            name: "(mu5+mu6) - lambda*(mu2+mu3) > 0",
            value: c.c_aniso(),
        });
    }
    if !(c.c_stretch() > 0.0) {
        violations.push(DissipativityViolation {
            name: "mu1 + lambda*(mu2+mu3) > 0",
            value: c.c_stretch(),
        });
    }
    let young = 4.0 * c.c_aniso() - c.c_cross().powi(2);
    if !(young > 0.0) {
        violations.push(DissipativityViolation {
            name: "4*((mu5+mu6) - lambda*(mu2+mu3)) > ((mu2+mu3) - lambda)^2",
            value: young,
        });
    }
    violations
}

/// Parodi's relation `λ = μ2 + μ3` within `tol`.
pub fn parodi_holds(c: &LeslieCoefficients, tol: f64) -> bool {
    (c.lambda - c.mu23()).abs() <= tol
}

/// Co-rotational rate `e = ∂t d + (∇d) v − skw(∇v) d` evaluated directly
/// from its definition (`(∇d) v` is the advective term `(v·∇)d`).
pub fn corotational_rate_e(dt_d: Vec3, v: Vec3, grad_d: Mat3, grad_v: Mat3, d: Vec3) -> Vec3 {
    dt_d + grad_d.mul_vec(v) - skw(grad_v).mul_vec(d)
}

/// Co-rotational rate along director-equation solutions (the corollary
/// path): `e = −(I − d⊗d)(λ Dv d + q)`.
pub fn corotational_rate_via_corollary(d: Vec3, grad_v: Mat3, q: Vec3, c: &LeslieCoefficients) -> Vec3 {
    let a = sym(grad_v).mul_vec(d) * c.lambda + q;
    -(a - d * d.dot(a))
}

/// Leslie stress
///
/// ```text
/// T^L = μ1 (d·Dv d) d⊗d + μ4 Dv + (μ5+μ6) (d ⊗ Dv d)_sym
///       + (μ2+μ3) (d ⊗ e)_sym + λ (d ⊗ Dv d)_skw + (d ⊗ e)_skw .
/// ```
pub fn leslie_stress(d: Vec3, e: Vec3, grad_v: Mat3, c: &LeslieCoefficients) -> Mat3 {
    let dv = sym(grad_v);
    let dvd = dv.mul_vec(d);
    let d_dvd = d.outer(dvd);
    let d_e = d.outer(e);
    d.outer(d) * (c.mu1 * d.dot(dvd))
        + dv * c.mu4
        + sym(d_dvd) * c.mu56()
        + sym(d_e) * c.mu23()
        + skw(d_dvd) * c.lambda
        + skw(d_e)
}

/// Term-by-term reference evaluation of the Leslie stress (independent
/// oracle for the single-pass implementation; sums each display term from
/// scratch with explicit index loops).
pub fn leslie_stress_reference(d: Vec3, e: Vec3, grad_v: Mat3, c: &LeslieCoefficients) -> Mat3 {
    let mut dv = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            dv[(i, j)] = 0.5 * (grad_v[(i, j)] + grad_v[(j, i)]);
        }
    }
    let mut dvd = Vec3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            dvd[i] += dv[(i, j)] * d[j];
        }
    }
    let mut d_dvd = 0.0;
    for i in 0..3 {
        d_dvd += d[i] * dvd[i];
    }
    let mut t = Mat3::ZERO;
    for i in 0..3 {
        for j in 0..3 {
            let sym_ddvd = 0.5 * (d[i] * dvd[j] + d[j] * dvd[i]);
            let skw_ddvd = 0.5 * (d[i] * dvd[j] - d[j] * dvd[i]);
            let sym_de = 0.5 * (d[i] * e[j] + d[j] * e[i]);
            let skw_de = 0.5 * (d[i] * e[j] - d[j] * e[i]);
            t[(i, j)] = c.mu1 * d_dvd * d[i] * d[j]
                + c.mu4 * dv[(i, j)]
                + (c.mu5 + c.mu6) * sym_ddvd
                + (c.mu2 + c.mu3) * sym_de
                + c.lambda * skw_ddvd
                + skw_de;
        }
    }
    t
}

/// Ericksen stress `T^E = ∇dᵀ F_S` with `F_S = F_S(d, ∇d)` supplied by the
/// caller.
pub fn ericksen_stress(grad_d: Mat3, fs: Mat3) -> Mat3 {
    grad_d.transpose().mul_mat(fs)
}

/// Pointwise dissipation density and cross term of the energy equality:
///
/// ```text
/// dissipation = (μ1+λ(μ2+μ3)) |d·Dv d|² + μ4 |Dv|²
///               + ((μ5+μ6)−λ(μ2+μ3)) |Dv d|² + |d×q|² ,
/// cross       = ((μ2+μ3)−λ) (d×q)·(d×Dv d) .
/// ```
pub fn dissipation_density(d: Vec3, dv: Mat3, q: Vec3, c: &LeslieCoefficients) -> (f64, f64) {
    let dvd = dv.mul_vec(d);
    let dxq = d.cross(q);
    let dxdvd = d.cross(dvd);
    let diss = c.c_stretch() * d.dot(dvd).powi(2)
        + c.mu4 * dv.norm_sq()
        + c.c_aniso() * dvd.norm_sq()
        + dxq.norm_sq();
    let cross = c.c_cross() * dxq.dot(dxdvd);
    (diss, cross)
}

/// Residual of the pointwise dissipation identity
///
/// ```text
/// (T^L ; ∇v) − (d × W d)·(d × q) − (e, q) = dissipation − cross ,
/// ```
///
/// with `e` the corollary expression `−(I−d⊗d)(λ Dv d + q)`. The first two
/// left-hand terms are the Leslie stress tested with the velocity gradient
/// (as in the energy equality), the third is the director equation tested
/// with `q`; the identity holds exactly for unit `d`.
pub fn dissipation_identity_residual(d: Vec3, grad_v: Mat3, q: Vec3, c: &LeslieCoefficients) -> f64 {
    let e = corotational_rate_via_corollary(d, grad_v, q, c);
    let tl = leslie_stress(d, e, grad_v, c);
    let w = skw(grad_v);
    let lhs = tl.ddot(grad_v) - d.cross(w.mul_vec(d)).dot(d.cross(q)) - e.dot(q);
    let (diss, cross) = dissipation_density(d, sym(grad_v), q, c);
    lhs - (diss - cross)
}

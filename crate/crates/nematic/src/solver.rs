//! Time integration of the coupled Ericksen–Leslie system.
//!
//! The evolved unknowns are the velocity `v` (kept discretely
//! divergence-free by Leray projection, which absorbs the pressure) and the
//! director `d` (renormalized to unit length at a configurable cadence):
//!
//! ```text
//! ∂t v = P[ g − (v·∇)v − div T^E + div T^L ],
//! ∂t d = −(v·∇)d + (∇v)_skw d − (I − d⊗d)(λ (∇v)_sym d + q),
//! ```
//!
//! with `q` the variational derivative of the elastic energy, `T^E` the
//! Ericksen stress and `T^L` the Leslie stress evaluated with the
//! co-rotational rate `e = −(I − d⊗d)(λ (∇v)_sym d + q)`.
//!
//! Two schemes are provided: explicit Heun (RK2), and a semi-implicit IMEX
//! Euler step that treats the stiff leading diffusion of both equations
//! implicitly in Fourier space, relaxing the parabolic CFL restriction.

use crate::fields::diff::helmholtz_inverse;
use crate::fields::{
    div_matrix, grad_vector, linf_vec, project_divfree, unit_norm_drift, Backend, Grid,
    MatrixField, VectorField, UNIT_TOL,
};
use crate::fields::q::variational_q_unchecked;
use crate::frank::ElasticTensors;
use crate::leslie::{
    corotational_rate_via_corollary, ericksen_stress, leslie_stress, LeslieCoefficients,
};
use crate::tensor::Vec3;
use crate::{Error, Result};

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// Explicit Heun method (2nd order).
    #[default]
    Rk2,
    /// Semi-implicit IMEX Euler (1st order, no parabolic CFL restriction).
    SemiImplicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "rk2" => Ok(Scheme::Rk2),
            "semi-implicit" => Ok(Scheme::SemiImplicit),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected 'rk2' or 'semi-implicit')"
            ))),
        }
    }
}

/// External body force.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Forcing {
    /// No forcing, `g = 0`.
    #[default]
    None,
    /// A time-independent force field.
    Steady(VectorField),
}

/// Physical setup of a simulation: domain, material constants, forcing.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Periodic grid.
    pub grid: Grid,
    /// Oseen–Frank elastic tensors and constants.
    pub elastic: ElasticTensors,
    /// Leslie viscosity coefficients.
    pub leslie: LeslieCoefficients,
    /// Body force `g`.
    pub forcing: Forcing,
}

/// Numerical parameters of the time stepper.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Time-step size.
    pub dt: f64,
    /// Final time.
    pub t_end: f64,
    /// Integration scheme.
    pub scheme: Scheme,
    /// Spatial differentiation backend.
    pub backend: Backend,
    /// Renormalize the director every this many steps (0 = never).
    pub renormalize_every: usize,
    /// Safety factor multiplying the CFL limit.
    pub cfl_safety: f64,
    /// Tolerance for the unit-norm drift check after each step.
    pub unit_tol: f64,
}

impl SolverConfig {
    /// Sensible defaults for a run up to `t_end` with step `dt`.
    pub fn new(dt: f64, t_end: f64) -> SolverConfig {
        SolverConfig {
            dt,
            t_end,
            scheme: Scheme::Rk2,
            backend: Backend::Spectral,
            renormalize_every: 1,
            cfl_safety: 0.4,
            unit_tol: UNIT_TOL.max(1e-6),
        }
    }

    /// Validates the numerical parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "t_end must be non-negative, got {}",
                self.t_end
            )));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "cfl_safety must lie in (0, 1], got {}",
                self.cfl_safety
            )));
        }
        Ok(())
    }
}

/// The evolved fields at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationState {
    /// Current time.
    pub t: f64,
    /// Velocity field.
    pub v: VectorField,
    /// Director field.
    pub d: VectorField,
}

/// All intermediate fields of one right-hand-side evaluation; exposed so
/// energy monitors can reuse them without recomputation.
#[derive(Debug, Clone)]
pub struct RhsEval {
    /// Velocity gradient `(∇v)_ij = ∂_j v_i`.
    pub grad_v: MatrixField,
    /// Director gradient.
    pub grad_d: MatrixField,
    /// Variational derivative `q` of the elastic energy.
    pub q: VectorField,
    /// Co-rotational rate `e`.
    pub e: VectorField,
    /// `∂t v` (Leray-projected).
    pub dv_dt: VectorField,
    /// `∂t d`.
    pub dd_dt: VectorField,
}

/// Evaluates the full right-hand side at `(v, d)`.
pub fn eval_rhs(scn: &Scenario, v: &VectorField, d: &VectorField, backend: Backend) -> RhsEval {
    let grad_v = grad_vector(v, backend);
    let grad_d = grad_vector(d, backend);
    let q = variational_q_unchecked(d, &scn.elastic, backend);
    let lc = &scn.leslie;
    let cells = scn.grid.cells();

    let e = VectorField {
        grid: scn.grid,
        data: (0..cells)
            .map(|c| corotational_rate_via_corollary(d.data[c], grad_v.data[c], q.data[c], lc))
            .collect(),
    };

    // Director equation: ∂t d = −(∇d)v + (∇v)_skw d + e.
    let dd_dt = VectorField {
        grid: scn.grid,
        data: (0..cells)
            .map(|c| {
                let adv = grad_d.data[c].mul_vec(v.data[c]);
                let rot = grad_v.data[c].skw().mul_vec(d.data[c]);
                -adv + rot + e.data[c]
            })
            .collect(),
    };

    // Momentum equation: ∂t v = P[g − (v·∇)v − div T^E + div T^L].
    let t_e = MatrixField {
        grid: scn.grid,
        data: (0..cells)
            .map(|c| {
                let fs = crate::frank::f_s(d.data[c], grad_d.data[c], &scn.elastic.constants);
                ericksen_stress(grad_d.data[c], fs)
            })
            .collect(),
    };
    let t_l = MatrixField {
        grid: scn.grid,
        data: (0..cells)
            .map(|c| leslie_stress(d.data[c], e.data[c], grad_v.data[c], lc))
            .collect(),
    };
    let div_te = div_matrix(&t_e, backend);
    let div_tl = div_matrix(&t_l, backend);
    let raw = VectorField {
        grid: scn.grid,
        data: (0..cells)
            .map(|c| {
                let adv = grad_v.data[c].mul_vec(v.data[c]);
                let g = match &scn.forcing {
                    Forcing::None => Vec3::ZERO,
                    Forcing::Steady(f) => f.data[c],
                };
                g - adv - div_te.data[c] + div_tl.data[c]
            })
            .collect(),
    };
    let (dv_dt, _) = project_divfree(&raw);

    RhsEval {
        grad_v,
        grad_d,
        q,
        e,
        dv_dt,
        dd_dt,
    }
}

/// Largest stable time step at the current state: `safety · h/‖v‖∞` for the
/// advective part and, for the explicit scheme only, `safety · h²/k_max`
/// for the stiff elastic/viscous diffusion (`k_max` the largest modulus).
pub fn cfl_limit(scn: &Scenario, cfg: &SolverConfig, state: &SimulationState) -> f64 {
    let h = scn.grid.min_spacing();
    let vmax = linf_vec(&state.v);
    let mut limit = if vmax > 0.0 { h / vmax } else { f64::INFINITY };
    if cfg.scheme == Scheme::Rk2 {
        let c = &scn.elastic.constants;
        let kmax = c
            .big_k1
            .max(c.big_k2)
            .max(c.big_k3)
            .max(0.5 * scn.leslie.mu4)
            .max(1.0e-12);
        limit = limit.min(h * h / kmax);
    }
    cfg.cfl_safety * limit
}

fn check_finite(state: &SimulationState) -> Result<()> {
    if !state.v.is_finite() || !state.d.is_finite() {
        return Err(Error::NumericalAbort(format!(
            "non-finite field values at t = {}",
            state.t
        )));
    }
    Ok(())
}

/// Advances the state by one step of the configured scheme.
pub fn step(scn: &Scenario, cfg: &SolverConfig, state: &SimulationState) -> Result<SimulationState> {
    let dt = cfg.dt;
    let limit = cfl_limit(scn, cfg, state);
    if dt > limit {
        return Err(Error::NumericalAbort(format!(
            "time step {dt:.3e} exceeds CFL limit {limit:.3e} at t = {}",
            state.t
        )));
    }

    let next = match cfg.scheme {
        Scheme::Rk2 => {
            // Heun: full step with the initial slope, then average slopes.
            let k1 = eval_rhs(scn, &state.v, &state.d, cfg.backend);
            let v1 = state.v.axpy(dt, &k1.dv_dt);
            let d1 = state.d.axpy(dt, &k1.dd_dt);
            let k2 = eval_rhs(scn, &v1, &d1, cfg.backend);
            SimulationState {
                t: state.t + dt,
                v: state.v.axpy(0.5 * dt, &k1.dv_dt).axpy(0.5 * dt, &k2.dv_dt),
                d: state.d.axpy(0.5 * dt, &k1.dd_dt).axpy(0.5 * dt, &k2.dd_dt),
            }
        }
        Scheme::SemiImplicit => {
            // IMEX Euler: subtract the leading diffusion k̄Δd (resp. νΔv)
            // from the explicit slope and reinstate it implicitly through
            // the Helmholtz solve (I − dt·k̄Δ)⁻¹.
            let k1 = eval_rhs(scn, &state.v, &state.d, cfg.backend);
            let c = &scn.elastic.constants;
            let kbar = c.big_k1.max(c.big_k2).max(c.big_k3);
            let nu = 0.5 * scn.leslie.mu4;
            let lap_d = crate::fields::laplacian_vector(&state.d, cfg.backend);
            let lap_v = crate::fields::laplacian_vector(&state.v, cfg.backend);
            let d_expl = state
                .d
                .axpy(dt, &k1.dd_dt)
                .axpy(-dt * kbar, &lap_d);
            let v_expl = state
                .v
                .axpy(dt, &k1.dv_dt)
                .axpy(-dt * nu, &lap_v);
            let d_new = helmholtz_inverse(&d_expl, dt * kbar);
            let (v_new, _) = project_divfree(&helmholtz_inverse(&v_expl, dt * nu));
            SimulationState {
                t: state.t + dt,
                v: v_new,
                d: d_new,
            }
        }
    };
    check_finite(&next)?;
    Ok(next)
}

/// Runs from `initial` to `t_end`, invoking `monitor` on the initial state
/// and after every step. Returns the final state.
pub fn run(
    scn: &Scenario,
    cfg: &SolverConfig,
    initial: SimulationState,
    mut monitor: impl FnMut(usize, &SimulationState),
) -> Result<SimulationState> {
    cfg.validate()?;
    check_finite(&initial)?;
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let mut state = initial;
    monitor(0, &state);
    for n in 1..=steps {
        let mut next = step(scn, cfg, &state)?;
        if cfg.renormalize_every > 0 && n % cfg.renormalize_every == 0 {
            let drift = unit_norm_drift(&next.d);
            if drift > cfg.unit_tol {
                return Err(Error::NumericalAbort(format!(
                    "director drifted off the sphere by {drift:.3e} at t = {}",
                    next.t
                )));
            }
            for d in &mut next.d.data {
                *d = d.normalized();
            }
        }
        monitor(n, &next);
        state = next;
    }
    Ok(state)
}

//! Energy bookkeeping and the weak–strong stability certificate.
//!
//! This module evaluates, on discrete trajectories:
//!
//! * the total energy `½‖v‖² + ⟪ν, F⟫ + ½⟪μ, 1⟫` and the residual of the
//!   energy law `dE/dt + ∫(dissipation) = ⟨g, v⟩ + ∫(cross)`;
//! * the relative energy `E(t)` between a (possibly measure-valued)
//!   candidate trajectory and a smooth reference trajectory, in both its
//!   compact `Λ/Θ` form and the expanded sum-of-squares form;
//! * the relative dissipation `W(t)` and the Gronwall weight `K(s)`;
//! * the certificate itself: the pre-Gronwall inequality
//!   `E(t) + ∫W ≤ c0 + ζ∫W + ∫K·E` and the integrated bound
//!   `E(t) ≤ c0·exp(∫K)`, both with trapezoidal time quadrature.
//!
//! The constants `C_δ` (inside `K`) and `c` (inside `c0`) are configuration
//! inputs; `calibrate_c_delta` finds the smallest `C_δ` from a geometric
//! sweep for which certification passes.

use crate::fields::q::{frank_energy, variational_q_unchecked};
use crate::fields::{
    grad_scalar, grad_vector, inner_vec, l2_vec, linf_mat, linf_vec, lp, lp_mat, lp_vec,
    w1p_vec, Backend, DirectorField, MatrixField, ScalarField, VectorField,
};
use crate::frank::{energy_density, ElasticTensors};
use crate::leslie::{dissipation_density, LeslieCoefficients};
use crate::measure::{
    barycenter, cell_of, pairing, DefectMeasure, GeneralizedYoungMeasure, TestIntegrand,
};
use crate::solver::{Forcing, Scenario, SimulationState};
use crate::tensor::{cross_matrix, skw};
use crate::{Error, Result};
use std::io::Write;

/// Components of the total energy at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// Kinetic energy `½‖v‖²`.
    pub kinetic: f64,
    /// Elastic (Oseen–Frank) energy `⟪ν, F⟫` or `∫F(d, ∇d)`.
    pub frank: f64,
    /// Defect contribution `½⟪μ, 1⟫`.
    pub defect_half_mass: f64,
    /// Sum of the three parts.
    pub total: f64,
}

/// Total energy of a state; the elastic part is paired against the Young
/// measure when one is supplied, otherwise evaluated by direct quadrature.
pub fn total_energy(
    v: &VectorField,
    d: &DirectorField,
    elastic: &ElasticTensors,
    backend: Backend,
    gym: Option<&GeneralizedYoungMeasure>,
    defect: Option<&DefectMeasure>,
) -> Result<EnergyBreakdown> {
    let kinetic = 0.5 * l2_vec(v).powi(2);
    let frank = match gym {
        Some(m) => {
            let et = elastic.clone();
            let f = TestIntegrand::quadratic(move |_, h, s| energy_density(h, s, &et));
            pairing(m, &f, d)?
        }
        None => frank_energy(&d.field, elastic, backend),
    };
    let defect_half_mass = defect.map_or(0.0, |m| 0.5 * m.total_mass());
    Ok(EnergyBreakdown {
        kinetic,
        frank,
        defect_half_mass,
        total: kinetic + frank + defect_half_mass,
    })
}

/// One sample of the energy-law monitor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyLawSample {
    /// Time.
    pub t: f64,
    /// Energy components.
    pub breakdown: EnergyBreakdown,
    /// Instantaneous total dissipation `∫(dissipation density) dx ≥ 0`.
    pub dissipation: f64,
    /// Instantaneous cross term `∫(cross density) dx` (zero under Parodi).
    pub cross: f64,
    /// Forcing power `⟨g, v⟩`.
    pub forcing_power: f64,
}

/// Evaluates energy, dissipation, cross term, and forcing power at a state.
pub fn energy_law_sample(
    scn: &Scenario,
    state: &SimulationState,
    backend: Backend,
) -> Result<EnergyLawSample> {
    let d = DirectorField { field: state.d.clone() };
    let breakdown = total_energy(&state.v, &d, &scn.elastic, backend, None, None)?;
    let (dissipation, cross) = dissipation_and_cross(scn, &state.v, &state.d, backend);
    let forcing_power = match &scn.forcing {
        Forcing::None => 0.0,
        Forcing::Steady(g) => inner_vec(g, &state.v),
    };
    Ok(EnergyLawSample {
        t: state.t,
        breakdown,
        dissipation,
        cross,
        forcing_power,
    })
}

/// Spatial integrals of the dissipation density and the cross term.
pub fn dissipation_and_cross(
    scn: &Scenario,
    v: &VectorField,
    d: &VectorField,
    backend: Backend,
) -> (f64, f64) {
    let grad_v = grad_vector(v, backend);
    let q = variational_q_unchecked(d, &scn.elastic, backend);
    let vol = scn.grid.cell_volume();
    let mut diss = 0.0;
    let mut cross = 0.0;
    for c in 0..scn.grid.cells() {
        let (a, b) = dissipation_density(d.data[c], grad_v.data[c].sym(), q.data[c], &scn.leslie);
        diss += a;
        cross += b;
    }
    (diss * vol, cross * vol)
}

/// Per-interval residuals of the energy law,
/// `ΔE + ∫diss dt − ∫⟨g,v⟩ dt − ∫cross dt` (trapezoidal), for a series of
/// monitor samples.
pub fn energy_residuals(samples: &[EnergyLawSample]) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| {
            let dt = w[1].t - w[0].t;
            (w[1].breakdown.total - w[0].breakdown.total)
                + 0.5 * dt * (w[0].dissipation + w[1].dissipation)
                - 0.5 * dt * (w[0].forcing_power + w[1].forcing_power)
                - 0.5 * dt * (w[0].cross + w[1].cross)
        })
        .collect()
}

// ──────────────────────────────────────────────────────────────────────
// Relative energy, dissipation, Gronwall weight
// ──────────────────────────────────────────────────────────────────────

/// Candidate side of the relative-energy comparison: fields plus the
/// measures representing the gradient and the defect.
pub struct Candidate<'a> {
    /// Candidate velocity.
    pub v: &'a VectorField,
    /// Candidate director.
    pub d: &'a DirectorField,
    /// Young measure for `∇d` (Dirac lift for field trajectories).
    pub gym: &'a GeneralizedYoungMeasure,
    /// Defect measure.
    pub defect: &'a DefectMeasure,
}

/// Smooth reference side of the comparison.
pub struct Reference<'a> {
    /// Reference velocity `ṽ`.
    pub v: &'a VectorField,
    /// Reference director `d̃`.
    pub d: &'a VectorField,
}

/// Relative energy `E(t)` in the compact `Λ/Θ` form and, as a cross-check,
/// the expanded sum-of-squares form; returns `(compact, expanded)`.
pub fn relative_energy(
    cand: &Candidate,
    refr: &Reference,
    elastic: &ElasticTensors,
    backend: Backend,
) -> Result<(f64, f64)> {
    cand.v.check_same_grid(refr.v)?;
    let grid = cand.v.grid;
    let vel = 0.5 * l2_vec(&cand.v.sub(refr.v)).powi(2);
    let defect = 0.5 * cand.defect.total_mass();
    let grad_ref = grad_vector(refr.d, backend);
    let ref_d = refr.d.clone();

    // Compact form: ½⟪ν, (S−∇d̃):Λ:(S−∇d̃)⟫ + ½⟪ν, (S⊗h−∇d̃⊗d̃)⋮Θ⋮(…)⟫.
    let et = elastic.clone();
    let grad_ref_c = grad_ref.clone();
    let ref_d_c = ref_d.clone();
    let compact_integrand = TestIntegrand::quadratic(move |x, h, s| {
        let c = cell_of(grid, x);
        let ds = s - grad_ref_c.data[c];
        0.5 * et.lambda.quadratic(ds)
            + 0.5
                * et.theta
                    .quadratic_diff(s, h, grad_ref_c.data[c], ref_d_c.data[c])
    });
    let compact = vel + defect + pairing(cand.gym, &compact_integrand, cand.d)?;

    // Expanded sum-of-squares form.
    let kc = elastic.constants.clone();
    let grad_ref_e = grad_ref.clone();
    let ref_d_e = ref_d.clone();
    let expanded_integrand = TestIntegrand::quadratic(move |x, h, s| {
        let c = cell_of(grid, x);
        let st = grad_ref_e.data[c];
        let dt = ref_d_e.data[c];
        let tr_diff = s.trace() - st.trace();
        let skw_diff = (skw(s) - skw(st)).norm_sq();
        let v3 = h * s.trace() - dt * st.trace();
        let p_diff = skw(s).ddot(cross_matrix(h)) - skw(st).ddot(cross_matrix(dt));
        let w_diff = skw(s).mul_vec(h) - skw(st).mul_vec(dt);
        0.5 * (kc.k1 * tr_diff * tr_diff
            + 2.0 * kc.k2 * skw_diff
            + kc.k3 * v3.norm_sq()
            + kc.k4 * p_diff * p_diff
            + 4.0 * kc.k5 * w_diff.norm_sq())
    });
    let expanded = vel + defect + pairing(cand.gym, &expanded_integrand, cand.d)?;

    Ok((compact, expanded))
}

/// Relative dissipation `W(t)` between two field states.
pub fn relative_dissipation(
    cand_v: &VectorField,
    cand_d: &VectorField,
    ref_v: &VectorField,
    ref_d: &VectorField,
    leslie: &LeslieCoefficients,
    elastic: &ElasticTensors,
    backend: Backend,
) -> f64 {
    let grid = cand_v.grid;
    let gv = grad_vector(cand_v, backend);
    let gv_ref = grad_vector(ref_v, backend);
    let q = variational_q_unchecked(cand_d, elastic, backend);
    let q_ref = variational_q_unchecked(ref_d, elastic, backend);
    let vol = grid.cell_volume();
    let (mut stretch, mut aniso, mut newt, mut rot) = (0.0, 0.0, 0.0, 0.0);
    for c in 0..grid.cells() {
        let (d, dt) = (cand_d.data[c], ref_d.data[c]);
        let (dv, dv_ref) = (gv.data[c].sym(), gv_ref.data[c].sym());
        let (dvd, dvd_ref) = (dv.mul_vec(d), dv_ref.mul_vec(dt));
        stretch += (d.dot(dvd) - dt.dot(dvd_ref)).powi(2);
        aniso += (dvd - dvd_ref).norm_sq();
        newt += (dv - dv_ref).norm_sq();
        rot += (d.cross(q.data[c]) - dt.cross(q_ref.data[c])).norm_sq();
    }
    vol * (leslie.c_stretch() * stretch + leslie.c_aniso() * aniso + leslie.mu4 * newt + rot)
}

/// Gronwall weight
/// `K = C_δ(‖ṽ‖²_L∞ + ‖ṽ‖²_W1,3 + ‖d̃‖²_W2,3 + ‖d̃‖⁴_W1,6 + ‖∂t d̃‖_L∞
///        + ‖∂t d̃‖_W1,3) + C_δ(‖(∇ṽ)_sym‖_L∞ + 1)`,
/// returned as `(K, k_raw)` with `K = C_δ·k_raw` so calibration can rescale.
pub fn gronwall_weight_k(
    ref_v: &VectorField,
    ref_d: &VectorField,
    ref_dd_dt: &VectorField,
    c_delta: f64,
    backend: Backend,
) -> (f64, f64) {
    let grad_v = grad_vector(ref_v, backend);
    let sym_field = MatrixField {
        grid: grad_v.grid,
        data: grad_v.data.iter().map(|m| m.sym()).collect(),
    };
    let grad_d = grad_vector(ref_d, backend);
    let hess_norm = second_gradient_norm(ref_d, backend);
    let w23 = (lp_vec(ref_d, 3.0).powi(3)
        + lp_mat(&grad_d, 3.0).powi(3)
        + lp(&hess_norm, 3.0).powi(3))
    .powf(1.0 / 3.0);
    let k_raw = linf_vec(ref_v).powi(2)
        + w1p_vec(ref_v, 3.0, backend).powi(2)
        + w23.powi(2)
        + w1p_vec(ref_d, 6.0, backend).powi(4)
        + linf_vec(ref_dd_dt)
        + w1p_vec(ref_dd_dt, 3.0, backend)
        + linf_mat(&sym_field)
        + 1.0;
    (c_delta * k_raw, k_raw)
}

/// Pointwise Frobenius norm of the second gradient `∇²d` as a scalar field.
fn second_gradient_norm(d: &VectorField, backend: Backend) -> ScalarField {
    let grad = grad_vector(d, backend);
    let mut sumsq = vec![0.0; d.grid.cells()];
    for i in 0..3 {
        for j in 0..3 {
            let entry = grad.entry(i, j);
            let g2 = grad_scalar(&entry, backend);
            for (acc, v) in sumsq.iter_mut().zip(&g2.data) {
                *acc += v.norm_sq();
            }
        }
    }
    ScalarField {
        grid: d.grid,
        data: sumsq.into_iter().map(f64::sqrt).collect(),
    }
}

/// Initial constant of the stability bound:
/// `c0 = E(0) + ((∇d(0)−∇d̃(0))⊗(d(0)−d̃(0)) ⋮Θ⋮ ∇d̃(0)⊗d̃(0))
///      + c‖d(0)−d̃(0)‖²_L2`.
pub fn initial_constant_c0(
    cand0: &Candidate,
    ref0: &Reference,
    elastic: &ElasticTensors,
    c: f64,
    backend: Backend,
) -> Result<f64> {
    let (e0, _) = relative_energy(cand0, ref0, elastic, backend)?;
    let grid = cand0.v.grid;
    let grad_cand = barycenter(cand0.gym);
    let grad_ref = grad_vector(ref0.d, backend);
    let vol = grid.cell_volume();
    let mut cross = 0.0;
    for cidx in 0..grid.cells() {
        let s_diff = grad_cand.data[cidx] - grad_ref.data[cidx];
        let h_diff = cand0.d.field.data[cidx] - ref0.d.data[cidx];
        cross += elastic
            .theta
            .pair(s_diff, h_diff, grad_ref.data[cidx], ref0.d.data[cidx]);
    }
    let dist = l2_vec(&cand0.d.field.sub(ref0.d));
    Ok(e0 + vol * cross + c * dist * dist)
}

/// ζ-admissibility of the Leslie coefficients:
/// `(μ2+μ3) − λ ≤ ζ²·4((μ5+μ6) − λ(μ2+μ3))`.
pub fn zeta_admissible(leslie: &LeslieCoefficients, zeta: f64) -> bool {
    leslie.c_cross() <= zeta * zeta * 4.0 * leslie.c_aniso()
}

/// One sample of the relative-energy series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEnergySample {
    /// Time.
    pub t: f64,
    /// Relative energy `E(t)`.
    pub e: f64,
    /// Relative dissipation `W(t)`.
    pub w: f64,
    /// Gronwall weight `K(t)`.
    pub k: f64,
}

/// Margins and verdict of the Gronwall certification.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    /// Initial constant.
    pub c0: f64,
    /// Dissipation absorption factor `ζ ∈ (0, 1)`.
    pub zeta: f64,
    /// Additive numerical floor applied to both inequality forms.
    pub floor: f64,
    /// Per-sample `(t, bound, margin_pre_gronwall, margin_exponential)`.
    pub samples: Vec<(f64, f64, f64, f64)>,
    /// `∫₀ᵀ K dt` (reported; `K ∈ L¹` check).
    pub k_integral: f64,
    /// True iff every margin of both forms is non-negative.
    pub pass: bool,
}

impl GronwallReport {
    /// Smallest margin over both inequality forms.
    pub fn min_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.2.min(s.3))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Certifies both forms of the stability bound over a time-ordered series:
/// (i) `E(t) + ∫W ≤ c0 + ζ∫W + ∫K·E + floor` and
/// (ii) `E(t) ≤ c0·exp(∫K) + floor`, with trapezoidal integrals.
pub fn gronwall_certify(
    samples: &[RelativeEnergySample],
    c0: f64,
    zeta: f64,
    floor: f64,
) -> Result<GronwallReport> {
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(Error::InvalidConfig(format!("ζ must lie in (0, 1), got {zeta}")));
    }
    if samples.is_empty() {
        return Err(Error::InvalidConfig("empty sample series".into()));
    }
    if samples.windows(2).any(|w| w[1].t <= w[0].t) {
        return Err(Error::InvalidConfig("samples are not strictly time-ordered".into()));
    }
    let mut int_w = 0.0;
    let mut int_ke = 0.0;
    let mut int_k = 0.0;
    let mut report = Vec::with_capacity(samples.len());
    let mut pass = true;
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let p = &samples[i - 1];
            let dt = s.t - p.t;
            int_w += 0.5 * dt * (p.w + s.w);
            int_ke += 0.5 * dt * (p.k * p.e + s.k * s.e);
            int_k += 0.5 * dt * (p.k + s.k);
        }
        let margin_pre = (c0 + zeta * int_w + int_ke + floor) - (s.e + int_w);
        let bound = c0 * int_k.exp() + floor;
        let margin_exp = bound - s.e;
        if margin_pre < 0.0 || margin_exp < 0.0 {
            pass = false;
        }
        report.push((s.t, bound, margin_pre, margin_exp));
    }
    Ok(GronwallReport {
        c0,
        zeta,
        floor,
        samples: report,
        k_integral: int_k,
        pass,
    })
}

/// Finds the smallest `C_δ` from the geometric sweep `2^(-4..=20)` for
/// which certification of the series passes, where `K = C_δ·k_raw`.
/// Returns `None` if even the largest value fails.
pub fn calibrate_c_delta(
    samples_raw: &[RelativeEnergySample],
    c0: f64,
    zeta: f64,
    floor: f64,
) -> Option<f64> {
    for i in -4..=20 {
        let c_delta = (2.0_f64).powi(i);
        let scaled: Vec<RelativeEnergySample> = samples_raw
            .iter()
            .map(|s| RelativeEnergySample { k: c_delta * s.k, ..*s })
            .collect();
        if let Ok(report) = gronwall_certify(&scaled, c0, zeta, floor) {
            if report.pass {
                return Some(c_delta);
            }
        }
    }
    None
}

// ──────────────────────────────────────────────────────────────────────
// Monitor CSV
// ──────────────────────────────────────────────────────────────────────

/// One row of the monitor CSV.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MonitorRow {
    /// Time.
    pub t: f64,
    /// Kinetic energy.
    pub kinetic: f64,
    /// Oseen–Frank energy.
    pub frank: f64,
    /// `½⟪μ, 1⟫`.
    pub defect_half_mass: f64,
    /// Total energy.
    pub total: f64,
    /// Instantaneous dissipation.
    pub dissipation: f64,
    /// Instantaneous cross term.
    pub cross_term: f64,
    /// Energy-law residual of the interval ending at `t` (0 for the first).
    pub energy_residual: f64,
    /// Relative energy (0 when not comparing).
    pub e_rel: f64,
    /// Relative dissipation.
    pub w_rel: f64,
    /// Gronwall weight.
    pub k: f64,
    /// Certified bound at `t`.
    pub gronwall_bound: f64,
    /// Certification margin at `t`.
    pub margin: f64,
}

/// Column order of the monitor CSV.
pub const MONITOR_HEADER: &str = "t,kinetic,frank,defect_half_mass,total,dissipation,cross_term,energy_residual,E_rel,W_rel,K,gronwall_bound,margin";

/// Writes the monitor CSV (header plus one row per sample, 17 significant
/// digits — lossless for `f64`).
pub fn write_monitor_csv(rows: &[MonitorRow], out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{MONITOR_HEADER}")?;
    for r in rows {
        let vals = [
            r.t,
            r.kinetic,
            r.frank,
            r.defect_half_mass,
            r.total,
            r.dissipation,
            r.cross_term,
            r.energy_residual,
            r.e_rel,
            r.w_rel,
            r.k,
            r.gronwall_bound,
            r.margin,
        ];
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// Reads back a monitor CSV written by [`write_monitor_csv`].
pub fn read_monitor_csv(input: &str) -> Result<Vec<MonitorRow>> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::InvalidConfig("empty CSV".into()))?;
    if header.trim() != MONITOR_HEADER {
        return Err(Error::InvalidConfig(format!("unexpected CSV header '{header}'")));
    }
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|e| Error::InvalidConfig(format!("bad CSV number '{t}': {e}")))
            })
            .collect::<Result<_>>()?;
        if vals.len() != 13 {
            return Err(Error::InvalidConfig(format!(
                "expected 13 CSV columns, found {}",
                vals.len()
            )));
        }
        rows.push(MonitorRow {
            t: vals[0],
            kinetic: vals[1],
            frank: vals[2],
            defect_half_mass: vals[3],
            total: vals[4],
            dissipation: vals[5],
            cross_term: vals[6],
            energy_residual: vals[7],
            e_rel: vals[8],
            w_rel: vals[9],
            k: vals[10],
            gronwall_bound: vals[11],
            margin: vals[12],
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use crate::measure::dirac_from_field;
    use crate::solver::{run, Scheme, SolverConfig};
    use crate::tensor::Vec3;
    use approx::assert_relative_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::square_2d(16, 2.0 * PI).unwrap()
    }

    fn scenario(grid: Grid) -> Scenario {
        Scenario {
            grid,
            elastic: ElasticTensors::from_moduli(1.0, 1.2, 0.8).unwrap(),
            leslie: LeslieCoefficients {
                mu1: 0.5,
                mu2: -0.2,
                mu3: 0.4,
                mu4: 1.0,
                mu5: 0.6,
                mu6: 0.4,
                lambda: 0.2,
            },
            forcing: Forcing::None,
        }
    }

    fn smooth_director(g: Grid, a: f64, b: f64) -> DirectorField {
        DirectorField::from_fn_normalized(g, |x| {
            Vec3([1.0, a * x[0].sin() + b * x[1].cos(), b * (x[0] + x[1]).cos()])
        })
    }

    #[test]
    fn total_energy_components() {
        let g = grid();
        let scn = scenario(g);
        let d0 = DirectorField::from_fn_normalized(g, |_| Vec3::basis(0));
        let zero = VectorField::zeros(g);
        let e = total_energy(&zero, &d0, &scn.elastic, Backend::Spectral, None, None).unwrap();
        assert_eq!(e.total, 0.0);

        // Dirac measure reproduces the quadrature Frank energy.
        let d = smooth_director(g, 0.4, 0.2);
        let gym = dirac_from_field(&d, Backend::Spectral);
        let via_measure =
            total_energy(&zero, &d, &scn.elastic, Backend::Spectral, Some(&gym), None).unwrap();
        let direct = total_energy(&zero, &d, &scn.elastic, Backend::Spectral, None, None).unwrap();
        assert_relative_eq!(via_measure.frank, direct.frank, max_relative = 1e-12);

        // Defect mass m adds exactly m/2.
        let mut defect = DefectMeasure::zero(g);
        defect.mass[3] = 0.8;
        defect.atoms[3] = vec![crate::measure::DefectAtom {
            weight: 1.0,
            gamma: {
                let t = crate::tensor::Tensor3::from_fn(|i, j, k| {
                    ((i + 2 * j + 4 * k) as f64).sin()
                });
                let n = t.norm();
                t * (1.0 / n)
            },
        }];
        let with_defect = total_energy(
            &zero,
            &d,
            &scn.elastic,
            Backend::Spectral,
            None,
            Some(&defect),
        )
        .unwrap();
        assert_relative_eq!(with_defect.total - direct.total, 0.4, max_relative = 1e-13);
    }

    #[test]
    fn energy_residual_zero_at_equilibrium() {
        let g = grid();
        let scn = scenario(g);
        let state = SimulationState {
            t: 0.0,
            v: VectorField::zeros(g),
            d: VectorField::from_fn(g, |_| Vec3::basis(2)),
        };
        let s0 = energy_law_sample(&scn, &state, Backend::Spectral).unwrap();
        let s1 = EnergyLawSample { t: 0.1, ..s0 };
        let res = energy_residuals(&[s0, s1]);
        assert!(res[0].abs() < 1e-14);
        assert_eq!(s0.dissipation, 0.0);
    }

    fn relaxing_initial(g: Grid) -> SimulationState {
        SimulationState {
            t: 0.0,
            v: VectorField::zeros(g),
            d: smooth_director(g, 0.4, 0.2).field,
        }
    }

    /// Cumulative |energy-law residual| of a short RK2 run at step `dt`.
    fn residual_for_dt(dt: f64) -> f64 {
        let g = grid();
        let scn = scenario(g);
        let cfg = SolverConfig {
            scheme: Scheme::Rk2,
            renormalize_every: 0,
            ..SolverConfig::new(dt, 0.04)
        };
        let mut samples = Vec::new();
        let scn2 = scn.clone();
        run(&scn, &cfg, relaxing_initial(g), |_, s| {
            samples.push(energy_law_sample(&scn2, s, Backend::Spectral).unwrap());
        })
        .unwrap();
        // Cumulative dissipation must be non-negative along the way.
        assert!(samples.iter().all(|s| s.dissipation >= 0.0));
        energy_residuals(&samples).iter().map(|r| r.abs()).sum()
    }

    #[test]
    fn energy_residual_halves_with_dt() {
        let r1 = residual_for_dt(4e-3);
        let r2 = residual_for_dt(2e-3);
        let r3 = residual_for_dt(1e-3);
        assert!(r1 / r2 > 1.8, "r1/r2 = {}", r1 / r2);
        assert!(r2 / r3 > 1.8, "r2/r3 = {}", r2 / r3);
    }

    #[test]
    fn cross_term_vanishes_under_parodi() {
        let g = grid();
        let mut scn = scenario(g);
        // Enforce Parodi: λ = μ2 + μ3.
        scn.leslie.lambda = scn.leslie.mu2 + scn.leslie.mu3;
        let v = VectorField::from_fn(g, |x| Vec3([x[1].sin(), x[0].cos(), 0.0]));
        let d = smooth_director(g, 0.3, 0.2);
        let (_, cross) = dissipation_and_cross(&scn, &v, &d.field, Backend::Spectral);
        assert!(cross.abs() < 1e-12, "cross = {cross}");
    }

    #[test]
    fn relative_energy_of_twins_is_zero() {
        let g = grid();
        let scn = scenario(g);
        let d = smooth_director(g, 0.4, 0.2);
        let v = VectorField::from_fn(g, |x| Vec3([x[1].sin(), 0.0, 0.0]));
        let gym = dirac_from_field(&d, Backend::Spectral);
        let defect = DefectMeasure::zero(g);
        let cand = Candidate { v: &v, d: &d, gym: &gym, defect: &defect };
        let refr = Reference { v: &v, d: &d.field };
        let (compact, expanded) =
            relative_energy(&cand, &refr, &scn.elastic, Backend::Spectral).unwrap();
        assert!(compact.abs() < 1e-13 && expanded.abs() < 1e-13);
    }

    #[test]
    fn relative_energy_forms_agree_and_are_nonnegative() {
        let g = Grid::square_2d(8, 2.0 * PI).unwrap();
        let scn = scenario(g);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let a = rng.gen_range(-0.5..0.5);
            let b = rng.gen_range(-0.5..0.5);
            let c = rng.gen_range(-0.5..0.5);
            let d1 = smooth_director(g, a, b);
            let d2 = smooth_director(g, c, a);
            let v1 = VectorField::from_fn(g, |x| Vec3([a * x[1].sin(), b * x[0].cos(), 0.0]));
            let v2 = VectorField::from_fn(g, |x| Vec3([c * x[1].cos(), 0.0, a * x[0].sin()]));
            let gym = dirac_from_field(&d1, Backend::Spectral);
            let defect = DefectMeasure::zero(g);
            let cand = Candidate { v: &v1, d: &d1, gym: &gym, defect: &defect };
            let refr = Reference { v: &v2, d: &d2.field };
            let (compact, expanded) =
                relative_energy(&cand, &refr, &scn.elastic, Backend::Spectral).unwrap();
            assert!(compact >= -1e-12, "E < 0: {compact}");
            let scale = compact.abs().max(1.0);
            assert!(
                (compact - expanded).abs() / scale < 1e-11,
                "forms disagree: {compact} vs {expanded}"
            );
        }
    }

    #[test]
    fn defect_only_difference_gives_half_mass() {
        let g = grid();
        let scn = scenario(g);
        let d = smooth_director(g, 0.4, 0.2);
        let v = VectorField::zeros(g);
        let gym = dirac_from_field(&d, Backend::Spectral);
        let mut defect = DefectMeasure::zero(g);
        defect.mass[11] = 0.6;
        defect.atoms[11] = vec![crate::measure::DefectAtom {
            weight: 1.0,
            gamma: {
                let t = crate::tensor::Tensor3::from_fn(|i, _, _| 1.0 + i as f64);
                let n = t.norm();
                t * (1.0 / n)
            },
        }];
        let cand = Candidate { v: &v, d: &d, gym: &gym, defect: &defect };
        let refr = Reference { v: &v, d: &d.field };
        let (compact, _) = relative_energy(&cand, &refr, &scn.elastic, Backend::Spectral).unwrap();
        assert_relative_eq!(compact, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn relative_dissipation_properties() {
        let g = grid();
        let scn = scenario(g);
        let d = smooth_director(g, 0.3, 0.1);
        let v = VectorField::from_fn(g, |x| Vec3([x[1].sin(), 0.0, 0.0]));
        // Identical states → 0.
        let w = relative_dissipation(
            &v,
            &d.field,
            &v,
            &d.field,
            &scn.leslie,
            &scn.elastic,
            Backend::Spectral,
        );
        assert!(w.abs() < 1e-20);

        // Velocity-only shear difference: closed-form expansion.
        let delta = VectorField::from_fn(g, |x| Vec3([0.3 * x[1].sin(), 0.0, 0.0]));
        let v2 = v.axpy(1.0, &delta);
        let w = relative_dissipation(
            &v2,
            &d.field,
            &v,
            &d.field,
            &scn.leslie,
            &scn.elastic,
            Backend::Spectral,
        );
        let gd = grad_vector(&delta, Backend::Spectral);
        let vol = g.cell_volume();
        let mut expect = 0.0;
        for c in 0..g.cells() {
            let ds = gd.data[c].sym();
            let dsd = ds.mul_vec(d.field.data[c]);
            expect += scn.leslie.mu4 * ds.norm_sq()
                + scn.leslie.c_aniso() * dsd.norm_sq()
                + scn.leslie.c_stretch() * d.field.data[c].dot(dsd).powi(2);
        }
        assert_relative_eq!(w, expect * vol, max_relative = 1e-12);

        // Non-negativity over random admissible coefficients.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let rand_admissible = |r: &mut ChaCha8Rng| loop {
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
        };
        for _ in 0..200 {
            let lc = rand_admissible(&mut rng);
            let d2 = smooth_director(g, rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
            let v2 = VectorField::from_fn(g, |x| {
                Vec3([rng.gen_range(-1.0..1.0) * x[1].sin(), 0.0, 0.0])
            });
            let w = relative_dissipation(
                &v2,
                &d2.field,
                &v,
                &d.field,
                &lc,
                &scn.elastic,
                Backend::Spectral,
            );
            assert!(w >= 0.0, "W < 0: {w}");
        }
    }

    #[test]
    fn gronwall_weight_examples() {
        let g = grid();
        let zero = VectorField::zeros(g);
        let (k, raw) = gronwall_weight_k(&zero, &zero, &zero, 3.0, Backend::Spectral);
        assert_relative_eq!(k, 3.0, max_relative = 1e-14);
        assert_relative_eq!(raw, 1.0, max_relative = 1e-14);

        // Doubling ṽ at least quadruples its squared-norm contributions.
        let v = VectorField::from_fn(g, |x| Vec3([x[1].sin(), x[0].cos(), 0.0]));
        let (k1, _) = gronwall_weight_k(&v, &zero, &zero, 1.0, Backend::Spectral);
        let v2 = v.axpy(1.0, &v);
        let (k2, _) = gronwall_weight_k(&v2, &zero, &zero, 1.0, Backend::Spectral);
        // Subtract the ∇v_sym L∞ (linear) and constant parts for the check.
        let lin1 = linf_mat(&MatrixField {
            grid: g,
            data: grad_vector(&v, Backend::Spectral).data.iter().map(|m| m.sym()).collect(),
        });
        let quad1 = k1 - lin1 - 1.0;
        let quad2 = k2 - 2.0 * lin1 - 1.0;
        assert!(quad2 > 3.99 * quad1, "{quad2} vs {quad1}");
    }

    #[test]
    fn zeta_admissibility_examples() {
        let mut lc = scenario(grid()).leslie;
        // c_cross = (μ2+μ3)−λ = 0.2−0.2... with scenario: μ2+μ3 = 0.2, λ = 0.2
        // → cross = 0, admissible for any ζ.
        assert!(zeta_admissible(&lc, 0.1));
        lc.lambda = -3.9; // c_cross = 4.1, c_aniso = 1 + 3.9·0.2
        assert!(!zeta_admissible(&lc, 0.5));
    }

    #[test]
    fn gronwall_certify_cases() {
        // K ≡ 0, W ≡ 0, constant E: pass iff E ≤ c0.
        let flat = |e: f64| -> Vec<RelativeEnergySample> {
            (0..5)
                .map(|i| RelativeEnergySample { t: i as f64 * 0.1, e, w: 0.0, k: 0.0 })
                .collect()
        };
        assert!(gronwall_certify(&flat(0.5), 1.0, 0.5, 0.0).unwrap().pass);
        assert!(!gronwall_certify(&flat(2.0), 1.0, 0.5, 0.0).unwrap().pass);

        // Synthetic exponential E = c0·e^{kt} with K ≡ k: near-equality.
        let c0 = 0.3;
        let kk = 1.7;
        let series: Vec<RelativeEnergySample> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.01;
                RelativeEnergySample { t, e: c0 * (kk * t).exp(), w: 0.0, k: kk }
            })
            .collect();
        let report = gronwall_certify(&series, c0, 0.5, 1e-6).unwrap();
        assert!(report.pass, "min margin {}", report.min_margin());
        assert!(report.min_margin() < 1e-3, "margin should be near zero");

        // Unordered samples error.
        let mut bad = flat(0.1);
        bad[2].t = 0.0;
        assert!(gronwall_certify(&bad, 1.0, 0.5, 0.0).is_err());
        // ζ outside (0,1) errors.
        assert!(gronwall_certify(&flat(0.1), 1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn c0_examples() {
        let g = grid();
        let scn = scenario(g);
        let d = smooth_director(g, 0.4, 0.2);
        let v = VectorField::zeros(g);
        let gym = dirac_from_field(&d, Backend::Spectral);
        let defect = DefectMeasure::zero(g);
        let cand = Candidate { v: &v, d: &d, gym: &gym, defect: &defect };
        let refr = Reference { v: &v, d: &d.field };
        let c0 =
            initial_constant_c0(&cand, &refr, &scn.elastic, 1.0, Backend::Spectral).unwrap();
        assert!(c0.abs() < 1e-12, "twins give c0 = {c0}");

        // Small director perturbation: c0 = O(ε²).
        let c0_for = |eps: f64| {
            let dp = DirectorField::from_fn_normalized(g, |x| {
                let base = d.field.data[cell_of(g, x)];
                base + Vec3([0.0, eps * x[0].sin(), eps * x[1].cos()])
            });
            let gym_p = dirac_from_field(&dp, Backend::Spectral);
            let cand_p = Candidate { v: &v, d: &dp, gym: &gym_p, defect: &defect };
            initial_constant_c0(&cand_p, &refr, &scn.elastic, 1.0, Backend::Spectral).unwrap()
        };
        let c1 = c0_for(1e-2);
        let c2 = c0_for(5e-3);
        let ratio = c1 / c2;
        assert!(ratio > 3.5 && ratio < 4.5, "O(ε²) scaling violated: {ratio}");
    }

    #[test]
    fn calibration_finds_smallest_passing_c_delta() {
        // E grows like e^{2t}; k_raw ≡ 1, so certification needs C_δ ≥ 2.
        let series: Vec<RelativeEnergySample> = (0..100)
            .map(|i| {
                let t = i as f64 * 0.01;
                RelativeEnergySample { t, e: 0.1 * (2.0 * t).exp(), w: 0.0, k: 1.0 }
            })
            .collect();
        let c = calibrate_c_delta(&series, 0.1, 0.5, 1e-9).unwrap();
        assert!(c >= 2.0 && c <= 4.0, "calibrated C_δ = {c}");
    }

    #[test]
    fn monitor_csv_roundtrip_is_lossless() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rows: Vec<MonitorRow> = (0..10)
            .map(|i| MonitorRow {
                t: i as f64 * 0.1,
                kinetic: rng.gen::<f64>(),
                frank: rng.gen::<f64>() * 1e-17,
                defect_half_mass: rng.gen::<f64>() * 1e9,
                total: rng.gen::<f64>(),
                dissipation: rng.gen::<f64>(),
                cross_term: -rng.gen::<f64>(),
                energy_residual: rng.gen::<f64>() * 1e-13,
                e_rel: rng.gen::<f64>(),
                w_rel: rng.gen::<f64>(),
                k: rng.gen::<f64>(),
                gronwall_bound: rng.gen::<f64>(),
                margin: rng.gen::<f64>() - 0.5,
            })
            .collect();
        let mut buf = Vec::new();
        write_monitor_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = read_monitor_csv(&text).unwrap();
        assert_eq!(rows, back);
    }
}

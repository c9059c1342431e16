//! Lifts a smooth solver trajectory into the measure-valued formulation via
//! its Dirac Young measure and evaluates the weak-form residuals of the
//! velocity and director equations against random smooth test functions.
//! Time derivatives come from central differences of stored states, so the
//! residuals shrink as dt is refined.
//!
//! ```text
//! cargo run --release --example weak_form_residuals
//! ```

use nematic::config::{Config, InitPreset};
use nematic::fields::{project_divfree, Backend, DirectorField, Grid, ScalarField, VectorField};
use nematic::measure::{dirac_from_field, mv_residuals, DefectMeasure, MvState};
use nematic::solver::run;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// A smooth band-limited periodic vector field from a handful of Fourier
/// modes.
fn random_trig_vector(grid: Grid, rng: &mut ChaCha8Rng, kmax: i64) -> VectorField {
    let comp = |rng: &mut ChaCha8Rng| {
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
        ScalarField::from_fn(grid, move |x| {
            modes
                .iter()
                .map(|(k, a, b)| {
                    let phase = k[0] as f64 * x[0] + k[1] as f64 * x[1] + k[2] as f64 * x[2];
                    a * phase.cos() + b * phase.sin()
                })
                .sum()
        })
    };
    let (x, y, z) = (comp(rng), comp(rng), comp(rng));
    VectorField::from_components(&x, &y, &z)
}

/// Residuals of the lifted trajectory at mid-run, with central-difference
/// time derivatives across one step.
fn residuals_at(cfg: &Config, dt: f64, phis: &[VectorField], psis: &[VectorField]) -> (f64, f64) {
    let mut c = cfg.clone();
    c.dt = dt;
    let scn = c.scenario().unwrap();
    let mut solver = c.solver();
    solver.renormalize_every = 0;
    let total = (c.t_end / dt).round() as usize;
    let mid = total / 2;
    let mut window = Vec::new();
    run(&scn, &solver, c.initial().unwrap(), |step, state| {
        if step + 1 == mid || step == mid || step == mid + 1 {
            window.push(state.clone());
        }
    })
    .unwrap();
    let [prev, here, next] = &window[..] else { panic!("missing states") };

    let scale = 1.0 / (2.0 * dt);
    let dv_dt = VectorField {
        grid: scn.grid,
        data: next
            .v
            .data
            .iter()
            .zip(&prev.v.data)
            .map(|(a, b)| (*a - *b) * scale)
            .collect(),
    };
    let dd_dt = VectorField {
        grid: scn.grid,
        data: next
            .d
            .data
            .iter()
            .zip(&prev.d.data)
            .map(|(a, b)| (*a - *b) * scale)
            .collect(),
    };

    let d = DirectorField { field: here.d.clone() };
    let gym = dirac_from_field(&d, Backend::Spectral);
    let defect = DefectMeasure::zero(scn.grid);
    let state = MvState {
        v: &here.v,
        d: &d,
        dv_dt: &dv_dt,
        dd_dt: &dd_dt,
        gym: &gym,
        defect: &defect,
        forcing: None,
    };
    mv_residuals(&state, &scn.leslie, &scn.elastic, Backend::Spectral, phis, psis).unwrap()
}

fn main() {
    let cfg = Config {
        init: InitPreset::RelaxingDirector,
        t_end: 0.02,
        ..Config::default()
    };
    let grid = cfg.grid().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let phis: Vec<VectorField> = (0..5)
        .map(|_| project_divfree(&random_trig_vector(grid, &mut rng, 3)).0)
        .collect();
    let psis: Vec<VectorField> = (0..5)
        .map(|_| random_trig_vector(grid, &mut rng, 3))
        .collect();

    println!("{:>12} {:>16} {:>16}", "dt", "velocity resid", "director resid");
    let mut prev: Option<(f64, f64)> = None;
    for dt in [2e-3, 1e-3, 5e-4] {
        let (rv, rd) = residuals_at(&cfg, dt, &phis, &psis);
        println!("{dt:12.2e} {rv:16.6e} {rd:16.6e}");
        if let Some((pv, _)) = prev {
            assert!(rv <= pv * 1.05, "velocity residual did not decrease");
        }
        prev = Some((rv, rd));
    }
    println!();
    println!("residuals are bounded by C·(dt + backend error) and shrink under dt-refinement");
}

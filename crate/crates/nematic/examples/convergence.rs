//! Refinement studies: temporal order of the two schemes against a fine
//! reference, and the first-order decay of the cumulative energy-law
//! residual under dt-halving.
//!
//! ```text
//! cargo run --release --example convergence
//! ```

use nematic::config::{Config, InitPreset};
use nematic::energy::{energy_law_sample, energy_residuals};
use nematic::fields::{l2_vec, Backend};
use nematic::solver::{run, Scheme, SimulationState};

fn base_config() -> Config {
    Config {
        init: InitPreset::RelaxingDirector,
        t_end: 0.02,
        dt: 1e-3,
        cadence: 1,
        ..Config::default()
    }
}

fn final_state(cfg: &Config, scheme: Scheme, dt: f64) -> SimulationState {
    let mut c = cfg.clone();
    c.dt = dt;
    c.scheme = scheme;
    let scn = c.scenario().unwrap();
    let mut solver = c.solver();
    solver.renormalize_every = 0;
    run(&scn, &solver, c.initial().unwrap(), |_, _| {}).unwrap()
}

fn main() {
    let cfg = base_config();
    let t_end = cfg.t_end;

    for (scheme, label, ref_div) in [
        (Scheme::Rk2, "RK2", 64.0),
        (Scheme::SemiImplicit, "semi-implicit", 256.0),
    ] {
        let reference = final_state(&cfg, scheme, t_end / ref_div);
        println!("{label} temporal convergence (director L2 error at t = {t_end}):");
        println!("{:>12} {:>14} {:>8}", "dt", "error", "order");
        let mut prev: Option<f64> = None;
        for div in [4.0, 8.0, 16.0] {
            let s = final_state(&cfg, scheme, t_end / div);
            let err = l2_vec(&s.d.sub(&reference.d));
            let order = prev.map_or(String::from("-"), |p: f64| format!("{:.2}", (p / err).log2()));
            println!("{:12.2e} {:14.6e} {:>8}", t_end / div, err, order);
            prev = Some(err);
        }
        println!();
    }

    // Energy-law residual: cumulative |ΔE + ∫diss·dt| halves with dt.
    println!("cumulative energy-law residual under dt-halving (RK2):");
    println!("{:>12} {:>14} {:>8}", "dt", "residual", "ratio");
    let mut prev: Option<f64> = None;
    for dt in [4e-3, 2e-3, 1e-3] {
        let mut c = base_config();
        c.dt = dt;
        c.t_end = 0.04;
        let scn = c.scenario().unwrap();
        let mut solver = c.solver();
        solver.renormalize_every = 0;
        let mut samples = Vec::new();
        let scn2 = scn.clone();
        run(&scn, &solver, c.initial().unwrap(), |_, s| {
            samples.push(energy_law_sample(&scn2, s, Backend::Spectral).unwrap());
        })
        .unwrap();
        let total: f64 = energy_residuals(&samples).iter().map(|r| r.abs()).sum();
        let ratio = prev.map_or(String::from("-"), |p: f64| format!("{:.2}", p / total));
        println!("{dt:12.2e} {total:14.6e} {ratio:>8}");
        prev = Some(total);
    }
}

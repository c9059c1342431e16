//! Command-line front door: `verify`, `simulate`, and `compare`.
//!
//! Exit codes are a stable contract:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success |
//! | 1    | property failure in `verify` |
//! | 2    | invalid configuration or usage |
//! | 3    | numerical abort (CFL, NaN, recession) |
//! | 4    | certification failure in `compare` |
//!
//! Every command writes a small `manifest.txt` into the output directory and
//! is deterministic given its inputs; rerunning `simulate` with the same
//! configuration reproduces the monitor CSV byte for byte.

use crate::config::Config;
use crate::energy::{
    calibrate_c_delta, dissipation_and_cross, energy_law_sample, gronwall_certify,
    gronwall_weight_k, initial_constant_c0, relative_dissipation, relative_energy,
    total_energy, write_monitor_csv, Candidate, EnergyLawSample, GronwallReport, MonitorRow,
    Reference, RelativeEnergySample,
};
use crate::fields::{Backend, DirectorField};
use crate::measure::{dirac_from_field, DefectAtom, DefectMeasure};
use crate::solver::{eval_rhs, run, SimulationState};
use crate::tensor::Tensor3;
use crate::verify::run_suite;
use crate::{Error, Result};
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Top-level argument parser.
#[derive(Debug, Parser)]
#[command(name = "nematic", version, about = "Ericksen-Leslie nematic liquid-crystal toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// The three subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the algebra/identity verification suite and print a report.
    Verify,
    /// Integrate a scenario; write field snapshots and the monitor CSV.
    Simulate {
        /// Scenario config file (key = value format); defaults apply if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Initial-data preset override.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Monitor/snapshot cadence override (steps).
        #[arg(long)]
        cadence: Option<usize>,
        /// Derivative backend.
        #[arg(long, default_value = "spectral")]
        backend: String,
        /// Seed recorded in the manifest.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run candidate and reference scenarios, compute the relative energy
    /// series, and certify the Gronwall stability bound.
    Compare {
        /// Candidate scenario config.
        candidate: PathBuf,
        /// Reference scenario config.
        reference: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Sample cadence override (candidate steps).
        #[arg(long)]
        cadence: Option<usize>,
        /// Derivative backend.
        #[arg(long, default_value = "spectral")]
        backend: String,
        /// Dissipation absorption factor ζ ∈ (0, 1).
        #[arg(long, default_value_t = 0.5)]
        zeta: f64,
        /// Gronwall-weight constant C_δ; calibrated by sweep if omitted.
        #[arg(long)]
        cdelta: Option<f64>,
        /// Total defect mass injected into the candidate (adversarial mode;
        /// deliberately not compensated in c0).
        #[arg(long, default_value_t = 0.0)]
        defect_mass: f64,
        /// Seed recorded in the manifest.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Maps an error to its contractual exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::FieldInvariant(_) | Error::Io(_) => 2,
        Error::NumericalAbort(_) | Error::Recession(_) => 3,
        Error::CertificationFailure(_) => 4,
    }
}

/// Parses arguments and dispatches; returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap handles --help/--version as "errors" with success codes.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::Verify => {
            let report = run_suite();
            print!("{}", report.render());
            if report.all_passed() {
                0
            } else {
                1
            }
        }
        Command::Simulate {
            config,
            preset,
            out,
            cadence,
            backend,
            seed,
        } => {
            let result = (|| -> Result<()> {
                let cfg = load_config(config.as_deref(), preset.as_deref(), cadence)?;
                let backend = backend.parse()?;
                write_manifest(&out, "simulate", config.as_deref(), seed)?;
                cmd_simulate(&cfg, backend, &out)
            })();
            report_outcome(result)
        }
        Command::Compare {
            candidate,
            reference,
            out,
            cadence,
            backend,
            zeta,
            cdelta,
            defect_mass,
            seed,
        } => {
            let result = (|| -> Result<()> {
                let mut cand = Config::from_file(&candidate)?;
                let refr = Config::from_file(&reference)?;
                if let Some(c) = cadence {
                    cand.cadence = c;
                    cand.validate()?;
                }
                let params = CompareParams {
                    backend: backend.parse()?,
                    zeta,
                    c_delta: cdelta,
                    c: 1.0,
                    defect_mass,
                    floor: CERT_FLOOR,
                };
                write_manifest(&out, "compare", Some(&candidate), seed)?;
                cmd_compare(&cand, &refr, &params, &out)
            })();
            report_outcome(result)
        }
    }
}

fn report_outcome(result: Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(path: Option<&Path>, preset: Option<&str>, cadence: Option<usize>) -> Result<Config> {
    let mut cfg = match path {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    if let Some(p) = preset {
        cfg.init = p.parse()?;
    }
    if let Some(c) = cadence {
        cfg.cadence = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_manifest(out: &Path, command: &str, config: Option<&Path>, seed: u64) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let mut f = std::fs::File::create(out.join("manifest.txt"))?;
    writeln!(f, "command {command}")?;
    writeln!(f, "config {}", config.map_or("<defaults>".into(), |p| p.display().to_string()))?;
    writeln!(f, "out {}", out.display())?;
    writeln!(f, "seed {seed}")?;
    writeln!(f, "version {}", env!("CARGO_PKG_VERSION"))?;
    let ts = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    writeln!(f, "timestamp {ts}")?;
    Ok(())
}

/// Runs a scenario and writes `monitor.csv` plus velocity/director snapshots
/// at the configured cadence into `out`.
pub fn cmd_simulate(cfg: &Config, backend: Backend, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let scn = cfg.scenario()?;
    let mut solver = cfg.solver();
    solver.backend = backend;
    let initial = cfg.initial()?;
    let total_steps = (solver.t_end / solver.dt).round() as usize;
    let cadence = cfg.cadence;

    let mut sampled: Vec<SimulationState> = Vec::new();
    run(&scn, &solver, initial, |step, state| {
        if step % cadence == 0 || step == total_steps {
            sampled.push(state.clone());
        }
    })?;

    let mut samples: Vec<EnergyLawSample> = Vec::with_capacity(sampled.len());
    for (i, state) in sampled.iter().enumerate() {
        samples.push(energy_law_sample(&scn, state, backend)?);
        let mut vf = std::fs::File::create(out.join(format!("velocity-{i:06}.txt")))?;
        crate::config::write_field_snapshot(&state.v, "velocity", state.t, &mut vf)?;
        let mut df = std::fs::File::create(out.join(format!("director-{i:06}.txt")))?;
        crate::config::write_field_snapshot(&state.d, "director", state.t, &mut df)?;
    }

    let residuals = crate::energy::energy_residuals(&samples);
    let rows: Vec<MonitorRow> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| MonitorRow {
            t: s.t,
            kinetic: s.breakdown.kinetic,
            frank: s.breakdown.frank,
            defect_half_mass: s.breakdown.defect_half_mass,
            total: s.breakdown.total,
            dissipation: s.dissipation,
            cross_term: s.cross,
            energy_residual: if i == 0 { 0.0 } else { residuals[i - 1] },
            ..MonitorRow::default()
        })
        .collect();
    let mut csv = std::fs::File::create(out.join("monitor.csv"))?;
    write_monitor_csv(&rows, &mut csv)?;
    Ok(())
}

/// Additive numerical floor of the certification inequalities (twin runs
/// carry O(machine-epsilon) noise in E).
pub const CERT_FLOOR: f64 = 1e-8;

/// Parameters of the comparison pipeline.
#[derive(Debug, Clone)]
pub struct CompareParams {
    /// Derivative backend for both runs and all functionals.
    pub backend: Backend,
    /// Dissipation absorption factor ζ ∈ (0, 1).
    pub zeta: f64,
    /// `C_δ` in the Gronwall weight; `None` = calibrate by sweep.
    pub c_delta: Option<f64>,
    /// Constant `c` of the `c‖d(0)−d̃(0)‖²` term in c0.
    pub c: f64,
    /// Total defect mass injected into the candidate, not compensated in c0.
    pub defect_mass: f64,
    /// Additive tolerance floor of the certification inequalities.
    pub floor: f64,
}

impl Default for CompareParams {
    fn default() -> CompareParams {
        CompareParams {
            backend: Backend::Spectral,
            zeta: 0.5,
            c_delta: None,
            c: 1.0,
            defect_mass: 0.0,
            floor: CERT_FLOOR,
        }
    }
}

/// Outcome of a comparison: the monitor rows, the certification report, and
/// the `C_δ` that was used.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    /// One row per sample (candidate energetics + relative-energy columns).
    pub rows: Vec<MonitorRow>,
    /// The certification report.
    pub report: GronwallReport,
    /// The calibrated or supplied `C_δ`.
    pub c_delta: f64,
}

/// Runs candidate and reference trajectories, computes the `E/W/K` series,
/// and certifies the stability bound. Returns the full outcome whether or
/// not certification passed; the verdict lives in `outcome.report.pass`.
pub fn compare(cand_cfg: &Config, ref_cfg: &Config, params: &CompareParams) -> Result<CompareOutcome> {
    if cand_cfg.n != ref_cfg.n
        || (cand_cfg.l - ref_cfg.l).abs() > 1e-14 * cand_cfg.l
        || cand_cfg.frank != ref_cfg.frank
        || cand_cfg.leslie != ref_cfg.leslie
    {
        return Err(Error::InvalidConfig(
            "compare requires identical grid and physical constants".into(),
        ));
    }
    if (cand_cfg.t_end - ref_cfg.t_end).abs() > 1e-12 {
        return Err(Error::InvalidConfig("compare requires identical t_end".into()));
    }
    if !(params.zeta > 0.0 && params.zeta < 1.0) {
        return Err(Error::InvalidConfig(format!("ζ must lie in (0, 1), got {}", params.zeta)));
    }
    if !crate::energy::zeta_admissible(&cand_cfg.leslie, params.zeta) {
        return Err(Error::InvalidConfig(format!(
            "ζ = {} cannot absorb the dissipation cross term for these Leslie coefficients",
            params.zeta
        )));
    }

    // Align sample times: every `cadence` candidate steps must land on a
    // whole number of reference steps.
    let sample_dt = cand_cfg.dt * cand_cfg.cadence as f64;
    let ref_every_f = sample_dt / ref_cfg.dt;
    let ref_every = ref_every_f.round() as usize;
    if ref_every == 0 || (ref_every_f - ref_every as f64).abs() > 1e-9 * ref_every_f {
        return Err(Error::InvalidConfig(format!(
            "sample interval {sample_dt:.3e} is not a whole number of reference steps (dt = {:.3e})",
            ref_cfg.dt
        )));
    }

    let backend = params.backend;
    let cand_states = run_sampled(cand_cfg, cand_cfg.cadence, backend)?;
    let ref_states = run_sampled(ref_cfg, ref_every, backend)?;
    if cand_states.len() != ref_states.len() {
        return Err(Error::InvalidConfig(format!(
            "sample counts differ: {} vs {}",
            cand_states.len(),
            ref_states.len()
        )));
    }

    let scn = cand_cfg.scenario()?;
    let ref_scn = ref_cfg.scenario()?;
    let grid = scn.grid;

    // Injected defect measure: uniform mass with a fixed unit direction.
    let defect = if params.defect_mass > 0.0 {
        let cells = grid.cells();
        let gamma = {
            let t = Tensor3::from_fn(|i, j, k| ((1 + i + 2 * j + 4 * k) as f64).sin());
            let n = t.norm();
            t * (1.0 / n)
        };
        DefectMeasure {
            grid,
            mass: vec![params.defect_mass / cells as f64; cells],
            atoms: vec![vec![DefectAtom { weight: 1.0, gamma }]; cells],
        }
    } else {
        DefectMeasure::zero(grid)
    };
    let no_defect = DefectMeasure::zero(grid);

    // c0 from the *fields* at t = 0 (an injected defect is deliberately not
    // compensated, so an adversarial candidate must fail certification).
    let cand0_d = DirectorField { field: cand_states[0].d.clone() };
    let gym0 = dirac_from_field(&cand0_d, backend);
    let c0 = initial_constant_c0(
        &Candidate {
            v: &cand_states[0].v,
            d: &cand0_d,
            gym: &gym0,
            defect: &no_defect,
        },
        &Reference {
            v: &ref_states[0].v,
            d: &ref_states[0].d,
        },
        &scn.elastic,
        params.c,
        backend,
    )?;

    // E/W/K series (K stored as the raw norm sum; scaled by C_δ below).
    let mut raw_samples = Vec::with_capacity(cand_states.len());
    let mut energetics = Vec::with_capacity(cand_states.len());
    for (cs, rs) in cand_states.iter().zip(&ref_states) {
        let d = DirectorField { field: cs.d.clone() };
        let gym = dirac_from_field(&d, backend);
        let (e_rel, _) = relative_energy(
            &Candidate { v: &cs.v, d: &d, gym: &gym, defect: &defect },
            &Reference { v: &rs.v, d: &rs.d },
            &scn.elastic,
            backend,
        )?;
        let w_rel = relative_dissipation(
            &cs.v, &cs.d, &rs.v, &rs.d, &scn.leslie, &scn.elastic, backend,
        );
        let dd_dt = eval_rhs(&ref_scn, &rs.v, &rs.d, backend).dd_dt;
        let (_, k_raw) = gronwall_weight_k(&rs.v, &rs.d, &dd_dt, 1.0, backend);
        raw_samples.push(RelativeEnergySample { t: cs.t, e: e_rel, w: w_rel, k: k_raw });
        let breakdown = total_energy(&cs.v, &d, &scn.elastic, backend, None, Some(&defect))?;
        let (diss, cross) = dissipation_and_cross(&scn, &cs.v, &cs.d, backend);
        energetics.push((breakdown, diss, cross));
    }

    let c_delta = match params.c_delta {
        Some(c) => c,
        None => calibrate_c_delta(&raw_samples, c0, params.zeta, params.floor).unwrap_or(1.0),
    };
    let samples: Vec<RelativeEnergySample> = raw_samples
        .iter()
        .map(|s| RelativeEnergySample { k: c_delta * s.k, ..*s })
        .collect();
    let report = gronwall_certify(&samples, c0, params.zeta, params.floor)?;

    let rows: Vec<MonitorRow> = samples
        .iter()
        .zip(&energetics)
        .zip(&report.samples)
        .map(|((s, (b, diss, cross)), (_, bound, m_pre, m_exp))| MonitorRow {
            t: s.t,
            kinetic: b.kinetic,
            frank: b.frank,
            defect_half_mass: b.defect_half_mass,
            total: b.total,
            dissipation: *diss,
            cross_term: *cross,
            energy_residual: 0.0,
            e_rel: s.e,
            w_rel: s.w,
            k: s.k,
            gronwall_bound: *bound,
            margin: m_pre.min(*m_exp),
        })
        .collect();

    Ok(CompareOutcome { rows, report, c_delta })
}

/// Runs a config and returns states sampled every `every` steps (always
/// including the initial and final states).
fn run_sampled(cfg: &Config, every: usize, backend: Backend) -> Result<Vec<SimulationState>> {
    let scn = cfg.scenario()?;
    let mut solver = cfg.solver();
    solver.backend = backend;
    let total_steps = (solver.t_end / solver.dt).round() as usize;
    let mut sampled = Vec::new();
    run(&scn, &solver, cfg.initial()?, |step, state| {
        if step % every == 0 || step == total_steps {
            sampled.push(state.clone());
        }
    })?;
    Ok(sampled)
}

/// Runs [`compare`], writes `relative.csv` and `report.txt` into `out`, and
/// converts a failed verdict into [`Error::CertificationFailure`] (exit 4).
pub fn cmd_compare(cand_cfg: &Config, ref_cfg: &Config, params: &CompareParams, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    let outcome = compare(cand_cfg, ref_cfg, params)?;
    let mut csv = std::fs::File::create(out.join("relative.csv"))?;
    write_monitor_csv(&outcome.rows, &mut csv)?;

    let report = &outcome.report;
    let mut f = std::fs::File::create(out.join("report.txt"))?;
    writeln!(f, "verdict {}", if report.pass { "pass" } else { "FAIL" })?;
    writeln!(f, "c0 {:.16e}", report.c0)?;
    writeln!(f, "zeta {:.16e}", report.zeta)?;
    writeln!(f, "c_delta {:.16e}", outcome.c_delta)?;
    writeln!(f, "floor {:.16e}", report.floor)?;
    writeln!(f, "k_integral {:.16e}", report.k_integral)?;
    writeln!(f, "min_margin {:.16e}", report.min_margin())?;
    writeln!(
        f,
        "note a FAIL may reflect an under-sized C_delta rather than a genuine stability violation"
    )?;

    if report.pass {
        println!("certification pass (min margin {:.3e})", report.min_margin());
        Ok(())
    } else {
        println!("certification FAIL (min margin {:.3e})", report.min_margin());
        Err(Error::CertificationFailure(format!(
            "Gronwall bound violated: min margin {:.3e}",
            report.min_margin()
        )))
    }
}

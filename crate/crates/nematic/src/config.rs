//! Run configuration: the plain-text `key = value` scenario format, shipped
//! initial-data presets, and the plain-text field snapshot format.
//!
//! Recognized keys (all optional, with defaults):
//!
//! ```text
//! grid.n         cells per periodic axis (2D-in-3D square grid)
//! grid.L         domain edge length
//! frank.K1..K3   Oseen–Frank moduli
//! leslie.mu1..mu6, leslie.lambda   Leslie coefficients
//! solver.dt, solver.scheme, solver.t_end
//! init.preset    quiescent | relaxing-director | taylor-green-coupled |
//!                perturbed-twin
//! forcing.preset none | steady-vortex
//! output.cadence monitor/snapshot interval in steps
//! ```
//!
//! Lines starting with `#` and blank lines are ignored; unknown keys and
//! malformed values are rejected with [`Error::InvalidConfig`].

use crate::fields::{DirectorField, Grid, VectorField};
use crate::frank::ElasticTensors;
use crate::leslie::{validate_dissipativity, LeslieCoefficients};
use crate::solver::{Forcing, Scenario, Scheme, SimulationState, SolverConfig};
use crate::tensor::Vec3;
use crate::{Error, Result};
use std::path::Path;

/// Initial-data preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitPreset {
    /// Zero velocity, uniform director.
    #[default]
    Quiescent,
    /// Zero velocity, smooth distorted director (relaxes under elasticity).
    RelaxingDirector,
    /// Taylor–Green vortex velocity with a smooth distorted director.
    TaylorGreenCoupled,
    /// The relaxing-director data with an `ε = 1e−2` director perturbation
    /// (candidate side of a perturbed twin comparison).
    PerturbedTwin,
}

impl std::str::FromStr for InitPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<InitPreset> {
        match s {
            "quiescent" => Ok(InitPreset::Quiescent),
            "relaxing-director" => Ok(InitPreset::RelaxingDirector),
            "taylor-green-coupled" => Ok(InitPreset::TaylorGreenCoupled),
            "perturbed-twin" => Ok(InitPreset::PerturbedTwin),
            other => Err(Error::InvalidConfig(format!("unknown init preset '{other}'"))),
        }
    }
}

/// Director perturbation amplitude of the `perturbed-twin` preset.
pub const TWIN_EPSILON: f64 = 1e-2;

/// Forcing preset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForcingPreset {
    /// `g = 0`.
    #[default]
    None,
    /// A gentle steady solenoidal body force.
    SteadyVortex,
}

impl std::str::FromStr for ForcingPreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<ForcingPreset> {
        match s {
            "none" => Ok(ForcingPreset::None),
            "steady-vortex" => Ok(ForcingPreset::SteadyVortex),
            other => Err(Error::InvalidConfig(format!("unknown forcing preset '{other}'"))),
        }
    }
}

/// A parsed scenario configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Cells per periodic axis.
    pub n: usize,
    /// Domain edge length.
    pub l: f64,
    /// Oseen–Frank moduli `(K1, K2, K3)`.
    pub frank: [f64; 3],
    /// Leslie coefficients.
    pub leslie: LeslieCoefficients,
    /// Time step.
    pub dt: f64,
    /// Integration scheme.
    pub scheme: Scheme,
    /// Final time.
    pub t_end: f64,
    /// Initial-data preset.
    pub init: InitPreset,
    /// Forcing preset.
    pub forcing: ForcingPreset,
    /// Monitor/snapshot cadence in steps.
    pub cadence: usize,
}

impl Default for Config {
    fn default() -> Config {
        Config {
            n: 16,
            l: 2.0 * std::f64::consts::PI,
            frank: [1.0, 1.2, 0.8],
            leslie: LeslieCoefficients {
                mu1: 0.5,
                mu2: -0.2,
                mu3: 0.4,
                mu4: 1.0,
                mu5: 0.6,
                mu6: 0.4,
                lambda: 0.2,
            },
            dt: 1e-3,
            scheme: Scheme::Rk2,
            t_end: 0.1,
            init: InitPreset::Quiescent,
            forcing: ForcingPreset::None,
            cadence: 1,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, val: &str) -> Result<T> {
    val.parse().map_err(|_| {
        Error::InvalidConfig(format!("invalid value '{val}' for key '{key}'"))
    })
}

impl Config {
    /// Parses the `key = value` text format.
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "grid.n" => cfg.n = parse_num(key, val)?,
                "grid.L" => cfg.l = parse_num(key, val)?,
                "frank.K1" => cfg.frank[0] = parse_num(key, val)?,
                "frank.K2" => cfg.frank[1] = parse_num(key, val)?,
                "frank.K3" => cfg.frank[2] = parse_num(key, val)?,
                "leslie.mu1" => cfg.leslie.mu1 = parse_num(key, val)?,
                "leslie.mu2" => cfg.leslie.mu2 = parse_num(key, val)?,
                "leslie.mu3" => cfg.leslie.mu3 = parse_num(key, val)?,
                "leslie.mu4" => cfg.leslie.mu4 = parse_num(key, val)?,
                "leslie.mu5" => cfg.leslie.mu5 = parse_num(key, val)?,
                "leslie.mu6" => cfg.leslie.mu6 = parse_num(key, val)?,
                "leslie.lambda" => cfg.leslie.lambda = parse_num(key, val)?,
                "solver.dt" => cfg.dt = parse_num(key, val)?,
                "solver.scheme" => cfg.scheme = val.parse()?,
                "solver.t_end" => cfg.t_end = parse_num(key, val)?,
                "init.preset" => cfg.init = val.parse()?,
                "forcing.preset" => cfg.forcing = val.parse()?,
                "output.cadence" => cfg.cadence = parse_num(key, val)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a configuration file.
    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    /// Validates ranges and coefficient admissibility.
    pub fn validate(&self) -> Result<()> {
        if self.cadence == 0 {
            return Err(Error::InvalidConfig("output.cadence must be ≥ 1".into()));
        }
        if !(self.l > 0.0 && self.l.is_finite()) {
            return Err(Error::InvalidConfig(format!("grid.L must be positive, got {}", self.l)));
        }
        let violations = validate_dissipativity(&self.leslie);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidConfig(format!(
                "Leslie coefficients violate dissipativity: {} (value {:.3e})",
                v.name, v.value
            )));
        }
        Ok(())
    }

    /// Builds the grid.
    pub fn grid(&self) -> Result<Grid> {
        Grid::square_2d(self.n, self.l)
    }

    /// Builds the physical scenario (grid, tensors, forcing field).
    pub fn scenario(&self) -> Result<Scenario> {
        let grid = self.grid()?;
        let elastic = ElasticTensors::from_moduli(self.frank[0], self.frank[1], self.frank[2])?;
        let forcing = match self.forcing {
            ForcingPreset::None => Forcing::None,
            ForcingPreset::SteadyVortex => {
                let f = VectorField::from_fn(grid, |x| {
                    Vec3([0.05 * x[1].sin(), -0.05 * x[0].sin(), 0.0])
                });
                Forcing::Steady(f)
            }
        };
        Ok(Scenario {
            grid,
            elastic,
            leslie: self.leslie,
            forcing,
        })
    }

    /// Builds the solver parameters.
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            scheme: self.scheme,
            ..SolverConfig::new(self.dt, self.t_end)
        }
    }

    /// Builds the initial state of the configured preset.
    pub fn initial(&self) -> Result<SimulationState> {
        let grid = self.grid()?;
        Ok(initial_state(grid, self.init))
    }
}

/// The smooth distorted director shared by the non-trivial presets.
fn distorted_director(grid: Grid) -> DirectorField {
    DirectorField::from_fn_normalized(grid, |x| {
        Vec3([
            1.0,
            0.4 * x[0].sin() + 0.2 * x[1].cos(),
            0.3 * (x[0] + x[1]).cos(),
        ])
    })
}

/// Deterministic initial state for a preset on a grid.
pub fn initial_state(grid: Grid, preset: InitPreset) -> SimulationState {
    let (v, d) = match preset {
        InitPreset::Quiescent => (
            VectorField::zeros(grid),
            VectorField::from_fn(grid, |_| Vec3::basis(2)),
        ),
        InitPreset::RelaxingDirector => {
            (VectorField::zeros(grid), distorted_director(grid).field)
        }
        InitPreset::TaylorGreenCoupled => {
            let v = VectorField::from_fn(grid, |x| {
                Vec3([0.2 * x[0].sin() * x[1].cos(), -0.2 * x[0].cos() * x[1].sin(), 0.0])
            });
            (v, distorted_director(grid).field)
        }
        InitPreset::PerturbedTwin => {
            let base = distorted_director(grid);
            let d = DirectorField::from_fn_normalized(grid, |x| {
                base.field.data[crate::measure::cell_of(grid, x)]
                    + Vec3([0.0, TWIN_EPSILON * x[0].sin(), TWIN_EPSILON * x[1].cos()])
            });
            (VectorField::zeros(grid), d.field)
        }
    };
    SimulationState { t: 0.0, v, d }
}

// ──────────────────────────────────────────────────────────────────────
// Field snapshot format
// ──────────────────────────────────────────────────────────────────────

/// Writes a vector field snapshot in the plain-text format:
///
/// ```text
/// field-snapshot v1
/// name <name>
/// time <t>
/// grid <n1> <n2> <n3> <L1> <L2> <L3>
/// <c1x> <c1y> <c1z>        (one line per cell, first axis fastest)
/// ```
pub fn write_field_snapshot(
    f: &VectorField,
    name: &str,
    t: f64,
    out: &mut impl std::io::Write,
) -> std::io::Result<()> {
    writeln!(out, "field-snapshot v1")?;
    writeln!(out, "name {name}")?;
    writeln!(out, "time {t:.16e}")?;
    let (n, l) = (f.grid.n, f.grid.len);
    writeln!(out, "grid {} {} {} {:.16e} {:.16e} {:.16e}", n[0], n[1], n[2], l[0], l[1], l[2])?;
    for v in &f.data {
        writeln!(out, "{:.16e} {:.16e} {:.16e}", v[0], v[1], v[2])?;
    }
    Ok(())
}

/// Reads back a snapshot written by [`write_field_snapshot`]; returns the
/// field together with its recorded name and time.
pub fn read_field_snapshot(text: &str) -> Result<(VectorField, String, f64)> {
    let bad = |m: &str| Error::InvalidConfig(format!("field snapshot: {m}"));
    let mut lines = text.lines();
    if lines.next() != Some("field-snapshot v1") {
        return Err(bad("missing 'field-snapshot v1' header"));
    }
    let name = lines
        .next()
        .and_then(|l| l.strip_prefix("name "))
        .ok_or_else(|| bad("missing name line"))?
        .to_string();
    let t: f64 = lines
        .next()
        .and_then(|l| l.strip_prefix("time "))
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| bad("missing or malformed time line"))?;
    let grid_line = lines
        .next()
        .and_then(|l| l.strip_prefix("grid "))
        .ok_or_else(|| bad("missing grid line"))?;
    let parts: Vec<&str> = grid_line.split_whitespace().collect();
    if parts.len() != 6 {
        return Err(bad("grid line must have 6 entries"));
    }
    let n: [usize; 3] = [
        parts[0].parse().map_err(|_| bad("bad grid size"))?,
        parts[1].parse().map_err(|_| bad("bad grid size"))?,
        parts[2].parse().map_err(|_| bad("bad grid size"))?,
    ];
    let l: [f64; 3] = [
        parts[3].parse().map_err(|_| bad("bad grid length"))?,
        parts[4].parse().map_err(|_| bad("bad grid length"))?,
        parts[5].parse().map_err(|_| bad("bad grid length"))?,
    ];
    let grid = Grid::new(n, l)?;
    let mut data = Vec::with_capacity(grid.cells());
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let comps: Vec<f64> = line
            .split_whitespace()
            .map(|s| s.parse().map_err(|_| bad(&format!("bad value '{s}'"))))
            .collect::<Result<_>>()?;
        if comps.len() != 3 {
            return Err(bad("each cell line must have 3 components"));
        }
        data.push(Vec3([comps[0], comps[1], comps[2]]));
    }
    if data.len() != grid.cells() {
        return Err(bad(&format!(
            "expected {} cells, found {}",
            grid.cells(),
            data.len()
        )));
    }
    Ok((VectorField { grid, data }, name, t))
}

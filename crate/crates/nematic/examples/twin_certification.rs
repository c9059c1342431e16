//! Weak–strong stability at its sharpest: two runs from *identical* initial
//! data. The relative energy E(t) between the Dirac-lifted candidate and
//! the reference stays at round-off, and the Gronwall certificate passes
//! with the full floor to spare.
//!
//! ```text
//! cargo run --release --example twin_certification
//! ```

use nematic::cli::{compare, CompareParams};
use nematic::config::{Config, InitPreset};

fn main() -> nematic::Result<()> {
    let cfg = Config {
        init: InitPreset::RelaxingDirector,
        t_end: 0.1,
        dt: 1e-3,
        cadence: 10,
        ..Config::default()
    };
    let outcome = compare(&cfg, &cfg, &CompareParams::default())?;

    println!("{:>8} {:>14} {:>14} {:>14} {:>14}", "t", "E_rel", "W_rel", "bound", "margin");
    for r in &outcome.rows {
        println!(
            "{:8.3} {:14.3e} {:14.3e} {:14.3e} {:14.3e}",
            r.t, r.e_rel, r.w_rel, r.gronwall_bound, r.margin
        );
    }
    println!();
    println!("c0       = {:.3e}", outcome.report.c0);
    println!("C_delta  = {:.3e} (calibrated)", outcome.c_delta);
    println!("∫K dt    = {:.3e}", outcome.report.k_integral);
    println!("verdict  = {}", if outcome.report.pass { "pass" } else { "FAIL" });
    assert!(outcome.report.pass);
    let e_max = outcome.rows.iter().fold(0.0_f64, |m, r| m.max(r.e_rel));
    println!("max E(t) = {e_max:.3e} (twin runs: pure round-off)");
    Ok(())
}

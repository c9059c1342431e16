//! Weak–strong stability under perturbation: the candidate starts from an
//! ε-perturbed director while the reference does not. The initial constant
//! scales as c0 = O(ε²), the relative energy stays below c0·exp(∫K), and
//! certification passes with positive margin. Flip on an adversarial defect
//! injection (uncompensated in c0) and the certificate correctly fails.
//!
//! ```text
//! cargo run --release --example perturbed_certification
//! ```

use nematic::cli::{compare, CompareParams};
use nematic::config::{Config, InitPreset, TWIN_EPSILON};

fn main() -> nematic::Result<()> {
    let reference = Config {
        init: InitPreset::RelaxingDirector,
        t_end: 0.1,
        dt: 1e-3,
        cadence: 10,
        ..Config::default()
    };
    let candidate = Config {
        init: InitPreset::PerturbedTwin,
        ..reference.clone()
    };

    let outcome = compare(&candidate, &reference, &CompareParams::default())?;
    let volume = reference.grid()?.volume();
    println!("perturbation ε = {TWIN_EPSILON:.1e}");
    println!(
        "c0             = {:.6e} (per unit volume {:.3e}, expect O(ε²) = O({:.1e}))",
        outcome.report.c0,
        outcome.report.c0 / volume,
        TWIN_EPSILON * TWIN_EPSILON
    );
    println!("C_delta        = {:.3e} (calibrated)", outcome.c_delta);
    println!("min margin     = {:.6e}", outcome.report.min_margin());
    println!("verdict        = {}", if outcome.report.pass { "pass" } else { "FAIL" });
    assert!(outcome.report.pass);
    assert!(outcome.report.c0 < 10.0 * volume * TWIN_EPSILON * TWIN_EPSILON);

    // Adversarial mode: inject defect mass into the candidate without
    // compensating c0 — the pre-Gronwall inequality is violated at t = 0.
    let adversarial = CompareParams {
        defect_mass: 0.5,
        ..CompareParams::default()
    };
    let bad = compare(&candidate, &reference, &adversarial)?;
    println!();
    println!("adversarial defect mass 0.5:");
    println!("min margin     = {:.6e}", bad.report.min_margin());
    println!("verdict        = {}", if bad.report.pass { "pass" } else { "FAIL" });
    assert!(!bad.report.pass, "adversarial run must fail certification");
    Ok(())
}

//! Runs the full algebra/identity verification suite and prints the
//! pass/fail table with per-group counts — the same report produced by
//! `nematic verify`.
//!
//! ```text
//! cargo run --example verify_suite
//! ```

fn main() {
    let report = nematic::verify::run_suite();
    print!("{}", report.render());
    std::process::exit(if report.all_passed() { 0 } else { 1 });
}

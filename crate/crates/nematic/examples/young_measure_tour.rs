//! A tour of the generalized Young-measure layer: Dirac lifts, oscillation
//! atoms and the Jensen gap, concentration with recession evaluation, and
//! defect measures in the relative energy.
//!
//! ```text
//! cargo run --example young_measure_tour
//! ```

use nematic::energy::{relative_energy, Candidate, Reference};
use nematic::fields::{integrate, Backend, DirectorField, Grid, ScalarField, VectorField};
use nematic::frank::{energy_density, ElasticTensors};
use nematic::measure::{
    barycenter, dirac_from_field, pairing, recession_eval, DefectAtom, DefectMeasure,
    OscillationAtom, TestIntegrand,
};
use nematic::tensor::{Mat3, Tensor3, Vec3};
use std::f64::consts::PI;

fn main() -> nematic::Result<()> {
    let grid = Grid::square_2d(16, 2.0 * PI)?;
    let elastic = ElasticTensors::from_moduli(1.0, 1.2, 0.8)?;
    let d = DirectorField::from_fn_normalized(grid, |x| {
        Vec3([1.0, 0.4 * x[0].sin() + 0.2 * x[1].cos(), 0.3 * (x[0] + x[1]).cos()])
    });

    // 1. Dirac lift: pairing against the elastic energy density reproduces
    //    plain quadrature.
    let gym = dirac_from_field(&d, Backend::Spectral);
    let et = elastic;
    let f = TestIntegrand::quadratic(move |_, h, s| energy_density(h, s, &et));
    let via_measure = pairing(&gym, &f, &d)?;
    let direct = nematic::fields::q::frank_energy(&d.field, &elastic, Backend::Spectral);
    println!("Dirac pairing vs quadrature:  {via_measure:.12e} vs {direct:.12e}");
    assert!((via_measure - direct).abs() <= 1e-12 * direct.abs());

    // 2. Barycenter identification: the Dirac lift's barycenter is ∇d.
    let bary = barycenter(&gym);
    let grad = nematic::fields::grad_vector(&d.field, Backend::Spectral);
    let bary_err = bary
        .data
        .iter()
        .zip(&grad.data)
        .fold(0.0_f64, |m, (a, b)| m.max((*a - *b).norm()));
    println!("barycenter vs gradient:       max error {bary_err:.3e}");

    // 3. Oscillation atoms: splitting each Dirac into a ± pair around ∇d
    //    raises the paired energy by the Jensen gap (convexity).
    let mut split = gym.clone();
    let bump = Mat3::from_fn(|i, j| if i == 1 && j == 0 { 0.3 } else { 0.0 });
    for atoms in &mut split.oscillation {
        let s0 = atoms[0].s;
        *atoms = vec![
            OscillationAtom { weight: 0.5, s: s0 + bump },
            OscillationAtom { weight: 0.5, s: s0 - bump },
        ];
    }
    let split_energy = pairing(&split, &f, &d)?;
    println!("Jensen gap from oscillation:  {:.6e} (must be ≥ 0)", split_energy - via_measure);
    assert!(split_energy >= via_measure);

    // 4. Concentration: a cell with unit concentration mass paired against
    //    a quadratic integrand via the recession function. For f = |S|²
    //    the recession value at an angle atom (h̃, S̃) is |S̃|²(1 − |h̃|²) —
    //    here 1·(1 − ¼) = ¾.
    let quad = TestIntegrand::quadratic(|_, _, s| s.ddot(s));
    let h_tilde = Vec3([0.5, 0.0, 0.0]);
    let s_tilde = Mat3::from_fn(|i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 });
    let at_boundary = recession_eval(&quad, Vec3::ZERO, h_tilde, s_tilde)?;
    println!("recession of |S|² at (|h̃|=0.5, |S̃|=1): {at_boundary:.12} (exact 0.75)");
    assert!((at_boundary - 0.75).abs() < 1e-6);

    // 5. Defect measure: mass m in the relative energy contributes exactly
    //    m/2, so a defective candidate can never be energy-identical to a
    //    smooth reference.
    let gamma = {
        let t = Tensor3::from_fn(|i, j, k| ((1 + i + 2 * j + 4 * k) as f64).cos());
        let n = t.norm();
        t * (1.0 / n)
    };
    let cells = grid.cells();
    let defect = DefectMeasure {
        grid,
        mass: vec![0.8 / cells as f64; cells],
        atoms: vec![vec![DefectAtom { weight: 1.0, gamma }]; cells],
    };
    let v = VectorField::zeros(grid);
    let (e_rel, _) = relative_energy(
        &Candidate { v: &v, d: &d, gym: &gym, defect: &defect },
        &Reference { v: &v, d: &d.field },
        &elastic,
        Backend::Spectral,
    )?;
    println!("twin + defect mass 0.8:       E = {e_rel:.12} (exact 0.4)");
    assert!((e_rel - 0.4).abs() < 1e-12);

    // 6. Sanity: the measure layer's quadrature weight is the cell volume.
    let one = ScalarField::from_fn(grid, |_| 1.0);
    println!("∫ 1 dx = {:.6} (volume {:.6})", integrate(&one), grid.volume());
    Ok(())
}

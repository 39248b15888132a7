mod support;

use nlss_core::scalar::{least_quotient, solve_scalar_ground};
use nlss_core::{build_grid, eigendecompose, DomainSpec, Field, SolverOptions};
use std::f64::consts::PI;

#[test]
fn definite_ground_state_matches_inverse_iteration_oracle() {
    let n = 256;
    let g = build_grid(&DomainSpec::interval(PI, n)).unwrap();
    let s = eigendecompose(&g);
    let oracle = support::scalar_oracle(PI, n, 0.0, 1.0);
    let sg = solve_scalar_ground(0.0, 1.0, &g, &s, &SolverOptions::default()).unwrap();
    let rel = (sg.energy - oracle.energy).abs() / oracle.energy;
    assert!(rel <= 1e-6, "energy {} vs oracle {} (rel {rel:e})", sg.energy, oracle.energy);

    let u = Field::from_vec(oracle.u.clone());
    assert!((&sg.u - &u).amax() <= 1e-6 * u.amax());
    let q = least_quotient(&g, &sg.u, 0.0).unwrap();
    assert!((q - oracle.quotient).abs() <= 1e-6 * oracle.quotient);
    // E = S²/(4μ) on the Nehari set
    assert!((sg.energy - q * q / 4.0).abs() <= 1e-8 * sg.energy);
}

#[test]
fn ground_level_scales_inversely_with_mu() {
    let n = 256;
    let g = build_grid(&DomainSpec::interval(PI, n)).unwrap();
    let s = eigendecompose(&g);
    let opts = SolverOptions::default();
    let a = solve_scalar_ground(0.0, 1.0, &g, &s, &opts).unwrap();
    let b = solve_scalar_ground(0.0, 4.0, &g, &s, &opts).unwrap();
    let rel = (4.0 * b.energy - a.energy).abs() / a.energy;
    assert!(rel <= 1e-12, "rel {rel:e}");
    assert!((&b.u * 2.0 - &a.u).amax() <= 1e-8 * a.u.amax());
    assert!((a.quotient - b.quotient).abs() <= 1e-10 * a.quotient);
}

#[test]
fn oracle_tracks_mesh_at_second_order() {
    let e: Vec<f64> = [63, 127, 255].iter().map(|&n| support::scalar_oracle(PI, n, 0.5, 1.0).energy).collect();
    let ratio = (e[0] - e[1]) / (e[1] - e[2]);
    assert!((3.5..4.5).contains(&ratio), "{ratio}");

    let g = build_grid(&DomainSpec::interval(PI, 63)).unwrap();
    let s = eigendecompose(&g);
    let sg = solve_scalar_ground(0.5, 1.0, &g, &s, &SolverOptions::default()).unwrap();
    assert!((sg.energy - e[0]).abs() <= 1e-9 * e[0]);
}

use anomalykit::forward::{solve_time_dependent, Boundary, ModelParams, State};
use anomalykit::geometry::{Grid, Inclusion};
use anomalykit::inversion::{discrepancy, discrepancy_l2};
use anomalykit::reaction::{CoefficientField, PiecewiseReaction, TaylorReaction};

fn measure(grid: &Grid, radius: f64, exterior: f64) -> anomalykit::forward::MeasurementSet {
    let p = ModelParams::uncoupled(vec![0.1], vec![], 0.2);
    let mut g1 = TaylorReaction::new(vec![0.0], 0, 2).unwrap();
    let mut g0 = g1.clone();
    g1.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(1.0)).unwrap();
    g0.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(exterior)).unwrap();
    let r = PiecewiseReaction::new(g1, g0, Inclusion::circle([0.5, 0.5], radius)).unwrap();
    let pi = std::f64::consts::PI;
    let init = State {
        u: vec![grid.sample(|x| 1.0 + 0.5 * (pi * x[0]).cos() * (pi * x[1]).cos())],
        v: vec![],
        t: 0.0,
    };
    solve_time_dependent(grid, &p, &r, &init, &Boundary::Neumann, 0.01, 2, false)
        .unwrap()
        .measurements
}

#[test]
fn different_inclusions_are_distinguished() {
    let g = Grid::unit(32).unwrap();
    let a = measure(&g, 0.15, 0.5);
    let b = measure(&g, 0.20, 0.5);
    assert!(discrepancy(&a, &b).unwrap() > 1e-6);
    assert!(discrepancy_l2(&a, &b).unwrap() > 0.0);
    assert!(discrepancy(&a, &measure(&g, 0.15, 0.5)).unwrap() <= 1e-10);
}

#[test]
fn no_jump_hides_the_inclusion() {
    // equal branches: the inclusion has no effect on the data
    let g = Grid::unit(24).unwrap();
    let a = measure(&g, 0.15, 1.0);
    let b = measure(&g, 0.20, 1.0);
    assert!(discrepancy(&a, &b).unwrap() <= 1e-12);
}

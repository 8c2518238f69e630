use anomalykit::forward::{Boundary, ModelParams, State};
use anomalykit::geometry::{Grid, Inclusion, TruncatedCorner};
use anomalykit::inversion::{
    add_noise, apex_vanishing_test, max_sample_error, reconstruct_inclusion, recover_boundary_coefficient,
    ApexClass, Candidate, ForwardSetup, InverseProblem, NoiseSpec, ReconstructOptions, SimulationMode,
    DEFAULT_EXTRA_DECAY,
};
use anomalykit::probe::ProbeSpec;
use anomalykit::reaction::{CoefficientField, PiecewiseReaction, TaylorReaction};

fn setup(n: usize) -> ForwardSetup {
    let grid = Grid::unit(n).unwrap();
    let mut g1 = TaylorReaction::new(vec![0.0], 0, 2).unwrap();
    let mut g0 = g1.clone();
    g1.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(1.0)).unwrap();
    g0.set(0, "u1u1".parse().unwrap(), CoefficientField::constant(0.5)).unwrap();
    let pi = std::f64::consts::PI;
    ForwardSetup {
        initial: State {
            u: vec![grid.sample(|x| 1.0 + 0.5 * (pi * x[0]).cos() * (pi * x[1]).cos())],
            v: vec![],
            t: 0.0,
        },
        reaction: PiecewiseReaction::new(g1, g0, Inclusion::circle([0.5, 0.5], 0.2)).unwrap(),
        params: ModelParams::uncoupled(vec![0.1], vec![], 0.2),
        grid,
        boundary: Boundary::Neumann,
        mode: SimulationMode::Parabolic {
            dt: 0.01,
            store_every: 2,
        },
    }
}

#[test]
fn noisy_reconstruction_stays_close() {
    let s = setup(24);
    let truth = Inclusion::circle([0.55, 0.45], 0.18);
    let clean = s.simulate(&truth).unwrap();
    let noise = NoiseSpec { level: 0.01, seed: 11 };
    let ip = InverseProblem {
        observed: add_noise(&clean, noise.level, noise.seed).unwrap(),
        setup: s,
        candidate: Candidate::Circle,
        noise: Some(noise),
    };
    let r = reconstruct_inclusion(&ip, &ReconstructOptions::default()).unwrap();
    assert_eq!(r.noise_seed, Some(11));
    assert!(r.solves <= 300);
    assert!(r.stagnated);
    let h = ip.setup.grid.h_max();
    let p = &r.parameters;
    assert!((p[0] - 0.55).hypot(p[1] - 0.45) < 4.0 * h, "{p:?}");
    assert!((p[2] - 0.18).abs() < 4.0 * h, "{p:?}");
    // the misfit floor is the noise itself
    assert!(r.misfit <= ip.misfit(&truth.parameters()) + 1e-12);
}

#[test]
fn layout_mismatch_is_rejected() {
    let s = setup(24);
    let other = setup(20).simulate(&Inclusion::circle([0.5, 0.5], 0.2)).unwrap();
    let ip = InverseProblem {
        observed: other,
        setup: s,
        candidate: Candidate::Circle,
        noise: None,
    };
    assert!(reconstruct_inclusion(&ip, &ReconstructOptions::default()).is_err());
}

#[test]
fn coefficient_next_to_reconstructed_interface() {
    let mut s = setup(32);
    let h = s.grid.h_max();
    s.initial = State::constant(&s.grid, &[0.0], 0);
    s.mode = SimulationMode::Parabolic {
        dt: 4.0 * h * h,
        store_every: 1,
    };
    // a slightly wrong estimate still lies in the exterior region
    let estimate = Inclusion::circle([0.51, 0.5], 0.21);
    let x = recover_boundary_coefficient(&s, &estimate, 0, &"u1u1".parse().unwrap(), 20).unwrap();
    assert!(max_sample_error(&x, 0.5) < 5.0 * h);
}

#[test]
fn apex_classes_on_a_polygon_corner() {
    let c = TruncatedCorner::sector([0.2, 0.3], 0.3, 0.5, 0.5).unwrap();
    let spec = ProbeSpec::along_axis(c, vec![20.0, 40.0, 80.0, 160.0]).unwrap();
    let apex = [0.2, 0.3];
    let smooth = |x: &[f64]| 2.0 + (x[0] - apex[0]) * 3.0 + (x[1] - apex[1]);
    let vanishing = |x: &[f64]| ((x[0] - apex[0]).powi(2) + (x[1] - apex[1]).powi(2)).sqrt().powf(0.8);
    let a = apex_vanishing_test(&spec, &smooth, DEFAULT_EXTRA_DECAY).unwrap();
    assert_eq!(a.class, ApexClass::Nonzero, "{a:?}");
    let b = apex_vanishing_test(&spec, &vanishing, DEFAULT_EXTRA_DECAY).unwrap();
    assert_eq!(b.class, ApexClass::Zero, "{b:?}");
    assert!((-b.fit.unwrap().exponent - 0.8).abs() < 0.1);
}

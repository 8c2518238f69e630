use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

use anomalykit::geometry::{corner_from_polygon, Inclusion, TruncatedCorner};
use anomalykit::probe::{laplace_tail_identity, run_probe, ProbeSpec};
use num_complex::Complex64;

const LADDER: [f64; 4] = [20.0, 40.0, 80.0, 160.0];

fn sector(half: f64) -> ProbeSpec {
    ProbeSpec::along_axis(TruncatedCorner::sector([0.5, 0.5], 1.1, half, 0.6).unwrap(), LADDER.to_vec()).unwrap()
}

#[test]
fn planar_decay_rates() {
    for half in [PI / 12.0, FRAC_PI_6, FRAC_PI_4] {
        let r = run_probe(&sector(half), 1.0).unwrap();
        assert!((r.fit.exponent + 2.0).abs() <= 0.05, "{half}: {:?}", r.fit);
        assert!((r.weighted_fit.exponent + 3.0).abs() <= 0.08, "{half}: {:?}", r.weighted_fit);
        assert!(r.h1_ratio_monotone && r.flux_ratio_monotone);
    }
}

#[test]
fn polygon_vertex_corner() {
    let tri = Inclusion::polygon(vec![[0.2, 0.2], [0.8, 0.25], [0.45, 0.8]]);
    let c = corner_from_polygon(&tri, 0, 0.2).unwrap();
    let s = ProbeSpec::along_axis(c, vec![50.0, 100.0, 200.0, 400.0]).unwrap();
    let r = run_probe(&s, 1.0).unwrap();
    assert!((r.fit.exponent + 2.0).abs() <= 0.05, "{:?}", r.fit);
}

#[test]
fn half_angle_changes_the_constant_not_the_rate() {
    let narrow = run_probe(&sector(PI / 12.0), 0.5).unwrap();
    let wide = run_probe(&sector(FRAC_PI_4), 0.5).unwrap();
    assert!(wide.fit.constant > narrow.fit.constant);
    assert!((narrow.fit.exponent - wide.fit.exponent).abs() < 0.05);
}

#[test]
fn laplace_identity_sweep() {
    for alpha in [0.5, 1.0, 2.5] {
        for re in [1.0, 5.0, 20.0] {
            for im in [-3.0, 0.0, 4.0] {
                let l = laplace_tail_identity(alpha, Complex64::new(re, im), 0.3).unwrap();
                assert!(l.residual < 1e-10, "{alpha} {re} {im}: {l:?}");
            }
        }
    }
}

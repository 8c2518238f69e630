use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::MeasurementSet;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub sup: f64,
    /// Root-mean-square over all samples.
    pub l2: f64,
    pub samples: usize,
}

fn check(a: &MeasurementSet, b: &MeasurementSet) -> Result<()> {
    if !a.same_layout(b) {
        return Err(Error::LayoutMismatch(format!(
            "{:?} with {} timestamps and {} boundary nodes vs {:?} with {} and {}",
            a.kind,
            a.times.len(),
            a.boundary_nodes,
            b.kind,
            b.times.len(),
            b.boundary_nodes
        )));
    }
    Ok(())
}

/// Sup-norm distance between two measurement sets with identical layout.
pub fn discrepancy(a: &MeasurementSet, b: &MeasurementSet) -> Result<f64> {
    Ok(discrepancy_report(a, b)?.sup)
}

pub fn discrepancy_l2(a: &MeasurementSet, b: &MeasurementSet) -> Result<f64> {
    Ok(discrepancy_report(a, b)?.l2)
}

pub fn discrepancy_report(a: &MeasurementSet, b: &MeasurementSet) -> Result<DiscrepancyReport> {
    check(a, b)?;
    let (mut sup, mut sq, mut n) = (0.0f64, 0.0f64, 0usize);
    for (x, y) in a.values().zip(b.values()) {
        let d = (x - y).abs();
        sup = sup.max(d);
        sq += d * d;
        n += 1;
    }
    if sup.is_nan() || sq.is_nan() {
        return Err(Error::NonFinite {
            field: "measurement".into(),
            node: 0,
        });
    }
    Ok(DiscrepancyReport {
        sup,
        l2: if n == 0 { 0.0 } else { (sq / n as f64).sqrt() },
        samples: n,
    })
}

/// Multiplies every sample by `1 + level·N(0,1)`, reproducibly from `seed`.
pub fn add_noise(m: &MeasurementSet, level: f64, seed: u64) -> Result<MeasurementSet> {
    if !(level >= 0.0 && level.is_finite()) {
        return Err(Error::InvalidParams(format!("noise level {level} must be nonnegative")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = m.clone();
    for x in out.values_mut() {
        let z: f64 = StandardNormal.sample(&mut rng);
        *x *= 1.0 + level * z;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::MeasurementKind;

    fn set(shift: f64) -> MeasurementSet {
        MeasurementSet {
            kind: MeasurementKind::Cauchy,
            n_chem: 1,
            n_prey: 0,
            boundary_nodes: 3,
            times: vec![0.1, 0.2],
            traces: vec![vec![vec![1.0, 2.0, 3.0 + shift]], vec![vec![0.5, 0.1 * shift, 0.0]]],
            snapshot: Some(vec![vec![1.0, shift, -shift]]),
        }
    }

    #[test]
    fn identical_sets() {
        assert_eq!(discrepancy(&set(0.3), &set(0.3)).unwrap(), 0.0);
    }

    #[test]
    fn metric_properties() {
        let (a, b, c) = (set(0.0), set(0.7), set(-0.4));
        for f in [discrepancy, discrepancy_l2] {
            assert_eq!(f(&a, &b).unwrap(), f(&b, &a).unwrap());
            assert!(f(&a, &c).unwrap() <= f(&a, &b).unwrap() + f(&b, &c).unwrap() + 1e-15);
        }
    }

    #[test]
    fn layout_mismatch() {
        let mut b = set(0.0);
        b.times.push(0.3);
        b.traces.push(vec![vec![0.0; 3]]);
        assert!(matches!(discrepancy(&set(0.0), &b), Err(Error::LayoutMismatch(_))));
    }

    #[test]
    fn noise_is_seeded_and_relative() {
        let a = set(1.0);
        let x = add_noise(&a, 0.01, 7).unwrap();
        let y = add_noise(&a, 0.01, 7).unwrap();
        assert_eq!(x, y);
        assert_ne!(x, add_noise(&a, 0.01, 8).unwrap());
        for (p, q) in a.values().zip(x.values()) {
            assert!((q - p).abs() <= 0.06 * p.abs());
        }
        assert_eq!(add_noise(&a, 0.0, 1).unwrap(), a);
    }
}

//! Decides whether a residual vanishes at a corner apex from the decay of
//! its CGO-weighted corner integrals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{self, PowerFit};
use crate::probe::{corner_integral_of, ProbeSpec};

/// Relative spread of `|I|τⁿ` over the top half of the ladder below which
/// the apex value is taken as nonzero.
pub const PLATEAU_SPREAD: f64 = 0.2;

/// Default extra decay needed to call the apex value zero.
pub const DEFAULT_EXTRA_DECAY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApexClass {
    Nonzero,
    Zero,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApexResult {
    pub class: ApexClass,
    pub taus: Vec<f64>,
    pub magnitudes: Vec<f64>,
    /// `|I(τ)| τⁿ`.
    pub scaled: Vec<f64>,
    pub spread: f64,
    /// Fit of the scaled values; the extra decay is `−exponent`.
    pub fit: Option<PowerFit>,
    /// Mean of the scaled values over the top half of the ladder, an estimate
    /// of `|residual(x_c)| C_K`.
    pub plateau: f64,
}

/// Classifies `residual` at the apex of `spec.corner`.
pub fn apex_vanishing_test(
    spec: &ProbeSpec,
    residual: &(dyn Fn(&[f64]) -> f64 + Sync),
    min_extra_decay: f64,
) -> Result<ApexResult> {
    spec.validate()?;
    if spec.taus.len() < 4 {
        return Err(Error::Fit(format!(
            "apex test needs at least 4 ladder points, got {}",
            spec.taus.len()
        )));
    }
    if !(min_extra_decay > 0.0) {
        return Err(Error::InvalidParams("minimum extra decay must be positive".into()));
    }
    let n = spec.dim() as i32;
    let magnitudes: Vec<f64> = spec
        .taus
        .par_iter()
        .map(|&t| corner_integral_of(spec, t, &|x| residual(x)).map(|c| c.norm()))
        .collect::<Result<_>>()?;
    let scaled: Vec<f64> = spec.taus.iter().zip(&magnitudes).map(|(t, m)| m * t.powi(n)).collect();
    let top = &scaled[scaled.len() / 2..];
    let plateau = top.iter().sum::<f64>() / top.len() as f64;
    let hi = top.iter().copied().fold(f64::MIN, f64::max);
    let lo = top.iter().copied().fold(f64::MAX, f64::min);
    let spread = if plateau > 0.0 { (hi - lo) / plateau } else { 0.0 };
    let fit = fit::power_law(&spec.taus, &scaled).ok();
    let class = if magnitudes.iter().all(|m| *m == 0.0) {
        ApexClass::Zero
    } else if spread < PLATEAU_SPREAD {
        ApexClass::Nonzero
    } else if fit.is_some_and(|f| -f.exponent >= min_extra_decay) {
        ApexClass::Zero
    } else {
        ApexClass::Inconclusive
    };
    Ok(ApexResult {
        class,
        taus: spec.taus.clone(),
        magnitudes,
        scaled,
        spread,
        fit,
        plateau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TruncatedCorner;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn corners() -> Vec<ProbeSpec> {
        let ladder = vec![20.0, 40.0, 80.0, 160.0];
        let mut out: Vec<ProbeSpec> = [PI / 12.0, PI / 6.0, FRAC_PI_4]
            .iter()
            .map(|h| ProbeSpec::along_axis(TruncatedCorner::sector([0.3, 0.2], 0.4, *h, 0.6).unwrap(), ladder.clone()).unwrap())
            .collect();
        let octant = TruncatedCorner::from_edges(
            vec![0.0; 3],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            1.0,
        )
        .unwrap();
        out.push(ProbeSpec::along_axis(octant, ladder).unwrap());
        out
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn three_classes() {
        for s in corners() {
            let apex = s.corner.apex.clone();
            let c = apex_vanishing_test(&s, &|_| 1.0, DEFAULT_EXTRA_DECAY).unwrap();
            assert_eq!(c.class, ApexClass::Nonzero, "{c:?}");
            assert!(c.plateau > 0.0);
            let r = apex_vanishing_test(&s, &|x| dist(x, &apex), DEFAULT_EXTRA_DECAY).unwrap();
            assert_eq!(r.class, ApexClass::Zero, "{r:?}");
            let extra = -r.fit.unwrap().exponent;
            assert!((extra - 1.0).abs() < 0.1, "{extra}");
            let z = apex_vanishing_test(&s, &|_| 0.0, DEFAULT_EXTRA_DECAY).unwrap();
            assert_eq!(z.class, ApexClass::Zero);
            assert!(z.magnitudes.iter().all(|m| *m == 0.0));
        }
    }

    #[test]
    fn scale_invariant() {
        let s = &corners()[1];
        let apex = s.corner.apex.clone();
        for k in [1e-6, 3.0, 1e5] {
            let a = apex_vanishing_test(s, &|_| k, DEFAULT_EXTRA_DECAY).unwrap();
            let b = apex_vanishing_test(s, &|x| k * dist(x, &apex), DEFAULT_EXTRA_DECAY).unwrap();
            assert_eq!(a.class, ApexClass::Nonzero);
            assert_eq!(b.class, ApexClass::Zero);
        }
    }

    #[test]
    fn short_ladder_rejected() {
        let mut s = corners()[0].clone();
        s.taus.truncate(3);
        assert!(matches!(apex_vanishing_test(&s, &|_| 1.0, 0.5), Err(Error::Fit(_))));
    }
}

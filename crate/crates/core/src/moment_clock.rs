//! Single-moment time definition and its comparison with the KS clock.
//!
//! The moment clock assigns an interval the duration
//! `dtau(q) = (E|r|^q / E|r0|^q)^(2/q)` relative to a reference sample `r0`.
//! It is independent of `q` only under simple scaling and additive only when
//! the Hurst exponent is 1/2; [`nonadditivity_demo`] evaluates the
//! analytic gap for a simple-scaling law with arbitrary `H`.

use rayon::prelude::*;
use serde::Serialize;

use crate::clock::{calibrate_interval_seeded, SearchConfig};
use crate::ks::rescaled_ks;
use crate::stats::abs_moment;
use crate::{Error, ReturnSample, Result};

/// Orders compared by default.
pub const DEFAULT_ORDERS: [f64; 3] = [1.0, 2.0, 3.0];

/// `(E|y|^q / E|x|^q)^(2/q)`, or `None` when either moment vanishes.
pub(crate) fn moment_ratio(y: &[f64], x: &[f64], q: f64) -> Option<f64> {
    let my = abs_moment(y, q);
    let mx = abs_moment(x, q);
    if my > 0.0 && mx > 0.0 {
        Some((my / mx).powf(2.0 / q))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentClockResult {
    pub q: f64,
    pub delta_tau_q: f64,
    /// Rescaled KS distance of the collapse induced by `delta_tau_q`.
    pub d_under_moment_rescaling: f64,
}

pub fn moment_time(y: &ReturnSample, x_ref: &ReturnSample, q: f64) -> Result<MomentClockResult> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::Domain(format!("moment order must be positive, got {q}")));
    }
    let delta_tau_q = moment_ratio(y.values(), x_ref.values(), q).ok_or_else(|| {
        Error::Domain(format!("zero {q}-th absolute moment: degenerate sample"))
    })?;
    let d = rescaled_ks(x_ref, y, delta_tau_q)?.d;
    Ok(MomentClockResult {
        q,
        delta_tau_q,
        d_under_moment_rescaling: d,
    })
}

/// One row of the clock comparison table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClockComparison {
    pub label: String,
    pub n: usize,
    pub fst_delta_tau: f64,
    pub fst_d: f64,
    pub moment: Vec<MomentClockResult>,
}

impl ClockComparison {
    /// KS-minimized D is no larger than any moment-clock D.
    pub fn fst_is_optimal(&self) -> bool {
        self.moment.iter().all(|m| self.fst_d <= m.d_under_moment_rescaling)
    }
}

/// FST versus moment clocks for every class.
///
/// The KS search is seeded with each moment-clock duration, so the FST
/// distance cannot exceed a moment-clock distance unless that duration lies
/// outside the search range.
pub fn compare_clocks(
    classes: &[(String, ReturnSample)],
    x_ref: &ReturnSample,
    orders: &[f64],
    cfg: &SearchConfig,
) -> Result<Vec<ClockComparison>> {
    classes
        .par_iter()
        .map(|(label, y)| {
            let moment = orders
                .iter()
                .map(|&q| moment_time(y, x_ref, q))
                .collect::<Result<Vec<_>>>()?;
            let seeds: Vec<f64> = moment.iter().map(|m| m.delta_tau_q).collect();
            let fit = calibrate_interval_seeded(y, x_ref, cfg, &seeds)?;
            Ok(ClockComparison {
                label: label.clone(),
                n: y.n(),
                fst_delta_tau: fit.delta_tau,
                fst_d: fit.ks.d,
                moment,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonAdditivity {
    pub delta_tau_1: f64,
    pub delta_tau_2: f64,
    pub delta_tau_union: f64,
    /// `delta_tau_union - (delta_tau_1 + delta_tau_2)`.
    pub gap: f64,
}

/// Moment-clock durations `(dt / dt0)^(2H)` of two contiguous intervals and
/// of their union, for a simple-scaling law with exponent `hurst`.
pub fn nonadditivity_demo(hurst: f64, dt1: f64, dt2: f64, dt0: f64) -> Result<NonAdditivity> {
    if !(hurst > 0.0 && hurst < 1.0) {
        return Err(Error::Domain(format!("Hurst exponent must lie in (0, 1), got {hurst}")));
    }
    if !(dt1 > 0.0 && dt2 > 0.0 && dt0 > 0.0) {
        return Err(Error::Domain("durations must be positive".into()));
    }
    let clock = |dt: f64| {
        if hurst == 0.5 {
            dt / dt0
        } else {
            (dt / dt0).powf(2.0 * hurst)
        }
    };
    let delta_tau_1 = clock(dt1);
    let delta_tau_2 = clock(dt2);
    let delta_tau_union = clock(dt1 + dt2);
    let gap = if hurst == 0.5 {
        // Linear in dt, so the union is the sum by definition.
        0.0
    } else {
        delta_tau_union - (delta_tau_1 + delta_tau_2)
    };
    Ok(NonAdditivity {
        delta_tau_1,
        delta_tau_2,
        delta_tau_union,
        gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> ReturnSample {
        ReturnSample::from_values(v.to_vec()).unwrap()
    }

    #[test]
    fn identity_and_homogeneity() {
        let x = sample(&[-0.3, 0.2, 0.5, -0.1, 0.05]);
        for q in [0.5, 1.0, 2.0, 3.0] {
            let r = moment_time(&x, &x, q).unwrap();
            assert!((r.delta_tau_q - 1.0).abs() < 1e-14);
            assert_eq!(r.d_under_moment_rescaling, 0.0);
            let s = moment_time(&x.scaled(2.0), &x, q).unwrap();
            assert!((s.delta_tau_q - 4.0).abs() < 1e-13, "q={q}: {}", s.delta_tau_q);
        }
    }

    #[test]
    fn degenerate_sample_is_domain_error() {
        let x = sample(&[1.0, -1.0]);
        let z = sample(&[0.0, 0.0]);
        assert!(matches!(moment_time(&z, &x, 2.0), Err(Error::Domain(_))));
        assert!(matches!(moment_time(&x, &x, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn nonadditivity_values() {
        let half = nonadditivity_demo(0.5, 0.3, 0.7, 1.0).unwrap();
        assert_eq!(half.gap, 0.0);
        let h7 = nonadditivity_demo(0.7, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(h7.delta_tau_1, 1.0);
        assert!((h7.delta_tau_union - 2f64.powf(1.4)).abs() < 1e-12);
        assert!((h7.gap - 0.639).abs() < 1e-3);
        let h3 = nonadditivity_demo(0.3, 1.0, 1.0, 1.0).unwrap();
        assert!((h3.delta_tau_union - 1.516).abs() < 1e-3);
        assert!((h3.gap + 0.484).abs() < 1e-3);
        assert!(nonadditivity_demo(1.0, 1.0, 1.0, 1.0).is_err());
        assert!(nonadditivity_demo(0.5, 0.0, 1.0, 1.0).is_err());
    }
}

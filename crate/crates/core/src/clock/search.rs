//! One-dimensional minimization of `D(delta_tau)`.
//!
//! `D` is a step function of the scale factor: it only changes when a
//! rescaled `y` value crosses a reference value. The search therefore scans
//! a log-spaced grid first and only then refines locally by golden-section
//! search in `ln(delta_tau)`, keeping the best point ever evaluated.
//!
//! The grid is log-spaced with the step implied by `coarse_grid_points`
//! over `[delta_tau_min, delta_tau_max]`, but its phase is anchored at the
//! second-moment estimate `E[y^2] / E[x^2]`. Anchoring makes the search
//! exactly scale-equivariant: multiplying `y` by `c` moves every evaluated
//! point by `c^2`. The single-moment estimates for q = 1, 2, 3 are also
//! evaluated as candidates, so the KS minimum is never worse than any of
//! those moment clocks inside the range.

use serde::{Deserialize, Serialize};

use crate::ks::{KsResult, ScaledKs};
use crate::moment_clock::moment_ratio;
use crate::{Error, ReturnSample, Result};

/// Orders whose moment clocks seed every search.
pub const SEED_ORDERS: [f64; 3] = [1.0, 2.0, 3.0];

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub delta_tau_min: f64,
    pub delta_tau_max: f64,
    pub coarse_grid_points: usize,
    pub refine_rel_tol: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            delta_tau_min: 1e-4,
            delta_tau_max: 1e2,
            coarse_grid_points: 200,
            refine_rel_tol: 1e-3,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta_tau_min > 0.0 && self.delta_tau_min < self.delta_tau_max && self.delta_tau_max.is_finite()) {
            return Err(Error::Config(format!(
                "search range [{}, {}] must satisfy 0 < min < max",
                self.delta_tau_min, self.delta_tau_max
            )));
        }
        if self.coarse_grid_points < 50 {
            return Err(Error::Config("coarse grid needs at least 50 points".into()));
        }
        if !(self.refine_rel_tol > 0.0) {
            return Err(Error::Config("refine_rel_tol must be positive".into()));
        }
        Ok(())
    }

    fn log_step(&self) -> f64 {
        (self.delta_tau_max / self.delta_tau_min).ln() / (self.coarse_grid_points - 1) as f64
    }
}

/// Outcome of [`calibrate_interval`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntervalFit {
    pub delta_tau: f64,
    pub ks: KsResult,
    /// Minimum found at the edge of the search range.
    pub boundary_hit: bool,
    pub evaluations: usize,
}

struct Tracker<'a> {
    objective: &'a ScaledKs,
    best: Option<(f64, KsResult)>,
    evaluations: usize,
}

impl<'a> Tracker<'a> {
    fn eval(&mut self, delta_tau: f64) -> f64 {
        let ks = self.objective.eval(delta_tau);
        self.evaluations += 1;
        let better = match self.best {
            None => true,
            Some((s, b)) => ks.d < b.d || (ks.d == b.d && delta_tau < s),
        };
        if better {
            self.best = Some((delta_tau, ks));
        }
        ks.d
    }
}

/// Finds the `delta_tau` minimizing `rescaled_ks(x_ref, y, delta_tau).d`.
pub fn calibrate_interval(y: &ReturnSample, x_ref: &ReturnSample, cfg: &SearchConfig) -> Result<IntervalFit> {
    calibrate_interval_seeded(y, x_ref, cfg, &[])
}

/// [`calibrate_interval`] with extra candidate points. Candidates outside
/// the search range are ignored.
pub fn calibrate_interval_seeded(
    y: &ReturnSample,
    x_ref: &ReturnSample,
    cfg: &SearchConfig,
    extra_candidates: &[f64],
) -> Result<IntervalFit> {
    cfg.validate()?;
    if x_ref.values().iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("reference sample is degenerate (all zero)".into()));
    }
    let objective = ScaledKs::new(x_ref, y);
    let mut tracker = Tracker {
        objective: &objective,
        best: None,
        evaluations: 0,
    };

    let in_range = |s: f64| s.is_finite() && s >= cfg.delta_tau_min && s <= cfg.delta_tau_max;
    let anchor = moment_ratio(y.values(), x_ref.values(), 2.0)
        .filter(|s| s.is_finite() && *s > 0.0)
        .unwrap_or(cfg.delta_tau_min);
    let h = cfg.log_step();
    let k_lo = ((cfg.delta_tau_min / anchor).ln() / h).ceil() as i64;
    let k_hi = ((cfg.delta_tau_max / anchor).ln() / h).floor() as i64;
    let grid: Vec<f64> = (k_lo..=k_hi)
        .map(|k| anchor * (k as f64 * h).exp())
        .filter(|&s| in_range(s))
        .collect();
    if grid.len() < 2 {
        return Err(Error::Config("search grid is empty".into()));
    }
    for &s in &grid {
        tracker.eval(s);
    }
    let mut seeds: Vec<f64> = SEED_ORDERS
        .iter()
        .filter_map(|&q| moment_ratio(y.values(), x_ref.values(), q))
        .chain(extra_candidates.iter().copied())
        .filter(|&s| in_range(s))
        .collect();
    seeds.sort_by(f64::total_cmp);
    for s in seeds {
        tracker.eval(s);
    }

    // Bracket the best point by its grid neighbours and refine.
    let (s_best, _) = tracker.best.unwrap();
    let lo_idx = grid.partition_point(|&g| g < s_best);
    let lo = if lo_idx == 0 { grid[0] } else { grid[lo_idx - 1] };
    let hi_idx = grid.partition_point(|&g| g <= s_best);
    let hi = grid.get(hi_idx).copied().unwrap_or(*grid.last().unwrap());
    golden_section(&mut tracker, lo.ln(), hi.ln(), cfg.refine_rel_tol);

    let (delta_tau, ks) = tracker.best.unwrap();
    let first = grid[0];
    let last = *grid.last().unwrap();
    let boundary_hit = delta_tau <= first * (1.0 + cfg.refine_rel_tol) || delta_tau >= last / (1.0 + cfg.refine_rel_tol);
    Ok(IntervalFit {
        delta_tau,
        ks,
        boundary_hit,
        evaluations: tracker.evaluations,
    })
}

fn golden_section(tracker: &mut Tracker<'_>, mut a: f64, mut b: f64, rel_tol: f64) {
    let width_ok = |a: f64, b: f64| (b - a).exp() - 1.0 <= rel_tol;
    if width_ok(a, b) {
        return;
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = tracker.eval(c.exp());
    let mut fd = tracker.eval(d.exp());
    while !width_ok(a, b) {
        // Ties move left, toward the smaller delta_tau.
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = tracker.eval(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = tracker.eval(d.exp());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn gaussian(n: usize, seed: u64) -> ReturnSample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        ReturnSample::from_values((0..n).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn identity_returns_unit_duration() {
        let x = gaussian(2000, 1);
        let fit = calibrate_interval(&x, &x, &SearchConfig::default()).unwrap();
        assert_eq!(fit.delta_tau, 1.0);
        assert_eq!(fit.ks.d, 0.0);
        assert!(!fit.boundary_hit);
    }

    #[test]
    fn half_scale_copy() {
        let x = gaussian(2000, 2);
        let fit = calibrate_interval(&x.scaled(0.5), &x, &SearchConfig::default()).unwrap();
        assert!((fit.delta_tau / 0.25 - 1.0).abs() <= 1e-3);
        assert_eq!(fit.ks.d, 0.0);
    }

    #[test]
    fn independent_sample_scale_is_recovered() {
        let x = gaussian(4000, 3);
        let y = gaussian(4000, 4).scaled(0.3);
        let fit = calibrate_interval(&y, &x, &SearchConfig::default()).unwrap();
        assert!((fit.delta_tau / 0.09 - 1.0).abs() < 0.1, "{}", fit.delta_tau);
    }

    #[test]
    fn boundary_hit_is_flagged() {
        let x = gaussian(500, 5);
        let y = x.scaled(1e-4);
        let fit = calibrate_interval(&y, &x, &SearchConfig::default()).unwrap();
        assert!(fit.boundary_hit);
        assert!(fit.delta_tau < 2e-4);
    }

    #[test]
    fn invalid_config_rejected() {
        let x = gaussian(10, 6);
        let bad = SearchConfig {
            coarse_grid_points: 10,
            ..SearchConfig::default()
        };
        assert!(calibrate_interval(&x, &x, &bad).is_err());
        let bad = SearchConfig {
            delta_tau_min: 2.0,
            delta_tau_max: 1.0,
            ..SearchConfig::default()
        };
        assert!(calibrate_interval(&x, &x, &bad).is_err());
    }

    #[test]
    fn degenerate_reference_rejected() {
        let z = ReturnSample::from_values(vec![0.0; 10]).unwrap();
        let y = gaussian(10, 7);
        assert!(matches!(calibrate_interval(&y, &z, &SearchConfig::default()), Err(Error::Domain(_))));
    }
}

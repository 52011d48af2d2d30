use std::f64::consts::LN_2;

use chrono::{Datelike, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;

use super::{ActivityProfile, GeneratorConfig, GeneratorMode, GroundTruth, Innovation};
use crate::{DayGrid, Error, IntervalClass, PriceSeries, Result, ReturnSample, TradingDay};

const START_PRICE: f64 = 100.0;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Unit-variance innovation source.
enum Draw {
    Gaussian,
    StudentT { dist: StudentT<f64>, scale: f64 },
}

impl Draw {
    fn new(kind: Innovation) -> Result<Self> {
        Ok(match kind {
            Innovation::Gaussian => Draw::Gaussian,
            Innovation::StudentT { nu } => Draw::StudentT {
                dist: StudentT::new(nu).map_err(|e| Error::Config(format!("Student-t: {e}")))?,
                scale: ((nu - 2.0) / nu).sqrt(),
            },
        })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Draw::Gaussian => StandardNormal.sample(rng),
            Draw::StudentT { dist, scale } => scale * dist.sample(rng),
        }
    }
}

/// `n` consecutive weekdays from `start` (moved forward past a weekend).
fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    start
        .iter_days()
        .filter(|d| !matches!(d.weekday(), Weekday::Sat | Weekday::Sun))
        .take(n)
        .collect()
}

struct DayDraws {
    bars: Vec<f64>,
    overnight: f64,
}

/// Bar increments with variances `bar_var`, followed by the closure after
/// the day.
fn simulate_day(rng: &mut ChaCha8Rng, bar_var: &[f64], overnight_var: f64, draw: &Draw, cfg: &GeneratorConfig) -> DayDraws {
    let phi = cfg.ar_coefficient;
    let innov_scale = (1.0 - phi * phi).sqrt();
    let mut u = 0.0;
    let bars = bar_var
        .iter()
        .enumerate()
        .map(|(n, v)| {
            let xi = draw.sample(rng);
            u = if n == 0 { xi } else { phi * u + innov_scale * xi };
            cfg.drift_per_bar + v.sqrt() * u
        })
        .collect();
    let overnight = overnight_var.sqrt() * draw.sample(rng);
    DayDraws { bars, overnight }
}

fn assemble(grid: &DayGrid, dates: Vec<NaiveDate>, draws: Vec<DayDraws>) -> Result<PriceSeries> {
    let mut level = START_PRICE.ln();
    let days = dates
        .into_iter()
        .zip(draws)
        .map(|(date, d)| {
            let mut log_prices = Vec::with_capacity(grid.n_points());
            log_prices.push(level);
            for inc in &d.bars {
                level += inc;
                log_prices.push(level);
            }
            level += d.overnight;
            TradingDay { date, log_prices }
        })
        .collect();
    PriceSeries::new(*grid, days)
}

/// Seasonal Brownian motion: independent bar increments with variance
/// `profile.intraday()[n]` (correlated within the day when the AR
/// coefficient is nonzero) and a closure increment with variance
/// `profile.overnight_mass()`.
pub fn generate_seasonal(profile: &ActivityProfile, cfg: &GeneratorConfig, grid: &DayGrid) -> Result<(PriceSeries, GroundTruth)> {
    cfg.validate()?;
    if cfg.mode != GeneratorMode::Seasonal {
        return Err(Error::Config("generate_seasonal needs the seasonal mode".into()));
    }
    profile.check_grid(grid)?;
    let draw = Draw::new(cfg.innovation)?;
    let draws = (0..cfg.n_days)
        .into_par_iter()
        .map(|l| {
            let mut rng = rng_for(cfg.seed, l as u64);
            simulate_day(&mut rng, profile.intraday(), profile.overnight_mass(), &draw, cfg)
        })
        .collect();
    let series = assemble(grid, business_days(cfg.start_date, cfg.n_days), draws)?;
    Ok((series, GroundTruth::from_profile(profile)))
}

/// Cell weights of a log-normal dyadic cascade with unit mean.
///
/// Each level splits every cell in two and multiplies by
/// `exp(s xi - s^2 / 2)` with `s^2 = 4 lambda2 ln 2`, which yields the
/// structure-function exponents `zeta(q) = q/2 - lambda2 q (q - 2) / 2`.
fn cascade(rng: &mut ChaCha8Rng, depth: u32, lambda2: f64) -> Vec<f64> {
    let s2 = 4.0 * lambda2 * LN_2;
    let s = s2.sqrt();
    let mut w = vec![1.0f64];
    for _ in 0..depth {
        w = w.iter().flat_map(|&x| [x, x]).collect();
        for v in &mut w {
            let xi: f64 = StandardNormal.sample(rng);
            *v *= (s * xi - s2 / 2.0).exp();
        }
    }
    w
}

/// Mean cascade density over each of `n_bars` equal spans of the day.
fn bar_factors(w: &[f64], n_bars: usize) -> Vec<f64> {
    let cells = w.len();
    let mut cum = Vec::with_capacity(cells + 1);
    cum.push(0.0);
    for v in w {
        cum.push(cum.last().unwrap() + v);
    }
    let integral = |edge: f64| {
        let i = (edge.floor() as usize).min(cells - 1);
        cum[i] + (edge - i as f64) * w[i]
    };
    let scale = n_bars as f64 / cells as f64;
    (0..n_bars)
        .map(|n| {
            let e0 = n as f64 * cells as f64 / n_bars as f64;
            let e1 = (n + 1) as f64 * cells as f64 / n_bars as f64;
            (integral(e1) - integral(e0)) * scale
        })
        .collect()
}

/// Seasonal profile modulated by an independent intraday cascade per day.
/// The ground truth is the expected clock, i.e. the profile itself.
pub fn generate_multifractal(profile: &ActivityProfile, cfg: &GeneratorConfig, grid: &DayGrid) -> Result<(PriceSeries, GroundTruth)> {
    cfg.validate()?;
    let GeneratorMode::Multifractal { depth, lambda2 } = cfg.mode else {
        return Err(Error::Config("generate_multifractal needs the multifractal mode".into()));
    };
    profile.check_grid(grid)?;
    let draw = Draw::new(cfg.innovation)?;
    let draws = (0..cfg.n_days)
        .into_par_iter()
        .map(|l| {
            let mut rng = rng_for(cfg.seed, l as u64);
            let factors = bar_factors(&cascade(&mut rng, depth, lambda2), profile.intraday().len());
            let var: Vec<f64> = profile.intraday().iter().zip(&factors).map(|(a, f)| a * f).collect();
            simulate_day(&mut rng, &var, profile.overnight_mass(), &draw, cfg)
        })
        .collect();
    let series = assemble(grid, business_days(cfg.start_date, cfg.n_days), draws)?;
    Ok((series, GroundTruth::from_profile(profile)))
}

/// Series generator selected by `cfg.mode`.
pub fn generate(profile: &ActivityProfile, cfg: &GeneratorConfig, grid: &DayGrid) -> Result<(PriceSeries, GroundTruth)> {
    match cfg.mode {
        GeneratorMode::Seasonal => generate_seasonal(profile, cfg, grid),
        GeneratorMode::Multifractal { .. } => generate_multifractal(profile, cfg, grid),
        GeneratorMode::SelfSimilar { .. } => Err(Error::Config(
            "the self-similar mode produces marginal samples, not a price series".into(),
        )),
    }
}

/// `n_days` returns `dt^H * xi` for every duration `dt`.
///
/// Samples of different durations are independent: this is an oracle for
/// the marginal laws, not a consistent path.
pub fn generate_selfsimilar(cfg: &GeneratorConfig, durations: &[f64]) -> Result<Vec<(f64, ReturnSample)>> {
    cfg.validate()?;
    let GeneratorMode::SelfSimilar { hurst } = cfg.mode else {
        return Err(Error::Config("generate_selfsimilar needs the self-similar mode".into()));
    };
    if durations.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(Error::Config("durations must be positive".into()));
    }
    let draw = Draw::new(cfg.innovation)?;
    durations
        .par_iter()
        .enumerate()
        .map(|(i, &dt)| {
            let mut rng = rng_for(cfg.seed, i as u64);
            let scale = dt.powf(hurst);
            let values = (0..cfg.n_days).map(|_| scale * draw.sample(&mut rng)).collect();
            let class = IntervalClass::intraday(0, 1).with_label(format!("dt={dt}"));
            Ok((dt, ReturnSample::new(values, class)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{abs_moment, mean};

    fn small_grid() -> DayGrid {
        DayGrid::new(chrono::NaiveTime::from_hms_opt(9, 40, 0).unwrap(), 60, 41).unwrap()
    }

    #[test]
    fn weekdays_only() {
        let d = business_days(NaiveDate::from_ymd_opt(2000, 1, 1).unwrap(), 6);
        assert_eq!(d[0], NaiveDate::from_ymd_opt(2000, 1, 3).unwrap());
        assert_eq!(d[5], NaiveDate::from_ymd_opt(2000, 1, 10).unwrap());
    }

    #[test]
    fn seeded_and_thread_independent() {
        let g = small_grid();
        let profile = ActivityProfile::u_shape(&g, 20.0).unwrap();
        let cfg = GeneratorConfig { n_days: 50, ..Default::default() };
        let (a, _) = generate_seasonal(&profile, &cfg, &g).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let (b, _) = pool.install(|| generate_seasonal(&profile, &cfg, &g)).unwrap();
        assert_eq!(a, b);
        let (c, _) = generate_seasonal(&profile, &GeneratorConfig { seed: 8, ..cfg }, &g).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bar_variance_follows_profile() {
        let g = small_grid();
        let profile = ActivityProfile::u_shape(&g, 20.0).unwrap();
        let cfg = GeneratorConfig { n_days: 4000, ..Default::default() };
        let (s, _) = generate_seasonal(&profile, &cfg, &g).unwrap();
        for n in [0, 20, 39] {
            let inc: Vec<f64> = s.days().iter().map(|d| d.log_prices[n + 1] - d.log_prices[n]).collect();
            let ratio = abs_moment(&inc, 2.0) / profile.intraday()[n];
            // Relative standard error of a Gaussian variance estimate: sqrt(2/n).
            assert!((ratio - 1.0).abs() < 4.0 * (2.0f64 / 4000.0).sqrt(), "bar {n}: {ratio}");
        }
    }

    #[test]
    fn student_t_has_unit_variance() {
        let cfg = GeneratorConfig {
            n_days: 200_000,
            innovation: Innovation::StudentT { nu: 6.0 },
            mode: GeneratorMode::SelfSimilar { hurst: 0.5 },
            ..Default::default()
        };
        let s = generate_selfsimilar(&cfg, &[1.0]).unwrap();
        let v = abs_moment(s[0].1.values(), 2.0);
        assert!((v - 1.0).abs() < 0.02, "{v}");
        assert!(mean(s[0].1.values()).abs() < 0.01);
    }

    #[test]
    fn degenerate_cascade_is_flat() {
        let mut rng = rng_for(1, 0);
        let w = cascade(&mut rng, 8, 0.0);
        assert_eq!(w.len(), 256);
        assert!(w.iter().all(|&v| v == 1.0));
        assert!(bar_factors(&w, 380).iter().all(|f| (f - 1.0).abs() < 1e-12));
    }

    #[test]
    fn cascade_has_unit_mean_density() {
        let total: f64 = (0..200)
            .map(|l| {
                let mut rng = rng_for(3, l);
                bar_factors(&cascade(&mut rng, 8, 0.05), 380).iter().sum::<f64>() / 380.0
            })
            .sum::<f64>()
            / 200.0;
        assert!((total - 1.0).abs() < 0.05, "{total}");
    }

    #[test]
    fn mode_mismatch_rejected() {
        let g = small_grid();
        let p = ActivityProfile::flat(&g);
        let mf = GeneratorConfig { mode: GeneratorMode::Multifractal { depth: 4, lambda2: 0.05 }, ..Default::default() };
        assert!(generate_seasonal(&p, &mf, &g).is_err());
        assert!(generate_selfsimilar(&mf, &[1.0]).is_err());
        assert!(generate(&p, &GeneratorConfig { mode: GeneratorMode::SelfSimilar { hurst: 0.5 }, ..Default::default() }, &g).is_err());
        let wrong_grid = ActivityProfile::flat(&DayGrid::sp500_minute());
        assert!(generate_seasonal(&wrong_grid, &GeneratorConfig::default(), &g).is_err());
    }
}

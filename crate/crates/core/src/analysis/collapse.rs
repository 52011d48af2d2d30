//! Rescaled densities for overlaying distributions of different spans.

use std::io::Write;

use serde::Serialize;

use crate::ks::sort_f64;
use crate::{Error, Result, ReturnSample};

pub const DEFAULT_COLLAPSE_BINS: usize = 101;
/// Half-width of the histogram range in robust standard deviations.
const RANGE_SIGMAS: f64 = 6.0;
/// MAD to standard deviation for a Gaussian.
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseSet {
    pub duration: f64,
    /// `r / duration^H`; authoritative.
    pub rescaled: Vec<f64>,
    /// Histogram density of the rescaled values, equal to `duration^H p(r)`.
    pub density: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollapseExport {
    pub hurst: f64,
    pub bin_centers: Vec<f64>,
    pub bin_width: f64,
    pub sets: Vec<CollapseSet>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Rescales each sample by `duration^H` and bins all of them on one shared
/// grid spanning +-6 robust standard deviations of the pooled values.
pub fn pdf_collapse_export(samples: &[(f64, ReturnSample)], hurst: f64, bins: usize) -> Result<CollapseExport> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if bins == 0 || !hurst.is_finite() {
        return Err(Error::Config("collapse needs at least one bin and a finite exponent".into()));
    }
    if samples.iter().any(|(d, _)| !(*d > 0.0)) {
        return Err(Error::Domain("durations must be positive".into()));
    }
    let rescaled: Vec<Vec<f64>> = samples
        .iter()
        .map(|(d, s)| {
            let f = d.powf(hurst);
            s.values().iter().map(|v| v / f).collect()
        })
        .collect();
    let mut pooled: Vec<f64> = rescaled.concat();
    sort_f64(&mut pooled);
    let center = median(&pooled);
    let mut dev: Vec<f64> = pooled.iter().map(|v| (v - center).abs()).collect();
    sort_f64(&mut dev);
    let mut sigma = MAD_SCALE * median(&dev);
    if !(sigma > 0.0) {
        sigma = (pooled.iter().map(|v| (v - center).powi(2)).sum::<f64>() / pooled.len() as f64).sqrt();
    }
    if !(sigma > 0.0) {
        sigma = 1.0;
    }
    let lo = center - RANGE_SIGMAS * sigma;
    let width = 2.0 * RANGE_SIGMAS * sigma / bins as f64;
    let bin_centers = (0..bins).map(|k| lo + (k as f64 + 0.5) * width).collect();
    let sets = samples
        .iter()
        .zip(rescaled)
        .map(|((d, _), values)| {
            let mut counts = vec![0usize; bins];
            for v in &values {
                let k = ((v - lo) / width).floor();
                if k >= 0.0 && (k as usize) < bins {
                    counts[k as usize] += 1;
                }
            }
            let norm = values.len() as f64 * width;
            CollapseSet {
                duration: *d,
                density: counts.iter().map(|&c| c as f64 / norm).collect(),
                rescaled: values,
            }
        })
        .collect();
    Ok(CollapseExport {
        hurst,
        bin_centers,
        bin_width: width,
        sets,
    })
}

impl CollapseExport {
    /// Histogram CSV with header `x_rescaled,density,duration`.
    pub fn write_density_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x_rescaled,density,duration")?;
        for set in &self.sets {
            for (x, p) in self.bin_centers.iter().zip(&set.density) {
                writeln!(out, "{x},{p},{}", set.duration)?;
            }
        }
        Ok(())
    }

    /// Raw rescaled values with header `duration,x_rescaled`.
    pub fn write_values_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "duration,x_rescaled")?;
        for set in &self.sets {
            for x in &set.rescaled {
                writeln!(out, "{},{x}", set.duration)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_unit_duration() {
        let s = ReturnSample::from_values(vec![-0.5, 0.1, 0.2, 0.3, 1.0]).unwrap();
        let e = pdf_collapse_export(&[(1.0, s.clone())], 0.5, 11).unwrap();
        assert_eq!(e.sets[0].rescaled, s.values());
        let mass: f64 = e.sets[0].density.iter().sum::<f64>() * e.bin_width;
        assert!((mass - 1.0).abs() < 1e-12);
        let z = pdf_collapse_export(&[(1.0, s.clone())], 0.0, 11).unwrap();
        assert_eq!(z.sets[0].rescaled, s.values());
    }

    #[test]
    fn exact_collapse_of_scaled_copy() {
        let x = ReturnSample::from_values(vec![-0.3, -0.1, 0.05, 0.2, 0.4]).unwrap();
        let e = pdf_collapse_export(&[(1.0, x.clone()), (4.0, x.scaled(2.0))], 0.5, 21).unwrap();
        assert_eq!(e.sets[0].rescaled, e.sets[1].rescaled);
        assert_eq!(e.sets[0].density, e.sets[1].density);
    }
}

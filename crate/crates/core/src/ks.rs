//! Empirical CDFs and the rescaled two-sample Kolmogorov–Smirnov statistic
//!
//! `D = sqrt(n_x n_y / (n_x + n_y)) * sup_z |F_x(z) - F_y(z)|`.
//!
//! D is used as a distance to be minimized, never as a test: no p-values
//! are produced because the samples are drawn from one dependent series.

use serde::Serialize;

use crate::{Error, ReturnSample, Result};

/// Right-continuous step CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Data("NaN in sample".into()));
        }
        let mut sorted = values.to_vec();
        sort_f64(&mut sorted);
        Ok(Self { sorted })
    }

    pub fn from_sample(sample: &ReturnSample) -> Self {
        let mut sorted = sample.values().to_vec();
        sort_f64(&mut sorted);
        Self { sorted }
    }

    /// `F(z) = #{v <= z} / n`.
    pub fn eval(&self, z: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= z) as f64 / self.sorted.len() as f64
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }
}

pub(crate) fn sort_f64(v: &mut [f64]) {
    v.sort_unstable_by(|a, b| a.total_cmp(b));
}

/// Which supremum enters the statistic.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SupKind {
    /// `sup |F_x - F_y|`, the two-sided distance.
    #[default]
    Absolute,
    /// `sup (F_x - F_y)`, the one-sided form.
    Signed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsResult {
    /// Rescaled statistic.
    pub d: f64,
    /// Smallest point of the merged support where the supremum is attained.
    pub sup_location: f64,
    pub raw_sup: f64,
    pub n_x: usize,
    pub n_y: usize,
}

pub(crate) fn rescale_factor(n_x: usize, n_y: usize) -> f64 {
    let (nx, ny) = (n_x as f64, n_y as f64);
    (nx * ny / (nx + ny)).sqrt()
}

/// Merge-walk over two ascending samples, with `y` divided by `y_divisor`.
///
/// At each distinct support point both pointers are advanced past every
/// value `<= z`, so the difference is evaluated at the right limit of each
/// jump. The left limit at a jump equals the right limit at the previous
/// support point, so both one-sided limits are covered.
pub(crate) fn ks_sorted(x: &[f64], y: &[f64], y_divisor: f64, kind: SupKind) -> KsResult {
    let (nx, ny) = (x.len(), y.len());
    let (fnx, fny) = (nx as f64, ny as f64);
    let yv = |j: usize| y[j] / y_divisor;
    let (mut i, mut j) = (0usize, 0usize);
    // The signed difference vanishes as z -> -inf, which is itself a
    // candidate for the supremum.
    let mut best = match kind {
        SupKind::Absolute => f64::NEG_INFINITY,
        SupKind::Signed => 0.0,
    };
    let mut location = f64::NEG_INFINITY;
    while i < nx || j < ny {
        let z = match (i < nx, j < ny) {
            (true, true) => x[i].min(yv(j)),
            (true, false) => x[i],
            _ => yv(j),
        };
        while i < nx && x[i] <= z {
            i += 1;
        }
        while j < ny && yv(j) <= z {
            j += 1;
        }
        let diff = i as f64 / fnx - j as f64 / fny;
        let value = match kind {
            SupKind::Absolute => diff.abs(),
            SupKind::Signed => diff,
        };
        if value > best {
            best = value;
            location = z;
        }
    }
    KsResult {
        d: rescale_factor(nx, ny) * best,
        sup_location: location,
        raw_sup: best,
        n_x: nx,
        n_y: ny,
    }
}

/// Two-sided rescaled KS distance between two samples.
pub fn ks_distance(x: &ReturnSample, y: &ReturnSample) -> KsResult {
    ks_distance_with(x, y, SupKind::Absolute)
}

pub fn ks_distance_with(x: &ReturnSample, y: &ReturnSample, kind: SupKind) -> KsResult {
    let fx = EmpiricalCdf::from_sample(x);
    let fy = EmpiricalCdf::from_sample(y);
    ks_sorted(fx.sorted_values(), fy.sorted_values(), 1.0, kind)
}

/// KS distance on raw slices.
pub fn ks_distance_values(x: &[f64], y: &[f64]) -> Result<KsResult> {
    let fx = EmpiricalCdf::new(x)?;
    let fy = EmpiricalCdf::new(y)?;
    Ok(ks_sorted(fx.sorted_values(), fy.sorted_values(), 1.0, SupKind::Absolute))
}

/// `ks_distance(x_ref, y / sqrt(delta_tau))`. The reference is never rescaled.
pub fn rescaled_ks(x_ref: &ReturnSample, y: &ReturnSample, delta_tau: f64) -> Result<KsResult> {
    check_delta_tau(delta_tau)?;
    let fx = EmpiricalCdf::from_sample(x_ref);
    let fy = EmpiricalCdf::from_sample(y);
    Ok(ks_sorted(fx.sorted_values(), fy.sorted_values(), delta_tau.sqrt(), SupKind::Absolute))
}

pub(crate) fn check_delta_tau(delta_tau: f64) -> Result<()> {
    if !(delta_tau > 0.0) || !delta_tau.is_finite() {
        return Err(Error::Domain(format!("delta_tau must be positive and finite, got {delta_tau}")));
    }
    Ok(())
}

/// Pre-sorted pair for repeated evaluation of `D(delta_tau)`.
#[derive(Debug, Clone)]
pub struct ScaledKs {
    x: Vec<f64>,
    y: Vec<f64>,
}

impl ScaledKs {
    pub fn new(x_ref: &ReturnSample, y: &ReturnSample) -> Self {
        Self {
            x: EmpiricalCdf::from_sample(x_ref).sorted,
            y: EmpiricalCdf::from_sample(y).sorted,
        }
    }

    pub fn eval(&self, delta_tau: f64) -> KsResult {
        ks_sorted(&self.x, &self.y, delta_tau.sqrt(), SupKind::Absolute)
    }

    pub fn reference(&self) -> &[f64] {
        &self.x
    }

    pub fn sample(&self) -> &[f64] {
        &self.y
    }
}

//! Small numeric helpers shared across modules.

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Mean of |v|^q.
pub(crate) fn abs_moment(values: &[f64], q: f64) -> f64 {
    let sum: f64 = if q == 1.0 {
        values.iter().map(|v| v.abs()).sum()
    } else if q == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else if q.fract() == 0.0 && q <= 16.0 {
        let k = q as i32;
        values.iter().map(|v| v.abs().powi(k)).sum()
    } else {
        values.iter().map(|v| v.abs().powf(q)).sum()
    };
    sum / values.len() as f64
}

/// Ordinary least squares fit of `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
}

pub(crate) fn ols(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();
    Some(LineFit {
        slope,
        intercept,
        rms_residual: (ss / n as f64).sqrt(),
    })
}

/// Pearson correlation of two equally long slices, clamped to [-1, 1].
///
/// Identical inputs give exactly 1: the normalization is `sqrt(var_a * var_b)`
/// and `sqrt(v * v) == v` holds in IEEE arithmetic.
pub(crate) fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len();
    if n < 2 || n != b.len() {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    let den = (va * vb).sqrt();
    if den == 0.0 || !den.is_finite() {
        return None;
    }
    Some((cov / den).clamp(-1.0, 1.0))
}

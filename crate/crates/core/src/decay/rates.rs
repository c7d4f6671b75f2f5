use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::DecayKind;

/// Fraction of leading samples dropped as transient.
pub const DEFAULT_DROP: f64 = 0.2;

/// Relative level, against the series peak, below which samples are treated
/// as numerical floor by [`fit_rates_above`].
pub const DEFAULT_FLOOR: f64 = 1e-4;

/// Least-squares decay fit.
///
/// * exponential: y ≈ prefactor·e^{−rate·t}
/// * power: y ≈ prefactor·(1 + t)^{rate} (rate is the exponent, negative when decaying)
/// * logarithmic: 1/y ≈ 1/prefactor + rate·ln(1 + t)
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub kind: DecayKind,
    pub rate: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    /// Coefficient of determination of the linearised regression.
    pub quality: f64,
}

pub fn fit_rates(t: &[f64], y: &[f64], kind: DecayKind) -> Result<RateFit> {
    fit_rates_window(t, y, kind, DEFAULT_DROP)
}

pub fn fit_rates_window(t: &[f64], y: &[f64], kind: DecayKind, drop: f64) -> Result<RateFit> {
    if t.len() != y.len() {
        return Err(Error::Data(format!("series lengths differ ({} vs {})", t.len(), y.len())));
    }
    if !(0.0..1.0).contains(&drop) {
        return Err(Error::Data(format!("drop fraction must lie in [0, 1), got {drop}")));
    }
    let start = (drop * t.len() as f64).floor() as usize;
    let (tw, yw) = (&t[start..], &y[start..]);
    if tw.len() < 3 {
        return Err(Error::Data(format!("fit window holds {} samples, need 3", tw.len())));
    }
    if let Some((ti, yi)) = tw.iter().zip(yw).find(|(_, y)| !(**y > 0.0) || !y.is_finite()) {
        return Err(Error::Data(format!("non-positive sample {yi} at t = {ti} inside the fit window")));
    }
    let (xs, zs): (Vec<f64>, Vec<f64>) = match kind {
        DecayKind::Exponential => tw.iter().zip(yw).map(|(t, y)| (*t, y.ln())).unzip(),
        DecayKind::Power => tw.iter().zip(yw).map(|(t, y)| ((1.0 + t).ln(), y.ln())).unzip(),
        DecayKind::Logarithmic => tw.iter().zip(yw).map(|(t, y)| ((1.0 + t).ln(), 1.0 / y)).unzip(),
    };
    let (slope, intercept, r2) = least_squares(&xs, &zs)?;
    let (rate, prefactor) = match kind {
        DecayKind::Exponential => (-slope, intercept.exp()),
        DecayKind::Power => (slope, intercept.exp()),
        DecayKind::Logarithmic => (slope, 1.0 / intercept),
    };
    Ok(RateFit {
        kind,
        rate,
        prefactor,
        window: (tw[0], tw[tw.len() - 1]),
        quality: r2,
    })
}

/// As [`fit_rates_window`] on the prefix of the series that ends at the last
/// sample with y ≥ floor·max y. Fast exponential decay reaches the level of
/// weakly damped grid-scale content long before the horizon; past that point
/// the trace says nothing about the continuum rate. `floor = 0` fits the whole
/// series.
pub fn fit_rates_above(t: &[f64], y: &[f64], kind: DecayKind, drop: f64, floor: f64) -> Result<RateFit> {
    if t.len() != y.len() {
        return Err(Error::Data(format!("series lengths differ ({} vs {})", t.len(), y.len())));
    }
    if !(0.0..1.0).contains(&floor) {
        return Err(Error::Data(format!("floor must lie in [0, 1), got {floor}")));
    }
    let peak = y.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let end = y
        .iter()
        .rposition(|&v| v >= floor * peak && v > 0.0)
        .ok_or_else(|| Error::Data("series has no positive sample".into()))?;
    fit_rates_window(&t[..=end], &y[..=end], kind, drop)
}

/// Slope, intercept and R² of z ≈ slope·x + intercept.
fn least_squares(x: &[f64], z: &[f64]) -> Result<(f64, f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let mz = z.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxz: f64 = x.iter().zip(z).map(|(a, b)| (a - mx) * (b - mz)).sum();
    let szz: f64 = z.iter().map(|v| (v - mz).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Data("fit abscissae are all equal".into()));
    }
    let slope = sxz / sxx;
    let intercept = mz - slope * mx;
    let r2 = if szz == 0.0 { 1.0 } else { (sxz * sxz / (sxx * szz)).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2))
}

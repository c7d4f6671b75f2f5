use rayon::prelude::*;
use serde::Serialize;

use super::convexity::Convexity;
use crate::error::{Error, Result};
use crate::model::GrowthProfile;

/// Headroom of the envelope over E₀ at t = 0.
pub const HEADROOM: f64 = 1.1;

/// ε₀ candidates, as fractions of r², tried by [`calibrate_envelope_search`].
pub const EPS0_FRACTIONS: [f64; 4] = [0.1, 0.25, 0.5, 0.75];

/// Envelope t ↦ k₃·H₁⁻¹(k₁t + k₂)·E₀(0) dominating a modified-energy series.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeFit {
    pub profile: GrowthProfile,
    pub eps0: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    /// min over samples of envelope − E₀.
    pub dominance_margin: f64,
    pub e0_initial: f64,
}

impl EnvelopeFit {
    pub fn value(&self, t: f64) -> Result<f64> {
        let conv = Convexity::new(self.profile.clone(), self.eps0)?;
        Ok(self.k3 * conv.h1_inv(self.k1 * t + self.k2)? * self.e0_initial)
    }
}

/// Largest feasible k₁ for a given k₂, or None when no k₁ > 0 dominates.
///
/// With k₃ = HEADROOM/H₁⁻¹(k₂), dominance at sample i is
/// H₁⁻¹(k₁tᵢ + k₂) ≥ xᵢ := (E₀(tᵢ)/E₀(0))·H₁⁻¹(k₂)/HEADROOM, i.e.
/// k₁ ≤ (H₁(xᵢ) − k₂)/tᵢ.
fn k1_bound(conv: &Convexity, t: &[f64], ratio: &[f64], k2: f64) -> Result<Option<f64>> {
    let base = conv.h1_inv(k2)? / HEADROOM;
    let mut bound = f64::INFINITY;
    for (&ti, &ri) in t.iter().zip(ratio) {
        let x = ri * base;
        if x > 1.0 {
            return Ok(None);
        }
        if ti <= 0.0 || x <= 0.0 {
            continue;
        }
        bound = bound.min((conv.h1(x)? - k2) / ti);
    }
    Ok((bound > 0.0).then_some(bound))
}

fn log_grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect()
}

/// Better candidate: larger k₁, then smaller k₂.
fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Best (k₁, k₂) with k₁ drawn from `k1s` and k₂ from `k2s`.
fn search(conv: &Convexity, t: &[f64], ratio: &[f64], k1s: &[f64], k2s: &[f64]) -> Result<Option<(f64, f64)>> {
    let cells: Vec<Option<(f64, f64)>> = k2s
        .par_iter()
        .map(|&k2| {
            let bound = k1_bound(conv, t, ratio, k2)?;
            Ok(bound.and_then(|b| {
                k1s.iter()
                    .copied()
                    .filter(|&k1| k1 <= b)
                    .fold(None, |m: Option<f64>, k1| Some(m.map_or(k1, |m| m.max(k1))))
                    .map(|k1| (k1, k2))
            }))
        })
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().flatten().fold(None, |best, c| match best {
        Some(b) if !better(c, b) => Some(b),
        _ => Some(c),
    }))
}

/// Grid search for the fastest dominating envelope with ε₀ fixed.
pub fn calibrate_envelope(t: &[f64], e0: &[f64], conv: &Convexity) -> Result<EnvelopeFit> {
    if t.len() != e0.len() || t.is_empty() {
        return Err(Error::Data("time and E0 series must be non-empty and of equal length".into()));
    }
    let e0_initial = e0[0];
    if !(e0_initial > 0.0) {
        return Err(Error::Data(format!("E0(0) must be > 0, got {e0_initial}")));
    }
    if let Some(bad) = e0.iter().find(|v| !v.is_finite()) {
        return Err(Error::Data(format!("non-finite E0 sample {bad}")));
    }
    let ratio: Vec<f64> = e0.iter().map(|v| v / e0_initial).collect();
    let coarse: Vec<f64> = (-3..=2).map(|i| 10f64.powi(i)).collect();
    let Some((k1c, k2c)) = search(conv, t, &ratio, &coarse, &coarse)? else {
        return Err(Error::Fit(format!(
            "no dominating envelope on the grid k1, k2 in [1e-3, 1e2] for the {} profile (eps0 = {}); \
             the decay is likely slower than this profile family allows",
            conv.profile.decay_kind().as_str(),
            conv.eps0
        )));
    };
    let k1s = log_grid(k1c, 10.0 * k1c, 20);
    let k2s: Vec<f64> = (-2..=2).map(|j| k2c * 10f64.powf(j as f64 / 4.0)).collect();
    let (k1, k2) = search(conv, t, &ratio, &k1s, &k2s)?.unwrap_or((k1c, k2c));
    let k3 = HEADROOM / conv.h1_inv(k2)?;
    let mut fit = EnvelopeFit {
        profile: conv.profile.clone(),
        eps0: conv.eps0,
        k1,
        k2,
        k3,
        dominance_margin: 0.0,
        e0_initial,
    };
    let mut margin = f64::INFINITY;
    for (&ti, &ei) in t.iter().zip(e0) {
        margin = margin.min(fit.value(ti)? - ei);
    }
    fit.dominance_margin = margin;
    Ok(fit)
}

/// Runs [`calibrate_envelope`] for each ε₀ in [`EPS0_FRACTIONS`]·r² and keeps
/// the feasible fit with the smallest envelope at the last sample.
pub fn calibrate_envelope_search(t: &[f64], e0: &[f64], profile: &GrowthProfile) -> Result<EnvelopeFit> {
    let r2 = profile.r * profile.r;
    let t_end = *t.last().ok_or_else(|| Error::Data("empty series".into()))?;
    let mut best: Option<(f64, EnvelopeFit)> = None;
    let mut last_err = None;
    for frac in EPS0_FRACTIONS {
        let conv = Convexity::new(profile.clone(), frac * r2)?;
        match calibrate_envelope(t, e0, &conv) {
            Ok(fit) => {
                let end = fit.value(t_end)?;
                if best.as_ref().map_or(true, |(b, _)| end < *b) {
                    best = Some((end, fit));
                }
            }
            Err(e @ Error::Fit(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.map(|(_, f)| f)
        .ok_or_else(|| last_err.unwrap_or_else(|| Error::Fit("no eps0 candidate produced a fit".into())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..=n).map(|i| t_end * i as f64 / n as f64).collect();
        let e = t.iter().map(|&s| f(s)).collect();
        (t, e)
    }

    #[test]
    fn exponential_series_with_linear_profile() {
        let (t, e) = series(|s| (-0.5 * s).exp(), 40.0, 400);
        let conv = Convexity::with_default_eps0(GrowthProfile::linear(1.0)).unwrap();
        let fit = calibrate_envelope(&t, &e, &conv).unwrap();
        assert!(fit.dominance_margin >= -1e-12);
        // envelope 1.1·e^{−k₁t}: tight for k₁ slightly above 0.5
        assert!((fit.k1 - 0.5).abs() < 0.03, "k1 = {}", fit.k1);
    }

    #[test]
    fn algebraic_series() {
        // ln(1 + T)/T < 1e-3: slower than the slowest exponential on the grid
        let (t, e) = series(|s| 1.0 / (1.0 + s), 20000.0, 2000);
        let cubic = Convexity::with_default_eps0(GrowthProfile::power(1.0, 3.0)).unwrap();
        let fit = calibrate_envelope(&t, &e, &cubic).unwrap();
        assert!(fit.dominance_margin >= 0.0);
        assert!((fit.value(0.0).unwrap() - 1.1).abs() < 1e-12);
        let lin = Convexity::with_default_eps0(GrowthProfile::linear(1.0)).unwrap();
        assert!(matches!(calibrate_envelope(&t, &e, &lin), Err(Error::Fit(_))));
    }

    #[test]
    fn eps0_search_returns_feasible_fit() {
        let (t, e) = series(|s| 1.0 / (1.0 + 0.3 * s), 200.0, 400);
        let fit = calibrate_envelope_search(&t, &e, &GrowthProfile::power(1.0, 3.0)).unwrap();
        assert!(fit.dominance_margin >= 0.0);
        assert!(EPS0_FRACTIONS.iter().any(|f| (f - fit.eps0).abs() < 1e-15));
    }

    #[test]
    fn rejects_bad_series() {
        let conv = Convexity::with_default_eps0(GrowthProfile::linear(1.0)).unwrap();
        assert!(matches!(calibrate_envelope(&[0.0], &[0.0], &conv), Err(Error::Data(_))));
        assert!(calibrate_envelope(&[0.0, 1.0], &[1.0], &conv).is_err());
    }
}

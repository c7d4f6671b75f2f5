//! Scalar functionals along a trajectory: energy E, modified energy E₀,
//! multiplier F, Lyapunov value V and the proof diagnostic R, plus the
//! residuals of the two dissipation identities.

use nalgebra::DVector;
use serde::Serialize;

use crate::dynamics::{consistent_acceleration, BeamState};
use crate::error::{Error, Result};
use crate::model::{FeedbackLaw, GrowthProfile, PhysicalParams};
use crate::spatial::Operators;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalSample {
    pub t: f64,
    pub e: f64,
    pub e0: f64,
    pub f: f64,
    pub v: f64,
    pub omega: f64,
    pub tip_slope_velocity: f64,
    /// EI·s·f(s) with s the tip slope velocity.
    pub boundary_flux: f64,
    /// (ω − ϖ)·γ(ω − ϖ)
    pub torque_flux: f64,
}

/// ½[uᵀMu + yᵀ(EI·K_b − ρϖ²M0)y]
fn quadratic_form(y: &DVector<f64>, u: &DVector<f64>, ops: &Operators, params: &PhysicalParams) -> f64 {
    let rotation = params.rho * params.varpi * params.varpi * ops.l2_mass.quad(y);
    0.5 * (ops.mass.quad(u) + ops.ei * ops.bending_energy(y) - rotation)
}

pub fn energy_e(state: &BeamState, ops: &Operators, params: &PhysicalParams) -> f64 {
    quadratic_form(&state.y, &state.v, ops, params)
}

/// E(y, v) + E(v, a), with a recomputed from (y, v, ω).
pub fn energy_e0(state: &BeamState, ops: &Operators, params: &PhysicalParams, law: &FeedbackLaw) -> f64 {
    let a = consistent_acceleration(&state.y, &state.v, state.omega, ops, law);
    quadratic_form(&state.y, &state.v, ops, params) + quadratic_form(&state.v, &a, ops, params)
}

/// 2∫₀¹ x·y_t·y_x dx
pub fn functional_f(state: &BeamState, ops: &Operators) -> f64 {
    2.0 * ops.moment_product(&state.v, &state.y)
}

/// ½(ω − ϖ)²(I_d + ρ∫y²) + E
pub fn lyapunov_v(state: &BeamState, ops: &Operators, params: &PhysicalParams) -> f64 {
    let d = state.omega - params.varpi;
    0.5 * d * d * (params.id + params.rho * ops.l2_mass.quad(&state.y)) + energy_e(state, ops, params)
}

pub fn sample(state: &BeamState, ops: &Operators, params: &PhysicalParams, law: &FeedbackLaw) -> FunctionalSample {
    let s = ops.tip_slope.apply(&state.v);
    let d = state.omega - params.varpi;
    FunctionalSample {
        t: state.t,
        e: energy_e(state, ops, params),
        e0: energy_e0(state, ops, params, law),
        f: functional_f(state, ops),
        v: lyapunov_v(state, ops, params),
        omega: state.omega,
        tip_slope_velocity: s,
        boundary_flux: ops.ei * s * law.damping(s),
        torque_flux: d * law.torque(d),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DissipationResiduals {
    /// Midpoint times of consecutive sample pairs.
    pub t: Vec<f64>,
    /// ΔE/Δt + mean boundary flux.
    pub energy: Vec<f64>,
    /// ΔV/Δt + mean (boundary + torque) flux.
    pub lyapunov: Vec<f64>,
    /// max |energy| / (E(0) + 1)
    pub max_energy: f64,
    /// max |lyapunov| / (V(0) + 1)
    pub max_lyapunov: f64,
}

pub fn dissipation_residuals(samples: &[FunctionalSample]) -> Result<DissipationResiduals> {
    if samples.len() < 2 {
        return Err(Error::Config(format!(
            "dissipation residuals need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut out = DissipationResiduals {
        t: Vec::new(),
        energy: Vec::new(),
        lyapunov: Vec::new(),
        max_energy: 0.0,
        max_lyapunov: 0.0,
    };
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let dt = b.t - a.t;
        let flux = 0.5 * (a.boundary_flux + b.boundary_flux);
        let torque = 0.5 * (a.torque_flux + b.torque_flux);
        out.t.push(0.5 * (a.t + b.t));
        out.energy.push((b.e - a.e) / dt + flux);
        out.lyapunov.push((b.v - a.v) / dt + flux + torque);
    }
    let max_abs = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    out.max_energy = max_abs(&out.energy) / (samples[0].e + 1.0);
    out.max_lyapunov = max_abs(&out.lyapunov) / (samples[0].v + 1.0);
    Ok(out)
}

/// H′(ε₀·E₀/E₀(0))·E₀ + δ·E
pub fn diagnostic_r(
    e0: f64,
    e: f64,
    profile: &GrowthProfile,
    eps0: f64,
    delta: f64,
    e0_initial: f64,
) -> Result<f64> {
    if e0_initial == 0.0 {
        return Err(Error::NotApplicable("diagnostic R is undefined for zero initial modified energy".into()));
    }
    let r2 = profile.r * profile.r;
    if !(eps0 > 0.0 && eps0 < r2) {
        return Err(Error::Domain(format!("eps0 must lie in (0, {r2}), got {eps0}")));
    }
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta must be > 0, got {delta}")));
    }
    Ok(profile.h_prime(eps0 * e0 / e0_initial) * e0 + delta * e)
}

/// Default weight for E₁ = E₀ + ε·F keeping |ε·F(0)| ≤ ½E₀(0).
pub fn default_e1_weight(first: &FunctionalSample) -> f64 {
    if first.f == 0.0 {
        1.0
    } else {
        (0.5 * first.e0 / first.f.abs()).min(1.0)
    }
}

/// E₁ = E₀ + ε·F at every sample.
pub fn e1_series(samples: &[FunctionalSample], eps: f64) -> Vec<f64> {
    samples.iter().map(|s| s.e0 + eps * s.f).collect()
}

/// (min, max) of R/E₀ over the samples with E₀ > 0.
pub fn r_equivalence(
    samples: &[FunctionalSample],
    profile: &GrowthProfile,
    eps0: f64,
    delta: f64,
) -> Result<(f64, f64)> {
    let e0_initial = samples
        .first()
        .ok_or_else(|| Error::Config("empty sample list".into()))?
        .e0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in samples.iter().filter(|s| s.e0 > 0.0) {
        let q = diagnostic_r(s.e0, s.e, profile, eps0, delta, e0_initial)? / s.e0;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{assemble, interpolate, Grid};

    fn setup(varpi: f64) -> (Operators, PhysicalParams) {
        let p = PhysicalParams::unit(varpi);
        (assemble(&p, &Grid::new(16).unwrap()).unwrap(), p)
    }

    fn state(y: DVector<f64>, v: DVector<f64>, omega: f64) -> BeamState {
        let n = y.len();
        BeamState {
            t: 0.0,
            y,
            v,
            a: DVector::zeros(n),
            omega,
        }
    }

    #[test]
    fn zero_state() {
        let (ops, p) = setup(1.0);
        let s = BeamState::zeros(32, 1.0);
        let law = FeedbackLaw::linear(1.0, 1.0);
        assert_eq!(energy_e(&s, &ops, &p), 0.0);
        assert_eq!(energy_e0(&s, &ops, &p, &law), 0.0);
        assert_eq!(lyapunov_v(&s, &ops, &p), 0.0);
    }

    #[test]
    fn energy_of_parabola() {
        let (ops, p) = setup(0.0);
        let y = interpolate(&ops.grid, |x| (x * x, 2.0 * x));
        let s = state(y, DVector::zeros(32), 0.0);
        assert!((energy_e(&s, &ops, &p) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn kinetic_only() {
        let (ops, p) = setup(1.0);
        let v0 = interpolate(&ops.grid, |x| (x, 1.0));
        let scale = (6.0 / ops.mass.quad(&v0)).sqrt();
        let s = state(DVector::zeros(32), v0 * scale, 1.0);
        assert!((energy_e(&s, &ops, &p) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn multiplier_of_parabolas() {
        let (ops, _) = setup(0.0);
        let y = interpolate(&ops.grid, |x| (x * x, 2.0 * x));
        let s = state(y.clone(), y, 0.0);
        assert!((functional_f(&s, &ops) - 0.8).abs() < 1e-12);
        let s = state(s.y.clone(), DVector::zeros(32), 0.0);
        assert_eq!(functional_f(&s, &ops), 0.0);
    }

    #[test]
    fn disk_term_only() {
        let (ops, mut p) = setup(1.0);
        p.id = 2.0;
        let s = BeamState::zeros(32, 4.0);
        assert!((lyapunov_v(&s, &ops, &p) - 9.0).abs() < 1e-15);
    }

    #[test]
    fn v_equals_e_at_nominal_speed() {
        let (ops, p) = setup(1.5);
        let y = interpolate(&ops.grid, |x| (x * x * x, 3.0 * x * x));
        let v = interpolate(&ops.grid, |x| (x.sin(), x.cos()));
        let s = state(y, v, 1.5);
        assert_eq!(lyapunov_v(&s, &ops, &p), energy_e(&s, &ops, &p));
    }

    #[test]
    fn r_for_linear_and_quadratic_profiles() {
        let lin = GrowthProfile::linear(0.7);
        assert!((diagnostic_r(2.0, 1.5, &lin, 0.5, 0.1, 4.0).unwrap() - (0.7 * 2.0 + 0.15)).abs() < 1e-15);
        let quad = GrowthProfile::power(1.0, 3.0);
        let expected = 2.0 * 0.5 * (2.0 / 4.0) * 2.0 + 0.1 * 1.5;
        assert!((diagnostic_r(2.0, 1.5, &quad, 0.5, 0.1, 4.0).unwrap() - expected).abs() < 1e-14);
        assert!(matches!(
            diagnostic_r(2.0, 1.5, &quad, 0.5, 0.1, 0.0),
            Err(Error::NotApplicable(_))
        ));
        assert!(diagnostic_r(2.0, 1.5, &quad, 1.5, 0.1, 4.0).is_err());
    }

    #[test]
    fn residuals_need_two_samples() {
        let s = FunctionalSample {
            t: 0.0,
            e: 1.0,
            e0: 1.0,
            f: 0.0,
            v: 1.0,
            omega: 0.0,
            tip_slope_velocity: 0.0,
            boundary_flux: 0.0,
            torque_flux: 0.0,
        };
        assert!(matches!(dissipation_residuals(&[s]), Err(Error::Config(_))));
        let mut s2 = s;
        s2.t = 0.5;
        s2.e = 0.5;
        s2.v = 0.5;
        s2.boundary_flux = 2.0;
        let r = dissipation_residuals(&[s, s2]).unwrap();
        assert!((r.energy[0] - 0.0).abs() < 1e-15);
    }

    #[test]
    fn e1_weight_keeps_half_margin() {
        let s = FunctionalSample {
            t: 0.0,
            e: 1.0,
            e0: 1.0,
            f: -4.0,
            v: 1.0,
            omega: 0.0,
            tip_slope_velocity: 0.0,
            boundary_flux: 0.0,
            torque_flux: 0.0,
        };
        let eps = default_e1_weight(&s);
        assert_eq!(eps, 0.125);
        assert_eq!(e1_series(&[s], eps), vec![0.5]);
    }
}

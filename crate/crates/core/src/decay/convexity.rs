use crate::error::{Error, Result};
use crate::model::{GrowthKind, GrowthProfile};

/// Relative tolerance of the H₁ quadrature and of every bisection below.
const REL_TOL: f64 = 1e-10;

/// The convexity calculus built on a growth profile and a parameter ε₀.
#[derive(Clone, Debug, PartialEq)]
pub struct Convexity {
    pub profile: GrowthProfile,
    pub eps0: f64,
}

impl Convexity {
    pub fn new(profile: GrowthProfile, eps0: f64) -> Result<Self> {
        profile.validate()?;
        let r2 = profile.r * profile.r;
        if !(eps0 > 0.0 && eps0 < r2) {
            return Err(Error::Domain(format!("eps0 must lie in (0, {r2}), got {eps0}")));
        }
        Ok(Convexity { profile, eps0 })
    }

    /// ε₀ = r²/2.
    pub fn with_default_eps0(profile: GrowthProfile) -> Result<Self> {
        let eps0 = default_eps0(&profile);
        Convexity::new(profile, eps0)
    }

    fn r2(&self) -> f64 {
        self.profile.r * self.profile.r
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= 0.0 && x <= self.r2()) {
            return Err(Error::Domain(format!("x = {x} outside [0, {}]", self.r2())));
        }
        Ok(())
    }

    pub fn h(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.profile.h(x))
    }

    pub fn h_prime(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        Ok(self.profile.h_prime(x))
    }

    /// t·H′(ε₀t), t ∈ (0, 1].
    pub fn h2(&self, t: f64) -> Result<f64> {
        check_unit(t)?;
        Ok(t * self.profile.h_prime(self.eps0 * t))
    }

    /// ∫_t^1 ds / H₂(s). Closed form for linear and power profiles.
    pub fn h1(&self, t: f64) -> Result<f64> {
        check_unit(t)?;
        let p = &self.profile;
        Ok(match p.kind {
            GrowthKind::ExpType => self.h1_exp(t),
            _ if p.is_affine() => -t.ln() / p.h_prime(0.0),
            _ => {
                let (kappa, q) = self.power_constants();
                (t.powf(-q) - 1.0) / (kappa * q)
            }
        })
    }

    /// H₁ by quadrature of the defining integral, for every profile.
    pub fn h1_numeric(&self, t: f64) -> Result<f64> {
        check_unit(t)?;
        // s = e^u turns ds/H₂(s) into du/H′(ε₀e^u).
        let g = |u: f64| 1.0 / self.profile.h_prime(self.eps0 * u.exp());
        if !g(t.ln()).is_finite() {
            return Ok(f64::INFINITY);
        }
        Ok(integrate(&g, t.ln(), 0.0))
    }

    /// For the exp profile 1/H₂(s) = ε₀²·s·e^{1/(ε₀s)}/c; with w = 1/(ε₀s)
    /// H₁(t) = (1/c)∫ e^w/w³ dw over [1/ε₀, 1/(ε₀t)], integrated with the
    /// exponential factored out.
    fn h1_exp(&self, t: f64) -> f64 {
        if t == 1.0 {
            return 0.0;
        }
        let (w0, w1) = (1.0 / self.eps0, 1.0 / (self.eps0 * t));
        if w1 > 700.0 {
            return f64::INFINITY;
        }
        let scaled = integrate(&|w: f64| (w - w1).exp() / (w * w * w), w0, w1);
        w1.exp() * scaled / self.profile.c
    }

    /// κ, q with H₂(t) = κ·t^{1+q} for power profiles.
    fn power_constants(&self) -> (f64, f64) {
        let p = &self.profile;
        let q = 0.5 * (p.p - 1.0);
        (0.5 * p.c * (p.p + 1.0) * self.eps0.powf(q), q)
    }

    /// Inverse of H₁: τ ≥ 0 ↦ t ∈ (0, 1].
    pub fn h1_inv(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("H1 inverse needs tau >= 0, got {tau}")));
        }
        let p = &self.profile;
        match p.kind {
            GrowthKind::ExpType => self.h1_inv_bisect(tau),
            _ if p.is_affine() => Ok((-p.h_prime(0.0) * tau).exp()),
            _ => {
                let (kappa, q) = self.power_constants();
                Ok((1.0 + kappa * q * tau).powf(-1.0 / q))
            }
        }
    }

    /// Monotone bisection on H₁(t) = τ, for any profile.
    pub fn h1_inv_bisect(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) {
            return Err(Error::Domain(format!("H1 inverse needs tau >= 0, got {tau}")));
        }
        if tau == 0.0 {
            return Ok(1.0);
        }
        let mut lo = 0.5;
        while self.h1(lo)? < tau {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(Error::Numerical(format!("H1 inverse: no bracket for tau = {tau}")));
            }
        }
        let mut hi = 2.0 * lo.min(0.5);
        let tol = REL_TOL * tau.max(1.0);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            let v = self.h1(mid)?;
            if (v - tau).abs() <= tol {
                return Ok(mid);
            }
            if v > tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// (H′)⁻¹(s) for s ∈ (0, H′(r²)].
    pub fn h_prime_inv(&self, s: f64) -> Result<f64> {
        let p = &self.profile;
        if p.is_affine() {
            return Err(Error::NotApplicable(
                "H′ is constant for an affine profile and has no inverse".into(),
            ));
        }
        let top = p.h_prime(self.r2());
        if !(s > 0.0 && s <= top) {
            return Err(Error::Domain(format!("s = {s} outside (0, {top}]")));
        }
        if p.kind == GrowthKind::Power {
            let q = 0.5 * (p.p - 1.0);
            return Ok((2.0 * s / (p.c * (p.p + 1.0))).powf(1.0 / q));
        }
        let (mut lo, mut hi) = (0.0, self.r2());
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            let v = p.h_prime(mid);
            if !v.is_finite() {
                return Err(Error::Numerical(format!("H′ not finite at {mid}")));
            }
            if v < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Convex conjugate H*(s) = s·x − H(x) with x = (H′)⁻¹(s).
    pub fn h_star(&self, s: f64) -> Result<f64> {
        let x = self.h_prime_inv(s)?;
        Ok(s * x - self.profile.h(x))
    }
}

/// H*(A) + H(B) − A·B, non-negative by Young's inequality.
pub fn verify_young(conv: &Convexity, a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0 && b <= conv.r2()) {
        return Err(Error::Domain(format!("B = {b} outside (0, {}]", conv.r2())));
    }
    Ok(conv.h_star(a)? + conv.profile.h(b) - a * b)
}

pub fn default_eps0(profile: &GrowthProfile) -> f64 {
    0.5 * profile.r * profile.r
}

fn check_unit(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("t = {t} outside (0, 1]")));
    }
    Ok(())
}

/// Adaptive double-exponential quadrature: a panel is split in two until its
/// error estimate is below the relative target.
fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    fn panel(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let out = quadrature::integrate(f, a, b, tol);
        if out.error_estimate <= tol || depth == 0 {
            return out.integral;
        }
        let m = 0.5 * (a + b);
        panel(f, a, m, 0.5 * tol, depth - 1) + panel(f, m, b, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let rough = quadrature::integrate(f, a, b, 1e-6).integral.abs();
    let tol = 1e-13 * rough.max(1e-3);
    panel(f, a, b, tol, 12)
}

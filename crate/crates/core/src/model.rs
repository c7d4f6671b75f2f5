//! Physical parameters, the feedback-law catalog and numerical checks of the
//! standing hypotheses on the damping function `f` and the torque `γ`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Beam and disk constants. The beam length is rescaled to 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhysicalParams {
    /// Flexural rigidity EI.
    pub ei: f64,
    /// Mass per unit length ρ.
    pub rho: f64,
    /// Moment of inertia of the disk.
    pub id: f64,
    /// Target angular velocity ϖ.
    pub varpi: f64,
    /// Initial angular velocity ω(0).
    pub omega0: f64,
}

impl PhysicalParams {
    pub const LENGTH: f64 = 1.0;

    /// Unit beam (EI = ρ = I_d = 1) spinning steadily at `varpi`.
    pub fn unit(varpi: f64) -> Self {
        PhysicalParams {
            ei: 1.0,
            rho: 1.0,
            id: 1.0,
            varpi,
            omega0: varpi,
        }
    }

    /// Upper bound 3·√(EI/ρ) on |ϖ|.
    pub fn angular_bound(&self) -> f64 {
        3.0 * (self.ei / self.rho).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// 3·√(EI/ρ), or NaN when EI/ρ is not positive.
    pub bound: f64,
    pub admissible: bool,
}

/// Positivity of the constants and the strict smallness condition on ϖ.
pub fn validate_params(params: &PhysicalParams) -> ValidationReport {
    let mut checks = Vec::new();
    for (name, value) in [("EI > 0", params.ei), ("rho > 0", params.rho), ("Id > 0", params.id)] {
        checks.push(Check {
            name: name.to_string(),
            passed: value > 0.0 && value.is_finite(),
            detail: format!("value {value}"),
        });
    }
    let finite = [params.varpi, params.omega0].iter().all(|v| v.is_finite());
    checks.push(Check {
        name: "finite angular velocities".to_string(),
        passed: finite,
        detail: format!("varpi {}, omega0 {}", params.varpi, params.omega0),
    });
    let bound = if params.ei > 0.0 && params.rho > 0.0 {
        params.angular_bound()
    } else {
        f64::NAN
    };
    checks.push(Check {
        name: "|varpi| < 3*sqrt(EI/rho)".to_string(),
        passed: params.varpi.abs() < bound,
        detail: format!("|varpi| = {}, bound = {}", params.varpi.abs(), bound),
    });
    let admissible = checks.iter().all(|c| c.passed);
    ValidationReport {
        checks,
        bound,
        admissible,
    }
}

/// Shape of the lower growth function f₀ near zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthKind {
    /// f₀(s) = c·s
    Linear,
    /// f₀(s) = c·s^p on [0, 1]
    Power,
    /// f₀(s) = c·(1/s)·exp(−1/s²) on (0, 1]
    ExpType,
}

/// Predicted decay family of the modified energy for a growth profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayKind {
    Exponential,
    Power,
    Logarithmic,
}

impl DecayKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecayKind::Exponential => "exponential",
            DecayKind::Power => "power",
            DecayKind::Logarithmic => "logarithmic",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "exponential" => Ok(DecayKind::Exponential),
            "power" => Ok(DecayKind::Power),
            "logarithmic" => Ok(DecayKind::Logarithmic),
            other => Err(Error::Config(format!("unknown decay kind `{other}`"))),
        }
    }
}

/// Lower growth profile f₀ attached to a damping law.
///
/// On [0, 1] the profile follows its kind; for s ≥ 1 it continues linearly
/// through f₀(1) so that f₀ is strictly increasing and invertible on [0, ∞).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthProfile {
    pub kind: GrowthKind,
    pub c: f64,
    /// Power exponent, only meaningful for [`GrowthKind::Power`].
    pub p: f64,
    /// Convexity radius: H is strictly convex on (0, r²].
    pub r: f64,
}

impl GrowthProfile {
    pub fn linear(c: f64) -> Self {
        GrowthProfile {
            kind: GrowthKind::Linear,
            c,
            p: 1.0,
            r: 1.0,
        }
    }

    pub fn power(c: f64, p: f64) -> Self {
        GrowthProfile {
            kind: GrowthKind::Power,
            c,
            p,
            r: 1.0,
        }
    }

    pub fn exp_type(c: f64) -> Self {
        GrowthProfile {
            kind: GrowthKind::ExpType,
            c,
            p: 1.0,
            r: 0.4,
        }
    }

    pub fn default_radius(kind: GrowthKind) -> f64 {
        match kind {
            GrowthKind::ExpType => 0.4,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("profile scale c must be > 0, got {}", self.c)));
        }
        if self.kind == GrowthKind::Power && !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("profile exponent p must be >= 1, got {}", self.p)));
        }
        if !(self.r > 0.0 && self.r <= 1.0) {
            return Err(Error::Config(format!(
                "convexity radius r must lie in (0, 1], got {}",
                self.r
            )));
        }
        Ok(())
    }

    /// H is affine (linear growth): no strict convexity, exponential route.
    pub fn is_affine(&self) -> bool {
        match self.kind {
            GrowthKind::Linear => true,
            GrowthKind::Power => self.p == 1.0,
            GrowthKind::ExpType => false,
        }
    }

    pub fn decay_kind(&self) -> DecayKind {
        match self.kind {
            GrowthKind::ExpType => DecayKind::Logarithmic,
            _ if self.is_affine() => DecayKind::Exponential,
            _ => DecayKind::Power,
        }
    }

    fn core(&self, s: f64) -> f64 {
        match self.kind {
            GrowthKind::Linear => self.c * s,
            GrowthKind::Power => self.c * s.powf(self.p),
            GrowthKind::ExpType => {
                if s == 0.0 {
                    0.0
                } else {
                    self.c * (-1.0 / (s * s)).exp() / s
                }
            }
        }
    }

    /// f₀(s), odd.
    pub fn f0(&self, s: f64) -> f64 {
        let a = s.abs();
        let v = if a <= 1.0 { self.core(a) } else { self.core(1.0) * a };
        v.copysign(s)
    }

    /// f₀⁻¹(y) for y ≥ 0.
    pub fn f0_inv(&self, y: f64) -> f64 {
        let y = y.abs();
        let at_one = self.core(1.0);
        if y >= at_one {
            return y / at_one;
        }
        match self.kind {
            GrowthKind::Linear => y / self.c,
            GrowthKind::Power => (y / self.c).powf(1.0 / self.p),
            GrowthKind::ExpType => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if self.core(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }

    /// H(x) = √x·f₀(√x), x ≥ 0.
    pub fn h(&self, x: f64) -> f64 {
        let s = x.sqrt();
        s * self.f0(s)
    }

    /// Closed-form H′(x) on [0, 1].
    pub fn h_prime(&self, x: f64) -> f64 {
        match self.kind {
            GrowthKind::Linear => self.c,
            GrowthKind::Power => 0.5 * self.c * (self.p + 1.0) * x.powf(0.5 * (self.p - 1.0)),
            GrowthKind::ExpType => {
                if x <= 0.0 {
                    0.0
                } else {
                    self.c * (-1.0 / x - 2.0 * x.ln()).exp()
                }
            }
        }
    }
}

/// Piecewise-linear damping function given on s ≥ 0 and extended oddly.
/// Beyond the last node it continues with the slope of the last segment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TabulatedLaw {
    s: Vec<f64>,
    f: Vec<f64>,
}

impl TabulatedLaw {
    pub fn new(s: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        if s.len() != f.len() || s.len() < 2 {
            return Err(Error::Config(
                "tabulated law needs matching `s` and `f` arrays with at least two nodes".into(),
            ));
        }
        if s[0] != 0.0 || f[0] != 0.0 {
            return Err(Error::Config("tabulated law must start at (0, 0)".into()));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("tabulated `s` nodes must be strictly increasing".into()));
        }
        if s.iter().chain(f.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("tabulated law contains non-finite values".into()));
        }
        Ok(TabulatedLaw { s, f })
    }

    fn segment(&self, a: f64) -> usize {
        let n = self.s.len();
        match self.s.binary_search_by(|probe| probe.partial_cmp(&a).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn slope(&self, i: usize) -> f64 {
        (self.f[i + 1] - self.f[i]) / (self.s[i + 1] - self.s[i])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = x.abs();
        let i = self.segment(a);
        let v = self.f[i] + self.slope(i) * (a - self.s[i]);
        if x < 0.0 {
            -v
        } else {
            v
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.slope(self.segment(x.abs()))
    }

    /// Smallest and largest |f(s)|/|s| over nodes with s ≥ 1 and the tail slope.
    fn linear_bounds(&self) -> (f64, f64) {
        let last = self.s.len() - 2;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut push = |r: f64| {
            lo = lo.min(r);
            hi = hi.max(r);
        };
        push(self.eval(1.0));
        for (s, f) in self.s.iter().zip(&self.f) {
            if *s >= 1.0 {
                push(f / s);
            }
        }
        push(self.slope(last));
        (lo, hi)
    }
}

/// Catalog of boundary damping functions f.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DampingLaw {
    /// f(s) = c·s. `c = 0` gives the undamped beam.
    Linear { c: f64 },
    /// f(s) = sign(s)·c·|s|^p for |s| ≤ 1, c·s beyond.
    Power { c: f64, p: f64 },
    /// f(s) = sign(s)·c·(1/|s|)·exp(−1/s²) for 0 < |s| ≤ 1, continued linearly.
    ExpType { c: f64 },
    Tabulated(TabulatedLaw),
}

impl DampingLaw {
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            DampingLaw::Linear { c } => c * s,
            DampingLaw::Power { c, p } => {
                let a = s.abs();
                let v = if a <= 1.0 { c * a.powf(*p) } else { c * a };
                v.copysign(s)
            }
            DampingLaw::ExpType { c } => {
                let a = s.abs();
                if a == 0.0 {
                    return 0.0;
                }
                let v = if a <= 1.0 {
                    c * (-1.0 / (a * a)).exp() / a
                } else {
                    c * (-1.0f64).exp() * a
                };
                v.copysign(s)
            }
            DampingLaw::Tabulated(t) => t.eval(s),
        }
    }

    /// f′(s); one-sided (inner) value at corner points.
    pub fn derivative(&self, s: f64) -> f64 {
        let a = s.abs();
        match self {
            DampingLaw::Linear { c } => *c,
            DampingLaw::Power { c, p } => {
                if a <= 1.0 {
                    if a == 0.0 {
                        if *p == 1.0 {
                            *c
                        } else {
                            0.0
                        }
                    } else {
                        c * p * a.powf(p - 1.0)
                    }
                } else {
                    *c
                }
            }
            DampingLaw::ExpType { c } => {
                if a == 0.0 {
                    0.0
                } else if a <= 1.0 {
                    c * (-1.0 / (a * a) - 4.0 * a.ln()).exp() * (2.0 - a * a)
                } else {
                    c * (-1.0f64).exp()
                }
            }
            DampingLaw::Tabulated(t) => t.derivative(s),
        }
    }

    /// Lower growth profile matched to the law so that the sandwich
    /// f₀(|s|) ≤ |f(s)| ≤ f₀⁻¹(|s|) holds on |s| ≤ 1.
    pub fn default_profile(&self) -> Result<GrowthProfile> {
        match self {
            DampingLaw::Linear { c } => {
                let c0 = if *c > 0.0 { c.min(1.0 / c) } else { 1.0 };
                Ok(GrowthProfile::linear(c0))
            }
            DampingLaw::Power { c, p } => {
                let c0 = if *c > 0.0 { c.min(c.powf(-p)) } else { 1.0 };
                Ok(GrowthProfile::power(c0, *p))
            }
            DampingLaw::ExpType { c } => Ok(GrowthProfile::exp_type(if *c > 0.0 { c.min(1.0) } else { 1.0 })),
            DampingLaw::Tabulated(_) => Err(Error::Config(
                "a tabulated damping law needs an explicit growth profile".into(),
            )),
        }
    }

    /// Default (c1, c2) with c1|s| ≤ |f(s)| ≤ c2|s| for |s| ≥ 1.
    pub fn default_linear_bounds(&self) -> (f64, f64) {
        match self {
            DampingLaw::Linear { c } | DampingLaw::Power { c, .. } => (*c, *c),
            DampingLaw::ExpType { c } => {
                let v = c * (-1.0f64).exp();
                (v, v)
            }
            DampingLaw::Tabulated(t) => t.linear_bounds(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::Config(format!("damping law: {what}, got {v}")));
        match self {
            DampingLaw::Linear { c } if !(c.is_finite() && *c >= 0.0) => bad("gain c must be >= 0", *c),
            DampingLaw::Power { c, .. } if !(c.is_finite() && *c >= 0.0) => bad("scale c must be >= 0", *c),
            DampingLaw::Power { p, .. } if !(p.is_finite() && *p >= 1.0) => bad("exponent p must be >= 1", *p),
            DampingLaw::ExpType { c } if !(c.is_finite() && *c >= 0.0) => bad("scale c must be >= 0", *c),
            _ => Ok(()),
        }
    }

    /// Linear gain when f(s) = c·s everywhere.
    pub fn linear_gain(&self) -> Option<f64> {
        match self {
            DampingLaw::Linear { c } => Some(*c),
            DampingLaw::Power { c, p } if *p == 1.0 => Some(*c),
            _ => None,
        }
    }
}

/// Catalog of disk torque laws γ. Only sector-compliant laws are admitted.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorqueLaw {
    /// γ(x) = K·x
    Linear { k: f64 },
}

impl TorqueLaw {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TorqueLaw::Linear { k } => k * x,
        }
    }

    pub fn sector_constant(&self) -> f64 {
        match self {
            TorqueLaw::Linear { k } => *k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TorqueLaw::Linear { k } if !(k.is_finite() && *k > 0.0) => Err(Error::Config(format!(
                "torque law: sector constant K must be > 0, got {k}"
            ))),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeedbackLaw {
    pub damping: DampingLaw,
    pub profile: GrowthProfile,
    pub torque: TorqueLaw,
    pub c1: f64,
    pub c2: f64,
}

impl FeedbackLaw {
    /// Law with the matched default growth profile and linear bounds.
    pub fn new(damping: DampingLaw, torque: TorqueLaw) -> Result<Self> {
        let profile = damping.default_profile()?;
        let (c1, c2) = damping.default_linear_bounds();
        Ok(FeedbackLaw {
            damping,
            profile,
            torque,
            c1,
            c2,
        })
    }

    pub fn with_profile(mut self, profile: GrowthProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn linear(c: f64, k: f64) -> Self {
        FeedbackLaw::new(DampingLaw::Linear { c }, TorqueLaw::Linear { k }).expect("catalog law")
    }

    pub fn power(c: f64, p: f64, k: f64) -> Self {
        FeedbackLaw::new(DampingLaw::Power { c, p }, TorqueLaw::Linear { k }).expect("catalog law")
    }

    pub fn exp_type(c: f64, k: f64) -> Self {
        FeedbackLaw::new(DampingLaw::ExpType { c }, TorqueLaw::Linear { k }).expect("catalog law")
    }

    pub fn damping(&self, s: f64) -> f64 {
        self.damping.eval(s)
    }

    pub fn torque(&self, x: f64) -> f64 {
        self.torque.eval(x)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feedback {
    Damping,
    Torque,
}

pub fn eval_feedback(law: &FeedbackLaw, which: Feedback, s: f64) -> f64 {
    match which {
        Feedback::Damping => law.damping(s),
        Feedback::Torque => law.torque(s),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub id: String,
    pub passed: bool,
    /// Hard checks gate simulation; soft ones only void the decay guarantees.
    pub hard: bool,
    pub counterexample: Option<f64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    /// min |γ(x)|/|x| over the grid.
    pub observed_sector_constant: f64,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn hard_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.hard).all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// 801 points uniformly on [−10, 10] plus a refined cluster on (−1, 1).
pub fn default_sample_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=800).map(|i| -10.0 + 20.0 * i as f64 / 800.0).collect();
    g.extend((1..200).map(|i| -1.0 + 2.0 * i as f64 / 200.0));
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

const REL: f64 = 1e-12;

fn le(a: f64, b: f64) -> bool {
    a <= b + REL * a.abs().max(b.abs())
}

/// Numerical check of H.I (monotone, f(0) = 0), H.II (sandwich and linear
/// bounds), H.III (sector condition) and strict convexity of H on (0, r²].
pub fn check_hypotheses(law: &FeedbackLaw, sample_grid: &[f64]) -> Result<HypothesisReport> {
    if sample_grid.is_empty() {
        return Err(Error::Config("hypothesis sample grid is empty".into()));
    }
    let mut grid: Vec<f64> = sample_grid.iter().copied().filter(|v| v.is_finite()).collect();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let f = |s: f64| law.damping(s);
    let prof = &law.profile;
    let mut checks = Vec::new();

    // H.I
    let mut ce = None;
    let mut note = String::from("f non-decreasing with f(0) = 0");
    if f(0.0) != 0.0 {
        ce = Some(0.0);
        note = format!("f(0) = {}", f(0.0));
    } else if let Some(w) = grid.windows(2).find(|w| f(w[1]) < f(w[0])) {
        ce = Some(w[1]);
        note = format!("f decreases between {} and {}", w[0], w[1]);
    }
    checks.push(HypothesisCheck {
        id: "H.I".into(),
        passed: ce.is_none(),
        hard: true,
        counterexample: ce,
        note,
    });

    // H.II, |s| <= 1
    let mut ce = None;
    let mut note = format!("f0 = {:?} profile (c = {}, p = {})", prof.kind, prof.c, prof.p);
    if let Err(e) = prof.validate() {
        ce = Some(f64::NAN);
        note = e.to_string();
    } else {
        let pos: Vec<f64> = grid.iter().map(|s| s.abs()).filter(|s| *s > 0.0).collect();
        let mut sorted = pos.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted.dedup_by(|b, a| *b - *a <= 1e-9 * *b);
        if let Some(w) = sorted.windows(2).find(|w| !(prof.f0(w[1]) > prof.f0(w[0])) && prof.f0(w[1]) != 0.0) {
            ce = Some(w[1]);
            note = format!("f0 not strictly increasing near {}", w[1]);
        } else if let Some(&s) = grid.iter().find(|s| {
            let a = s.abs();
            a <= 1.0 && !(le(prof.f0(a), f(**s).abs()) && le(f(**s).abs(), prof.f0_inv(a)))
        }) {
            ce = Some(s);
            note = format!(
                "sandwich fails at s = {s}: f0 = {}, |f| = {}, f0^-1 = {}",
                prof.f0(s.abs()),
                f(s).abs(),
                prof.f0_inv(s.abs())
            );
        }
    }
    checks.push(HypothesisCheck {
        id: "H.II sandwich".into(),
        passed: ce.is_none(),
        hard: false,
        counterexample: ce,
        note,
    });

    // H.II, |s| >= 1
    let (c1, c2) = (law.c1, law.c2);
    let mut ce = None;
    let mut note = format!("c1 = {c1}, c2 = {c2}");
    if !(c1 > 0.0 && c2 >= c1) {
        ce = Some(f64::NAN);
        note = format!("need 0 < c1 <= c2, got c1 = {c1}, c2 = {c2}");
    } else if let Some(&s) = grid.iter().find(|s| {
        let a = s.abs();
        a >= 1.0 && !(le(c1 * a, f(**s).abs()) && le(f(**s).abs(), c2 * a))
    }) {
        ce = Some(s);
        note = format!("linear bounds fail at s = {s}: |f| = {}", f(s).abs());
    }
    checks.push(HypothesisCheck {
        id: "H.II linear".into(),
        passed: ce.is_none(),
        hard: false,
        counterexample: ce,
        note,
    });

    // H.III
    let k = law.torque.sector_constant();
    let mut observed = f64::INFINITY;
    let mut ce = None;
    for &x in &grid {
        let g = law.torque(x);
        if x != 0.0 {
            observed = observed.min(g.abs() / x.abs());
        }
        if ce.is_none() && (g * x < 0.0 || !le(k * x.abs(), g.abs()) || (x == 0.0 && g != 0.0)) {
            ce = Some(x);
        }
    }
    checks.push(HypothesisCheck {
        id: "H.III".into(),
        passed: ce.is_none() && k > 0.0,
        hard: true,
        counterexample: ce,
        note: format!("sector constant K = {k}, observed min |g(x)|/|x| = {observed}"),
    });

    // Strict convexity of H
    let (passed, ce, note) = if prof.is_affine() {
        (true, None, "H affine (linear growth): exponential route, no strict convexity needed".to_string())
    } else {
        let n = 256;
        let r2 = prof.r * prof.r;
        let xs: Vec<f64> = (1..=n).map(|j| r2 * j as f64 / n as f64).collect();
        let bad = xs.windows(3).find(|w| {
            let (a, b, c) = (prof.h(w[0]), prof.h(w[1]), prof.h(w[2]));
            let underflow = a == 0.0 && b == 0.0 && c == 0.0;
            !underflow && !(a - 2.0 * b + c > 0.0)
        });
        match bad {
            Some(w) => (false, Some(w[1]), format!("second difference of H not positive at x = {}", w[1])),
            None => (true, None, format!("H strictly convex on (0, {r2}]")),
        }
    };
    checks.push(HypothesisCheck {
        id: "H convexity".into(),
        passed,
        hard: false,
        counterexample: ce,
        note,
    });

    Ok(HypothesisReport {
        checks,
        observed_sector_constant: observed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallness_condition_examples() {
        let r = validate_params(&PhysicalParams::unit(2.9));
        assert!(r.admissible);
        assert_eq!(r.bound, 3.0);
        assert!(!validate_params(&PhysicalParams::unit(3.0)).admissible);
        let p = PhysicalParams {
            ei: 2.0,
            rho: 0.5,
            id: 1.0,
            varpi: 5.9,
            omega0: 0.0,
        };
        let r = validate_params(&p);
        assert!(r.admissible);
        assert!((r.bound - 6.0).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_constants_rejected() {
        let mut p = PhysicalParams::unit(0.0);
        p.id = 0.0;
        let r = validate_params(&p);
        assert!(!r.admissible);
        assert!(!r.checks.iter().find(|c| c.name == "Id > 0").unwrap().passed);
    }

    #[test]
    fn feedback_examples() {
        let lin = FeedbackLaw::linear(2.0, 1.0);
        assert_eq!(eval_feedback(&lin, Feedback::Damping, 0.5), 1.0);
        let pow = FeedbackLaw::power(1.0, 3.0, 1.0);
        assert_eq!(pow.damping(0.5), 0.125);
        assert_eq!(pow.damping(2.0), 2.0);
        for law in [lin, pow, FeedbackLaw::exp_type(1.0, 1.0)] {
            assert_eq!(law.damping(0.0), 0.0);
            assert_eq!(law.torque(0.0), 0.0);
        }
    }

    #[test]
    fn exp_type_is_continuous_and_c1_at_one() {
        let f = DampingLaw::ExpType { c: 1.0 };
        let e = 1e-9;
        assert!((f.eval(1.0 - e) - f.eval(1.0 + e)).abs() < 1e-8);
        assert!((f.derivative(1.0 - e) - f.derivative(1.0 + e)).abs() < 1e-7);
        // tiny arguments underflow cleanly instead of producing NaN
        assert_eq!(f.eval(1e-3), 0.0);
        assert_eq!(f.derivative(1e-3), 0.0);
    }

    #[test]
    fn linear_law_with_matching_profile_passes() {
        let law = FeedbackLaw::linear(0.5, 1.0);
        assert_eq!(law.profile.c, 0.5);
        let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
        assert!(rep.all_passed(), "{rep:#?}");
    }

    #[test]
    fn decreasing_f_fails_h1() {
        let law = FeedbackLaw::new(
            DampingLaw::Tabulated(TabulatedLaw::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap()),
            TorqueLaw::Linear { k: 1.0 },
        )
        .unwrap_err();
        assert!(matches!(law, Error::Config(_)));
        let law = FeedbackLaw {
            damping: DampingLaw::Tabulated(TabulatedLaw::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap()),
            profile: GrowthProfile::linear(1.0),
            torque: TorqueLaw::Linear { k: 1.0 },
            c1: 1.0,
            c2: 1.0,
        };
        let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
        let h1 = rep.get("H.I").unwrap();
        assert!(!h1.passed);
        assert!(h1.counterexample.is_some());
        assert!(!rep.hard_passed());
    }

    #[test]
    fn sector_equality_case() {
        let law = FeedbackLaw::linear(1.0, 0.5);
        let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
        assert!(rep.get("H.III").unwrap().passed);
        assert!((rep.observed_sector_constant - 0.5).abs() < 1e-15);
    }

    #[test]
    fn catalog_laws_pass_all_checks() {
        for law in [
            FeedbackLaw::power(1.0, 2.0, 1.0),
            FeedbackLaw::power(1.0, 3.0, 1.0),
            FeedbackLaw::power(2.0, 3.0, 1.0),
            FeedbackLaw::exp_type(1.0, 1.0),
            FeedbackLaw::linear(3.0, 1.0),
        ] {
            let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
            assert!(rep.all_passed(), "{law:?}: {rep:#?}");
        }
    }

    #[test]
    fn undamped_beam_fails_only_soft_checks() {
        let law = FeedbackLaw::linear(0.0, 1.0);
        let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
        assert!(rep.hard_passed());
        assert!(!rep.all_passed());
    }

    #[test]
    fn empty_grid_is_a_configuration_error() {
        let law = FeedbackLaw::linear(1.0, 1.0);
        assert!(matches!(check_hypotheses(&law, &[]), Err(Error::Config(_))));
    }

    #[test]
    fn exp_type_profile_loses_convexity_past_one_half() {
        let mut law = FeedbackLaw::exp_type(1.0, 1.0);
        law.profile.r = 0.9;
        let rep = check_hypotheses(&law, &default_sample_grid()).unwrap();
        let conv = rep.get("H convexity").unwrap();
        assert!(!conv.passed);
        assert!(conv.counterexample.unwrap() > 0.5);
    }

    #[test]
    fn tabulated_law_interpolates_oddly() {
        let t = TabulatedLaw::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 2.5]).unwrap();
        assert_eq!(t.eval(0.5), 0.25);
        assert_eq!(t.eval(-1.5), -1.5);
        assert_eq!(t.eval(3.0), 4.5);
        assert_eq!(t.derivative(-1.5), 2.0);
    }

    #[test]
    fn profile_inverse_round_trip() {
        for prof in [GrowthProfile::linear(0.5), GrowthProfile::power(1.0, 3.0), GrowthProfile::exp_type(1.0)] {
            for &s in &[0.2, 0.5, 0.9, 1.0, 3.0] {
                let y = prof.f0(s);
                assert!((prof.f0_inv(y) - s).abs() < 1e-12 * s.max(1.0), "{prof:?} at {s}");
            }
        }
    }

    #[test]
    fn decay_kind_prediction() {
        assert_eq!(GrowthProfile::power(1.0, 1.0).decay_kind(), DecayKind::Exponential);
        assert_eq!(GrowthProfile::power(1.0, 2.0).decay_kind(), DecayKind::Power);
        assert_eq!(GrowthProfile::exp_type(1.0).decay_kind(), DecayKind::Logarithmic);
    }
}

//! Scenario file schema (TOML) and its conversion to the domain types.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decay::{self, Convexity};
use crate::dynamics::{Mode, Shape, SimConfig};
use crate::error::{Error, Result};
use crate::model::{
    check_hypotheses, default_sample_grid, validate_params, DampingLaw, DecayKind, FeedbackLaw, GrowthKind,
    GrowthProfile, HypothesisReport, PhysicalParams, TabulatedLaw, TorqueLaw, ValidationReport,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub params: ParamsSection,
    pub law: LawSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    /// Reserved. Runs are deterministic and draw no random numbers.
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> Mode {
    Mode::Subsystem
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default = "one")]
    pub ei: f64,
    #[serde(default = "one")]
    pub rho: f64,
    #[serde(default = "one")]
    pub id: f64,
    pub varpi: f64,
    /// Defaults to `varpi`.
    pub omega0: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSection {
    pub damping: DampingSpec,
    pub profile: Option<ProfileSpec>,
    #[serde(default)]
    pub torque: TorqueSpec,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingSpec {
    Linear { c: f64 },
    Power { c: f64, p: f64 },
    ExpType { c: f64 },
    Tabulated { s: Vec<f64>, f: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSpec {
    pub kind: String,
    pub c: f64,
    pub p: Option<f64>,
    pub r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorqueSpec {
    Linear { k: f64 },
    /// Accepted by the parser so that the rejection can say why.
    Saturated { k: f64 },
}

impl Default for TorqueSpec {
    fn default() -> Self {
        TorqueSpec::Linear { k: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n_elements: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { n_elements: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_cadence")]
    pub sample_every: usize,
}

fn default_dt() -> f64 {
    1e-3
}
fn default_horizon() -> f64 {
    50.0
}
fn default_cadence() -> usize {
    10
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection {
            dt: default_dt(),
            horizon: default_horizon(),
            sample_every: default_cadence(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub displacement: Shape,
    #[serde(default = "zero_shape")]
    pub velocity: Shape,
}

fn zero_shape() -> Shape {
    Shape::Zero
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            displacement: Shape::FirstMode { amplitude: 0.1 },
            velocity: Shape::Zero,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Calibrate a decay envelope on the E₀ series.
    #[serde(default)]
    pub envelope: bool,
    /// Convexity parameter; defaults to r²/2.
    pub eps0: Option<f64>,
    /// Try several ε₀ values and keep the tightest feasible envelope.
    #[serde(default)]
    pub eps0_search: bool,
    /// Decay families fitted to E₀; defaults to the family predicted by the profile.
    pub rate_fits: Option<Vec<String>>,
    /// Fraction of leading samples excluded from rate fits.
    pub fit_drop: Option<f64>,
    /// Rate fits stop at the last sample above this fraction of the series
    /// peak. It is an amplitude level: fits of E₀ use its square.
    pub fit_floor: Option<f64>,
    /// Spectral abscissa of the linearised beam (linear damping only).
    #[serde(default)]
    pub spectral: bool,
    /// Treat an infeasible envelope as a run failure.
    #[serde(default)]
    pub require_dominance: bool,
}

/// A parsed scenario with resolved domain objects.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub sim: SimConfig,
    pub eps0: f64,
    pub rate_fits: Vec<DecayKind>,
    pub fit_drop: f64,
    pub fit_floor: f64,
}

impl ScenarioFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("parse error: {e}")))
    }

    pub fn from_value(value: toml::Value) -> Result<Self> {
        value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn params(&self) -> PhysicalParams {
        let p = &self.params;
        PhysicalParams {
            ei: p.ei,
            rho: p.rho,
            id: p.id,
            varpi: p.varpi,
            omega0: p.omega0.unwrap_or(p.varpi),
        }
    }

    pub fn law(&self) -> Result<FeedbackLaw> {
        let damping = match &self.law.damping {
            DampingSpec::Linear { c } => DampingLaw::Linear { c: *c },
            DampingSpec::Power { c, p } => DampingLaw::Power { c: *c, p: *p },
            DampingSpec::ExpType { c } => DampingLaw::ExpType { c: *c },
            DampingSpec::Tabulated { s, f } => DampingLaw::Tabulated(TabulatedLaw::new(s.clone(), f.clone())?),
        };
        damping.validate()?;
        let torque = match self.law.torque {
            TorqueSpec::Linear { k } => TorqueLaw::Linear { k },
            TorqueSpec::Saturated { .. } => {
                return Err(Error::Config(
                    "law.torque: the saturated torque law violates the sector condition |g(x)| >= K|x| \
                     for large |x| and is not admitted; use kind = \"linear\""
                        .into(),
                ))
            }
        };
        torque.validate()?;
        let profile = match &self.law.profile {
            Some(spec) => {
                let kind = match spec.kind.as_str() {
                    "linear" => GrowthKind::Linear,
                    "power" => GrowthKind::Power,
                    "exp_type" => GrowthKind::ExpType,
                    other => {
                        return Err(Error::Config(format!(
                            "law.profile.kind: unknown profile `{other}` (expected linear, power or exp_type)"
                        )))
                    }
                };
                let prof = GrowthProfile {
                    kind,
                    c: spec.c,
                    p: spec.p.unwrap_or(1.0),
                    r: spec.r.unwrap_or_else(|| GrowthProfile::default_radius(kind)),
                };
                prof.validate()?;
                prof
            }
            None => damping.default_profile()?,
        };
        let (c1, c2) = damping.default_linear_bounds();
        Ok(FeedbackLaw {
            damping,
            profile,
            torque,
            c1: self.law.c1.unwrap_or(c1),
            c2: self.law.c2.unwrap_or(c2),
        })
    }

    /// Resolves every section. Structural problems are configuration errors;
    /// hypothesis failures are reported separately by [`validate_scenario`].
    pub fn resolve(&self) -> Result<Scenario> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let law = self.law()?;
        let sim = SimConfig {
            params: self.params(),
            law,
            n_elements: self.grid.n_elements,
            dt: self.time.dt,
            horizon: self.time.horizon,
            sample_every: self.time.sample_every,
            mode: self.mode,
            displacement: self.initial.displacement.clone(),
            velocity: self.initial.velocity.clone(),
        };
        sim.validate()?;
        let a = &self.analysis;
        let eps0 = a.eps0.unwrap_or_else(|| decay::default_eps0(&sim.law.profile));
        Convexity::new(sim.law.profile.clone(), eps0)?;
        let rate_fits = match &a.rate_fits {
            Some(names) => names.iter().map(|n| DecayKind::parse(n)).collect::<Result<_>>()?,
            None => vec![sim.law.profile.decay_kind()],
        };
        let fit_drop = a.fit_drop.unwrap_or(decay::DEFAULT_DROP);
        if !(0.0..1.0).contains(&fit_drop) {
            return Err(Error::Config(format!("analysis.fit_drop must lie in [0, 1), got {fit_drop}")));
        }
        let fit_floor = a.fit_floor.unwrap_or(decay::DEFAULT_FLOOR);
        if !(0.0..1.0).contains(&fit_floor) {
            return Err(Error::Config(format!("analysis.fit_floor must lie in [0, 1), got {fit_floor}")));
        }
        if a.spectral {
            if sim.law.damping.linear_gain().is_none() {
                return Err(Error::Config(
                    "analysis.spectral needs a linear damping law (the oracle linearises nothing)".into(),
                ));
            }
            if sim.n_elements > decay::MAX_ELEMENTS {
                return Err(Error::Config(format!(
                    "analysis.spectral is limited to grid.n_elements <= {}",
                    decay::MAX_ELEMENTS
                )));
            }
        }
        if a.require_dominance && !a.envelope {
            return Err(Error::Config("analysis.require_dominance needs analysis.envelope = true".into()));
        }
        Ok(Scenario {
            file: self.clone(),
            sim,
            eps0,
            rate_fits,
            fit_drop,
            fit_floor,
        })
    }
}

/// Outcome of validating a scenario file.
#[derive(Clone, Debug, Serialize)]
pub struct ConfigReport {
    pub params: ValidationReport,
    pub hypotheses: Option<HypothesisReport>,
    /// Structural errors (unknown catalog entries, bad time settings, …).
    pub errors: Vec<String>,
    pub profile: Option<GrowthProfile>,
    pub eps0: Option<f64>,
    pub predicted_decay: Option<DecayKind>,
}

impl ConfigReport {
    /// True when a run must refuse to start.
    pub fn hard_failure(&self) -> bool {
        !self.params.admissible
            || !self.errors.is_empty()
            || self.hypotheses.as_ref().map_or(true, |h| !h.hard_passed())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mark = |ok: bool| if ok { "ok  " } else { "FAIL" };
        let _ = writeln!(out, "parameters (|varpi| bound {}):", self.params.bound);
        for c in &self.params.checks {
            let _ = writeln!(out, "  [{}] {}: {}", mark(c.passed), c.name, c.detail);
        }
        if let Some(h) = &self.hypotheses {
            let _ = writeln!(out, "feedback hypotheses:");
            for c in &h.checks {
                let sev = if c.hard { "hard" } else { "soft" };
                let ce = c.counterexample.map(|x| format!(" (at {x})")).unwrap_or_default();
                let _ = writeln!(out, "  [{}] {} ({sev}): {}{ce}", mark(c.passed), c.id, c.note);
            }
        }
        if let (Some(p), Some(e)) = (&self.profile, self.eps0) {
            let _ = writeln!(
                out,
                "profile: {:?} c = {} p = {} r = {}, eps0 = {e}",
                p.kind, p.c, p.p, p.r
            );
        }
        if let Some(k) = self.predicted_decay {
            let _ = writeln!(out, "predicted decay: {}", k.as_str());
        }
        for e in &self.errors {
            let _ = writeln!(out, "error: {e}");
        }
        let _ = writeln!(out, "{}", if self.hard_failure() { "INVALID" } else { "VALID" });
        out
    }
}

/// Parameter and hypothesis checks on a parsed file.
pub fn validate_scenario(file: &ScenarioFile) -> ConfigReport {
    let params = validate_params(&file.params());
    let mut report = ConfigReport {
        params,
        hypotheses: None,
        errors: Vec::new(),
        profile: None,
        eps0: None,
        predicted_decay: None,
    };
    match file.resolve() {
        Ok(sc) => {
            match check_hypotheses(&sc.sim.law, &default_sample_grid()) {
                Ok(h) => report.hypotheses = Some(h),
                Err(e) => report.errors.push(e.to_string()),
            }
            report.predicted_decay = Some(sc.sim.law.profile.decay_kind());
            report.profile = Some(sc.sim.law.profile.clone());
            report.eps0 = Some(sc.eps0);
        }
        Err(e) => report.errors.push(e.to_string()),
    }
    report
}

/// Parses and validates a file. Parse failures are returned as errors.
pub fn validate_config(path: &Path) -> Result<ConfigReport> {
    Ok(validate_scenario(&ScenarioFile::load(path)?))
}

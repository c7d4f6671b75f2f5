use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::{validate_scenario, ConfigReport, ScenarioFile};
use super::output;
use crate::decay::{self, Convexity, EnvelopeFit, RateFit};
use crate::dynamics::{simulate_with, Mode, StepFailure};
use crate::error::{Error, Result};
use crate::functionals::{dissipation_residuals, FunctionalSample};
use crate::model::DecayKind;
use crate::spatial::{assemble, Grid};

/// Relative per-sample increase of E or V still counted as non-increasing.
pub const MONOTONE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    StepFailure,
    AnalysisFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::StepFailure => 3,
            RunStatus::AnalysisFailure => 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NamedFit {
    pub series: String,
    pub fit: Option<RateFit>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnvelopeOutcome {
    pub fit: Option<EnvelopeFit>,
    pub feasible: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralSummary {
    pub gain: f64,
    pub max_real_part: f64,
    pub eigenvalue_count: usize,
    pub resolved_max_real_part: f64,
    /// 2·|resolved max Re λ|, the asymptotic decay rate of E seen in a
    /// time-domain run.
    pub energy_rate: f64,
}

/// Largest per-sample increases, relative to the initial value.
#[derive(Clone, Debug, Serialize)]
pub struct Monotonicity {
    pub e_max_increase: f64,
    pub v_max_increase: f64,
    pub e_non_increasing: bool,
    pub v_non_increasing: bool,
}

/// Residuals of the moment and shear conditions at x = 1 for the
/// interpolated initial data (reported, not enforced).
#[derive(Clone, Debug, Serialize)]
pub struct Compatibility {
    pub moment: f64,
    pub shear: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: ScenarioFile,
    pub config_hash: String,
    pub validation: ConfigReport,
    pub status: RunStatus,
    pub samples: usize,
    pub initial: Option<FunctionalSample>,
    #[serde(rename = "final")]
    pub last: Option<FunctionalSample>,
    pub compatibility: Compatibility,
    /// |E(T) − E(0)|/E(0)
    pub energy_drift: Option<f64>,
    pub max_residual_energy: Option<f64>,
    pub max_residual_lyapunov: Option<f64>,
    pub monotonicity: Option<Monotonicity>,
    pub fits: Vec<NamedFit>,
    pub envelope: Option<EnvelopeOutcome>,
    pub spectral: Option<SpectralSummary>,
    pub failure: Option<StepFailure>,
    pub trace_sha256: String,
    pub wall_clock_seconds: f64,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// Validates, simulates and analyses the scenario in `path`, writing
/// trace.csv, summary.json and (when requested) envelope.csv into `out`.
pub fn run(path: &Path, out: &Path) -> Result<RunSummary> {
    let file = ScenarioFile::load(path)?;
    run_scenario(&file, Some(out))
}

/// As [`run`] for an already parsed file; `out = None` skips all writes.
/// Validation failures are returned as configuration errors.
pub fn run_scenario(file: &ScenarioFile, out: Option<&Path>) -> Result<RunSummary> {
    let started = Instant::now();
    let validation = validate_scenario(file);
    if validation.hard_failure() {
        return Err(Error::Config(format!("scenario is invalid:\n{}", validation.render())));
    }
    let sc = file.resolve()?;
    let sim = &sc.sim;
    let ops = assemble(&sim.params, &Grid::new(sim.n_elements)?)?;
    let trace = simulate_with(&ops, sim, false)?;
    let samples = &trace.samples;
    let mut status = if trace.failure.is_some() {
        RunStatus::StepFailure
    } else {
        RunStatus::Ok
    };

    let y0 = sim.displacement.project(&ops.grid)?;
    let v0 = sim.velocity.project(&ops.grid)?;
    let tip = ops.evaluate(&y0, 1.0);
    let compatibility = Compatibility {
        moment: tip[2] + sim.law.damping(ops.tip_slope.apply(&v0)),
        shear: tip[3],
    };

    let first = samples.first().copied();
    let last = samples.last().copied();
    let energy_drift = match (first, last) {
        (Some(a), Some(b)) if a.e > 0.0 => Some((b.e - a.e).abs() / a.e),
        _ => None,
    };
    let residuals = dissipation_residuals(samples).ok();
    let monotonicity = first.filter(|_| samples.len() > 1).map(|f| {
        let inc = |g: fn(&FunctionalSample) -> f64, base: f64| {
            samples
                .windows(2)
                .map(|w| (g(&w[1]) - g(&w[0])) / base)
                .fold(f64::NEG_INFINITY, f64::max)
        };
        let e_inc = inc(|s| s.e, f.e.max(f64::MIN_POSITIVE));
        let v_inc = inc(|s| s.v, f.v.max(f64::MIN_POSITIVE));
        Monotonicity {
            e_max_increase: e_inc,
            v_max_increase: v_inc,
            e_non_increasing: e_inc <= MONOTONE_TOL,
            v_non_increasing: v_inc <= MONOTONE_TOL,
        }
    });

    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let mut fits = Vec::new();
    // the floor is an amplitude level; quadratic series get its square
    let mut push_fit = |name: &str, y: Vec<f64>, kind: DecayKind, floor: f64| {
        let r = decay::fit_rates_above(&t, &y, kind, sc.fit_drop, floor);
        fits.push(NamedFit {
            series: format!("{name}:{}", kind.as_str()),
            error: r.as_ref().err().map(|e| e.to_string()),
            fit: r.ok(),
        });
    };
    for &kind in &sc.rate_fits {
        push_fit("E0", samples.iter().map(|s| s.e0).collect(), kind, sc.fit_floor.powi(2));
    }
    if sim.mode == Mode::Coupled {
        push_fit(
            "state_norm",
            samples.iter().map(|s| (2.0 * s.e).sqrt()).collect(),
            DecayKind::Exponential,
            sc.fit_floor,
        );
        push_fit(
            "omega_error",
            samples.iter().map(|s| (s.omega - sim.params.varpi).abs()).collect(),
            DecayKind::Exponential,
            sc.fit_floor,
        );
    }

    let analysis = &file.analysis;
    let e0: Vec<f64> = samples.iter().map(|s| s.e0).collect();
    let envelope = analysis.envelope.then(|| {
        let r = if analysis.eps0_search {
            decay::calibrate_envelope_search(&t, &e0, &sim.law.profile)
        } else {
            Convexity::new(sim.law.profile.clone(), sc.eps0).and_then(|c| decay::calibrate_envelope(&t, &e0, &c))
        };
        match r {
            Ok(fit) => EnvelopeOutcome {
                feasible: fit.dominance_margin >= -1e-12 * fit.e0_initial,
                fit: Some(fit),
                error: None,
            },
            Err(e) => EnvelopeOutcome {
                fit: None,
                feasible: false,
                error: Some(e.to_string()),
            },
        }
    });
    if status == RunStatus::Ok && analysis.require_dominance && !envelope.as_ref().is_some_and(|e| e.feasible) {
        status = RunStatus::AnalysisFailure;
    }

    let spectral = if analysis.spectral {
        let gain = sim.law.damping.linear_gain().expect("checked when resolving");
        let s = decay::spectral_abscissa(&ops, &sim.params, gain)?;
        Some(SpectralSummary {
            gain,
            max_real_part: s.max_real_part,
            eigenvalue_count: s.eigenvalues.len(),
            resolved_max_real_part: s.resolved_max_real_part,
            energy_rate: 2.0 * s.resolved_max_real_part.abs(),
        })
    } else {
        None
    };

    let trace_text = output::trace_csv(samples);
    let summary = RunSummary {
        config: file.clone(),
        config_hash: output::content_hash(file),
        validation,
        status,
        samples: samples.len(),
        initial: first,
        last,
        compatibility,
        energy_drift,
        max_residual_energy: residuals.as_ref().map(|r| r.max_energy),
        max_residual_lyapunov: residuals.as_ref().map(|r| r.max_lyapunov),
        monotonicity,
        fits,
        envelope,
        spectral,
        failure: trace.failure.clone(),
        trace_sha256: output::sha256_hex(trace_text.as_bytes()),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("trace.csv"), &trace_text)?;
        if let Some(fit) = summary.envelope.as_ref().and_then(|e| e.fit.as_ref()) {
            std::fs::write(dir.join("envelope.csv"), output::envelope_csv(samples, fit)?)?;
        }
        output::write_json(&dir.join("summary.json"), &summary)?;
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(extra: &str) -> ScenarioFile {
        ScenarioFile::from_toml(&format!(
            r#"
schema_version = 1
[params]
varpi = 1.0
[law.damping]
kind = "linear"
c = 0.0
[grid]
n_elements = 8
[time]
dt = 0.01
horizon = 1.0
{extra}
"#
        ))
        .unwrap()
    }

    #[test]
    fn undamped_summary() {
        let s = run_scenario(&scenario(""), None).unwrap();
        assert_eq!(s.status, RunStatus::Ok);
        assert_eq!(s.samples, 11);
        assert!(s.energy_drift.unwrap() < 1e-10);
        assert!(s.monotonicity.as_ref().unwrap().e_non_increasing);
        assert_eq!(s.config_hash.len(), 64);
    }

    #[test]
    fn invalid_scenario_refuses_to_run() {
        let mut bad = scenario("");
        bad.params.varpi = 3.0;
        assert!(matches!(run_scenario(&bad, None), Err(Error::Config(_))));
    }

    #[test]
    fn damped_run_meets_dominance_requirement() {
        let mut f = scenario("[analysis]\nenvelope = true\nrequire_dominance = true\n");
        f.law.damping = super::super::config::DampingSpec::Linear { c: 0.5 };
        f.time.horizon = 5.0;
        let s = run_scenario(&f, None).unwrap();
        // E₀ of a damped run is dominated by some exponential envelope
        assert_eq!(s.status, RunStatus::Ok, "{:?}", s.envelope);
    }
}

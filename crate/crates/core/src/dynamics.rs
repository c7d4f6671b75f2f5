//! Newmark average-acceleration integration of the beam subsystem (ω ≡ ϖ)
//! and of the coupled beam/disk system.
//!
//! The boundary nonlinearity only acts through the scalar tip slope
//! velocity s = bᵀv. With the effective matrix K_eff = M + (dt²/4)·S(ω)
//! factored once, the implicit step reduces to the scalar equation
//!
//! ```text
//! s − s_lin + (dt/2)·EI·(bᵀK_eff⁻¹b)·f(s) = 0
//! ```
//!
//! which is monotone in s whenever f is non-decreasing.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalSample};
use crate::model::{DampingLaw, FeedbackLaw, PhysicalParams};
use crate::spatial::{self, assemble, shapes, BandedLdlt, Grid, Operators, SymBanded};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Beam alone, disk spinning at ϖ.
    Subsystem,
    /// Beam and disk with the torque feedback.
    Coupled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamState {
    pub t: f64,
    pub y: DVector<f64>,
    pub v: DVector<f64>,
    /// Consistent with (y, v, omega) through the semi-discrete equation.
    pub a: DVector<f64>,
    pub omega: f64,
}

impl BeamState {
    pub fn zeros(n: usize, omega: f64) -> Self {
        BeamState {
            t: 0.0,
            y: DVector::zeros(n),
            v: DVector::zeros(n),
            a: DVector::zeros(n),
            omega,
        }
    }
}

/// Solver knobs. Defaults follow the documented integration scheme.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepOptions {
    /// Relative tolerance of the beam/disk staggered iteration.
    pub coupling_tol: f64,
    pub max_subiterations: usize,
    /// Successive dt halvings tried after a failed step.
    pub max_halvings: usize,
    pub newton_max_iter: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        StepOptions {
            coupling_tol: 1e-10,
            max_subiterations: 25,
            max_halvings: 4,
            newton_max_iter: 100,
        }
    }
}

/// M·a = −(EI·K_b − ρω²·M0)·y − EI·f(bᵀv)·b
pub fn consistent_acceleration(
    y: &DVector<f64>,
    v: &DVector<f64>,
    omega: f64,
    ops: &Operators,
    law: &FeedbackLaw,
) -> DVector<f64> {
    let mut rhs = -ops.stiffness(omega).mul_vec(y);
    rhs[ops.tip_slope.index] -= ops.ei * law.damping(ops.tip_slope.apply(v));
    ops.solve_mass(&rhs)
}

/// dω/dt = [−γ(ω − ϖ) − 2ρω·∫y·y_t] / (I_d + ρ∫y²)
pub fn omega_rate(
    omega: f64,
    y: &DVector<f64>,
    v: &DVector<f64>,
    ops: &Operators,
    params: &PhysicalParams,
    law: &FeedbackLaw,
) -> f64 {
    let yv = ops.l2_mass.bilinear(y, v);
    let yy = ops.l2_mass.quad(y);
    (-law.torque(omega - params.varpi) - 2.0 * params.rho * omega * yv) / (params.id + params.rho * yy)
}

/// Root of s − s_lin + α·f(s) = 0 by safeguarded Newton inside the bracket
/// spanned by 0 and s_lin. Returns the root and the residual history.
fn solve_boundary(s_lin: f64, alpha: f64, f: &DampingLaw, max_iter: usize) -> std::result::Result<f64, Vec<f64>> {
    if s_lin == 0.0 {
        return Ok(0.0);
    }
    let g = |s: f64| s - s_lin + alpha * f.eval(s);
    let (mut lo, mut hi) = if s_lin > 0.0 { (0.0, s_lin) } else { (s_lin, 0.0) };
    let mut s = s_lin;
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let gs = g(s);
        history.push(gs);
        let scale = s.abs() + s_lin.abs() + alpha * f.eval(s).abs();
        if gs.abs() <= 4.0 * f64::EPSILON * scale {
            return Ok(s);
        }
        if gs > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            return Ok(s);
        }
        let d = 1.0 + alpha * f.derivative(s);
        let mut next = s - gs / d;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        s = next;
    }
    Err(history)
}

struct Effective {
    dt: f64,
    omega: f64,
    stiffness: SymBanded,
    factor: BandedLdlt,
    /// K_eff⁻¹·b
    w: DVector<f64>,
}

struct BeamUpdate {
    y: DVector<f64>,
    v: DVector<f64>,
    a: DVector<f64>,
}

/// Time stepper holding the cached effective factorization.
pub struct Integrator<'a> {
    ops: &'a Operators,
    params: &'a PhysicalParams,
    law: &'a FeedbackLaw,
    mode: Mode,
    opts: StepOptions,
    cache: Option<Effective>,
}

impl<'a> Integrator<'a> {
    pub fn new(ops: &'a Operators, params: &'a PhysicalParams, law: &'a FeedbackLaw, mode: Mode) -> Self {
        Integrator {
            ops,
            params,
            law,
            mode,
            opts: StepOptions::default(),
            cache: None,
        }
    }

    pub fn with_options(mut self, opts: StepOptions) -> Self {
        self.opts = opts;
        self
    }

    /// State at t = 0 with consistent acceleration. Subsystem runs pin ω to ϖ.
    pub fn initial_state(&self, y: DVector<f64>, v: DVector<f64>) -> BeamState {
        let omega = match self.mode {
            Mode::Subsystem => self.params.varpi,
            Mode::Coupled => self.params.omega0,
        };
        let a = consistent_acceleration(&y, &v, omega, self.ops, self.law);
        BeamState { t: 0.0, y, v, a, omega }
    }

    fn effective(&mut self, dt: f64, omega: f64) -> Result<&Effective> {
        let hit = matches!(&self.cache, Some(c) if c.dt == dt && c.omega == omega);
        if !hit {
            let stiffness = self.ops.stiffness(omega);
            let keff = SymBanded::combine(&[(1.0, &self.ops.mass), (0.25 * dt * dt, &stiffness)]);
            let factor = keff.factor()?;
            let w = factor.solve(&self.ops.tip_slope_vector());
            self.cache = Some(Effective {
                dt,
                omega,
                stiffness,
                factor,
                w,
            });
        }
        Ok(self.cache.as_ref().unwrap())
    }

    fn beam_update(&mut self, state: &BeamState, dt: f64, omega: f64) -> Result<BeamUpdate> {
        let ei = self.ops.ei;
        let tip = self.ops.tip_slope.index;
        let law = self.law;
        let max_iter = self.opts.newton_max_iter;
        let t = state.t;
        let eff = self.effective(dt, omega)?;
        let y_pred = &state.y + &state.v * dt + &state.a * (0.25 * dt * dt);
        let v_pred = &state.v + &state.a * (0.5 * dt);
        let a_lin = -eff.factor.solve(&eff.stiffness.mul_vec(&y_pred));
        let s_lin = v_pred[tip] + 0.5 * dt * a_lin[tip];
        let alpha = 0.5 * dt * ei * eff.w[tip];
        let s = solve_boundary(s_lin, alpha, &law.damping, max_iter).map_err(|residuals| Error::Step {
            t,
            reason: format!("boundary Newton did not converge (s_lin = {s_lin:e})"),
            residuals,
        })?;
        let a = a_lin - &eff.w * (ei * law.damping(s));
        let y = y_pred + &a * (0.25 * dt * dt);
        let v = v_pred + &a * (0.5 * dt);
        Ok(BeamUpdate { y, v, a })
    }

    fn step_once(&mut self, state: &BeamState, dt: f64) -> Result<BeamState> {
        match self.mode {
            Mode::Subsystem => {
                let u = self.beam_update(state, dt, self.params.varpi)?;
                Ok(BeamState {
                    t: state.t + dt,
                    y: u.y,
                    v: u.v,
                    a: u.a,
                    omega: self.params.varpi,
                })
            }
            Mode::Coupled => {
                let (ops, params, law) = (self.ops, self.params, self.law);
                let g0 = omega_rate(state.omega, &state.y, &state.v, ops, params, law);
                let mut omega = state.omega + dt * g0;
                let mut history = Vec::new();
                for _ in 0..self.opts.max_subiterations {
                    let u = self.beam_update(state, dt, omega)?;
                    let g1 = omega_rate(omega, &u.y, &u.v, ops, params, law);
                    let next = state.omega + 0.5 * dt * (g0 + g1);
                    let change = (next - omega).abs();
                    history.push(change);
                    if change <= self.opts.coupling_tol * next.abs() || change == 0.0 {
                        return Ok(BeamState {
                            t: state.t + dt,
                            y: u.y,
                            v: u.v,
                            a: u.a,
                            omega,
                        });
                    }
                    omega = next;
                }
                Err(Error::Step {
                    t: state.t,
                    reason: format!(
                        "beam/disk iteration did not reach relative tolerance {:e} in {} sweeps",
                        self.opts.coupling_tol, self.opts.max_subiterations
                    ),
                    residuals: history,
                })
            }
        }
    }

    /// One step of size `dt`, retried as 2, 4, … substeps on failure.
    pub fn step(&mut self, state: &BeamState, dt: f64) -> Result<BeamState> {
        if !(dt > 0.0) {
            return Err(Error::Config(format!("dt must be > 0, got {dt}")));
        }
        self.step_with_halvings(state, dt, 0)
    }

    fn step_with_halvings(&mut self, state: &BeamState, dt: f64, depth: usize) -> Result<BeamState> {
        match self.step_once(state, dt) {
            Ok(s) => Ok(s),
            Err(e @ Error::Step { .. }) if depth < self.opts.max_halvings => {
                let half = 0.5 * dt;
                let mid = self.step_with_halvings(state, half, depth + 1).map_err(|_| e)?;
                let mut end = self.step_with_halvings(&mid, half, depth + 1)?;
                end.t = state.t + dt;
                Ok(end)
            }
            Err(e) => Err(e),
        }
    }
}

/// One implicit step from `state`.
pub fn step(
    state: &BeamState,
    dt: f64,
    mode: Mode,
    ops: &Operators,
    params: &PhysicalParams,
    law: &FeedbackLaw,
) -> Result<BeamState> {
    Integrator::new(ops, params, law, mode).step(state, dt)
}

/// Catalog of initial displacement / velocity shapes. All satisfy the
/// clamped conditions at x = 0 by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Zero,
    /// First clamped-free mode scaled to tip value `amplitude`.
    FirstMode { amplitude: f64 },
    /// amplitude·x²·(x − 1)²
    Bump { amplitude: f64 },
    /// Nodal values and slopes at the free nodes x₁ … x_N.
    Tabulated { values: Vec<f64>, slopes: Vec<f64> },
}

impl Shape {
    pub fn project(&self, grid: &Grid) -> Result<DVector<f64>> {
        match self {
            Shape::Zero => Ok(DVector::zeros(grid.dof_count())),
            Shape::FirstMode { amplitude } => Ok(spatial::interpolate(grid, |x| {
                let (v, d) = shapes::cantilever_mode(1, x);
                (amplitude * v, amplitude * d)
            })),
            Shape::Bump { amplitude } => Ok(spatial::interpolate(grid, |x| shapes::bump(*amplitude, x))),
            Shape::Tabulated { values, slopes } => {
                let n = grid.n_elements();
                if values.len() != n || slopes.len() != n {
                    return Err(Error::Config(format!(
                        "tabulated initial data needs {n} values and {n} slopes (free nodes), got {} and {}",
                        values.len(),
                        slopes.len()
                    )));
                }
                Ok(DVector::from_iterator(
                    2 * n,
                    values.iter().zip(slopes).flat_map(|(v, s)| [*v, *s]),
                ))
            }
        }
    }

    pub fn negated(&self) -> Shape {
        match self {
            Shape::Zero => Shape::Zero,
            Shape::FirstMode { amplitude } => Shape::FirstMode { amplitude: -amplitude },
            Shape::Bump { amplitude } => Shape::Bump { amplitude: -amplitude },
            Shape::Tabulated { values, slopes } => Shape::Tabulated {
                values: values.iter().map(|v| -v).collect(),
                slopes: slopes.iter().map(|v| -v).collect(),
            },
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub params: PhysicalParams,
    pub law: FeedbackLaw,
    pub n_elements: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Record a sample every this many steps (the last step is always kept).
    pub sample_every: usize,
    pub mode: Mode,
    pub displacement: Shape,
    pub velocity: Shape,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("time.dt must be > 0, got {}", self.dt)));
        }
        if !(self.horizon >= 10.0 * self.dt) || !self.horizon.is_finite() {
            return Err(Error::Config(format!(
                "time.horizon must be at least 10*dt, got {} with dt {}",
                self.horizon, self.dt
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("time.sample_every must be >= 1".into()));
        }
        Grid::new(self.n_elements)?;
        self.law.damping.validate()?;
        self.law.torque.validate()?;
        Ok(())
    }

    pub fn step_count(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepFailure {
    pub t: f64,
    pub reason: String,
    pub residuals: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub config: SimConfig,
    pub samples: Vec<FunctionalSample>,
    /// Full states at the sample times, when requested.
    pub states: Vec<BeamState>,
    pub failure: Option<StepFailure>,
}

impl Trace {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }
}

/// Assembles operators for `config` and integrates to the horizon.
pub fn simulate(config: &SimConfig, record_states: bool) -> Result<Trace> {
    config.validate()?;
    let ops = assemble(&config.params, &Grid::new(config.n_elements)?)?;
    simulate_with(&ops, config, record_states)
}

/// Integrates with pre-assembled operators. Step failures end the run early
/// and are reported in [`Trace::failure`].
pub fn simulate_with(ops: &Operators, config: &SimConfig, record_states: bool) -> Result<Trace> {
    config.validate()?;
    if ops.grid.n_elements() != config.n_elements {
        return Err(Error::Config("operators were assembled on a different grid".into()));
    }
    let (params, law) = (&config.params, &config.law);
    let y0 = config.displacement.project(&ops.grid)?;
    let v0 = config.velocity.project(&ops.grid)?;
    let mut integ = Integrator::new(ops, params, law, config.mode);
    let mut state = integ.initial_state(y0, v0);
    let steps = config.step_count();
    let mut trace = Trace {
        config: config.clone(),
        samples: vec![functionals::sample(&state, ops, params, law)],
        states: Vec::new(),
        failure: None,
    };
    if record_states {
        trace.states.push(state.clone());
    }
    for k in 1..=steps {
        match integ.step(&state, config.dt) {
            Ok(mut next) => {
                next.t = k as f64 * config.dt;
                state = next;
            }
            Err(Error::Step { t, reason, residuals }) => {
                trace.failure = Some(StepFailure { t, reason, residuals });
                break;
            }
            Err(e) => return Err(e),
        }
        if k % config.sample_every == 0 || k == steps {
            trace.samples.push(functionals::sample(&state, ops, params, law));
            if record_states {
                trace.states.push(state.clone());
            }
        }
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::energy_e;

    fn ops(n: usize, varpi: f64) -> (Operators, PhysicalParams) {
        let p = PhysicalParams::unit(varpi);
        (assemble(&p, &Grid::new(n).unwrap()).unwrap(), p)
    }

    #[test]
    fn zero_state_has_zero_acceleration() {
        let (ops, _) = ops(8, 1.0);
        let z = DVector::zeros(16);
        let a = consistent_acceleration(&z, &z, 1.0, &ops, &FeedbackLaw::linear(1.0, 1.0));
        assert_eq!(a.amax(), 0.0);
    }

    #[test]
    fn static_solution_gives_load_acceleration() {
        let (ops, _) = ops(16, 0.0);
        let y = spatial::static_solve(&ops, &spatial::Load::Uniform(1.0)).unwrap();
        let f = spatial::load_vector(&ops.grid, &spatial::Load::Uniform(1.0));
        let z = DVector::zeros(32);
        let a = consistent_acceleration(&y, &z, 0.0, &ops, &FeedbackLaw::linear(0.0, 1.0));
        let residual = ops.mass.mul_vec(&a) + f;
        assert!(residual.amax() < 1e-10);
    }

    #[test]
    fn boundary_force_enters_tip_slope_row() {
        let (ops, _) = ops(4, 0.0);
        let mut v = DVector::zeros(8);
        v[ops.tip_slope.index] = 0.5;
        let z = DVector::zeros(8);
        let a = consistent_acceleration(&z, &v, 0.0, &ops, &FeedbackLaw::linear(2.0, 1.0));
        let force = -ops.mass.mul_vec(&a);
        let mut expected = DVector::zeros(8);
        expected[7] = 1.0;
        assert!((force - expected).amax() < 1e-12);
    }

    #[test]
    fn undamped_step_conserves_energy() {
        let (ops, p) = ops(16, 1.0);
        let law = FeedbackLaw::linear(0.0, 1.0);
        let mut integ = Integrator::new(&ops, &p, &law, Mode::Subsystem);
        let y = Shape::FirstMode { amplitude: 0.3 }.project(&ops.grid).unwrap();
        let v = Shape::Bump { amplitude: 2.0 }.project(&ops.grid).unwrap();
        let s0 = integ.initial_state(y, v);
        let e0 = energy_e(&s0, &ops, &p);
        let mut s = s0;
        for _ in 0..1000 {
            s = integ.step(&s, 1e-3).unwrap();
        }
        // exact in exact arithmetic; roundoff only
        let e1 = energy_e(&s, &ops, &p);
        assert!(((e1 - e0) / e0).abs() < 1e-10, "{e0} {e1}");
    }

    #[test]
    fn damped_step_dissipates() {
        let (ops, p) = ops(16, 1.0);
        let law = FeedbackLaw::linear(0.5, 1.0);
        let mut integ = Integrator::new(&ops, &p, &law, Mode::Subsystem);
        let y = Shape::FirstMode { amplitude: 0.3 }.project(&ops.grid).unwrap();
        let v = Shape::FirstMode { amplitude: 1.0 }.project(&ops.grid).unwrap();
        let s0 = integ.initial_state(y, v);
        let s1 = integ.step(&s0, 1e-3).unwrap();
        assert!(energy_e(&s1, &ops, &p) < energy_e(&s0, &ops, &p));
    }

    #[test]
    fn acceleration_stays_consistent() {
        let (ops, p) = ops(16, 1.0);
        let law = FeedbackLaw::power(1.0, 3.0, 1.0);
        let mut integ = Integrator::new(&ops, &p, &law, Mode::Subsystem);
        let y = Shape::Bump { amplitude: 4.0 }.project(&ops.grid).unwrap();
        let mut s = integ.initial_state(y, DVector::zeros(32));
        for _ in 0..50 {
            s = integ.step(&s, 1e-3).unwrap();
        }
        let a = consistent_acceleration(&s.y, &s.v, s.omega, &ops, &law);
        assert!((a - &s.a).amax() <= 1e-8 * s.a.amax());
    }

    #[test]
    fn disk_relaxes_exponentially_without_beam_motion() {
        let (ops, mut p) = ops(8, 1.0);
        p.omega0 = 3.0;
        p.id = 2.0;
        let law = FeedbackLaw::linear(1.0, 1.0);
        let mut integ = Integrator::new(&ops, &p, &law, Mode::Coupled);
        let mut s = integ.initial_state(DVector::zeros(16), DVector::zeros(16));
        let dt = 1e-2;
        let steps = 200;
        for _ in 0..steps {
            s = integ.step(&s, dt).unwrap();
        }
        assert_eq!(s.y.amax(), 0.0);
        let t = steps as f64 * dt;
        let exact = 1.0 + 2.0 * (-t / 2.0).exp();
        // trapezoid: local error dt³/12·|ω'''|, global O(dt²)
        assert!((s.omega - exact).abs() < 2.0 * dt * dt);
    }

    #[test]
    fn newton_matches_scalar_root() {
        let f = DampingLaw::Power { c: 1.0, p: 3.0 };
        for &(s_lin, alpha) in &[(0.7, 0.3), (-2.0, 1.0), (1.0, 10.0), (1e-8, 0.5)] {
            let s = solve_boundary(s_lin, alpha, &f, 100).unwrap();
            assert!((s - s_lin + alpha * f.eval(s)).abs() < 1e-14 * s_lin.abs().max(1.0));
            let m = solve_boundary(-s_lin, alpha, &f, 100).unwrap();
            assert_eq!(m, -s);
        }
    }

    #[test]
    fn simulate_records_last_step_and_cadence() {
        let cfg = SimConfig {
            params: PhysicalParams::unit(0.5),
            law: FeedbackLaw::linear(0.5, 1.0),
            n_elements: 8,
            dt: 1e-2,
            horizon: 0.55,
            sample_every: 10,
            mode: Mode::Subsystem,
            displacement: Shape::FirstMode { amplitude: 0.1 },
            velocity: Shape::Zero,
        };
        let tr = simulate(&cfg, true).unwrap();
        let t = tr.times();
        assert_eq!(t.len(), 7);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert!((t[6] - 0.55).abs() < 1e-12);
        assert_eq!(tr.states.len(), 7);
    }

    #[test]
    fn equilibrium_stays_at_rest() {
        let cfg = SimConfig {
            params: PhysicalParams::unit(1.0),
            law: FeedbackLaw::linear(1.0, 1.0),
            n_elements: 8,
            dt: 1e-2,
            horizon: 1.0,
            sample_every: 5,
            mode: Mode::Coupled,
            displacement: Shape::Zero,
            velocity: Shape::Zero,
        };
        let tr = simulate(&cfg, true).unwrap();
        for s in &tr.states {
            assert_eq!(s.y.amax(), 0.0);
            assert_eq!(s.v.amax(), 0.0);
            assert_eq!(s.omega, 1.0);
        }
    }

    #[test]
    fn invalid_time_settings_rejected() {
        let mut cfg = SimConfig {
            params: PhysicalParams::unit(1.0),
            law: FeedbackLaw::linear(1.0, 1.0),
            n_elements: 8,
            dt: 0.0,
            horizon: 1.0,
            sample_every: 1,
            mode: Mode::Subsystem,
            displacement: Shape::Zero,
            velocity: Shape::Zero,
        };
        assert!(simulate(&cfg, false).is_err());
        cfg.dt = 0.5;
        assert!(simulate(&cfg, false).is_err());
        cfg.dt = 1e-2;
        cfg.displacement = Shape::Tabulated {
            values: vec![0.0; 3],
            slopes: vec![0.0; 3],
        };
        assert!(matches!(simulate(&cfg, false), Err(Error::Config(_))));
    }
}

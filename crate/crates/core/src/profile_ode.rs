//! Generating curves of rotationally invariant CMC hypersurfaces.
//!
//! An arclength-parameterized curve `(x(s), t(s))` in the half-plane
//! `x > 0`, with `sigma` the angle between the tangent and `d/dt`, generates a
//! hypersurface of constant mean curvature `H` in `H^n` iff
//!
//! ```text
//! x'     = sin(sigma)
//! t'     = cos(sigma)
//! sigma' = (2n-1) cos^3/x^3 + 2(n-1) sin^2 cos/x - 2nH (x^2 sin^2 + cos^2)^{3/2}/x^2
//! ```
//!
//! and the energy `x^{2n-1} cos / sqrt(x^2 sin^2 + cos^2) - H x^{2n}` is a
//! first integral. [`integrate`] solves the system with an embedded
//! Runge-Kutta 5(4) pair and refuses to return trajectories whose energy
//! drifts.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_AXIS_EPSILON: f64 = 1e-6;
pub const DEFAULT_DRIFT_TOLERANCE: f64 = 1e-8;

const EVENT_S_TOLERANCE: f64 = 1e-12;
const CRITICAL_SIN_TOLERANCE: f64 = 1e-9;
const START_EVENT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub sigma: f64,
}

impl ProfileState {
    pub fn new(x: f64, t: f64, sigma: f64) -> Self {
        ProfileState { s: 0.0, x, t, sigma }
    }
}

/// `(x', t', sigma')` with respect to arclength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub dx: f64,
    pub dt: f64,
    pub dsigma: f64,
}

/// Right-hand side of a profile system. The CMC system is [`CmcSystem`];
/// the trait exists so that verification code can run the integrator on
/// perturbed systems.
pub trait ProfileSystem {
    fn n(&self) -> usize;
    fn mean_curvature(&self) -> f64;
    fn sigma_rate(&self, x: f64, sigma: f64) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmcSystem {
    pub n: usize,
    pub h: f64,
}

impl ProfileSystem for CmcSystem {
    fn n(&self) -> usize {
        self.n
    }

    fn mean_curvature(&self) -> f64 {
        self.h
    }

    fn sigma_rate(&self, x: f64, sigma: f64) -> f64 {
        sigma_rate(x, sigma, self.n, self.h)
    }
}

fn sigma_rate(x: f64, sigma: f64, n: usize, h: f64) -> f64 {
    let (sin, cos) = sigma.sin_cos();
    let nf = n as f64;
    let w = x * x * sin * sin + cos * cos;
    (2.0 * nf - 1.0) * cos.powi(3) / x.powi(3) + 2.0 * (nf - 1.0) * sin * sin * cos / x
        - 2.0 * nf * h * w * w.sqrt() / (x * x)
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidParameter("n must be >= 1".into()))
    } else {
        Ok(())
    }
}

pub fn rhs(state: &ProfileState, n: usize, h: f64) -> Result<Derivative> {
    check_n(n)?;
    if !(state.x >= DEFAULT_AXIS_EPSILON) {
        return Err(Error::AxisSingularity {
            x: state.x,
            epsilon: DEFAULT_AXIS_EPSILON,
        });
    }
    let (sin, cos) = state.sigma.sin_cos();
    Ok(Derivative {
        dx: sin,
        dt: cos,
        dsigma: sigma_rate(state.x, state.sigma, n, h),
    })
}

/// The first integral `x^{2n-1} cos / sqrt(x^2 sin^2 + cos^2) - H x^{2n}`.
pub fn energy(state: &ProfileState, n: usize, h: f64) -> Result<f64> {
    check_n(n)?;
    if !(state.x > 0.0) {
        return Err(Error::AxisSingularity {
            x: state.x,
            epsilon: 0.0,
        });
    }
    Ok(energy_unchecked(state.x, state.sigma, n, h))
}

fn energy_unchecked(x: f64, sigma: f64, n: usize, h: f64) -> f64 {
    let (sin, cos) = sigma.sin_cos();
    let p = x.powi(2 * n as i32 - 1);
    p * cos / (x * x * sin * sin + cos * cos).sqrt() - h * p * x
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// `x' = sin(sigma)` changes sign.
    CriticalRadius,
    /// `t' = cos(sigma)` changes sign.
    VerticalTangent,
    /// `sigma'` changes sign (inflection of the graph `x(t)`).
    Inflection,
    /// `x` reached the axis tolerance.
    AxisContact,
    EnergyDrift,
}

impl EventKind {
    const TRACKED: [EventKind; 4] = [
        EventKind::CriticalRadius,
        EventKind::VerticalTangent,
        EventKind::Inflection,
        EventKind::AxisContact,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub state: ProfileState,
}

/// Stop integration at the `occurrence`-th event of `kind` (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StopCondition {
    pub kind: EventKind,
    pub occurrence: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub initial_step: f64,
    pub axis_epsilon: f64,
    pub max_arclength: f64,
    /// Relative drift `|E(s) - E(0)| / (1 + |E(0)|)` that aborts integration.
    pub drift_tolerance: f64,
    pub stop: Vec<StopCondition>,
    pub max_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.1,
            initial_step: 1e-3,
            axis_epsilon: DEFAULT_AXIS_EPSILON,
            max_arclength: 50.0,
            drift_tolerance: DEFAULT_DRIFT_TOLERANCE,
            stop: Vec::new(),
            max_steps: 2_000_000,
        }
    }
}

impl SolveConfig {
    pub fn with_arclength(mut self, s: f64) -> Self {
        self.max_arclength = s;
        self
    }

    pub fn stop_at(mut self, kind: EventKind, occurrence: usize) -> Self {
        self.stop.push(StopCondition { kind, occurrence });
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("initial_step", self.initial_step),
            ("axis_epsilon", self.axis_epsilon),
            ("drift_tolerance", self.drift_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        if !(self.max_arclength >= 0.0) {
            return Err(Error::InvalidParameter("max_arclength must be >= 0".into()));
        }
        if self.stop.iter().any(|c| c.occurrence == 0) {
            return Err(Error::InvalidParameter("stop occurrences are 1-based".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxArclength,
    AxisContact,
    Stop(EventKind),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    pub h: f64,
    pub energy: f64,
    pub samples: Vec<ProfileState>,
    /// `sigma'` at each sample, used for dense output.
    #[serde(skip)]
    pub rates: Vec<f64>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub diagnostics: Vec<String>,
}

impl Trajectory {
    pub fn first(&self) -> &ProfileState {
        &self.samples[0]
    }

    pub fn last(&self) -> &ProfileState {
        self.samples.last().expect("trajectories are never empty")
    }

    pub fn arclength(&self) -> f64 {
        self.last().s - self.first().s
    }

    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// Largest `|E(s) - E(0)|` over the samples.
    pub fn max_energy_drift(&self) -> f64 {
        self.samples
            .iter()
            .filter(|p| p.x > 0.0)
            .map(|p| (energy_unchecked(p.x, p.sigma, self.n, self.h) - self.energy).abs())
            .fold(0.0, f64::max)
    }

    pub fn sample_energy(&self, i: usize) -> f64 {
        let p = &self.samples[i];
        energy_unchecked(p.x, p.sigma, self.n, self.h)
    }

    /// Cubic Hermite interpolation of `(x, t, sigma)` between samples.
    pub fn state_at(&self, s: f64) -> Option<ProfileState> {
        let first = self.first().s;
        let last = self.last().s;
        if !(s >= first && s <= last) {
            return None;
        }
        let i = match self
            .samples
            .binary_search_by(|p| p.s.total_cmp(&s))
        {
            Ok(i) => return Some(self.samples[i]),
            Err(i) => i - 1,
        };
        let (p, q) = (&self.samples[i], &self.samples[i + 1]);
        let h = q.s - p.s;
        let u = (s - p.s) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let herm = |a: f64, da: f64, b: f64, db: f64| h00 * a + h10 * h * da + h01 * b + h11 * h * db;
        Some(ProfileState {
            s,
            x: herm(p.x, p.sigma.sin(), q.x, q.sigma.sin()),
            t: herm(p.t, p.sigma.cos(), q.t, q.sigma.cos()),
            sigma: herm(p.sigma, self.rates[i], q.sigma, self.rates[i + 1]),
        })
    }

    /// Derivative of the Hermite interpolant of `sigma` at `s`.
    pub fn sigma_rate_at(&self, s: f64) -> Option<f64> {
        let i = match self.samples.binary_search_by(|p| p.s.total_cmp(&s)) {
            Ok(i) => return Some(self.rates[i]),
            Err(0) => return None,
            Err(i) if i >= self.samples.len() => return None,
            Err(i) => i - 1,
        };
        let (p, q) = (&self.samples[i], &self.samples[i + 1]);
        let h = q.s - p.s;
        let u = (s - p.s) / h;
        let d00 = 6.0 * u * u - 6.0 * u;
        let d10 = 3.0 * u * u - 4.0 * u + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * u * u - 2.0 * u;
        Some(
            (d00 * p.sigma + d01 * q.sigma) / h
                + d10 * self.rates[i]
                + d11 * self.rates[i + 1],
        )
    }

    /// CSV with header `s,x,t,sigma,energy`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "s,x,t,sigma,energy")?;
        for (i, p) in self.samples.iter().enumerate() {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.s,
                p.x,
                p.t,
                p.sigma,
                self.sample_energy(i)
            )?;
        }
        Ok(())
    }

    fn is_critical(p: &ProfileState) -> bool {
        p.sigma.sin().abs() <= CRITICAL_SIN_TOLERANCE
    }

    fn is_cylinder(&self) -> bool {
        self.samples.iter().all(Self::is_critical)
    }
}

/// Smallest radius to which an `E = 0` profile (the sphere) can be traced
/// before rounding in the energy takes over.
///
/// Near the axis a perturbation of `cos(sigma)` grows like `x^{-2(n-1)}`, so
/// an energy error `dE` turns the computed curve back at a radius of about
/// `|dE|^{1/(2n-1)} / |H|`. With `dE` around `1e-12` this is negligible for
/// `n = 1` and about `1e-4 / |H|` for `n = 2`; the returned value keeps a
/// factor of ten above it.
pub fn near_axis_limit(n: usize, h: f64) -> f64 {
    if n <= 1 || h == 0.0 {
        return 0.0;
    }
    10.0 * 1e-12f64.powf(1.0 / (2 * n - 1) as f64) / h.abs()
}

/// Integrates the CMC profile system from `initial` (its `s` is kept).
pub fn integrate(initial: &ProfileState, n: usize, h: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    integrate_system(&CmcSystem { n, h }, initial, cfg)
}

/// Integrates an arbitrary profile system; the monitored energy is always
/// the CMC first integral for `(system.n(), system.mean_curvature())`.
pub fn integrate_system(
    system: &dyn ProfileSystem,
    initial: &ProfileState,
    cfg: &SolveConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let n = system.n();
    check_n(n)?;
    let h_mean = system.mean_curvature();
    if !(initial.x > cfg.axis_epsilon) {
        return Err(Error::AxisSingularity {
            x: initial.x,
            epsilon: cfg.axis_epsilon,
        });
    }
    Solver::new(system, initial, cfg, n, h_mean).run()
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Vec3 = [f64; 3];

struct Step {
    y: Vec3,
    error: f64,
    rate_end: f64,
}

struct Solver<'a> {
    system: &'a dyn ProfileSystem,
    cfg: &'a SolveConfig,
    n: usize,
    h_mean: f64,
    s0: f64,
    t0: f64,
    x0: f64,
    sigma0: f64,
    energy0: f64,
}

impl<'a> Solver<'a> {
    fn new(
        system: &'a dyn ProfileSystem,
        initial: &ProfileState,
        cfg: &'a SolveConfig,
        n: usize,
        h_mean: f64,
    ) -> Self {
        Solver {
            system,
            cfg,
            n,
            h_mean,
            s0: initial.s,
            t0: initial.t,
            x0: initial.x,
            sigma0: initial.sigma,
            energy0: energy_unchecked(initial.x, initial.sigma, n, h_mean),
        }
    }

    /// `y = (x, t - t0, sigma)`; the height is integrated relative to its
    /// initial value so that vertical translations commute with the solver.
    fn field(&self, y: &Vec3) -> Vec3 {
        let (sin, cos) = y[2].sin_cos();
        [sin, cos, self.system.sigma_rate(y[0], y[2])]
    }

    fn step(&self, y: &Vec3, k1: &Vec3, h: f64) -> Option<Step> {
        let mut k = [[0.0; 3]; 7];
        k[0] = *k1;
        for stage in 1..7 {
            let mut ys = *y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    for c in 0..3 {
                        ys[c] += h * a * kj[c];
                    }
                }
            }
            if !(ys[0] > 0.0) || ys.iter().any(|v| !v.is_finite()) {
                return None;
            }
            k[stage] = self.field(&ys);
            if k[stage].iter().any(|v| !v.is_finite()) {
                return None;
            }
        }
        // The seventh stage is evaluated at the 5th-order solution (FSAL).
        let mut y_new = *y;
        for (j, kj) in k.iter().enumerate().take(6) {
            for c in 0..3 {
                y_new[c] += h * A[6][j] * kj[c];
            }
        }
        let mut error: f64 = 0.0;
        for c in 0..3 {
            let e: f64 = (0..7).map(|j| ERR[j] * k[j][c]).sum::<f64>() * h;
            // The angle is unwrapped, so its magnitude says nothing about
            // the attainable accuracy; it is measured on the unit scale.
            let magnitude = if c == 2 { 1.0 } else { y[c].abs().max(y_new[c].abs()) };
            let scale = self.cfg.abs_tol + self.cfg.rel_tol * magnitude;
            error = error.max((e / scale).abs());
        }
        Some(Step {
            y: y_new,
            error,
            rate_end: k[6][2],
        })
    }

    fn state(&self, s: f64, y: &Vec3) -> ProfileState {
        ProfileState {
            s,
            x: y[0],
            t: self.t0 + y[1],
            sigma: y[2],
        }
    }

    fn event_value(&self, kind: EventKind, y: &Vec3, rate: f64) -> f64 {
        match kind {
            EventKind::CriticalRadius => y[2].sin(),
            EventKind::VerticalTangent => y[2].cos(),
            EventKind::Inflection => rate,
            EventKind::AxisContact => y[0] - self.cfg.axis_epsilon,
            EventKind::EnergyDrift => 0.0,
        }
    }

    /// Bisection on fresh Runge-Kutta steps from the step start. `end` is
    /// the accepted full step, on the far side of the sign change.
    fn locate(&self, kind: EventKind, y: &Vec3, k1: &Vec3, g0: f64, end: (f64, Vec3, f64)) -> (f64, Vec3, f64) {
        let mut lo = 0.0;
        let mut hi = end;
        while hi.0 - lo > EVENT_S_TOLERANCE {
            let mid = 0.5 * (lo + hi.0);
            match self.step(y, k1, mid) {
                Some(st) => {
                    let g = self.event_value(kind, &st.y, st.rate_end);
                    if g == 0.0 {
                        return (mid, st.y, st.rate_end);
                    }
                    if g.signum() == g0.signum() {
                        lo = mid;
                    } else {
                        hi = (mid, st.y, st.rate_end);
                    }
                }
                None => hi.0 = mid,
            }
        }
        if hi.0 != end.0 && self.step(y, k1, hi.0).is_none() {
            return end;
        }
        hi
    }

    fn run(&self) -> Result<Trajectory> {
        let cfg = self.cfg;
        let s_end = self.s0 + cfg.max_arclength;
        let mut y = [self.x0, 0.0, self.sigma0];
        let mut s = self.s0;
        let mut k1 = self.field(&y);
        let mut traj = Trajectory {
            n: self.n,
            h: self.h_mean,
            energy: self.energy0,
            samples: vec![self.state(s, &y)],
            rates: vec![k1[2]],
            events: Vec::new(),
            termination: Termination::MaxArclength,
            diagnostics: Vec::new(),
        };

        let mut last_sign: Vec<Option<f64>> = EventKind::TRACKED
            .iter()
            .map(|&kind| {
                // An angle such as pi starts on the event surface up to
                // rounding; its sign is taken from the first step instead.
                let g = self.event_value(kind, &y, k1[2]);
                if g.abs() <= START_EVENT_TOLERANCE {
                    None
                } else {
                    nonzero_sign(g)
                }
            })
            .collect();
        let mut counts = [0usize; 4];
        let drift_limit = cfg.drift_tolerance * (1.0 + self.energy0.abs());

        let mut h = cfg.initial_step.min(cfg.max_step);
        let mut err_prev: f64 = 1.0;
        let mut steps = 0usize;
        while s < s_end {
            steps += 1;
            if steps > cfg.max_steps {
                return Err(Error::StepSizeUnderflow { s });
            }
            let mut h_try = h.min(cfg.max_step).min(s_end - s);
            if h_try <= 1e-14 * s.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { s });
            }
            let Some(step) = self.step(&y, &k1, h_try) else {
                h = 0.25 * h_try;
                continue;
            };
            if step.error > 1.0 {
                let fac = (0.9 * step.error.powf(-0.2)).max(0.2);
                h = h_try * fac;
                continue;
            }
            let last_step = s + h_try >= s_end;
            if last_step {
                h_try = s_end - s;
            }

            // Events inside (s, s + h_try].
            let mut found: Vec<(f64, usize, Vec3, f64)> = Vec::new();
            for (idx, &kind) in EventKind::TRACKED.iter().enumerate() {
                let g1 = self.event_value(kind, &step.y, step.rate_end);
                let new_sign = nonzero_sign(g1);
                if let (Some(old), Some(new)) = (last_sign[idx], new_sign) {
                    if old != new {
                        let g0 = self.event_value(kind, &y, k1[2]);
                        let (hs, ys, rs) = if g0 == 0.0 {
                            (0.0, y, k1[2])
                        } else {
                            self.locate(kind, &y, &k1, g0, (h_try, step.y, step.rate_end))
                        };
                        found.push((hs, idx, ys, rs));
                    }
                }
                if new_sign.is_some() {
                    last_sign[idx] = new_sign;
                }
            }
            found.sort_by(|a, b| a.0.total_cmp(&b.0));

            let mut terminal: Option<(f64, Vec3, f64, Termination)> = None;
            for (hs, idx, ys, rs) in found {
                let kind = EventKind::TRACKED[idx];
                counts[idx] += 1;
                let state = self.state(s + hs, &ys);
                traj.events.push(Event { kind, state });
                let stop = kind == EventKind::AxisContact
                    || cfg
                        .stop
                        .iter()
                        .any(|c| c.kind == kind && c.occurrence == counts[idx]);
                if stop {
                    let why = if kind == EventKind::AxisContact {
                        Termination::AxisContact
                    } else {
                        Termination::Stop(kind)
                    };
                    terminal = Some((hs, ys, rs, why));
                    break;
                }
                if hs > 0.0 && hs < h_try {
                    traj.samples.push(state);
                    traj.rates.push(rs);
                }
            }

            let (h_done, y_new, rate_new) = match terminal {
                Some((hs, ys, rs, why)) => {
                    traj.termination = why;
                    (hs, ys, rs)
                }
                None => (h_try, step.y, step.rate_end),
            };
            if h_done > 0.0 {
                s += h_done;
                y = y_new;
                traj.samples.push(self.state(s, &y));
                traj.rates.push(rate_new);
            }

            let drift = (energy_unchecked(y[0], y[2], self.n, self.h_mean) - self.energy0).abs();
            if drift > drift_limit {
                let state = self.state(s, &y);
                traj.events.push(Event {
                    kind: EventKind::EnergyDrift,
                    state,
                });
                traj.diagnostics
                    .push(format!("energy drift {drift:e} at s = {s}"));
                return Err(Error::EnergyDrift {
                    drift,
                    tolerance: drift_limit,
                    s,
                    partial: Box::new(traj),
                });
            }

            if terminal.is_some() {
                break;
            }
            k1 = self.field(&y);
            let err = step.error.max(1e-10);
            let fac = (0.9 * err.powf(-0.17) * err_prev.powf(0.04)).clamp(0.2, 10.0);
            err_prev = err;
            h = h_try * fac;
            if last_step {
                break;
            }
        }
        let drift = traj.max_energy_drift();
        traj.diagnostics
            .push(format!("max energy drift {drift:e} over {} samples", traj.samples.len()));
        Ok(traj)
    }
}

fn nonzero_sign(v: f64) -> Option<f64> {
    if v > 0.0 {
        Some(1.0)
    } else if v < 0.0 {
        Some(-1.0)
    } else {
        None
    }
}

/// Extends a trajectory by mirror images across horizontal lines through
/// critical radii.
///
/// The mirror of a curve across `{t = t_c}` through a critical point at
/// `s_c` is `(x, t, sigma)(s) -> (x, 2 t_c - t, 2 sigma_c - sigma)(2 s_c - s)`,
/// which solves the same system with the same energy. Each copy mirrors
/// the most recently added piece across its far end when the trajectory
/// ends at a critical radius; otherwise, when it starts at one (a sphere
/// traced from its equator), the mirror is prepended.
pub fn reflect_continue(traj: &Trajectory, copies: usize) -> Result<Trajectory> {
    if traj.is_cylinder() {
        let mut out = traj.clone();
        out.diagnostics
            .push("every sample is a critical radius (cylinder); returned unchanged".into());
        return Ok(out);
    }
    let mut out = traj.clone();
    let mut base_start = 0usize;
    for _ in 0..copies {
        let last = *out.last();
        let first = *out.first();
        let ends_critical = matches!(out.termination, Termination::Stop(EventKind::CriticalRadius))
            || Trajectory::is_critical(&last);
        if ends_critical {
            let end_index = out.samples.len() - 1;
            let base_start_state = out.samples[base_start];
            let mirror = |p: &ProfileState| ProfileState {
                s: 2.0 * last.s - p.s,
                x: p.x,
                t: 2.0 * last.t - p.t,
                sigma: 2.0 * last.sigma - p.sigma,
            };
            let mirrored_events: Vec<Event> = out
                .events
                .iter()
                .filter(|e| e.state.s >= base_start_state.s && e.state.s < last.s)
                .rev()
                .map(|e| Event {
                    kind: e.kind,
                    state: mirror(&e.state),
                })
                .collect();
            for i in (base_start..end_index).rev() {
                let p = mirror(&out.samples[i]);
                out.samples.push(p);
                out.rates.push(out.rates[i]);
            }
            out.events.extend(mirrored_events);
            let new_end = *out.last();
            if Trajectory::is_critical(&new_end)
                && !out
                    .events
                    .iter()
                    .any(|e| e.kind == EventKind::CriticalRadius && e.state.s == new_end.s)
            {
                out.events.push(Event {
                    kind: EventKind::CriticalRadius,
                    state: new_end,
                });
            }
            out.termination = Termination::Stop(EventKind::CriticalRadius);
            base_start = end_index;
        } else if Trajectory::is_critical(&first) {
            let mirror = |p: &ProfileState| ProfileState {
                s: 2.0 * first.s - p.s,
                x: p.x,
                t: 2.0 * first.t - p.t,
                sigma: 2.0 * first.sigma - p.sigma,
            };
            let mut samples: Vec<ProfileState> =
                out.samples[1..].iter().rev().map(mirror).collect();
            let mut rates: Vec<f64> = out.rates[1..].iter().rev().copied().collect();
            let mut events: Vec<Event> = out
                .events
                .iter()
                .rev()
                .filter(|e| e.state.s > first.s)
                .map(|e| Event {
                    kind: e.kind,
                    state: mirror(&e.state),
                })
                .collect();
            samples.extend_from_slice(&out.samples);
            rates.extend_from_slice(&out.rates);
            events.extend_from_slice(&out.events);
            out.samples = samples;
            out.rates = rates;
            out.events = events;
            base_start = 0;
        } else {
            return Err(Error::NoCriticalPoint);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rhs_examples() {
        let d = rhs(&ProfileState::new(3.0, 0.0, FRAC_PI_2), 2, 0.0).unwrap();
        assert!((d.dx - 1.0).abs() < 1e-15 && d.dt.abs() < 1e-15 && d.dsigma.abs() < 1e-15);

        for n in 1..4 {
            let h = 0.7;
            let nf = n as f64;
            let r = (2.0 * nf - 1.0) / (2.0 * nf * h);
            let d = rhs(&ProfileState::new(r, 0.0, 0.0), n, h).unwrap();
            assert_eq!((d.dx, d.dt), (0.0, 1.0));
            assert!(d.dsigma.abs() < 1e-14);
        }

        let d = rhs(&ProfileState::new(1.0, 0.0, 0.0), 1, 1.0).unwrap();
        assert!((d.dsigma + 1.0).abs() < 1e-15);

        assert!(matches!(
            rhs(&ProfileState::new(1e-7, 0.0, 0.0), 1, 1.0),
            Err(Error::AxisSingularity { .. })
        ));
    }

    #[test]
    fn energy_examples() {
        let e = energy(&ProfileState::new(1.0, 0.0, 0.0), 1, 0.5).unwrap();
        assert!((e - 0.5).abs() < 1e-15);
        for n in 1..4 {
            let h = 1.3;
            let e = energy(&ProfileState::new(1.0 / h, 0.0, 0.0), n, h).unwrap();
            assert!(e.abs() < 1e-14);
            let e = energy(&ProfileState::new(2.0, 0.0, FRAC_PI_2), n, h).unwrap();
            assert!((e + h * 2f64.powi(2 * n as i32)).abs() < 1e-12);
        }
        assert!(energy(&ProfileState::new(0.0, 0.0, 0.0), 1, 1.0).is_err());
    }

    #[test]
    fn cylinder_is_a_fixed_point() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 0.5, &SolveConfig::default().with_arclength(20.0)).unwrap();
        let max_dev = traj.samples.iter().map(|p| (p.x - 1.0).abs()).fold(0.0, f64::max);
        assert!(max_dev <= 1e-9, "{max_dev}");
        assert!((traj.last().t - 20.0).abs() < 1e-9);
    }

    #[test]
    fn sphere_meets_axis_orthogonally() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 1.0, &SolveConfig::default()).unwrap();
        assert_eq!(traj.termination, Termination::AxisContact);
        let contact = traj.events_of(EventKind::AxisContact).next().unwrap();
        assert!((contact.state.x - DEFAULT_AXIS_EPSILON).abs() < 1e-9);
        assert!(contact.state.sigma.sin().abs() >= 1.0 - 1e-3);
        // The pole sits at height pi/4 above the equator.
        assert!((contact.state.t - PI / 4.0).abs() < 1e-5, "{}", contact.state.t);
    }

    #[test]
    fn catenoid_matches_hyperbola() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 0.0, &SolveConfig::default().with_arclength(20.0)).unwrap();
        for p in &traj.samples {
            let x = (p.t * p.t + 1.0).sqrt();
            assert!((p.x - x).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn reflection_of_half_period_matches_reintegration() {
        // Unduloid n = 1, H = 1/2, E = 0.3 from its minimum radius.
        let x1 = 1.0 - 0.4f64.sqrt();
        let start = ProfileState::new(x1, 0.0, 0.0);
        let cfg = SolveConfig::default().stop_at(EventKind::CriticalRadius, 1);
        let half = integrate(&start, 1, 0.5, &cfg).unwrap();
        assert_eq!(half.termination, Termination::Stop(EventKind::CriticalRadius));
        let full = reflect_continue(&half, 1).unwrap();
        let s_half = half.last().s;
        assert!((full.last().s - 2.0 * s_half).abs() < 1e-12);

        let second: Vec<&ProfileState> = full.samples.iter().filter(|p| p.s > s_half).collect();
        for p in second.iter().step_by(second.len() / 8) {
            let direct = integrate(&start, 1, 0.5, &SolveConfig::default().with_arclength(p.s)).unwrap();
            let q = direct.last();
            assert!((p.x - q.x).abs() < 1e-8, "{p:?} {q:?}");
            assert!((p.t - q.t).abs() < 1e-8, "{p:?} {q:?}");
        }
        assert!(full.events_of(EventKind::CriticalRadius).count() >= 1);
    }

    #[test]
    fn reflecting_a_hemisphere_closes_the_sphere() {
        let half = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 1.0, &SolveConfig::default()).unwrap();
        let whole = reflect_continue(&half, 1).unwrap();
        let (a, b) = (whole.first(), whole.last());
        assert!((a.t + b.t).abs() < 1e-12 && (a.x - b.x).abs() < 1e-15);
        assert!(a.t < 0.0 && b.t > 0.0);
        assert!(whole.samples.windows(2).all(|w| w[1].s > w[0].s));
    }

    #[test]
    fn cylinder_reflection_is_identity() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 0.5, &SolveConfig::default().with_arclength(2.0)).unwrap();
        let out = reflect_continue(&traj, 3).unwrap();
        assert_eq!(out.samples, traj.samples);
        assert!(out.diagnostics.iter().any(|d| d.contains("cylinder")));
    }

    #[test]
    fn reflection_needs_a_critical_point() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.3), 1, 0.0, &SolveConfig::default().with_arclength(1.0)).unwrap();
        assert!(matches!(reflect_continue(&traj, 1), Err(Error::NoCriticalPoint)));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let traj = integrate(&ProfileState::new(1.0, 0.0, 0.0), 1, 0.5, &SolveConfig::default().with_arclength(0.5)).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,x,t,sigma,energy"));
        assert_eq!(lines.count(), traj.samples.len());
    }
}

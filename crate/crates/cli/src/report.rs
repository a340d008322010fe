//! Run reports and the per-family geometry summary.

use serde::Serialize;

use cc_delaunay::classify::{
    canonical_initial_state, classify, cylinder_energy, normalize, structural_radii, FamilyLabel,
};
use cc_delaunay::closed_forms::{catenoid_slab_halfwidth, nodoid_halfperiod, unduloid_halfperiod};
use cc_delaunay::measures::{enclosed_volume, perimeter, Closure, RotationalProfile};
use cc_delaunay::profile_ode::{
    integrate, near_axis_limit, Event, EventKind, SolveConfig, Termination, Trajectory,
};
use cc_delaunay::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Params {
    pub n: usize,
    pub h: f64,
    pub e: f64,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct Radii {
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub x0: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ErrorEstimates {
    pub t2: Option<f64>,
    pub t_inf: Option<f64>,
    pub period: Option<f64>,
    pub perimeter: Option<f64>,
    pub volume: Option<f64>,
}

/// Derived quantities. Unduloid and nodoid values refer to one period
/// started at the canonical radius; heights are absolute values.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t_inf: Option<f64>,
    pub period: Option<f64>,
    pub perimeter: Option<f64>,
    pub volume: Option<f64>,
    pub error_estimates: ErrorEstimates,
}

#[derive(Debug, Clone, Serialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub sigma: f64,
}

impl From<&Event> for EventRecord {
    fn from(e: &Event) -> Self {
        EventRecord {
            kind: e.kind,
            s: e.state.s,
            x: e.state.x,
            t: e.state.t,
            sigma: e.state.sigma,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub energy_drift: Option<f64>,
    pub events: Vec<EventRecord>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub s: f64,
    pub x: f64,
    pub t: f64,
    pub sigma: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: Params,
    pub family: Option<FamilyLabel>,
    pub cylinder_energy: Option<f64>,
    pub closed_form: Option<String>,
    pub radii: Radii,
    pub summary: Summary,
    pub diagnostics: Diagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<Sample>>,
}

impl RunReport {
    /// Family, radii and cylinder energy; summary and diagnostics empty.
    pub fn classify(command: String, n: usize, h: f64, e: f64) -> Result<Self> {
        let family = classify(n, h, e)?;
        let radii = structural_radii(n, h, e)?
            .map(|r| Radii {
                x1: Some(r.x1),
                x2: Some(r.x2),
                x0: r.x0,
            })
            .unwrap_or_default();
        let (hn, _) = normalize(h, e);
        Ok(RunReport {
            command,
            params: Params { n, h, e },
            family: Some(family),
            cylinder_energy: if hn > 0.0 { Some(cylinder_energy(n, hn)?) } else { None },
            closed_form: closed_form(family, n),
            radii,
            summary: Summary::default(),
            diagnostics: Diagnostics::default(),
            trajectory: None,
        })
    }

    pub fn attach_trajectory(&mut self, traj: &Trajectory) {
        self.diagnostics.energy_drift = Some(traj.max_energy_drift());
        self.diagnostics.events = traj.events.iter().map(EventRecord::from).collect();
        self.diagnostics.notes.extend(traj.diagnostics.iter().cloned());
        self.trajectory = Some(
            traj.samples
                .iter()
                .enumerate()
                .map(|(i, p)| Sample {
                    s: p.s,
                    x: p.x,
                    t: p.t,
                    sigma: p.sigma,
                    energy: traj.sample_energy(i),
                })
                .collect(),
        );
    }
}

fn closed_form(family: FamilyLabel, n: usize) -> Option<String> {
    match family {
        FamilyLabel::Sphere => Some(
            "t = +-(H x sqrt(1 - H^2 x^2) + arccos(H x)) / (2 H^2), 0 <= x <= 1/H".into(),
        ),
        FamilyLabel::Catenoid if n == 1 => Some("x(t) = sqrt(t^2 + E^4) / E".into()),
        FamilyLabel::Catenoid => Some(
            "contained in the slab |t| < t_inf = int_{E^{1/(2n-1)}}^inf E x / sqrt(x^{4n-2} - E^2) dx".into(),
        ),
        _ => None,
    }
}

/// Axis tolerance actually used for `(n, H)`: spheres with `n >= 2` cannot
/// be traced closer to the axis than [`near_axis_limit`].
pub fn effective_config(cfg: &SolveConfig, n: usize, h: f64, e: f64, notes: &mut Vec<String>) -> SolveConfig {
    let mut cfg = cfg.clone();
    let limit = near_axis_limit(n, h);
    if e == 0.0 && cfg.axis_epsilon < limit {
        notes.push(format!(
            "axis tolerance raised from {:e} to {:e}: closer to the axis the sphere profile is dominated by rounding",
            cfg.axis_epsilon, limit
        ));
        cfg.axis_epsilon = limit;
    }
    cfg
}

fn one_period(n: usize, h: f64, e: f64, cfg: &SolveConfig) -> Result<Trajectory> {
    let start = canonical_initial_state(n, h, e)?;
    let cfg = SolveConfig {
        max_arclength: f64::INFINITY,
        stop: Vec::new(),
        ..cfg.clone()
    }
    .stop_at(EventKind::CriticalRadius, 2);
    let traj = integrate(&start, n, h, &cfg)?;
    if traj.termination != Termination::Stop(EventKind::CriticalRadius) {
        return Err(Error::NoCriticalPoint);
    }
    Ok(traj)
}

/// Geometry summary for `(n, H, E)`.
pub fn summarize(n: usize, h: f64, e: f64, cfg: &SolveConfig, notes: &mut Vec<String>) -> Result<Summary> {
    let family = classify(n, h, e)?;
    let (hn, en) = normalize(h, e);
    let mut s = Summary::default();
    match family {
        FamilyLabel::Hyperplane | FamilyLabel::Cylinder => {}
        FamilyLabel::Catenoid => match catenoid_slab_halfwidth(n, en.abs()) {
            Ok(r) => {
                s.t_inf = Some(r.value);
                s.error_estimates.t_inf = Some(r.error_estimate);
            }
            Err(Error::Divergent(msg)) => notes.push(msg),
            Err(err) => return Err(err),
        },
        FamilyLabel::Sphere => {
            let sphere = RotationalProfile::sphere(n, hn)?;
            let p = perimeter(&sphere)?;
            let v = enclosed_volume(&sphere)?;
            s.perimeter = Some(p.value);
            s.volume = Some(v.value);
            s.error_estimates.perimeter = Some(p.error_estimate);
            s.error_estimates.volume = Some(v.error_estimate);
        }
        FamilyLabel::Unduloid | FamilyLabel::Nodoid => {
            let (t2, t1_kind, closure) = if family == FamilyLabel::Unduloid {
                (unduloid_halfperiod(n, h, e)?, EventKind::Inflection, Closure::Capped)
            } else {
                (nodoid_halfperiod(n, h, e)?, EventKind::VerticalTangent, Closure::Truncated)
            };
            s.t2 = Some(t2.value);
            s.period = Some(2.0 * t2.value);
            s.error_estimates.t2 = Some(t2.error_estimate);
            s.error_estimates.period = Some(2.0 * t2.error_estimate);
            let traj = one_period(n, h, e, cfg)?;
            let start = traj.first().t;
            s.t1 = traj.events_of(t1_kind).next().map(|ev| (ev.state.t - start).abs());
            let traced = (traj.last().t - start).abs();
            if (traced - s.period.unwrap_or(0.0)).abs() > 1e-6 * (1.0 + traced) {
                notes.push(format!(
                    "traced period {traced} differs from twice the half-period integral {}",
                    2.0 * t2.value
                ));
            }
            let profile = RotationalProfile::from_trajectory(&traj, closure)?;
            let p = perimeter(&profile)?;
            s.perimeter = Some(p.value);
            s.error_estimates.perimeter = Some(p.error_estimate);
            if closure == Closure::Capped {
                let v = enclosed_volume(&profile)?;
                s.volume = Some(v.value.abs());
                s.error_estimates.volume = Some(v.error_estimate);
            } else {
                notes.push("nodoids self-intersect; no enclosed volume".into());
            }
        }
    }
    Ok(s)
}

//! Self-check suites run by `cc-delaunay verify`.
//!
//! Each suite compares the library against independent references (closed
//! forms, a second quadrature scheme, a second curvature pipeline, the
//! conserved energy) and reports one [`Check`] per comparison.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{canonical_initial_state, classify, cylinder_energy, FamilyLabel};
use crate::closed_forms::{
    catenoid_profile_h1, catenoid_slab_halfwidth_with, nodoid_halfperiod, nodoid_halfperiod_raw,
    sphere_profile, sphere_profile_derivative, unduloid_halfperiod,
};
use crate::curvature::{
    chmy_identity_residual, mean_curvature_general, mean_curvature_graph_h1, mean_curvature_rotational,
    GraphJet, GraphPatch, ImmersionJet, ProfileJet, RotationalPatch,
};
use crate::error::{Error, Result};
use crate::measures::{
    enclosed_volume, first_variation_check, perimeter, verify_density, Closure, RotationalProfile,
};
use crate::profile_ode::{
    integrate_system, reflect_continue, CmcSystem, EventKind, ProfileState, ProfileSystem, SolveConfig,
    Termination, Trajectory,
};
use crate::quadrature::Scheme;

pub const DEFAULT_SEED: u64 = 20_061_205;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Energy,
    ClosedForms,
    Curvature,
    Classification,
    Measures,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Energy,
        Suite::ClosedForms,
        Suite::Curvature,
        Suite::Classification,
        Suite::Measures,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Energy => "energy",
            Suite::ClosedForms => "closed-forms",
            Suite::Curvature => "curvature",
            Suite::Classification => "classification",
            Suite::Measures => "measures",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

/// Deliberate defects for checking that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Flips the sign of the mean-curvature term of `sigma'`.
    RhsSign,
}

impl FromStr for Fault {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rhs-sign" => Ok(Fault::RhsSign),
            _ => Err(Error::InvalidParameter(format!("unknown fault {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: DEFAULT_SEED,
            fault: None,
        }
    }
}

struct FaultySystem {
    n: usize,
    h: f64,
}

impl ProfileSystem for FaultySystem {
    fn n(&self) -> usize {
        self.n
    }

    fn mean_curvature(&self) -> f64 {
        self.h
    }

    fn sigma_rate(&self, x: f64, sigma: f64) -> f64 {
        // Same as the CMC system with +2nH in place of -2nH.
        let correct = CmcSystem { n: self.n, h: self.h }.sigma_rate(x, sigma);
        let (sin, cos) = sigma.sin_cos();
        let w = x * x * sin * sin + cos * cos;
        correct + 4.0 * self.n as f64 * self.h * w * w.sqrt() / (x * x)
    }
}

impl VerifyOptions {
    fn integrate(&self, initial: &ProfileState, n: usize, h: f64, cfg: &SolveConfig) -> Result<Trajectory> {
        match self.fault {
            None => integrate_system(&CmcSystem { n, h }, initial, cfg),
            Some(Fault::RhsSign) => integrate_system(&FaultySystem { n, h }, initial, cfg),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The measured discrepancy (or quantity) that was compared.
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "String::is_empty", default)]
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Default)]
struct Recorder {
    checks: Vec<Check>,
}

impl Recorder {
    /// Records `value <= tolerance`.
    fn within(&mut self, name: impl Into<String>, value: f64, tolerance: f64) {
        self.checks.push(Check {
            name: name.into(),
            passed: value <= tolerance,
            value,
            tolerance,
            detail: String::new(),
        });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed: ok,
            value: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
            detail: detail.into(),
        });
    }

    /// Runs `f`; an error becomes a failed check.
    fn guard(&mut self, name: &str, f: impl FnOnce(&mut Recorder) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(Check {
                name: name.into(),
                passed: false,
                value: f64::NAN,
                tolerance: 0.0,
                detail: e.to_string(),
            });
        }
    }

    fn finish(self, suite: Suite) -> SuiteReport {
        SuiteReport {
            suite,
            passed: self.checks.iter().all(|c| c.passed),
            checks: self.checks,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let mut rec = Recorder::default();
    match suite {
        Suite::Energy => energy_suite(&mut rec, opts),
        Suite::ClosedForms => closed_forms_suite(&mut rec, opts),
        Suite::Curvature => curvature_suite(&mut rec, opts),
        Suite::Classification => classification_suite(&mut rec, opts),
        Suite::Measures => measures_suite(&mut rec, opts),
    }
    rec.finish(suite)
}

pub fn run_all(opts: &VerifyOptions) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, opts)).collect()
}

/// Solver settings used by the suites: tighter than the interactive
/// defaults so that the energy stays within `1e-9 (1 + |E|)`.
pub fn precise_config() -> SolveConfig {
    SolveConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..SolveConfig::default()
    }
}

/// The `(n, H, E)` grid of the energy suite: for each `n`, five values of
/// `H` and five energies given as fractions of the signed cylinder energy.
pub fn energy_grid() -> Vec<(usize, f64, f64)> {
    let hs = [-1.0, -0.5, 0.5, 1.0, 2.0];
    let fractions = [-1.0, -0.25, 0.0, 0.5, 0.9];
    let mut out = Vec::new();
    for n in 1..=3 {
        for &h in &hs {
            let e_cyl = cylinder_energy(n, f64::abs(h)).expect("H != 0");
            for &f in &fractions {
                out.push((n, h, f * e_cyl * f64::signum(h)));
            }
        }
    }
    out
}

/// Axis tolerance for the energy grid. Spheres with `n >= 2` cannot be
/// traced closer to the axis (see `near_axis_limit`).
pub const ENERGY_AXIS_EPSILON: f64 = 1e-3;

fn energy_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    let mut worst: f64 = 0.0;
    for (n, h, e) in energy_grid() {
        let name = format!("drift n={n} H={h} E={e:.6}");
        rec.guard(&name.clone(), |rec| {
            let start = canonical_initial_state(n, h, e)?;
            let cfg = SolveConfig {
                axis_epsilon: ENERGY_AXIS_EPSILON,
                drift_tolerance: 1e-9,
                ..precise_config()
            };
            let traj = opts.integrate(&start, n, h, &cfg)?;
            let rel = traj.max_energy_drift() / (1.0 + e.abs());
            worst = worst.max(rel);
            rec.within(name, rel, 1e-9);
            Ok(())
        });
    }
    rec.within("max relative drift", worst, 1e-9);
}

/// Distance from `(x, t)` to the profile `t = +-T(x)` of `S_H`, measured
/// along the normal of the graph to first order.
fn sphere_distance(h: f64, x: f64, t: f64) -> Result<f64> {
    if h * x >= 1.0 {
        return Ok((x - 1.0 / h).hypot(t));
    }
    let dt = (t.abs() - sphere_profile(h, x)?).abs();
    let slope = sphere_profile_derivative(h, x)?;
    Ok(dt / (1.0 + slope * slope).sqrt())
}

fn closed_forms_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    for n in 1..=2 {
        for &h in &[0.5, 1.0, 2.0] {
            let name = format!("sphere n={n} H={h}");
            rec.guard(&name.clone(), |rec| {
                let cfg = SolveConfig {
                    axis_epsilon: if n == 1 { 1e-6 } else { 1e-3 },
                    ..precise_config()
                };
                let traj = opts.integrate(&ProfileState::new(1.0 / h, 0.0, 0.0), n, h, &cfg)?;
                let mut err: f64 = 0.0;
                for p in traj.samples.iter().filter(|p| p.x >= 1e-3) {
                    err = err.max(sphere_distance(h, p.x, p.t)?);
                }
                rec.within(format!("{name} distance to closed form"), err, 1e-6);
                let contact = traj.events_of(EventKind::AxisContact).next();
                rec.holds(
                    format!("{name} meets the axis orthogonally"),
                    traj.termination == Termination::AxisContact
                        && contact.is_some_and(|c| c.state.sigma.sin().abs() >= 1.0 - 1e-3),
                    format!("termination {:?}", traj.termination),
                );
                Ok(())
            });
        }
    }

    for &e in &[0.5, 1.0, 2.0] {
        let name = format!("catenoid n=1 E={e}");
        rec.guard(&name.clone(), |rec| {
            let mut err: f64 = 0.0;
            for sigma in [0.0, PI] {
                let cfg = precise_config().with_arclength(15.0);
                let traj = opts.integrate(&ProfileState::new(e, 0.0, sigma), 1, 0.0, &cfg)?;
                for p in traj.samples.iter().filter(|p| p.t.abs() <= 10.0) {
                    err = err.max((p.x - catenoid_profile_h1(e, p.t)?).abs());
                }
            }
            rec.within(name, err, 1e-6);
            Ok(())
        });
    }

    for &(n, h, e) in &[(1, 1.0, -0.1), (2, 1.0, -0.05), (3, 0.5, -1.0), (2, -2.0, 0.01)] {
        let name = format!("nodoid half-period n={n} H={h} E={e}");
        rec.guard(&name.clone(), |rec| {
            let t2 = nodoid_halfperiod(n, h, e)?;
            let raw = nodoid_halfperiod_raw(n, h, e)?;
            rec.holds(format!("{name} positive"), t2.value > 0.0, format!("t2 = {}", t2.value));
            rec.within(format!("{name} raw vs regularized"), (raw.value - t2.value).abs(), 1e-8);
            let dt = ode_half_period(opts, n, h, e)?;
            rec.within(format!("{name} vs ODE"), (dt - t2.value).abs(), 1e-6);
            Ok(())
        });
    }

    for &(n, h, e) in &[(1, 0.5, 0.3), (2, 0.5, 0.3), (3, 1.5, 0.004)] {
        let name = format!("unduloid half-period n={n} H={h} E={e}");
        rec.guard(&name.clone(), |rec| {
            let t2 = unduloid_halfperiod(n, h, e)?;
            let dt = ode_half_period(opts, n, h, e)?;
            rec.within(name, (dt - t2.value).abs(), 1e-6);
            Ok(())
        });
    }

    rec.guard("slab half-width n=2 E=1", |rec| {
        let a = catenoid_slab_halfwidth_with(Scheme::TanhSinh, 2, 1.0)?;
        let b = catenoid_slab_halfwidth_with(Scheme::SqrtSubstitution, 2, 1.0)?;
        rec.within("slab half-width schemes agree", (a.value - b.value).abs(), 1e-6);
        Ok(())
    });
    rec.holds(
        "slab half-width n=1 diverges",
        matches!(catenoid_slab_halfwidth_with(Scheme::TanhSinh, 1, 1.0), Err(Error::Divergent(_))),
        "",
    );
}

/// `|t|` gained between consecutive critical radii along the ODE solution.
pub fn ode_half_period_with(
    integrate: &dyn Fn(&ProfileState, &SolveConfig) -> Result<Trajectory>,
    n: usize,
    h: f64,
    e: f64,
) -> Result<f64> {
    let start = canonical_initial_state(n, h, e)?;
    let cfg = precise_config().stop_at(EventKind::CriticalRadius, 1);
    let traj = integrate(&start, &cfg)?;
    if traj.termination != Termination::Stop(EventKind::CriticalRadius) {
        return Err(Error::NoCriticalPoint);
    }
    Ok((traj.last().t - traj.first().t).abs())
}

fn ode_half_period(opts: &VerifyOptions, n: usize, h: f64, e: f64) -> Result<f64> {
    ode_half_period_with(&|s, cfg| opts.integrate(s, n, h, cfg), n, h, e)
}

fn curvature_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    for _ in 0..100 {
        // t = g(r) = c0 + c2 r^2 + c3 r^3 at a random point off the axis.
        let c: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r: f64 = rng.gen_range(0.2..2.0);
        let th: f64 = rng.gen_range(0.0..2.0 * PI);
        let (x, y) = (r * th.cos(), r * th.sin());
        let g = c[0] + c[1] * r * r + c[2] * r.powi(3);
        let dg = 2.0 * c[1] * r + 3.0 * c[2] * r * r;
        let ddg = 2.0 * c[1] + 6.0 * c[2] * r;
        let jet = GraphJet::radial(x, y, g, dg, ddg);
        match (
            mean_curvature_graph_h1(&jet, x, y),
            mean_curvature_general(&ImmersionJet::graph_h1(x, y, &jet)),
        ) {
            (Ok(a), Ok(b)) => worst = worst.max((a - b).abs() / (1.0 + a.abs())),
            _ => failures += 1,
        }
    }
    rec.within("radial graphs: graph formula vs general pipeline", worst, 1e-8);
    rec.holds("radial graphs: all points regular", failures == 0, format!("{failures} failures"));

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.gen_range(1..=3usize);
        let a: f64 = rng.gen_range(0.0..2.0 * PI);
        let jet = ProfileJet {
            x: rng.gen_range(0.2..2.0),
            t: rng.gen_range(-1.0..1.0),
            dx: a.sin(),
            dt: a.cos(),
            ddx: rng.gen_range(-1.0..1.0),
            ddt: rng.gen_range(-1.0..1.0),
        };
        let mut omega: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = omega.iter().map(|v| v * v).sum::<f64>().sqrt();
        omega.iter_mut().for_each(|v| *v /= norm);
        if let (Ok(h1), Ok(h2)) = (
            mean_curvature_rotational(&jet, n),
            ImmersionJet::rotational(&jet, &omega).and_then(|j| mean_curvature_general(&j)),
        ) {
            worst = worst.max((h1 - h2).abs() / (1.0 + h1.abs()));
        }
    }
    rec.within("rotational formula vs general pipeline", worst, 1e-8);

    let mut worst: f64 = 0.0;
    for i in 0..20 {
        let n = 1 + i % 4;
        let r = 0.25 + 0.37 * i as f64;
        let jet = ProfileJet {
            x: r,
            t: 0.0,
            dx: 0.0,
            dt: 1.0,
            ddx: 0.0,
            ddt: 0.0,
        };
        let expect = (2.0 * n as f64 - 1.0) / (2.0 * n as f64 * r);
        match mean_curvature_rotational(&jet, n) {
            Ok(h) => worst = worst.max((h - expect).abs()),
            Err(_) => worst = f64::INFINITY,
        }
    }
    rec.within("cylinder mean curvature", worst, 1e-12);

    rec.guard("identity D_Z Z = 2H nu_H", |rec| {
        let cylinder = RotationalPatch(|s: f64| ProfileJet {
            x: 1.0,
            t: s,
            dx: 0.0,
            dt: 1.0,
            ddx: 0.0,
            ddt: 0.0,
        });
        rec.within("identity residual, cylinder", chmy_identity_residual(&cylinder, [0.3, 0.7])?, 1e-6);
        let plane = GraphPatch(|_x: f64, _y: f64| GraphJet {
            f: 0.0,
            fx: 0.0,
            fy: 0.0,
            fxx: 0.0,
            fxy: 0.0,
            fyy: 0.0,
        });
        rec.within("identity residual, plane", chmy_identity_residual(&plane, [1.0, 2.0])?, 1e-6);
        // Catenoid E = 1 as the radial graph t = sqrt(r^2 - 1).
        let catenoid = GraphPatch(|x: f64, y: f64| {
            let r2 = x * x + y * y;
            let r = r2.sqrt();
            let w = r2 - 1.0;
            GraphJet::radial(x, y, w.sqrt(), r / w.sqrt(), -1.0 / (w * w.sqrt()))
        });
        rec.within(
            "identity residual, catenoid",
            chmy_identity_residual(&catenoid, [1.2, 0.9])?,
            1e-6,
        );
        Ok(())
    });
}

/// Label expected from the sign table, written independently of
/// [`classify`]: `None` when `(H, E)` admits no profile.
pub fn expected_label(n: usize, h: f64, e: f64) -> Option<FamilyLabel> {
    let (h, e) = if h < 0.0 { (-h, -e) } else { (h, e) };
    if h == 0.0 {
        return Some(if e == 0.0 { FamilyLabel::Hyperplane } else { FamilyLabel::Catenoid });
    }
    if e == 0.0 {
        return Some(FamilyLabel::Sphere);
    }
    if e < 0.0 {
        return Some(FamilyLabel::Nodoid);
    }
    // E_cyl = r^{2n-1} (1 - H r) = r^{2n-1} / (2n).
    let nf = n as f64;
    let r = (2.0 * nf - 1.0) / (2.0 * nf * h);
    let e_cyl = r.powi(2 * n as i32 - 1) / (2.0 * nf);
    if (e - e_cyl).abs() <= 1e-12 * e_cyl {
        Some(FamilyLabel::Cylinder)
    } else if e > e_cyl {
        None
    } else {
        Some(FamilyLabel::Unduloid)
    }
}

/// Random `(n, H, E)` covering every branch of the sign table, including
/// exact zeros and exact cylinder energies.
pub fn classification_samples(seed: u64, count: usize) -> Vec<(usize, f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=3usize);
            let h = if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(-3.0..3.0) };
            let scale = if h == 0.0 {
                1.0
            } else {
                cylinder_energy(n, f64::abs(h)).expect("H != 0") * f64::signum(h)
            };
            let e = match rng.gen_range(0..10) {
                0 => 0.0,
                1 if h != 0.0 => scale,
                _ => rng.gen_range(-2.0..1.5) * scale,
            };
            (n, h, e)
        })
        .collect()
}

fn classification_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    let mut mismatches = Vec::new();
    let mut asymmetric = 0;
    for (n, h, e) in classification_samples(opts.seed, 1000) {
        let got = classify(n, h, e).ok();
        if got != expected_label(n, h, e) {
            mismatches.push(format!("({n}, {h}, {e}) -> {got:?}"));
        }
        if classify(n, -h, -e).ok() != got {
            asymmetric += 1;
        }
    }
    rec.holds(
        "1000 samples match the sign table",
        mismatches.is_empty(),
        mismatches.into_iter().take(5).collect::<Vec<_>>().join("; "),
    );
    rec.holds(
        "classification invariant under (H, E) -> (-H, -E)",
        asymmetric == 0,
        format!("{asymmetric} asymmetric samples"),
    );
}

fn measures_suite(rec: &mut Recorder, opts: &VerifyOptions) {
    rec.guard("density", |rec| {
        for n in 1..=3 {
            verify_density(&RotationalProfile::sphere(n, 1.3)?)?;
        }
        rec.holds("Gram determinant density matches the closed form", true, "");
        Ok(())
    });
    rec.guard("cylinder band", |rec| {
        let band = RotationalProfile::cylinder_band(1, 1.0, 1.0)?;
        rec.within("cylinder band perimeter", (perimeter(&band)?.value - 2.0 * PI).abs(), 1e-10);
        rec.within("cylinder band volume", (enclosed_volume(&band)?.value - PI).abs(), 1e-10);
        Ok(())
    });
    for n in 1..=2 {
        let name = format!("sphere n={n} H=1");
        rec.guard(&name.clone(), |rec| {
            let closed = RotationalProfile::sphere(n, 1.0)?;
            let cfg = SolveConfig {
                axis_epsilon: if n == 1 { 1e-6 } else { 1e-3 },
                ..precise_config()
            };
            let half = opts.integrate(&ProfileState::new(1.0, 0.0, 0.0), n, 1.0, &cfg)?;
            let whole = reflect_continue(&half, 1)?;
            let traced = RotationalProfile::from_trajectory(&whole, Closure::AxisToAxis)?;
            let (p1, p2) = (perimeter(&closed)?.value, perimeter(&traced)?.value);
            rec.within(format!("{name} perimeter, closed form vs ODE"), (p1 - p2).abs() / p1, 1e-5);
            Ok(())
        });
    }
    rec.guard("first variation", |rec| {
        let band = RotationalProfile::cylinder_band(2, 1.3, 2.0)?;
        let fv = first_variation_check(&band, &|_| 1.0, 1e-4)?;
        rec.within("first variation, cylinder", (fv.numeric - fv.formula).abs() / fv.formula.abs(), 1e-3);
        let sphere = RotationalProfile::sphere(1, 1.0)?;
        let bump = |psi: f64| {
            let z = (psi - 0.3) / 0.6;
            if z.abs() < 1.0 {
                (1.0 - z * z).powi(4)
            } else {
                0.0
            }
        };
        let fv = first_variation_check(&sphere, &bump, 1e-4)?;
        rec.within("first variation, sphere", (fv.numeric - fv.formula).abs() / fv.formula.abs(), 1e-3);
        let plane = RotationalProfile::hyperplane_piece(1, 0.5, 2.0)?;
        let fv = first_variation_check(&plane, &|s| bump(s - 0.95), 1e-4)?;
        rec.within("first variation, hyperplane", fv.numeric.abs(), 1e-6);
        Ok(())
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("everything".parse::<Suite>().is_err());
        assert_eq!("rhs-sign".parse::<Fault>().unwrap(), Fault::RhsSign);
    }

    #[test]
    fn expected_labels() {
        assert_eq!(expected_label(1, 0.5, 0.5), Some(FamilyLabel::Cylinder));
        assert_eq!(expected_label(1, 0.5, 0.6), None);
        assert_eq!(expected_label(1, -1.0, 0.1), Some(FamilyLabel::Nodoid));
    }
}

//! SVG rendering of generating curves in the half-plane `{x >= 0}`:
//! `x` to the right, `t` upwards.

use std::fmt::Write;

use cc_delaunay::classify::{canonical_initial_state, cylinder_energy, cylinder_radius, FamilyLabel};
use cc_delaunay::closed_forms::catenoid_slab_halfwidth;
use cc_delaunay::profile_ode::{integrate, reflect_continue, EventKind, ProfileState, SolveConfig};
use cc_delaunay::Result;

use crate::report::effective_config;

pub const PANEL_WIDTH: f64 = 800.0;
pub const PANEL_HEIGHT: f64 = 600.0;
const MARGIN: f64 = 60.0;

pub type Polyline = Vec<(f64, f64)>;

/// One labelled panel: solid curves plus dashed horizontal guide lines.
#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub curves: Vec<Polyline>,
    pub guides: Vec<f64>,
}

/// Parameters used for the gallery panel of `family` in `H^n`.
pub fn gallery_params(family: FamilyLabel, n: usize) -> Result<(f64, f64)> {
    Ok(match family {
        FamilyLabel::Hyperplane => (0.0, 0.0),
        FamilyLabel::Catenoid => (0.0, 1.0),
        FamilyLabel::Sphere => (1.0, 0.0),
        FamilyLabel::Cylinder => (1.0, cylinder_energy(n, 1.0)?),
        FamilyLabel::Unduloid => (1.0, 0.5 * cylinder_energy(n, 1.0)?),
        FamilyLabel::Nodoid => (1.0, -cylinder_energy(n, 1.0)?),
    })
}

fn points(traj: &cc_delaunay::profile_ode::Trajectory) -> Polyline {
    traj.samples.iter().map(|p| (p.x, p.t)).collect()
}

/// Traces the gallery curve of `family`.
pub fn family_panel(family: FamilyLabel, n: usize, cfg: &SolveConfig) -> Result<Panel> {
    let (h, e) = gallery_params(family, n)?;
    let title = format!("{family}  n={n}  H={h}  E={e:.4}");
    let mut notes = Vec::new();
    let base = SolveConfig {
        stop: Vec::new(),
        ..effective_config(cfg, n, h, e, &mut notes)
    };
    let mut guides = Vec::new();
    let curves = match family {
        FamilyLabel::Hyperplane => vec![vec![(0.0, 0.0), (3.0, 0.0)]],
        FamilyLabel::Catenoid => {
            let x = e.powf(1.0 / (2 * n - 1) as f64);
            let reach = if n == 1 { 3.0 } else { 6.0 };
            if n >= 2 {
                let t_inf = catenoid_slab_halfwidth(n, e)?.value;
                guides.extend([-t_inf, t_inf]);
            }
            let cfg = base.clone().with_arclength(reach);
            let up = integrate(&ProfileState::new(x, 0.0, 0.0), n, h, &cfg)?;
            let down = integrate(&ProfileState::new(x, 0.0, std::f64::consts::PI), n, h, &cfg)?;
            let mut curve: Polyline = points(&down).into_iter().rev().collect();
            curve.extend(points(&up).into_iter().skip(1));
            vec![curve]
        }
        FamilyLabel::Sphere => {
            let traj = integrate(&canonical_initial_state(n, h, e)?, n, h, &base)?;
            vec![points(&reflect_continue(&traj, 1)?)]
        }
        FamilyLabel::Cylinder => {
            let r = cylinder_radius(n, h)?;
            vec![vec![(r, -1.5), (r, 1.5)]]
        }
        FamilyLabel::Unduloid | FamilyLabel::Nodoid => {
            let cfg = SolveConfig {
                max_arclength: f64::INFINITY,
                ..base.clone()
            }
            .stop_at(EventKind::CriticalRadius, 1);
            let half = integrate(&canonical_initial_state(n, h, e)?, n, h, &cfg)?;
            let curve = points(&reflect_continue(&half, 5)?);
            let mid = 0.5 * (curve[0].1 + curve[curve.len() - 1].1);
            vec![curve.into_iter().map(|(x, t)| (x, t - mid)).collect()]
        }
    };
    Ok(Panel { title, curves, guides })
}

/// Panels for all six families in the order of the classification.
pub fn gallery(n: usize, cfg: &SolveConfig) -> Result<Vec<Panel>> {
    FamilyLabel::ALL.iter().map(|&f| family_panel(f, n, cfg)).collect()
}

fn fmt(v: f64) -> String {
    // Avoid "-0.00".
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// Inner `<svg>` element for a panel placed at `(ox, oy)`.
fn panel_element(panel: &Panel, ox: f64, oy: f64) -> String {
    let all = panel.curves.iter().flatten();
    let (mut x_max, mut t_min, mut t_max) = (0.0f64, 0.0f64, 0.0f64);
    for &(x, t) in all {
        x_max = x_max.max(x);
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }
    for &g in &panel.guides {
        t_min = t_min.min(g);
        t_max = t_max.max(g);
    }
    x_max = x_max.max(1e-9);
    let span_t = (t_max - t_min).max(1e-9);
    let scale = ((PANEL_WIDTH - 2.0 * MARGIN) / x_max).min((PANEL_HEIGHT - 2.0 * MARGIN) / span_t);
    let cx = |x: f64| MARGIN + x * scale;
    let cy = |t: f64| PANEL_HEIGHT / 2.0 - (t - 0.5 * (t_min + t_max)) * scale;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg x="{}" y="{}" width="{PANEL_WIDTH}" height="{PANEL_HEIGHT}" viewBox="0 0 {PANEL_WIDTH} {PANEL_HEIGHT}">"#,
        fmt(ox),
        fmt(oy)
    )
    .unwrap();
    writeln!(
        s,
        r##"<rect x="0.5" y="0.5" width="{}" height="{}" fill="white" stroke="#999"/>"##,
        PANEL_WIDTH - 1.0,
        PANEL_HEIGHT - 1.0
    )
    .unwrap();
    writeln!(
        s,
        r##"<line class="axis" x1="{0}" y1="{1}" x2="{0}" y2="{2}" stroke="#444" stroke-width="1"/>"##,
        fmt(cx(0.0)),
        fmt(MARGIN / 2.0),
        fmt(PANEL_HEIGHT - MARGIN / 2.0)
    )
    .unwrap();
    for &g in &panel.guides {
        writeln!(
            s,
            r##"<line class="guide" x1="{0}" y1="{1}" x2="{2}" y2="{1}" stroke="#888" stroke-dasharray="6 4"/>"##,
            fmt(MARGIN / 2.0),
            fmt(cy(g)),
            fmt(PANEL_WIDTH - MARGIN / 2.0)
        )
        .unwrap();
    }
    for curve in &panel.curves {
        let mut d = String::new();
        for (i, &(x, t)) in curve.iter().enumerate() {
            let _ = write!(d, "{}{} {} ", if i == 0 { "M" } else { "L" }, fmt(cx(x)), fmt(cy(t)));
        }
        writeln!(
            s,
            r##"<path class="profile" d="{}" fill="none" stroke="#1f4e9a" stroke-width="2"/>"##,
            d.trim_end()
        )
        .unwrap();
    }
    writeln!(
        s,
        r#"<text x="{}" y="30" font-family="sans-serif" font-size="20">{}</text>"#,
        fmt(MARGIN / 2.0),
        escape(&panel.title)
    )
    .unwrap();
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Standalone SVG 1.1 document with panels in a grid of `columns`.
pub fn document(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1).min(panels.len().max(1));
    let rows = panels.len().div_ceil(columns).max(1);
    let (w, h) = (PANEL_WIDTH * columns as f64, PANEL_HEIGHT * rows as f64);
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    for (i, panel) in panels.iter().enumerate() {
        let (col, row) = (i % columns, i / columns);
        s.push_str(&panel_element(panel, col as f64 * PANEL_WIDTH, row as f64 * PANEL_HEIGHT));
    }
    s.push_str("</svg>\n");
    s
}

//! Parameter sweeps over `(n, H, E)` grids.

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use cc_delaunay::classify::{classify, structural_radii, FamilyLabel};
use cc_delaunay::profile_ode::SolveConfig;

use crate::report::summarize;

/// Values along one grid axis: `a,b,c` or `start:stop:count` (inclusive,
/// evenly spaced).
#[derive(Debug, Clone, PartialEq)]
pub struct Axis(pub Vec<f64>);

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Axis(Vec::new()));
        }
        let parse = |v: &str| -> Result<f64, String> {
            let x: f64 = v.trim().parse().map_err(|_| format!("not a number: {v:?}"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("not finite: {v:?}"))
            }
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let (a, b) = (parse(start)?, parse(stop)?);
                let k: usize = count.trim().parse().map_err(|_| format!("bad count {count:?}"))?;
                Ok(Axis(match k {
                    0 => Vec::new(),
                    1 => vec![a],
                    _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
                }))
            }
            [_] => Ok(Axis(s.split(',').map(parse).collect::<Result<_, _>>()?)),
            _ => Err(format!("expected a list a,b,c or start:stop:count, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub index: usize,
    pub n: usize,
    pub h: f64,
    pub e: f64,
    pub family: Option<FamilyLabel>,
    pub x1: Option<f64>,
    pub x2: Option<f64>,
    pub x0: Option<f64>,
    pub t2: Option<f64>,
    pub t_inf: Option<f64>,
    pub period: Option<f64>,
    pub perimeter: Option<f64>,
    pub volume: Option<f64>,
    pub error: Option<String>,
}

fn evaluate(index: usize, n: usize, h: f64, e: f64, cfg: &SolveConfig) -> Row {
    let mut row = Row {
        index,
        n,
        h,
        e,
        family: None,
        x1: None,
        x2: None,
        x0: None,
        t2: None,
        t_inf: None,
        period: None,
        perimeter: None,
        volume: None,
        error: None,
    };
    let result = (|| -> cc_delaunay::Result<()> {
        row.family = Some(classify(n, h, e)?);
        if let Some(r) = structural_radii(n, h, e)? {
            (row.x1, row.x2, row.x0) = (Some(r.x1), Some(r.x2), r.x0);
        }
        let s = summarize(n, h, e, cfg, &mut Vec::new())?;
        (row.t2, row.t_inf, row.period, row.perimeter, row.volume) = (s.t2, s.t_inf, s.period, s.perimeter, s.volume);
        Ok(())
    })();
    if let Err(err) = result {
        row.error = Some(err.to_string());
    }
    row
}

/// Evaluates the grid `ns x hs x es` (E fastest). Rows come back in grid
/// order whatever the scheduling.
pub fn run(ns: &[usize], hs: &[f64], es: &[f64], cfg: &SolveConfig) -> Vec<Row> {
    let grid: Vec<(usize, f64, f64)> = ns
        .iter()
        .flat_map(|&n| hs.iter().flat_map(move |&h| es.iter().map(move |&e| (n, h, e))))
        .collect();
    grid.into_par_iter()
        .enumerate()
        .map(|(i, (n, h, e))| evaluate(i, n, h, e, cfg))
        .collect()
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "index", "n", "h", "e", "family", "x1", "x2", "x0", "t2", "t_inf", "period", "perimeter", "volume", "error",
    ])?;
    for r in rows {
        out.write_record([
            r.index.to_string(),
            r.n.to_string(),
            format!("{:.16e}", r.h),
            format!("{:.16e}", r.e),
            r.family.map(|f| f.name().to_string()).unwrap_or_default(),
            cell(r.x1),
            cell(r.x2),
            cell(r.x0),
            cell(r.t2),
            cell(r.t_inf),
            cell(r.period),
            cell(r.perimeter),
            cell(r.volume),
            r.error.clone().unwrap_or_default(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_forms() {
        assert_eq!("1,2.5".parse::<Axis>().unwrap(), Axis(vec![1.0, 2.5]));
        assert_eq!("0:1:3".parse::<Axis>().unwrap(), Axis(vec![0.0, 0.5, 1.0]));
        assert_eq!("0:1:0".parse::<Axis>().unwrap(), Axis(vec![]));
        assert_eq!("".parse::<Axis>().unwrap(), Axis(vec![]));
        assert!("a".parse::<Axis>().is_err());
        assert!("0:1".parse::<Axis>().is_err());
        assert!("nan".parse::<Axis>().is_err());
    }
}

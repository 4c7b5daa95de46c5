//! Plot-ready `.dat` files from sweep results.
//!
//! Each series becomes `<figure>_<series>.dat` holding whitespace-separated
//! `x y stddev` lines with six significant digits. When a table mixes models,
//! `p` values or `beta` values, the series name gets a `_<model>`, `_p<p>` or
//! `_beta<beta>` suffix.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metrics::{log_growth_fit, mean_std, MetricsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Path length and clustering ratios against `p`.
    Fig2a,
    /// Unidirectional pair fraction against `p`.
    Fig2b,
    /// APL against `D`, with the fitted log curve.
    Fig3,
    /// APL reduction against `D` for the self-organized network.
    Fig5a,
    /// Unidirectional pair fraction against `D` for the self-organized network.
    Fig5b,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2a" => Ok(Figure::Fig2a),
            "fig2b" => Ok(Figure::Fig2b),
            "fig3" => Ok(Figure::Fig3),
            "fig5a" => Ok(Figure::Fig5a),
            "fig5b" => Ok(Figure::Fig5b),
            other => Err(Error::Config(format!("unknown figure `{other}`"))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig2a => "fig2a",
            Figure::Fig2b => "fig2b",
            Figure::Fig3 => "fig3",
            Figure::Fig5a => "fig5a",
            Figure::Fig5b => "fig5b",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    /// `(x, y, stddev of y)`.
    pub points: Vec<(f64, f64, f64)>,
}

/// Rows sharing a key, in first-appearance order.
fn group_by<K: PartialEq>(rows: &[MetricsReport], key: impl Fn(&MetricsReport) -> K) -> Vec<(K, Vec<&MetricsReport>)> {
    let mut groups: Vec<(K, Vec<&MetricsReport>)> = Vec::new();
    for r in rows {
        let k = key(r);
        match groups.iter_mut().find(|(g, _)| *g == k) {
            Some((_, members)) => members.push(r),
            None => groups.push((k, vec![r])),
        }
    }
    groups
}

fn suffix(base: &str, parts: &[(bool, String)]) -> String {
    let mut name = base.to_string();
    for (on, part) in parts {
        if *on {
            name.push('_');
            name.push_str(part);
        }
    }
    name
}

fn distinct<T: PartialEq>(values: impl Iterator<Item = T>) -> usize {
    let mut seen: Vec<T> = Vec::new();
    for v in values {
        if !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen.len()
}

fn point(x: f64, ys: &[f64]) -> (f64, f64, f64) {
    let (m, s) = mean_std(ys);
    (x, m, s)
}

fn curve(
    rows: &[MetricsReport],
    series_key: impl Fn(&MetricsReport) -> String,
    x_key: impl Fn(&[&MetricsReport]) -> f64,
    point_key: impl Fn(&MetricsReport) -> (u64, u64),
    y: impl Fn(&MetricsReport) -> f64,
) -> Vec<PlotSeries> {
    group_by(rows, &series_key)
        .into_iter()
        .map(|(name, members)| {
            let owned: Vec<MetricsReport> = members.into_iter().cloned().collect();
            let points = group_by(&owned, &point_key)
                .into_iter()
                .map(|(_, g)| point(x_key(&g), &g.iter().map(|r| y(r)).collect::<Vec<_>>()))
                .collect();
            PlotSeries { name, points }
        })
        .collect()
}

pub fn plot_series(rows: &[MetricsReport], figure: Figure) -> Result<Vec<PlotSeries>> {
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let wfb = matches!(figure, Figure::Fig5a | Figure::Fig5b);
    if wfb && rows.iter().any(|r| r.beta.is_none()) {
        return Err(Error::MissingColumn("beta".into()));
    }
    let multi_model = distinct(rows.iter().map(|r| r.model.clone())) > 1;
    let multi_p = distinct(rows.iter().map(|r| r.p.to_bits())) > 1;
    let multi_beta = distinct(rows.iter().map(|r| r.beta.map(f64::to_bits))) > 1;
    let mean_d = |g: &[&MetricsReport]| g.iter().map(|r| r.diameter_d).sum::<f64>() / g.len() as f64;
    let region = |r: &MetricsReport| (r.width.to_bits(), r.height.to_bits());
    let by_p = |r: &MetricsReport| (r.p.to_bits(), 0);
    let first_p = |g: &[&MetricsReport]| g[0].p;

    let named = |base: &'static str| move |r: &MetricsReport| suffix(base, &[(multi_model, r.model.clone())]);
    let series = match figure {
        Figure::Fig2a => {
            let mut s = curve(rows, named("L_ratio"), first_p, by_p, MetricsReport::apl_ratio);
            s.extend(curve(
                rows,
                named("C_ratio"),
                first_p,
                by_p,
                MetricsReport::clustering_ratio,
            ));
            s
        }
        Figure::Fig2b => curve(rows, named("uni_frac"), first_p, by_p, |r| {
            r.unidirectional_pair_fraction
        }),
        Figure::Fig3 => {
            let key =
                |r: &MetricsReport| suffix("apl", &[(multi_model, r.model.clone()), (multi_p, format!("p{}", r.p))]);
            let mut out = curve(rows, key, mean_d, region, |r| r.apl);
            let fits: Vec<PlotSeries> = out
                .iter()
                .filter(|s| s.points.len() >= 3)
                .map(|s| -> Result<PlotSeries> {
                    let pts: Vec<(f64, f64)> = s.points.iter().map(|p| (p.0, p.1)).collect();
                    let fit = log_growth_fit(&pts)?;
                    let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
                    let hi = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
                    let samples = 50;
                    let points = (0..samples)
                        .map(|i| {
                            let d = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
                            (d, fit.eval(d.ln()), 0.0)
                        })
                        .collect();
                    Ok(PlotSeries {
                        name: s.name.replacen("apl", "fit", 1),
                        points,
                    })
                })
                .collect::<Result<_>>()?;
            out.extend(fits);
            out
        }
        Figure::Fig5a | Figure::Fig5b => {
            let base = if figure == Figure::Fig5a {
                "apl_reduction"
            } else {
                "uni_frac"
            };
            let key =
                move |r: &MetricsReport| suffix(base, &[(multi_beta, format!("beta{}", r.beta.unwrap_or(f64::NAN)))]);
            if figure == Figure::Fig5a {
                curve(rows, key, mean_d, region, MetricsReport::apl_reduction)
            } else {
                curve(rows, key, mean_d, region, |r| r.unidirectional_pair_fraction)
            }
        }
    };
    Ok(series)
}

fn six(x: f64) -> String {
    format!("{x:.5e}")
}

/// Writes every series of `figure` into `out_dir`; returns the paths written.
pub fn emit_plotdata(rows: &[MetricsReport], figure: Figure, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let series = plot_series(rows, figure)?;
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    for s in series {
        let path = out_dir.join(format!("{figure}_{}.dat", s.name));
        let mut text = format!("# {figure} {}\n", s.name);
        for (x, y, sd) in &s.points {
            text.push_str(&format!("{} {} {}\n", six(*x), six(*y), six(*sd)));
        }
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

/// Reads a `.dat` file written by [`emit_plotdata`].
pub fn read_plotdata(path: &Path) -> Result<Vec<(f64, f64, f64)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::parse(path, format!("bad line `{l}`")))?;
            match v[..] {
                [x, y, s] => Ok((x, y, s)),
                _ => Err(Error::parse(path, format!("expected 3 columns in `{l}`"))),
            }
        })
        .collect()
}

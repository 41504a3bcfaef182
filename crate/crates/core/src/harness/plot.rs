//! Hand-written SVG line charts for run metrics and the speed-reward curves.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::record::{read_records, smooth, EpisodeRecord, Phase};
use super::train::{RunSummary, RECORDS_FILE, SUMMARY_FILE};
use crate::curriculum::AgentKind;
use crate::error::{Error, Result};
use crate::rewards::{speed_reward_original, speed_reward_revised, RewardParams};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

fn color(kind: AgentKind) -> &'static str {
    match kind {
        AgentKind::Sca => "#1f77b4",
        AgentKind::OneFoldCl => "#2ca02c",
        AgentKind::Curla => "#d62728",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
    /// Labelled markers drawn on top of the series.
    pub markers: Vec<(f64, f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_range(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        (lo, lo + 1.0)
    }
}

impl Chart {
    /// Data coordinates to SVG pixels.
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, x1) = self.x_range;
        let (y0, y1) = self.y_range;
        let px = LEFT + (x - x0) / (x1 - x0) * (WIDTH - LEFT - RIGHT);
        let py = HEIGHT - BOTTOM - (y - y0) / (y1 - y0) * (HEIGHT - TOP - BOTTOM);
        (px, py)
    }

    /// The exact `x,y` text this chart writes for a data point.
    pub fn point_text(&self, x: f64, y: f64) -> String {
        let (px, py) = self.map(x, y);
        format!("{px:.2},{py:.2}")
    }

    pub fn to_svg(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        let (bx0, by0) = self.map(self.x_range.0, self.y_range.0);
        let (bx1, by1) = self.map(self.x_range.1, self.y_range.1);
        let _ = writeln!(
            s,
            r#"<rect x="{bx0:.2}" y="{by1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            bx1 - bx0,
            by0 - by1
        );
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let xv = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let (px, _) = self.map(xv, self.y_range.0);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{by0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                by0 + 5.0,
                by0 + 18.0,
                tick_label(xv)
            );
            let yv = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let (_, py) = self.map(self.x_range.0, yv);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{bx0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
                bx0 - 5.0,
                bx0 - 8.0,
                py + 4.0,
                tick_label(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (bx0 + bx1) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
            (by0 + by1) / 2.0,
            (by0 + by1) / 2.0,
            escape(&self.y_label)
        );

        for series in &self.series {
            let pts: Vec<String> = series.points.iter().map(|&(x, y)| self.point_text(x, y)).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
                series.color,
                pts.join(" "),
                escape(&series.label)
            );
        }
        for (x, y, label) in &self.markers {
            let (px, py) = self.map(*x, *y);
            let _ = writeln!(
                s,
                r#"<circle cx="{px:.2}" cy="{py:.2}" r="3.5" fill="black"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                px + 6.0,
                py + 16.0,
                escape(label)
            );
        }
        for (i, series) in self.series.iter().enumerate() {
            let y = TOP + 14.0 + 18.0 * i as f64;
            let x = WIDTH - RIGHT - 150.0;
            let _ = writeln!(
                s,
                r#"<g class="legend"><rect x="{x:.2}" y="{:.2}" width="22" height="3" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
                y - 1.5,
                series.color,
                x + 28.0,
                y + 4.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 100.0 || v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Records and summary of one run directory.
#[derive(Debug, Clone)]
pub struct RunData {
    pub summary: RunSummary,
    pub records: Vec<EpisodeRecord>,
}

pub fn load_run(dir: &Path) -> Result<RunData> {
    let summary_path = dir.join(SUMMARY_FILE);
    if !summary_path.exists() {
        return Err(Error::MissingFile(summary_path));
    }
    let summary: RunSummary = serde_json::from_str(&fs::read_to_string(&summary_path)?)
        .map_err(|e| Error::format("run summary", e.to_string()))?;
    let records = read_records(&dir.join(RECORDS_FILE))?;
    Ok(RunData { summary, records })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Distance,
    Speed,
}

impl Metric {
    fn value(self, r: &EpisodeRecord) -> f64 {
        match self {
            Metric::Distance => r.distance_pct,
            Metric::Speed => r.avg_speed_kmh,
        }
    }
}

/// Seed-averaged and smoothed `(episode, value)` series for one variant.
pub fn variant_series(runs: &[&RunData], phase: Phase, metric: Metric, smoothing: f64) -> Result<Vec<(f64, f64)>> {
    let per_run: Vec<Vec<&EpisodeRecord>> = runs
        .iter()
        .map(|r| r.records.iter().filter(|x| x.phase == phase).collect())
        .collect();
    let n = per_run.iter().map(Vec::len).min().unwrap_or(0);
    if n == 0 {
        return Ok(Vec::new());
    }
    let mean: Vec<f64> = (0..n)
        .map(|i| per_run.iter().map(|r| metric.value(r[i])).sum::<f64>() / per_run.len() as f64)
        .collect();
    let smoothed = smooth(&mean, smoothing)?;
    Ok(per_run[0][..n]
        .iter()
        .zip(smoothed)
        .map(|(r, y)| (r.episode as f64, y))
        .collect())
}

pub fn metric_chart(runs: &[RunData], phase: Phase, metric: Metric, smoothing: f64) -> Result<Chart> {
    let mut by_variant: BTreeMap<u8, (AgentKind, Vec<&RunData>)> = BTreeMap::new();
    for r in runs {
        let kind = r.summary.variant;
        by_variant.entry(kind as u8).or_insert_with(|| (kind, Vec::new())).1.push(r);
    }
    let mut series = Vec::new();
    for (kind, group) in by_variant.values() {
        let points = variant_series(group, phase, metric, smoothing)?;
        if !points.is_empty() {
            series.push(Series {
                label: kind.label().to_string(),
                color: color(*kind).to_string(),
                points,
            });
        }
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let x_max = all().map(|p| p.0).fold(0.0, f64::max);
    let y_max = all().map(|p| p.1).fold(0.0, f64::max);
    let (kind_title, y_label) = match metric {
        Metric::Distance => ("Distance Traveled", "Distance traveled (% of lap)"),
        Metric::Speed => ("Average Speed", "Average speed (km/h)"),
    };
    let phase_title = match phase {
        Phase::Train => "Training Metric",
        Phase::Eval => "Evaluation Metric",
    };
    Ok(Chart {
        title: format!("{phase_title}: {kind_title}"),
        x_label: "Episode".into(),
        y_label: y_label.into(),
        x_range: nice_range(0.0, x_max),
        y_range: nice_range(0.0, y_max * 1.1),
        series,
        markers: Vec::new(),
    })
}

/// Speed reward curve over `[0, v_max + 15]` km/h sampled every 0.5 km/h,
/// with the anchor points marked.
pub fn reward_chart(revised: bool, params: &RewardParams) -> Result<Chart> {
    let v_end = params.v_max + 15.0;
    let n = (v_end / 0.5).round() as usize;
    let f = if revised { speed_reward_revised } else { speed_reward_original };
    let mut xs: Vec<f64> = (0..=n).map(|i| i as f64 * 0.5).collect();
    xs.extend([params.v_min, params.v_target, params.v_max]);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let points = xs.iter().map(|&v| Ok((v, f(v, params)?))).collect::<Result<Vec<_>>>()?;
    let markers = [params.v_min, params.v_target, params.v_max]
        .into_iter()
        .map(|v| {
            let y = f(v, params)?;
            Ok((v, y, format!("({}, {})", tick_label(v), tick_label(y))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Chart {
        title: if revised {
            "Revised Speed Reward".into()
        } else {
            "Original Speed Reward".into()
        },
        x_label: "Speed (km/h)".into(),
        y_label: "Reward".into(),
        x_range: (0.0, v_end),
        y_range: (0.0, 1.1),
        series: vec![Series {
            label: if revised { "r_v'".into() } else { "r_v".into() },
            color: "#333333".into(),
            points,
        }],
        markers,
    })
}

pub const PLOT_FILES: [&str; 6] = [
    "train_distance.svg",
    "train_speed.svg",
    "eval_distance.svg",
    "eval_speed.svg",
    "reward_original.svg",
    "reward_revised.svg",
];

/// Writes the four metric charts and the two reward-curve charts. The
/// smoothing factor defaults to the first run's configured value.
pub fn emit_plots(runs: &[RunData], out_dir: &Path, smoothing: Option<f64>) -> Result<Vec<PathBuf>> {
    let first = runs.first().ok_or(Error::Empty("run list"))?;
    let factor = smoothing.unwrap_or(first.summary.smoothing);
    fs::create_dir_all(out_dir)?;
    let params = RewardParams::default();
    let charts = [
        metric_chart(runs, Phase::Train, Metric::Distance, factor)?,
        metric_chart(runs, Phase::Train, Metric::Speed, factor)?,
        metric_chart(runs, Phase::Eval, Metric::Distance, factor)?,
        metric_chart(runs, Phase::Eval, Metric::Speed, factor)?,
        reward_chart(false, &params)?,
        reward_chart(true, &params)?,
    ];
    let mut paths = Vec::with_capacity(charts.len());
    for (chart, name) in charts.iter().zip(PLOT_FILES) {
        let p = out_dir.join(name);
        fs::write(&p, chart.to_svg())?;
        paths.push(p);
    }
    Ok(paths)
}

//! SVG line chart of mean `Δ/L*` against the standard error.
//!
//! One polyline per scenario: green for cost-only, red for prob-only, black
//! for both. When the summaries carry simulated values those are drawn solid
//! and the closed-form values dashed on top; otherwise the closed-form values
//! are the solid curves.

use std::fmt::Write as _;
use std::path::Path;

use crate::experiments::{RowKind, Scenario, SweepRow};
use crate::output::{write_file, OutputError};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 70.0;
const TICKS: usize = 5;
const DASH: &str = "6 4";

fn color(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::CostOnly => "green",
        Scenario::ProbOnly => "red",
        Scenario::Both => "black",
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRender {
    pub svg: String,
    pub solid_curves: usize,
    pub dashed_curves: usize,
    pub warnings: Vec<String>,
}

struct Curve {
    scenario: Scenario,
    dashed: bool,
    points: Vec<(f64, f64)>,
}

fn collect_curves(rows: &[SweepRow], overlay_analytic: bool) -> (Vec<Curve>, Vec<String>) {
    let summaries: Vec<&SweepRow> = rows
        .iter()
        .filter(|r| r.kind == RowKind::Summary && r.scenario.is_some() && r.sigma.is_some())
        .collect();
    let has_mc = summaries.iter().any(|r| r.norm_inc_mc.is_some());
    let mut warnings = Vec::new();
    if overlay_analytic && !has_mc {
        warnings.push(
            "no simulated values in the summaries; drawing closed-form curves solid and omitting the dashed overlay"
                .to_string(),
        );
    }

    let mut curves = Vec::new();
    for scenario in Scenario::ALL {
        let mut mine: Vec<&&SweepRow> = summaries
            .iter()
            .filter(|r| r.scenario == Some(scenario))
            .collect();
        if mine.is_empty() {
            continue;
        }
        mine.sort_by(|a, b| a.sigma.partial_cmp(&b.sigma).expect("finite sigma"));
        let series = |pick: fn(&SweepRow) -> Option<f64>| -> Vec<(f64, f64)> {
            mine.iter()
                .filter_map(|r| pick(r).map(|y| (r.sigma.unwrap(), y)))
                .collect()
        };
        if has_mc {
            curves.push(Curve {
                scenario,
                dashed: false,
                points: series(|r| r.norm_inc_mc),
            });
            curves.push(Curve {
                scenario,
                dashed: true,
                points: series(|r| r.norm_inc_analytic),
            });
        } else {
            curves.push(Curve {
                scenario,
                dashed: false,
                points: series(|r| r.norm_inc_analytic),
            });
        }
    }
    curves.retain(|c| !c.points.is_empty());
    (curves, warnings)
}

fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) {
        return 1.0;
    }
    let magnitude = 10f64.powf(v.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .find(|m| m * magnitude >= v)
        .unwrap_or(10.0);
    step * magnitude
}

/// Render the chart. `overlay_analytic` asks for dashed closed-form curves;
/// it only has an effect when simulated values are present.
pub fn render_svg(rows: &[SweepRow], overlay_analytic: bool, title: &str) -> PlotRender {
    let (curves, warnings) = collect_curves(rows, overlay_analytic);
    let all = curves.iter().flat_map(|c| c.points.iter());
    let (mut x_max, mut y_max) = (0.0f64, 0.0f64);
    for &(x, y) in all {
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    let x_max = nice_max(x_max);
    let y_max = nice_max(y_max);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + plot_h - y / y_max * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

    // axes
    let (x0, y0) = (sx(0.0), sy(0.0));
    let _ = writeln!(
        svg,
        r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{:.2}" y2="{y0:.2}" stroke="#333"/>"##,
        sx(x_max)
    );
    let _ = writeln!(
        svg,
        r##"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{:.2}" stroke="#333"/>"##,
        sy(y_max)
    );
    for i in 0..=TICKS {
        let fx = x_max * i as f64 / TICKS as f64;
        let fy = y_max * i as f64 / TICKS as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"#,
            sx(fx),
            y0 + 18.0,
            tick_label(fx)
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#ddd"/>"##,
            x0,
            sy(fy),
            sx(x_max),
            sy(fy)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            sy(fy) + 4.0,
            tick_label(fy)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">standard error σ</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">mean Δ/L*</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    );

    let mut solid = 0;
    let mut dashed = 0;
    for curve in &curves {
        let points: Vec<String> = curve
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let style = if curve.dashed {
            dashed += 1;
            format!(r#" stroke-dasharray="{DASH}""#)
        } else {
            solid += 1;
            String::new()
        };
        let _ = writeln!(
            svg,
            r#"<polyline data-scenario="{}" data-source="{}" fill="none" stroke="{}" stroke-width="2"{} points="{}"/>"#,
            curve.scenario.as_str(),
            if curve.dashed { "analytic" } else { "primary" },
            color(curve.scenario),
            style,
            points.join(" ")
        );
    }

    // legend
    let legend_x = WIDTH - MARGIN_RIGHT + 15.0;
    for (i, scenario) in Scenario::ALL.into_iter().enumerate() {
        let y = MARGIN_TOP + 20.0 + 22.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{legend_x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/>"#,
            legend_x + 25.0,
            color(scenario)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            legend_x + 32.0,
            y + 4.0,
            scenario.as_str()
        );
    }
    if dashed > 0 {
        let y = MARGIN_TOP + 20.0 + 22.0 * 3.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{legend_x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#555" stroke-width="2" stroke-dasharray="{DASH}"/>"##,
            legend_x + 25.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="12">closed form</text>"#,
            legend_x + 32.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");

    PlotRender {
        svg,
        solid_curves: solid,
        dashed_curves: dashed,
        warnings,
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render and write the chart; returns what was drawn.
pub fn emit_plot(
    rows: &[SweepRow],
    path: &Path,
    overlay_analytic: bool,
    title: &str,
) -> Result<PlotRender, OutputError> {
    let render = render_svg(rows, overlay_analytic, title);
    for w in &render.warnings {
        log::warn!("{w}");
    }
    write_file(path, &render.svg)?;
    Ok(render)
}

//! SVG scatter of rejection rate against the censored fraction.

use std::fmt::Write;

use nicr_core::power::{Hypothesis, PowerStudyResult};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;

/// Nominal rejection rate for a result: target power under ALT, `alpha / 2` under NULL.
pub fn reference_level(r: &PowerStudyResult) -> f64 {
    match r.scenario.hypothesis {
        Hypothesis::Alt => r.scenario.target_power,
        Hypothesis::Null => r.scenario.alpha / 2.0,
    }
}

fn y_range(results: &[PowerStudyResult], refs: &[f64]) -> (f64, f64) {
    let values = results.iter().map(|r| r.rejection_rate).chain(refs.iter().copied());
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let pad = ((hi - lo) * 0.1).max(0.01);
    ((lo - pad).max(0.0), (hi + pad).min(1.0))
}

pub fn power_svg(results: &[PowerStudyResult]) -> String {
    let mut refs: Vec<f64> = results.iter().map(reference_level).collect();
    refs.sort_by(f64::total_cmp);
    refs.dedup();
    let (y_lo, y_hi) = y_range(results, &refs);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + x * plot_w;
    let py = |y: f64| MARGIN_TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{0:.2}" y2="{2:.2}" stroke="black"/><text x="{0:.2}" y="{3:.2}" text-anchor="middle">{4:.1}</text>"#,
            px(x),
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0,
            MARGIN_TOP + plot_h + 19.0,
            x
        );
    }
    for i in 0..=5 {
        let y = y_lo + (y_hi - y_lo) * i as f64 / 5.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="black"/><text x="{3:.2}" y="{4:.2}" text-anchor="end">{5:.3}</text>"#,
            MARGIN_LEFT - 5.0,
            py(y),
            MARGIN_LEFT,
            MARGIN_LEFT - 8.0,
            py(y) + 4.0,
            y
        );
    }
    for level in &refs {
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{1:.2}" x2="{2:.2}" y2="{1:.2}" stroke="gray" stroke-dasharray="6 4"/>"#,
            MARGIN_LEFT,
            py(*level),
            MARGIN_LEFT + plot_w
        );
    }
    for r in results {
        let color = match r.scenario.hypothesis {
            Hypothesis::Alt => "steelblue",
            Hypothesis::Null => "firebrick",
        };
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3.5" fill="{color}"/>"#,
            px(r.mean_frac_censored.clamp(0.0, 1.0)),
            py(r.rejection_rate)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Censoring rate</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">Rejection rate</text>"#,
        MARGIN_TOP + plot_h / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

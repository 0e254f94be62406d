//! Self-contained SVG rendering of the coverage study: one panel per target
//! mean shift, empirical coverage against the source sample size, one series
//! per method, and a dashed rule at the nominal 0.95 level. The data points
//! are embedded as XML comments so the figure doubles as a plain-text record.

use std::fmt::Write as _;

use ridgeboost_core::sim::CoverageRow;

const PANEL_W: f64 = 240.0;
const PANEL_H: f64 = 220.0;
const MARGIN_L: f64 = 52.0;
const MARGIN_T: f64 = 40.0;
const PANEL_GAP: f64 = 36.0;
const BOTTOM: f64 = 56.0;

fn fnum(v: f64) -> String {
    format!("{v:.2}")
}

pub fn render_figure(rows: &[CoverageRow]) -> String {
    let mut mus: Vec<f64> = rows.iter().map(|r| r.mu_target).collect();
    mus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mus.dedup();
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();

    let width = MARGIN_L + mus.len() as f64 * (PANEL_W + PANEL_GAP);
    let height = MARGIN_T + PANEL_H + BOTTOM;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">",
        fnum(width),
        fnum(height),
        fnum(width),
        fnum(height)
    );
    let _ = writeln!(
        svg,
        "<!-- empirical coverage of nominal 95% confidence intervals -->"
    );
    for row in rows {
        let _ = writeln!(
            svg,
            "<!-- data: n={} mu={} method={} coverage={} width={} bias={} reps={} -->",
            row.n,
            row.mu_target,
            row.method.as_str(),
            row.coverage,
            row.mean_ci_width,
            row.mean_bias,
            row.replications
        );
    }
    let _ = writeln!(
        svg,
        "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>",
        fnum(width),
        fnum(height)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">Coverage of nominal 95% intervals under target mean shift</text>",
        fnum(width / 2.0)
    );

    // x position of a sample size inside a panel.
    let x_of = |panel: usize, n: usize| -> f64 {
        let x0 = MARGIN_L + panel as f64 * (PANEL_W + PANEL_GAP);
        let idx = ns.iter().position(|&m| m == n).unwrap_or(0);
        let frac = if ns.len() > 1 {
            idx as f64 / (ns.len() - 1) as f64
        } else {
            0.5
        };
        x0 + 18.0 + frac * (PANEL_W - 36.0)
    };
    let y_of = |cov: f64| -> f64 { MARGIN_T + (1.0 - cov.clamp(0.0, 1.0)) * PANEL_H };

    for (p, &mu) in mus.iter().enumerate() {
        let x0 = MARGIN_L + p as f64 * (PANEL_W + PANEL_GAP);
        // Panel frame and gridlines.
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>",
            fnum(x0),
            fnum(MARGIN_T),
            fnum(PANEL_W),
            fnum(PANEL_H)
        );
        for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let y = y_of(tick);
            let _ = writeln!(
                svg,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#ddd\" stroke-width=\"0.5\"/>",
                fnum(x0),
                fnum(y),
                fnum(x0 + PANEL_W),
                fnum(y)
            );
            if p == 0 {
                let _ = writeln!(
                    svg,
                    "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{tick:.2}</text>",
                    fnum(x0 - 6.0),
                    fnum(y + 3.0)
                );
            }
        }
        // Nominal level rule.
        let y95 = y_of(0.95);
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#c0392b\" stroke-width=\"1\" stroke-dasharray=\"5,3\"/>",
            fnum(x0),
            fnum(y95),
            fnum(x0 + PANEL_W),
            fnum(y95)
        );
        // Panel title and x ticks.
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">target shift mu = {mu}</text>",
            fnum(x0 + PANEL_W / 2.0),
            fnum(MARGIN_T - 8.0)
        );
        for &n in &ns {
            let x = x_of(p, n);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">{n}</text>",
                fnum(x),
                fnum(MARGIN_T + PANEL_H + 14.0)
            );
        }
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">source sample size n</text>",
            fnum(x0 + PANEL_W / 2.0),
            fnum(MARGIN_T + PANEL_H + 30.0)
        );

        // One polyline + markers per method.
        for (method, color) in [("naive", "#c44e52"), ("boosted", "#1b6ca8")] {
            let mut pts: Vec<(usize, f64)> = rows
                .iter()
                .filter(|r| r.mu_target == mu && r.method.as_str() == method)
                .map(|r| (r.n, r.coverage))
                .collect();
            pts.sort_unstable_by_key(|&(n, _)| n);
            if pts.is_empty() {
                continue;
            }
            let path: Vec<String> = pts
                .iter()
                .map(|&(n, c)| format!("{},{}", fnum(x_of(p, n)), fnum(y_of(c))))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                path.join(" ")
            );
            for &(n, c) in &pts {
                let _ = writeln!(
                    svg,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                    fnum(x_of(p, n)),
                    fnum(y_of(c))
                );
            }
        }
    }

    // Legend.
    let ly = MARGIN_T + PANEL_H + 44.0;
    for (k, (method, color)) in [("naive", "#c44e52"), ("boosted", "#1b6ca8")]
        .iter()
        .enumerate()
    {
        let lx = MARGIN_L + k as f64 * 110.0;
        let _ = writeln!(
            svg,
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            fnum(lx),
            fnum(ly),
            fnum(lx + 22.0),
            fnum(ly)
        );
        let _ = writeln!(
            svg,
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
            fnum(lx + 11.0),
            fnum(ly)
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{method}</text>",
            fnum(lx + 28.0),
            fnum(ly + 4.0)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#c0392b\">dashed: nominal 0.95</text>",
        fnum(MARGIN_L + 230.0),
        fnum(ly + 4.0)
    );
    svg.push_str("</svg>\n");
    svg
}

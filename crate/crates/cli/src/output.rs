//! CSV rows and SVG line charts.

use std::io::Write;

use bregman_bound::experiment::ExperimentCurve;

use crate::CliError;

pub const HEADER: [&str; 8] = [
    "experiment",
    "sweep_param",
    "sweep_value",
    "divergence",
    "constant_C",
    "value",
    "bounded_value",
    "q_star",
];

/// One CSV record.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub experiment: String,
    pub sweep_param: String,
    pub sweep_value: f64,
    pub divergence: String,
    pub constant_c: f64,
    pub value: f64,
    pub bounded_value: f64,
    pub q_star: Vec<f64>,
}

/// Order by experiment, sweep value, then divergence name; stable otherwise.
pub fn sort_rows(rows: &mut [Row]) {
    rows.sort_by(|a, b| {
        a.experiment
            .cmp(&b.experiment)
            .then(a.sweep_value.total_cmp(&b.sweep_value))
            .then(a.divergence.cmp(&b.divergence))
    });
}

/// `x` with 12 significant digits in positional notation.
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding can carry into a new leading digit
    let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
    if digits.trim_start_matches('0').len() > 12 && decimals > 0 {
        let d = decimals - 1;
        return format!("{x:.d$}");
    }
    s
}

pub fn join_vector(v: &[f64]) -> String {
    v.iter().map(|&x| sig12(x)).collect::<Vec<_>>().join(";")
}

pub fn write_csv<W: Write>(out: W, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(HEADER).map_err(fail)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.sweep_param.clone(),
            r.sweep_value.to_string(),
            r.divergence.clone(),
            r.constant_c.to_string(),
            r.value.to_string(),
            r.bounded_value.to_string(),
            join_vector(&r.q_star),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| CliError::Output(e.to_string()))
}

/// Rows for every point of every curve.
pub fn curve_rows(curves: &[ExperimentCurve]) -> Vec<Row> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(move |p| Row {
                experiment: c.experiment.clone(),
                sweep_param: c.sweep_param.clone(),
                sweep_value: p.sweep_value,
                divergence: c.divergence.clone(),
                constant_c: c.constant,
                value: p.value,
                bounded_value: p.bounded_value,
                q_star: p.q_star.clone(),
            })
        })
        .collect()
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const MARGIN: f64 = 60.0;
const LEGEND: f64 = 170.0;
const COLOURS: [&str; 8] = [
    "#000000", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
];

/// Polyline chart of `bounded_value` (that is `value / C`) against the sweep value for
/// every curve of one experiment. KL is drawn first, in black and thicker.
pub fn svg_chart(title: &str, curves: &[&ExperimentCurve], log_x: bool) -> String {
    let xs = |v: f64| if log_x { v.log10() } else { v };
    let finite = |v: f64| v.is_finite();
    let all_pts: Vec<(f64, f64)> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| (xs(p.sweep_value), p.bounded_value)))
        .filter(|&(x, y)| finite(x) && finite(y))
        .collect();
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for &(x, y) in &all_pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x1 = x0 + 1.0;
    }
    if !(y1 > 0.0) {
        y1 = 1.0;
    }
    let plot_w = WIDTH - 2.0 * MARGIN - LEGEND;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * plot_w;
    let py = |y: f64| HEIGHT - MARGIN - y / y1 * plot_h;

    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-size=\"15\">{}</text>\n",
        MARGIN,
        escape(title)
    ));
    s.push_str(&format!(
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#888\"/>\n"
    ));
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let label = if log_x {
            format!("{:.2e}", 10f64.powf(xv))
        } else {
            format!("{xv:.2}")
        };
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{label}</text>\n",
            px(xv),
            HEIGHT - MARGIN + 18.0
        ));
        let yv = f * y1;
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text>\n",
            MARGIN - 6.0,
            py(yv) + 4.0,
            yv
        ));
    }
    let mut ordered: Vec<&&ExperimentCurve> = curves.iter().collect();
    ordered.sort_by_key(|c| c.divergence != "kl");
    for (i, c) in ordered.iter().enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let width = if c.divergence == "kl" { 2.5 } else { 1.3 };
        let dash = if c.is_plugin() { " stroke-dasharray=\"5,3\"" } else { "" };
        let pts: Vec<String> = c
            .points
            .iter()
            .map(|p| (xs(p.sweep_value), p.bounded_value))
            .filter(|&(x, y)| finite(x) && finite(y))
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        s.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"{width}\"{dash} points=\"{}\"/>\n",
            pts.join(" ")
        ));
        let ly = MARGIN + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - LEGEND - MARGIN / 2.0;
        s.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{colour}\" stroke-width=\"{width}\"{dash}/>\n",
            lx + 24.0
        ));
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n",
            lx + 30.0,
            ly + 4.0,
            escape(&c.divergence)
        ));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

//! Hand-written SVG: a scatter of zeros against critical points, and log-log
//! line charts with a quantile band and reference slopes.

use std::fmt::Write as _;

use crate::Complex;

const W: f64 = 520.0;
const H: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (64.0, 20.0, 36.0, 52.0); // left, right, top, bottom

/// One line on a chart. `band` holds `(x, lo, hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub band: Option<Vec<(f64, f64, f64)>>,
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        W / 2.0,
        esc(title)
    )
    .unwrap();
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN.0 + (x - self.x0) / (self.x1 - self.x0) * (W - MARGIN.0 - MARGIN.1)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN.3 - (y - self.y0) / (self.y1 - self.y0) * (H - MARGIN.2 - MARGIN.3)
    }

    fn border(&self, out: &mut String) {
        writeln!(
            out,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            MARGIN.0,
            MARGIN.2,
            W - MARGIN.0 - MARGIN.1,
            H - MARGIN.2 - MARGIN.3
        )
        .unwrap();
    }
}

/// Zeros as hollow circles, critical points as filled dots, on equal axes.
pub fn scatter_plot(title: &str, zeros: &[Complex], crit: &[Complex]) -> String {
    let reach = zeros
        .iter()
        .chain(crit)
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max)
        .max(1e-9)
        * 1.08;
    // square plotting area so the picture is not distorted
    let side = (W - MARGIN.0 - MARGIN.1).min(H - MARGIN.2 - MARGIN.3);
    let aspect_x = (W - MARGIN.0 - MARGIN.1) / side;
    let aspect_y = (H - MARGIN.2 - MARGIN.3) / side;
    let f = Frame {
        x0: -reach * aspect_x,
        x1: reach * aspect_x,
        y0: -reach * aspect_y,
        y1: reach * aspect_y,
    };
    let mut out = String::new();
    header(&mut out, title);
    f.border(&mut out);
    writeln!(
        out,
        r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ccc"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#ccc"/>"##,
        f.px(f.x0), f.py(0.0), f.px(f.x1), f.py(0.0),
        f.px(0.0), f.py(f.y0), f.px(0.0), f.py(f.y1)
    )
    .unwrap();
    for z in zeros {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="none" stroke="#1f5fa8"/>"##,
            f.px(z.re),
            f.py(z.im)
        )
        .unwrap();
    }
    for z in crit {
        writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="#c0392b"/>"##,
            f.px(z.re),
            f.py(z.im)
        )
        .unwrap();
    }
    let ly = H - 18.0;
    writeln!(
        out,
        r##"<circle cx="{}" cy="{}" r="3" fill="none" stroke="#1f5fa8"/><text x="{}" y="{}">zeros</text>"##,
        MARGIN.0 + 6.0, ly - 4.0, MARGIN.0 + 14.0, ly
    )
    .unwrap();
    writeln!(
        out,
        r##"<circle cx="{}" cy="{}" r="2" fill="#c0392b"/><text x="{}" y="{}">critical points</text>"##,
        MARGIN.0 + 76.0, ly - 4.0, MARGIN.0 + 84.0, ly
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="end">half-width {:.3}</text>"#,
        W - MARGIN.1,
        ly,
        reach
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

fn decade_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
    let mut t: Vec<f64> = (a..=b).map(f64::from).filter(|&e| e >= lo && e <= hi).collect();
    if t.len() < 2 {
        t = vec![lo, hi];
    }
    t
}

fn tick_label(e: f64) -> String {
    let v = 10f64.powf(e);
    if (e - e.round()).abs() < 1e-9 {
        if (0.0..=4.0).contains(&e) {
            format!("{}", v.round())
        } else {
            format!("1e{}", e.round())
        }
    } else {
        format!("{v:.3}")
    }
}

/// Log-log chart. Non-positive values are skipped. Dashed guides show slopes
/// -1/2 and -1 through the first point of the first series.
pub fn loglog_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let pos = |v: f64| v > 0.0 && v.is_finite();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if pos(x) && pos(y) {
                xs.push(x.log10());
                ys.push(y.log10());
            }
        }
        for &(x, lo, hi) in s.band.iter().flatten() {
            if pos(x) {
                for v in [lo, hi] {
                    if pos(v) {
                        ys.push(v.log10());
                    }
                }
            }
        }
    }
    let mut out = String::new();
    header(&mut out, title);
    if xs.is_empty() {
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">no positive data</text>"#, W / 2.0, H / 2.0).unwrap();
        out.push_str("</svg>\n");
        return out;
    }
    let span = |v: &[f64]| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let pad = ((hi - lo) * 0.06).max(0.05);
        (lo - pad, hi + pad)
    };
    let ((x0, x1), (y0, y1)) = (span(&xs), span(&ys));
    let f = Frame { x0, x1, y0, y1 };
    f.border(&mut out);
    for t in decade_ticks(x0, x1) {
        writeln!(
            out,
            r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="#eee"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"##,
            f.px(t), MARGIN.2, H - MARGIN.3, H - MARGIN.3 + 14.0, tick_label(t)
        )
        .unwrap();
    }
    for t in decade_ticks(y0, y1) {
        writeln!(
            out,
            r##"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="#eee"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"##,
            MARGIN.0, f.py(t), W - MARGIN.1, MARGIN.0 - 4.0, f.py(t) + 4.0, tick_label(t)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (MARGIN.0 + W - MARGIN.1) / 2.0,
        H - 12.0,
        esc(xlabel)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        (MARGIN.2 + H - MARGIN.3) / 2.0,
        esc(ylabel)
    )
    .unwrap();
    writeln!(out, r#"<clipPath id="plot"><rect x="{}" y="{}" width="{}" height="{}"/></clipPath>"#,
        MARGIN.0, MARGIN.2, W - MARGIN.0 - MARGIN.1, H - MARGIN.2 - MARGIN.3).unwrap();
    out.push_str(r#"<g clip-path="url(#plot)">"#);
    out.push('\n');

    if let Some(&(ax, ay)) = series
        .first()
        .and_then(|s| s.points.iter().find(|&&(x, y)| pos(x) && pos(y)))
    {
        let (ax, ay) = (ax.log10(), ay.log10());
        for (slope, label) in [(-0.5, "slope -1/2"), (-1.0, "slope -1")] {
            let yend = ay + slope * (x1 - ax);
            writeln!(
                out,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999" stroke-dasharray="4 3"/><text x="{:.2}" y="{:.2}" fill="#777" text-anchor="end">{label}</text>"##,
                f.px(ax), f.py(ay), f.px(x1), f.py(yend), f.px(x1) - 4.0, f.py(yend) - 4.0
            )
            .unwrap();
        }
    }

    const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#27ae60", "#8e44ad"];
    for (k, s) in series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        if let Some(band) = &s.band {
            let ok: Vec<_> = band.iter().filter(|&&(x, lo, hi)| pos(x) && pos(lo) && pos(hi)).collect();
            if ok.len() >= 2 {
                let mut pts = String::new();
                for &&(x, _, hi) in &ok {
                    write!(pts, "{:.2},{:.2} ", f.px(x.log10()), f.py(hi.log10())).unwrap();
                }
                for &&(x, lo, _) in ok.iter().rev() {
                    write!(pts, "{:.2},{:.2} ", f.px(x.log10()), f.py(lo.log10())).unwrap();
                }
                writeln!(out, r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#, pts.trim_end()).unwrap();
            }
        }
        let pts: Vec<(f64, f64)> = s
            .points
            .iter()
            .filter(|&&(x, y)| pos(x) && pos(y))
            .map(|&(x, y)| (f.px(x.log10()), f.py(y.log10())))
            .collect();
        let line: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.6"/>"#, line.join(" ")).unwrap();
        for (x, y) in &pts {
            writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#).unwrap();
        }
    }
    out.push_str("</g>\n");
    for (k, s) in series.iter().enumerate() {
        writeln!(
            out,
            r#"<text x="{}" y="{}" fill="{}">{}</text>"#,
            MARGIN.0 + 8.0,
            MARGIN.2 + 16.0 + 14.0 * k as f64,
            COLORS[k % COLORS.len()],
            esc(&s.label)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

//! Minimal self-contained SVG line plot.

use std::fmt::Write;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    /// NaN entries break the line.
    pub y: Vec<f64>,
}

pub struct Marker<'a> {
    pub label: &'a str,
    pub x: f64,
}

pub struct Plot<'a> {
    pub title: String,
    pub x_label: &'a str,
    pub x: Vec<f64>,
    pub log_x: bool,
    pub series: Vec<Series<'a>>,
    pub markers: Vec<Marker<'a>>,
}

const W: f64 = 800.0;
const H: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn fmt_tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot<'_> {
    pub fn render(&self) -> String {
        let tx = |x: f64| if self.log_x { x.ln() } else { x };
        let xs: Vec<f64> = self.x.iter().map(|&x| tx(x)).collect();
        let (mut x0, mut x1) = bounds(xs.iter().copied());
        if x0 == x1 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let (mut y0, mut y1) = bounds(self.series.iter().flat_map(|s| s.y.iter().copied()));
        if !y0.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        let pad = if y1 > y0 { 0.05 * (y1 - y0) } else { 0.5 };
        y0 -= pad;
        y1 += pad;

        let pw = W - LEFT - RIGHT;
        let ph = H - TOP - BOTTOM;
        let px = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let py = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#);
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let xv = x0 + f * (x1 - x0);
            let label = if self.log_x { xv.exp() } else { xv };
            let gx = px(xv);
            let _ = writeln!(s, r#"<line x1="{gx:.2}" y1="{}" x2="{gx:.2}" y2="{}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0);
            let _ = writeln!(s, r#"<text x="{gx:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, fmt_tick(label));
            let yv = y0 + f * (y1 - y0);
            let gy = py(yv);
            let _ = writeln!(s, r#"<line x1="{}" y1="{gy:.2}" x2="{LEFT}" y2="{gy:.2}" stroke="black"/>"#, LEFT - 5.0);
            let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, gy + 4.0, fmt_tick(yv));
        }
        let xl = if self.log_x { format!("{} (log scale)", self.x_label) } else { self.x_label.to_string() };
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 15.0, escape(&xl));

        for m in &self.markers {
            if !(m.x.is_finite() && (!self.log_x || m.x > 0.0)) {
                continue;
            }
            let v = tx(m.x);
            if v < x0 || v > x1 {
                continue;
            }
            let gx = px(v);
            let _ = writeln!(s, r##"<line x1="{gx:.2}" y1="{TOP}" x2="{gx:.2}" y2="{}" stroke="#888" stroke-dasharray="4 3"/>"##, TOP + ph);
            let _ = writeln!(s, r##"<text x="{:.2}" y="{}" fill="#555" transform="rotate(-90 {:.2} {})">{}</text>"##, gx - 3.0, TOP + 60.0, gx - 3.0, TOP + 60.0, escape(m.label));
        }

        for (k, ser) in self.series.iter().enumerate() {
            let mut run: Vec<String> = Vec::new();
            let flush = |run: &mut Vec<String>, s: &mut String| {
                if run.len() >= 2 {
                    let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.8" points="{}"/>"#, ser.color, run.join(" "));
                }
                run.clear();
            };
            for (x, y) in xs.iter().zip(&ser.y) {
                if y.is_finite() {
                    run.push(format!("{:.2},{:.2}", px(*x), py(*y)));
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{}"/>"#, px(*x), py(*y), ser.color);
                } else {
                    flush(&mut run, &mut s);
                }
            }
            flush(&mut run, &mut s);
            let ly = TOP + 10.0 + 20.0 * k as f64;
            let lx = W - RIGHT + 15.0;
            let _ = writeln!(s, r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{}" stroke-width="2"/>"#, lx + 25.0, ser.color);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, lx + 32.0, ly + 4.0, escape(ser.name));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

//! Minimal SVG emitters: line plots and director glyph plots. Output is a
//! pure function of the input numbers (fixed precision, no timestamps).

use std::f64::consts::PI;
use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 72.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Tick positions at 1, 2 or 5 times a power of ten, about five per axis.
fn ticks(lo: f64, hi: f64) -> (Vec<f64>, usize) {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    ((first..=last).map(|k| k as f64 * step).collect(), decimals)
}

fn padded_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

impl LinePlot {
    pub fn render(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let (x0, x1) = padded_range(all().map(|p| p.0));
        let (y0, y1) = padded_range(all().map(|p| p.1));
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            s,
            r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
        );
        let (xt, xd) = ticks(x0, x1);
        for x in xt {
            let px = sx(x);
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#,
                TOP + ph,
                TOP + ph + 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{x:.xd$}</text>"#,
                TOP + ph + 18.0
            );
        }
        let (yt, yd) = ticks(y0, y1);
        for y in yt {
            let py = sy(y);
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/>"#,
                LEFT - 5.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.yd$}</text>"#,
                LEFT - 8.0,
                py + 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + pw / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        );
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            // Non-finite points split the curve.
            for run in series
                .points
                .split(|p| !(p.0.is_finite() && p.1.is_finite()))
            {
                if run.is_empty() {
                    continue;
                }
                let pts: Vec<String> = run
                    .iter()
                    .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
                    .collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
            let ly = TOP + 16.0 + 16.0 * k as f64;
            let lx = LEFT + pw - 110.0;
            let _ = writeln!(
                s,
                r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#,
                lx + 26.0,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

/// Director glyphs on an annulus (`height = 2π`) or a sector `0 ≤ φ ≤ height`,
/// drawn as unoriented segments since `θ` and `θ + π` are the same director.
#[derive(Debug, Clone, PartialEq)]
pub struct Quiver {
    pub title: String,
    pub b: f64,
    pub height: f64,
    /// `(r, φ, θ)` glyph centres.
    pub glyphs: Vec<(f64, f64, f64)>,
    pub glyph_length: f64,
}

impl Quiver {
    pub fn render(&self) -> String {
        let size = HEIGHT;
        let scale = (size - 2.0 * TOP) / 2.0;
        let (cx, cy) = (size / 2.0, size / 2.0 + 8.0);
        let px = |x: f64, y: f64| (cx + scale * x, cy - scale * y);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{size}" height="{size}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
            size / 2.0,
            escape(&self.title)
        );
        if self.height >= 2.0 * PI - 1e-12 {
            for r in [self.b, 1.0] {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="black"/>"#,
                    scale * r
                );
            }
        } else {
            let (ax, ay) = px(self.b, 0.0);
            let (bx, by) = px(1.0, 0.0);
            let (c1x, c1y) = px(self.height.cos(), self.height.sin());
            let (c2x, c2y) = px(self.b * self.height.cos(), self.b * self.height.sin());
            let large = if self.height > PI { 1 } else { 0 };
            let _ = writeln!(
                s,
                r#"<path d="M {ax:.2} {ay:.2} L {bx:.2} {by:.2} A {:.2} {:.2} 0 {large} 0 {c1x:.2} {c1y:.2} L {c2x:.2} {c2y:.2} A {:.2} {:.2} 0 {large} 1 {ax:.2} {ay:.2} Z" fill="none" stroke="black"/>"#,
                scale,
                scale,
                scale * self.b,
                scale * self.b
            );
        }
        let half = 0.5 * self.glyph_length;
        for &(r, phi, theta) in &self.glyphs {
            let (x, y) = (r * phi.cos(), r * phi.sin());
            let (dx, dy) = (half * theta.cos(), half * theta.sin());
            let (x1, y1) = px(x - dx, y - dy);
            let (x2, y2) = px(x + dx, y + dy);
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{}" stroke-width="1.2"/>"#,
                PALETTE[0]
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_numbers() {
        let (t, d) = ticks(0.03, 0.97);
        assert_eq!(t, vec![0.2, 0.4, 0.6000000000000001, 0.8]);
        assert_eq!(d, 1);
        let (t, _) = ticks(-3.0, 12.0);
        assert_eq!(t.first(), Some(&0.0));
    }

    #[test]
    fn unoriented_glyphs_render_identically() {
        let q = |theta: f64| Quiver {
            title: "t".into(),
            b: 0.5,
            height: 2.0 * PI,
            glyphs: vec![(0.75, 0.3, theta)],
            glyph_length: 0.1,
        };
        let a = q(0.4).render();
        let b = q(0.4 + PI).render();
        let seg = |s: &str| {
            let line = s
                .lines()
                .find(|l| l.contains("stroke-width=\"1.2\""))
                .unwrap()
                .to_string();
            let nums: Vec<f64> = line
                .split('"')
                .filter_map(|t| t.parse::<f64>().ok())
                .take(4)
                .collect();
            let (p, q) = ((nums[0], nums[1]), (nums[2], nums[3]));
            if p <= q {
                (p, q)
            } else {
                (q, p)
            }
        };
        let (sa, sb) = (seg(&a), seg(&b));
        assert!((sa.0 .0 - sb.0 .0).abs() < 0.011 && (sa.1 .1 - sb.1 .1).abs() < 0.011);
    }

    #[test]
    fn nan_splits_polyline() {
        let plot = LinePlot {
            title: "x".into(),
            x_label: "a".into(),
            y_label: "b".into(),
            series: vec![Series {
                label: "s".into(),
                points: vec![
                    (0.0, 0.0),
                    (1.0, 1.0),
                    (2.0, f64::NAN),
                    (3.0, 1.0),
                    (4.0, 0.0),
                ],
            }],
        };
        assert_eq!(plot.render().matches("<polyline").count(), 2);
    }
}

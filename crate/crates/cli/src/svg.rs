//! Minimal deterministic SVG writer with linear axes.

use std::fmt::Write as _;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Fixed two-decimal coordinates keep output byte-stable.
fn n(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        let mut s = Self {
            width,
            height,
            body: String::new(),
        };
        s.rect(0.0, 0.0, width, height, "#ffffff", None);
        s
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke.map_or(String::new(), |c| format!(r#" stroke="{c}""#));
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"{stroke}/>"#,
            n(x),
            n(y),
            n(w.max(0.0)),
            n(h.max(0.0))
        );
    }

    pub fn line(&mut self, a: (f64, f64), b: (f64, f64), stroke: &str, width: f64, dashed: bool) {
        let dash = if dashed { r#" stroke-dasharray="4 3""# } else { "" };
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            n(a.0),
            n(a.1),
            n(b.0),
            n(b.1),
            n(width)
        );
    }

    pub fn path(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, opacity: f64) {
        let mut d = String::new();
        for (i, (x, y)) in points.iter().enumerate() {
            let _ = write!(d, "{}{},{}", if i == 0 { "M" } else { " L" }, n(*x), n(*y));
        }
        if points.len() == 1 {
            d.push_str(" h0.01");
        }
        let _ = writeln!(
            self.body,
            r#"<path d="{d}" fill="none" stroke="{stroke}" stroke-width="{}" stroke-opacity="{}"/>"#,
            n(width),
            n(opacity)
        );
    }

    pub fn circle(&mut self, c: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" fill-opacity="0.75"/>"#,
            n(c.0),
            n(c.1),
            n(r)
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, anchor: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{}" text-anchor="{anchor}">{}</text>"#,
            n(at.0),
            n(at.1),
            n(size),
            escape(content)
        );
    }

    pub fn vertical_text(&mut self, at: (f64, f64), size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{0}" y="{1}" font-family="sans-serif" font-size="{2}" text-anchor="middle" transform="rotate(-90 {0} {1})">{3}</text>"#,
            n(at.0),
            n(at.1),
            n(size),
            escape(content)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n{}</svg>\n",
            self.body,
            w = n(self.width),
            h = n(self.height),
        )
    }
}

/// Rounded tick positions covering `[lo, hi]`, roughly `target` of them.
pub fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if hi.is_nan() || lo.is_nan() || hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&s| s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Data range widened so that flat or empty data still get a visible band.
pub fn padded_range(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let span = hi - lo;
    if span <= 1e-12 * lo.abs().max(1.0) {
        let pad = 0.05 * lo.abs().max(1.0);
        return (lo - pad, hi + pad);
    }
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Plot area at pixel rectangle `(x, y, w, h)` with data limits.
#[derive(Debug, Clone, Copy)]
pub struct Panel {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub xlim: (f64, f64),
    pub ylim: (f64, f64),
}

impl Panel {
    pub fn map(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.xlim.0) / (self.xlim.1 - self.xlim.0);
        let fy = (y - self.ylim.0) / (self.ylim.1 - self.ylim.0);
        (self.x + fx * self.w, self.y + self.h - fy * self.h)
    }

    /// Frame, ticks and optional labels.
    pub fn axes(&self, svg: &mut Svg, title: &str, xlabel: &str, ylabel: &str, tick_labels: bool) {
        svg.rect(self.x, self.y, self.w, self.h, "none", Some("#333333"));
        let size = 10.0;
        for t in ticks(self.xlim.0, self.xlim.1, 5) {
            let (px, py) = self.map(t, self.ylim.0);
            svg.line((px, py), (px, py + 4.0), "#333333", 1.0, false);
            if tick_labels {
                svg.text((px, py + 15.0), size, "middle", &tick_label(t));
            }
        }
        for t in ticks(self.ylim.0, self.ylim.1, 5) {
            let (px, py) = self.map(self.xlim.0, t);
            svg.line((px - 4.0, py), (px, py), "#333333", 1.0, false);
            if tick_labels {
                svg.text((px - 6.0, py + 3.5), size, "end", &tick_label(t));
            }
        }
        if !title.is_empty() {
            svg.text((self.x + self.w / 2.0, self.y - 8.0), 13.0, "middle", title);
        }
        if !xlabel.is_empty() {
            svg.text((self.x + self.w / 2.0, self.y + self.h + 32.0), 11.0, "middle", xlabel);
        }
        if !ylabel.is_empty() {
            svg.vertical_text((self.x - 40.0, self.y + self.h / 2.0), 11.0, ylabel);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round() {
        let t = ticks(0.0, 1.0, 5);
        assert_eq!(t.len(), 6);
        assert!(t.iter().enumerate().all(|(i, v)| (v - 0.2 * i as f64).abs() < 1e-12));
        assert_eq!(ticks(0.0, 100.0, 4), vec![0.0, 50.0, 100.0]);
        assert_eq!(ticks(3.0, 3.0, 5), vec![3.0]);
    }

    #[test]
    fn text_is_escaped_and_numbers_fixed() {
        let mut s = Svg::new(10.0, 10.0);
        s.text((1.0, -0.001), 8.0, "start", "a<b & c");
        let out = s.finish();
        assert!(out.contains("a&lt;b &amp; c"));
        assert!(out.contains(r#"y="0.00""#));
    }

    #[test]
    fn flat_data_get_a_band() {
        let (lo, hi) = padded_range([1.0, 1.0]);
        assert!(lo < 1.0 && hi > 1.0);
        assert_eq!(padded_range(std::iter::empty()), (0.0, 1.0));
    }

    #[test]
    fn panel_maps_corners() {
        let p = Panel {
            x: 10.0,
            y: 20.0,
            w: 100.0,
            h: 50.0,
            xlim: (0.0, 1.0),
            ylim: (0.0, 2.0),
        };
        assert_eq!(p.map(0.0, 0.0), (10.0, 70.0));
        assert_eq!(p.map(1.0, 2.0), (110.0, 20.0));
    }
}

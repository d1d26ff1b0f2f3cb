//! Bare-bones SVG charts: line charts and stacked bars.

use std::fmt::Write as _;

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
        W / 2.0,
        escape(title)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }

    fn axes(&self, out: &mut String, xlabel: &str, ylabel: &str, xticks: bool) {
        let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
        let _ = writeln!(out, "<path d=\"M{x0} {y1}V{y0}H{x1}\" fill=\"none\" stroke=\"black\"/>");
        for k in 0..=4 {
            let v = self.y.0 + (self.y.1 - self.y.0) * k as f64 / 4.0;
            let y = self.py(v);
            let _ = writeln!(
                out,
                "<path d=\"M{} {y:.2}H{x0}\" stroke=\"black\"/><text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                x0 - 4.0,
                x0 - 6.0,
                y + 4.0,
                tick(v)
            );
            if xticks {
                let u = self.x.0 + (self.x.1 - self.x.0) * k as f64 / 4.0;
                let x = self.px(u);
                let _ = writeln!(
                    out,
                    "<path d=\"M{x:.2} {y0}v4\" stroke=\"black\"/><text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                    y0 + 18.0,
                    tick(u)
                );
            }
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            (x0 + x1) / 2.0,
            H - 15.0,
            escape(xlabel)
        );
        let _ = writeln!(
            out,
            "<text transform=\"translate(18 {:.2}) rotate(-90)\" text-anchor=\"middle\">{}</text>",
            (y0 + y1) / 2.0,
            escape(ylabel)
        );
    }
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-2..1e4).contains(&v.abs()) {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/><text x=\"{}\" y=\"{}\">{}</text>",
            W - RIGHT + 15.0,
            y - 10.0,
            PALETTE[i % PALETTE.len()],
            W - RIGHT + 32.0,
            y,
            escape(name)
        );
    }
}

pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let frame = Frame {
        x: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.0))),
        y: range(series.iter().flat_map(|s| s.points.iter().map(|p| p.1))),
    };
    let mut out = open(title);
    frame.axes(&mut out, xlabel, ylabel, true);
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        for (k, &(x, y)) in s.points.iter().filter(|p| p.1.is_finite()).enumerate() {
            let _ = write!(d, "{}{:.2} {:.2}", if k == 0 { "M" } else { "L" }, frame.px(x), frame.py(y));
        }
        let _ = writeln!(out, "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"/>", PALETTE[i % PALETTE.len()]);
    }
    legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    out.push_str("</svg>\n");
    out
}

/// One bar per category; `values[c][s]` is the height of segment `s` in bar `c`.
pub fn stacked_bars(title: &str, ylabel: &str, categories: &[String], segments: &[&str], values: &[Vec<f64>]) -> String {
    let top = values.iter().map(|v| v.iter().map(|x| x.max(0.0)).sum::<f64>()).fold(0.0, f64::max);
    let frame = Frame { x: (0.0, categories.len().max(1) as f64), y: (0.0, if top > 0.0 { top * 1.05 } else { 1.0 }) };
    let mut out = open(title);
    frame.axes(&mut out, "", ylabel, false);
    let slot = (W - LEFT - RIGHT) / categories.len().max(1) as f64;
    for (c, (name, bar)) in categories.iter().zip(values).enumerate() {
        let mut base = 0.0;
        let x = LEFT + slot * (c as f64 + 0.15);
        for (s, &v) in bar.iter().enumerate() {
            let v = v.max(0.0);
            let (y_hi, y_lo) = (frame.py(base + v), frame.py(base));
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{y_hi:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                slot * 0.7,
                y_lo - y_hi,
                PALETTE[s % PALETTE.len()]
            );
            base += v;
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
            x + slot * 0.35,
            H - BOTTOM + 18.0,
            escape(name)
        );
    }
    legend(&mut out, segments);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_draws_one_path_per_series() {
        let s = |name| Series { name, points: vec![(0.0, 1.0), (1.0, -1.0), (2.0, 0.5)] };
        let svg = line_chart("t", "x", "y", &[s("target"), s("output")]);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("stroke-width=\"1.5\"").count(), 2);
    }

    #[test]
    fn stacked_bars_draw_every_segment() {
        let cats = vec!["a".to_string(), "b&c".to_string()];
        let svg = stacked_bars("t", "y", &cats, &["lo", "hi"], &[vec![1.0, 2.0], vec![0.0, 3.0]]);
        assert_eq!(svg.matches("<rect x=").count(), 4 + 2);
        assert!(svg.contains("b&amp;c"));
    }

    #[test]
    fn degenerate_ranges_are_widened() {
        assert_eq!(range([2.0, 2.0].into_iter()), (1.5, 2.5));
        assert_eq!(range(std::iter::empty()), (0.0, 1.0));
    }
}

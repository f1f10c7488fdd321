//! Minimal SVG 1.1 line and scatter plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mark {
    Line,
    Dots,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub color: String,
    pub mark: Mark,
    /// Points with `None` y values break the line.
    pub points: Vec<(f64, Option<f64>)>,
}

impl Series {
    pub fn line(label: &str, color: &str, points: Vec<(f64, Option<f64>)>) -> Self {
        Series {
            label: label.into(),
            color: color.into(),
            mark: Mark::Line,
            points,
        }
    }

    pub fn dots(label: &str, color: &str, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            color: color.into(),
            mark: Mark::Dots,
            points: points.into_iter().map(|(x, y)| (x, Some(y))).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn sx(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let (x0, x1) = (self.sx(self.x_range.0), self.sx(self.x_range.1));
        let (y0, y1) = (self.sy(self.y_range.0), self.sy(self.y_range.1));
        let _ = writeln!(
            s,
            r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            x1 - x0,
            y0 - y1
        );
        for k in 0..=4 {
            let t = k as f64 / 4.0;
            let xv = self.x_range.0 + t * (self.x_range.1 - self.x_range.0);
            let yv = self.y_range.0 + t * (self.y_range.1 - self.y_range.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                self.sx(xv),
                y0 + 16.0,
                tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 4.0,
                self.sy(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="20" font-size="14" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for series in &self.series {
            match series.mark {
                Mark::Dots => {
                    for &(x, y) in &series.points {
                        if let Some(y) = y {
                            let _ = writeln!(
                                s,
                                r#"<circle cx="{:.1}" cy="{:.1}" r="1.2" fill="{}" fill-opacity="0.4"/>"#,
                                self.sx(x),
                                self.sy(y),
                                series.color
                            );
                        }
                    }
                }
                Mark::Line => {
                    let mut run: Vec<String> = Vec::new();
                    let flush = |run: &mut Vec<String>, s: &mut String| {
                        if run.len() > 1 {
                            let _ = writeln!(
                                s,
                                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                                series.color,
                                run.join(" ")
                            );
                        }
                        run.clear();
                    };
                    for &(x, y) in &series.points {
                        match y {
                            Some(y) => run.push(format!("{:.1},{:.1}", self.sx(x), self.sy(y))),
                            None => flush(&mut run, &mut s),
                        }
                    }
                    flush(&mut run, &mut s);
                }
            }
        }
        for (k, series) in self.series.iter().enumerate() {
            let y = MARGIN + 14.0 * k as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{y:.1}" font-size="11" fill="{}">{}</text>"#,
                x1 - 150.0,
                series.color,
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v.abs() >= 10.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_series() {
        let p = Plot {
            title: "E[H | A] <test>".into(),
            x_label: "A".into(),
            y_label: "H".into(),
            x_range: (0.0, 1.0),
            y_range: (0.0, 1.0),
            series: vec![
                Series::line(
                    "curve",
                    "red",
                    vec![
                        (0.0, Some(0.0)),
                        (0.5, Some(1.0)),
                        (0.7, None),
                        (0.8, Some(0.2)),
                        (1.0, Some(0.1)),
                    ],
                ),
                Series::dots("sample", "blue", vec![(0.3, 0.3)]),
            ],
        };
        let svg = p.render();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
        assert!(svg.contains("&lt;test&gt;"));
    }
}

//! Labeled scatter maps as standalone SVG.
//!
//! Both axes share one scale so distances read the same in every direction.
//! Rows are drawn as circles, columns as squares; all numbers are printed
//! with two decimals so output is byte-stable.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Map {
    pub title: String,
    pub x_caption: String,
    pub y_caption: String,
    pub rows: Vec<Point>,
    pub cols: Vec<Point>,
}

pub const SIZE: f64 = 720.0;
pub const MARGIN: f64 = 70.0;

/// Screen position `(cx + s·x, cy − s·y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub cx: f64,
    pub cy: f64,
    pub scale: f64,
}

impl Frame {
    pub fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let reach = points.fold(0.0_f64, |m, (x, y)| m.max(x.abs()).max(y.abs()));
        let half = (SIZE - 2.0 * MARGIN) / 2.0;
        Self {
            cx: SIZE / 2.0,
            cy: SIZE / 2.0,
            scale: if reach > 0.0 { half / reach } else { 1.0 },
        }
    }

    pub fn place(&self, x: f64, y: f64) -> (f64, f64) {
        (self.cx + self.scale * x, self.cy - self.scale * y)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Counts of `(rows, cols)` per quadrant in the order `++`, `-+`, `--`, `+-`.
/// Points on an axis count as positive on that axis.
pub fn quadrant_counts(map: &Map) -> [(usize, usize); 4] {
    let q = |p: &Point| match (p.x >= 0.0, p.y >= 0.0) {
        (true, true) => 0,
        (false, true) => 1,
        (false, false) => 2,
        (true, false) => 3,
    };
    let mut out = [(0, 0); 4];
    for p in &map.rows {
        out[q(p)].0 += 1;
    }
    for p in &map.cols {
        out[q(p)].1 += 1;
    }
    out
}

/// Renders the map. Returns the document and any warnings.
pub fn render(map: &Map) -> (String, Vec<String>) {
    let mut warnings = Vec::new();
    if map.cols.is_empty() {
        let w = "no column points; drawing rows only".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    if map.rows.is_empty() {
        let w = "no row points; drawing columns only".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    let frame = Frame::fit(map.rows.iter().chain(&map.cols).map(|p| (p.x, p.y)));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE:.0}" height="{SIZE:.0}" viewBox="0 0 {SIZE:.0} {SIZE:.0}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        SIZE / 2.0,
        escape(&map.title)
    );
    let (lo, hi) = (MARGIN / 2.0, SIZE - MARGIN / 2.0);
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{lo:.2}" y1="{cy:.2}" x2="{hi:.2}" y2="{cy:.2}" stroke="#888"/>"##,
        cy = frame.cy
    );
    let _ = writeln!(
        s,
        r##"<line class="axis" x1="{cx:.2}" y1="{lo:.2}" x2="{cx:.2}" y2="{hi:.2}" stroke="#888"/>"##,
        cx = frame.cx
    );
    let _ = writeln!(
        s,
        r#"<text class="caption" x="{hi:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
        frame.cy - 6.0,
        escape(&map.x_caption)
    );
    let _ = writeln!(
        s,
        r#"<text class="caption" x="{:.2}" y="{:.2}" transform="rotate(-90 {:.2} {:.2})" text-anchor="end">{}</text>"#,
        frame.cx - 6.0,
        lo,
        frame.cx - 6.0,
        lo,
        escape(&map.y_caption)
    );

    let counts = quadrant_counts(map);
    let corners = [
        (SIZE - 10.0, 44.0, "end"),
        (10.0, 44.0, "start"),
        (10.0, SIZE - 10.0, "start"),
        (SIZE - 10.0, SIZE - 10.0, "end"),
    ];
    for ((r, c), (x, y, anchor)) in counts.iter().zip(corners) {
        let _ = writeln!(
            s,
            r##"<text class="quadrant" x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" fill="#555">{r} rows, {c} cols</text>"##
        );
    }

    for p in &map.rows {
        let (x, y) = frame.place(p.x, p.y);
        let _ = writeln!(
            s,
            r##"<circle class="row" cx="{x:.2}" cy="{y:.2}" r="3" fill="#1f5fa8"/><text x="{:.2}" y="{:.2}" fill="#1f5fa8">{}</text>"##,
            x + 5.0,
            y - 4.0,
            escape(&p.label)
        );
    }
    for p in &map.cols {
        let (x, y) = frame.place(p.x, p.y);
        let _ = writeln!(
            s,
            r##"<rect class="col" x="{:.2}" y="{:.2}" width="6" height="6" fill="#b0301c"/><text x="{:.2}" y="{:.2}" fill="#b0301c">{}</text>"##,
            x - 3.0,
            y - 3.0,
            x + 5.0,
            y - 4.0,
            escape(&p.label)
        );
    }
    s.push_str("</svg>\n");
    (s, warnings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(l: &str, x: f64, y: f64) -> Point {
        Point {
            label: l.into(),
            x,
            y,
        }
    }

    #[test]
    fn symmetric_points_fill_quadrants() {
        let m = Map {
            title: "t".into(),
            x_caption: "x".into(),
            y_caption: "y".into(),
            rows: vec![
                pt("a", 1.0, 1.0),
                pt("b", -1.0, 1.0),
                pt("c", -1.0, -1.0),
                pt("d", 1.0, -1.0),
            ],
            cols: vec![],
        };
        assert_eq!(quadrant_counts(&m), [(1, 0); 4]);
        let (svg, warn) = render(&m);
        assert_eq!(warn.len(), 1);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.contains("1 rows, 0 cols"));
    }

    #[test]
    fn labels_are_escaped() {
        let m = Map {
            title: "<&>".into(),
            x_caption: String::new(),
            y_caption: String::new(),
            rows: vec![pt("a<b", 0.0, 0.0)],
            cols: vec![pt("\"q\"", 0.5, 0.5)],
        };
        let (svg, _) = render(&m);
        assert!(
            svg.contains("a&lt;b")
                && svg.contains("&quot;q&quot;")
                && svg.contains("&lt;&amp;&gt;")
        );
    }
}

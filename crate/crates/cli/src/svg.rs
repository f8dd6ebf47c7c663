//! Static SVG pictures of diagrams and broken lines.

use std::fmt::Write;

use num_traits::ToPrimitive;
use tropdesc::broken::BrokenLine;
use tropdesc::lattice::{LatticeVec, RatPoint};
use tropdesc::scatter::Diagram;

const SIZE: f64 = 800.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn xy(p: &RatPoint) -> (f64, f64) {
    (p.x.to_f64().unwrap_or(0.0), p.y.to_f64().unwrap_or(0.0))
}

struct View {
    min: (f64, f64),
    max: (f64, f64),
}

impl View {
    fn around<'a>(pts: impl Iterator<Item = &'a RatPoint>) -> View {
        let mut min = (f64::INFINITY, f64::INFINITY);
        let mut max = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in pts {
            let (x, y) = xy(p);
            min = (min.0.min(x), min.1.min(y));
            max = (max.0.max(x), max.1.max(y));
        }
        if !min.0.is_finite() {
            min = (-1.0, -1.0);
            max = (1.0, 1.0);
        }
        let pad = 0.25 * (max.0 - min.0).max(max.1 - min.1).max(1.0);
        View {
            min: (min.0 - pad, min.1 - pad),
            max: (max.0 + pad, max.1 + pad),
        }
    }

    fn scale(&self) -> f64 {
        SIZE / (self.max.0 - self.min.0).max(self.max.1 - self.min.1)
    }

    fn screen(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let s = self.scale();
        ((x - self.min.0) * s, (self.max.1 - y) * s)
    }

    /// Parameter at which `from + t dir` leaves the view.
    fn exit(&self, from: (f64, f64), dir: LatticeVec) -> f64 {
        let mut t = f64::INFINITY;
        let (dx, dy) = (dir.x as f64, dir.y as f64);
        if dx > 0.0 {
            t = t.min((self.max.0 - from.0) / dx);
        } else if dx < 0.0 {
            t = t.min((self.min.0 - from.0) / dx);
        }
        if dy > 0.0 {
            t = t.min((self.max.1 - from.1) / dy);
        } else if dy < 0.0 {
            t = t.min((self.min.1 - from.1) / dy);
        }
        t.max(0.0)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Draw every ray of `diag`, every broken line in `lines`, the marked points
/// and the endpoint `q`.
pub fn render(diag: &Diagram, lines: &[BrokenLine], q: Option<&RatPoint>) -> String {
    let mut anchors: Vec<&RatPoint> = diag.points.iter().collect();
    anchors.extend(diag.rays.iter().map(|r| &r.base));
    anchors.extend(lines.iter().flat_map(|l| l.bends.iter().map(|b| &b.point)));
    anchors.extend(q);
    let view = View::around(anchors.into_iter());
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r##"<rect width="100%" height="100%" fill="#ffffff"/>"##);
    let _ = writeln!(out, r#"<g id="rays" stroke-width="1.2" fill="none">"#);
    for (i, r) in diag.rays.iter().enumerate() {
        let from = xy(&r.base);
        let t = view.exit(from, r.dir);
        let to = (from.0 + t * r.dir.x as f64, from.1 + t * r.dir.y as f64);
        let (a, b) = (view.screen(from), view.screen(to));
        let colour = PALETTE[(r.uset.len() - 1).min(PALETTE.len() - 1)];
        let _ = writeln!(
            out,
            r#"<line id="ray-{i}" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{colour}"><title>{}</title></line>"#,
            a.0,
            a.1,
            b.0,
            b.1,
            escape(&format!("degree {} marked {} mult {}", r.degree, r.uset, r.mult))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="broken-lines" stroke="#000000" stroke-width="2" stroke-dasharray="6 3" fill="none">"##);
    for (i, l) in lines.iter().enumerate() {
        let (dir, pts) = l.polyline();
        let first = xy(&pts[0]);
        let back = -dir;
        let t = view.exit(first, back);
        let mut coords = vec![view.screen((first.0 + t * back.x as f64, first.1 + t * back.y as f64))];
        coords.extend(pts.iter().map(|p| view.screen(xy(p))));
        let path: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        let _ = writeln!(
            out,
            r#"<polyline id="line-{i}" points="{}"><title>{}</title></polyline>"#,
            path.join(" "),
            escape(&format!(
                "{} z^{} u{}",
                l.final_term.coeff, l.final_term.degree, l.final_term.uset
            ))
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, r##"<g id="points" fill="#000000">"##);
    for (i, p) in diag.points.iter().enumerate() {
        let (x, y) = view.screen(xy(p));
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="4"><title>P{}</title></circle>"#,
            i + 1
        );
    }
    if let Some(q) = q {
        let (x, y) = view.screen(xy(q));
        let _ = writeln!(
            out,
            r##"<rect x="{:.3}" y="{:.3}" width="8" height="8" fill="#e377c2"><title>Q</title></rect>"##,
            x - 4.0,
            y - 4.0
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}

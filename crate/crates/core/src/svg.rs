//! Plain SVG output for planar scenes.

use std::fmt::Write as _;

use crate::complex::{HCell, HComplex};
use crate::error::{Error, Result};
use crate::linalg::{to_f64, RatVec};

/// Fill colors for regions by face dimension.
const FACE_COLORS: [&str; 3] = ["#d9534f", "#5b8fd6", "#f4e7b0"];

#[derive(Clone, Debug, Default)]
pub struct SvgScene {
    /// `(min x, min y, max x, max y)` in scene units.
    pub viewport: (f64, f64, f64, f64),
    pub outline: Vec<RatVec>,
    pub lattice: Vec<RatVec>,
    pub shading: Vec<HComplex>,
    /// Regions tagged by face dimension.
    pub regions: Vec<(usize, HComplex)>,
    pub points: Vec<RatVec>,
}

impl SvgScene {
    pub fn new() -> Self {
        Self::default()
    }

    /// Grows the viewport to contain every layer plus a margin.
    pub fn fit(&mut self, margin: f64) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        let mut add = |v: &RatVec| {
            xs.push(to_f64(&v[0]));
            ys.push(to_f64(&v[1]));
        };
        self.outline.iter().chain(&self.lattice).chain(&self.points).for_each(&mut add);
        for c in self.shading.iter().chain(self.regions.iter().map(|(_, c)| c)) {
            for cell in &c.cells {
                if let Some(b) = &cell.bbox {
                    add(&b.lo);
                    add(&b.hi);
                }
            }
        }
        let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if xs.is_empty() {
            self.viewport = (-1.0, -1.0, 1.0, 1.0);
        } else {
            self.viewport = (min(&xs) - margin, min(&ys) - margin, max(&xs) + margin, max(&ys) + margin);
        }
    }

    pub fn render(&self) -> Result<String> {
        let (x0, y0, x1, y1) = self.viewport;
        let scale = 60.0;
        let (w, h) = ((x1 - x0) * scale, (y1 - y0) * scale);
        // flip y so the picture has the usual orientation
        let px = |v: &RatVec| ((to_f64(&v[0]) - x0) * scale, (y1 - to_f64(&v[1])) * scale);
        let mut s = String::new();
        writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#).unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        s.push_str("<g id=\"domain-complex\">\n");
        for c in &self.shading {
            for cell in &c.cells {
                polygon(&mut s, cell, &px, "#eeeeee", "#bbbbbb", 0.5)?;
            }
        }
        s.push_str("</g>\n<g id=\"regions\">\n");
        for (dim, c) in &self.regions {
            let fill = FACE_COLORS[(*dim).min(2)];
            for cell in &c.cells {
                polygon(&mut s, cell, &px, fill, "#333333", 1.0)?;
            }
        }
        s.push_str("</g>\n");
        if !self.outline.is_empty() {
            let pts: Vec<String> = hull_order(&self.outline).iter().map(|v| {
                let (a, b) = px(v);
                format!("{a:.2},{b:.2}")
            }).collect();
            writeln!(s, r#"<polygon id="polytope" points="{}" fill="none" stroke="black" stroke-width="2"/>"#, pts.join(" ")).unwrap();
        }
        s.push_str("<g id=\"lattice\">\n");
        for v in &self.lattice {
            let (a, b) = px(v);
            writeln!(s, r##"<circle cx="{a:.2}" cy="{b:.2}" r="2" fill="#555555"/>"##).unwrap();
        }
        s.push_str("</g>\n<g id=\"feasible\">\n");
        for v in &self.points {
            let (a, b) = px(v);
            writeln!(s, r#"<circle cx="{a:.2}" cy="{b:.2}" r="4" fill="none" stroke="black"/>"#).unwrap();
        }
        s.push_str("</g>\n</svg>\n");
        Ok(s)
    }
}

fn polygon(s: &mut String, cell: &HCell, px: &dyn Fn(&RatVec) -> (f64, f64), fill: &str, stroke: &str, width: f64) -> Result<()> {
    if cell.dim() != 2 {
        return Err(Error::Domain("SVG output is planar only".into()));
    }
    let Some(vs) = cell.closure_vertices()? else { return Ok(()) };
    if vs.len() < 3 {
        return Ok(());
    }
    let pts: Vec<String> = hull_order(&vs)
        .iter()
        .map(|v| {
            let (a, b) = px(v);
            format!("{a:.2},{b:.2}")
        })
        .collect();
    writeln!(s, r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="{width}"/>"#, pts.join(" ")).unwrap();
    Ok(())
}

/// Vertices of a convex polygon in counter-clockwise order.
fn hull_order(vs: &[RatVec]) -> Vec<RatVec> {
    let n = vs.len() as f64;
    let cx = vs.iter().map(|v| to_f64(&v[0])).sum::<f64>() / n;
    let cy = vs.iter().map(|v| to_f64(&v[1])).sum::<f64>() / n;
    let mut out = vs.to_vec();
    out.sort_by(|a, b| {
        let ta = (to_f64(&a[1]) - cy).atan2(to_f64(&a[0]) - cx);
        let tb = (to_f64(&b[1]) - cy).atan2(to_f64(&b[0]) - cx);
        ta.partial_cmp(&tb).unwrap().then_with(|| a.cmp(b))
    });
    out
}

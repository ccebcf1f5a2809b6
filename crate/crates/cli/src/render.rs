//! SVG rendering of rank-two alcoves, polytopes and reflection axes.
//!
//! Geometry is exact until the final embedding: points are mapped to an
//! orthonormal frame through the `LDLᵀ` factorization of the Gram matrix, and
//! only the square roots of the pivots are taken in floating point.

use std::fmt::Write;

use anyhow::{bail, ensure, Result};
use num_traits::{ToPrimitive, Zero};

use qham::linalg::{self, QMat};
use qham::rational::{fmt_vec, Q};
use qham::rootsys::AffineRootSystem;
use qham::AffineFunctional;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 24.0;

/// `G = L D Lᵀ` with unit lower-triangular `L`.
fn ldl(g: &QMat) -> (QMat, Vec<Q>) {
    let n = g.len();
    let mut l: QMat = linalg::identity(n);
    let mut d: Vec<Q> = vec![Q::zero(); n];
    for j in 0..n {
        let mut dj = g[j][j].clone();
        for k in 0..j {
            dj -= &l[j][k] * &l[j][k] * &d[k];
        }
        d[j] = dj;
        for i in j + 1..n {
            let mut s = g[i][j].clone();
            for k in 0..j {
                s -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = s / &d[j];
        }
    }
    (l, d)
}

fn f(x: &Q) -> f64 {
    x.to_f64().unwrap_or(0.0)
}

/// Linear map from point coordinates to an orthonormal frame.
struct Frame {
    ginv: QMat,
    l: QMat,
    root_d: Vec<f64>,
}

impl Frame {
    fn new(gram: &QMat) -> Result<Self> {
        let ginv = linalg::inverse(gram).ok_or_else(|| anyhow::anyhow!("degenerate metric"))?;
        let (l, d) = ldl(gram);
        Ok(Frame { ginv, l, root_d: d.iter().map(|x| f(x).sqrt()).collect() })
    }

    /// `|v|² = Σ d_k (Lᵀv)_k²` for the vector `v = G⁻¹x`.
    fn embed(&self, x: &[Q]) -> [f64; 2] {
        let v = linalg::mat_vec(&self.ginv, x);
        let mut out = [0.0; 2];
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = Q::zero();
            for (i, vi) in v.iter().enumerate() {
                s += &self.l[i][k] * vi;
            }
            *o = self.root_d[k] * f(&s);
        }
        out
    }
}

struct Viewport {
    lo: [f64; 2],
    scale: f64,
    offset: [f64; 2],
}

impl Viewport {
    fn fit(points: &[[f64; 2]]) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9);
        let scale = (SIZE - 2.0 * MARGIN) / span;
        let offset = [(SIZE - (hi[0] - lo[0]) * scale) / 2.0, (SIZE - (hi[1] - lo[1]) * scale) / 2.0];
        Viewport { lo, scale, offset }
    }

    fn screen(&self, p: [f64; 2]) -> [f64; 2] {
        [self.offset[0] + (p[0] - self.lo[0]) * self.scale, SIZE - (self.offset[1] + (p[1] - self.lo[1]) * self.scale)]
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Orders the vertices of a convex polygon counterclockwise on screen.
fn convex_order(pts: &[[f64; 2]]) -> Vec<usize> {
    let n = pts.len() as f64;
    let c = [pts.iter().map(|p| p[0]).sum::<f64>() / n, pts.iter().map(|p| p[1]).sum::<f64>() / n];
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| {
        let ta = (pts[a][1] - c[1]).atan2(pts[a][0] - c[0]);
        let tb = (pts[b][1] - c[1]).atan2(pts[b][0] - c[0]);
        ta.total_cmp(&tb)
    });
    idx
}

fn points_attr(pts: &[[f64; 2]], order: &[usize]) -> String {
    order.iter().map(|&i| format!("{},{}", num(pts[i][0]), num(pts[i][1]))).collect::<Vec<_>>().join(" ")
}

fn exact_attr(pts: &[Vec<Q>], order: &[usize]) -> String {
    order.iter().map(|&i| fmt_vec(&pts[i])).collect::<Vec<_>>().join(" ")
}

/// Clips the line through `p` with direction `d` to the viewbox.
fn clip(p: [f64; 2], d: [f64; 2]) -> Option<([f64; 2], [f64; 2])> {
    let (mut t0, mut t1) = (f64::NEG_INFINITY, f64::INFINITY);
    for k in 0..2 {
        if d[k].abs() < 1e-12 {
            if p[k] < 0.0 || p[k] > SIZE {
                return None;
            }
            continue;
        }
        let (a, b) = ((0.0 - p[k]) / d[k], (SIZE - p[k]) / d[k]);
        t0 = t0.max(a.min(b));
        t1 = t1.min(a.max(b));
    }
    (t0 < t1).then(|| ([p[0] + t0 * d[0], p[1] + t0 * d[1]], [p[0] + t1 * d[0], p[1] + t1 * d[1]]))
}

/// Renders the alcove of `rs`, optionally shading `polytope` (point
/// coordinates) and drawing the walls of `axes` dashed.
pub fn render_svg(rs: &AffineRootSystem, polytope: Option<&[Vec<Q>]>, axes: &[AffineFunctional]) -> Result<String> {
    ensure!(rs.dim() == 2, "rendering needs a two-dimensional alcove, got dimension {}", rs.dim());
    let Some(vertices) = rs.vertices() else { bail!("the alcove is unbounded") };
    let alcove: Vec<Vec<Q>> = vertices.into_iter().map(|p| p.coords).collect();
    let frame = Frame::new(&rs.space.gram)?;
    let raw: Vec<[f64; 2]> = alcove.iter().map(|x| frame.embed(x)).collect();
    let view = Viewport::fit(&raw);
    let screen = |x: &[Q]| view.screen(frame.embed(x));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {s} {s}" width="{s}" height="{s}">"#,
        s = SIZE
    );
    let _ = writeln!(svg, r#"  <rect width="{s}" height="{s}" fill="white"/>"#, s = SIZE);

    if let Some(p) = polytope {
        let pts: Vec<[f64; 2]> = p.iter().map(|x| screen(x)).collect();
        match p.len() {
            0 => {}
            1 => {
                let _ = writeln!(
                    svg,
                    r#"  <circle class="polytope" cx="{}" cy="{}" r="4" fill="gray" data-exact="{}"/>"#,
                    num(pts[0][0]),
                    num(pts[0][1]),
                    fmt_vec(&p[0])
                );
            }
            2 => {
                let _ = writeln!(
                    svg,
                    r#"  <line class="polytope" x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-width="5" data-exact="{}"/>"#,
                    num(pts[0][0]),
                    num(pts[0][1]),
                    num(pts[1][0]),
                    num(pts[1][1]),
                    exact_attr(p, &[0, 1])
                );
            }
            _ => {
                let order = convex_order(&pts);
                let _ = writeln!(
                    svg,
                    r#"  <polygon class="polytope" points="{}" fill="gray" fill-opacity="0.6" stroke="none" data-exact="{}"/>"#,
                    points_attr(&pts, &order),
                    exact_attr(p, &order)
                );
            }
        }
    }

    let pts: Vec<[f64; 2]> = raw.iter().map(|&p| view.screen(p)).collect();
    let order = convex_order(&pts);
    let _ = writeln!(
        svg,
        r#"  <polygon class="alcove" points="{}" fill="none" stroke="black" stroke-width="1.5" data-exact="{}"/>"#,
        points_attr(&pts, &order),
        exact_attr(&alcove, &order)
    );

    for a in axes {
        let g = a.grad();
        let n2 = &g[0] * &g[0] + &g[1] * &g[1];
        if n2.is_zero() {
            continue;
        }
        let t = -a.constant.clone() / n2;
        let x0 = vec![&g[0] * &t, &g[1] * &t];
        let x1 = vec![&x0[0] - &g[1], &x0[1] + &g[0]];
        let (p0, p1) = (screen(&x0), screen(&x1));
        let Some((u, v)) = clip(p0, [p1[0] - p0[0], p1[1] - p0[1]]) else { continue };
        let _ = writeln!(
            svg,
            r#"  <line class="axis" x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="1" stroke-dasharray="6 4" data-exact="{}"/>"#,
            num(u[0]),
            num(u[1]),
            num(v[0]),
            num(v[1]),
            a
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use qham::rational::{q, qf};

    #[test]
    fn ldl_reconstructs_gram() {
        let g = vec![vec![q(2), q(-1)], vec![q(-1), q(2)]];
        let (l, d) = ldl(&g);
        for i in 0..2 {
            for j in 0..2 {
                let s: Q = (0..2).map(|k| &l[i][k] * &l[j][k] * &d[k]).sum();
                assert_eq!(s, g[i][j]);
            }
        }
        assert_eq!(d, vec![q(2), qf(3, 2)]);
    }

    #[test]
    fn clipping_stays_in_box() {
        let (a, b) = clip([200.0, 200.0], [1.0, 2.0]).expect("line crosses the box");
        for p in [a, b] {
            assert!((-1e-9..=SIZE + 1e-9).contains(&p[0]) && (-1e-9..=SIZE + 1e-9).contains(&p[1]));
        }
        assert!(clip([-10.0, 5.0], [0.0, 1.0]).is_none());
    }
}

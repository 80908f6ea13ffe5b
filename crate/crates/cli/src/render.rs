//! Alcove pictures.
//!
//! The fundamental alcove is the triangle whose walls meet at angles
//! `pi / m(s_i, s_j)`; the alcove of `w = s_1 ... s_k` is its image under
//! the composite of the wall reflections, so `s_1` acts last.

use std::fmt::Write;

use affcell::cells::Partition;
use affcell::{Ball, CoxeterSystem, Gen};

type P = [f64; 2];

/// Vertices of the fundamental alcove, indexed so that wall `i` is the
/// side opposite vertex `i`.
fn fundamental(sys: &CoxeterSystem) -> [P; 3] {
    use std::f64::consts::PI;
    let ang = |i: Gen, j: Gen| PI / f64::from(sys.coxeter_m(i, j));
    // Vertex 2 (walls 0 and 1) at the origin, wall 1 along the x-axis.
    let a2 = ang(0, 1);
    let a0 = ang(1, 2);
    let a1 = ang(0, 2);
    // Wall 1 joins vertices 2 and 0, wall 0 joins vertices 2 and 1; side
    // lengths follow the law of sines.
    let v2 = [0.0, 0.0];
    let v0 = [1.0, 0.0];
    let len = a0.sin() / a1.sin();
    let v1 = [len * a2.cos(), len * a2.sin()];
    [v0, v1, v2]
}

fn reflect(p: P, a: P, b: P) -> P {
    let d = [b[0] - a[0], b[1] - a[1]];
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1]);
    let foot = [a[0] + t * d[0], a[1] + t * d[1]];
    [2.0 * foot[0] - p[0], 2.0 * foot[1] - p[1]]
}

/// The alcove of every element of the ball.
pub fn alcoves(ball: &Ball) -> Vec<[P; 3]> {
    let sys = ball.system();
    let base = fundamental(sys);
    // Wall i of the fundamental alcove joins the two vertices other than i.
    let walls: Vec<(P, P)> = (0..3).map(|i| (base[(i + 1) % 3], base[(i + 2) % 3])).collect();
    ball.ids()
        .map(|w| {
            let mut tri = base;
            for &s in ball.elem(w).word().iter().rev() {
                let (a, b) = walls[s as usize];
                for v in &mut tri {
                    *v = reflect(*v, a, b);
                }
            }
            tri
        })
        .collect()
}

fn color(k: usize, n: usize) -> String {
    let h = (k as f64 * 360.0 / n.max(1) as f64 + (k % 2) as f64 * 180.0 / n.max(1) as f64) % 360.0;
    let (s, l) = (0.55, if k.is_multiple_of(2) { 0.55 } else { 0.7 });
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - ((h / 60.0) % 2.0 - 1.0).abs());
    let (r, g, b) = match (h / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let byte = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// SVG of the alcoves of the ball, one fill color per block of `cells`.
/// Alcoves longer than `certified` are drawn faded.
pub fn svg(ball: &Ball, cells: &Partition, certified: usize) -> String {
    let tris = alcoves(ball);
    let scale = 100.0;
    let (mut lo, mut hi) = ([f64::MAX; 2], [f64::MIN; 2]);
    for t in &tris {
        for v in t {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
    }
    let pad = 0.1;
    let (w, h) = ((hi[0] - lo[0] + 2.0 * pad) * scale, (hi[1] - lo[1] + 2.0 * pad) * scale);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let n = cells.len();
    for (id, t) in ball.ids().zip(&tris) {
        let pts: Vec<String> = t
            .iter()
            .map(|v| format!("{:.2},{:.2}", (v[0] - lo[0] + pad) * scale, (hi[1] - v[1] + pad) * scale))
            .collect();
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="{}" fill-opacity="{}" stroke="#333" stroke-width="0.5"><title>{}</title></polygon>"##,
            pts.join(" "),
            color(cells.block_of(id), n),
            if ball.length(id) <= certified { "1" } else { "0.35" },
            ball.elem(id)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use affcell::GroupType;

    #[test]
    fn alcoves_tile_without_overlap() {
        for (kind, w) in [(GroupType::G2, vec![5, 2]), (GroupType::B2, vec![7, 2, 1])] {
            let ball = Ball::new(CoxeterSystem::new(kind, &w).unwrap(), 8);
            let tris = alcoves(&ball);
            let area = |t: &[P; 3]| {
                ((t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[2][0] - t[0][0]) * (t[1][1] - t[0][1])).abs() / 2.0
            };
            let centroid = |t: &[P; 3]| [(t[0][0] + t[1][0] + t[2][0]) / 3.0, (t[0][1] + t[1][1] + t[2][1]) / 3.0];
            let a0 = area(&tris[0]);
            let mut seen = std::collections::BTreeSet::new();
            for t in &tris {
                assert!((area(t) - a0).abs() < 1e-9);
                let c = centroid(t);
                assert!(seen.insert(((c[0] * 1e6).round() as i64, (c[1] * 1e6).round() as i64)));
            }
        }
    }
}

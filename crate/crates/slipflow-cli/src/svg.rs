//! Marching-squares contour plots of a polar lattice field.

use std::f64::consts::PI;
use std::fmt::Write;

use slipflow::PhysicalField;

pub const LEVELS: usize = 11;

/// LEVELS values strictly between min and max, evenly spaced.
pub fn contour_levels(min: f64, max: f64) -> Vec<f64> {
    if !(max > min) {
        return vec![];
    }
    let step = (max - min) / (LEVELS + 1) as f64;
    (1..=LEVELS).map(|k| min + step * k as f64).collect()
}

type Point = (f64, f64);

/// Contour segments of `field` at `level`, in Cartesian coordinates.
/// Radii are the rows of the field; the angular direction wraps around.
pub fn segments(field: &PhysicalField, radii: &[f64], level: f64) -> Vec<(Point, Point)> {
    let nt = field.ntheta;
    let dth = 2.0 * PI / nt as f64;
    let mut out = Vec::new();
    for i in 0..field.nr.saturating_sub(1) {
        for j in 0..nt {
            let jn = (j + 1) % nt;
            // corners in cyclic order, with their (r, theta)
            let corners = [
                (field.get(i, j), radii[i], j as f64 * dth),
                (field.get(i, jn), radii[i], (j + 1) as f64 * dth),
                (field.get(i + 1, jn), radii[i + 1], (j + 1) as f64 * dth),
                (field.get(i + 1, j), radii[i + 1], j as f64 * dth),
            ];
            let above: Vec<bool> = corners.iter().map(|c| c.0 >= level).collect();
            let mut cross: [Option<Point>; 4] = [None; 4];
            for e in 0..4 {
                let (p, q) = (corners[e], corners[(e + 1) % 4]);
                if above[e] != above[(e + 1) % 4] {
                    let t = (level - p.0) / (q.0 - p.0);
                    let r = p.1 + t * (q.1 - p.1);
                    let th = p.2 + t * (q.2 - p.2);
                    cross[e] = Some((r * th.cos(), r * th.sin()));
                }
            }
            let hits: Vec<usize> = (0..4).filter(|&e| cross[e].is_some()).collect();
            match hits.len() {
                2 => out.push((cross[hits[0]].unwrap(), cross[hits[1]].unwrap())),
                4 => {
                    let centre = corners.iter().map(|c| c.0).sum::<f64>() / 4.0 >= level;
                    let pairs = if centre == above[0] { [(0, 1), (2, 3)] } else { [(3, 0), (1, 2)] };
                    for (a, b) in pairs {
                        out.push((cross[a].unwrap(), cross[b].unwrap()));
                    }
                }
                _ => {}
            }
        }
    }
    out
}

fn colour(k: usize, n: usize) -> String {
    // blue (low) to red (high)
    let t = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Standalone SVG document with the annulus outline and LEVELS contours.
pub fn contour_svg(field: &PhysicalField, radii: &[f64], title: &str) -> String {
    let outer = radii.iter().cloned().fold(0.0, f64::max);
    let inner = radii.iter().cloned().fold(f64::INFINITY, f64::min);
    let size = 512.0;
    let scale = 0.45 * size / outer;
    let (cx, cy) = (size / 2.0, size / 2.0);
    let map = |p: Point| (cx + scale * p.0, cy - scale * p.1);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#
    );
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for r in [inner, outer] {
        let _ = writeln!(
            s,
            r#"<circle cx="{cx}" cy="{cy}" r="{:.3}" fill="none" stroke="black" stroke-width="1.5"/>"#,
            scale * r
        );
    }
    let (min, max) = field.min_max();
    let levels = contour_levels(min, max);
    for (k, &level) in levels.iter().enumerate() {
        let mut d = String::new();
        for (p, q) in segments(field, radii, level) {
            let (p, q) = (map(p), map(q));
            let _ = write!(d, "M{:.3} {:.3}L{:.3} {:.3}", p.0, p.1, q.0, q.1);
        }
        let _ = writeln!(
            s,
            r#"<path data-level="{level:.6e}" d="{d}" fill="none" stroke="{}" stroke-width="1"/>"#,
            colour(k, levels.len())
        );
    }
    s.push_str("</svg>\n");
    s
}

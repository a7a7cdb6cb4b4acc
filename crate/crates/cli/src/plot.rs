//! Barycentric geometry for k = 3: prediction-set polygons, pair midpoints
//! and the dominant-label boundary lines.

use margin_core::arith::{format_rational, half, RVector, Rational};
use margin_core::loss::{LossMatrix, SimplexPoint};
use margin_core::polytope::prediction_set;
use margin_core::{Error, Result};
use num_traits::Zero;
use serde::Serialize;
use std::cmp::Ordering;

pub const GEOMETRY_FORMAT: &str = "barycentric-geometry/v1";

#[derive(Debug, Serialize)]
pub struct Region {
    pub y: usize,
    pub label: String,
    pub polygon: Vec<Vec<String>>,
}

#[derive(Debug, Serialize)]
pub struct Marker {
    pub label: String,
    pub point: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Line {
    pub label: String,
    pub from: Vec<String>,
    pub to: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct Geometry {
    pub format: &'static str,
    pub name: String,
    pub regions: Vec<Region>,
    pub markers: Vec<Marker>,
    pub lines: Vec<Line>,
}

fn text(p: &[Rational]) -> Vec<String> {
    p.iter().map(format_rational).collect()
}

/// Orders the vertices of a convex polygon counter-clockwise in the plane
/// `(q_2, q_3)`, starting from the lexicographically smallest vertex. The
/// chart is affine, so the cyclic order matches the triangle picture.
pub fn cyclic_order(mut pts: Vec<RVector>) -> Vec<RVector> {
    if pts.len() < 3 {
        return pts;
    }
    let n = Rational::from_integer((pts.len() as i64).into());
    let cx = pts.iter().map(|p| p[1].clone()).sum::<Rational>() / &n;
    let cy = pts.iter().map(|p| p[2].clone()).sum::<Rational>() / &n;
    let rel = |p: &RVector| (&p[1] - &cx, &p[2] - &cy);
    let upper = |(dx, dy): &(Rational, Rational)| *dy > Rational::zero() || (dy.is_zero() && *dx > Rational::zero());
    pts.sort_by(|a, b| {
        let (ra, rb) = (rel(a), rel(b));
        match (upper(&ra), upper(&rb)) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => {
                let cross = &ra.0 * &rb.1 - &ra.1 * &rb.0;
                Rational::zero().cmp(&cross)
            }
        }
    });
    let start = pts.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, _)| i).unwrap_or(0);
    pts.rotate_left(start);
    pts
}

pub fn geometry(name: &str, labels: &[String], loss: &LossMatrix, cap: usize) -> Result<Geometry> {
    if loss.k() != 3 {
        return Err(Error::Precondition(format!("plot data is only produced for k = 3, got k = {}", loss.k())));
    }
    let mut regions = Vec::new();
    for y in 0..3 {
        let verts = prediction_set(loss, y)?.vertices(cap)?;
        regions.push(Region {
            y: y + 1,
            label: labels[y].clone(),
            polygon: cyclic_order(verts.as_slice().to_vec()).iter().map(|p| text(p)).collect(),
        });
    }
    let mut markers = Vec::new();
    for y in 0..3 {
        for z in y..3 {
            let p = SimplexPoint::pair_midpoint(3, y, z);
            let label = if y == z { format!("e_{}", y + 1) } else { format!("1/2(e_{} + e_{})", y + 1, z + 1) };
            markers.push(Marker { label, point: text(p.as_slice()) });
        }
    }
    let mut lines = Vec::new();
    for y in 0..3 {
        let others: Vec<usize> = (0..3).filter(|&z| z != y).collect();
        let end = |z: usize| {
            let mut p = vec![Rational::zero(); 3];
            p[y] = half();
            p[z] = half();
            text(&p)
        };
        lines.push(Line { label: format!("q_{} = 1/2", y + 1), from: end(others[0]), to: end(others[1]) });
    }
    Ok(Geometry { format: GEOMETRY_FORMAT, name: name.to_string(), regions, markers, lines })
}

#[cfg(test)]
mod tests {
    use super::*;
    use margin_core::arith::{int, rat};

    #[test]
    fn zero_one_regions_are_quadrilaterals() {
        let l = LossMatrix::zero_one(3).unwrap();
        let labels: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
        let g = geometry("zero-one-3", &labels, &l, 10).unwrap();
        for r in &g.regions {
            assert_eq!(r.polygon.len(), 4);
            assert!(r.polygon.contains(&vec!["1/3".to_string(); 3]));
        }
        assert_eq!(g.markers.len(), 6);
        assert_eq!(g.lines.len(), 3);
    }

    #[test]
    fn cyclic_order_of_square() {
        let p = |a: i64, b: i64, c: i64| vec![rat(a, 4), rat(b, 4), rat(c, 4)];
        let pts = vec![p(2, 1, 1), p(0, 2, 2), p(1, 2, 1), p(1, 1, 2)];
        let ordered = cyclic_order(pts);
        assert_eq!(ordered[0], p(0, 2, 2));
        // Neighbours of (0, 2, 2) in the square are (1, 2, 1) and (1, 1, 2), never the opposite corner.
        assert_eq!(ordered[2], p(2, 1, 1));
        assert!(int(0) < int(1));
    }

    #[test]
    fn other_k_is_rejected() {
        let l = LossMatrix::zero_one(4).unwrap();
        assert!(geometry("x", &[], &l, 10).is_err());
    }
}

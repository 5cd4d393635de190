use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon vertex {0} is not finite")]
    NonFinite(usize),
    #[error("polygon is not convex at vertex {0}")]
    NotConvex(usize),
}

const CONVEXITY_EPS: f64 = 1e-12;

/// Convex polygon with counter-clockwise vertices. Zero-area (collinear)
/// polygons are accepted and behave as empty sets.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<[f64; 2]>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let p = v[i];
        let q = v[(i + 1) % n];
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

impl ConvexPolygon {
    /// Validates the vertex loop. Clockwise input is reversed.
    pub fn new(mut vertices: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if let Some(i) = vertices
            .iter()
            .position(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(GeometryError::NonFinite(i));
        }
        if shoelace(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        let scale = vertices
            .iter()
            .fold(1.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()));
        for i in 0..n {
            let c = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if c < -CONVEXITY_EPS * scale * scale {
                return Err(GeometryError::NotConvex((i + 1) % n));
            }
        }
        Ok(Self { vertices })
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]).expect("rectangle is convex")
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn signed_area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Point membership, boundary inclusive.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| cross(self.vertices[i], self.vertices[(i + 1) % n], p) >= 0.0)
    }

    /// Sutherland-Hodgman clip of `self` against every edge of `clip`.
    pub fn clip(&self, clip: &ConvexPolygon) -> Vec<[f64; 2]> {
        let mut out = self.vertices.clone();
        let n = clip.vertices.len();
        for i in 0..n {
            if out.is_empty() {
                break;
            }
            let a = clip.vertices[i];
            let b = clip.vertices[(i + 1) % n];
            let input = std::mem::take(&mut out);
            let m = input.len();
            for j in 0..m {
                let p = input[j];
                let q = input[(j + 1) % m];
                let dp = cross(a, b, p);
                let dq = cross(a, b, q);
                if dp >= 0.0 {
                    out.push(p);
                }
                if (dp >= 0.0) != (dq >= 0.0) {
                    let t = dp / (dp - dq);
                    out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
                }
            }
        }
        out
    }

    /// Area of the convex intersection, always `>= 0`.
    pub fn intersection_area(&self, other: &ConvexPolygon) -> f64 {
        if self.area() == 0.0 || other.area() == 0.0 {
            return 0.0;
        }
        let clipped = self.clip(other);
        if clipped.len() < 3 {
            return 0.0;
        }
        shoelace(&clipped).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64) -> ConvexPolygon {
        ConvexPolygon::rectangle(x, y, x + 1.0, y + 1.0)
    }

    /// Regular grid membership oracle over the joint bounding box.
    fn grid_oracle(a: &ConvexPolygon, b: &ConvexPolygon, n: usize) -> f64 {
        let all: Vec<_> = a.vertices().iter().chain(b.vertices()).collect();
        let x0 = all.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
        let x1 = all.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
        let y0 = all.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min);
        let y1 = all.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max);
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut hits = 0usize;
        for i in 0..n {
            for j in 0..n {
                let p = [x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy];
                if a.contains(p) && b.contains(p) {
                    hits += 1;
                }
            }
        }
        hits as f64 * hx * hy
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(square(0.0, 0.0).intersection_area(&square(3.0, 0.0)), 0.0);
        assert!((square(0.0, 0.0).intersection_area(&square(0.0, 0.0)) - 1.0).abs() < 1e-12);
        let got = square(0.0, 0.0).intersection_area(&square(0.5, 0.0));
        let oracle = grid_oracle(&square(0.0, 0.0), &square(0.5, 0.0), 1000);
        assert!((oracle - 0.5).abs() < 1e-2);
        assert!((got - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_polygon_has_zero_intersection() {
        let line = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]).unwrap();
        assert_eq!(line.area(), 0.0);
        assert_eq!(line.intersection_area(&square(0.0, 0.0)), 0.0);
        assert_eq!(square(0.0, 0.0).intersection_area(&line), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0]]),
            Err(GeometryError::TooFewVertices(2))
        );
        let dart = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]];
        assert!(matches!(
            ConvexPolygon::new(dart),
            Err(GeometryError::NotConvex(_))
        ));
        let cw = ConvexPolygon::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!(cw.signed_area() > 0.0);
    }

    #[test]
    fn rotated_squares_against_grid_oracle() {
        use crate::geometry::{FootprintBox, Pose2D};
        let a = FootprintBox::new(Pose2D::new(0.0, 0.0, 0.4), 0.6, 0.3).polygon();
        let b = FootprintBox::new(Pose2D::new(0.5, 0.2, -0.9), 0.5, 0.5).polygon();
        let exact = a.intersection_area(&b);
        let oracle = grid_oracle(&a, &b, 1000);
        assert!(
            (exact - oracle).abs() < 1e-3,
            "exact {exact} oracle {oracle}"
        );
        assert!((exact - b.intersection_area(&a)).abs() < 1e-12);
        assert!(exact <= a.area().min(b.area()) + 1e-12);
    }
}

//! Planar convex hulls, used for the Gauss–Lucas check.

use crate::Complex;

/// Convex hull in counter-clockwise order (Andrew's monotone chain).
/// Collinear input gives the two endpoints; a single point gives itself.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexHull {
    vertices: Vec<Complex>,
}

fn cross(o: Complex, a: Complex, b: Complex) -> f64 {
    (a.re - o.re) * (b.im - o.im) - (a.im - o.im) * (b.re - o.re)
}

fn segment_distance(z: Complex, a: Complex, b: Complex) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let t = (((z - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + ab * t)).norm()
}

impl ConvexHull {
    pub fn new(points: &[Complex]) -> Self {
        let mut pts: Vec<Complex> = points.to_vec();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        pts.dedup();
        if pts.len() <= 2 {
            return ConvexHull { vertices: pts };
        }
        let mut hull: Vec<Complex> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &Complex>> = if pass == 0 {
                Box::new(pts.iter())
            } else {
                Box::new(pts.iter().rev())
            };
            for &p in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        ConvexHull { vertices: hull }
    }

    pub fn vertices(&self) -> &[Complex] {
        &self.vertices
    }

    /// Euclidean distance from `z` to the hull; zero inside.
    pub fn distance(&self, z: Complex) -> f64 {
        let v = &self.vertices;
        match v.len() {
            0 => f64::INFINITY,
            1 => (z - v[0]).norm(),
            2 => segment_distance(z, v[0], v[1]),
            m => {
                let inside = (0..m).all(|i| cross(v[i], v[(i + 1) % m], z) >= 0.0);
                if inside {
                    return 0.0;
                }
                (0..m)
                    .map(|i| segment_distance(z, v[i], v[(i + 1) % m]))
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn square_with_interior_points() {
        let pts = [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 1.0), c(0.0, 1.0), c(0.5, 0.5), c(0.2, 0.7)];
        let h = ConvexHull::new(&pts);
        assert_eq!(h.vertices().len(), 4);
        assert_eq!(h.distance(c(0.3, 0.3)), 0.0);
        assert!((h.distance(c(2.0, 0.5)) - 1.0).abs() < 1e-15);
        assert!((h.distance(c(2.0, 2.0)) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_hulls() {
        let seg = ConvexHull::new(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(seg.vertices().len(), 2);
        assert!(seg.distance(c(0.3, 0.0)) < 1e-15);
        assert!((seg.distance(c(0.3, 0.5)) - 0.5).abs() < 1e-15);
        let pt = ConvexHull::new(&[c(2.0, 2.0), c(2.0, 2.0)]);
        assert_eq!(pt.distance(c(2.0, 3.0)), 1.0);
    }
}

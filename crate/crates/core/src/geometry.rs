//! CAT(0) model spaces: Euclidean n-space, the Poincaré upper half-plane and
//! the k-spider (k half-lines glued at a common hub).
//!
//! Every space is uniquely geodesic, so a pair of points together with a
//! parameter `t` in `[0, 1]` determines the point `(1 - t)p ⊕ tq` at arclength
//! fraction `t` from `p`. The quasi-linearization pairing
//!
//! ```text
//! <xy, uv> = ½ (d²(x, v) + d²(y, u) - d²(x, u) - d²(y, v))
//! ```
//!
//! plays the role of an inner product; on Euclidean space it reduces to
//! `<x - y, u - v>`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance below which two points are treated as the same point.
pub const POINT_EQ_TOL: f64 = 1e-9;

/// Hard cap on ternary-search iterations.
pub const TERNARY_MAX_ITERS: usize = 200;

/// A point of one of the model spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Point {
    Euclidean { coords: Vec<f64> },
    /// Upper half-plane point; `y` must be strictly positive.
    HalfPlane { x: f64, y: f64 },
    /// Point at distance `radius` from the hub along ray `ray`. All points
    /// with `radius == 0` are the hub, whatever their ray index.
    Spider { ray: usize, radius: f64 },
}

impl Point {
    pub fn euclidean(coords: impl Into<Vec<f64>>) -> Self {
        Point::Euclidean { coords: coords.into() }
    }

    pub fn half_plane(x: f64, y: f64) -> Self {
        Point::HalfPlane { x, y }
    }

    pub fn spider(ray: usize, radius: f64) -> Self {
        Point::Spider { ray, radius }
    }

    pub fn hub() -> Self {
        Point::Spider { ray: 0, radius: 0.0 }
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            Point::Euclidean { coords } => Some(coords),
            _ => None,
        }
    }

    fn kind_name(&self) -> &'static str {
        match self {
            Point::Euclidean { .. } => "euclidean",
            Point::HalfPlane { .. } => "half_plane",
            Point::Spider { .. } => "spider",
        }
    }
}

/// A CAT(0) model space. All metric behavior derives from the variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Euclidean { dim: usize },
    HalfPlane,
    Spider { rays: usize },
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        let space = Space::Euclidean { dim };
        space.validate()?;
        Ok(space)
    }

    pub fn spider(rays: usize) -> Result<Self> {
        let space = Space::Spider { rays };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Space::Euclidean { dim: 0 } => invalid("euclidean dimension must be >= 1"),
            Space::Spider { rays } if rays < 3 => invalid("spider needs at least 3 rays"),
            _ => Ok(()),
        }
    }

    /// Origin of Euclidean space; `None` for the other models.
    pub fn origin(&self) -> Option<Point> {
        match *self {
            Space::Euclidean { dim } => Some(Point::euclidean(vec![0.0; dim])),
            _ => None,
        }
    }

    pub fn check_point(&self, p: &Point) -> Result<()> {
        self.validate()?;
        match (self, p) {
            (Space::Euclidean { dim }, Point::Euclidean { coords }) => {
                if coords.len() != *dim {
                    return invalid(format!(
                        "point has {} coordinates, space has dimension {dim}",
                        coords.len()
                    ));
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Domain("non-finite coordinate".into()));
                }
                Ok(())
            }
            (Space::HalfPlane, Point::HalfPlane { x, y }) => {
                if !(*y > 0.0) || !y.is_finite() || !x.is_finite() {
                    return Err(Error::Domain(format!("half-plane point ({x}, {y}) needs finite x and y > 0")));
                }
                Ok(())
            }
            (Space::Spider { rays }, Point::Spider { ray, radius }) => {
                if ray >= rays {
                    return invalid(format!("ray index {ray} out of range for {rays}-spider"));
                }
                if !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(Error::Domain(format!("spider radius {radius} must be finite and >= 0")));
                }
                Ok(())
            }
            _ => invalid(format!("{} point used in {:?}", p.kind_name(), self)),
        }
    }

    /// Geodesic distance.
    ///
    /// The half-plane uses `arccosh(1 + |p - q|² / (2 y_p y_q))`, evaluated in
    /// the equivalent form `2 asinh(|p - q| / (2 sqrt(y_p y_q)))`, which keeps
    /// full relative precision for nearby points.
    pub fn dist(&self, p: &Point, q: &Point) -> Result<f64> {
        self.check_point(p)?;
        self.check_point(q)?;
        Ok(self.dist_unchecked(p, q))
    }

    pub(crate) fn dist_unchecked(&self, p: &Point, q: &Point) -> f64 {
        match (p, q) {
            (Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => {
                a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt()
            }
            (Point::HalfPlane { x: xp, y: yp }, Point::HalfPlane { x: xq, y: yq }) => {
                let chord = (xp - xq).hypot(yp - yq);
                2.0 * (chord / (2.0 * (yp * yq).sqrt())).asinh()
            }
            (Point::Spider { ray: rp, radius: sp }, Point::Spider { ray: rq, radius: sq }) => {
                if rp == rq || *sp == 0.0 || *sq == 0.0 {
                    (sp - sq).abs()
                } else {
                    sp + sq
                }
            }
            _ => unreachable!("points checked against space"),
        }
    }

    /// The point `(1 - t)p ⊕ tq` on the geodesic from `p` to `q`, at distance
    /// `t·d(p, q)` from `p`.
    pub fn combine(&self, p: &Point, q: &Point, t: f64) -> Result<Point> {
        self.check_point(p)?;
        self.check_point(q)?;
        if !(0.0..=1.0).contains(&t) {
            return invalid(format!("geodesic parameter {t} outside [0, 1]"));
        }
        Ok(self.combine_unchecked(p, q, t))
    }

    pub(crate) fn combine_unchecked(&self, p: &Point, q: &Point, t: f64) -> Point {
        if t == 0.0 {
            return p.clone();
        }
        if t == 1.0 {
            return q.clone();
        }
        if p == q {
            return p.clone();
        }
        match (p, q) {
            (Point::Euclidean { coords: a }, Point::Euclidean { coords: b }) => Point::Euclidean {
                coords: a.iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect(),
            },
            (Point::HalfPlane { x: xp, y: yp }, Point::HalfPlane { x: xq, y: yq }) => {
                let d = self.dist_unchecked(p, q);
                if d == 0.0 {
                    return p.clone();
                }
                let (wp, wq) = hyperbolic_weights(d, t);
                // Hyperboloid coordinates X0 - X2 = 1/y and X1 = x/y are linear
                // along the geodesic, so the combination is exact in these terms.
                let inv_y = wp / yp + wq / yq;
                let x_over_y = wp * xp / yp + wq * xq / yq;
                let y = 1.0 / inv_y;
                Point::HalfPlane { x: x_over_y * y, y }
            }
            (Point::Spider { ray: rp, radius: sp }, Point::Spider { ray: rq, radius: sq }) => {
                if rp == rq || *sp == 0.0 || *sq == 0.0 {
                    let ray = if *sp == 0.0 { *rq } else { *rp };
                    spider_point(ray, (1.0 - t) * sp + t * sq)
                } else {
                    let s = t * (sp + sq);
                    if s <= *sp {
                        spider_point(*rp, sp - s)
                    } else {
                        spider_point(*rq, s - sp)
                    }
                }
            }
            _ => unreachable!("points checked against space"),
        }
    }

    /// Quasi-linearization pairing `<xy, uv>`.
    pub fn quasi_inner(&self, x: &Point, y: &Point, u: &Point, v: &Point) -> Result<f64> {
        for p in [x, y, u, v] {
            self.check_point(p)?;
        }
        Ok(self.quasi_inner_unchecked(x, y, u, v))
    }

    pub(crate) fn quasi_inner_unchecked(&self, x: &Point, y: &Point, u: &Point, v: &Point) -> f64 {
        let d2 = |a: &Point, b: &Point| {
            let d = self.dist_unchecked(a, b);
            d * d
        };
        0.5 * (d2(x, v) + d2(y, u) - d2(x, u) - d2(y, v))
    }

    /// Minimizes `t ↦ d(x, (1 - t)a ⊕ tb)` over `[0, 1]`.
    ///
    /// Euclidean and half-plane segments use closed forms. Elsewhere the objective
    /// is convex along geodesics and ternary search certifies
    /// `|t* - t_opt| <= tol` after `ceil(ln(1/tol) / ln(3/2))` iterations,
    /// capped at [`TERNARY_MAX_ITERS`].
    pub fn project_to_segment(&self, x: &Point, a: &Point, b: &Point, tol: f64) -> Result<(f64, Point)> {
        for p in [x, a, b] {
            self.check_point(p)?;
        }
        if !(tol > 0.0) {
            return invalid(format!("tolerance {tol} must be > 0"));
        }
        if let (Point::Euclidean { coords: xc }, Point::Euclidean { coords: ac }, Point::Euclidean { coords: bc }) = (x, a, b) {
            let len2: f64 = ac.iter().zip(bc).map(|(u, v)| (v - u) * (v - u)).sum();
            let t = if len2 == 0.0 {
                0.0
            } else {
                let dot: f64 = xc.iter().zip(ac).zip(bc).map(|((p, u), v)| (p - u) * (v - u)).sum();
                (dot / len2).clamp(0.0, 1.0)
            };
            return Ok((t, self.combine_unchecked(a, b, t)));
        }
        if let Some(found) = self.half_plane_segment_projection(x, a, b) {
            return Ok(found);
        }
        let t = ternary_min(|t| self.dist_unchecked(x, &self.combine_unchecked(a, b, t)), 0.0, 1.0, tol);
        Ok((t, self.combine_unchecked(a, b, t)))
    }

    /// Exact projection onto a half-plane segment: the foot of the hyperboloid
    /// point on the plane of the geodesic, clamped to the endpoints.
    fn half_plane_segment_projection(&self, x: &Point, a: &Point, b: &Point) -> Option<(f64, Point)> {
        let (Point::HalfPlane { .. }, Point::HalfPlane { .. }, Point::HalfPlane { .. }) = (x, a, b) else {
            return None;
        };
        let len = self.dist_unchecked(a, b);
        if len <= 1e-12 {
            return None;
        }
        let (xa, xb, xx) = (light_cone(a), light_cone(b), light_cone(x));
        let n = cross(lower(xa), lower(xb));
        let nn = minkowski(n, n);
        if !(nn < 0.0) || !nn.is_finite() {
            return None;
        }
        let c = minkowski(xx, n) / nn;
        let y = [xx[0] - c * n[0], xx[1] - c * n[1], xx[2] - c * n[2]];
        let norm = minkowski(y, y).sqrt();
        if !(norm > 0.0) || !(y[0] > 0.0) {
            return None;
        }
        let foot = Point::HalfPlane { x: y[1] / y[0], y: norm / y[0] };
        let (da, db) = (self.dist_unchecked(a, &foot), self.dist_unchecked(&foot, b));
        Some(if da <= len && db <= len {
            ((da / len).clamp(0.0, 1.0), foot)
        } else if da <= db {
            (0.0, a.clone())
        } else {
            (1.0, b.clone())
        })
    }

    /// Draws a point uniformly from the closed geodesic ball `B(center, radius)`.
    pub fn sample_ball<R: Rng + ?Sized>(&self, rng: &mut R, center: &Point, radius: f64) -> Result<Point> {
        self.check_point(center)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return invalid(format!("sampling radius {radius} must be finite and > 0"));
        }
        Ok(match (self, center) {
            (Space::Euclidean { dim }, Point::Euclidean { coords }) => {
                let mut dir: Vec<f64> = (0..*dim).map(|_| StandardNormal.sample(rng)).collect();
                let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
                let r = radius * rng.random::<f64>().powf(1.0 / *dim as f64);
                if norm > 0.0 {
                    for v in dir.iter_mut() {
                        *v *= r / norm;
                    }
                }
                Point::Euclidean { coords: coords.iter().zip(&dir).map(|(c, v)| c + v).collect() }
            }
            (Space::HalfPlane, Point::HalfPlane { x: x0, y: y0 }) => {
                // Hyperbolic area of B(r) is proportional to cosh r - 1.
                let u: f64 = rng.random();
                let rho = (1.0 + u * (radius.cosh() - 1.0)).acosh();
                let angle = rng.random::<f64>() * std::f64::consts::TAU;
                let w = (rho / 2.0).tanh();
                let (wu, wv) = (w * angle.cos(), w * angle.sin());
                // Disk to half-plane via z = i(1 + w)/(1 - w), then move i to center.
                let den = (1.0 - wu) * (1.0 - wu) + wv * wv;
                let re = -2.0 * wv / den;
                let im = (1.0 - w * w) / den;
                Point::HalfPlane { x: x0 + y0 * re, y: y0 * im }
            }
            (Space::Spider { rays }, Point::Spider { .. }) => {
                let reach = match center {
                    Point::Spider { radius: rc, .. } => rc + radius,
                    _ => unreachable!(),
                };
                loop {
                    let candidate = spider_point(rng.random_range(0..*rays), rng.random::<f64>() * reach);
                    if self.dist_unchecked(center, &candidate) <= radius {
                        break candidate;
                    }
                }
            }
            _ => unreachable!("center checked against space"),
        })
    }

    pub fn approx_eq(&self, p: &Point, q: &Point) -> Result<bool> {
        Ok(self.dist(p, q)? <= POINT_EQ_TOL)
    }
}

fn spider_point(ray: usize, radius: f64) -> Point {
    let radius = radius.max(0.0);
    if radius == 0.0 {
        Point::hub()
    } else {
        Point::Spider { ray, radius }
    }
}

/// Hyperboloid point of a half-plane point in light-cone coordinates
/// `(X0 - X2, X1, X0 + X2) = (1/y, x/y, (x² + y²)/y)`.
fn light_cone(p: &Point) -> [f64; 3] {
    let Point::HalfPlane { x, y } = p else { unreachable!("half-plane point") };
    [1.0 / y, x / y, (x * x + y * y) / y]
}

/// `<U, V> = ½(u_U w_V + w_U u_V) - X1_U X1_V`, the Minkowski form in
/// light-cone coordinates.
fn minkowski(p: [f64; 3], q: [f64; 3]) -> f64 {
    0.5 * (p[0] * q[2] + p[2] * q[0]) - p[1] * q[1]
}

/// Covector `G·p` with `<p, q> = (G·p)ᵀq`.
fn lower(p: [f64; 3]) -> [f64; 3] {
    [0.5 * p[2], -p[1], 0.5 * p[0]]
}

fn cross(p: [f64; 3], q: [f64; 3]) -> [f64; 3] {
    [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]]
}

/// Weights `sinh((1-t)d)/sinh d` and `sinh(td)/sinh d`, stable for large `d`.
fn hyperbolic_weights(d: f64, t: f64) -> (f64, f64) {
    if d < 20.0 {
        let s = d.sinh();
        (((1.0 - t) * d).sinh() / s, (t * d).sinh() / s)
    } else {
        let denom = 1.0 - (-2.0 * d).exp();
        let wp = (-t * d).exp() * (1.0 - (-2.0 * (1.0 - t) * d).exp()) / denom;
        let wq = (-(1.0 - t) * d).exp() * (1.0 - (-2.0 * t * d).exp()) / denom;
        (wp, wq)
    }
}

/// Number of ternary iterations needed to shrink `range` below `tol`.
pub fn ternary_iterations(range: f64, tol: f64) -> usize {
    if range <= tol {
        return 0;
    }
    let n = ((range / tol).ln() / 1.5f64.ln()).ceil();
    (n as usize).min(TERNARY_MAX_ITERS)
}

/// Ternary search for the minimizer of a unimodal function on `[lo, hi]`.
/// Endpoints win ties so that boundary minimizers are returned exactly.
pub(crate) fn ternary_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..ternary_iterations(hi - lo, tol) {
        let m1 = a + (b - a) / 3.0;
        let m2 = b - (b - a) / 3.0;
        if f(m1) <= f(m2) {
            b = m2;
        } else {
            a = m1;
        }
    }
    let mid = 0.5 * (a + b);
    let fm = f(mid);
    if f(lo) <= fm {
        lo
    } else if f(hi) <= fm {
        hi
    } else {
        mid
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    fn e2() -> Space {
        Space::euclidean(2).unwrap()
    }

    #[test]
    fn euclidean_distance() {
        let d = e2().dist(&Point::euclidean([0.0, 0.0]), &Point::euclidean([3.0, 4.0])).unwrap();
        assert_eq!(d, 5.0);
    }

    #[test]
    fn half_plane_vertical_distance_is_log_ratio() {
        let d = Space::HalfPlane.dist(&Point::half_plane(0.0, 1.0), &Point::half_plane(0.0, E)).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-15);
        // arccosh form from the textbook formula agrees
        let direct = (1.0f64 + (E - 1.0).powi(2) / (2.0 * E)).acosh();
        assert_relative_eq!(d, direct, epsilon = 1e-14);
    }

    #[test]
    fn spider_distance_goes_through_hub() {
        let s = Space::spider(3).unwrap();
        assert_eq!(s.dist(&Point::spider(1, 2.0), &Point::spider(2, 3.0)).unwrap(), 5.0);
        assert_eq!(s.dist(&Point::spider(1, 2.0), &Point::spider(1, 3.0)).unwrap(), 1.0);
        assert_eq!(s.dist(&Point::spider(1, 0.0), &Point::spider(2, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_kinds_and_domain_errors() {
        let err = e2().dist(&Point::half_plane(0.0, 1.0), &Point::euclidean([0.0, 0.0]));
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        let err = Space::HalfPlane.dist(&Point::half_plane(0.0, 0.0), &Point::half_plane(0.0, 1.0));
        assert!(matches!(err, Err(Error::Domain(_))));
        let err = Space::spider(3).unwrap().dist(&Point::spider(3, 1.0), &Point::hub());
        assert!(matches!(err, Err(Error::InvalidInput(_))));
        assert!(Space::spider(2).is_err());
        assert!(Space::euclidean(0).is_err());
    }

    #[test]
    fn combine_examples() {
        let m = e2().combine(&Point::euclidean([0.0, 0.0]), &Point::euclidean([2.0, 2.0]), 0.5).unwrap();
        assert_eq!(m, Point::euclidean([1.0, 1.0]));

        let s = Space::spider(3).unwrap();
        let hub = s.combine(&Point::spider(1, 2.0), &Point::spider(2, 2.0), 0.5).unwrap();
        assert!(s.approx_eq(&hub, &Point::hub()).unwrap());

        let mid = Space::HalfPlane.combine(&Point::half_plane(0.0, 1.0), &Point::half_plane(0.0, E * E), 0.5).unwrap();
        match mid {
            Point::HalfPlane { x, y } => {
                assert!(x.abs() < 1e-14);
                assert_relative_eq!(y, E, max_relative = 1e-14);
            }
            _ => panic!(),
        }
        assert!(e2().combine(&Point::euclidean([0.0, 0.0]), &Point::euclidean([1.0, 1.0]), 1.5).is_err());
    }

    #[test]
    fn half_plane_combine_on_semicircle() {
        // (-1, 0)..(1, 0) unit semicircle; the midpoint of (-a, b) and (a, b) is its top (0, 1).
        let p = Point::half_plane(-0.6, 0.8);
        let q = Point::half_plane(0.6, 0.8);
        let mid = Space::HalfPlane.combine(&p, &q, 0.5).unwrap();
        match mid {
            Point::HalfPlane { x, y } => {
                assert!(x.abs() < 1e-15);
                assert_relative_eq!(y, 1.0, max_relative = 1e-15);
            }
            _ => panic!(),
        }
        for &t in &[0.1, 0.3, 0.77] {
            let z = Space::HalfPlane.combine(&p, &q, t).unwrap();
            let d = Space::HalfPlane.dist(&p, &q).unwrap();
            assert_relative_eq!(Space::HalfPlane.dist(&p, &z).unwrap(), t * d, max_relative = 1e-12);
            assert_relative_eq!(Space::HalfPlane.dist(&z, &q).unwrap(), (1.0 - t) * d, max_relative = 1e-12);
            if let Point::HalfPlane { x, y } = z {
                assert_relative_eq!(x * x + y * y, 1.0, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn quasi_inner_examples() {
        let s = e2();
        let x = Point::euclidean([0.0, 0.0]);
        let y = Point::euclidean([1.0, 0.0]);
        assert_relative_eq!(s.quasi_inner(&x, &y, &x, &y).unwrap(), 1.0);
        let q = s
            .quasi_inner(
                &Point::euclidean([1.0, 0.0]),
                &Point::euclidean([0.0, 0.0]),
                &Point::euclidean([0.0, 2.0]),
                &Point::euclidean([0.0, 0.0]),
            )
            .unwrap();
        assert!(q.abs() < 1e-15);

        // ½(d²(x,v) + d²(y,u) - d²(x,u) - d²(y,v)) = ½(1 + 1 - 4 - 0)
        let sp = Space::spider(3).unwrap();
        let v = sp
            .quasi_inner(&Point::spider(1, 1.0), &Point::hub(), &Point::spider(2, 1.0), &Point::hub())
            .unwrap();
        assert_eq!(v, -1.0);
    }

    #[test]
    fn projection_examples() {
        let s = e2();
        let (t, p) = s
            .project_to_segment(&Point::euclidean([1.0, 1.0]), &Point::euclidean([0.0, 0.0]), &Point::euclidean([2.0, 0.0]), 1e-10)
            .unwrap();
        assert!((t - 0.5).abs() <= 1e-8);
        assert!(s.dist(&p, &Point::euclidean([1.0, 0.0])).unwrap() < 1e-8);

        let a = Point::euclidean([0.0, 0.0]);
        let (t, p) = s.project_to_segment(&a, &a, &Point::euclidean([2.0, 0.0]), 1e-10).unwrap();
        assert_eq!(t, 0.0);
        assert_eq!(p, a);

        let sp = Space::spider(3).unwrap();
        let (t, p) = sp
            .project_to_segment(&Point::spider(2, 1.0), &Point::spider(0, 1.0), &Point::spider(1, 1.0), 1e-12)
            .unwrap();
        assert!((t - 0.5).abs() <= 1e-12);
        assert!(sp.dist(&p, &Point::hub()).unwrap() <= 1e-12);

        assert!(s.project_to_segment(&a, &a, &a, 0.0).is_err());
    }

    #[test]
    fn spider_projection_matches_discretized_scan() {
        // brute-force scan over a fine t grid
        let sp = Space::spider(4).unwrap();
        let x = Point::spider(3, 1.0);
        let a = Point::spider(1, 1.0);
        let b = Point::spider(2, 1.0);
        let best = (0..=10_000)
            .map(|i| i as f64 / 10_000.0)
            .min_by(|s, t| {
                let ds = sp.dist(&x, &sp.combine(&a, &b, *s).unwrap()).unwrap();
                let dt = sp.dist(&x, &sp.combine(&a, &b, *t).unwrap()).unwrap();
                ds.partial_cmp(&dt).unwrap()
            })
            .unwrap();
        assert_eq!(best, 0.5);
        let (t, _) = sp.project_to_segment(&x, &a, &b, 1e-12).unwrap();
        assert!((t - best).abs() < 1e-10);
    }

    #[test]
    fn ternary_iteration_count() {
        assert_eq!(ternary_iterations(1.0, 1.0), 0);
        assert_eq!(ternary_iterations(1.0, 1e-12), 69);
        assert_eq!(ternary_iterations(1.0, 1e-300), TERNARY_MAX_ITERS);
    }

    #[test]
    fn ball_samples_stay_in_ball() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let cases = [
            (Space::euclidean(3).unwrap(), Point::euclidean([1.0, -1.0, 0.5])),
            (Space::HalfPlane, Point::half_plane(0.3, 2.0)),
            (Space::spider(5).unwrap(), Point::spider(2, 0.4)),
        ];
        for (space, center) in cases {
            for _ in 0..500 {
                let p = space.sample_ball(&mut rng, &center, 1.5).unwrap();
                assert!(space.dist(&center, &p).unwrap() <= 1.5 + 1e-12);
            }
        }
    }
}

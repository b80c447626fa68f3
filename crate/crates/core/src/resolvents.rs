//! Catalog of resolvent families `γ ↦ T_γ`.
//!
//! Three classes are covered:
//!
//! - proximal mappings `J_{γf} x = argmin_y f(y) + d²(x, y)/(2γ)` for
//!   `f = ½d²(·, a)`, `f = d(·, a)`, `f = ½d²(·, C)` and `f = (c/2)‖·‖²`;
//! - resolvents `R_{T,γ}` of a nonexpansive map `T`, i.e. the unique fixed
//!   point of `z ↦ (1/(1+γ))x ⊕ (γ/(1+γ))Tz`;
//! - resolvents `J_{γA} = (I + γA)⁻¹` of monotone linear operators on `ℝⁿ`.
//!
//! Each family also reports its fixed-point set, which does not depend on γ.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ternary_min, Point, Space};

/// Tolerance for the ternary searches behind half-plane and spider projections.
const PROJECTION_TOL: f64 = 1e-13;

pub const RESOLVENT_MAX_ITERS: usize = 1_000_000;

/// A geodesically convex set with a computable nearest-point projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    Singleton { point: Point },
    /// Geodesic segment `[a, b]`.
    Segment { a: Point, b: Point },
    /// `{point + s·direction : s ∈ ℝ}` in Euclidean space.
    EuclideanAffineLine { point: Point, direction: Vec<f64> },
    /// Radii `r_min..=r_max` along one spider ray.
    SpiderRaySegment { ray: usize, r_min: f64, r_max: f64 },
}

impl ConvexSet {
    pub fn singleton(point: Point) -> Self {
        ConvexSet::Singleton { point }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            ConvexSet::Singleton { point } => space.check_point(point),
            ConvexSet::Segment { a, b } => {
                space.check_point(a)?;
                space.check_point(b)
            }
            ConvexSet::EuclideanAffineLine { point, direction } => {
                space.check_point(point)?;
                if !matches!(space, Space::Euclidean { .. }) {
                    return invalid("affine lines need a Euclidean space");
                }
                if direction.len() != point.coords().map_or(0, <[f64]>::len) {
                    return invalid("line direction has the wrong dimension");
                }
                if !(direction.iter().map(|v| v * v).sum::<f64>() > 0.0) {
                    return invalid("line direction must be nonzero");
                }
                Ok(())
            }
            ConvexSet::SpiderRaySegment { ray, r_min, r_max } => {
                let Space::Spider { rays } = *space else {
                    return invalid("ray segments need a spider space");
                };
                if *ray >= rays {
                    return invalid(format!("ray {ray} out of range for {rays}-spider"));
                }
                if !(0.0 <= *r_min && r_min <= r_max && r_max.is_finite()) {
                    return invalid(format!("ray segment needs 0 <= r_min <= r_max, got [{r_min}, {r_max}]"));
                }
                Ok(())
            }
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, space: &Space, x: &Point) -> Result<Point> {
        self.validate(space)?;
        space.check_point(x)?;
        Ok(match self {
            ConvexSet::Singleton { point } => point.clone(),
            ConvexSet::Segment { a, b } => match (space, a, b, x) {
                (
                    Space::Euclidean { .. },
                    Point::Euclidean { coords: pa },
                    Point::Euclidean { coords: pb },
                    Point::Euclidean { coords: px },
                ) => {
                    let len2: f64 = pa.iter().zip(pb).map(|(u, v)| (v - u) * (v - u)).sum();
                    if len2 == 0.0 {
                        return Ok(a.clone());
                    }
                    let dot: f64 = pa.iter().zip(pb).zip(px).map(|((u, v), w)| (v - u) * (w - u)).sum();
                    space.combine_unchecked(a, b, (dot / len2).clamp(0.0, 1.0))
                }
                _ => space.project_to_segment(x, a, b, PROJECTION_TOL)?.1,
            },
            ConvexSet::EuclideanAffineLine { point, direction } => {
                let (base, px) = (point.coords().unwrap(), x.coords().unwrap());
                let norm2: f64 = direction.iter().map(|v| v * v).sum();
                let s = direction.iter().zip(px).zip(base).map(|((d, p), b)| d * (p - b)).sum::<f64>() / norm2;
                Point::euclidean(base.iter().zip(direction).map(|(b, d)| b + s * d).collect::<Vec<_>>())
            }
            ConvexSet::SpiderRaySegment { ray, r_min, r_max } => {
                let Point::Spider { ray: rx, radius } = *x else { unreachable!() };
                let r = if radius == 0.0 || rx == *ray { radius.clamp(*r_min, *r_max) } else { *r_min };
                if r == 0.0 {
                    Point::hub()
                } else {
                    Point::spider(*ray, r)
                }
            }
        })
    }

    pub fn dist_to(&self, space: &Space, x: &Point) -> Result<f64> {
        let p = self.project(space, x)?;
        space.dist(x, &p)
    }

    pub fn contains(&self, space: &Space, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.dist_to(space, x)? <= tol)
    }

    /// Points of the set at evenly spaced positions; `count >= 2`.
    /// Lines are sampled on the stretch `point ± direction`.
    pub fn sample_points(&self, space: &Space, count: usize) -> Result<Vec<Point>> {
        self.validate(space)?;
        let count = count.max(2);
        let fracs = (0..count).map(|i| i as f64 / (count - 1) as f64);
        Ok(match self {
            ConvexSet::Singleton { point } => vec![point.clone()],
            ConvexSet::Segment { a, b } => fracs.map(|t| space.combine_unchecked(a, b, t)).collect(),
            ConvexSet::EuclideanAffineLine { point, direction } => {
                let base = point.coords().unwrap();
                fracs
                    .map(|t| {
                        let s = 2.0 * t - 1.0;
                        Point::euclidean(base.iter().zip(direction).map(|(b, d)| b + s * d).collect::<Vec<_>>())
                    })
                    .collect()
            }
            ConvexSet::SpiderRaySegment { ray, r_min, r_max } => fracs
                .map(|t| {
                    let r = r_min + t * (r_max - r_min);
                    if r == 0.0 {
                        Point::hub()
                    } else {
                        Point::spider(*ray, r)
                    }
                })
                .collect(),
        })
    }
}

/// Analytic description of a fixed-point set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedSet {
    Set { set: ConvexSet },
    Empty,
    /// No finite analytic description (this includes the whole space).
    Unknown,
}

impl FixedSet {
    fn of(set: ConvexSet) -> Self {
        FixedSet::Set { set }
    }

    pub fn as_set(&self) -> Option<&ConvexSet> {
        match self {
            FixedSet::Set { set } => Some(set),
            _ => None,
        }
    }
}

/// A fixed self-map of a space.
pub trait SelfMap: Sync {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point>;
}

/// A family of self-maps indexed by `γ > 0`.
pub trait Family: Sync {
    fn apply(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point>;

    fn name(&self) -> String;

    fn at(&self, gamma: f64) -> Member<'_, Self>
    where
        Self: Sized,
    {
        Member { family: self, gamma }
    }
}

/// The member `T_γ` of a family, viewed as a single self-map.
#[derive(Debug, Clone, Copy)]
pub struct Member<'a, F: ?Sized> {
    pub family: &'a F,
    pub gamma: f64,
}

impl<F: Family + ?Sized> SelfMap for Member<'_, F> {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        self.family.apply(space, self.gamma, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NonexpansiveMap {
    Identity,
    /// `x ↦ -x` on Euclidean space.
    Negation,
    Constant { point: Point },
    /// Rotation of `ℝ²` about the origin.
    Rotation { angle: f64 },
    ProjectionOnto { set: ConvexSet },
}

impl NonexpansiveMap {
    pub fn fixed_set(&self, space: &Space) -> FixedSet {
        match self {
            NonexpansiveMap::Identity => FixedSet::Unknown,
            NonexpansiveMap::Negation => space.origin().map_or(FixedSet::Unknown, |o| FixedSet::of(ConvexSet::singleton(o))),
            NonexpansiveMap::Rotation { angle } => {
                let turns = angle / std::f64::consts::TAU;
                if (turns - turns.round()).abs() < 1e-15 {
                    FixedSet::Unknown
                } else {
                    space.origin().map_or(FixedSet::Unknown, |o| FixedSet::of(ConvexSet::singleton(o)))
                }
            }
            NonexpansiveMap::Constant { point } => FixedSet::of(ConvexSet::singleton(point.clone())),
            NonexpansiveMap::ProjectionOnto { set } => FixedSet::of(set.clone()),
        }
    }
}

impl SelfMap for NonexpansiveMap {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        space.check_point(x)?;
        match self {
            NonexpansiveMap::Identity => Ok(x.clone()),
            NonexpansiveMap::Negation => match x {
                Point::Euclidean { coords } => Ok(Point::euclidean(coords.iter().map(|c| -c).collect::<Vec<_>>())),
                _ => invalid("negation needs a Euclidean space"),
            },
            NonexpansiveMap::Constant { point } => {
                space.check_point(point)?;
                Ok(point.clone())
            }
            NonexpansiveMap::Rotation { angle } => match x.coords() {
                Some([a, b]) => {
                    let (s, c) = angle.sin_cos();
                    Ok(Point::euclidean([c * a - s * b, s * a + c * b]))
                }
                _ => invalid("rotation needs the Euclidean plane"),
            },
            NonexpansiveMap::ProjectionOnto { set } => set.project(space, x),
        }
    }
}

/// `x ↦ factor·x` on Euclidean space; expansive when `|factor| > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dilation(pub f64);

impl SelfMap for Dilation {
    fn apply(&self, space: &Space, x: &Point) -> Result<Point> {
        space.check_point(x)?;
        match x {
            Point::Euclidean { coords } => Ok(Point::euclidean(coords.iter().map(|c| self.0 * c).collect::<Vec<_>>())),
            _ => invalid("dilation needs a Euclidean space"),
        }
    }
}

/// The family `T_γ x = (1 + γ)x`, which satisfies none of the resolvent
/// properties and serves as a counterexample.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExpansiveFamily;

impl Family for ExpansiveFamily {
    fn apply(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        Dilation(1.0 + gamma).apply(space, x)
    }

    fn name(&self) -> String {
        "expansive".into()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolventFamily {
    /// Proximal mapping of `½d²(·, anchor)`.
    ProxQuadraticToPoint { anchor: Point },
    /// Proximal mapping of `d(·, anchor)`.
    ProxDistanceToPoint { anchor: Point },
    /// Proximal mapping of `½d²(·, set)`.
    ProxQuadraticToSet { set: ConvexSet },
    /// Proximal mapping of `(c/2)‖·‖²` on `ℝⁿ`, i.e. the resolvent of `cI`.
    ProxScaledSquaredNorm { c: f64 },
    ResolventOfNonexpansive { map: NonexpansiveMap, tol: f64 },
    /// Resolvent of `x ↦ Mx` with `M` monotone (`M + Mᵀ` positive semidefinite), row-major.
    ResolventOfMonotoneLinear { matrix: Vec<Vec<f64>> },
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        invalid(format!("resolvent order {gamma} must be finite and > 0"))
    }
}

impl ResolventFamily {
    pub fn validate(&self, space: &Space) -> Result<()> {
        match self {
            ResolventFamily::ProxQuadraticToPoint { anchor } | ResolventFamily::ProxDistanceToPoint { anchor } => {
                space.check_point(anchor)
            }
            ResolventFamily::ProxQuadraticToSet { set } => set.validate(space),
            ResolventFamily::ProxScaledSquaredNorm { c } => {
                if !matches!(space, Space::Euclidean { .. }) {
                    return invalid("scaled squared norm needs a Euclidean space");
                }
                if !(*c > 0.0 && c.is_finite()) {
                    return invalid(format!("norm scale {c} must be > 0"));
                }
                Ok(())
            }
            ResolventFamily::ResolventOfNonexpansive { map, tol } => {
                if !(*tol > 0.0) {
                    return invalid(format!("resolvent tolerance {tol} must be > 0"));
                }
                match map {
                    NonexpansiveMap::Negation if !matches!(space, Space::Euclidean { .. }) => {
                        invalid("negation needs a Euclidean space")
                    }
                    NonexpansiveMap::Rotation { .. } if *space != Space::Euclidean { dim: 2 } => {
                        invalid("rotation needs the Euclidean plane")
                    }
                    NonexpansiveMap::Constant { point } => space.check_point(point),
                    NonexpansiveMap::ProjectionOnto { set } => set.validate(space),
                    _ => Ok(()),
                }
            }
            ResolventFamily::ResolventOfMonotoneLinear { matrix } => {
                monotone_matrix(space, matrix)?;
                Ok(())
            }
        }
    }

    /// Analytic fixed-point set, common to every member of the family.
    pub fn fixed_set(&self, space: &Space) -> FixedSet {
        match self {
            ResolventFamily::ProxQuadraticToPoint { anchor } | ResolventFamily::ProxDistanceToPoint { anchor } => {
                FixedSet::of(ConvexSet::singleton(anchor.clone()))
            }
            ResolventFamily::ProxQuadraticToSet { set } => FixedSet::of(set.clone()),
            ResolventFamily::ProxScaledSquaredNorm { .. } => {
                space.origin().map_or(FixedSet::Empty, |o| FixedSet::of(ConvexSet::singleton(o)))
            }
            ResolventFamily::ResolventOfNonexpansive { map, .. } => map.fixed_set(space),
            ResolventFamily::ResolventOfMonotoneLinear { matrix } => linear_kernel(matrix),
        }
    }

    /// Proximal kinds, for which [`prox_oracle_1d`] applies.
    pub fn is_prox(&self) -> bool {
        matches!(
            self,
            ResolventFamily::ProxQuadraticToPoint { .. }
                | ResolventFamily::ProxDistanceToPoint { .. }
                | ResolventFamily::ProxQuadraticToSet { .. }
                | ResolventFamily::ProxScaledSquaredNorm { .. }
        )
    }
}

impl Family for ResolventFamily {
    fn apply(&self, space: &Space, gamma: f64, x: &Point) -> Result<Point> {
        check_gamma(gamma)?;
        self.validate(space)?;
        space.check_point(x)?;
        let pull = gamma / (1.0 + gamma);
        match self {
            ResolventFamily::ProxQuadraticToPoint { anchor } => Ok(space.combine_unchecked(x, anchor, pull)),
            ResolventFamily::ProxDistanceToPoint { anchor } => {
                let d = space.dist_unchecked(x, anchor);
                if d <= gamma {
                    Ok(anchor.clone())
                } else {
                    Ok(space.combine_unchecked(x, anchor, gamma / d))
                }
            }
            ResolventFamily::ProxQuadraticToSet { set } => {
                let p = set.project(space, x)?;
                Ok(space.combine_unchecked(x, &p, pull))
            }
            ResolventFamily::ProxScaledSquaredNorm { c } => {
                let coords = x.coords().unwrap();
                Ok(Point::euclidean(coords.iter().map(|v| v / (1.0 + gamma * c)).collect::<Vec<_>>()))
            }
            ResolventFamily::ResolventOfNonexpansive { map, tol } => resolvent_nonexp_iterate(space, map, gamma, x, *tol),
            ResolventFamily::ResolventOfMonotoneLinear { matrix } => {
                let m = monotone_matrix(space, matrix)?;
                let n = m.nrows();
                let system = DMatrix::identity(n, n) + m * gamma;
                let rhs = DVector::from_column_slice(x.coords().unwrap());
                let y = system
                    .lu()
                    .solve(&rhs)
                    .ok_or_else(|| Error::NumericFailure("I + γM is singular".into()))?;
                Ok(Point::euclidean(y.iter().copied().collect::<Vec<_>>()))
            }
        }
    }

    fn name(&self) -> String {
        match self {
            ResolventFamily::ProxQuadraticToPoint { .. } => "prox_quadratic_to_point",
            ResolventFamily::ProxDistanceToPoint { .. } => "prox_distance_to_point",
            ResolventFamily::ProxQuadraticToSet { .. } => "prox_quadratic_to_set",
            ResolventFamily::ProxScaledSquaredNorm { .. } => "prox_scaled_squared_norm",
            ResolventFamily::ResolventOfNonexpansive { .. } => "resolvent_of_nonexpansive",
            ResolventFamily::ResolventOfMonotoneLinear { .. } => "resolvent_of_monotone_linear",
        }
        .into()
    }
}

fn monotone_matrix(space: &Space, rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let Space::Euclidean { dim } = *space else {
        return invalid("monotone linear operators need a Euclidean space");
    };
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return invalid(format!("operator matrix must be {dim}x{dim}"));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return invalid("operator matrix has non-finite entries");
    }
    let m = DMatrix::from_fn(dim, dim, |i, j| rows[i][j]);
    let sym = (&m + m.transpose()) * 0.5;
    let scale = sym.amax().max(1.0);
    if sym.symmetric_eigenvalues().min() < -1e-12 * scale {
        return invalid("operator is not monotone: symmetric part has a negative eigenvalue");
    }
    Ok(m)
}

/// Kernel of `M` (the zeros of the operator) for dimensions 1 and 2.
fn linear_kernel(rows: &[Vec<f64>]) -> FixedSet {
    let dim = rows.len();
    let zero = || Point::euclidean(vec![0.0; dim]);
    let scale = rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    match dim {
        1 if scale == 0.0 => FixedSet::Unknown,
        1 => FixedSet::of(ConvexSet::singleton(zero())),
        2 => {
            let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
            if scale == 0.0 {
                FixedSet::Unknown
            } else if det.abs() > 1e-12 * scale * scale {
                FixedSet::of(ConvexSet::singleton(zero()))
            } else {
                let row = if rows[0].iter().map(|v| v * v).sum::<f64>() >= rows[1].iter().map(|v| v * v).sum::<f64>() {
                    &rows[0]
                } else {
                    &rows[1]
                };
                FixedSet::of(ConvexSet::EuclideanAffineLine { point: zero(), direction: vec![-row[1], row[0]] })
            }
        }
        _ => FixedSet::Unknown,
    }
}

/// Resolvent `R_{T,γ}x`: Banach iteration of `z ↦ (1/(1+γ))x ⊕ (γ/(1+γ))Tz`
/// from `z = x`.
///
/// The map contracts with factor `q = γ/(1+γ)`, so stopping once a step is at
/// most `tol·(1-q)/q` certifies `d(z, R_{T,γ}x) <= tol`. Steps already at the
/// rounding floor of the iterate also stop the loop.
pub fn resolvent_nonexp_iterate(space: &Space, map: &NonexpansiveMap, gamma: f64, x: &Point, tol: f64) -> Result<Point> {
    check_gamma(gamma)?;
    space.check_point(x)?;
    if !(tol > 0.0) {
        return invalid(format!("resolvent tolerance {tol} must be > 0"));
    }
    let q = gamma / (1.0 + gamma);
    let threshold = tol * (1.0 - q) / q;
    let mut z = x.clone();
    for _ in 0..RESOLVENT_MAX_ITERS {
        let next = space.combine_unchecked(x, &map.apply(space, &z)?, q);
        let step = space.dist_unchecked(&z, &next);
        let floor = 8.0 * f64::EPSILON * (1.0 + space.dist_unchecked(x, &next));
        z = next;
        if step <= threshold || step <= floor {
            return Ok(z);
        }
    }
    Err(Error::NumericFailure(format!(
        "resolvent iteration did not converge within {RESOLVENT_MAX_ITERS} steps"
    )))
}

/// Brute-force proximal point: minimizes `f(c(t)) + d²(x, c(t))/(2γ)` over the
/// geodesic `c` from `x` to the anchor (or to the projection of `x` onto the
/// set, or to the origin), by ternary search on `t`.
///
/// Used to validate the closed forms of [`ResolventFamily::apply`].
pub fn prox_oracle_1d(space: &Space, family: &ResolventFamily, gamma: f64, x: &Point, tol: f64) -> Result<Point> {
    check_gamma(gamma)?;
    family.validate(space)?;
    space.check_point(x)?;
    if !(tol > 0.0) {
        return invalid(format!("tolerance {tol} must be > 0"));
    }
    let sq = |a: &Point, b: &Point| {
        let d = space.dist_unchecked(a, b);
        d * d
    };
    type Objective<'a> = Box<dyn Fn(&Point) -> f64 + 'a>;
    let (target, objective): (Point, Objective<'_>) = match family {
        ResolventFamily::ProxQuadraticToPoint { anchor } => (anchor.clone(), Box::new(move |y| 0.5 * sq(y, anchor))),
        ResolventFamily::ProxDistanceToPoint { anchor } => {
            (anchor.clone(), Box::new(move |y| space.dist_unchecked(y, anchor)))
        }
        ResolventFamily::ProxQuadraticToSet { set } => (
            set.project(space, x)?,
            Box::new(move |y| {
                let p = set.project(space, y).expect("validated set");
                0.5 * sq(y, &p)
            }),
        ),
        ResolventFamily::ProxScaledSquaredNorm { c } => {
            let origin = space.origin().unwrap();
            let c = *c;
            (origin.clone(), Box::new(move |y| 0.5 * c * sq(y, &origin)))
        }
        _ => return invalid(format!("{} has no proximal oracle", family.name())),
    };
    let len = space.dist_unchecked(x, &target);
    if len == 0.0 {
        return Ok(x.clone());
    }
    // Search accuracy in t scales with the segment length.
    let t = ternary_min(
        |t| {
            let y = space.combine_unchecked(x, &target, t);
            objective(&y) + sq(x, &y) / (2.0 * gamma)
        },
        0.0,
        1.0,
        (tol / len).min(0.5),
    );
    Ok(space.combine_unchecked(x, &target, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line() -> Space {
        Space::euclidean(1).unwrap()
    }

    fn x1(v: f64) -> Point {
        Point::euclidean([v])
    }

    fn coord(p: &Point, i: usize) -> f64 {
        p.coords().unwrap()[i]
    }

    #[test]
    fn scaled_norm_prox_halves() {
        let e2 = Space::euclidean(2).unwrap();
        let fam = ResolventFamily::ProxScaledSquaredNorm { c: 1.0 };
        assert_eq!(fam.apply(&e2, 1.0, &Point::euclidean([2.0, 0.0])).unwrap(), Point::euclidean([1.0, 0.0]));
    }

    #[test]
    fn distance_prox_moves_by_gamma() {
        let fam = ResolventFamily::ProxDistanceToPoint { anchor: x1(0.0) };
        assert_relative_eq!(coord(&fam.apply(&line(), 1.0, &x1(3.0)).unwrap(), 0), 2.0);
        assert_eq!(fam.apply(&line(), 5.0, &x1(3.0)).unwrap(), x1(0.0));
    }

    #[test]
    fn negation_resolvent() {
        let fam = ResolventFamily::ResolventOfNonexpansive { map: NonexpansiveMap::Negation, tol: 1e-13 };
        assert_relative_eq!(coord(&fam.apply(&line(), 1.0, &x1(1.0)).unwrap(), 0), 1.0 / 3.0, epsilon = 1e-12);
        for g in [0.25, 2.0, 7.5] {
            let z = coord(&fam.apply(&line(), g, &x1(1.0)).unwrap(), 0);
            assert_relative_eq!(z, 1.0 / (1.0 + 2.0 * g), epsilon = 1e-12);
        }
    }

    #[test]
    fn nonexpansive_resolvent_examples() {
        let e2 = Space::euclidean(2).unwrap();
        let x = Point::euclidean([0.3, -1.2]);
        let id = resolvent_nonexp_iterate(&e2, &NonexpansiveMap::Identity, 3.0, &x, 1e-12).unwrap();
        assert_eq!(id, x);

        let a = Point::euclidean([2.0, 1.0]);
        let z = resolvent_nonexp_iterate(&e2, &NonexpansiveMap::Constant { point: a.clone() }, 1.0, &x, 1e-12).unwrap();
        assert!(e2.dist(&z, &e2.combine(&x, &a, 0.5).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn rotation_resolvent_matches_linear_solve() {
        // exact: ((1 + γ)I - γR) z = x
        let e2 = Space::euclidean(2).unwrap();
        let tol = 1e-11;
        for (angle, gamma) in [(std::f64::consts::FRAC_PI_2, 1.0), (1.0, 0.3), (2.5, 9.0)] {
            let x = Point::euclidean([1.0, 0.0]);
            let z = resolvent_nonexp_iterate(&e2, &NonexpansiveMap::Rotation { angle }, gamma, &x, tol).unwrap();
            let (s, c) = f64::sin_cos(angle);
            let m = nalgebra::Matrix2::new(1.0 + gamma - gamma * c, gamma * s, -gamma * s, 1.0 + gamma - gamma * c);
            let exact = m.lu().solve(&nalgebra::Vector2::new(1.0, 0.0)).unwrap();
            let zc = z.coords().unwrap();
            assert!(((zc[0] - exact[0]).powi(2) + (zc[1] - exact[1]).powi(2)).sqrt() <= tol);
        }
    }

    #[test]
    fn monotone_linear_resolvent() {
        let e2 = Space::euclidean(2).unwrap();
        let fam = ResolventFamily::ResolventOfMonotoneLinear { matrix: vec![vec![2.0, 1.0], vec![-1.0, 0.0]] };
        let y = fam.apply(&e2, 0.5, &Point::euclidean([1.0, 2.0])).unwrap();
        // (I + 0.5M) y = x  with I + 0.5M = [[2, 0.5], [-0.5, 1]]
        let yc = y.coords().unwrap();
        assert_relative_eq!(2.0 * yc[0] + 0.5 * yc[1], 1.0, epsilon = 1e-14);
        assert_relative_eq!(-0.5 * yc[0] + yc[1], 2.0, epsilon = 1e-14);

        let bad = ResolventFamily::ResolventOfMonotoneLinear { matrix: vec![vec![-1.0, 0.0], vec![0.0, 1.0]] };
        assert!(matches!(bad.apply(&e2, 1.0, &Point::euclidean([1.0, 0.0])), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn gamma_must_be_positive() {
        let fam = ResolventFamily::ProxScaledSquaredNorm { c: 1.0 };
        for g in [0.0, -1.0, f64::NAN] {
            assert!(matches!(fam.apply(&line(), g, &x1(1.0)), Err(Error::InvalidInput(_))));
        }
        assert!(ResolventFamily::ProxScaledSquaredNorm { c: 1.0 }.apply(&Space::HalfPlane, 1.0, &Point::half_plane(0.0, 1.0)).is_err());
    }

    #[test]
    fn oracle_examples() {
        let e2 = Space::euclidean(2).unwrap();
        let a = Point::euclidean([1.0, 2.0]);
        let x = Point::euclidean([-1.0, 0.5]);
        let fam = ResolventFamily::ProxQuadraticToPoint { anchor: a.clone() };
        let o = prox_oracle_1d(&e2, &fam, 1.0, &x, 1e-9).unwrap();
        assert!(e2.dist(&o, &e2.combine(&x, &a, 0.5).unwrap()).unwrap() < 1e-6);
        assert_eq!(prox_oracle_1d(&e2, &fam, 1.0, &a, 1e-9).unwrap(), a);

        let sp = Space::spider(3).unwrap();
        let fam = ResolventFamily::ProxQuadraticToPoint { anchor: Point::spider(2, 1.0) };
        let o = prox_oracle_1d(&sp, &fam, 1.0, &Point::spider(1, 1.0), 1e-9).unwrap();
        assert!(sp.dist(&o, &Point::hub()).unwrap() < 1e-6);

        let not_prox = ResolventFamily::ResolventOfNonexpansive { map: NonexpansiveMap::Identity, tol: 1e-9 };
        assert!(prox_oracle_1d(&e2, &not_prox, 1.0, &x, 1e-9).is_err());
    }

    #[test]
    fn fixed_sets() {
        let e2 = Space::euclidean(2).unwrap();
        let origin = ConvexSet::singleton(Point::euclidean([0.0, 0.0]));
        assert_eq!(
            ResolventFamily::ProxScaledSquaredNorm { c: 2.0 }.fixed_set(&e2).as_set(),
            Some(&origin)
        );
        let rot = ResolventFamily::ResolventOfNonexpansive {
            map: NonexpansiveMap::Rotation { angle: std::f64::consts::FRAC_PI_3 },
            tol: 1e-12,
        };
        assert_eq!(rot.fixed_set(&e2).as_set(), Some(&origin));
        let id = ResolventFamily::ResolventOfNonexpansive { map: NonexpansiveMap::Identity, tol: 1e-12 };
        assert_eq!(id.fixed_set(&e2), FixedSet::Unknown);

        let seg = ConvexSet::Segment { a: Point::euclidean([0.0, 1.0]), b: Point::euclidean([2.0, 3.0]) };
        let fam = ResolventFamily::ProxQuadraticToSet { set: seg.clone() };
        assert_eq!(fam.fixed_set(&e2).as_set(), Some(&seg));
        for p in seg.sample_points(&e2, 9).unwrap() {
            for g in [0.1, 1.0, 10.0] {
                assert!(e2.dist(&fam.apply(&e2, g, &p).unwrap(), &p).unwrap() <= 1e-12);
            }
        }

        let rank1 = ResolventFamily::ResolventOfMonotoneLinear { matrix: vec![vec![1.0, 1.0], vec![1.0, 1.0]] };
        match rank1.fixed_set(&e2) {
            FixedSet::Set { set: ConvexSet::EuclideanAffineLine { direction, .. } } => {
                assert_relative_eq!(direction[0] + direction[1], 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spider_ray_projection() {
        let sp = Space::spider(3).unwrap();
        let set = ConvexSet::SpiderRaySegment { ray: 1, r_min: 0.0, r_max: 2.0 };
        assert_eq!(set.project(&sp, &Point::spider(2, 3.0)).unwrap(), Point::hub());
        assert_eq!(set.project(&sp, &Point::spider(1, 3.0)).unwrap(), Point::spider(1, 2.0));
        let set = ConvexSet::SpiderRaySegment { ray: 1, r_min: 0.5, r_max: 2.0 };
        assert_eq!(set.project(&sp, &Point::hub()).unwrap(), Point::spider(1, 0.5));
        assert!(ConvexSet::SpiderRaySegment { ray: 1, r_min: 2.0, r_max: 1.0 }.validate(&sp).is_err());
    }
}

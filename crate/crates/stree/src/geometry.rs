//! Bounding balls and the operations that maintain them: expansion toward
//! an outside point, shrinking back onto the farthest contained point,
//! exact minimal balls for up to three points, quasi-minimal balls for
//! larger sets, and border-plane tests between sibling balls.

use crate::error::Error;
use crate::point::{Scalar, SparsePoint, SparseVector};

/// A ball: center plus radius, bounding all points of some set.
///
/// Balls are direction-independent, so a region never degenerates into a
/// coordinate-aligned box no matter how the space is rotated.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    center: SparseVector<f64>,
    radius: f64,
}

impl Ball {
    pub fn new(center: SparseVector<f64>, radius: f64) -> Self {
        assert!(radius.is_finite() && radius >= 0.0, "radius must be finite and non-negative");
        Ball { center, radius }
    }

    /// Zero-radius ball at a data point.
    pub fn around_point(p: &SparsePoint) -> Self {
        Ball { center: p.widened(), radius: 0.0 }
    }

    pub fn center(&self) -> &SparseVector<f64> {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Distance from `q` to the ball surface; zero when `q` is inside or on it.
    pub fn distance_to<W: Scalar>(&self, q: &SparseVector<W>) -> f64 {
        (self.center.dist(q) - self.radius).max(0.0)
    }

    /// Containment check with a radius-relative slack of `eps * (1 + radius)`.
    pub fn contains<W: Scalar>(&self, q: &SparseVector<W>, eps: f64) -> bool {
        self.center.dist(q) <= self.radius + eps * (1.0 + self.radius)
    }

    /// Grows the ball to absorb `q`: the center moves half the surface gap
    /// toward `q` and the radius grows by the other half, so everything the
    /// old ball held stays held. Inside points leave the ball unchanged.
    #[must_use]
    pub fn expanded_to<W: Scalar>(&self, q: &SparseVector<W>) -> Ball {
        let dist = self.center.dist(q);
        let gap = dist - self.radius;
        if gap <= 0.0 {
            return self.clone();
        }
        let t = (gap / 2.0) / dist;
        Ball {
            center: self.center.affine(1.0 - t, q, t),
            radius: self.radius + gap / 2.0,
        }
    }

    /// Smallest ball containing both `self` and `other`.
    ///
    /// With a zero-radius `other` this reduces exactly to
    /// [`expanded_to`](Self::expanded_to).
    #[must_use]
    pub fn expanded_to_cover(&self, other: &Ball) -> Ball {
        let d = self.center.dist(&other.center);
        if d + other.radius <= self.radius {
            return self.clone();
        }
        if d + self.radius <= other.radius {
            return other.clone();
        }
        let radius = (d + self.radius + other.radius) / 2.0;
        let t = (radius - self.radius) / d;
        Ball {
            center: self.center.affine(1.0 - t, &other.center, t),
            radius,
        }
    }

    /// Shrinks a ball that passes through `q` by sliding the center along
    /// the ray toward `q` until the surface touches the most constraining
    /// point of `pts`. For each candidate point `a`, the center must stay at
    /// least `|aq|^2 / (2 t)` from `q`, where `t` is the projection of the
    /// vector q->a onto the line through `q` and the old center; the largest
    /// such bound wins so the result still contains every point.
    ///
    /// The caller guarantees `q` lies on the surface and all `pts` lie
    /// inside. An empty `pts` collapses to a zero ball at `q`.
    #[must_use]
    pub fn shrunk_toward(&self, q: &SparsePoint, pts: &[SparsePoint]) -> Ball {
        let axis = self.center.merge_f64(q, |c, qv| c - qv); // q -> old center
        let len = axis.norm2().sqrt();
        if len == 0.0 {
            return Ball { center: q.widened(), radius: 0.0 };
        }
        let mut required = 0.0f64;
        for a in pts {
            let aq2 = a.dist2(q);
            if aq2 == 0.0 {
                continue;
            }
            // Projection of q->a onto the unit axis; vanishing or negative
            // projections put the point behind q, which containment of the
            // original ball rules out except by rounding, so skip them.
            let t = (a.dot(&axis) - q.dot(&axis)) / len;
            if t <= 0.0 {
                continue;
            }
            required = required.max(aq2 / (2.0 * t));
        }
        let radius = required.min(self.radius);
        let t = radius / len;
        Ball {
            center: axis.affine(t, q, 1.0),
            radius,
        }
    }
}

/// Radius of the circle circumscribed around a triangle with the given side
/// lengths: `l1*l2*l3 / sqrt((l1+l2+l3)(l2+l3-l1)(l1-l2+l3)(l1+l2-l3))`.
pub fn circumradius(l1: f64, l2: f64, l3: f64) -> Result<f64, Error> {
    let f0 = l1 + l2 + l3;
    let f1 = l2 + l3 - l1;
    let f2 = l1 - l2 + l3;
    let f3 = l1 + l2 - l3;
    if f0 <= 0.0 || f1 <= 0.0 || f2 <= 0.0 || f3 <= 0.0 {
        return Err(Error::DegenerateTriangle);
    }
    Ok(l1 * l2 * l3 / (f0 * f1 * f2 * f3).sqrt())
}

/// Exact minimal enclosing ball of one, two, or three points.
///
/// Three points either sit on their circumscribed circle, or — when the
/// third point sees the farthest pair under an obtuse (or right) angle,
/// i.e. `|ax|^2 + |xb|^2 <= |ab|^2` — inside the ball built on that pair as
/// a diameter.
pub fn min_ball_exact_small(pts: &[SparsePoint]) -> Result<Ball, Error> {
    match pts.len() {
        0 => Err(Error::EmptyPointSet),
        1 => Ok(Ball::around_point(&pts[0])),
        2 => Ok(diameter_ball(&pts[0], &pts[1])),
        3 => {
            let (i, j) = farthest_point_pair(pts);
            let x = 3 - i - j;
            let (a, b, x) = (&pts[i], &pts[j], &pts[x]);
            let ab2 = a.dist2(b);
            if ab2 == 0.0 {
                return Ok(Ball::around_point(a));
            }
            if a.dist2(x) + x.dist2(b) <= ab2 {
                return Ok(diameter_ball(a, b));
            }
            Ok(circumscribed_ball(a, b, x))
        }
        n => Err(Error::TooManyPoints { n, max: 3 }),
    }
}

/// Quasi-minimal enclosing ball: seeded on the farthest pair as a diameter,
/// grown point by point, then shrunk once onto the last absorbed point.
/// The result depends on input order, which is the accepted trade for not
/// computing exact minimal balls in high dimension.
pub fn quasi_min_ball(pts: &[SparsePoint]) -> Ball {
    assert!(!pts.is_empty(), "quasi_min_ball requires at least one point");
    if pts.len() == 1 {
        return Ball::around_point(&pts[0]);
    }
    let (i, j) = farthest_point_pair(pts);
    let mut ball = diameter_ball(&pts[i], &pts[j]);
    let mut anchor: Option<&SparsePoint> = None;
    for p in pts {
        if ball.distance_to(p) > 0.0 {
            ball = ball.expanded_to(p);
            anchor = Some(p);
        }
    }
    if let Some(q) = anchor {
        ball = ball.shrunk_toward(q, pts);
    }
    ball
}

/// Smallest-effort ball covering a set of balls: farthest pair by combined
/// reach seeds the cover, every protruding ball is then absorbed in order.
pub fn enclosing_ball(balls: &[Ball]) -> Ball {
    assert!(!balls.is_empty(), "enclosing_ball requires at least one ball");
    if balls.len() == 1 {
        return balls[0].clone();
    }
    let (i, j) = farthest_ball_pair(balls);
    let mut cover = balls[i].expanded_to_cover(&balls[j]);
    for b in balls {
        if cover.center.dist(&b.center) + b.radius > cover.radius {
            cover = cover.expanded_to_cover(b);
        }
    }
    cover
}

/// Index pair of the two most distant points, ties to the lowest indices.
pub fn farthest_point_pair(pts: &[SparsePoint]) -> (usize, usize) {
    debug_assert!(pts.len() >= 2);
    let (mut bi, mut bj, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = pts[i].dist2(&pts[j]);
            if d > best {
                (bi, bj, best) = (i, j, d);
            }
        }
    }
    (bi, bj)
}

/// Index pair of the two balls with the greatest combined reach
/// (center distance plus both radii), ties to the lowest indices.
pub fn farthest_ball_pair(balls: &[Ball]) -> (usize, usize) {
    debug_assert!(balls.len() >= 2);
    let (mut bi, mut bj, mut best) = (0, 1, f64::NEG_INFINITY);
    for i in 0..balls.len() {
        for j in i + 1..balls.len() {
            let d = balls[i].center.dist(&balls[j].center) + balls[i].radius + balls[j].radius;
            if d > best {
                (bi, bj, best) = (i, j, d);
            }
        }
    }
    (bi, bj)
}

fn diameter_ball(a: &SparsePoint, b: &SparsePoint) -> Ball {
    let center = a.widened().affine(0.5, b, 0.5);
    Ball::new(center, a.dist(b) / 2.0)
}

/// Circumscribed ball of a strictly acute triangle, via barycentric weights
/// derived from the squared side lengths. The center lies in the triangle's
/// plane regardless of the ambient dimension.
fn circumscribed_ball(a: &SparsePoint, b: &SparsePoint, c: &SparsePoint) -> Ball {
    let a2 = b.dist2(c); // side opposite a
    let b2 = c.dist2(a);
    let c2 = a.dist2(b);
    let wa = a2 * (b2 + c2 - a2);
    let wb = b2 * (c2 + a2 - b2);
    let wc = c2 * (a2 + b2 - c2);
    let w = wa + wb + wc;
    let center = a
        .widened()
        .affine(wa / w, b, wb / w)
        .affine(1.0, c, wc / w);
    let radius = circumradius(a2.sqrt(), b2.sqrt(), c2.sqrt())
        .expect("acute triangle has a circumscribed circle");
    Ball::new(center, radius)
}

/// The border plane between two sibling balls: all points whose squared
/// distances to the two centers differ by exactly `r1^2 - r2^2`. Evaluating
/// the plane gives a signed value — negative means the first ball's region,
/// positive the second's.
pub struct BorderPlane<'a> {
    c1: &'a SparseVector<f64>,
    c2: &'a SparseVector<f64>,
    offset: f64,
    center_gap: f64,
}

/// Which side of a border plane a ball falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlaneSide {
    First,
    Second,
    Straddling,
}

impl<'a> BorderPlane<'a> {
    pub fn new(b1: &'a Ball, b2: &'a Ball) -> Result<Self, Error> {
        let gap2 = b1.center.dist2(&b2.center);
        if gap2 == 0.0 {
            return Err(Error::DegeneratePlane);
        }
        Ok(BorderPlane {
            c1: &b1.center,
            c2: &b2.center,
            offset: b1.radius * b1.radius - b2.radius * b2.radius,
            center_gap: gap2.sqrt(),
        })
    }

    /// Signed plane value at `x`.
    pub fn value<W: Scalar>(&self, x: &SparseVector<W>) -> f64 {
        x.dist2(self.c1) - x.dist2(self.c2) - self.offset
    }

    /// Classifies a whole ball: the plane value is affine with gradient
    /// magnitude `2 * |c1 - c2|`, so the ball fits on a side exactly when
    /// its center clears the plane by `2 * |c1 - c2| * r`.
    pub fn classify_ball(&self, b: &Ball) -> PlaneSide {
        let v = self.value(&b.center);
        let margin = 2.0 * self.center_gap * b.radius;
        if v + margin <= 0.0 {
            PlaneSide::First
        } else if v - margin >= 0.0 {
            PlaneSide::Second
        } else {
            PlaneSide::Straddling
        }
    }
}

/// Signed side of the border plane between `b1` and `b2` at `x`:
/// negative for `b1`'s region, positive for `b2`'s, zero on the plane.
pub fn plane_side<W: Scalar>(x: &SparseVector<W>, b1: &Ball, b2: &Ball) -> Result<f64, Error> {
    Ok(BorderPlane::new(b1, b2)?.value(x))
}

/// Separation quality of two balls: `L^2 - (R^2 - r^2)` with `L` the center
/// distance and `R >= r` the radii. Larger is better; acceptably separated
/// regions keep it above zero.
pub fn overlap_margin(b1: &Ball, b2: &Ball) -> f64 {
    let l2 = b1.center.dist2(&b2.center);
    let big = b1.radius.max(b2.radius);
    let small = b1.radius.min(b2.radius);
    l2 - (big * big - small * small)
}

//! Closed-form `dist²`, lower transform and medial axis map for the shapes
//! whose transforms are known exactly.
//!
//! Each evaluator is branch-coded. Queries outside every listed branch return
//! [`Error::BranchGap`] instead of extrapolating.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{BinaryMask2, GridSpec, Point2, PointSet2};
use crate::mam::{convex_hull_2d, dist2_to_hull, landscape_map};

/// Analytic test shape. For region shapes the set `K` is the boundary (strip,
/// rectangle, oval) or the complement region (interval, ball, staircase).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleShape {
    /// `K = {(-α, 0), (α, 0)}`.
    TwoPoint { alpha: f64 },
    /// `K = (-1, 1)^c` on the x-axis, extended constantly in y.
    IntervalComplement,
    /// `K = {|x| >= ρ}`.
    BallComplement { rho: f64 },
    /// `K = {(±b, ±εb)}`.
    FourPoint { b: f64, eps: f64 },
    /// `K = ∂Ω_s` with `Ω_s = (-r, ∞) x (-r, r)`.
    Strip { r: f64 },
    /// `K = ∂Ω` with `Ω = (-3r/2, 3r/2) x (-r, r)`.
    Rectangle { r: f64 },
    /// `K = ∂Ω` for the stadium made of the discs of radius `r` around
    /// `(±r/2, 0)` and the rectangle `[-r/2, r/2] x [-r, r]`.
    Oval { r: f64 },
    /// `K` is the complement of the one-step set (or of the periodic staircase)
    /// with step size `c`.
    Staircase { c: f64, periodic: bool },
    /// Finite `K` on the circle `|p| = r0`.
    CircleSubset { r0: f64, points: Vec<Point2> },
}

/// Oracle values at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub dist2: f64,
    pub lower: f64,
    pub mam: f64,
}

impl OracleShape {
    pub fn name(&self) -> &'static str {
        match self {
            OracleShape::TwoPoint { .. } => "two-point",
            OracleShape::IntervalComplement => "interval-complement",
            OracleShape::BallComplement { .. } => "ball-complement",
            OracleShape::FourPoint { .. } => "four-point",
            OracleShape::Strip { .. } => "strip",
            OracleShape::Rectangle { .. } => "rectangle",
            OracleShape::Oval { .. } => "oval",
            OracleShape::Staircase { .. } => "staircase",
            OracleShape::CircleSubset { .. } => "circle-subset",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be > 0, got {v}")))
            }
        };
        match self {
            OracleShape::TwoPoint { alpha } => pos("alpha", *alpha),
            OracleShape::IntervalComplement => Ok(()),
            OracleShape::BallComplement { rho } => pos("rho", *rho),
            OracleShape::FourPoint { b, eps } => {
                pos("b", *b)?;
                if !(*eps > 0.0 && *eps < 1.0) {
                    return Err(Error::InvalidParameter(format!("eps must be in (0, 1), got {eps}")));
                }
                Ok(())
            }
            OracleShape::Strip { r } | OracleShape::Rectangle { r } | OracleShape::Oval { r } => pos("r", *r),
            OracleShape::Staircase { c, .. } => pos("c", *c),
            OracleShape::CircleSubset { r0, points } => {
                pos("r0", *r0)?;
                if points.is_empty() {
                    return Err(Error::EmptySet);
                }
                for p in points {
                    if (p.norm() - r0).abs() > 1e-12 * r0.max(1.0) {
                        return Err(Error::InvalidParameter(format!(
                            "point ({}, {}) is not on the circle of radius {r0}",
                            p.x, p.y
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// The four points `(±b, ±εb)`.
    pub fn four_points(b: f64, eps: f64) -> Vec<Point2> {
        let c = eps * b;
        vec![Point2::new(b, c), Point2::new(b, -c), Point2::new(-b, c), Point2::new(-b, -c)]
    }

    /// `K` itself when it is finite.
    pub fn finite_set(&self) -> Option<PointSet2> {
        match self {
            OracleShape::TwoPoint { alpha } => {
                Some(PointSet2::new([Point2::new(-alpha, 0.0), Point2::new(*alpha, 0.0)]))
            }
            OracleShape::FourPoint { b, eps } => Some(PointSet2::new(OracleShape::four_points(*b, *eps))),
            OracleShape::CircleSubset { points, .. } => Some(PointSet2::new(points.clone())),
            _ => None,
        }
    }
}

/// A discretized `K` for the numeric pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum SetInput {
    Points(PointSet2),
    Mask(BinaryMask2),
}

/// Discretization of the shape's `K` suited to `spec`.
///
/// Finite sets are returned as they are. Boundaries are sampled as point sets
/// with spacing at most `h` (restricted to the grid box for the unbounded
/// strip). Complement regions become masks of the grid cells they contain.
pub fn oracle_set(shape: &OracleShape, spec: GridSpec) -> Result<SetInput> {
    shape.validate()?;
    spec.validate()?;
    let h = spec.spacing;
    if let Some(k) = shape.finite_set() {
        return Ok(SetInput::Points(k));
    }
    let eps = 1e-9 * h;
    let set = match shape {
        OracleShape::IntervalComplement => {
            SetInput::Mask(BinaryMask2::from_fn(spec, |p| p.x.abs() >= 1.0 - eps)?)
        }
        OracleShape::BallComplement { rho } => {
            SetInput::Mask(BinaryMask2::from_fn(spec, |p| p.norm() >= rho - eps)?)
        }
        OracleShape::Staircase { c, periodic } => {
            let (c, periodic) = (*c, *periodic);
            SetInput::Mask(BinaryMask2::from_fn(spec, |p| {
                let q = if periodic { staircase_shift(p, c).0 } else { p };
                q.x + q.y <= c + eps && (q.x <= eps || q.y <= eps)
            })?)
        }
        _ => SetInput::Points(boundary_sample(shape, h, Some(&spec))?),
    };
    Ok(set)
}

/// Points on the boundary of a region shape, consecutive samples at most `step`
/// apart. The strip is unbounded and needs `clip` to bound it.
pub fn boundary_sample(shape: &OracleShape, step: f64, clip: Option<&GridSpec>) -> Result<PointSet2> {
    shape.validate()?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("step must be > 0, got {step}")));
    }
    let mut pts = Vec::new();
    match shape {
        OracleShape::Strip { r } => {
            let spec = clip.ok_or_else(|| Error::Unsupported("strip boundary needs a clipping grid".into()))?;
            let x1 = spec.x_max().max(-r) + step;
            push_polyline(&mut pts, &[Point2::new(x1, -r), Point2::new(-r, -*r), Point2::new(-r, *r), Point2::new(x1, *r)], step);
        }
        OracleShape::Rectangle { r } => {
            let a = 1.5 * r;
            let corners = [
                Point2::new(-a, -r),
                Point2::new(a, -r),
                Point2::new(a, *r),
                Point2::new(-a, *r),
                Point2::new(-a, -r),
            ];
            push_polyline(&mut pts, &corners, step);
        }
        OracleShape::Oval { r } => {
            let half = 0.5 * r;
            push_polyline(&mut pts, &[Point2::new(-half, -r), Point2::new(half, -r)], step);
            push_polyline(&mut pts, &[Point2::new(-half, *r), Point2::new(half, *r)], step);
            let n = ((std::f64::consts::PI * r) / step).ceil().max(1.0) as usize;
            for k in 0..=n {
                let t = -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * k as f64 / n as f64;
                pts.push(Point2::new(half + r * t.cos(), r * t.sin()));
                pts.push(Point2::new(-half - r * t.cos(), r * t.sin()));
            }
        }
        OracleShape::BallComplement { rho } => {
            let n = ((2.0 * std::f64::consts::PI * rho) / step).ceil().max(3.0) as usize;
            for k in 0..n {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                pts.push(Point2::new(rho * t.cos(), rho * t.sin()));
            }
        }
        other => {
            return other
                .finite_set()
                .ok_or_else(|| Error::Unsupported(format!("no boundary parameterization for {}", other.name())))
        }
    }
    Ok(PointSet2::new(pts))
}

fn push_polyline(out: &mut Vec<Point2>, vertices: &[Point2], step: f64) {
    for w in vertices.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = (a.dist(b) / step).ceil().max(1.0) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            out.push(a * (1.0 - t) + b * t);
        }
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    crate::lowtrans::check_lambda(lambda)
}

/// `dist²(x; K)` alone. Defined on the whole plane for every shape.
pub fn oracle_dist2(shape: &OracleShape, x: Point2) -> Result<f64> {
    shape.validate()?;
    Ok(match shape {
        OracleShape::TwoPoint { alpha } => (x.x.abs() - alpha).powi(2) + x.y * x.y,
        OracleShape::IntervalComplement => interval_dist2(x.x),
        OracleShape::BallComplement { rho } => {
            let n = x.norm();
            if n >= *rho {
                0.0
            } else {
                (rho - n).powi(2)
            }
        }
        OracleShape::FourPoint { b, eps } => (x.x.abs() - b).powi(2) + (x.y.abs() - eps * b).powi(2),
        OracleShape::Strip { r } => strip_dist2(*r, x.x, x.y),
        OracleShape::Rectangle { r } => {
            let (sx, sy) = rectangle_to_strip(*r, x);
            strip_dist2(*r, sx, sy)
        }
        OracleShape::Oval { r } => oval_dist2(*r, x),
        OracleShape::Staircase { c, periodic } => {
            let q = if *periodic { staircase_shift(x, *c).0 } else { x };
            step_dist2(*c, q.x, q.y)
        }
        OracleShape::CircleSubset { points, .. } => {
            points.iter().map(|p| p.dist2(x)).fold(f64::INFINITY, f64::min)
        }
    })
}

/// `dist²`, `C^l_λ(dist²)` and `M_λ` at `x`.
pub fn oracle_eval(shape: &OracleShape, lambda: f64, x: Point2) -> Result<OracleValue> {
    shape.validate()?;
    check_lambda(lambda)?;
    let dist2 = oracle_dist2(shape, x)?;
    let l1 = 1.0 + lambda;
    let lower = match shape {
        OracleShape::TwoPoint { alpha } => {
            if x.x.abs() <= alpha / l1 {
                lambda / l1 * alpha * alpha - lambda * x.x * x.x + x.y * x.y
            } else {
                dist2
            }
        }
        OracleShape::IntervalComplement => {
            let a = x.x.abs();
            if a <= 1.0 / l1 {
                lambda / l1 - lambda * x.x * x.x
            } else if a <= 1.0 {
                dist2
            } else {
                0.0
            }
        }
        OracleShape::BallComplement { rho } => {
            if x.norm() <= rho / l1 {
                lambda / l1 * rho * rho - lambda * x.norm2()
            } else {
                dist2
            }
        }
        OracleShape::FourPoint { b, eps } => {
            let c = eps * b;
            l1 * four_point_g(*b, c, lambda, x) + lambda / l1 * (b * b + c * c) - lambda * x.norm2()
        }
        OracleShape::Strip { r } => strip_lower(*r, lambda, x.x, x.y),
        OracleShape::Rectangle { r } => {
            let (sx, sy) = rectangle_to_strip(*r, x);
            strip_lower(*r, lambda, sx, sy)
        }
        OracleShape::Oval { r } => oval_lower(*r, lambda, x)?,
        OracleShape::Staircase { c, periodic } => {
            let q = if *periodic { staircase_shift(x, *c).0 } else { x };
            step_lower(*c, lambda, q.x, q.y)
        }
        OracleShape::CircleSubset { r0, points } => {
            let scaled: Vec<Point2> = points.iter().map(|&p| p * (1.0 / l1)).collect();
            let hull = convex_hull_2d(&PointSet2::new(scaled))?;
            lambda * r0 * r0 / l1 + l1 * dist2_to_hull(x, &hull) - lambda * x.norm2()
        }
    };
    Ok(OracleValue { dist2, lower, mam: l1 * (dist2 - lower) })
}

/// `M_λ` written out directly in closed form (two-point and
/// four-point), for cross-checking [`oracle_eval`].
pub fn oracle_mam_direct(shape: &OracleShape, lambda: f64, x: Point2) -> Result<f64> {
    shape.validate()?;
    check_lambda(lambda)?;
    let l1 = 1.0 + lambda;
    match shape {
        OracleShape::TwoPoint { alpha } => {
            let a = x.x.abs();
            Ok(if a <= alpha / l1 { l1 * l1 * (a - alpha / l1).powi(2) } else { 0.0 })
        }
        OracleShape::FourPoint { b, eps } => {
            let pts = OracleShape::four_points(*b, *eps);
            let scaled = PointSet2::new(pts.iter().map(|&p| p * (1.0 / l1)));
            let hull = convex_hull_2d(&scaled)?;
            Ok(l1 * l1 * (scaled.dist2_to(x) - dist2_to_hull(x, &hull)))
        }
        other => Err(Error::Unsupported(format!("no direct M formula for {}", other.name()))),
    }
}

fn interval_dist2(x: f64) -> f64 {
    let a = x.abs();
    if a >= 1.0 {
        0.0
    } else {
        (1.0 - a).powi(2)
    }
}

/// Auxiliary function of the four-point lower transform.
fn four_point_g(b: f64, c: f64, lambda: f64, x: Point2) -> f64 {
    let (bx, cy) = (b / (1.0 + lambda), c / (1.0 + lambda));
    let (ax, ay) = (x.x.abs(), x.y.abs());
    match (ax <= bx, ay <= cy) {
        (true, true) => 0.0,
        (false, true) => (ax - bx).powi(2),
        (true, false) => (ay - cy).powi(2),
        (false, false) => (ax - bx).powi(2) + (ay - cy).powi(2),
    }
}

/// Corner function shared by the strip and the staircase: the lower transform
/// of the squared distance to the two sides of a right-angle corner at the
/// origin, evaluated in the corner's first quadrant.
fn corner_g(lambda: f64, x: f64, y: f64) -> f64 {
    let mu = lambda / (1.0 + lambda);
    match (x >= 0.0, y >= 0.0) {
        (true, true) => {
            if x <= y * mu {
                x * x
            } else if y <= x * mu {
                y * y
            } else {
                let s = (x + y) * (1.0 + lambda) / (2.0 * lambda + 1.0);
                mu * s * s - lambda * ((x - s).powi(2) + (y - s).powi(2))
            }
        }
        (false, true) => x * x,
        (true, false) => y * y,
        (false, false) => x * x + y * y,
    }
}

fn strip_dist2(r: f64, x: f64, y: f64) -> f64 {
    let ay = y.abs();
    if x >= 0.0 {
        (ay - r).powi(2)
    } else if x >= -r {
        if ay >= x.abs() {
            (ay - r).powi(2)
        } else {
            (x.abs() - r).powi(2)
        }
    } else if ay <= r {
        (x.abs() - r).powi(2)
    } else {
        (x.abs() - r).powi(2) + (ay - r).powi(2)
    }
}

fn strip_lower(r: f64, lambda: f64, x: f64, y: f64) -> f64 {
    let s = r / (1.0 + lambda);
    let ay = y.abs();
    let inside = x >= -r && ay <= r;
    if !inside {
        return if x >= -r {
            (ay - r).powi(2)
        } else if ay <= r {
            (x.abs() - r).powi(2)
        } else {
            (x.abs() - r).powi(2) + (ay - r).powi(2)
        };
    }
    if x <= 0.0 {
        // The two corner regions overlap near the left wall; the nearer
        // horizontal side decides which corner applies.
        if y <= 0.0 && x + y <= -s {
            corner_g(lambda, x + r, y + r)
        } else if y >= 0.0 && x - y <= -s {
            corner_g(lambda, x + r, r - y)
        } else {
            r * r * lambda / (1.0 + lambda) - lambda * (x * x + y * y)
        }
    } else if ay <= s {
        r * r * lambda / (1.0 + lambda) - lambda * y * y
    } else {
        (ay - r).powi(2)
    }
}

/// Maps a point of the rectangle picture onto the strip picture.
fn rectangle_to_strip(r: f64, p: Point2) -> (f64, f64) {
    if p.x <= 0.0 {
        (p.x + 0.5 * r, p.y)
    } else {
        (-p.x + 0.5 * r, p.y)
    }
}

fn oval_dist2(r: f64, p: Point2) -> f64 {
    let half = 0.5 * r;
    if p.x.abs() <= half {
        (p.y.abs() - r).powi(2)
    } else if p.x + half <= 0.0 {
        (Point2::new(p.x + half, p.y).norm() - r).powi(2)
    } else {
        (Point2::new(p.x - half, p.y).norm() - r).powi(2)
    }
}

fn oval_lower(r: f64, lambda: f64, p: Point2) -> Result<f64> {
    let half = 0.5 * r;
    let s = r / (1.0 + lambda);
    let cap = lambda * r * r / (1.0 + lambda);
    if p.x.abs() <= half {
        if p.y.abs() > r {
            return Err(Error::BranchGap { shape: "oval", x: p.x, y: p.y });
        }
        return Ok(if p.y.abs() <= s { cap - lambda * p.y * p.y } else { (p.y.abs() - r).powi(2) });
    }
    let centre = if p.x < 0.0 { Point2::new(-half, 0.0) } else { Point2::new(half, 0.0) };
    let rho = p.dist(centre);
    if rho > r {
        return Err(Error::BranchGap { shape: "oval", x: p.x, y: p.y });
    }
    Ok(if rho <= s { cap - lambda * rho * rho } else { (rho - r).powi(2) })
}

/// Index `i` with `|x - y - 2ic| <= c` and the shifted point `(x - ic, y + ic)`.
fn staircase_shift(p: Point2, c: f64) -> (Point2, i64) {
    let i = ((p.x - p.y) / (2.0 * c)).round();
    (Point2::new(p.x - i * c, p.y + i * c), i as i64)
}

fn step_dist2(c: f64, x: f64, y: f64) -> f64 {
    let in_square = (0.0..=c).contains(&x) && (0.0..=c).contains(&y);
    if in_square {
        x.min(y).powi(2)
    } else if y >= c && (0.0..=c).contains(&(y - x)) {
        x * x + (y - c).powi(2)
    } else if x >= c && (0.0..=c).contains(&(x - y)) {
        (x - c).powi(2) + y * y
    } else if x + y >= c && ((y - x) >= c || (x - y) >= c) {
        0.5 * (x + y - c).powi(2)
    } else {
        0.0
    }
}

fn step_lower(c: f64, lambda: f64, x: f64, y: f64) -> f64 {
    let l1 = 1.0 + lambda;
    let mu = lambda / l1;
    let in_square = (0.0..=c).contains(&x) && (0.0..=c).contains(&y);
    let d = y - x;
    if x + y >= c && (d >= c || -d >= c) {
        0.5 * (x + y - c).powi(2)
    } else if y >= c && (c / l1..=c).contains(&d) {
        x * x + (y - c).powi(2)
    } else if x >= c && (c / l1..=c).contains(&(-d)) {
        (x - c).powi(2) + y * y
    } else if x + y >= (1.0 + 2.0 * lambda) * c / l1 && d.abs() <= c / l1 {
        0.5 * (lambda * c * c / l1 - lambda * d * d + (x + y - c).powi(2))
    } else if in_square {
        if x <= y * mu {
            x * x
        } else if y <= x * mu {
            y * y
        } else {
            let s = l1 * (x + y) / (1.0 + 2.0 * lambda);
            lambda * l1 * ((x + y) / (1.0 + 2.0 * lambda)).powi(2)
                - lambda * (x - s).powi(2)
                - lambda * (y - s).powi(2)
        }
    } else {
        // remaining region lies in the complement of K, where dist² = 0
        0.0
    }
}

/// Primitive of an analytic medial axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AxisPart {
    Line { point: Point2, dir: Point2 },
    Ray { start: Point2, dir: Point2 },
    Segment { a: Point2, b: Point2 },
    Point(Point2),
    /// Rays from `(ic, -ic)` along `(1, 1)` for every integer `i`.
    StairRays { c: f64 },
}

impl AxisPart {
    pub fn dist(&self, x: Point2) -> f64 {
        match *self {
            AxisPart::Line { point, dir } => {
                let u = dir * (1.0 / dir.norm());
                (x - point).cross(u).abs()
            }
            AxisPart::Ray { start, dir } => {
                let t = (x - start).dot(dir) / dir.norm2();
                x.dist(start + dir * t.max(0.0))
            }
            AxisPart::Segment { a, b } => segment_dist2(x, a, b).sqrt(),
            AxisPart::Point(p) => x.dist(p),
            AxisPart::StairRays { c } => {
                let i0 = ((x.x - x.y) / (2.0 * c)).round() as i64;
                (i0 - 3..=i0 + 3)
                    .map(|i| {
                        let start = Point2::new(i as f64 * c, -(i as f64) * c);
                        AxisPart::Ray { start, dir: Point2::new(1.0, 1.0) }.dist(x)
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub(crate) fn segment_dist2(x: Point2, a: Point2, b: Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm2();
    if len2 == 0.0 {
        return x.dist2(a);
    }
    let t = ((x - a).dot(ab) / len2).clamp(0.0, 1.0);
    x.dist2(a + ab * t)
}

/// Exact medial axis `M_K` as a union of primitives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MedialAxis {
    pub parts: Vec<AxisPart>,
}

impl MedialAxis {
    pub fn dist(&self, x: Point2) -> f64 {
        self.parts.iter().map(|p| p.dist(x)).fold(f64::INFINITY, f64::min)
    }
}

/// The medial axis of the shape's `K`.
pub fn oracle_mk(shape: &OracleShape) -> Result<MedialAxis> {
    shape.validate()?;
    let o = Point2::ORIGIN;
    let ex = Point2::new(1.0, 0.0);
    let ey = Point2::new(0.0, 1.0);
    let parts = match shape {
        OracleShape::TwoPoint { .. } | OracleShape::IntervalComplement => vec![AxisPart::Line { point: o, dir: ey }],
        OracleShape::BallComplement { .. } => vec![AxisPart::Point(o)],
        OracleShape::FourPoint { .. } => {
            vec![AxisPart::Line { point: o, dir: ex }, AxisPart::Line { point: o, dir: ey }]
        }
        OracleShape::Strip { r } => vec![
            AxisPart::Ray { start: o, dir: ex },
            AxisPart::Segment { a: Point2::new(-r, -r), b: o },
            AxisPart::Segment { a: Point2::new(-r, *r), b: o },
        ],
        OracleShape::Rectangle { r } => {
            let (a, m) = (1.5 * r, 0.5 * r);
            vec![
                AxisPart::Segment { a: Point2::new(-m, 0.0), b: Point2::new(m, 0.0) },
                AxisPart::Segment { a: Point2::new(-a, -r), b: Point2::new(-m, 0.0) },
                AxisPart::Segment { a: Point2::new(-a, *r), b: Point2::new(-m, 0.0) },
                AxisPart::Segment { a: Point2::new(a, -r), b: Point2::new(m, 0.0) },
                AxisPart::Segment { a: Point2::new(a, *r), b: Point2::new(m, 0.0) },
            ]
        }
        OracleShape::Oval { r } => {
            vec![AxisPart::Segment { a: Point2::new(-0.5 * r, 0.0), b: Point2::new(0.5 * r, 0.0) }]
        }
        OracleShape::Staircase { c, periodic } => {
            if *periodic {
                vec![AxisPart::StairRays { c: *c }]
            } else {
                vec![AxisPart::Ray { start: o, dir: Point2::new(1.0, 1.0) }]
            }
        }
        OracleShape::CircleSubset { .. } => {
            return Err(Error::Unsupported("no recorded medial axis for a general circle subset".into()))
        }
    };
    Ok(MedialAxis { parts })
}

/// Exact landscape map `M_∞(x; K)`.
pub fn oracle_minf(shape: &OracleShape, x: Point2) -> Result<f64> {
    shape.validate()?;
    if let Some(k) = shape.finite_set() {
        return landscape_map(&k, x, 1e-12);
    }
    let on = |a: f64, b: f64, scale: f64| (a - b).abs() <= 1e-12 * scale.max(1.0);
    match shape {
        OracleShape::IntervalComplement => Ok(if on(x.x, 0.0, 1.0) { 1.0 } else { 0.0 }),
        OracleShape::BallComplement { rho } => Ok(if x.norm() <= 1e-12 * rho.max(1.0) { rho * rho } else { 0.0 }),
        OracleShape::Staircase { c, periodic } => {
            let q = if *periodic { staircase_shift(x, *c).0 } else { x };
            if !on(q.x, q.y, *c) || q.x < 0.0 {
                return Ok(0.0);
            }
            Ok(if q.x <= *c { 0.5 * q.x * q.x } else { 0.5 * c * c })
        }
        other => Err(Error::Unsupported(format!("no landscape oracle for {}", other.name()))),
    }
}

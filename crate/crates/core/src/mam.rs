//! Multiscale medial axis map `M_λ = (1+λ)(dist² - C^l_λ(dist²))` and the
//! quantities built around it: the linear map, the landscape map `M_∞`,
//! separation angles, suplevel sets and support checks.

use serde::{Deserialize, Serialize};

use crate::edt::{edt_mask, edt_points};
use crate::error::{Error, Result};
use crate::fields::{boundary_cells, BinaryMask2, GridSpec, Point2, PointSet2, ScalarField2};
use crate::lowtrans::{
    border_margin, check_lambda, lower_transform_opening, lower_transform_opening_trusted, BackendKind,
    LowerTransformBackend,
};
use crate::oracles::{oracle_mk, oracle_set, segment_dist2, OracleShape, SetInput};

/// Round-off allowance below zero before a negative value is an error.
pub const NEG_TOL: f64 = 1e-9;

/// Knobs of one `M_λ` computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MamParams {
    pub lambda: f64,
    pub backend: LowerTransformBackend,
    /// Relative slack for membership in the nearest set `K(x)`.
    pub nearest_tol: f64,
}

impl MamParams {
    pub fn new(lambda: f64) -> Self {
        MamParams { lambda, backend: LowerTransformBackend::opening(), nearest_tol: 1e-9 }
    }

    pub fn with_backend(mut self, backend: LowerTransformBackend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_nearest_tol(mut self, tol: f64) -> Self {
        self.nearest_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda)?;
        self.backend.validate()?;
        if !(0.0..=1e-3).contains(&self.nearest_tol) {
            return Err(Error::InvalidParameter(format!(
                "nearest_tol must be in [0, 1e-3], got {}",
                self.nearest_tol
            )));
        }
        Ok(())
    }
}

/// Output of [`mam_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct MamResult {
    pub m_field: ScalarField2,
    pub dist2: ScalarField2,
    pub lower: ScalarField2,
    /// Cells within this Chebyshev distance of the grid edge may be untrusted.
    pub border_margin: usize,
    /// Cells whose values do not depend on where the grid was cut off.
    pub trusted: BinaryMask2,
}


/// `dist²(·; K)` on `spec` for a discretized set.
pub fn set_dist2(k: &SetInput, spec: GridSpec) -> Result<ScalarField2> {
    match k {
        SetInput::Points(p) => edt_points(p, spec),
        SetInput::Mask(m) if *m.spec() == spec => edt_mask(m),
        SetInput::Mask(m) => edt_points(&crate::fields::mask_to_points(m)?, spec),
    }
}

impl From<PointSet2> for SetInput {
    fn from(p: PointSet2) -> Self {
        SetInput::Points(p)
    }
}

impl From<BinaryMask2> for SetInput {
    fn from(m: BinaryMask2) -> Self {
        SetInput::Mask(m)
    }
}

/// `M_λ(·; K)` sampled on `spec`.
pub fn mam_field(k: &SetInput, spec: GridSpec, p: &MamParams) -> Result<MamResult> {
    p.validate()?;
    let dist2 = set_dist2(k, spec)?;
    mam_from_dist2(dist2, p)
}

/// `M_λ` from an already computed `dist²` field.
pub fn mam_from_dist2(dist2: ScalarField2, p: &MamParams) -> Result<MamResult> {
    p.validate()?;
    let opening = lower_transform_opening_trusted(&dist2, p.lambda)?;
    let lower = match p.backend.kind {
        BackendKind::Opening => opening.lower,
        BackendKind::IterativeEnvelope => p.backend.apply(&dist2, p.lambda)?,
    };
    let l1 = 1.0 + p.lambda;
    let mut m = Vec::with_capacity(dist2.values().len());
    for (index, (d, l)) in dist2.values().iter().zip(lower.values()).enumerate() {
        let v = l1 * (d - l);
        if v < -NEG_TOL {
            return Err(Error::NegativeMap { index, value: v });
        }
        m.push(v.max(0.0));
    }
    let spec = *dist2.spec();
    Ok(MamResult {
        m_field: ScalarField2::from_values(spec, m)?,
        border_margin: border_margin(&opening.trusted),
        trusted: opening.trusted,
        dist2,
        lower,
    })
}

/// `M_λ` at a single point, from an opening on a grid of spacing `h` centred
/// at `x` and just large enough to hold the locality ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointMam {
    pub dist2: f64,
    pub lower: f64,
    pub mam: f64,
}

pub fn mam_at(k: &PointSet2, x: Point2, lambda: f64, h: f64) -> Result<PointMam> {
    check_lambda(lambda)?;
    k.require_nonempty()?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("spacing must be > 0, got {h}")));
    }
    let dist2 = k.dist2_to(x);
    let radius = crate::lowtrans::locality_radius(dist2.sqrt(), lambda);
    if radius < h {
        return Ok(PointMam { dist2, lower: dist2, mam: 0.0 });
    }
    let half = (radius / h).ceil() as usize + 2;
    let spec = GridSpec::centered(x, h, half, half)?;
    let field = edt_points(k, spec)?;
    let lower = lower_transform_opening(&field, lambda)?.get(half, half);
    let d = field.get(half, half);
    Ok(PointMam { dist2: d, lower, mam: ((1.0 + lambda) * (d - lower)).max(0.0) })
}

/// Sup-norm comparison of `M_λ(·; ∂Ω)` and `M_λ(·; Ω^c)` over interior cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEquivalenceReport {
    pub discrepancy: f64,
    pub bound: f64,
    pub cells_compared: usize,
    pub passed: bool,
}

pub fn mam_from_mask_boundary_equivalence(mask: &BinaryMask2, p: &MamParams) -> Result<BoundaryEquivalenceReport> {
    p.validate()?;
    let boundary = boundary_cells(mask);
    let interior: Vec<bool> = mask.bits().iter().zip(boundary.bits()).map(|(&m, &b)| m && !b).collect();
    if !interior.iter().any(|&b| b) {
        return Err(Error::NoInterior);
    }
    let spec = *mask.spec();
    let from_boundary = mam_field(&SetInput::Mask(boundary), spec, p)?;
    let from_complement = mam_field(&SetInput::Mask(mask.complement()), spec, p)?;
    let mut discrepancy: f64 = 0.0;
    let mut cells = 0;
    for k in 0..spec.len() {
        if interior[k] && from_boundary.trusted.bits()[k] && from_complement.trusted.bits()[k] {
            cells += 1;
            discrepancy = discrepancy.max((from_boundary.m_field.values()[k] - from_complement.m_field.values()[k]).abs());
        }
    }
    let bound = 10.0 * spec.spacing * (1.0 + p.lambda);
    Ok(BoundaryEquivalenceReport { discrepancy, bound, cells_compared: cells, passed: discrepancy <= bound })
}

/// Pointwise square root `M¹_λ = sqrt(M_λ)`.
pub fn linear_mam(m: &ScalarField2) -> Result<ScalarField2> {
    if let Some(index) = m.values().iter().position(|&v| v < -NEG_TOL) {
        return Err(Error::NegativeMap { index, value: m.values()[index] });
    }
    m.map(|v| v.max(0.0).sqrt())
}

/// Points of `k` within `(1 + nearest_tol)` times the minimal distance to `x`.
pub fn nearest_set(k: &PointSet2, x: Point2, nearest_tol: f64) -> PointSet2 {
    let d = k.dist2_to(x).sqrt();
    let cut = (1.0 + nearest_tol) * d;
    let cut2 = cut * cut;
    PointSet2::new(k.points().iter().copied().filter(|p| p.dist2(x) <= cut2))
}

/// Vertices of the convex hull in counterclockwise order, without collinear
/// points. Degenerate hulls come back as a segment (two points) or a point.
pub fn convex_hull_2d(pts: &PointSet2) -> Result<Vec<Point2>> {
    pts.require_nonempty()?;
    let mut p: Vec<Point2> = pts.points().to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() <= 2 {
        return Ok(p);
    }
    let turn = |o: Point2, a: Point2, b: Point2| (a - o).cross(b - o);
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * p.len());
    for &q in p.iter() {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    let lower_len = hull.len() + 1;
    for &q in p.iter().rev().skip(1) {
        while hull.len() >= lower_len && turn(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
            hull.pop();
        }
        hull.push(q);
    }
    hull.pop();
    Ok(hull)
}

/// Squared distance from `x` to the convex polygon `hull` (0 inside).
pub fn dist2_to_hull(x: Point2, hull: &[Point2]) -> f64 {
    match hull.len() {
        0 => f64::INFINITY,
        1 => x.dist2(hull[0]),
        2 => segment_dist2(x, hull[0], hull[1]),
        n => {
            let inside = (0..n).all(|i| (hull[(i + 1) % n] - hull[i]).cross(x - hull[i]) >= 0.0);
            if inside {
                return 0.0;
            }
            (0..n).map(|i| segment_dist2(x, hull[i], hull[(i + 1) % n])).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Landscape map `M_∞(x; K) = dist²(x; K) - dist²(x; co[K(x)])`.
pub fn landscape_map(k: &PointSet2, x: Point2, nearest_tol: f64) -> Result<f64> {
    k.require_nonempty()?;
    let near = nearest_set(k, x, nearest_tol);
    let hull = convex_hull_2d(&near)?;
    Ok((k.dist2_to(x) - dist2_to_hull(x, &hull)).max(0.0))
}

/// Largest angle subtended at `x` by two points of the nearest set.
pub fn separation_angle(k: &PointSet2, x: Point2, nearest_tol: f64) -> Result<f64> {
    k.require_nonempty()?;
    if k.dist2_to(x) <= 1e-24 {
        return Err(Error::InvalidParameter(format!("({}, {}) lies in K", x.x, x.y)));
    }
    let near = nearest_set(k, x, nearest_tol);
    let dirs: Vec<Point2> = near.points().iter().map(|&p| p - x).collect();
    let mut best: f64 = 0.0;
    for a in 0..dirs.len() {
        for b in a + 1..dirs.len() {
            // atan2 keeps full precision near 0 and π, where acos does not
            best = best.max(dirs[a].cross(dirs[b]).abs().atan2(dirs[a].dot(dirs[b])));
        }
    }
    Ok(best)
}

/// `|M_λ(x) - M_∞(x)|` for a list of scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitProbeEntry {
    pub lambda: f64,
    pub m_lambda: f64,
    pub m_inf: f64,
    pub dist2: f64,
    pub error: f64,
}

/// Evaluates `M_λ(x)` for each scale on windows of spacing `h` centred at `x`,
/// next to `M_∞(x)`.
pub fn limit_convergence_probe(
    k: &PointSet2,
    x: Point2,
    lambdas: &[f64],
    h: f64,
    nearest_tol: f64,
) -> Result<Vec<LimitProbeEntry>> {
    let m_inf = landscape_map(k, x, nearest_tol)?;
    lambdas
        .iter()
        .map(|&lambda| {
            let v = mam_at(k, x, lambda, h)?;
            Ok(LimitProbeEntry { lambda, m_lambda: v.mam, m_inf, dist2: v.dist2, error: (v.mam - m_inf).abs() })
        })
        .collect()
}

/// Whether a probe sequence satisfies the bounds `M_∞ - tol <= M_λ <= dist² + tol`
/// and has nonincreasing errors within `tol`, with `tol = 5h(1 + λ_max)`.
pub fn limit_probe_consistent(entries: &[LimitProbeEntry], h: f64) -> bool {
    let lmax = entries.iter().map(|e| e.lambda).fold(0.0, f64::max);
    let tol = 5.0 * h * (1.0 + lmax);
    let sandwich = entries.iter().all(|e| e.m_lambda >= e.m_inf - tol && e.m_lambda <= e.dist2 + tol);
    let monotone = entries.windows(2).all(|w| w[1].error <= w[0].error + tol);
    sandwich && monotone
}

/// Two-sided separation-angle bound `sin²(θ/2) dist² <= M_λ <= dist²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngleBoundReport {
    pub theta: f64,
    pub dist2: f64,
    pub mam: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub tol: f64,
    /// Smallest margin by which either side holds (negative when violated).
    pub slack: f64,
    pub passed: bool,
}

pub fn angle_bound_check(k: &PointSet2, x: Point2, lambda: f64, h: f64, nearest_tol: f64) -> Result<AngleBoundReport> {
    let theta = separation_angle(k, x, nearest_tol)?;
    let v = mam_at(k, x, lambda, h)?;
    let dist2 = k.dist2_to(x);
    let lower_bound = (0.5 * theta).sin().powi(2) * dist2;
    let tol = 5.0 * h * (1.0 + lambda);
    let slack = (v.mam - lower_bound).min(dist2 - v.mam) + tol;
    Ok(AngleBoundReport {
        theta,
        dist2,
        mam: v.mam,
        lower_bound,
        upper_bound: dist2,
        tol,
        slack,
        passed: slack >= 0.0,
    })
}

/// Closed suplevel set `{m >= threshold}`.
pub fn suplevel_mask(m: &ScalarField2, threshold: f64) -> BinaryMask2 {
    let bits = m.values().iter().map(|&v| v >= threshold).collect();
    BinaryMask2::new(*m.spec(), bits).expect("same grid")
}

/// `(1+λ) C^l_λ(dist²) - λ dist²`, which tends to `dist²(x; co[K(x)])` as λ grows.
/// Negative values are clamped to zero.
pub fn asymptotic_hull_distance(dist2: &ScalarField2, lower: &ScalarField2, lambda: f64) -> Result<ScalarField2> {
    check_lambda(lambda)?;
    dist2.check_same_grid(lower)?;
    lower.zip_map(dist2, |l, d| ((1.0 + lambda) * l - lambda * d).max(0.0))
}

/// Result of checking `supp M_λ ⊂ V_{λ,K}` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub lambda: f64,
    pub threshold: f64,
    pub support_cells: usize,
    pub violations: usize,
    /// Largest `λ dist(x; M_K) - dist(x; K) - 5h` over the support (≤ 0 on success).
    pub worst_excess: f64,
    pub passed: bool,
}

/// Every trusted cell with `M_λ > 10h(1+λ)²` must satisfy
/// `λ dist(x; M_K) <= dist(x; K) + 5h`.
pub fn support_in_vlk_check(shape: &OracleShape, lambda: f64, spec: GridSpec) -> Result<SupportReport> {
    let axis = oracle_mk(shape)?;
    let set = oracle_set(shape, spec)?;
    let r = mam_field(&set, spec, &MamParams::new(lambda))?;
    let h = spec.spacing;
    let threshold = 10.0 * h * (1.0 + lambda).powi(2);
    let mut support_cells = 0;
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for k in 0..spec.len() {
        if !r.trusted.bits()[k] || r.m_field.values()[k] <= threshold {
            continue;
        }
        support_cells += 1;
        let x = spec.world_at(k);
        let excess = lambda * axis.dist(x) - r.dist2.values()[k].sqrt() - 5.0 * h;
        worst = worst.max(excess);
        if excess > 0.0 {
            violations += 1;
        }
    }
    Ok(SupportReport { lambda, threshold, support_cells, violations, worst_excess: worst, passed: violations == 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn two_point() -> PointSet2 {
        PointSet2::new([Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)])
    }

    fn four_point() -> PointSet2 {
        PointSet2::new(OracleShape::four_points(2.0, 0.5))
    }

    #[test]
    fn two_point_branch_values() {
        let spec = GridSpec::centered(Point2::ORIGIN, 1e-3, 3000, 1000).unwrap();
        let r = mam_field(&two_point().into(), spec, &MamParams::new(1.0)).unwrap();
        let at = |x: f64, y: f64| r.m_field.sample(Point2::new(x, y)).unwrap();
        // the supporting parabola at (0, y) peaks at (0, 2y), so keep 2|y| inside the grid
        assert!((at(0.0, 0.3) - 1.0).abs() <= 5e-3);
        assert!(at(0.6, 0.3).abs() <= 5e-3);
        assert!(r.trusted.get(3000, 1300));
    }

    #[test]
    fn four_point_main_branch() {
        let v = mam_at(&four_point(), Point2::new(0.0, 1.0), 4.0, 5e-3).unwrap();
        assert!((v.mam - 4.0).abs() <= 2e-2, "{}", v.mam);
    }

    #[test]
    fn singleton_map_vanishes() {
        let spec = GridSpec::centered(Point2::ORIGIN, 0.05, 40, 40).unwrap();
        let k = PointSet2::new([Point2::new(0.3, -0.2)]);
        let r = mam_field(&k.into(), spec, &MamParams::new(2.0)).unwrap();
        assert!(r.trusted.count() > spec.len() / 4);
        for (v, &t) in r.m_field.values().iter().zip(r.trusted.bits()) {
            if t {
                assert!(v.abs() <= 1e-9, "{v}");
            }
        }
    }

    #[test]
    fn params_are_validated() {
        let spec = GridSpec::centered(Point2::ORIGIN, 0.1, 5, 5).unwrap();
        let k: SetInput = two_point().into();
        assert!(mam_field(&k, spec, &MamParams::new(0.0)).is_err());
        assert!(mam_field(&k, spec, &MamParams::new(1.0).with_nearest_tol(0.1)).is_err());
        let empty = BinaryMask2::filled(spec, false).unwrap();
        assert_eq!(mam_field(&empty.into(), spec, &MamParams::new(1.0)), Err(Error::EmptySet));
    }

    #[test]
    fn boundary_and_complement_agree() {
        let lambda = 5.0;
        let disc_spec = GridSpec::centered(Point2::ORIGIN, 0.05, 20, 20).unwrap();
        let disc = BinaryMask2::from_fn(disc_spec, |p| p.norm() <= 0.8).unwrap();
        let rep = mam_from_mask_boundary_equivalence(&disc, &MamParams::new(lambda)).unwrap();
        assert!(rep.passed && rep.cells_compared > 0, "{rep:?}");

        let rect_spec = GridSpec::centered(Point2::ORIGIN, 0.05, 30, 20).unwrap();
        let rect = BinaryMask2::from_fn(rect_spec, |p| p.x.abs() <= 1.2 && p.y.abs() <= 0.6).unwrap();
        let rep = mam_from_mask_boundary_equivalence(&rect, &MamParams::new(lambda)).unwrap();
        assert!(rep.passed && rep.cells_compared > 0, "{rep:?}");

        let mut one = vec![false; disc_spec.len()];
        one[disc_spec.index(3, 3)] = true;
        let one = BinaryMask2::new(disc_spec, one).unwrap();
        assert_eq!(mam_from_mask_boundary_equivalence(&one, &MamParams::new(lambda)), Err(Error::NoInterior));
    }

    #[test]
    fn linear_map_values() {
        let spec = GridSpec::new(0.0, 0.0, 1.0, 3, 1).unwrap();
        let m = ScalarField2::from_values(spec, vec![4.0, 0.0, -1e-12]).unwrap();
        assert_eq!(linear_mam(&m).unwrap().values(), &[2.0, 0.0, 0.0]);
        let bad = ScalarField2::from_values(spec, vec![4.0, -1e-3, 0.0]).unwrap();
        assert!(linear_mam(&bad).is_err());
        // on the two-point bisector the linear map equals dist at the midpoint
        let v = mam_at(&two_point(), Point2::ORIGIN, 1.0, 2e-3).unwrap();
        assert!((v.mam.sqrt() - 1.0).abs() <= 5e-3);
    }

    #[test]
    fn nearest_sets() {
        assert_eq!(nearest_set(&two_point(), Point2::ORIGIN, 0.0).len(), 2);
        assert_eq!(nearest_set(&two_point(), Point2::new(0.5, 0.0), 0.0).points(), &[Point2::new(1.0, 0.0)]);
        assert_eq!(nearest_set(&four_point(), Point2::ORIGIN, 0.0).len(), 4);
    }

    #[test]
    fn hull_examples() {
        let one = PointSet2::new([Point2::new(1.0, 2.0)]);
        assert_eq!(convex_hull_2d(&one).unwrap(), vec![Point2::new(1.0, 2.0)]);
        let sq = PointSet2::new([
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
            Point2::new(0.5, 0.5),
            Point2::new(0.5, 0.0),
        ]);
        let h = convex_hull_2d(&sq).unwrap();
        assert_eq!(h.len(), 4);
        let area: f64 = (0..4).map(|i| h[i].cross(h[(i + 1) % 4])).sum::<f64>() * 0.5;
        assert!((area - 1.0).abs() < 1e-15);
        let line = PointSet2::new((0..5).map(|i| Point2::new(i as f64, 2.0 * i as f64)));
        assert_eq!(convex_hull_2d(&line).unwrap(), vec![Point2::new(0.0, 0.0), Point2::new(4.0, 8.0)]);
    }

    #[test]
    fn hull_distance_examples() {
        let seg = [Point2::new(-1.0, 0.0), Point2::new(1.0, 0.0)];
        assert_eq!(dist2_to_hull(Point2::new(0.0, 2.0), &seg), 4.0);
        let tri = [Point2::new(0.0, 0.0), Point2::new(2.0, 0.0), Point2::new(0.0, 2.0)];
        assert_eq!(dist2_to_hull(Point2::new(0.5, 0.5), &tri), 0.0);
    }

    #[test]
    fn landscape_examples() {
        assert!((landscape_map(&two_point(), Point2::ORIGIN, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((landscape_map(&four_point(), Point2::ORIGIN, 0.0).unwrap() - 5.0).abs() < 1e-12);
        assert_eq!(landscape_map(&two_point(), Point2::new(0.2, 1.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn separation_angle_examples() {
        assert!((separation_angle(&two_point(), Point2::ORIGIN, 0.0).unwrap() - PI).abs() < 1e-15);
        assert_eq!(separation_angle(&two_point(), Point2::new(0.3, 0.0), 0.0).unwrap(), 0.0);
        let th = separation_angle(&four_point(), Point2::ORIGIN, 0.0).unwrap();
        // (2, 1) and (-2, -1) are antipodal
        let want = PI;
        assert!((th - want).abs() < 1e-12);
        assert!(separation_angle(&two_point(), Point2::new(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn limit_probe_examples() {
        let e = limit_convergence_probe(&two_point(), Point2::new(0.0, 0.5), &[1.0, 4.0], 5e-3, 1e-9).unwrap();
        for x in &e {
            assert!((x.m_lambda - 1.0).abs() <= 2e-2 && x.m_inf == 1.0);
        }
        assert!(limit_probe_consistent(&e, 5e-3));
        let f = limit_convergence_probe(&four_point(), Point2::ORIGIN, &[1.0, 4.0, 16.0], 5e-3, 1e-9).unwrap();
        for x in &f {
            assert!((x.m_lambda - 5.0).abs() <= 5e-2, "{x:?}");
        }
    }

    #[test]
    fn angle_bound_examples() {
        let r = angle_bound_check(&two_point(), Point2::ORIGIN, 2.0, 5e-3, 1e-9).unwrap();
        assert!(r.passed && (r.lower_bound - 1.0).abs() < 1e-12);
        let r = angle_bound_check(&four_point(), Point2::ORIGIN, 2.0, 5e-3, 1e-9).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn suplevel_examples() {
        let spec = GridSpec::new(0.0, 0.0, 1.0, 4, 1).unwrap();
        let m = ScalarField2::from_values(spec, vec![0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(suplevel_mask(&m, 0.0).count(), 4);
        assert_eq!(suplevel_mask(&m, 3.5).count(), 0);
        assert_eq!(suplevel_mask(&m, 2.0).bits(), &[false, false, true, true]);
    }

    #[test]
    fn asymptotic_two_point() {
        let lambda = 4.0;
        let h = 5e-3;
        let spec = GridSpec::centered(Point2::ORIGIN, h, 400, 400).unwrap();
        let r = mam_field(&two_point().into(), spec, &MamParams::new(lambda)).unwrap();
        let a = asymptotic_hull_distance(&r.dist2, &r.lower, lambda).unwrap();
        for &y in &[0.0, 0.2, 0.4] {
            let v = a.sample(Point2::new(0.0, y)).unwrap();
            assert!((v - y * y).abs() <= 5.0 * h * (1.0 + lambda), "{y} {v}");
        }
        assert!(asymptotic_hull_distance(&r.dist2, &r.lower, 0.0).is_err());
    }

    #[test]
    fn support_checks() {
        let spec = GridSpec::centered(Point2::ORIGIN, 0.01, 300, 300).unwrap();
        let rep = support_in_vlk_check(&OracleShape::TwoPoint { alpha: 1.0 }, 1.0, spec).unwrap();
        assert!(rep.passed && rep.support_cells > 0, "{rep:?}");
        let rep = support_in_vlk_check(&OracleShape::FourPoint { b: 2.0, eps: 0.5 }, 4.0, spec).unwrap();
        assert!(rep.passed && rep.support_cells > 0, "{rep:?}");
    }

    #[test]
    fn hull_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let pts: Vec<Point2> = (0..50).map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let hull = convex_hull_2d(&PointSet2::new(pts.clone())).unwrap();
        // a pair (p, q) is a hull edge iff every point lies weakly left of p->q
        let mut edges = 0;
        for &p in &pts {
            for &q in &pts {
                if p == q {
                    continue;
                }
                if pts.iter().all(|&s| (q - p).cross(s - p) > 0.0 || s == p || s == q) {
                    edges += 1;
                    let i = hull.iter().position(|&v| v == p).expect("edge start on hull");
                    assert_eq!(hull[(i + 1) % hull.len()], q);
                }
            }
        }
        assert_eq!(edges, hull.len());
    }

    proptest! {
        #[test]
        fn hull_distance_matches_sampling(seed in any::<u64>(), px in -3.0f64..3.0, py in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..8);
            let pts = PointSet2::new((0..n).map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            let hull = convex_hull_2d(&pts).unwrap();
            let x = Point2::new(px, py);
            let got = dist2_to_hull(x, &hull);
            // dense boundary sampling plus an inside test by convex combination
            let m = hull.len();
            let mut best = f64::INFINITY;
            for i in 0..m {
                let (a, b) = (hull[i], hull[(i + 1) % m]);
                for t in 0..=2000 {
                    let s = t as f64 / 2000.0;
                    best = best.min(x.dist2(a * (1.0 - s) + b * s));
                }
            }
            let inside = m >= 3 && (0..m).all(|i| (hull[(i + 1) % m] - hull[i]).cross(x - hull[i]) >= 0.0);
            let want = if inside { 0.0 } else { best };
            let edge = (0..m).map(|i| hull[i].dist(hull[(i + 1) % m])).fold(0.0, f64::max);
            prop_assert!((got - want).abs() <= 1e-6 + 2.0 * edge / 2000.0 * want.sqrt());
        }

        #[test]
        fn suplevel_is_antitone(seed in any::<u64>(), t1 in 0.0f64..1.0, dt in 0.0f64..1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let spec = GridSpec::new(0.0, 0.0, 1.0, 9, 7).unwrap();
            let m = ScalarField2::from_values(spec, (0..63).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap();
            let a = suplevel_mask(&m, t1);
            let b = suplevel_mask(&m, t1 + dt);
            prop_assert!(b.is_subset_of(&a).unwrap());
        }

        #[test]
        fn bounds_hold_on_random_sets(seed in any::<u64>(), lam in 0.5f64..8.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..7);
            let k = PointSet2::new((0..n).map(|_| Point2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))));
            let spec = GridSpec::centered(Point2::ORIGIN, 0.04, 40, 40).unwrap();
            let r = mam_field(&k.into(), spec, &MamParams::new(lam)).unwrap();
            let tol = 5.0 * spec.spacing * (1.0 + lam);
            for i in 0..spec.len() {
                if r.trusted.bits()[i] {
                    let m = r.m_field.values()[i];
                    prop_assert!(m >= 0.0 && m <= r.dist2.values()[i] + tol);
                }
            }
        }
    }
}

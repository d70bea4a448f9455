//! Hausdorff distance, ε-samples of boundaries, seeded perturbations of point
//! sets, and checks of the Hausdorff stability estimates for `C^l_λ` and `M_λ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GridSpec, Point2, PointSet2};
use crate::lowtrans::check_lambda;
use crate::mam::{mam_field, suplevel_mask, MamParams, MamResult};
use crate::oracles::{oracle_eval, OracleShape};

/// Largest number of points [`epsilon_sample`] will produce.
pub const MAX_SAMPLE_POINTS: usize = 10_000;

fn directed_sup2(a: &[Point2], b: &[Point2]) -> f64 {
    a.par_iter()
        .map(|&p| b.iter().map(|&q| p.dist2(q)).fold(f64::INFINITY, f64::min))
        .reduce(|| 0.0, f64::max)
}

/// `max{sup_a dist(a; B), sup_b dist(b; A)}` by a double loop.
pub fn hausdorff_distance(a: &PointSet2, b: &PointSet2) -> Result<f64> {
    a.require_nonempty()?;
    b.require_nonempty()?;
    let ab = directed_sup2(a.points(), b.points());
    let ba = directed_sup2(b.points(), a.points());
    Ok(ab.max(ba).sqrt())
}

/// A segment or circular arc of a boundary curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryPiece {
    Segment { a: Point2, b: Point2 },
    /// Arc of `center + radius (cos t, sin t)` for `t` from `start` to `start + sweep`.
    Arc { center: Point2, radius: f64, start: f64, sweep: f64 },
}

impl BoundaryPiece {
    pub fn length(&self) -> f64 {
        match *self {
            BoundaryPiece::Segment { a, b } => a.dist(b),
            BoundaryPiece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    /// Point at arc-length fraction `t ∈ [0, 1]`.
    pub fn point_at(&self, t: f64) -> Point2 {
        match *self {
            BoundaryPiece::Segment { a, b } => a + (b - a) * t,
            BoundaryPiece::Arc { center, radius, start, sweep } => {
                let th = start + sweep * t;
                center + Point2::new(th.cos(), th.sin()) * radius
            }
        }
    }
}

/// A boundary given as a list of pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundary {
    pieces: Vec<BoundaryPiece>,
}

impl Boundary {
    pub fn new(pieces: Vec<BoundaryPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::EmptySet);
        }
        for p in &pieces {
            let len = p.length();
            if !(len > 0.0 && len.is_finite()) {
                return Err(Error::InvalidParameter(format!("boundary piece has length {len}")));
            }
        }
        Ok(Boundary { pieces })
    }

    /// Closed polygon through `vertices`.
    pub fn polygon(vertices: &[Point2]) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidParameter("a polygon needs at least two vertices".into()));
        }
        let n = vertices.len();
        Boundary::new((0..n).map(|i| BoundaryPiece::Segment { a: vertices[i], b: vertices[(i + 1) % n] }).collect())
    }

    pub fn circle(center: Point2, radius: f64) -> Result<Self> {
        Boundary::new(vec![BoundaryPiece::Arc { center, radius, start: 0.0, sweep: 2.0 * PI }])
    }

    /// Boundary of a bounded oracle region: rectangle, oval, or the circle of
    /// the ball complement.
    pub fn from_shape(shape: &OracleShape) -> Result<Self> {
        shape.validate()?;
        match *shape {
            OracleShape::Rectangle { r } => {
                let a = 1.5 * r;
                Boundary::polygon(&[Point2::new(-a, -r), Point2::new(a, -r), Point2::new(a, r), Point2::new(-a, r)])
            }
            OracleShape::Oval { r } => {
                let half = 0.5 * r;
                Boundary::new(vec![
                    BoundaryPiece::Segment { a: Point2::new(-half, r), b: Point2::new(half, r) },
                    BoundaryPiece::Arc { center: Point2::new(half, 0.0), radius: r, start: 0.5 * PI, sweep: -PI },
                    BoundaryPiece::Segment { a: Point2::new(half, -r), b: Point2::new(-half, -r) },
                    BoundaryPiece::Arc { center: Point2::new(-half, 0.0), radius: r, start: -0.5 * PI, sweep: -PI },
                ])
            }
            OracleShape::BallComplement { rho } => Boundary::circle(Point2::ORIGIN, rho),
            _ => Err(Error::Unsupported(format!("{} has no bounded boundary curve", shape.name()))),
        }
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(BoundaryPiece::length).sum()
    }

    /// Samples at most `step` apart along every piece, endpoints included.
    pub fn dense_sample(&self, step: f64) -> PointSet2 {
        let mut pts = Vec::new();
        for p in &self.pieces {
            let m = (p.length() / step).ceil().max(1.0) as usize;
            pts.extend((0..=m).map(|k| p.point_at(k as f64 / m as f64)));
        }
        PointSet2::new(pts)
    }
}

/// A seeded ε-sample of `boundary`.
///
/// Each piece of length `len` gets `n = ⌈len / (1.2 ε)⌉` points at fractions
/// `(k + 1/2 + δ_k) / n` with `δ_k` uniform in `[-1/4, 1/4]`, so every boundary
/// point is within `0.9 ε` of the sample. The result is checked against a
/// reference sample ten times denser before it is returned.
pub fn epsilon_sample(boundary: &Boundary, eps: f64, seed: u64) -> Result<PointSet2> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
    }
    let counts: Vec<usize> =
        boundary.pieces.iter().map(|p| (p.length() / (1.2 * eps)).ceil().max(1.0) as usize).collect();
    let total: usize = counts.iter().sum();
    if total > MAX_SAMPLE_POINTS {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} needs {total} points, more than the {MAX_SAMPLE_POINTS} the reference check supports"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(total);
    for (p, &n) in boundary.pieces.iter().zip(&counts) {
        for k in 0..n {
            let d: f64 = rng.gen_range(-0.25..=0.25);
            pts.push(p.point_at((k as f64 + 0.5 + d) / n as f64));
        }
    }
    let sample = PointSet2::new(pts);
    let ref_step = 1.2 * eps / 10.0;
    let reference = boundary.dense_sample(ref_step);
    let measured = hausdorff_distance(&sample, &reference)?;
    // the reference itself is within ref_step / 2 of the curve
    if measured + 0.5 * ref_step >= eps {
        return Err(Error::InvalidParameter(format!(
            "eps = {eps} not achieved: distance to the reference sample is {measured}"
        )));
    }
    Ok(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerturbationMode {
    /// Move every point by a uniform random vector of the disc of radius `magnitude`.
    UniformJitter,
    /// Keep a random `fraction` of the points (at least one), then jitter.
    Subsample(f64),
    /// Snap every point to the lattice `cZ²`, then jitter.
    StaircaseQuantize(f64),
}

/// Seeded perturbation of a point set. `magnitude` is the jitter radius; the
/// subsample and quantize modes apply it after their own step, and it may be 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub magnitude: f64,
    pub mode: PerturbationMode,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn jitter(magnitude: f64, seed: u64) -> Self {
        PerturbationSpec { magnitude, mode: PerturbationMode::UniformJitter, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.magnitude >= 0.0 && self.magnitude.is_finite()) {
            return Err(Error::InvalidParameter(format!("magnitude must be >= 0, got {}", self.magnitude)));
        }
        match self.mode {
            PerturbationMode::UniformJitter => Ok(()),
            PerturbationMode::Subsample(f) if f > 0.0 && f <= 1.0 => Ok(()),
            PerturbationMode::Subsample(f) => {
                Err(Error::InvalidParameter(format!("fraction must be in (0, 1], got {f}")))
            }
            PerturbationMode::StaircaseQuantize(c) if c > 0.0 && c.is_finite() => Ok(()),
            PerturbationMode::StaircaseQuantize(c) => {
                Err(Error::InvalidParameter(format!("quantization step must be > 0, got {c}")))
            }
        }
    }
}

fn disc_vector(rng: &mut ChaCha8Rng, radius: f64) -> Point2 {
    if radius == 0.0 {
        return Point2::ORIGIN;
    }
    loop {
        let v = Point2::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0));
        if v.norm2() <= 1.0 {
            return v * radius;
        }
    }
}

pub fn perturb(k: &PointSet2, spec: &PerturbationSpec) -> Result<PointSet2> {
    k.require_nonempty()?;
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let base: Vec<Point2> = match spec.mode {
        PerturbationMode::UniformJitter => k.points().to_vec(),
        PerturbationMode::Subsample(fraction) => {
            let n = k.len();
            let keep = ((fraction * n as f64).ceil() as usize).clamp(1, n);
            let mut idx: Vec<usize> = (0..n).collect();
            // partial Fisher-Yates, then restore input order
            for i in 0..keep {
                let j = rng.gen_range(i..n);
                idx.swap(i, j);
            }
            let mut chosen = idx[..keep].to_vec();
            chosen.sort_unstable();
            chosen.into_iter().map(|i| k.points()[i]).collect()
        }
        PerturbationMode::StaircaseQuantize(c) => {
            k.points().iter().map(|p| Point2::new((p.x / c).round() * c, (p.y / c).round() * c)).collect()
        }
    };
    Ok(PointSet2::new(base.into_iter().map(|p| p + disc_vector(&mut rng, spec.magnitude)).collect::<Vec<_>>()))
}

/// `μ((d + μ)² + 1 + μ)`, the bound on `|C^l_λ(dist²_K) - C^l_λ(dist²_L)|` at a
/// point with `dist(x; K) = d`.
pub fn lower_stability_bound(mu: f64, d: f64) -> f64 {
    mu * ((d + mu).powi(2) + 1.0 + mu)
}

/// `μ(1+λ)((d + μ)² + 2d + 2μ + 1)`, the bound on `|M_λ(·; K) - M_λ(·; L)|`.
pub fn mam_stability_bound(mu: f64, lambda: f64, d: f64) -> f64 {
    mu * (1.0 + lambda) * ((d + mu).powi(2) + 2.0 * d + 2.0 * mu + 1.0)
}

/// Worst case of one bound over the compared cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub max_diff: f64,
    /// Smallest `bound + tol - diff` (negative when violated).
    pub worst_slack: f64,
    pub worst_at: Point2,
    pub tol: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(tol: f64) -> Self {
        BoundCheck { max_diff: 0.0, worst_slack: f64::INFINITY, worst_at: Point2::ORIGIN, tol, passed: true }
    }

    fn record(&mut self, diff: f64, bound: f64, at: Point2) {
        self.max_diff = self.max_diff.max(diff);
        let slack = bound + self.tol - diff;
        if slack < self.worst_slack {
            self.worst_slack = slack;
            self.worst_at = at;
        }
        self.passed &= slack >= 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub lambda: f64,
    pub mu: f64,
    pub spacing: f64,
    pub seed: Option<u64>,
    pub cells_compared: usize,
    pub lower: BoundCheck,
    pub mam: BoundCheck,
    pub passed: bool,
}

fn trusted_pair(a: &MamResult, b: &MamResult) -> Vec<usize> {
    let (ta, tb) = (a.trusted.bits(), b.trusted.bits());
    (0..ta.len()).filter(|&k| ta[k] && tb[k]).collect()
}

/// Compares `C^l_λ(dist²)` and `M_λ` of `k` and `l` at every cell trusted in
/// both computations, against the Hausdorff stability bounds plus the grid
/// slack `10h(1+λ)` and `10h(1+λ)²`.
pub fn stability_bound_check(k: &PointSet2, l: &PointSet2, lambda: f64, spec: GridSpec) -> Result<StabilityReport> {
    check_lambda(lambda)?;
    let mu = hausdorff_distance(k, l)?;
    let p = MamParams::new(lambda);
    let rk = mam_field(&k.clone().into(), spec, &p)?;
    let rl = mam_field(&l.clone().into(), spec, &p)?;
    let h = spec.spacing;
    let l1 = 1.0 + lambda;
    let mut lower = BoundCheck::new(10.0 * h * l1);
    let mut mam = BoundCheck::new(10.0 * h * l1 * l1);
    let mut cells = 0;
    for idx in trusted_pair(&rk, &rl) {
        cells += 1;
        let x = spec.world_at(idx);
        let d = rk.dist2.values()[idx].sqrt();
        lower.record(
            (rk.lower.values()[idx] - rl.lower.values()[idx]).abs(),
            lower_stability_bound(mu, d),
            x,
        );
        mam.record((rk.m_field.values()[idx] - rl.m_field.values()[idx]).abs(), mam_stability_bound(mu, lambda, d), x);
    }
    if cells == 0 {
        return Err(Error::InvalidParameter("no cell is trusted in both computations".into()));
    }
    Ok(StabilityReport {
        lambda,
        mu,
        spacing: h,
        seed: None,
        cells_compared: cells,
        passed: lower.passed && mam.passed,
        lower,
        mam,
    })
}

/// [`stability_bound_check`] for `k` against `perturb(k, pert)`; the report
/// carries the seed.
pub fn perturbation_stability_check(
    k: &PointSet2,
    pert: &PerturbationSpec,
    lambda: f64,
    spec: GridSpec,
) -> Result<StabilityReport> {
    let l = perturb(k, pert)?;
    let mut r = stability_bound_check(k, &l, lambda, spec)?;
    r.seed = Some(pert.seed);
    Ok(r)
}

/// Whether `x` lies in the closed region bounded by the shape.
pub fn region_contains(shape: &OracleShape, x: Point2) -> bool {
    match *shape {
        OracleShape::Rectangle { r } => x.x.abs() <= 1.5 * r && x.y.abs() <= r,
        OracleShape::Oval { r } => {
            let half = 0.5 * r;
            (x.x.abs() <= half && x.y.abs() <= r) || x.dist(Point2::new(half.copysign(x.x), 0.0)) <= r
        }
        OracleShape::BallComplement { rho } => x.norm() <= rho,
        OracleShape::Strip { r } => x.x >= -r && x.y.abs() <= r,
        _ => false,
    }
}

/// Continuum shape whose boundary is sampled in [`sample_convergence_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProbeShape {
    /// The lines `x = ±b`, sampled at `(±b, (2j + 1) ε b)`. Here `ε` is the
    /// relative density, the Hausdorff distance to the lines is `ε b`, and the
    /// minor branches `y = 2jεb` carry the height `ε² b²`.
    ParallelLines { b: f64 },
    /// A bounded oracle region; `ε` is the Hausdorff distance of the seeded
    /// ε-sample to the boundary.
    Region(OracleShape),
}

impl ProbeShape {
    pub fn name(&self) -> &'static str {
        match self {
            ProbeShape::ParallelLines { .. } => "parallel-lines",
            ProbeShape::Region(s) => s.name(),
        }
    }
}

/// `M_λ` of the two lines `x = ±b`: `((1+λ)|x| - b)²` for `|x| <= b/(1+λ)`, else 0.
pub fn parallel_lines_mam(b: f64, lambda: f64, x: Point2) -> f64 {
    let l1 = 1.0 + lambda;
    let a = x.x.abs();
    if a <= b / l1 {
        (l1 * a - b).powi(2)
    } else {
        0.0
    }
}

/// Sample of the lines `x = ±b` at `y = (2j + 1) c`, covering `[y0, y1]`.
pub fn parallel_lines_sample(b: f64, c: f64, y0: f64, y1: f64) -> Result<PointSet2> {
    if !(b > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameter(format!("need b > 0 and c > 0, got b = {b}, c = {c}")));
    }
    let j0 = ((y0 / c - 1.0) / 2.0).floor() as i64;
    let j1 = ((y1 / c - 1.0) / 2.0).ceil() as i64;
    if j1 - j0 > 2 * MAX_SAMPLE_POINTS as i64 {
        return Err(Error::InvalidParameter(format!("spacing {c} needs too many samples")));
    }
    let mut pts = Vec::new();
    for j in j0..=j1 {
        let y = (2 * j + 1) as f64 * c;
        pts.push(Point2::new(-b, y));
        pts.push(Point2::new(b, y));
    }
    Ok(PointSet2::new(pts))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleProbeEntry {
    pub eps: f64,
    /// Hausdorff distance of the sample to the continuum boundary.
    pub mu: f64,
    pub points: usize,
    pub cells_compared: usize,
    pub max_diff: f64,
    /// Smallest `bound + tol - diff` over the compared cells.
    pub worst_slack: f64,
    pub mask_cells: usize,
    /// Cells whose thresholded value differs from the previous `ε`.
    pub mask_change: Option<usize>,
    /// Largest `M_λ` on the minor branches (parallel lines only).
    pub minor_peak: Option<f64>,
    /// `ε² b²` (parallel lines only).
    pub minor_prediction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleProbeReport {
    pub shape: String,
    pub lambda: f64,
    pub threshold: f64,
    pub seed: u64,
    pub spacing: f64,
    pub entries: Vec<SampleProbeEntry>,
    pub bounds_hold: bool,
    /// Mask changes nonincreasing as `ε` decreases.
    pub mask_monotone: bool,
    /// Cells of the last mask that disagree with the mid-line slab
    /// `|x| <= (b - √t)/(1+λ)`, ignoring cells within `2h` of its edge
    /// (parallel lines only).
    pub slab_mismatch: Option<usize>,
    /// Every minor peak within a factor `[0.5, 2]` of its prediction.
    pub minor_ratio_ok: Option<bool>,
    pub passed: bool,
}

/// For each `ε`, computes `M_λ` of an ε-sample of `shape` on `spec` and compares
/// it with the continuum `M_λ` on the trusted cells inside the shape. The
/// pointwise bound is the stability estimate with `μ = ε`-scale Hausdorff
/// distance and `d = dist(x; ∂Ω)`, plus `10h(1+λ)²`. Suplevel masks at
/// `threshold` are compared between consecutive `ε`.
pub fn sample_convergence_probe(
    shape: &ProbeShape,
    eps_list: &[f64],
    lambda: f64,
    threshold: f64,
    spec: GridSpec,
    seed: u64,
) -> Result<SampleProbeReport> {
    check_lambda(lambda)?;
    spec.validate()?;
    if eps_list.is_empty() {
        return Err(Error::InvalidParameter("eps list is empty".into()));
    }
    let h = spec.spacing;
    let l1 = 1.0 + lambda;
    let tol = 10.0 * h * l1 * l1;
    let p = MamParams::new(lambda);

    let boundary = match shape {
        ProbeShape::ParallelLines { b } => {
            if !(*b > 0.0) {
                return Err(Error::InvalidParameter(format!("b must be > 0, got {b}")));
            }
            None
        }
        ProbeShape::Region(s) => Some(Boundary::from_shape(s)?),
    };
    // continuum M_λ and dist(x; ∂Ω), or None outside the shape
    let reference = |x: Point2| -> Result<Option<(f64, f64)>> {
        match shape {
            ProbeShape::ParallelLines { b } => {
                if x.x.abs() > *b {
                    return Ok(None);
                }
                Ok(Some((parallel_lines_mam(*b, lambda, x), b - x.x.abs())))
            }
            ProbeShape::Region(s) => {
                if !region_contains(s, x) {
                    return Ok(None);
                }
                let v = oracle_eval(s, lambda, x)?;
                Ok(Some((v.mam, v.dist2.sqrt())))
            }
        }
    };

    let mut entries: Vec<SampleProbeEntry> = Vec::new();
    let mut prev_mask = None;
    let mut last: Option<(crate::fields::BinaryMask2, crate::fields::BinaryMask2)> = None;
    for &eps in eps_list {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("eps must be > 0, got {eps}")));
        }
        let (sample, mu) = match (shape, &boundary) {
            (ProbeShape::ParallelLines { b }, _) => {
                let c = eps * b;
                let reach = 2.0 * c + b;
                (parallel_lines_sample(*b, c, spec.origin_y - reach, spec.y_max() + reach)?, c)
            }
            (_, Some(bd)) => {
                let s = epsilon_sample(bd, eps, seed)?;
                (s, eps)
            }
            _ => unreachable!(),
        };
        let r = mam_field(&sample.clone().into(), spec, &p)?;
        let mut worst_slack = f64::INFINITY;
        let mut max_diff: f64 = 0.0;
        let mut cells = 0;
        for idx in 0..spec.len() {
            if !r.trusted.bits()[idx] {
                continue;
            }
            let x = spec.world_at(idx);
            let Some((m_ref, d)) = reference(x)? else { continue };
            cells += 1;
            let diff = (r.m_field.values()[idx] - m_ref).abs();
            max_diff = max_diff.max(diff);
            worst_slack = worst_slack.min(mam_stability_bound(mu, lambda, d) + tol - diff);
        }
        let mask = suplevel_mask(&r.m_field, threshold).and(&r.trusted)?;
        let mask_change = match &prev_mask {
            Some(pm) => Some(mask.symmetric_difference_count(pm)?),
            None => None,
        };
        let (minor_peak, minor_prediction) = match shape {
            ProbeShape::ParallelLines { b } => {
                let lo = b / l1 + 5.0 * h;
                let mut peak: f64 = 0.0;
                for idx in 0..spec.len() {
                    let x = spec.world_at(idx);
                    if r.trusted.bits()[idx] && x.x.abs() >= lo && x.x.abs() <= b - 5.0 * h {
                        peak = peak.max(r.m_field.values()[idx]);
                    }
                }
                (Some(peak), Some(mu * mu))
            }
            ProbeShape::Region(_) => (None, None),
        };
        entries.push(SampleProbeEntry {
            eps,
            mu,
            points: sample.len(),
            cells_compared: cells,
            max_diff,
            worst_slack,
            mask_cells: mask.count(),
            mask_change,
            minor_peak,
            minor_prediction,
        });
        prev_mask = Some(mask.clone());
        last = Some((mask, r.trusted));
    }

    let bounds_hold = entries.iter().all(|e| e.cells_compared > 0 && e.worst_slack >= 0.0);
    let changes: Vec<usize> = entries.iter().filter_map(|e| e.mask_change).collect();
    let mask_monotone = changes.windows(2).all(|w| w[1] <= w[0]);
    let (slab_mismatch, minor_ratio_ok) = match shape {
        ProbeShape::ParallelLines { b } => {
            let (mask, trusted) = last.expect("nonempty eps list");
            let half = (b - threshold.max(0.0).sqrt()).max(0.0) / l1;
            let mut bad = 0;
            for idx in 0..spec.len() {
                let x = spec.world_at(idx).x.abs();
                if !trusted.bits()[idx] || (x - half).abs() <= 2.0 * h {
                    continue;
                }
                if mask.bits()[idx] != (x < half) {
                    bad += 1;
                }
            }
            let ratio_ok = entries.iter().all(|e| match (e.minor_peak, e.minor_prediction) {
                (Some(p), Some(q)) => p >= 0.5 * q && p <= 2.0 * q,
                _ => false,
            });
            (Some(bad), Some(ratio_ok))
        }
        ProbeShape::Region(_) => (None, None),
    };
    let passed = bounds_hold && mask_monotone && slab_mismatch.map_or(true, |b| b == 0) && minor_ratio_ok.unwrap_or(true);
    Ok(SampleProbeReport {
        shape: shape.name().to_string(),
        lambda,
        threshold,
        seed,
        spacing: h,
        entries,
        bounds_hold,
        mask_monotone,
        slab_mismatch,
        minor_ratio_ok,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(v: &[(f64, f64)]) -> PointSet2 {
        v.iter().map(|&p| Point2::from(p)).collect()
    }

    fn brute_hausdorff(a: &PointSet2, b: &PointSet2) -> f64 {
        let dir = |a: &PointSet2, b: &PointSet2| {
            let mut worst: f64 = 0.0;
            for p in a.points() {
                let mut best = f64::INFINITY;
                for q in b.points() {
                    best = best.min(((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt());
                }
                worst = worst.max(best);
            }
            worst
        };
        dir(a, b).max(dir(b, a))
    }

    #[test]
    fn hausdorff_singletons() {
        assert_eq!(hausdorff_distance(&pts(&[(0.0, 0.0)]), &pts(&[(3.0, 0.0)])).unwrap(), 3.0);
    }

    #[test]
    fn hausdorff_superset_with_far_point() {
        let a = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]);
        let mut b = a.points().to_vec();
        b.push(Point2::new(4.0, 5.0));
        let b = PointSet2::new(b);
        let want = a.dist2_to(Point2::new(4.0, 5.0)).sqrt();
        assert!((hausdorff_distance(&a, &b).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn hausdorff_empty_is_error() {
        let a = pts(&[(0.0, 0.0)]);
        assert_eq!(hausdorff_distance(&a, &PointSet2::new([])), Err(Error::EmptySet));
    }

    #[test]
    fn circle_sample() {
        let c = Boundary::circle(Point2::ORIGIN, 1.0).unwrap();
        let s = epsilon_sample(&c, 0.1, 3).unwrap();
        assert!(s.len() >= (2.0 * PI / 0.2).ceil() as usize);
        let dense: PointSet2 = (0..20000)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / 20000.0;
                Point2::new(t.cos(), t.sin())
            })
            .collect();
        assert!(brute_hausdorff(&s, &dense) < 0.1);
        for p in s.points() {
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn loose_square_sample() {
        let sq = Boundary::polygon(&[(0.0, 0.0).into(), (1.0, 0.0).into(), (1.0, 1.0).into(), (0.0, 1.0).into()]).unwrap();
        let s = epsilon_sample(&sq, 2.0, 0).unwrap();
        assert!(s.len() <= 4);
    }

    #[test]
    fn sample_rejects_bad_eps() {
        let c = Boundary::circle(Point2::ORIGIN, 1.0).unwrap();
        assert!(epsilon_sample(&c, 0.0, 0).is_err());
        assert!(epsilon_sample(&c, -1.0, 0).is_err());
        assert!(epsilon_sample(&c, 1e-5, 0).is_err());
    }

    #[test]
    fn sample_is_seeded() {
        let b = Boundary::from_shape(&OracleShape::Oval { r: 1.0 }).unwrap();
        assert_eq!(epsilon_sample(&b, 0.05, 9).unwrap(), epsilon_sample(&b, 0.05, 9).unwrap());
        assert_ne!(epsilon_sample(&b, 0.05, 9).unwrap(), epsilon_sample(&b, 0.05, 10).unwrap());
    }

    #[test]
    fn shape_boundaries() {
        let oval = Boundary::from_shape(&OracleShape::Oval { r: 1.0 }).unwrap();
        assert!((oval.length() - (2.0 + 2.0 * PI)).abs() < 1e-12);
        let rect = Boundary::from_shape(&OracleShape::Rectangle { r: 1.0 }).unwrap();
        assert!((rect.length() - 10.0).abs() < 1e-12);
        // every dense oval sample point is on the oval boundary
        let oracle = OracleShape::Oval { r: 1.0 };
        for p in oval.dense_sample(0.01).points() {
            assert!(crate::oracles::oracle_dist2(&oracle, *p).unwrap() < 1e-20);
        }
        assert!(Boundary::from_shape(&OracleShape::TwoPoint { alpha: 1.0 }).is_err());
    }

    #[test]
    fn perturbation_modes() {
        let k: PointSet2 = (0..50).map(|i| Point2::new(i as f64 * 0.13, (i as f64).sin())).collect();
        let j = perturb(&k, &PerturbationSpec::jitter(0.05, 1)).unwrap();
        assert_eq!(j.len(), k.len());
        for (a, b) in k.points().iter().zip(j.points()) {
            assert!(a.dist(*b) <= 0.05);
        }
        assert!(hausdorff_distance(&k, &j).unwrap() <= 0.05);

        let s = perturb(&k, &PerturbationSpec { magnitude: 0.0, mode: PerturbationMode::Subsample(0.3), seed: 2 }).unwrap();
        assert_eq!(s.len(), 15);
        assert!(s.points().iter().all(|p| k.points().contains(p)));

        let q = perturb(&k, &PerturbationSpec { magnitude: 0.0, mode: PerturbationMode::StaircaseQuantize(0.25), seed: 3 })
            .unwrap();
        for p in q.points() {
            assert_eq!((p.x / 0.25).fract(), 0.0);
            assert_eq!((p.y / 0.25).fract(), 0.0);
        }
        assert!(hausdorff_distance(&k, &q).unwrap() <= 0.125 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn perturbation_validation() {
        let k = pts(&[(0.0, 0.0)]);
        let bad = [
            PerturbationSpec::jitter(-1.0, 0),
            PerturbationSpec { magnitude: 0.1, mode: PerturbationMode::Subsample(0.0), seed: 0 },
            PerturbationSpec { magnitude: 0.1, mode: PerturbationMode::Subsample(1.5), seed: 0 },
            PerturbationSpec { magnitude: 0.1, mode: PerturbationMode::StaircaseQuantize(0.0), seed: 0 },
        ];
        for b in bad {
            assert!(perturb(&k, &b).is_err());
        }
    }

    #[test]
    fn identical_sets_have_zero_difference() {
        let k = pts(&[(-1.0, 0.0), (1.0, 0.3), (0.2, 1.0)]);
        let spec = GridSpec::covering(-2.0, 2.0, -2.0, 2.0, 0.02).unwrap();
        let r = stability_bound_check(&k, &k, 2.0, spec).unwrap();
        assert_eq!(r.mu, 0.0);
        assert_eq!(r.lower.max_diff, 0.0);
        assert_eq!(r.mam.max_diff, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn translated_set() {
        // a translation by a grid multiple shifts the fields exactly
        let k = pts(&[(-1.0, 0.0), (1.0, 0.0)]);
        let mu = 0.05;
        let l = k.translated(Point2::new(mu, 0.0));
        let spec = GridSpec::covering(-3.0, 3.0, -2.0, 2.0, 0.01).unwrap();
        let r = stability_bound_check(&k, &l, 1.0, spec).unwrap();
        assert!((r.mu - mu).abs() < 1e-15);
        assert!(r.passed, "{r:?}");
        // near the centre M_λ = (2|x| - 1)², so it moves by at most 4μ
        let p = MamParams::new(1.0);
        let rk = mam_field(&k.clone().into(), spec, &p).unwrap();
        let rl = mam_field(&l.clone().into(), spec, &p).unwrap();
        let (i, j) = spec.nearest(Point2::new(0.0, 0.3)).unwrap();
        let diff = (rk.m_field.get(i, j) - rl.m_field.get(i, j)).abs();
        assert!(diff <= 4.0 * mu + 1e-9, "{diff}");
        assert!(diff < 0.5 * mam_stability_bound(mu, 1.0, 1.0));
        let (i5, _) = spec.nearest(Point2::new(mu, 0.0)).unwrap();
        assert!((rl.m_field.get(i5, j) - rk.m_field.get(i, j)).abs() < 1e-9);
    }

    #[test]
    fn two_point_jitter_bound() {
        let k = pts(&[(-1.0, 0.0), (1.0, 0.0)]);
        let spec = GridSpec::covering(-3.0, 3.0, -3.0, 3.0, 5e-3).unwrap();
        let pert = PerturbationSpec::jitter(0.05, 11);
        let r = perturbation_stability_check(&k, &pert, 2.0, spec).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.seed, Some(11));
        let b0 = mam_stability_bound(0.05, 2.0, 1.0);
        assert!((b0 - 0.05 * 3.0 * (1.05f64.powi(2) + 2.0 + 0.1 + 1.0)).abs() < 1e-15);
        let l = perturb(&k, &pert).unwrap();
        let p = MamParams::new(2.0);
        let mk = mam_field(&k.clone().into(), spec, &p).unwrap();
        let ml = mam_field(&l.into(), spec, &p).unwrap();
        let (i, j) = spec.nearest(Point2::ORIGIN).unwrap();
        assert!((mk.m_field.get(i, j) - ml.m_field.get(i, j)).abs() <= b0);
    }

    #[test]
    fn parallel_lines_probe() {
        let spec = GridSpec::covering(-2.5, 2.5, -1.6, 1.6, 0.01).unwrap();
        let shape = ProbeShape::ParallelLines { b: 2.0 };
        let r = sample_convergence_probe(&shape, &[0.4, 0.2, 0.1], 10.0, 2.0, spec, 0).unwrap();
        assert!(r.passed, "{r:?}");
        for e in &r.entries {
            let (p, q) = (e.minor_peak.unwrap(), e.minor_prediction.unwrap());
            assert!(p >= 0.5 * q && p <= 2.0 * q);
        }
        assert_eq!(r.slab_mismatch, Some(0));
    }

    #[test]
    fn constant_eps_gives_identical_entries() {
        let spec = GridSpec::covering(-1.6, 1.6, -1.1, 1.1, 0.02).unwrap();
        let shape = ProbeShape::Region(OracleShape::Oval { r: 1.0 });
        let a = sample_convergence_probe(&shape, &[0.1, 0.1], 2.0, 0.5, spec, 5).unwrap();
        let b = sample_convergence_probe(&shape, &[0.1, 0.1], 2.0, 0.5, spec, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.entries[0].max_diff, b.entries[1].max_diff);
    }

    #[test]
    fn oval_probe() {
        let spec = GridSpec::covering(-1.6, 1.6, -1.1, 1.1, 0.01).unwrap();
        let shape = ProbeShape::Region(OracleShape::Oval { r: 1.0 });
        let r = sample_convergence_probe(&shape, &[0.1, 0.05, 0.025], 2.0, 0.5, spec, 1).unwrap();
        assert!(r.bounds_hold && r.mask_monotone, "{r:?}");
        let diffs: Vec<f64> = r.entries.iter().map(|e| e.max_diff).collect();
        assert!(diffs[2] < diffs[0]);
    }

    #[test]
    fn region_membership() {
        let oval = OracleShape::Oval { r: 1.0 };
        assert!(region_contains(&oval, Point2::new(1.4, 0.0)));
        assert!(!region_contains(&oval, Point2::new(1.6, 0.0)));
        assert!(!region_contains(&oval, Point2::new(0.0, 1.01)));
        assert!(region_contains(&OracleShape::Rectangle { r: 1.0 }, Point2::new(-1.5, 1.0)));
    }

    fn small_set() -> impl Strategy<Value = PointSet2> {
        prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..12).prop_map(|v| v.into_iter().map(Point2::from).collect())
    }

    proptest! {
        #[test]
        fn hausdorff_is_a_metric(a in small_set(), b in small_set(), c in small_set()) {
            let ab = hausdorff_distance(&a, &b).unwrap();
            let ba = hausdorff_distance(&b, &a).unwrap();
            prop_assert_eq!(ab, ba);
            prop_assert!((ab - brute_hausdorff(&a, &b)).abs() <= 1e-12);
            let ac = hausdorff_distance(&a, &c).unwrap();
            let bc = hausdorff_distance(&b, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
            if ab == 0.0 {
                prop_assert_eq!(a.len(), b.len());
            }
        }

        #[test]
        fn jitter_moves_at_most_magnitude(a in small_set(), mag in 0.0..1.0f64, seed in any::<u64>()) {
            let j = perturb(&a, &PerturbationSpec::jitter(mag, seed)).unwrap();
            prop_assert!(hausdorff_distance(&a, &j).unwrap() <= mag + 1e-12);
        }
    }
}

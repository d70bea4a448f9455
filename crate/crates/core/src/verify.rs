//! Numerical checks of the implementation against the closed forms and the
//! inequalities of the theory, grouped into suites.
//!
//! Every check records the measured quantity, the bound it is held to and the
//! slack `bound - measured` (negative on failure).

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{boundary_cells, mask_to_points, BinaryMask2, GridSpec, Point2, PointSet2, ScalarField2};
use crate::lowtrans::{lower_transform_opening_trusted, LowerTransformBackend};
use crate::mam::{landscape_map, mam_at, mam_field, nearest_set, support_in_vlk_check, MamParams, MamResult};
use crate::oracles::{oracle_eval, oracle_minf, oracle_set, OracleShape, SetInput};
use crate::stability::{perturbation_stability_check, sample_convergence_probe, PerturbationSpec, ProbeShape};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Value the measurement is compared with, when it is a target rather
    /// than an upper bound.
    pub target: Option<f64>,
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

impl Check {
    /// Passes when `measured <= bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Check {
        let slack = bound - measured;
        Check { name: name.into(), measured, target: None, bound, slack, passed: slack >= 0.0 }
    }

    /// Passes when `|measured - target| <= tol`.
    pub fn near(name: impl Into<String>, measured: f64, target: f64, tol: f64) -> Check {
        let slack = tol - (measured - target).abs();
        Check { name: name.into(), measured, target: Some(target), bound: tol, slack, passed: slack >= 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u8,
    pub title: String,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CriterionReport {
    fn new(id: u8, title: &str, checks: Vec<Check>) -> Self {
        let passed = !checks.is_empty() && checks.iter().all(|c| c.passed);
        CriterionReport { id, title: title.to_string(), checks, passed }
    }

    /// The failing check with the smallest slack, if any.
    pub fn worst(&self) -> Option<&Check> {
        self.checks.iter().filter(|c| !c.passed).min_by(|a, b| a.slack.total_cmp(&b.slack))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Oracles,
    Bounds,
    Stability,
    Backends,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Oracles, Suite::Bounds, Suite::Stability, Suite::Backends];

    pub fn criteria(self) -> &'static [u8] {
        match self {
            Suite::Oracles => &[1, 2, 3, 4],
            Suite::Backends => &[5],
            Suite::Bounds => &[6, 7, 8, 10],
            Suite::Stability => &[9],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracles => "oracles",
            Suite::Bounds => "bounds",
            Suite::Stability => "stability",
            Suite::Backends => "backends",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Settings of the iterative evaluator compared in the backend suite.
    pub iterative: LowerTransformBackend,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, iterative: LowerTransformBackend::iterative() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
    pub passed: bool,
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let criteria = suite.criteria().iter().map(|&id| run_criterion(id, opts)).collect::<Result<Vec<_>>>()?;
    let passed = criteria.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, seed: opts.seed, criteria, passed })
}

/// Runs one numbered criterion (1 to 10).
pub fn run_criterion(id: u8, opts: &VerifyOptions) -> Result<CriterionReport> {
    match id {
        1 => two_point_exactness(),
        2 => interval_sharpness(),
        3 => four_point_heights(),
        4 => staircase_plateau(),
        5 => backend_equivalence(opts),
        6 => universal_bounds(),
        7 => gradient_bounds(),
        8 => support_and_halving(),
        9 => hausdorff_stability(opts.seed),
        10 => limit_probe(opts.seed),
        _ => Err(Error::InvalidParameter(format!("no criterion {id}"))),
    }
}

/// Analytic shapes with the window each is examined on, `(x0, x1, y0, y1)`.
pub fn corpus() -> Vec<(OracleShape, [f64; 4])> {
    let circle: Vec<Point2> = [0.3f64, 1.5, 2.6, 3.9, 5.1].iter().map(|t| Point2::new(t.cos(), t.sin())).collect();
    vec![
        (OracleShape::TwoPoint { alpha: 1.0 }, [-2.0, 2.0, -1.5, 1.5]),
        (OracleShape::IntervalComplement, [-1.5, 1.5, -0.5, 0.5]),
        (OracleShape::BallComplement { rho: 1.0 }, [-1.5, 1.5, -1.5, 1.5]),
        (OracleShape::FourPoint { b: 2.0, eps: 0.5 }, [-3.0, 3.0, -2.0, 2.0]),
        (OracleShape::Strip { r: 1.0 }, [-1.5, 2.5, -1.5, 1.5]),
        (OracleShape::Rectangle { r: 1.0 }, [-2.0, 2.0, -1.5, 1.5]),
        (OracleShape::Oval { r: 1.0 }, [-2.0, 2.0, -1.5, 1.5]),
        (OracleShape::Staircase { c: 1.0, periodic: false }, [-1.5, 2.5, -1.5, 2.5]),
        (OracleShape::Staircase { c: 0.5, periodic: true }, [-1.5, 1.5, -1.5, 1.5]),
        (OracleShape::CircleSubset { r0: 1.0, points: circle }, [-1.5, 1.5, -1.5, 1.5]),
    ]
}

fn window_spec(w: [f64; 4], h: f64) -> Result<GridSpec> {
    GridSpec::covering(w[0], w[1], w[2], w[3], h)
}

fn at(spec: &GridSpec, p: Point2) -> Result<usize> {
    let (i, j) = spec.nearest(p).ok_or_else(|| Error::InvalidParameter(format!("({}, {}) is off the grid", p.x, p.y)))?;
    Ok(spec.index(i, j))
}

fn trusted_value(r: &MamResult, spec: &GridSpec, p: Point2) -> Result<f64> {
    let k = at(spec, p)?;
    if !r.trusted.bits()[k] {
        return Err(Error::BorderInvalid { x: p.x, y: p.y, radius: 0.0 });
    }
    Ok(r.m_field.values()[k])
}

fn point_set(shape: &OracleShape) -> PointSet2 {
    shape.finite_set().expect("finite shape")
}

/// Largest `|M_λ - M_λ^oracle|` over trusted cells, and how many were compared.
fn oracle_sup_error(r: &MamResult, shape: &OracleShape, lambda: f64) -> Result<(f64, usize)> {
    let spec = *r.m_field.spec();
    let cells: Vec<usize> = (0..spec.len()).filter(|&k| r.trusted.bits()[k]).collect();
    let errs = cells
        .par_iter()
        .map(|&k| Ok((r.m_field.values()[k] - oracle_eval(shape, lambda, spec.world_at(k))?.mam).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok((errs.into_iter().fold(0.0, f64::max), cells.len()))
}

fn strip_spec(h: f64, half_rows: usize) -> Result<GridSpec> {
    let n = (3.0 / h).round() as usize;
    GridSpec::centered(Point2::ORIGIN, h, n, half_rows)
}

fn two_point_exactness() -> Result<CriterionReport> {
    let h = 1e-3;
    let spec = strip_spec(h, 20)?;
    let shape = OracleShape::TwoPoint { alpha: 1.0 };
    let k = point_set(&shape);
    let mut checks = Vec::new();
    for lambda in [0.5, 1.0, 4.0] {
        let r = mam_field(&k.clone().into(), spec, &MamParams::new(lambda))?;
        let (err, n) = oracle_sup_error(&r, &shape, lambda)?;
        checks.push(Check::at_most(
            format!("two-point sup error over {n} trusted cells, lambda={lambda}"),
            err,
            5.0 * h * (1.0 + lambda).powi(2),
        ));
        if lambda == 1.0 {
            let v = trusted_value(&r, &spec, Point2::ORIGIN)?;
            checks.push(Check::near("two-point branch height at the origin, lambda=1", v, 1.0, 5e-3));
        }
    }
    Ok(CriterionReport::new(1, "two-point exactness", checks))
}

fn interval_sharpness() -> Result<CriterionReport> {
    let h = 1e-3;
    let lambda = 1.0;
    let spec = strip_spec(h, 20)?;
    let SetInput::Mask(mask) = oracle_set(&OracleShape::IntervalComplement, spec)? else {
        return Err(Error::Unsupported("interval complement should be a mask".into()));
    };
    let r = mam_field(&mask.into(), spec, &MamParams::new(lambda))?;
    let centre = at(&spec, Point2::ORIGIN)?;
    let mut checks = vec![Check::near("lower transform at 0", r.lower.values()[centre], lambda / (1.0 + lambda), 2e-3)];
    // walk inwards from x = 1 along the centre row
    let (i0, j0) = spec.coords(centre);
    let gap_tol = 1e-2 * (1.0 + lambda);
    let mut transition = None;
    for i in (i0..spec.nx).rev() {
        let x = spec.world(i, j0).x;
        if x > 1.0 {
            continue;
        }
        let k = spec.index(i, j0);
        if r.trusted.bits()[k] && (r.dist2.values()[k] - r.lower.values()[k]).abs() > gap_tol {
            transition = Some(x);
            break;
        }
    }
    let x_t = transition.unwrap_or(f64::INFINITY);
    checks.push(Check::near(
        format!("first |x| with dist2 - lower > {gap_tol}"),
        x_t,
        1.0 / (1.0 + lambda),
        3.0 * h,
    ));
    Ok(CriterionReport::new(2, "interval-complement sharpness", checks))
}

/// Width of the run of cells with `m > τ` through `centre` along a grid line,
/// `τ = h²(1+λ)²/4`.
fn run_width(m: &ScalarField2, centre: (usize, usize), horizontal: bool, lambda: f64) -> f64 {
    let spec = m.spec();
    let h = spec.spacing;
    let tau = 0.25 * h * h * (1.0 + lambda).powi(2);
    let (i0, j0) = centre;
    let val = |t: isize| -> Option<f64> {
        let (i, j) = if horizontal { (i0 as isize + t, j0 as isize) } else { (i0 as isize, j0 as isize + t) };
        if i < 0 || j < 0 || i as usize >= spec.nx || j as usize >= spec.ny {
            None
        } else {
            Some(m.get(i as usize, j as usize))
        }
    };
    let mut count = 0usize;
    if val(0).is_some_and(|v| v > tau) {
        count += 1;
        for dir in [-1isize, 1] {
            let mut t = dir;
            while val(t).is_some_and(|v| v > tau) {
                count += 1;
                t += dir;
            }
        }
    }
    count as f64 * h
}

fn four_point_heights() -> Result<CriterionReport> {
    let (b, eps, lambda, h) = (2.0, 0.5, 4.0, 5e-3);
    let shape = OracleShape::FourPoint { b, eps };
    let spec = window_spec([-3.0, 3.0, -3.0, 3.0], h)?;
    let r = mam_field(&point_set(&shape).into(), spec, &MamParams::new(lambda))?;
    let l1 = 1.0 + lambda;
    let main_at = Point2::new(0.0, 1.5);
    let minor_at = Point2::new(1.0, 0.0);
    let checks = vec![
        Check::near("main branch height at (0, 1.5)", trusted_value(&r, &spec, main_at)?, b * b, 2e-2),
        Check::near("minor branch height at (1, 0)", trusted_value(&r, &spec, minor_at)?, (eps * b).powi(2), 2e-2),
        Check::near("Voronoi vertex height", trusted_value(&r, &spec, Point2::ORIGIN)?, b * b * (1.0 + eps * eps), 2e-2),
        Check::near(
            "main slab width across y = 1.5",
            run_width(&r.m_field, spec.nearest(main_at).unwrap(), true, lambda),
            2.0 * b / l1,
            5.0 * h,
        ),
        Check::near(
            "minor slab width across x = 1",
            run_width(&r.m_field, spec.nearest(minor_at).unwrap(), false, lambda),
            2.0 * eps * b / l1,
            5.0 * h,
        ),
    ];
    Ok(CriterionReport::new(3, "four-point heights", checks))
}

fn staircase_plateau() -> Result<CriterionReport> {
    let (c, lambda, h) = (1.0, 9.0, 5e-3);
    let shape = OracleShape::Staircase { c, periodic: false };
    let spec = window_spec([-1.5, 3.5, -1.5, 3.5], h)?;
    let SetInput::Mask(mask) = oracle_set(&shape, spec)? else {
        return Err(Error::Unsupported("staircase should be a mask".into()));
    };
    let boundary = mask_to_points(&boundary_cells(&mask))?;
    let r = mam_field(&mask.into(), spec, &MamParams::new(lambda))?;
    let m_inf = landscape_map(&boundary, Point2::new(0.5, 0.5), 1e-9)?;
    // diagonal cells beyond the step
    let diag: Vec<usize> = (0..spec.len())
        .filter(|&k| {
            let p = spec.world_at(k);
            r.trusted.bits()[k] && (p.x - p.y).abs() < 0.5 * h && p.x + p.y >= 3.0 * c
        })
        .collect();
    let above = |t: f64| {
        (0..spec.len())
            .filter(|&k| {
                let p = spec.world_at(k);
                r.trusted.bits()[k] && p.x + p.y >= 3.0 * c && r.m_field.values()[k] >= t
            })
            .count()
    };
    let kept = diag.iter().filter(|&&k| r.m_field.values()[k] >= 0.4).count();
    let checks = vec![
        Check::near("M at (2, 2)", trusted_value(&r, &spec, Point2::new(2.0, 2.0))?, 0.5 * c * c, 2e-2),
        Check::near("landscape map at (0.5, 0.5)", m_inf, 0.125 * c * c, 2e-2),
        Check::at_most("cells beyond the step at threshold 0.6", above(0.6) as f64, 0.0),
        Check::at_most(
            format!("diagonal cells lost at threshold 0.4 (of {})", diag.len()),
            (diag.len() - kept) as f64,
            if diag.is_empty() { -1.0 } else { 0.0 },
        ),
    ];
    Ok(CriterionReport::new(4, "staircase plateau", checks))
}

/// Union of a few seeded random discs on `spec`.
pub fn random_disc_mask(spec: GridSpec, seed: u64) -> Result<BinaryMask2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (Point2::new(spec.origin_x, spec.origin_y), Point2::new(spec.x_max(), spec.y_max()));
    let span = (hi.x - lo.x).min(hi.y - lo.y);
    let n = rng.gen_range(2..=5);
    let discs: Vec<(Point2, f64)> = (0..n)
        .map(|_| {
            let c = Point2::new(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
            (c, rng.gen_range(0.03..0.15) * span)
        })
        .collect();
    let mut m = BinaryMask2::from_fn(spec, |p| discs.iter().any(|&(c, r)| p.dist(c) <= r))?;
    if !m.any() {
        m = BinaryMask2::from_fn(spec, |p| p.dist(discs[0].0) <= spec.spacing)?;
    }
    Ok(m)
}

/// Largest `|opening - iterative|` over cells the opening trusts.
pub fn backend_gap(dist2: &ScalarField2, lambda: f64, iterative: &LowerTransformBackend) -> Result<f64> {
    let t = lower_transform_opening_trusted(dist2, lambda)?;
    let it = iterative.apply(dist2, lambda)?;
    Ok(t.lower
        .values()
        .iter()
        .zip(it.values())
        .zip(t.trusted.bits())
        .filter(|(_, &ok)| ok)
        .map(|((a, b), _)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn backend_equivalence(opts: &VerifyOptions) -> Result<CriterionReport> {
    let h = 0.02;
    let mut fields: Vec<(String, ScalarField2)> = Vec::new();
    for (shape, w) in corpus() {
        let spec = window_spec(w, h)?;
        let set = oracle_set(&shape, spec)?;
        fields.push((shape.name().to_string(), crate::mam::set_dist2(&set, spec)?));
    }
    let mspec = window_spec([-1.0, 1.0, -1.0, 1.0], h)?;
    for s in 0..20u64 {
        let seed = opts.seed.wrapping_mul(1000).wrapping_add(s);
        let m = random_disc_mask(mspec, seed)?;
        fields.push((format!("random mask seed={seed}"), crate::edt::edt_mask(&m)?));
    }
    let mut checks = Vec::new();
    for lambda in [0.5, 2.0, 8.0] {
        let tol = 5.0 * h * (1.0 + lambda);
        let gaps = fields
            .par_iter()
            .map(|(_, f)| backend_gap(f, lambda, &opts.iterative))
            .collect::<Result<Vec<f64>>>()?;
        for ((name, _), gap) in fields.iter().zip(gaps) {
            checks.push(Check::at_most(format!("{name}, lambda={lambda}"), gap, tol));
        }
    }
    Ok(CriterionReport::new(5, "backend equivalence", checks))
}

fn discretized(shape: &OracleShape, spec: GridSpec) -> Result<(SetInput, Option<PointSet2>)> {
    let set = oracle_set(shape, spec)?;
    let pts = match &set {
        SetInput::Points(p) => Some(p.clone()),
        SetInput::Mask(_) => None,
    };
    Ok((set, pts))
}

fn universal_bounds() -> Result<CriterionReport> {
    let h = 0.01;
    let mut checks = Vec::new();
    for (shape, w) in corpus() {
        let spec = window_spec(w, h)?;
        let (set, pts) = discretized(&shape, spec)?;
        for lambda in [0.5, 2.0, 8.0] {
            let tol = 5.0 * h * (1.0 + lambda);
            let r = mam_field(&set, spec, &MamParams::new(lambda))?;
            let cells: Vec<usize> = (0..spec.len()).filter(|&k| r.trusted.bits()[k]).collect();
            let m = r.m_field.values();
            let d = r.dist2.values();
            let min_m = cells.iter().map(|&k| m[k]).fold(f64::INFINITY, f64::min);
            let over = cells.iter().map(|&k| m[k] - d[k]).fold(f64::NEG_INFINITY, f64::max);
            // equidistant cells are those where the landscape map is positive
            let deficit = cells
                .par_iter()
                .map(|&k| {
                    let x = spec.world_at(k);
                    let minf = match &pts {
                        Some(p) => landscape_map(p, x, 1e-9)?,
                        None => oracle_minf(&shape, x)?,
                    };
                    Ok(if minf > 0.0 { minf - m[k] } else { f64::NEG_INFINITY })
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            let name = shape.name();
            checks.push(Check::at_most(format!("{name} -min M, lambda={lambda}"), -min_m, 0.0));
            checks.push(Check::at_most(format!("{name} max(M - dist2), lambda={lambda}"), over, tol));
            checks.push(Check::at_most(format!("{name} max(M_inf - M) at equidistant cells, lambda={lambda}"), deficit, tol));
        }
    }
    Ok(CriterionReport::new(6, "universal bounds", checks))
}

/// Cells between samples compared in the gradient Lipschitz check. The grid
/// opening is accurate to `O(λh²)` in value, which is `O(λ / m²)` in second
/// differences taken `m` cells apart, so unit steps would mostly measure the
/// grid.
pub const LIPSCHITZ_STEP: usize = 8;

/// Central-difference gradient with step `m` cells at every cell whose stencil
/// is trusted.
fn fd_gradient(u: &ScalarField2, trusted: &BinaryMask2, m: usize) -> Vec<Option<Point2>> {
    let spec = *u.spec();
    let (v, t) = (u.values(), trusted.bits());
    let s = 2.0 * m as f64 * spec.spacing;
    (0..spec.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = spec.coords(k);
            if i < m || j < m || i + m >= spec.nx || j + m >= spec.ny {
                return None;
            }
            let idx = [spec.index(i + m, j), spec.index(i - m, j), spec.index(i, j + m), spec.index(i, j - m)];
            if !t[k] || idx.iter().any(|&q| !t[q]) {
                return None;
            }
            Some(Point2::new((v[idx[0]] - v[idx[1]]) / s, (v[idx[2]] - v[idx[3]]) / s))
        })
        .collect()
}

/// `max(|D̂u|² - 4u)` with unit central differences, and the largest difference
/// quotient `|D̂u(x) - D̂u(y)| / |x - y|` over pairs `LIPSCHITZ_STEP` cells apart
/// along the axes and diagonals, with gradients taken at the same step.
pub fn gradient_stats(lower: &ScalarField2, trusted: &BinaryMask2) -> (f64, f64) {
    let spec = *lower.spec();
    let u = lower.values();
    let ineq = fd_gradient(lower, trusted, 1)
        .iter()
        .enumerate()
        .filter_map(|(k, g)| g.map(|g| g.norm2() - 4.0 * u[k]))
        .fold(f64::NEG_INFINITY, f64::max);
    let m = LIPSCHITZ_STEP;
    let grads = fd_gradient(lower, trusted, m);
    let sep = m as f64 * spec.spacing;
    let lip = (0..spec.len())
        .into_par_iter()
        .filter_map(|k| {
            let g = grads[k]?;
            let (i, j) = spec.coords(k);
            let mut best: f64 = 0.0;
            for (di, dj) in [(m, 0), (0, m), (m, m)] {
                if i + di >= spec.nx || j + dj >= spec.ny {
                    continue;
                }
                if let Some(g2) = grads[spec.index(i + di, j + dj)] {
                    let d = if di > 0 && dj > 0 { sep * std::f64::consts::SQRT_2 } else { sep };
                    best = best.max(g2.dist(g) / d);
                }
            }
            Some(best)
        })
        .reduce(|| 0.0, f64::max);
    (ineq, lip)
}

fn gradient_bounds() -> Result<CriterionReport> {
    let h: f64 = 0.01;
    let mut checks = Vec::new();
    for (shape, w) in corpus() {
        let spec = window_spec(w, h)?;
        let (set, _) = discretized(&shape, spec)?;
        let dist2 = crate::mam::set_dist2(&set, spec)?;
        for lambda in [0.5f64, 2.0, 8.0] {
            let tol = 20.0 * h * (1.0 + lambda).powi(2);
            let t = lower_transform_opening_trusted(&dist2, lambda)?;
            let (ineq, lip) = gradient_stats(&t.lower, &t.trusted);
            let name = shape.name();
            checks.push(Check::at_most(format!("{name} max(|DC|^2 - 4C), lambda={lambda}"), ineq, tol));
            checks.push(Check::at_most(
                format!("{name} gradient difference quotient, lambda={lambda}"),
                lip,
                2.0 * lambda.max(1.0) + tol,
            ));
        }
    }
    Ok(CriterionReport::new(7, "gradient inequality and Lipschitz bound", checks))
}

fn support_and_halving() -> Result<CriterionReport> {
    let mut checks = Vec::new();
    // the support threshold 10h(1+λ)² must stay below the branch heights (1 to 4)
    let h = 5e-3;
    let shapes = [
        (OracleShape::TwoPoint { alpha: 1.0 }, [-2.0, 2.0, -1.5, 1.5]),
        (OracleShape::FourPoint { b: 2.0, eps: 0.5 }, [-3.0, 3.0, -2.0, 2.0]),
        (OracleShape::Rectangle { r: 1.0 }, [-2.0, 2.0, -1.5, 1.5]),
        (OracleShape::Staircase { c: 1.0, periodic: false }, [-1.5, 2.5, -1.5, 2.5]),
    ];
    for (shape, w) in shapes {
        for lambda in [1.0, 2.0] {
            let r = support_in_vlk_check(&shape, lambda, window_spec(w, h)?)?;
            checks.push(Check::at_most(
                format!("{} support outside V (cells of {}), lambda={lambda}", shape.name(), r.support_cells),
                r.violations as f64,
                if r.support_cells == 0 { -1.0 } else { 0.0 },
            ));
        }
    }
    // support width 2α/(1+λ) of the two-point map, for λ and 2λ
    let h = 5e-3;
    let spec = strip_spec(h, 10)?;
    let k = point_set(&OracleShape::TwoPoint { alpha: 1.0 });
    let centre = spec.nearest(Point2::ORIGIN).unwrap();
    let mut widths = Vec::new();
    for lambda in [8.0, 16.0] {
        let r = mam_field(&k.clone().into(), spec, &MamParams::new(lambda))?;
        let w = run_width(&r.m_field, centre, true, lambda);
        checks.push(Check::near(format!("two-point support width, lambda={lambda}"), w, 2.0 / (1.0 + lambda), 5.0 * h));
        widths.push(w);
    }
    checks.push(Check::near("support width after doubling lambda 8 -> 16", widths[1], 0.5 * widths[0], 5.0 * h));
    Ok(CriterionReport::new(8, "tight approximation and support", checks))
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, half: f64) -> PointSet2 {
    (0..n).map(|_| Point2::new(rng.gen_range(-half..half), rng.gen_range(-half..half))).collect()
}

fn hausdorff_stability(seed: u64) -> Result<CriterionReport> {
    let mut checks = Vec::new();
    let spec = window_spec([-2.0, 2.0, -2.0, 2.0], 0.02)?;
    for lambda in [0.5, 2.0, 8.0] {
        let reports = (0..100u64)
            .into_par_iter()
            .map(|t| {
                let s = seed.wrapping_mul(1_000_003).wrapping_add(t);
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let n = rng.gen_range(2..=8);
                let k = random_points(&mut rng, n, 1.0);
                perturbation_stability_check(&k, &PerturbationSpec::jitter(0.05, s), lambda, spec)
            })
            .collect::<Result<Vec<_>>>()?;
        let failures = reports.iter().filter(|r| !r.passed).count();
        let worst = reports.iter().map(|r| r.lower.worst_slack.min(r.mam.worst_slack)).fold(f64::INFINITY, f64::min);
        checks.push(Check::at_most(format!("failing jitter pairs of 100, lambda={lambda}"), failures as f64, 0.0));
        checks.push(Check::at_most(format!("negative worst slack over 100 pairs, lambda={lambda}"), -worst, 0.0));
    }
    let b = 2.0;
    let spec = window_spec([-2.5, 2.5, -2.0, 2.0], 5e-3)?;
    let r = sample_convergence_probe(&ProbeShape::ParallelLines { b }, &[0.4, 0.2, 0.1], 10.0, 2.0, spec, seed)?;
    for e in &r.entries {
        let (peak, pred) = (e.minor_peak.unwrap_or(0.0), e.minor_prediction.unwrap_or(1.0));
        checks.push(Check::near(format!("minor peak / (eps b)^2 at eps={}", e.eps), peak / pred, 1.25, 0.75));
        checks.push(Check::at_most(format!("stability bound excess at eps={}", e.eps), -e.worst_slack, 0.0));
    }
    let changes: Vec<f64> = r.entries.iter().filter_map(|e| e.mask_change.map(|c| c as f64)).collect();
    for w in changes.windows(2) {
        checks.push(Check::at_most("thresholded mask change as eps halves", w[1], w[0]));
    }
    checks.push(Check::at_most("final mask cells off the mid-line slab", r.slab_mismatch.unwrap_or(usize::MAX) as f64, 0.0));
    Ok(CriterionReport::new(9, "Hausdorff stability", checks))
}

/// A point on the Voronoi edge of two points of `k`, or `None` if the random
/// bisector point is closer to a third point.
fn voronoi_probe(k: &PointSet2, rng: &mut ChaCha8Rng) -> Option<Point2> {
    let n = k.len();
    let a = rng.gen_range(0..n);
    let mut b = rng.gen_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let (p, q) = (k.points()[a], k.points()[b]);
    let m = (p + q) * 0.5;
    let u = q - p;
    let perp = Point2::new(-u.y, u.x) * (1.0 / u.norm());
    let x = m + perp * rng.gen_range(-2.0..2.0);
    let near = nearest_set(k, x, 1e-9);
    let ok = near.len() >= 2 && near.points().contains(&p) && near.points().contains(&q) && k.dist2_to(x) > 0.01;
    ok.then_some(x)
}

struct ProbeRow {
    err: f64,
    mam: f64,
    d2: f64,
    h: f64,
    lambda: f64,
}

fn limit_probe(seed: u64) -> Result<CriterionReport> {
    let lambdas = [4.0, 16.0, 64.0];
    let mut bound_excess = f64::NEG_INFINITY;
    let mut upper_excess = f64::NEG_INFINITY;
    let mut monotone_excess = f64::NEG_INFINITY;
    let mut probes = 0;
    for s in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(7919).wrapping_add(s));
        let k = random_points(&mut rng, 5, 1.0);
        let mut xs = Vec::new();
        let mut tries = 0;
        while xs.len() < 20 && tries < 10_000 {
            tries += 1;
            if let Some(x) = voronoi_probe(&k, &mut rng) {
                xs.push(x);
            }
        }
        let rows = xs
            .par_iter()
            .map(|&x| {
                let d2 = k.dist2_to(x);
                let h = d2.sqrt() / 400.0;
                let m_inf = landscape_map(&k, x, 1e-9)?;
                let mut rows = Vec::new();
                for &lambda in &lambdas {
                    let v = mam_at(&k, x, lambda, h)?;
                    rows.push(ProbeRow { err: (v.mam - m_inf).abs(), mam: v.mam, d2, h, lambda });
                }
                Ok(rows)
            })
            .collect::<Result<Vec<_>>>()?;
        for errs in rows {
            probes += 1;
            for r in &errs {
                let tol = 5.0 * r.h * (1.0 + r.lambda);
                upper_excess = upper_excess.max(r.mam - r.d2 - tol);
                bound_excess = bound_excess.max(r.err - r.d2 / (1.0 + r.lambda) - tol);
            }
            for w in errs.windows(2) {
                let tol = 5.0 * w[1].h * (1.0 + w[1].lambda);
                monotone_excess = monotone_excess.max(w[1].err - w[0].err - tol);
            }
        }
    }
    let checks = vec![
        Check::at_most("probe points short of 200", 200.0 - probes as f64, 0.0),
        Check::at_most("max(M - dist2) at the probes", upper_excess, 0.0),
        Check::at_most("max(|M - M_inf| - dist2/(1+lambda) - 5h(1+lambda))", bound_excess, 0.0),
        Check::at_most("max increase of |M - M_inf| as lambda grows", monotone_excess, 0.0),
    ];
    Ok(CriterionReport::new(10, "limit theorem probe", checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_semantics() {
        let c = Check::at_most("a", 1.0, 1.5);
        assert!(c.passed);
        assert_eq!(c.slack, 0.5);
        let c = Check::at_most("a", 2.0, 1.5);
        assert!(!c.passed);
        let c = Check::near("b", 0.98, 1.0, 0.01);
        assert!(!c.passed);
        assert!((c.slack + 0.01).abs() < 1e-12);
        assert!(Check::near("b", 1.005, 1.0, 0.01).passed);
        assert!(!Check::at_most("nan", f64::NAN, 1.0).passed);
    }

    #[test]
    fn criterion_needs_a_passing_check() {
        assert!(!CriterionReport::new(1, "x", vec![]).passed);
        let r = CriterionReport::new(1, "x", vec![Check::at_most("a", 3.0, 1.0), Check::at_most("b", 2.0, 1.0)]);
        assert!(!r.passed);
        assert_eq!(r.worst().unwrap().name, "a");
    }

    #[test]
    fn suites_parse_and_cover_criteria() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{s}\""));
        }
        assert!("all".parse::<Suite>().is_err());
        let mut ids: Vec<u8> = Suite::ALL.iter().flat_map(|s| s.criteria().iter().copied()).collect();
        ids.sort_unstable();
        assert_eq!(ids, (1..=10).collect::<Vec<_>>());
        assert!(run_criterion(0, &VerifyOptions::default()).is_err());
        assert!(run_criterion(11, &VerifyOptions::default()).is_err());
    }

    #[test]
    fn two_point_criterion_passes() {
        let r = run_criterion(1, &VerifyOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.worst());
    }

    #[test]
    fn staircase_criterion_passes() {
        let r = run_criterion(4, &VerifyOptions::default()).unwrap();
        assert!(r.passed, "{:?}", r.worst());
    }

    #[test]
    fn finite_difference_gradient_of_a_paraboloid() {
        let spec = GridSpec::new(-1.0, -1.0, 0.05, 41, 41).unwrap();
        let u = ScalarField2::from_fn(spec, |p| p.norm2()).unwrap();
        let trusted = BinaryMask2::filled(spec, true).unwrap();
        let (ineq, lip) = gradient_stats(&u, &trusted);
        // |Du|^2 = 4u exactly, central differences are exact on quadratics
        assert!(ineq.abs() < 1e-9, "{ineq}");
        assert!((lip - 2.0).abs() < 1e-9, "{lip}");
    }

    #[test]
    fn random_masks_are_seeded() {
        let spec = GridSpec::new(-1.0, -1.0, 0.05, 41, 41).unwrap();
        let a = random_disc_mask(spec, 4).unwrap();
        assert_eq!(a, random_disc_mask(spec, 4).unwrap());
        assert_ne!(a, random_disc_mask(spec, 5).unwrap());
        assert!(a.any());
    }
}

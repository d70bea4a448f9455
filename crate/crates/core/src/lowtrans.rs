//! Lower compensated convex transform `C^l_λ(f) = co[f + λ|·|²] - λ|·|²`.
//!
//! Two independent evaluators are provided: the quadratic morphological opening
//! `(f ⊖ b_λ) ⊕ b_λ`, which is the production path, and an iterative grid convex
//! envelope that serves as a cross-check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::edt::{quad_dilate_arg, quad_erode, quad_erode_arg};
use crate::error::{Error, Result};
use crate::fields::{BinaryMask2, GridSpec, Point2, ScalarField2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BackendKind {
    Opening,
    IterativeEnvelope,
}

/// Evaluator choice for the lower transform.
///
/// `tol` and `max_iters` only affect the iterative envelope. `None` selects the
/// defaults `1e-10 * (max g - min g)` and `10 * (nx + ny)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerTransformBackend {
    pub kind: BackendKind,
    pub tol: Option<f64>,
    pub max_iters: Option<usize>,
}

impl Default for LowerTransformBackend {
    fn default() -> Self {
        LowerTransformBackend::opening()
    }
}

impl LowerTransformBackend {
    pub fn opening() -> Self {
        LowerTransformBackend { kind: BackendKind::Opening, tol: None, max_iters: None }
    }

    pub fn iterative() -> Self {
        LowerTransformBackend { kind: BackendKind::IterativeEnvelope, tol: None, max_iters: None }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = Some(tol);
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = Some(max_iters);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("tol must be > 0, got {t}")));
            }
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidParameter("max_iters must be >= 1".into()));
        }
        Ok(())
    }

    /// `C^l_λ(f)` with this backend.
    pub fn apply(&self, f: &ScalarField2, lambda: f64) -> Result<ScalarField2> {
        self.validate()?;
        match self.kind {
            BackendKind::Opening => lower_transform_opening(f, lambda),
            BackendKind::IterativeEnvelope => lower_transform_iterative(f, lambda, self),
        }
    }
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")))
    }
}

/// `C^l_λ(f)` as the quadratic opening `(f ⊖ b_λ) ⊕ b_λ`.
pub fn lower_transform_opening(f: &ScalarField2, lambda: f64) -> Result<ScalarField2> {
    check_lambda(lambda)?;
    let eroded = quad_erode(f, lambda)?;
    let (opened, _) = quad_dilate_arg(&eroded, lambda)?;
    clamp_below(opened, f)
}

// The opening never exceeds f; this only removes round-off.
fn clamp_below(opened: ScalarField2, f: &ScalarField2) -> Result<ScalarField2> {
    opened.zip_map(f, f64::min)
}

/// Opening together with the cells whose value does not depend on the grid
/// boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct TrustedOpening {
    pub lower: ScalarField2,
    pub trusted: BinaryMask2,
}

/// Like [`lower_transform_opening`], and also flags which cells can be trusted.
///
/// A cell is trusted when the apex of its supporting parabola and that apex's
/// contact point both lie at least one cell away from the grid edge. The
/// dilated function `y -> (f ⊖ b_λ)(y) - λ|x - y|²` is concave in `y`, so an
/// interior maximum on the box is the maximum over the whole plane, and the
/// truncation of the grid cannot have changed the value.
pub fn lower_transform_opening_trusted(f: &ScalarField2, lambda: f64) -> Result<TrustedOpening> {
    check_lambda(lambda)?;
    let spec = *f.spec();
    let (eroded, emin) = quad_erode_arg(f, lambda)?;
    let (opened, dmax) = quad_dilate_arg(&eroded, lambda)?;
    let interior = |k: usize| {
        let (i, j) = spec.coords(k);
        spec.border_distance(i, j) >= 1
    };
    let bits = dmax
        .par_iter()
        .map(|&apex| {
            let apex = apex as usize;
            interior(apex) && interior(emin[apex] as usize)
        })
        .collect();
    Ok(TrustedOpening { lower: clamp_below(opened, f)?, trusted: BinaryMask2::new(spec, bits)? })
}

/// Smallest `m` such that every cell at Chebyshev distance `>= m` from the grid
/// edge is trusted.
pub fn border_margin(trusted: &BinaryMask2) -> usize {
    let spec = trusted.spec();
    let mut margin = 0;
    for k in 0..spec.len() {
        if !trusted.bits()[k] {
            let (i, j) = spec.coords(k);
            margin = margin.max(spec.border_distance(i, j) + 1);
        }
    }
    margin
}

const STENCIL: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Largest grid function below `g` that is convex along the four stencil
/// directions (axes and diagonals), by Jacobi sweeps
/// `u <- min(g, min_d (u(x + d) + u(x - d)) / 2)` starting from `u = g`.
///
/// Besides unit steps, each sweep also compares against chords of length
/// 2, 4, 8, ... in the same directions. Convexity along a lattice line already
/// implies every longer chord inequality, so the fixed point is unchanged; the
/// longer chords only carry information across the grid in fewer sweeps.
pub fn convex_envelope_grid(g: &ScalarField2, cfg: &LowerTransformBackend) -> Result<ScalarField2> {
    cfg.validate()?;
    let spec = *g.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let range = g.max() - g.min();
    let tol = cfg.tol.unwrap_or((1e-10 * range).max(f64::MIN_POSITIVE));
    let max_iters = cfg.max_iters.unwrap_or(10 * (nx + ny));

    let mut steps = Vec::new();
    let mut k = 1isize;
    while (k as usize) < nx.max(ny) {
        steps.push(k);
        k *= 2;
    }

    let gv = g.values();
    let mut u = gv.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iters {
        let cur = &u;
        residual = next
            .par_chunks_mut(nx)
            .enumerate()
            .map(|(j, row)| {
                let mut change: f64 = 0.0;
                for (i, out) in row.iter_mut().enumerate() {
                    let idx = j * nx + i;
                    let mut best = cur[idx].min(gv[idx]);
                    for &(dx, dy) in STENCIL.iter() {
                        for &s in steps.iter() {
                            let (ox, oy) = (dx * s, dy * s);
                            let (ia, ja) = (i as isize + ox, j as isize + oy);
                            let (ib, jb) = (i as isize - ox, j as isize - oy);
                            if ia < 0 || ib < 0 || ja < 0 || jb < 0 {
                                continue;
                            }
                            let (ia, ja, ib, jb) = (ia as usize, ja as usize, ib as usize, jb as usize);
                            if ia >= nx || ib >= nx || ja >= ny || jb >= ny {
                                continue;
                            }
                            let avg = 0.5 * (cur[ja * nx + ia] + cur[jb * nx + ib]);
                            if avg < best {
                                best = avg;
                            }
                        }
                    }
                    change = change.max(cur[idx] - best);
                    *out = best;
                }
                change
            })
            .reduce(|| 0.0, f64::max);
        std::mem::swap(&mut u, &mut next);
        if residual <= tol {
            return ScalarField2::from_values(spec, u);
        }
    }
    Err(Error::NoConvergence { iters: max_iters, residual })
}

/// `|x|²` with `x` measured from the grid's first sample.
fn quadratic_weight(spec: &GridSpec) -> impl Fn(usize) -> f64 + '_ {
    move |k| {
        let (i, j) = spec.coords(k);
        let (x, y) = (i as f64 * spec.spacing, j as f64 * spec.spacing);
        x * x + y * y
    }
}

/// `co[f + λ|·|²] - λ|·|²` through [`convex_envelope_grid`].
pub fn lower_transform_iterative(
    f: &ScalarField2,
    lambda: f64,
    cfg: &LowerTransformBackend,
) -> Result<ScalarField2> {
    check_lambda(lambda)?;
    let spec = *f.spec();
    let w = quadratic_weight(&spec);
    let lifted: Vec<f64> = f.values().iter().enumerate().map(|(k, v)| v + lambda * w(k)).collect();
    let env = convex_envelope_grid(&ScalarField2::from_values(spec, lifted)?, cfg)?;
    let vals = env
        .values()
        .iter()
        .zip(f.values())
        .enumerate()
        .map(|(k, (e, fv))| (e - lambda * w(k)).min(*fv))
        .collect();
    ScalarField2::from_values(spec, vals)
}

/// Radius `2 dist / λ` of the ball that determines `C^l_λ(dist²)` at a point.
pub fn locality_radius(dist_at_x: f64, lambda: f64) -> f64 {
    2.0 * dist_at_x / lambda
}

/// Extra cells added around the locality window.
const WINDOW_MARGIN: usize = 2;

/// `C^l_λ(f)` at the sample nearest to `x`, computed by an opening on the
/// square window that covers the locality ball.
///
/// `distfield` holds `dist²(·; K)` on the same grid and sets the window radius.
pub fn lower_transform_at(f: &ScalarField2, distfield: &ScalarField2, lambda: f64, x: Point2) -> Result<f64> {
    check_lambda(lambda)?;
    f.check_same_grid(distfield)?;
    let spec = *f.spec();
    let (i, j) = spec.nearest(x).ok_or(Error::BorderInvalid { x: x.x, y: x.y, radius: 0.0 })?;
    let radius = locality_radius(distfield.get(i, j).max(0.0).sqrt(), lambda);
    if radius < spec.spacing {
        return Ok(f.get(i, j));
    }
    let half = (radius / spec.spacing).ceil() as usize + WINDOW_MARGIN;
    if i < half || j < half || i + half >= spec.nx || j + half >= spec.ny {
        return Err(Error::BorderInvalid { x: x.x, y: x.y, radius });
    }
    let window = f.window(i - half, j - half, 2 * half + 1, 2 * half + 1)?;
    let lower = lower_transform_opening(&window, lambda)?;
    Ok(lower.get(half, half))
}

//! Squared Euclidean distance transforms and quadratic erosion/dilation.
//!
//! Everything here is built on one primitive: the lower envelope of the
//! parabolas `q -> f[p] + a (q - p)^2` over a 1-D row of samples, computed in
//! linear time with the Felzenszwalb–Huttenlocher sweep. The 2-D transforms are
//! a row pass, a transpose, a second row pass and a transpose back.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{mask_to_points, BinaryMask2, GridSpec, Point2, PointSet2, ScalarField2};

/// Point sets up to this size get the brute-force distance transform.
pub const BRUTE_FORCE_POINTS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MorphKind {
    Erode,
    Dilate,
}

/// Erosion or dilation by the structuring function `-lambda |x|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadTransformKind {
    pub kind: MorphKind,
    pub lambda: f64,
}

impl QuadTransformKind {
    pub fn new(kind: MorphKind, lambda: f64) -> Result<Self> {
        let ok = match kind {
            MorphKind::Erode => lambda >= 0.0,
            MorphKind::Dilate => lambda > 0.0,
        };
        if !ok || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
        }
        Ok(QuadTransformKind { kind, lambda })
    }

    pub fn apply(&self, f: &ScalarField2) -> Result<ScalarField2> {
        match self.kind {
            MorphKind::Erode => quad_erode(f, self.lambda),
            MorphKind::Dilate => quad_dilate(f, self.lambda),
        }
    }
}

struct Scratch {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Scratch {
    fn new() -> Self {
        Scratch { v: Vec::new(), z: Vec::new() }
    }
}

/// `out[q] = min_p f[p] + a (q - p)^2` over the finite entries of `f`.
/// Rows without finite entries come back as `+inf`.
fn envelope_row(f: &[f64], a: f64, out: &mut [f64], arg: Option<&mut [u32]>, s: &mut Scratch) {
    let (v, z) = (&mut s.v, &mut s.z);
    v.clear();
    z.clear();
    for (q, &fq) in f.iter().enumerate() {
        if fq == f64::INFINITY {
            continue;
        }
        let qf = q as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let pf = p as f64;
                    let x = ((fq - f[p]) + a * (qf * qf - pf * pf)) / (2.0 * a * (qf - pf));
                    if x <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(x);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        out.fill(f64::INFINITY);
        if let Some(arg) = arg {
            arg.fill(u32::MAX);
        }
        return;
    }
    let mut k = 0;
    let mut arg = arg;
    for (q, o) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < z.len() && z[k + 1] < qf {
            k += 1;
        }
        let mut p = v[k];
        let d = qf - p as f64;
        *o = f[p] + a * d * d;
        // breakpoints carry round-off; the sample itself is always a candidate
        if f[q] < *o {
            *o = f[q];
            p = q;
        }
        if let Some(arg) = arg.as_deref_mut() {
            arg[q] = p as u32;
        }
    }
}

fn rows_pass(data: &[f64], width: usize, a: f64, out: &mut [f64], arg: Option<&mut [u32]>) {
    match arg {
        Some(arg) => out
            .par_chunks_mut(width)
            .zip(arg.par_chunks_mut(width))
            .zip(data.par_chunks(width))
            .for_each_init(Scratch::new, |s, ((o, g), d)| envelope_row(d, a, o, Some(g), s)),
        None => out
            .par_chunks_mut(width)
            .zip(data.par_chunks(width))
            .for_each_init(Scratch::new, |s, (o, d)| envelope_row(d, a, o, None, s)),
    }
}

const TILE: usize = 32;

/// Transpose of a row-major `rows x cols` matrix.
fn transpose<T: Copy + Send + Sync + Default>(src: &[T], rows: usize, cols: usize) -> Vec<T> {
    let mut dst = vec![T::default(); src.len()];
    dst.par_chunks_mut(rows * TILE).enumerate().for_each(|(b, chunk)| {
        let c0 = b * TILE;
        let nc = chunk.len() / rows;
        for r0 in (0..rows).step_by(TILE) {
            let r1 = (r0 + TILE).min(rows);
            for dc in 0..nc {
                let c = c0 + dc;
                let line = &mut chunk[dc * rows..(dc + 1) * rows];
                for r in r0..r1 {
                    line[r] = src[r * cols + c];
                }
            }
        }
    });
    dst
}

/// Separable 2-D envelope `min_y f(y) + a |x - y|^2` in index units, with the
/// flat index of a minimizer when `track` is set.
fn envelope_2d(f: &[f64], nx: usize, ny: usize, a: f64, track: bool) -> (Vec<f64>, Option<Vec<u32>>) {
    let n = nx * ny;
    let mut pass1 = vec![0.0; n];
    let mut arg1 = track.then(|| vec![0u32; n]);
    rows_pass(f, nx, a, &mut pass1, arg1.as_deref_mut());

    let t = transpose(&pass1, ny, nx);
    let mut pass2 = vec![0.0; n];
    let mut arg2 = track.then(|| vec![0u32; n]);
    rows_pass(&t, ny, a, &mut pass2, arg2.as_deref_mut());
    let out = transpose(&pass2, nx, ny);

    let arg = match (arg1, arg2) {
        (Some(a1), Some(a2)) => {
            let rows = transpose(&a2, nx, ny);
            let combined = rows
                .par_iter()
                .enumerate()
                .map(|(k, &jr)| {
                    let i = k % nx;
                    let src = jr as usize * nx + i;
                    (jr as usize * nx + a1[src] as usize) as u32
                })
                .collect();
            Some(combined)
        }
        _ => None,
    };
    (out, arg)
}

fn check_lambda(lambda: f64, allow_zero: bool) -> Result<()> {
    let ok = lambda.is_finite() && (lambda > 0.0 || (allow_zero && lambda == 0.0));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")))
    }
}

/// Quadratic erosion `min_y f(y) + lambda |x - y|^2` over the grid samples,
/// together with the flat index of a minimizing sample for every cell.
pub fn quad_erode_arg(f: &ScalarField2, lambda: f64) -> Result<(ScalarField2, Vec<u32>)> {
    check_lambda(lambda, true)?;
    let spec = *f.spec();
    if lambda == 0.0 {
        let (k, m) = f
            .values()
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (k, &v)| if v < acc.1 { (k, v) } else { acc });
        return Ok((
            ScalarField2::from_values_unchecked(spec, vec![m; spec.len()]),
            vec![k as u32; spec.len()],
        ));
    }
    let a = lambda * spec.spacing * spec.spacing;
    let (vals, arg) = envelope_2d(f.values(), spec.nx, spec.ny, a, true);
    Ok((ScalarField2::from_values(spec, vals)?, arg.unwrap()))
}

/// Quadratic dilation `max_y g(y) - lambda |x - y|^2` with the flat index of a
/// maximizing sample for every cell.
pub fn quad_dilate_arg(g: &ScalarField2, lambda: f64) -> Result<(ScalarField2, Vec<u32>)> {
    check_lambda(lambda, false)?;
    let spec = *g.spec();
    let neg: Vec<f64> = g.values().iter().map(|v| -v).collect();
    let a = lambda * spec.spacing * spec.spacing;
    let (vals, arg) = envelope_2d(&neg, spec.nx, spec.ny, a, true);
    let vals = vals.into_iter().map(|v| -v).collect();
    Ok((ScalarField2::from_values(spec, vals)?, arg.unwrap()))
}

/// Quadratic erosion `f ⊖ b_λ`: at each sample, `min_y f(y) + lambda |x - y|^2`
/// over all grid samples `y`.
///
/// `lambda = 0` degenerates to the global minimum of `f`.
pub fn quad_erode(f: &ScalarField2, lambda: f64) -> Result<ScalarField2> {
    check_lambda(lambda, true)?;
    if lambda == 0.0 {
        return quad_erode_arg(f, 0.0).map(|(e, _)| e);
    }
    let spec = *f.spec();
    let a = lambda * spec.spacing * spec.spacing;
    let (vals, _) = envelope_2d(f.values(), spec.nx, spec.ny, a, false);
    ScalarField2::from_values(spec, vals)
}

/// Quadratic dilation `g ⊕ b_λ`, computed as `-quad_erode(-g, lambda)`.
pub fn quad_dilate(g: &ScalarField2, lambda: f64) -> Result<ScalarField2> {
    check_lambda(lambda, false)?;
    let neg = g.map(|v| -v)?;
    quad_erode(&neg, lambda)?.map(|v| -v)
}

/// Squared distance in world units from every cell centre to the nearest true cell.
pub fn edt_mask(mask: &BinaryMask2) -> Result<ScalarField2> {
    if !mask.any() {
        return Err(Error::EmptySet);
    }
    let spec = *mask.spec();
    let init: Vec<f64> = mask.bits().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let (vals, _) = envelope_2d(&init, spec.nx, spec.ny, 1.0, false);
    let h2 = spec.spacing * spec.spacing;
    ScalarField2::from_values(spec, vals.into_iter().map(|v| v * h2).collect())
}

/// Squared distance from every grid sample to the nearest point of `k`.
///
/// Small sets are handled by exhaustive search. Larger sets use, per grid row,
/// the exact lower envelope of the parabolas `x -> (x - p_x)^2 + (y - p_y)^2`
/// with real-valued apex positions, so no rasterization error is introduced.
pub fn edt_points(k: &PointSet2, spec: GridSpec) -> Result<ScalarField2> {
    k.require_nonempty()?;
    spec.validate()?;
    if k.len() <= BRUTE_FORCE_POINTS {
        return ScalarField2::from_fn(spec, |x| k.dist2_to(x));
    }
    let mut pts: Vec<Point2> = k.points().to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    let mut values = vec![0.0; spec.len()];
    values.par_chunks_mut(spec.nx).enumerate().for_each_init(
        || (Vec::<(f64, f64)>::new(), Vec::<usize>::new(), Vec::<f64>::new()),
        |(apex, v, z), (j, row)| {
            let y = spec.origin_y + j as f64 * spec.spacing;
            apex.clear();
            for p in &pts {
                let off = (y - p.y) * (y - p.y);
                match apex.last_mut() {
                    Some(last) if last.0 == p.x => last.1 = last.1.min(off),
                    _ => apex.push((p.x, off)),
                }
            }
            real_envelope(apex, v, z);
            let mut m = 0;
            for (i, out) in row.iter_mut().enumerate() {
                let x = spec.origin_x + i as f64 * spec.spacing;
                while m + 1 < z.len() && z[m + 1] < x {
                    m += 1;
                }
                let (px, off) = apex[v[m]];
                // a neighbour across the breakpoint can win by round-off
                let mut best = (x - px) * (x - px) + off;
                for &c in [m.wrapping_sub(1), m + 1].iter() {
                    if let Some(&idx) = v.get(c) {
                        let (qx, qo) = apex[idx];
                        best = best.min((x - qx) * (x - qx) + qo);
                    }
                }
                *out = best;
            }
        },
    );
    ScalarField2::from_values(spec, values)
}

/// Lower envelope of unit parabolas with apexes `(x_i, off_i)`, `x_i` strictly increasing.
fn real_envelope(apex: &[(f64, f64)], v: &mut Vec<usize>, z: &mut Vec<f64>) {
    v.clear();
    z.clear();
    for (q, &(qx, qo)) in apex.iter().enumerate() {
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let (px, po) = apex[p];
                    let s = ((qo - po) + (qx * qx - px * px)) / (2.0 * (qx - px));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
}

/// Distance transform of the true cells of `mask`, through the point path.
pub fn edt_mask_points(mask: &BinaryMask2) -> Result<ScalarField2> {
    edt_points(&mask_to_points(mask)?, *mask.spec())
}

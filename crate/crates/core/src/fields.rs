//! Grid, mask and point-set containers shared by the rest of the crate.
//!
//! All grids are isotropic and row-major: sample `(i, j)` lives at flat index
//! `j * nx + i` and at world position `(origin_x + i*h, origin_y + j*h)`.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two points closer than this are considered identical.
pub const DEDUP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const ORIGIN: Point2 = Point2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    pub fn dist2(self, other: Point2) -> f64 {
        (self - other).norm2()
    }

    pub fn dist(self, other: Point2) -> f64 {
        self.dist2(other).sqrt()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, s: f64) -> Point2 {
        Point2::new(self.x * s, self.y * s)
    }
}

impl From<(f64, f64)> for Point2 {
    fn from((x, y): (f64, f64)) -> Self {
        Point2::new(x, y)
    }
}

/// Sampling lattice of a 2-D field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_x: f64,
    pub origin_y: f64,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    pub fn new(origin_x: f64, origin_y: f64, spacing: f64, nx: usize, ny: usize) -> Result<Self> {
        let spec = GridSpec { origin_x, origin_y, spacing, nx, ny };
        spec.validate()?;
        Ok(spec)
    }

    /// Grid of `(2*half_x + 1) x (2*half_y + 1)` samples with `center` as its middle sample.
    pub fn centered(center: Point2, spacing: f64, half_x: usize, half_y: usize) -> Result<Self> {
        GridSpec::new(
            center.x - half_x as f64 * spacing,
            center.y - half_y as f64 * spacing,
            spacing,
            2 * half_x + 1,
            2 * half_y + 1,
        )
    }

    /// Smallest grid with spacing `h` whose samples cover `[x0, x1] x [y0, y1]`,
    /// anchored at `(x0, y0)`.
    pub fn covering(x0: f64, x1: f64, y0: f64, y1: f64, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(x1 >= x0) || !(y1 >= y0) {
            return Err(Error::InvalidGrid(format!(
                "cannot cover [{x0}, {x1}] x [{y0}, {y1}] with spacing {spacing}"
            )));
        }
        let nx = ((x1 - x0) / spacing - 1e-9).ceil().max(0.0) as usize + 1;
        let ny = ((y1 - y0) / spacing - 1e-9).ceil().max(0.0) as usize + 1;
        GridSpec::new(x0, y0, spacing, nx, ny)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be > 0, got {}", self.spacing)));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidGrid(format!("empty grid {}x{}", self.nx, self.ny)));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        if self.nx.checked_mul(self.ny).is_none() || self.nx > u32::MAX as usize || self.ny > u32::MAX as usize {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    #[inline]
    pub fn world(&self, i: usize, j: usize) -> Point2 {
        Point2::new(
            self.origin_x + i as f64 * self.spacing,
            self.origin_y + j as f64 * self.spacing,
        )
    }

    #[inline]
    pub fn world_at(&self, idx: usize) -> Point2 {
        let (i, j) = self.coords(idx);
        self.world(i, j)
    }

    pub fn x_max(&self) -> f64 {
        self.origin_x + (self.nx - 1) as f64 * self.spacing
    }

    pub fn y_max(&self) -> f64 {
        self.origin_y + (self.ny - 1) as f64 * self.spacing
    }

    /// Index of the sample nearest to `p`, or `None` if `p` is more than half a
    /// cell outside the grid.
    pub fn nearest(&self, p: Point2) -> Option<(usize, usize)> {
        let fi = ((p.x - self.origin_x) / self.spacing).round();
        let fj = ((p.y - self.origin_y) / self.spacing).round();
        if fi < 0.0 || fj < 0.0 || fi >= self.nx as f64 || fj >= self.ny as f64 {
            return None;
        }
        Some((fi as usize, fj as usize))
    }

    /// Chebyshev index distance from sample `(i, j)` to the nearest grid edge.
    pub fn border_distance(&self, i: usize, j: usize) -> usize {
        i.min(j).min(self.nx - 1 - i).min(self.ny - 1 - j)
    }

    /// Whether the closed disc `B(p, r)` fits inside the sampled box.
    pub fn contains_disc(&self, p: Point2, r: f64) -> bool {
        p.x - r >= self.origin_x - 1e-12 * self.spacing
            && p.y - r >= self.origin_y - 1e-12 * self.spacing
            && p.x + r <= self.x_max() + 1e-12 * self.spacing
            && p.y + r <= self.y_max() + 1e-12 * self.spacing
    }
}

/// Real-valued samples on a [`GridSpec`]. Every value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2 {
    spec: GridSpec,
    values: Vec<f64>,
}

/// Field of constant value `fill`.
pub fn make_field(spec: GridSpec, fill: f64) -> Result<ScalarField2> {
    spec.validate()?;
    if !fill.is_finite() {
        return Err(Error::NonFinite { index: 0 });
    }
    Ok(ScalarField2 { spec, values: vec![fill; spec.len()] })
}

impl ScalarField2 {
    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a {}x{} grid",
                values.len(),
                spec.nx,
                spec.ny
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ScalarField2 { spec, values })
    }

    /// Samples `f` at every grid location.
    pub fn from_fn(spec: GridSpec, f: impl Fn(Point2) -> f64) -> Result<Self> {
        spec.validate()?;
        let values = (0..spec.len()).map(|k| f(spec.world_at(k))).collect();
        ScalarField2::from_values(spec, values)
    }

    /// Like [`ScalarField2::from_fn`] for fallible samplers.
    pub fn try_from_fn(spec: GridSpec, f: impl Fn(Point2) -> Result<f64>) -> Result<Self> {
        spec.validate()?;
        let values = (0..spec.len())
            .map(|k| f(spec.world_at(k)))
            .collect::<Result<Vec<_>>>()?;
        ScalarField2::from_values(spec, values)
    }

    pub(crate) fn from_values_unchecked(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        ScalarField2 { spec, values }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    /// Value at the sample nearest to `p`.
    pub fn sample(&self, p: Point2) -> Option<f64> {
        self.spec.nearest(p).map(|(i, j)| self.get(i, j))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ScalarField2> {
        ScalarField2::from_values(self.spec, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map(&self, other: &ScalarField2, f: impl Fn(f64, f64) -> f64) -> Result<ScalarField2> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        ScalarField2::from_values(self.spec, values)
    }

    pub fn check_same_grid(&self, other: &ScalarField2) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sub-grid `[i0, i0+nx) x [j0, j0+ny)`.
    pub fn window(&self, i0: usize, j0: usize, nx: usize, ny: usize) -> Result<ScalarField2> {
        if i0 + nx > self.spec.nx || j0 + ny > self.spec.ny {
            return Err(Error::GridMismatch("window exceeds grid".into()));
        }
        let origin = self.spec.world(i0, j0);
        let spec = GridSpec::new(origin.x, origin.y, self.spec.spacing, nx, ny)?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in j0..j0 + ny {
            let row = self.spec.index(i0, j);
            values.extend_from_slice(&self.values[row..row + nx]);
        }
        Ok(ScalarField2 { spec, values })
    }
}

/// Finite planar point set, deduplicated on construction.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PointSet2 {
    points: Vec<Point2>,
}

impl PointSet2 {
    /// Builds a set, dropping points within [`DEDUP_TOL`] of an earlier one.
    /// Surviving points keep their input order.
    pub fn new(points: impl IntoIterator<Item = Point2>) -> Self {
        let raw: Vec<Point2> = points.into_iter().collect();
        let mut order: Vec<usize> = (0..raw.len()).collect();
        order.sort_by(|&a, &b| raw[a].x.total_cmp(&raw[b].x).then(raw[a].y.total_cmp(&raw[b].y)));
        let mut drop = vec![false; raw.len()];
        for (pos, &a) in order.iter().enumerate() {
            if drop[a] {
                continue;
            }
            for &b in order[pos + 1..].iter() {
                if raw[b].x - raw[a].x > DEDUP_TOL {
                    break;
                }
                if !drop[b] && raw[a].dist2(raw[b]) <= DEDUP_TOL * DEDUP_TOL {
                    // keep whichever came first in input order
                    if b > a {
                        drop[b] = true;
                    } else {
                        drop[a] = true;
                        break;
                    }
                }
            }
        }
        let points = raw.into_iter().zip(drop).filter(|(_, d)| !d).map(|(p, _)| p).collect();
        PointSet2 { points }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub(crate) fn require_nonempty(&self) -> Result<()> {
        if self.points.is_empty() {
            Err(Error::EmptySet)
        } else {
            Ok(())
        }
    }

    /// Squared distance from `x` to the nearest point, by exhaustive search.
    pub fn dist2_to(&self, x: Point2) -> f64 {
        self.points.iter().map(|p| p.dist2(x)).fold(f64::INFINITY, f64::min)
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bounds(&self) -> Option<(Point2, Point2)> {
        let first = *self.points.first()?;
        Some(self.points.iter().fold((first, first), |(lo, hi), p| {
            (Point2::new(lo.x.min(p.x), lo.y.min(p.y)), Point2::new(hi.x.max(p.x), hi.y.max(p.y)))
        }))
    }

    pub fn translated(&self, d: Point2) -> PointSet2 {
        PointSet2::new(self.points.iter().map(|&p| p + d))
    }
}

impl FromIterator<Point2> for PointSet2 {
    fn from_iter<I: IntoIterator<Item = Point2>>(iter: I) -> Self {
        PointSet2::new(iter)
    }
}

/// Boolean samples on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask2 {
    spec: GridSpec,
    bits: Vec<bool>,
}

impl BinaryMask2 {
    pub fn new(spec: GridSpec, bits: Vec<bool>) -> Result<Self> {
        spec.validate()?;
        if bits.len() != spec.len() {
            return Err(Error::GridMismatch(format!(
                "{} bits for a {}x{} grid",
                bits.len(),
                spec.nx,
                spec.ny
            )));
        }
        Ok(BinaryMask2 { spec, bits })
    }

    pub fn filled(spec: GridSpec, value: bool) -> Result<Self> {
        BinaryMask2::new(spec, vec![value; spec.len()])
    }

    pub fn from_fn(spec: GridSpec, f: impl Fn(Point2) -> bool) -> Result<Self> {
        spec.validate()?;
        BinaryMask2::new(spec, (0..spec.len()).map(|k| f(spec.world_at(k))).collect())
    }

    /// Marks the cell nearest to each point; points off the grid are ignored.
    pub fn rasterize(points: &PointSet2, spec: GridSpec) -> Result<Self> {
        let mut bits = vec![false; spec.len()];
        for &p in points.points() {
            if let Some((i, j)) = spec.nearest(p) {
                bits[spec.index(i, j)] = true;
            }
        }
        BinaryMask2::new(spec, bits)
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[self.spec.index(i, j)]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn any(&self) -> bool {
        self.bits.iter().any(|&b| b)
    }

    pub fn complement(&self) -> BinaryMask2 {
        BinaryMask2 { spec: self.spec, bits: self.bits.iter().map(|b| !b).collect() }
    }

    pub fn and(&self, other: &BinaryMask2) -> Result<BinaryMask2> {
        self.check_same_grid(other)?;
        let bits = self.bits.iter().zip(&other.bits).map(|(&a, &b)| a && b).collect();
        Ok(BinaryMask2 { spec: self.spec, bits })
    }

    /// Whether every true bit of `self` is also true in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask2) -> Result<bool> {
        self.check_same_grid(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// Number of cells where the masks differ.
    pub fn symmetric_difference_count(&self, other: &BinaryMask2) -> Result<usize> {
        self.check_same_grid(other)?;
        Ok(self.bits.iter().zip(&other.bits).filter(|(a, b)| a != b).count())
    }

    fn check_same_grid(&self, other: &BinaryMask2) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.spec, other.spec)));
        }
        Ok(())
    }
}

/// World coordinates of every true cell.
pub fn mask_to_points(mask: &BinaryMask2) -> Result<PointSet2> {
    let spec = mask.spec();
    let pts: Vec<Point2> = mask
        .bits()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(k, _)| spec.world_at(k))
        .collect();
    if pts.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(PointSet2::new(pts))
}

/// True cells with at least one 4-neighbour that is false or off the grid.
pub fn boundary_cells(mask: &BinaryMask2) -> BinaryMask2 {
    let spec = *mask.spec();
    let (nx, ny) = (spec.nx, spec.ny);
    let mut bits = vec![false; spec.len()];
    for j in 0..ny {
        for i in 0..nx {
            if !mask.get(i, j) {
                continue;
            }
            let edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            bits[spec.index(i, j)] = edge
                || !mask.get(i - 1, j)
                || !mask.get(i + 1, j)
                || !mask.get(i, j - 1)
                || !mask.get(i, j + 1);
        }
    }
    BinaryMask2 { spec, bits }
}

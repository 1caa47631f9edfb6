//! Points on `S^{d-1}`, uniform sampling, and evaluation grids.
//!
//! The grid maximum of `|f|` is the crate's surrogate for the sup norm on the
//! sphere. It is always a lower bound of the true sup, so every report that
//! quotes a sup error also records the grid size that produced it.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::constants::UNIT_NORM_TOL;
use crate::error::{Error, Result};
use crate::rng;

/// A point on the unit sphere `S^{d-1}`, `d >= 3`.
///
/// The constructor enforces `| ||coords|| - 1 | <= 1e-12`; use
/// [`SpherePoint::from_unnormalized`] to project an arbitrary nonzero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint {
    coords: Vec<f64>,
}

impl SpherePoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::invalid(format!(
                "sphere dimension must be >= 3, got {}",
                coords.len()
            )));
        }
        let norm = norm2(&coords);
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid(format!(
                "point is not on the unit sphere: ||x|| = {norm}"
            )));
        }
        Ok(Self { coords })
    }

    /// Normalizes a nonzero vector onto the sphere.
    pub fn from_unnormalized(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(Error::invalid(format!(
                "sphere dimension must be >= 3, got {}",
                coords.len()
            )));
        }
        let norm = norm2(&coords);
        if !norm.is_finite() || norm < 1e-300 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Self {
            coords: coords.into_iter().map(|c| c / norm).collect(),
        })
    }

    /// North pole `(0, ..., 0, 1)` of `S^{d-1}`.
    pub fn north_pole(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::invalid(format!(
                "sphere dimension must be >= 3, got {d}"
            )));
        }
        let mut coords = vec![0.0; d];
        coords[d - 1] = 1.0;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Inner product with another point of the same dimension.
    ///
    /// Panics on dimension mismatch; public entry points validate dimensions
    /// before reaching this.
    pub fn dot(&self, other: &SpherePoint) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in dot");
        dot(&self.coords, &other.coords)
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws `m` independent uniform points on `S^{d-1}`.
///
/// Each point is an independent standard Gaussian vector normalized to unit
/// length, which is exactly the normalized surface measure. Deterministic for
/// a fixed `(d, m, seed)`.
pub fn sample_uniform(d: usize, m: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    if d < 3 {
        return Err(Error::invalid(format!("need d >= 3, got {d}")));
    }
    if m < 1 {
        return Err(Error::invalid("need m >= 1"));
    }
    let mut rng = rng::from_seed(seed);
    let mut points = Vec::with_capacity(m);
    while points.len() < m {
        let gauss: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        // A Gaussian vector is almost surely far from zero; redraw on the
        // measure-zero event so normalization stays well defined.
        if norm2(&gauss) < 1e-8 {
            continue;
        }
        points.push(SpherePoint::from_unnormalized(gauss)?);
    }
    Ok(points)
}

/// How an evaluation grid is generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Quasi-uniform spiral; only defined on `S^2` (d = 3).
    Fibonacci,
    /// Seeded uniform sample, any dimension.
    Random,
}

/// A finite point set used to estimate sup norms from below.
#[derive(Debug, Clone)]
pub struct EvalGrid {
    points: Vec<SpherePoint>,
    kind: GridKind,
}

impl EvalGrid {
    pub fn new(points: Vec<SpherePoint>, kind: GridKind) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput("evaluation grid"));
        }
        Ok(Self { points, kind })
    }

    pub fn points(&self) -> &[SpherePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Grid maximum of `|f|`: a lower bound of the true sup norm, exact for
    /// functions attaining their sup on a grid point. Independent of
    /// evaluation order.
    pub fn sup_norm(&self, mut f: impl FnMut(&SpherePoint) -> f64) -> f64 {
        self.points.iter().map(|p| f(p).abs()).fold(0.0, f64::max)
    }
}

/// Builds an evaluation grid of `size` points.
///
/// `Fibonacci` requires `d == 3` and ignores the seed; `Random` delegates to
/// [`sample_uniform`].
pub fn build_grid(d: usize, size: usize, kind: GridKind, seed: u64) -> Result<EvalGrid> {
    if size < 1 {
        return Err(Error::invalid("grid size must be >= 1"));
    }
    match kind {
        GridKind::Fibonacci => {
            if d != 3 {
                return Err(Error::invalid(format!(
                    "fibonacci grid requires d = 3, got d = {d}"
                )));
            }
            let points = (0..size)
                .map(|i| fibonacci_point(i, size))
                .collect::<Result<Vec<_>>>()?;
            EvalGrid::new(points, kind)
        }
        GridKind::Random => EvalGrid::new(sample_uniform(d, size, seed)?, kind),
    }
}

/// Golden-angle spiral point `i` of `total` on `S^2`.
fn fibonacci_point(i: usize, total: usize) -> Result<SpherePoint> {
    // Golden angle 2*pi*(1 - 1/phi).
    const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653;
    let z = 1.0 - (2.0 * i as f64 + 1.0) / total as f64;
    let radius = (1.0 - z * z).max(0.0).sqrt();
    let theta = GOLDEN_ANGLE * i as f64;
    SpherePoint::from_unnormalized(vec![radius * theta.cos(), radius * theta.sin(), z])
}

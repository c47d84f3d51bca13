//! Discretized metric measure spaces.
//!
//! A [`MeasureSpace`] is a finite set of points, each standing for a cell of
//! the continuum space, carrying the reference mass of that cell. Integrals
//! against measures on the space are weighted sums over points.

use std::collections::BTreeSet;
use std::fmt;

use crate::{Error, Result};

/// A value in `[0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedValue {
    Finite(f64),
    Infinity,
}

impl ExtendedValue {
    pub fn finite(value: f64) -> Result<Self> {
        if value.is_finite() && value >= 0.0 {
            Ok(ExtendedValue::Finite(value))
        } else {
            Err(Error::InvalidInput(format!(
                "extended value must be finite and nonnegative, got {value}"
            )))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedValue::Infinity)
    }

    pub fn as_finite(&self) -> Option<f64> {
        match *self {
            ExtendedValue::Finite(v) => Some(v),
            ExtendedValue::Infinity => None,
        }
    }

    /// `f64::INFINITY` for the infinite variant.
    pub fn to_f64(&self) -> f64 {
        self.as_finite().unwrap_or(f64::INFINITY)
    }
}

impl fmt::Display for ExtendedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedValue::Finite(v) => write!(f, "{v}"),
            ExtendedValue::Infinity => write!(f, "inf"),
        }
    }
}

/// How the points are laid out; used for nearest-point queries and spacing.
#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Grid1d { a: f64, h: f64, n: usize },
    Grid2d { a: f64, c: f64, hx: f64, hy: f64, nx: usize, ny: usize },
    Scattered,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace {
    mass: Vec<f64>,
    dim: usize,
    coords: Option<Vec<f64>>,
    boundary: BTreeSet<usize>,
    has_boundary: bool,
    edges: Vec<(usize, usize)>,
    layout: Layout,
}

impl MeasureSpace {
    /// Creates a space from per-point reference masses. At least one mass
    /// must be strictly positive.
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        if mass.is_empty() {
            return Err(Error::InvalidInput("space needs at least one point".into()));
        }
        if let Some(bad) = mass.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::InvalidInput(format!("point mass {bad} is not a finite nonnegative number")));
        }
        if !mass.iter().any(|&m| m > 0.0) {
            return Err(Error::InvalidInput("all point masses are zero".into()));
        }
        Ok(MeasureSpace {
            mass,
            dim: 0,
            coords: None,
            boundary: BTreeSet::new(),
            has_boundary: false,
            edges: Vec::new(),
            layout: Layout::Scattered,
        })
    }

    /// Attaches `dim`-dimensional coordinates, given point by point.
    pub fn with_coords(mut self, coords: Vec<Vec<f64>>) -> Result<Self> {
        if coords.len() != self.mass.len() {
            return Err(Error::SizeMismatch { expected: self.mass.len(), got: coords.len() });
        }
        let dim = coords[0].len();
        if dim == 0 {
            return Err(Error::InvalidInput("coordinates must have positive dimension".into()));
        }
        let mut flat = Vec::with_capacity(dim * coords.len());
        for c in &coords {
            if c.len() != dim {
                return Err(Error::SizeMismatch { expected: dim, got: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("coordinates must be finite".into()));
            }
            flat.extend_from_slice(c);
        }
        self.dim = dim;
        self.coords = Some(flat);
        Ok(self)
    }

    pub fn with_boundary<I: IntoIterator<Item = usize>>(mut self, boundary: I) -> Result<Self> {
        let n = self.mass.len();
        let mut set = BTreeSet::new();
        for index in boundary {
            if index >= n {
                return Err(Error::BadIndex { index, len: n });
            }
            set.insert(index);
        }
        self.boundary = set;
        self.has_boundary = true;
        Ok(self)
    }

    /// Neighbor pairs used by Lipschitz-type constraints.
    pub fn with_edges(mut self, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = self.mass.len();
        for &(i, j) in &edges {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::BadIndex { index, len: n });
                }
            }
        }
        self.edges = edges;
        Ok(self)
    }

    pub(crate) fn with_layout(mut self, layout: Layout) -> Self {
        self.layout = layout;
        self
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_coords(&self) -> bool {
        self.coords.is_some()
    }

    pub fn coord(&self, i: usize) -> Option<&[f64]> {
        self.coords.as_ref().map(|c| &c[i * self.dim..(i + 1) * self.dim])
    }

    pub fn has_boundary(&self) -> bool {
        self.has_boundary
    }

    pub fn boundary(&self) -> &BTreeSet<usize> {
        &self.boundary
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary.contains(&i)
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Returns a copy with every reference mass multiplied by `s > 0`.
    pub fn scaled_mass(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidInput(format!("mass scale must be positive, got {s}")));
        }
        let mut out = self.clone();
        out.mass.iter_mut().for_each(|m| *m *= s);
        Ok(out)
    }

    /// Returns a copy with the given reference masses (same geometry).
    pub fn with_mass(&self, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != self.len() {
            return Err(Error::SizeMismatch { expected: self.len(), got: mass.len() });
        }
        let fresh = MeasureSpace::new(mass)?;
        let mut out = self.clone();
        out.mass = fresh.mass;
        Ok(out)
    }

    /// Euclidean distance between two points.
    pub fn distance(&self, i: usize, j: usize) -> Result<f64> {
        let a = self.coord(i).ok_or(Error::NoCoords)?;
        let b = self.coord(j).ok_or(Error::NoCoords)?;
        Ok(euclid(a, b))
    }

    /// Smallest distance between two distinct points.
    pub fn min_spacing(&self) -> Result<f64> {
        if !self.has_coords() {
            return Err(Error::NoCoords);
        }
        match self.layout {
            Layout::Grid1d { h, .. } => Ok(h),
            Layout::Grid2d { hx, hy, .. } => Ok(hx.min(hy)),
            Layout::Scattered => {
                let mut best = f64::INFINITY;
                for i in 0..self.len() {
                    for j in i + 1..self.len() {
                        let d = self.distance(i, j)?;
                        if d > 0.0 && d < best {
                            best = d;
                        }
                    }
                }
                Ok(best)
            }
        }
    }

    /// Index of the point nearest to `x` (ties broken by lowest index).
    pub fn nearest(&self, x: &[f64]) -> Result<usize> {
        let coords = self.coords.as_ref().ok_or(Error::NoCoords)?;
        if x.len() != self.dim {
            return Err(Error::SizeMismatch { expected: self.dim, got: x.len() });
        }
        match self.layout {
            Layout::Grid1d { a, h, n } => Ok(cell_of(x[0], a, h, n)),
            Layout::Grid2d { a, c, hx, hy, nx, ny } => {
                let ix = cell_of(x[0], a, hx, nx);
                let iy = cell_of(x[1], c, hy, ny);
                Ok(iy * nx + ix)
            }
            Layout::Scattered => {
                let mut best = (f64::INFINITY, 0);
                for (i, p) in coords.chunks(self.dim).enumerate() {
                    let d = euclid(p, x);
                    if d < best.0 {
                        best = (d, i);
                    }
                }
                Ok(best.1)
            }
        }
    }
}

fn cell_of(x: f64, a: f64, h: f64, n: usize) -> usize {
    let t = ((x - a) / h).floor();
    if t < 0.0 {
        0
    } else {
        (t as usize).min(n - 1)
    }
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `n` equal cells on `[a, b]`, represented by their centers. Both end cells
/// are flagged as boundary.
pub fn grid_1d(a: f64, b: f64, n: usize) -> Result<MeasureSpace> {
    if !(a.is_finite() && b.is_finite() && a < b) || n == 0 {
        return Err(Error::InvalidRange(format!("grid_1d needs a < b and n >= 1, got [{a}, {b}], n = {n}")));
    }
    let h = (b - a) / n as f64;
    let coords = (0..n).map(|i| vec![a + (i as f64 + 0.5) * h]).collect();
    let edges = (1..n).map(|i| (i - 1, i)).collect();
    MeasureSpace::new(vec![h; n])?
        .with_coords(coords)?
        .with_boundary([0, n - 1])?
        .with_edges(edges)
        .map(|s| s.with_layout(Layout::Grid1d { a, h, n }))
}

/// Axis-aligned rectangle `[a, b] × [c, d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Rect {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Rect { a, b, c, d }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Rect { a: lo, b: hi, c: lo, d: hi }
    }
}

/// `nx × ny` cells of a rectangle; point `iy * nx + ix` is the center of cell
/// `(ix, iy)`. The outer ring of cells is flagged as boundary.
pub fn grid_2d(rect: Rect, nx: usize, ny: usize) -> Result<MeasureSpace> {
    let Rect { a, b, c, d } = rect;
    let finite = [a, b, c, d].iter().all(|v| v.is_finite());
    if !finite || a >= b || c >= d || nx == 0 || ny == 0 {
        return Err(Error::InvalidRange(format!(
            "grid_2d needs a < b, c < d and nx, ny >= 1, got [{a}, {b}] x [{c}, {d}], {nx} x {ny}"
        )));
    }
    let hx = (b - a) / nx as f64;
    let hy = (d - c) / ny as f64;
    let mut coords = Vec::with_capacity(nx * ny);
    let mut boundary = Vec::new();
    let mut edges = Vec::new();
    for iy in 0..ny {
        for ix in 0..nx {
            let i = iy * nx + ix;
            coords.push(vec![a + (ix as f64 + 0.5) * hx, c + (iy as f64 + 0.5) * hy]);
            if ix == 0 || iy == 0 || ix + 1 == nx || iy + 1 == ny {
                boundary.push(i);
            }
            if ix + 1 < nx {
                edges.push((i, i + 1));
            }
            if iy + 1 < ny {
                edges.push((i, i + nx));
            }
        }
    }
    MeasureSpace::new(vec![hx * hy; nx * ny])?
        .with_coords(coords)?
        .with_boundary(boundary)?
        .with_edges(edges)
        .map(|s| s.with_layout(Layout::Grid2d { a, c, hx, hy, nx, ny }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DoublingReport {
    /// Largest ratio `m(B(x, 2r)) / m(B(x, r))` over the scanned pairs.
    pub constant: f64,
    /// The `(point, radius)` pair attaining the maximum.
    pub argmax: Option<(usize, f64)>,
    /// Pairs skipped because `m(B(x, r)) = 0`.
    pub skipped: Vec<(usize, f64)>,
}

/// Scans `m(B(x, 2r)) / m(B(x, r))` over every point `x` and every radius in
/// `radii`, with closed Euclidean balls. Pairs with an empty inner ball are
/// skipped and reported. With nothing to scan the constant is 1.
pub fn doubling_constant(space: &MeasureSpace, radii: &[f64]) -> Result<DoublingReport> {
    if !space.has_coords() {
        return Err(Error::NoCoords);
    }
    if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::InvalidInput(format!("radii must be positive, got {r}")));
    }
    let n = space.len();
    let mut report = DoublingReport { constant: 1.0, argmax: None, skipped: Vec::new() };
    let mut dist: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut cumulative = Vec::with_capacity(n);
    for x in 0..n {
        dist.clear();
        for y in 0..n {
            dist.push((space.distance(x, y)?, space.mass[y]));
        }
        dist.sort_by(|p, q| p.0.total_cmp(&q.0));
        cumulative.clear();
        let mut acc = 0.0;
        for &(_, m) in &dist {
            acc += m;
            cumulative.push(acc);
        }
        let ball = |r: f64| {
            // closed ball, with a relative slack for rounding in the distances
            let cut = r * (1.0 + 1e-12);
            let k = dist.partition_point(|p| p.0 <= cut);
            if k == 0 {
                0.0
            } else {
                cumulative[k - 1]
            }
        };
        for &r in radii {
            let inner = ball(r);
            if inner <= 0.0 {
                report.skipped.push((x, r));
                continue;
            }
            let ratio = ball(2.0 * r) / inner;
            if ratio > report.constant || report.argmax.is_none() && ratio >= report.constant {
                report.constant = ratio;
                report.argmax = Some((x, r));
            }
        }
    }
    Ok(report)
}

//! Scalar ⇄ curve-point mapping.
//!
//! `encode` walks the polyline by arc length. Because every edge has the
//! same length, arc-length position equals linear interpolation in node
//! index: `t = q · (node_count − 1)`.
//!
//! `decode_exact` projects a point onto every segment and keeps the global
//! minimum. Candidates whose distances agree within [`TIE_TOLERANCE`] are
//! resolved to the smallest recovered `q`.
//!
//! [`DecodeGrid`] caches `decode_exact` at the cell centers of an `n × n`
//! grid. Lookup picks the cell containing the query point and never blends
//! neighbouring cells, since `q` jumps across branch boundaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{CurvePoint, CurveSpec, Polyline};
use crate::error::{Error, Result};
use crate::raster::Raster;

/// Slack outside `[0, 1]` that is silently clamped.
pub const DOMAIN_SLACK: f64 = 1e-9;

/// Distances closer than this are treated as equal when projecting.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Default cap on `n × n` for decode grids (4096²).
pub const DEFAULT_MAX_GRID_CELLS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub q: f64,
    pub r: f64,
    pub segment_index: usize,
    /// Position along the chosen segment in `[0, 1]`.
    #[serde(skip)]
    pub t: f64,
}

impl Projection {
    /// True when the closest point is a segment endpoint, where the
    /// projection is not differentiable in general.
    pub fn at_node(&self) -> bool {
        self.t <= 0.0 || self.t >= 1.0
    }
}

fn check_unit(q: f64) -> Result<f64> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&q) {
        return Err(Error::Domain(format!("q = {q} outside [0, 1]")));
    }
    Ok(q.clamp(0.0, 1.0))
}

/// Point at arc-length fraction `q` along `curve`.
pub fn encode(q: f64, curve: &Polyline) -> Result<CurvePoint> {
    let q = check_unit(q)?;
    let nodes = curve.nodes();
    let t = q * curve.segment_count() as f64;
    let k = (t.floor() as usize).min(curve.segment_count() - 1);
    Ok(nodes[k].lerp(nodes[k + 1], t - k as f64))
}

/// Closest point on segment `a → b` to `p`, as (parameter, distance).
#[inline]
fn project_segment(p: CurvePoint, a: CurvePoint, b: CurvePoint) -> (f64, f64) {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    let c = a.lerp(b, t);
    (t, p.dist(c))
}

/// Nearest-point projection of `pt` onto `curve`.
pub fn decode_exact(pt: CurvePoint, curve: &Polyline) -> Projection {
    let segments = curve.segment_count() as f64;
    let mut best: Option<Projection> = None;
    for (k, (a, b)) in curve.segments().enumerate() {
        let (t, r) = project_segment(pt, a, b);
        let q = (k as f64 + t) / segments;
        let better = match &best {
            None => true,
            Some(cur) => {
                r < cur.r - TIE_TOLERANCE || ((r - cur.r).abs() <= TIE_TOLERANCE && q < cur.q)
            }
        };
        if better {
            best = Some(Projection {
                q,
                r,
                segment_index: k,
                t,
            });
        }
    }
    best.expect("polyline has at least one segment")
}

/// `n × n` lookup tables of `decode_exact` evaluated at cell centers.
///
/// Row `i` covers `y ∈ [i/n, (i+1)/n)` and column `j` covers
/// `x ∈ [j/n, (j+1)/n)`; storage is row-major with `y` increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeGrid {
    spec: CurveSpec,
    segment_count: usize,
    n: usize,
    q_map: Vec<f64>,
    r_map: Vec<f64>,
}

impl DecodeGrid {
    pub fn build(curve: &Polyline, n: usize) -> Result<Self> {
        Self::build_with_cap(curve, n, DEFAULT_MAX_GRID_CELLS)
    }

    pub fn build_with_cap(curve: &Polyline, n: usize, max_cells: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid side {n} < 2")));
        }
        let cells = n
            .checked_mul(n)
            .filter(|&c| c <= max_cells)
            .ok_or(Error::Capacity {
                cells: n.saturating_mul(n),
                cap: max_cells,
            })?;

        let mut q_map = vec![0.0; cells];
        let mut r_map = vec![0.0; cells];
        q_map
            .par_chunks_mut(n)
            .zip(r_map.par_chunks_mut(n))
            .enumerate()
            .for_each(|(i, (q_row, r_row))| {
                for j in 0..n {
                    let p = decode_exact(cell_center(n, i, j), curve);
                    q_row[j] = p.q;
                    r_row[j] = p.r;
                }
            });
        Ok(DecodeGrid {
            spec: *curve.spec(),
            segment_count: curve.segment_count(),
            n,
            q_map,
            r_map,
        })
    }

    /// Assembles a grid from stored tables (e.g. a deserialized LUT file).
    pub fn from_parts(spec: CurveSpec, n: usize, q_map: Vec<f64>, r_map: Vec<f64>) -> Result<Self> {
        let curve = crate::curve::generate(spec)?;
        if n < 2 || q_map.len() != n * n || r_map.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected two {n}x{n} tables, got {} and {} entries",
                q_map.len(),
                r_map.len()
            )));
        }
        if q_map.iter().any(|q| !(0.0..=1.0).contains(q)) {
            return Err(Error::Domain("q_map entry outside [0, 1]".into()));
        }
        if r_map.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::Domain("r_map entry negative or non-finite".into()));
        }
        Ok(DecodeGrid {
            spec,
            segment_count: curve.segment_count(),
            n,
            q_map,
            r_map,
        })
    }

    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q_map(&self) -> &[f64] {
        &self.q_map
    }

    pub fn r_map(&self) -> &[f64] {
        &self.r_map
    }

    pub fn q_at(&self, i: usize, j: usize) -> f64 {
        self.q_map[i * self.n + j]
    }

    pub fn r_at(&self, i: usize, j: usize) -> f64 {
        self.r_map[i * self.n + j]
    }

    /// `(row, column)` of the cell containing `pt`; points outside the unit
    /// square snap to the border cells.
    pub fn cell_of(&self, pt: CurvePoint) -> (usize, usize) {
        let idx = |v: f64| {
            let k = (v * self.n as f64).floor();
            if k.is_nan() || k < 0.0 {
                0
            } else {
                (k as usize).min(self.n - 1)
            }
        };
        (idx(pt.y), idx(pt.x))
    }

    /// Checks that this grid was built for `curve`.
    pub fn matches(&self, curve: &Polyline) -> bool {
        self.spec == *curve.spec() && self.segment_count == curve.segment_count()
    }

    /// Cached projection of the cell containing `pt`.
    pub fn lookup(&self, pt: CurvePoint) -> Projection {
        let (i, j) = self.cell_of(pt);
        let q = self.q_at(i, j);
        let pos = q * self.segment_count as f64;
        let segment_index = (pos.floor() as usize).min(self.segment_count - 1);
        Projection {
            q,
            r: self.r_at(i, j),
            segment_index,
            t: pos - segment_index as f64,
        }
    }
}

pub fn cell_center(n: usize, i: usize, j: usize) -> CurvePoint {
    CurvePoint::new((j as f64 + 0.5) / n as f64, (i as f64 + 0.5) / n as f64)
}

pub fn build_decode_grid(curve: &Polyline, n: usize) -> Result<DecodeGrid> {
    DecodeGrid::build(curve, n)
}

pub fn decode_lut(pt: CurvePoint, grid: &DecodeGrid) -> Projection {
    grid.lookup(pt)
}

/// Encodes a raster of normalized values into `x` and `y` component rasters.
pub fn encode_raster(values: &Raster, curve: &Polyline) -> Result<(Raster, Raster)> {
    let (w, h) = values.dims();
    let mut xs = Vec::with_capacity(values.len());
    let mut ys = Vec::with_capacity(values.len());
    for &v in values.data() {
        if !v.is_finite() {
            return Err(Error::Domain("non-finite pixel".into()));
        }
        let p = encode(v, curve)?;
        xs.push(p.x);
        ys.push(p.y);
    }
    Ok((Raster::new(w, h, xs)?, Raster::new(w, h, ys)?))
}

/// Decodes component rasters through `grid`, returning `(q, r)` rasters.
pub fn decode_raster(x: &Raster, y: &Raster, grid: &DecodeGrid) -> Result<(Raster, Raster)> {
    if x.dims() != y.dims() {
        return Err(Error::ShapeMismatch(format!(
            "x raster {:?} vs y raster {:?}",
            x.dims(),
            y.dims()
        )));
    }
    let (w, h) = x.dims();
    let mut qs = Vec::with_capacity(x.len());
    let mut rs = Vec::with_capacity(x.len());
    for (&px, &py) in x.data().iter().zip(y.data()) {
        if !px.is_finite() || !py.is_finite() {
            return Err(Error::Domain("non-finite pixel".into()));
        }
        let p = grid.lookup(CurvePoint::new(px, py));
        qs.push(p.q);
        rs.push(p.r);
    }
    Ok((Raster::new(w, h, qs)?, Raster::new(w, h, rs)?))
}

//! Space-filling curve polylines scaled into the bordered unit square.
//!
//! Nodes sit on a regular `k × k` lattice (`k = 2^p` for Hilbert, `3^p` for
//! Peano) mapped affinely onto `[b, 1 − b]²`, so every edge of the
//! approximating polygon has the same length `h = (1 − 2b) / (k − 1)`.
//!
//! Orientation: every curve starts at the lower-left corner `(b, b)`.
//! Hilbert curves end at the lower-right corner `(1 − b, b)`, so the order-1
//! curve is the "U opening downward" `(0,0) → (0,1) → (1,1) → (1,0)` in
//! lattice coordinates. Peano curves are serpentines that end at the
//! upper-right corner.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BORDER: f64 = 0.1;
pub const MAX_HILBERT_ORDER: u32 = 5;
pub const MAX_PEANO_ORDER: u32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveFamily {
    Hilbert,
    Peano,
    QuadraticGosper,
}

impl CurveFamily {
    pub const ALL: [CurveFamily; 3] = [
        CurveFamily::Hilbert,
        CurveFamily::Peano,
        CurveFamily::QuadraticGosper,
    ];

    /// Node-count growth factor per order (`N` in the `√N` family naming).
    pub fn growth(self) -> u64 {
        match self {
            CurveFamily::Hilbert => 4,
            CurveFamily::Peano => 9,
            CurveFamily::QuadraticGosper => 25,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CurveFamily::Hilbert => "hilbert",
            CurveFamily::Peano => "peano",
            CurveFamily::QuadraticGosper => "quadratic-gosper",
        }
    }
}

impl fmt::Display for CurveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CurveFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hilbert" => Ok(CurveFamily::Hilbert),
            "peano" => Ok(CurveFamily::Peano),
            "quadratic-gosper" | "gosper" => Ok(CurveFamily::QuadraticGosper),
            other => Err(Error::UnsupportedCurve(format!("unknown family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSpec {
    pub family: CurveFamily,
    pub order: u32,
    pub border: f64,
}

impl CurveSpec {
    pub fn hilbert(order: u32) -> Self {
        CurveSpec {
            family: CurveFamily::Hilbert,
            order,
            border: DEFAULT_BORDER,
        }
    }

    pub fn peano(order: u32) -> Self {
        CurveSpec {
            family: CurveFamily::Peano,
            order,
            border: DEFAULT_BORDER,
        }
    }

    pub fn with_border(mut self, border: f64) -> Self {
        self.border = border;
        self
    }

    /// Checks order and border without requiring polyline support.
    pub fn validate(&self) -> Result<()> {
        if !(0.0..0.5).contains(&self.border) {
            return Err(Error::Domain(format!(
                "border {} outside [0, 0.5)",
                self.border
            )));
        }
        if self.order == 0 {
            return Err(Error::UnsupportedCurve("order must be >= 1".into()));
        }
        Ok(())
    }

    /// Points per lattice side.
    fn lattice_side(&self) -> usize {
        match self.family {
            CurveFamily::Hilbert => 1 << self.order,
            CurveFamily::Peano => 3usize.pow(self.order),
            CurveFamily::QuadraticGosper => 5usize.pow(self.order),
        }
    }
}

/// A 2D point in unit-square coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub y: f64,
}

impl CurvePoint {
    pub const fn new(x: f64, y: f64) -> Self {
        CurvePoint { x, y }
    }

    pub fn dist(self, other: CurvePoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: CurvePoint, t: f64) -> CurvePoint {
        CurvePoint {
            x: self.x + (other.x - self.x) * t,
            y: self.y + (other.y - self.y) * t,
        }
    }
}

/// An equal-edge polyline approximating a space-filling curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    spec: CurveSpec,
    nodes: Vec<CurvePoint>,
    edge_length: f64,
}

impl Polyline {
    pub fn spec(&self) -> &CurveSpec {
        &self.spec
    }

    pub fn nodes(&self) -> &[CurvePoint] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn segment_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Edge length `h`.
    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    /// Total length `L = segment_count · h`.
    pub fn length(&self) -> f64 {
        self.segment_count() as f64 * self.edge_length
    }

    pub fn segment(&self, index: usize) -> (CurvePoint, CurvePoint) {
        (self.nodes[index], self.nodes[index + 1])
    }

    pub fn segments(&self) -> impl ExactSizeIterator<Item = (CurvePoint, CurvePoint)> + '_ {
        self.nodes.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Builds the polyline for a supported `(family, order)` pair.
pub fn generate(spec: CurveSpec) -> Result<Polyline> {
    spec.validate()?;
    let cells: Vec<(usize, usize)> = match spec.family {
        CurveFamily::Hilbert if spec.order <= MAX_HILBERT_ORDER => {
            let count = 1usize << (2 * spec.order);
            (0..count).map(|d| hilbert_cell(spec.order, d)).collect()
        }
        CurveFamily::Peano if spec.order <= MAX_PEANO_ORDER => {
            let count = 9usize.pow(spec.order);
            (0..count).map(|d| peano_cell(spec.order, d)).collect()
        }
        CurveFamily::QuadraticGosper => {
            return Err(Error::UnsupportedCurve(
                "quadratic-gosper curves are catalog-only".into(),
            ))
        }
        family => {
            return Err(Error::UnsupportedCurve(format!(
                "{family} order {} is not supported",
                spec.order
            )))
        }
    };

    let side = spec.lattice_side();
    let span = 1.0 - 2.0 * spec.border;
    let edge_length = span / (side - 1) as f64;
    let scale = |i: usize| spec.border + i as f64 * span / (side - 1) as f64;
    let nodes = cells
        .into_iter()
        .map(|(i, j)| CurvePoint::new(scale(i), scale(j)))
        .collect();
    Ok(Polyline {
        spec,
        nodes,
        edge_length,
    })
}

/// Closed-form `(L, h)` of a Hilbert curve.
pub fn geometry(spec: CurveSpec) -> Result<(f64, f64)> {
    spec.validate()?;
    if spec.family != CurveFamily::Hilbert {
        return Err(Error::UnsupportedCurve(format!(
            "closed-form geometry is Hilbert-only, got {}",
            spec.family
        )));
    }
    if spec.order > 30 {
        return Err(Error::UnsupportedCurve(format!("order {}", spec.order)));
    }
    let side = (1u64 << spec.order) as f64;
    let span = 1.0 - 2.0 * spec.border;
    Ok(((side + 1.0) * span, span / (side - 1.0)))
}

/// Lattice cell of Hilbert index `d` on a `2^order` grid.
///
/// Walks the index two bits at a time from the least significant quadrant
/// upward, rotating the partial coordinates at each level. For order 1 the
/// sequence is (0,0), (0,1), (1,1), (1,0).
pub fn hilbert_cell(order: u32, d: usize) -> (usize, usize) {
    let (mut x, mut y) = (0usize, 0usize);
    let mut t = d;
    let mut s = 1usize;
    while s < (1usize << order) {
        let rx = 1 & (t / 2);
        let ry = 1 & (t ^ rx);
        if ry == 0 {
            if rx == 1 {
                x = s - 1 - x;
                y = s - 1 - y;
            }
            std::mem::swap(&mut x, &mut y);
        }
        x += s * rx;
        y += s * ry;
        t /= 4;
        s <<= 1;
    }
    (x, y)
}

/// Lattice cell of Peano index `d` on a `3^order` grid.
///
/// Base-3 digits of `d` alternate between x and y, most significant first.
/// A digit is reflected (`2 − digit`) when the sum of the preceding digits of
/// the other axis is odd, which yields the serpentine
/// (0,0), (0,1), (0,2), (1,2), (1,1), (1,0), (2,0), (2,1), (2,2) at order 1.
pub fn peano_cell(order: u32, d: usize) -> (usize, usize) {
    let digits = 2 * order as usize;
    let mut trits = vec![0usize; digits];
    let mut t = d;
    for slot in trits.iter_mut().rev() {
        *slot = t % 3;
        t /= 3;
    }
    let (mut x, mut y) = (0usize, 0usize);
    let (mut x_sum, mut y_sum) = (0usize, 0usize);
    for pair in trits.chunks(2) {
        let (tx, ty) = (pair[0], pair[1]);
        let dx = if y_sum % 2 == 1 { 2 - tx } else { tx };
        x_sum += tx;
        let dy = if x_sum % 2 == 1 { 2 - ty } else { ty };
        y_sum += ty;
        x = 3 * x + dx;
        y = 3 * y + dy;
    }
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyCatalogEntry {
    pub family: CurveFamily,
    /// Node counts for orders `1, 2, ...`; the list runs one order past the
    /// cap (at least five orders) so the cutoff is visible.
    pub nodes_at_order: Vec<u64>,
    pub usable_orders_under_cap: u32,
}

/// Node-count growth of each curve family against a node budget.
pub fn family_catalog(max_nodes: u64) -> Vec<FamilyCatalogEntry> {
    CurveFamily::ALL
        .iter()
        .map(|&family| {
            let growth = family.growth();
            let mut nodes_at_order = Vec::new();
            let mut usable = 0;
            let mut nodes = 1u64;
            loop {
                nodes = match nodes.checked_mul(growth) {
                    Some(n) => n,
                    None => break,
                };
                nodes_at_order.push(nodes);
                if nodes <= max_nodes {
                    usable += 1;
                } else if nodes_at_order.len() >= 5 {
                    break;
                }
            }
            FamilyCatalogEntry {
                family,
                nodes_at_order,
                usable_orders_under_cap: usable,
            }
        })
        .collect()
}

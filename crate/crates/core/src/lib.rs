//! Encode a bounded scalar as a point on a low-order space-filling curve and
//! decode noisy 2D points back by nearest-point projection.
//!
//! A value `q ∈ [0, 1]` maps to the point at arc-length fraction `q` along an
//! equal-edge Hilbert polyline of length `L`. Perturbations of that point
//! smaller than half an edge project back onto the same edge, so their
//! tangential part shrinks by `L` and their normal part vanishes.
//!
//! ```
//! use hilq::codec::{decode_exact, encode};
//! use hilq::curve::{generate, CurveSpec};
//!
//! let curve = generate(CurveSpec::hilbert(3)).unwrap();
//! let p = encode(0.3, &curve).unwrap();
//! let back = decode_exact(p, &curve);
//! assert!((back.q - 0.3).abs() < 1e-12);
//! ```

pub mod codec;
pub mod curve;
mod error;
pub mod experiments;
pub mod io;
pub mod losses;
pub mod metrics;
pub mod quantsim;
pub mod raster;

pub use codec::{build_decode_grid, decode_exact, decode_lut, encode, DecodeGrid, Projection};
pub use curve::{generate, geometry, CurveFamily, CurvePoint, CurveSpec, Polyline};
pub use error::{Error, Result};
pub use raster::Raster;

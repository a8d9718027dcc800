//! Depth-map quality metrics.
//!
//! A pixel is valid when the ground truth is finite and positive and the
//! prediction is finite. `S_C` compares the DC-free 2D DCT-II coefficients
//! of co-located windows by cosine similarity and averages over windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantsim::compensated_sum;
use crate::raster::Raster;

pub const DELTA1_THRESHOLD: f64 = 1.25;

/// Windows whose AC energy norm is at or below this are skipped.
pub const SC_NORM_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthMetricsReport {
    pub abs_rel: f64,
    pub mae: f64,
    pub rmse: f64,
    pub delta1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_c: Option<f64>,
    pub valid_pixel_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SCConfig {
    pub window: usize,
    pub stride: usize,
}

impl Default for SCConfig {
    fn default() -> Self {
        SCConfig {
            window: 4,
            stride: 4,
        }
    }
}

fn is_valid(gt: f64, pred: f64) -> bool {
    gt.is_finite() && gt > 0.0 && pred.is_finite()
}

fn check_shapes(gt: &Raster, pred: &Raster) -> Result<()> {
    if gt.dims() != pred.dims() {
        return Err(Error::ShapeMismatch(format!(
            "ground truth {:?} vs prediction {:?}",
            gt.dims(),
            pred.dims()
        )));
    }
    Ok(())
}

/// Abs Rel, MAE, RMSE and δ₁ over valid pixels.
pub fn depth_metrics(gt: &Raster, pred: &Raster) -> Result<DepthMetricsReport> {
    check_shapes(gt, pred)?;
    let pairs: Vec<(f64, f64)> = gt
        .data()
        .iter()
        .zip(pred.data())
        .map(|(&g, &p)| (g, p))
        .filter(|&(g, p)| is_valid(g, p))
        .collect();
    if pairs.is_empty() {
        return Err(Error::NoValidPixels);
    }
    let n = pairs.len() as f64;
    let abs_rel = compensated_sum(pairs.iter().map(|(g, p)| (g - p).abs() / g)) / n;
    let mae = compensated_sum(pairs.iter().map(|(g, p)| (g - p).abs())) / n;
    let mse = compensated_sum(pairs.iter().map(|(g, p)| (g - p) * (g - p))) / n;
    let inliers = pairs
        .iter()
        .filter(|&&(g, p)| p > 0.0 && (g / p).max(p / g) < DELTA1_THRESHOLD)
        .count();
    Ok(DepthMetricsReport {
        abs_rel,
        mae,
        rmse: mse.sqrt(),
        delta1: inliers as f64 / n,
        s_c: None,
        valid_pixel_count: pairs.len(),
    })
}

/// Orthonormal DCT-II basis, `basis[k][i]`.
fn dct_basis(n: usize) -> Vec<f64> {
    let mut basis = vec![0.0; n * n];
    for k in 0..n {
        let scale = if k == 0 { (1.0 / n as f64).sqrt() } else { (2.0 / n as f64).sqrt() };
        for i in 0..n {
            basis[k * n + i] =
                scale * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    basis
}

/// DC-free DCT coefficients of a mean-removed `n × n` patch.
fn ac_coefficients(patch: &mut [f64], basis: &[f64], n: usize, tmp: &mut [f64], out: &mut Vec<f64>) {
    let mean = patch.iter().sum::<f64>() / (n * n) as f64;
    patch.iter_mut().for_each(|v| *v -= mean);
    // Rows, then columns.
    for r in 0..n {
        for k in 0..n {
            tmp[r * n + k] = (0..n).map(|i| basis[k * n + i] * patch[r * n + i]).sum();
        }
    }
    out.clear();
    for ky in 0..n {
        for kx in 0..n {
            if ky == 0 && kx == 0 {
                continue;
            }
            out.push((0..n).map(|r| basis[ky * n + r] * tmp[r * n + kx]).sum());
        }
    }
}

/// Cosine similarity in `[−1, 1]`; `None` when either vector is (near) zero.
fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na.sqrt() <= SC_NORM_EPSILON || nb.sqrt() <= SC_NORM_EPSILON {
        return None;
    }
    Some((dot / (na * nb).sqrt()).clamp(-1.0, 1.0))
}

/// Windowed DCT cosine similarity between two rasters of one frame.
///
/// Windows that do not fit entirely, contain an invalid pixel, or have zero
/// AC energy in either input are skipped.
pub fn s_c(gt: &Raster, pred: &Raster, cfg: &SCConfig) -> Result<f64> {
    check_shapes(gt, pred)?;
    let n = cfg.window;
    if n < 2 || cfg.stride == 0 {
        return Err(Error::Config(format!(
            "window {} must be >= 2 and stride {} >= 1",
            n, cfg.stride
        )));
    }
    let (w, h) = gt.dims();
    if w < n || h < n {
        return Err(Error::ShapeMismatch(format!(
            "{w}x{h} raster is smaller than a {n}x{n} window"
        )));
    }

    let basis = dct_basis(n);
    let mut tmp = vec![0.0; n * n];
    let (mut pa, mut pb) = (vec![0.0; n * n], vec![0.0; n * n]);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    let mut scores = Vec::new();
    for top in (0..=h - n).step_by(cfg.stride) {
        'window: for left in (0..=w - n).step_by(cfg.stride) {
            for r in 0..n {
                for c in 0..n {
                    let (g, p) = (gt.get(top + r, left + c), pred.get(top + r, left + c));
                    if !is_valid(g, p) {
                        continue 'window;
                    }
                    pa[r * n + c] = g;
                    pb[r * n + c] = p;
                }
            }
            ac_coefficients(&mut pa, &basis, n, &mut tmp, &mut ca);
            ac_coefficients(&mut pb, &basis, n, &mut tmp, &mut cb);
            if let Some(s) = cosine(&ca, &cb) {
                scores.push(s);
            }
        }
    }
    if scores.is_empty() {
        return Err(Error::DegenerateInput);
    }
    Ok((compensated_sum(scores.iter().copied()) / scores.len() as f64).clamp(-1.0, 1.0))
}

/// Mean `S_C` over frames.
pub fn s_c_frames<'a>(
    frames: impl IntoIterator<Item = (&'a Raster, &'a Raster)>,
    cfg: &SCConfig,
) -> Result<f64> {
    let per_frame = frames
        .into_iter()
        .map(|(g, p)| s_c(g, p, cfg))
        .collect::<Result<Vec<_>>>()?;
    if per_frame.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(compensated_sum(per_frame.iter().copied()) / per_frame.len() as f64)
}

/// Pixel metrics plus `S_C`. `S_C` is left empty when every window is
/// skipped or the raster is smaller than one window.
pub fn evaluate(gt: &Raster, pred: &Raster, cfg: &SCConfig) -> Result<DepthMetricsReport> {
    let mut report = depth_metrics(gt, pred)?;
    report.s_c = match s_c(gt, pred, cfg) {
        Ok(v) => Some(v),
        Err(Error::DegenerateInput) | Err(Error::ShapeMismatch(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(report)
}

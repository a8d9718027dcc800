//! Composite loss for a predictor that outputs curve components:
//! `total = base(q_gt, q_xy) + α · (‖gt − v‖² + β · r_xy²)`.
//!
//! All projections use `decode_exact`, never the lookup grid, so gradients
//! agree with the values they differentiate.

use serde::{Deserialize, Serialize};

use crate::codec::{decode_exact, encode, Projection, TIE_TOLERANCE};
use crate::curve::{CurvePoint, Polyline};
use crate::error::{Error, Result};

/// Tolerance for "ground truth lies on the curve".
pub const ON_CURVE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseLoss {
    #[default]
    SquaredError,
    AbsoluteError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub base_loss: BaseLoss,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 1.0,
            beta: 25.0,
            base_loss: BaseLoss::SquaredError,
        }
    }
}

impl LossConfig {
    fn validate(&self) -> Result<()> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha.is_finite() && self.beta.is_finite()) {
            return Err(Error::Config(format!(
                "alpha {} and beta {} must be finite and >= 0",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub base: f64,
    /// Unweighted curve term `Λ_H`.
    pub hilbert: f64,
    /// Gradient of `total` with respect to the predicted point.
    pub grad_x: f64,
    pub grad_y: f64,
    /// Distance from the prediction to the curve.
    pub r: f64,
    /// Recovered scalar of the prediction.
    pub q_xy: f64,
    /// The projection sits on a kink or a tie, so the gradient is one-sided.
    pub non_differentiable: bool,
}

fn check_square(p: CurvePoint, what: &str) -> Result<()> {
    if !(0.0..=1.0).contains(&p.x) || !(0.0..=1.0).contains(&p.y) {
        return Err(Error::Domain(format!(
            "{what} ({}, {}) outside the unit square",
            p.x, p.y
        )));
    }
    Ok(())
}

/// True when a segment other than the chosen one reaches a different closest
/// point at (nearly) the same distance.
fn is_tie(pt: CurvePoint, proj: &Projection, curve: &Polyline) -> bool {
    let (a, b) = curve.segment(proj.segment_index);
    let chosen = a.lerp(b, proj.t);
    curve.segments().enumerate().any(|(k, (a, b))| {
        if k == proj.segment_index {
            return false;
        }
        let (dx, dy) = (b.x - a.x, b.y - a.y);
        let t = (((pt.x - a.x) * dx + (pt.y - a.y) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
        let c = a.lerp(b, t);
        (pt.dist(c) - proj.r).abs() <= 1e3 * TIE_TOLERANCE && c.dist(chosen) > 1e3 * TIE_TOLERANCE
    })
}

struct CurveTerm {
    value: f64,
    grad: (f64, f64),
    proj: Projection,
    kink: bool,
}

fn curve_term(gt: CurvePoint, pred: CurvePoint, curve: &Polyline, beta: f64) -> CurveTerm {
    let proj = decode_exact(pred, curve);
    let (a, b) = curve.segment(proj.segment_index);
    let foot = a.lerp(b, proj.t);
    let (ex, ey) = (pred.x - gt.x, pred.y - gt.y);
    let value = ex * ex + ey * ey + beta * proj.r * proj.r;
    let grad = (
        2.0 * ex + 2.0 * beta * (pred.x - foot.x),
        2.0 * ey + 2.0 * beta * (pred.y - foot.y),
    );
    let kink = proj.at_node() || is_tie(pred, &proj, curve);
    CurveTerm {
        value,
        grad,
        proj,
        kink,
    }
}

/// Curve term `Λ_H` for ground truth `gt` (on the curve) and prediction
/// `pred`. `total` is `α · Λ_H` and `base` is zero.
pub fn hilbert_loss(
    gt: CurvePoint,
    pred: CurvePoint,
    curve: &Polyline,
    cfg: &LossConfig,
) -> Result<LossBreakdown> {
    cfg.validate()?;
    check_square(gt, "ground truth")?;
    check_square(pred, "prediction")?;
    let off = decode_exact(gt, curve).r;
    if off > ON_CURVE_TOLERANCE {
        return Err(Error::Domain(format!(
            "ground truth is {off:e} away from the curve"
        )));
    }
    let term = curve_term(gt, pred, curve, cfg.beta);
    Ok(LossBreakdown {
        total: cfg.alpha * term.value,
        base: 0.0,
        hilbert: term.value,
        grad_x: cfg.alpha * term.grad.0,
        grad_y: cfg.alpha * term.grad.1,
        r: term.proj.r,
        q_xy: term.proj.q,
        non_differentiable: term.kink,
    })
}

/// Full loss for scalar ground truth `q_gt` and predicted point `pred`.
///
/// The base-loss gradient flows through `q_xy`, which moves along the
/// chosen segment at rate `1/L` per unit of tangential displacement and is
/// constant while the projection is pinned to a node.
pub fn full_loss(
    q_gt: f64,
    pred: CurvePoint,
    curve: &Polyline,
    cfg: &LossConfig,
) -> Result<LossBreakdown> {
    cfg.validate()?;
    check_square(pred, "prediction")?;
    let gt = encode(q_gt, curve)?;
    let term = curve_term(gt, pred, curve, cfg.beta);
    let q_xy = term.proj.q;
    let diff = q_xy - q_gt;
    let (base, dbase_dq) = match cfg.base_loss {
        BaseLoss::SquaredError => (diff * diff, 2.0 * diff),
        BaseLoss::AbsoluteError => (diff.abs(), if diff == 0.0 { 0.0 } else { diff.signum() }),
    };
    let (dq_dx, dq_dy) = if term.proj.at_node() {
        (0.0, 0.0)
    } else {
        let (a, b) = curve.segment(term.proj.segment_index);
        let h = curve.edge_length();
        let l = curve.length();
        ((b.x - a.x) / h / l, (b.y - a.y) / h / l)
    };
    Ok(LossBreakdown {
        total: base + cfg.alpha * term.value,
        base,
        hilbert: term.value,
        grad_x: dbase_dq * dq_dx + cfg.alpha * term.grad.0,
        grad_y: dbase_dq * dq_dy + cfg.alpha * term.grad.1,
        r: term.proj.r,
        q_xy,
        non_differentiable: term.kink,
    })
}

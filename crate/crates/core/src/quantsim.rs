//! Monte-Carlo simulation of a degraded output channel applied to the two
//! curve components, with robust error statistics.
//!
//! Samples are processed in fixed-size chunks. Chunk `c` draws from ChaCha8
//! streams derived from `(seed, c)`, and per-chunk results are concatenated
//! in chunk order, so results are bit-identical for any thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::{decode_exact, encode, DecodeGrid};
use crate::curve::{CurvePoint, Polyline};
use crate::error::{Error, Result};

/// Consistency constant making the MAD an estimate of the normal SD.
pub const MAD_SCALE: f64 = 1.4826;

pub const MIN_SAMPLES: usize = 1000;

const CHUNK: usize = 1 << 15;

const STREAM_Q: u64 = 0;
const STREAM_X: u64 = 1;
const STREAM_Y: u64 = 2;
const STREAM_BASELINE: u64 = 3;
const STREAM_JITTER: u64 = 4;
const STREAMS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Channel {
    UniformQuantizer { bits: u32, range: [f64; 2] },
    AdditiveGaussian { sigma: f64 },
    Compose { stages: Vec<Channel> },
}

impl Channel {
    pub fn quantizer(bits: u32) -> Self {
        Channel::UniformQuantizer {
            bits,
            range: [0.0, 1.0],
        }
    }

    pub fn gaussian(sigma: f64) -> Self {
        Channel::AdditiveGaussian { sigma }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Channel::UniformQuantizer { bits, range: [lo, hi] } => {
                if !(2..=16).contains(bits) {
                    return Err(Error::Config(format!("bits {bits} outside [2, 16]")));
                }
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Config(format!("bad quantizer range [{lo}, {hi}]")));
                }
            }
            Channel::AdditiveGaussian { sigma } => {
                if !(sigma.is_finite() && *sigma >= 0.0) {
                    return Err(Error::Config(format!("sigma {sigma} must be finite and >= 0")));
                }
            }
            Channel::Compose { stages } => stages.iter().try_for_each(Channel::validate)?,
        }
        Ok(())
    }

    pub fn apply<R: Rng + ?Sized>(&self, v: f64, rng: &mut R) -> f64 {
        match self {
            Channel::UniformQuantizer { bits, range } => quantize(v, *bits, range[0], range[1]),
            Channel::AdditiveGaussian { sigma } => {
                let z: f64 = StandardNormal.sample(rng);
                v + sigma * z
            }
            Channel::Compose { stages } => stages.iter().fold(v, |acc, s| s.apply(acc, rng)),
        }
    }

    /// Bit width of the first quantizer stage, if any.
    pub fn bits(&self) -> Option<u32> {
        match self {
            Channel::UniformQuantizer { bits, .. } => Some(*bits),
            Channel::AdditiveGaussian { .. } => None,
            Channel::Compose { stages } => stages.iter().find_map(Channel::bits),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelConfig {
    pub channel: Channel,
    pub seed: u64,
    /// Feed identical noise to both components. Only useful for checking
    /// that correlated channels are detected.
    #[serde(default)]
    pub shared_noise: bool,
    /// SD of a Gaussian off-curve spread applied to the encoded point before
    /// the channel, modelling a float predictor that is close to but not
    /// exactly on the curve. Errors are then measured against that float
    /// prediction rather than against the true value.
    #[serde(default)]
    pub input_jitter: f64,
}

impl ChannelConfig {
    pub fn new(channel: Channel, seed: u64) -> Self {
        ChannelConfig {
            channel,
            seed,
            shared_noise: false,
            input_jitter: 0.0,
        }
    }

    pub fn with_input_jitter(mut self, sigma: f64) -> Self {
        self.input_jitter = sigma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.input_jitter.is_finite() && self.input_jitter >= 0.0) {
            return Err(Error::Config(format!(
                "input jitter {} must be finite and >= 0",
                self.input_jitter
            )));
        }
        self.channel.validate()
    }
}

/// Uniform quantizer with `2^bits` levels spanning `[lo, hi]`.
///
/// Input is clamped into the range first; ties round half away from zero.
pub fn quantize(v: f64, bits: u32, lo: f64, hi: f64) -> f64 {
    let levels = ((1u64 << bits) - 1) as f64;
    let unit = (v.clamp(lo, hi) - lo) / (hi - lo);
    lo + (unit * levels).round() / levels * (hi - lo)
}

/// Median of a non-empty slice; reorders the slice.
fn median_in_place(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (left, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = left.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

/// `1.4826 · median(|s − median(s)|)`
pub fn scaled_mad(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("non-finite sample".into()));
    }
    let mut buf = samples.to_vec();
    let med = median_in_place(&mut buf);
    for v in buf.iter_mut() {
        *v = (*v - med).abs();
    }
    Ok(MAD_SCALE * median_in_place(&mut buf))
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub mean: f64,
    pub sd: f64,
    pub scaled_mad: f64,
    pub outlier_rate: f64,
    pub sample_count: usize,
}

impl ErrorStats {
    pub fn from_errors(errors: &[f64], outliers: usize, trials: usize) -> Result<Self> {
        let n = errors.len();
        let mean = compensated_sum(errors.iter().copied()) / n.max(1) as f64;
        let var = compensated_sum(errors.iter().map(|e| (e - mean) * (e - mean)))
            / (n.max(2) - 1) as f64;
        Ok(ErrorStats {
            mean,
            sd: var.sqrt(),
            scaled_mad: scaled_mad(errors)?,
            outlier_rate: if trials == 0 { 0.0 } else { outliers as f64 / trials as f64 },
            sample_count: n,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub sigma_hat_components: f64,
    pub sigma_hat_scalar: f64,
    pub measured_factor: f64,
    /// Curve length `L`, the ideal inlier reduction.
    pub theoretical_factor: f64,
    /// `bits + log2(measured_factor)`; absent when the channel has no
    /// quantizer or the factor is not a positive finite number.
    pub effective_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    /// Pooled `x` and `y` component errors.
    pub components: ErrorStats,
    /// Decoded scalar errors `q' − q`.
    pub scalar: ErrorStats,
    /// The scalar passed through the same channel directly.
    pub baseline: ErrorStats,
    pub reduction: ReductionReport,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum QDistribution {
    #[default]
    Uniform,
    /// Resample uniformly (with replacement) from normalized values.
    Values(Vec<f64>),
}

impl QDistribution {
    fn validate(&self) -> Result<()> {
        if let QDistribution::Values(v) = self {
            if v.is_empty() {
                return Err(Error::EmptyInput);
            }
            if v.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::Domain("q distribution value outside [0, 1]".into()));
            }
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            QDistribution::Uniform => rng.random::<f64>(),
            QDistribution::Values(v) => v[rng.random_range(0..v.len())],
        }
    }
}

/// Raw per-sample errors in sample order.
#[derive(Debug, Clone, Default)]
pub struct ChannelSamples {
    pub dx: Vec<f64>,
    pub dy: Vec<f64>,
    pub dq: Vec<f64>,
    pub baseline: Vec<f64>,
    /// Samples whose displacement leaves the `±h/2` box.
    pub outliers: usize,
}

fn chunk_rng(seed: u64, chunk: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk.wrapping_mul(STREAMS).wrapping_add(stream));
    rng
}

/// Draws `num_samples` values, encodes them, degrades both components and
/// decodes through `grid`.
///
/// Component errors are `channel(v) − v` for the (optionally jittered)
/// encoded point `v`; scalar errors are the grid decode of the degraded
/// point minus the exact decode of `v`, which is `q` itself without jitter.
/// A sample is an outlier when either component moves by more than `h/2`.
pub fn sample_channel(
    curve: &Polyline,
    grid: &DecodeGrid,
    cfg: &ChannelConfig,
    num_samples: usize,
    dist: &QDistribution,
) -> Result<ChannelSamples> {
    if !grid.matches(curve) {
        return Err(Error::Config(format!(
            "decode grid built for {:?}, curve is {:?}",
            grid.spec(),
            curve.spec()
        )));
    }
    if num_samples < MIN_SAMPLES {
        return Err(Error::Config(format!(
            "need at least {MIN_SAMPLES} samples, got {num_samples}"
        )));
    }
    cfg.validate()?;
    dist.validate()?;

    let half_edge = curve.edge_length() / 2.0;
    let chunks = num_samples.div_ceil(CHUNK);
    let parts: Vec<Result<ChannelSamples>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(num_samples - c * CHUNK);
            let c = c as u64;
            let mut q_rng = chunk_rng(cfg.seed, c, STREAM_Q);
            let mut x_rng = chunk_rng(cfg.seed, c, STREAM_X);
            let y_stream = if cfg.shared_noise { STREAM_X } else { STREAM_Y };
            let mut y_rng = chunk_rng(cfg.seed, c, y_stream);
            let mut b_rng = chunk_rng(cfg.seed, c, STREAM_BASELINE);
            let mut j_rng = chunk_rng(cfg.seed, c, STREAM_JITTER);

            let mut out = ChannelSamples {
                dx: Vec::with_capacity(len),
                dy: Vec::with_capacity(len),
                dq: Vec::with_capacity(len),
                baseline: Vec::with_capacity(len),
                outliers: 0,
            };
            for _ in 0..len {
                let q = dist.draw(&mut q_rng);
                let mut p = encode(q, curve)?;
                let mut reference = q;
                if cfg.input_jitter > 0.0 {
                    let jx: f64 = StandardNormal.sample(&mut j_rng);
                    let jy: f64 = StandardNormal.sample(&mut j_rng);
                    p.x += cfg.input_jitter * jx;
                    p.y += cfg.input_jitter * jy;
                    reference = decode_exact(p, curve).q;
                }
                let x = cfg.channel.apply(p.x, &mut x_rng);
                let y = cfg.channel.apply(p.y, &mut y_rng);
                let decoded = grid.lookup(CurvePoint::new(x, y));
                let (dx, dy) = (x - p.x, y - p.y);
                if dx.abs().max(dy.abs()) > half_edge {
                    out.outliers += 1;
                }
                out.dx.push(dx);
                out.dy.push(dy);
                out.dq.push(decoded.q - reference);
                out.baseline.push(cfg.channel.apply(q, &mut b_rng) - q);
            }
            Ok(out)
        })
        .collect();

    let mut all = ChannelSamples {
        dx: Vec::with_capacity(num_samples),
        dy: Vec::with_capacity(num_samples),
        dq: Vec::with_capacity(num_samples),
        baseline: Vec::with_capacity(num_samples),
        outliers: 0,
    };
    for part in parts {
        let part = part?;
        all.dx.extend(part.dx);
        all.dy.extend(part.dy);
        all.dq.extend(part.dq);
        all.baseline.extend(part.baseline);
        all.outliers += part.outliers;
    }
    Ok(all)
}

pub fn simulate_channel(
    curve: &Polyline,
    grid: &DecodeGrid,
    cfg: &ChannelConfig,
    num_samples: usize,
    dist: &QDistribution,
) -> Result<SimulationReport> {
    let s = sample_channel(curve, grid, cfg, num_samples, dist)?;
    let n = s.dq.len();
    let pooled: Vec<f64> = s.dx.iter().chain(&s.dy).copied().collect();
    let components = ErrorStats::from_errors(&pooled, s.outliers, n)?;
    let scalar = ErrorStats::from_errors(&s.dq, s.outliers, n)?;
    let baseline = ErrorStats::from_errors(&s.baseline, 0, n)?;

    let measured_factor = components.scaled_mad / scalar.scaled_mad;
    let reduction = ReductionReport {
        sigma_hat_components: components.scaled_mad,
        sigma_hat_scalar: scalar.scaled_mad,
        measured_factor,
        theoretical_factor: curve.length(),
        effective_bits: cfg
            .channel
            .bits()
            .filter(|_| measured_factor.is_finite() && measured_factor > 0.0)
            .map(|b| b as f64 + measured_factor.log2()),
    };
    Ok(SimulationReport {
        components,
        scalar,
        baseline,
        reduction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram2D {
    pub bins: usize,
    /// Bins cover `[-extent, extent]` on both axes.
    pub extent: f64,
    /// Row-major, row index from `dy`, column from `dx`.
    pub counts: Vec<u64>,
    /// Samples falling outside the histogram extent.
    pub overflow: u64,
}

impl Histogram2D {
    pub fn new(bins: usize, extent: f64) -> Self {
        Histogram2D {
            bins,
            extent,
            counts: vec![0; bins * bins],
            overflow: 0,
        }
    }

    pub fn add(&mut self, dx: f64, dy: f64) {
        let bin = |v: f64| {
            let u = (v + self.extent) / (2.0 * self.extent);
            if (0.0..=1.0).contains(&u) {
                Some(((u * self.bins as f64) as usize).min(self.bins - 1))
            } else {
                None
            }
        };
        match (bin(dx), bin(dy)) {
            (Some(c), Some(r)) => self.counts[r * self.bins + c] += 1,
            _ => self.overflow += 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCorrelation {
    pub histogram: Histogram2D,
    /// Pearson correlation of `dx` and `dy`.
    pub correlation: f64,
    /// Half-width of the outlier box, `h/2`.
    pub box_half_width: f64,
    /// Fraction of samples outside the box.
    pub outside_box_rate: f64,
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = compensated_sum(a.iter().copied()) / n;
    let mb = compensated_sum(b.iter().copied()) / n;
    let cov = compensated_sum(a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)));
    let va = compensated_sum(a.iter().map(|x| (x - ma) * (x - ma)));
    let vb = compensated_sum(b.iter().map(|y| (y - mb) * (y - mb)));
    if va == 0.0 || vb == 0.0 {
        return 0.0;
    }
    cov / (va.sqrt() * vb.sqrt())
}

/// Joint distribution of the component errors. The histogram spans `±h`
/// with `bins` bins per axis.
pub fn error_correlation(
    curve: &Polyline,
    grid: &DecodeGrid,
    cfg: &ChannelConfig,
    num_samples: usize,
    bins: usize,
) -> Result<ErrorCorrelation> {
    if bins == 0 {
        return Err(Error::Config("histogram needs at least one bin".into()));
    }
    let s = sample_channel(curve, grid, cfg, num_samples, &QDistribution::Uniform)?;
    let half = curve.edge_length() / 2.0;
    let mut histogram = Histogram2D::new(bins, curve.edge_length());
    let mut outside = 0usize;
    for (&dx, &dy) in s.dx.iter().zip(&s.dy) {
        histogram.add(dx, dy);
        if dx.abs() > half || dy.abs() > half {
            outside += 1;
        }
    }
    Ok(ErrorCorrelation {
        histogram,
        correlation: pearson(&s.dx, &s.dy),
        box_half_width: half,
        outside_box_rate: outside as f64 / s.dx.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShannonPrediction {
    pub snr: f64,
    /// Distinguishable levels `√(1 + SNR)`.
    pub levels: f64,
    /// Error SD equivalent to two independent channels, `σ²·√12`.
    pub two_channel_sigma: f64,
    pub max_factor: f64,
}

/// Capacity bound for a uniformly distributed unit-range signal with
/// quantization error SD `sigma`.
pub fn shannon_prediction(sigma: f64) -> Result<ShannonPrediction> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Domain(format!("sigma {sigma} must be > 0")));
    }
    let snr = 1.0 / (12.0 * sigma * sigma);
    let two_channel_sigma = sigma * sigma * 12f64.sqrt();
    Ok(ShannonPrediction {
        snr,
        levels: (1.0 + snr).sqrt(),
        two_channel_sigma,
        max_factor: sigma / two_channel_sigma,
    })
}

pub fn effective_bits(bits: u32, length: f64) -> Result<f64> {
    if !(length.is_finite() && length >= 1.0) {
        return Err(Error::Domain(format!("curve length {length} < 1")));
    }
    Ok(bits as f64 + length.log2())
}

//! Reproducible experiment drivers and report rendering used by the CLI.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::codec::DecodeGrid;
use crate::curve::{generate, CurveSpec, Polyline};
use crate::error::{Error, Result};
use crate::io::Normalization;
use crate::quantsim::{simulate_channel, ChannelConfig, Histogram2D, QDistribution, MIN_SAMPLES};
use crate::raster::Raster;

pub const DEFAULT_GRID_N: usize = 512;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const SWEEP_ORDERS: [u32; 4] = [1, 2, 3, 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
    Svg,
}

/// Configuration of a `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub curve: CurveSpec,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    pub channel: ChannelConfig,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub outputs: String,
    #[serde(default = "default_formats")]
    pub report_formats: Vec<ReportFormat>,
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_formats() -> Vec<ReportFormat> {
    vec![ReportFormat::Json, ReportFormat::Csv]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.curve.validate()?;
        self.channel.validate()?;
        if self.samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "samples {} < {MIN_SAMPLES}",
                self.samples
            )));
        }
        if self.grid_n < 2 {
            return Err(Error::Config(format!("grid_n {} < 2", self.grid_n)));
        }
        Ok(())
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_slice(bytes)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub p: u32,
    pub length: f64,
    pub edge_length: f64,
    pub measured_factor: f64,
    pub effective_bits: Option<f64>,
    pub outlier_rate: f64,
}

pub const SWEEP_CSV_HEADER: &str = "p,L_p,h_p,measured_factor,effective_bits,outlier_rate";

/// Reduction factor per Hilbert order under one channel configuration.
pub fn run_sweep(
    orders: &[u32],
    border: f64,
    grid_n: usize,
    channel: &ChannelConfig,
    samples: usize,
) -> Result<Vec<SweepRow>> {
    orders
        .iter()
        .map(|&p| {
            let curve = generate(CurveSpec::hilbert(p).with_border(border))?;
            let grid = DecodeGrid::build(&curve, grid_n)?;
            let report = simulate_channel(&curve, &grid, channel, samples, &QDistribution::Uniform)?;
            Ok(SweepRow {
                p,
                length: curve.length(),
                edge_length: curve.edge_length(),
                measured_factor: report.reduction.measured_factor,
                effective_bits: report.reduction.effective_bits,
                outlier_rate: report.components.outlier_rate,
            })
        })
        .collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    // Geometry columns are closed forms; rounding hides the last-ulp noise
    // of products such as 3 * 0.8.
    let geom = |v: f64| (v * 1e12).round() / 1e12;
    for r in rows {
        let bits = r.effective_bits.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.p,
            geom(r.length),
            geom(r.edge_length),
            r.measured_factor,
            bits,
            r.outlier_rate
        );
    }
    out
}

/// The `q` and `r` maps of a decode grid as rasters with `y` pointing up.
pub fn lut_images(grid: &DecodeGrid) -> (Raster, Raster) {
    let n = grid.n();
    let q_img = Raster::from_fn(n, n, |row, col| grid.q_at(n - 1 - row, col));
    let r_img = Raster::from_fn(n, n, |row, col| grid.r_at(n - 1 - row, col));
    (q_img, r_img)
}

/// Grayscale SVG of a raster under `norm`, one rect per run of equal 8-bit
/// shade in a row. Non-finite pixels are left transparent.
pub fn raster_svg(raster: &Raster, norm: &Normalization) -> String {
    let (w, h) = raster.dims();
    let shade = |v: f64| v.is_finite().then(|| (norm.normalize(v).clamp(0.0, 1.0) * 255.0).round() as u8);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" shape-rendering=\"crispEdges\">\n"
    );
    for row in 0..h {
        let mut col = 0;
        while col < w {
            let s = shade(raster.get(row, col));
            let start = col;
            while col < w && shade(raster.get(row, col)) == s {
                col += 1;
            }
            if let Some(s) = s {
                let _ = writeln!(
                    out,
                    "<rect x=\"{start}\" y=\"{row}\" width=\"{}\" height=\"1\" fill=\"rgb({s},{s},{s})\"/>",
                    col - start
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn curve_csv(curve: &Polyline) -> String {
    let mut out = String::from("index,x,y\n");
    for (i, p) in curve.nodes().iter().enumerate() {
        let _ = writeln!(out, "{i},{},{}", p.x, p.y);
    }
    out
}

const SVG_SIZE: f64 = 512.0;

/// The polyline drawn in the unit square, `y` up.
pub fn curve_svg(curve: &Polyline) -> String {
    let points: Vec<String> = curve
        .nodes()
        .iter()
        .map(|p| format!("{:.3},{:.3}", p.x * SVG_SIZE, (1.0 - p.y) * SVG_SIZE))
        .collect();
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n\
         <rect width=\"{s}\" height=\"{s}\" fill=\"white\" stroke=\"black\"/>\n\
         <polyline fill=\"none\" stroke=\"black\" stroke-width=\"2\" points=\"{}\"/>\n\
         </svg>\n",
        points.join(" "),
        s = SVG_SIZE
    )
}

/// Joint error histogram as grayscale cells with the `±h/2` outlier box.
pub fn histogram_svg(hist: &Histogram2D, box_half_width: f64) -> String {
    let cell = SVG_SIZE / hist.bins as f64;
    let peak = hist.counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n\
         <rect width=\"{s}\" height=\"{s}\" fill=\"white\"/>\n",
        s = SVG_SIZE
    );
    for row in 0..hist.bins {
        for col in 0..hist.bins {
            let count = hist.counts[row * hist.bins + col];
            if count == 0 {
                continue;
            }
            let shade = 255 - (255.0 * (count as f64 / peak).sqrt()).round() as u8;
            let _ = writeln!(
                out,
                "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{cell:.3}\" height=\"{cell:.3}\" fill=\"rgb({shade},{shade},{shade})\"/>",
                col as f64 * cell,
                (hist.bins - 1 - row) as f64 * cell,
            );
        }
    }
    let half = box_half_width / hist.extent * SVG_SIZE / 2.0;
    let _ = writeln!(
        out,
        "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{:.3}\" height=\"{:.3}\" fill=\"none\" stroke=\"red\"/>\n</svg>",
        SVG_SIZE / 2.0 - half,
        SVG_SIZE / 2.0 - half,
        2.0 * half,
        2.0 * half
    );
    out
}

/// Bar chart of a 1D histogram, used for error distributions.
pub fn bars_svg(counts: &[u64]) -> String {
    let width = SVG_SIZE / counts.len().max(1) as f64;
    let peak = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let mut path = String::new();
    for (i, &c) in counts.iter().enumerate() {
        let height = c as f64 / peak * SVG_SIZE;
        let _ = write!(
            path,
            "M{:.3} {:.3}h{:.3}v{:.3}h{:.3}z ",
            i as f64 * width,
            SVG_SIZE,
            width,
            -height,
            -width
        );
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{s}\" height=\"{s}\" viewBox=\"0 0 {s} {s}\">\n\
         <path fill=\"steelblue\" d=\"{}\"/>\n</svg>\n",
        path.trim_end(),
        s = SVG_SIZE
    )
}

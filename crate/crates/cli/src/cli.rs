use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hilq::CurveFamily;

#[derive(Debug, Parser)]
#[command(name = "hilq", version, about = "Space-filling curve output codec and channel experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the nodes of a curve polyline.
    Curve(CurveCmd),
    /// Build or render decode lookup tables.
    #[command(subcommand)]
    Luts(LutsCmd),
    /// Map scalars in [0, 1] to curve points.
    Encode(EncodeCmd),
    /// Project points back onto the curve.
    Decode(DecodeCmd),
    /// Monte-Carlo channel simulation for one curve.
    Simulate(SimulateCmd),
    /// Reduction factor for Hilbert orders 1 to 4.
    Sweep(SweepCmd),
    /// Depth-map metrics between a ground-truth and a predicted raster.
    Metrics(MetricsCmd),
    /// Evaluate the composite loss over raster triplets.
    LossEval(LossEvalCmd),
    /// Node counts per curve family against a node budget.
    Catalog(CatalogCmd),
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Curve family [default: hilbert].
    #[arg(long)]
    pub family: Option<CurveFamily>,
    #[arg(long)]
    pub order: Option<u32>,
    /// Inset of the curve from the unit square edges [default: 0.1].
    #[arg(long)]
    pub border: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CurveFormat {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Args)]
pub struct CurveCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: CurveFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum LutsCmd {
    /// Tabulate the exact decode at cell centers and write a LUT file.
    Build(LutsBuildCmd),
    /// Write q and r images of a LUT.
    Render(LutsRenderCmd),
}

#[derive(Debug, Args)]
pub struct LutsBuildCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = hilq::experiments::DEFAULT_GRID_N)]
    pub grid_n: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImageFormat {
    Pgm,
    Pfm,
    Svg,
}

#[derive(Debug, Args)]
pub struct LutsRenderCmd {
    /// Render an existing LUT file instead of building one.
    #[arg(long, conflicts_with = "order")]
    pub lut: Option<PathBuf>,
    #[command(flatten)]
    pub curve: CurveArgs,
    #[arg(long, default_value_t = hilq::experiments::DEFAULT_GRID_N)]
    pub grid_n: usize,
    #[arg(long, value_enum, default_value = "pgm")]
    pub format: ImageFormat,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RasterFormat {
    Pfm,
    Pgm,
}

impl RasterFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RasterFormat::Pfm => "pfm",
            RasterFormat::Pgm => "pgm",
        }
    }
}

#[derive(Debug, Args)]
pub struct EncodeCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Raster of scalars in [0, 1] (PFM, or PGM with optional sidecar).
    #[arg(required_unless_present = "value", conflicts_with = "value")]
    pub input: Option<PathBuf>,
    /// Encode a single scalar and print JSON.
    #[arg(long, allow_negative_numbers = true)]
    pub value: Option<f64>,
    #[arg(long, value_enum, default_value = "pfm")]
    pub format: RasterFormat,
    /// Output directory for `x` and `y` rasters, or output file for `--value`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecodeCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Decode through an existing LUT file.
    #[arg(long, conflicts_with_all = ["order", "exact"])]
    pub lut: Option<PathBuf>,
    #[arg(long, default_value_t = hilq::experiments::DEFAULT_GRID_N)]
    pub grid_n: usize,
    /// Project exactly onto the polyline instead of using a LUT.
    #[arg(long)]
    pub exact: bool,
    /// Raster of x components.
    #[arg(requires = "y", conflicts_with = "point", required_unless_present = "point")]
    pub x: Option<PathBuf>,
    /// Raster of y components.
    pub y: Option<PathBuf>,
    /// Decode a single point given as `x,y` and print JSON.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "pfm")]
    pub format: RasterFormat,
    /// Output directory for `q` and `r` rasters, or output file for `--point`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormatArg {
    Json,
    Csv,
    Svg,
}

/// Channel and sampling flags shared by `simulate` and `sweep`.
///
/// Without `--config` the channel is an 8-bit quantizer on [0, 1] unless
/// `--bits` or `--sigma` say otherwise; with both, noise is added before
/// quantization. Flags override the config file and the environment.
#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub grid_n: Option<usize>,
    #[arg(long)]
    pub bits: Option<u32>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// SD of a Gaussian spread applied to encoded points before the channel.
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Report formats, comma separated.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub format: Vec<ReportFormatArg>,
    /// Output directory; the JSON report goes to stdout when no directory is
    /// configured.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SweepCmd {
    #[arg(long)]
    pub border: Option<f64>,
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    /// Output directory; stdout when none is configured.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MetricsCmd {
    pub gt: PathBuf,
    pub pred: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub window: usize,
    #[arg(long, default_value_t = 4)]
    pub stride: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseLossArg {
    Squared,
    Absolute,
}

#[derive(Debug, Args)]
pub struct LossEvalCmd {
    #[command(flatten)]
    pub curve: CurveArgs,
    /// Ground-truth scalars in [0, 1].
    pub gt: PathBuf,
    /// Predicted x components.
    pub pred_x: PathBuf,
    /// Predicted y components.
    pub pred_y: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 25.0)]
    pub beta: f64,
    #[arg(long, value_enum, default_value = "squared")]
    pub base_loss: BaseLossArg,
    /// Also write the per-pixel total loss as a PFM raster.
    #[arg(long)]
    pub loss_map: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CatalogCmd {
    #[arg(long, default_value_t = 1 << 20)]
    pub max_nodes: u64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: TableFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

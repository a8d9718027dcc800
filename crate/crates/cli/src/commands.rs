use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hilq::experiments::{
    curve_csv, curve_svg, histogram_svg, lut_images, raster_svg, run_sweep, sweep_csv,
    ExperimentConfig, ReportFormat, DEFAULT_GRID_N, DEFAULT_SAMPLES, SWEEP_ORDERS,
};
use hilq::io::{read_lut, read_raster, write_lut, write_raster, write_sidecar, Normalization};
use hilq::losses::{full_loss, BaseLoss, LossConfig};
use hilq::metrics::{evaluate, SCConfig};
use hilq::quantsim::{
    error_correlation, simulate_channel, Channel, ChannelConfig, ErrorStats, QDistribution,
};
use hilq::{
    decode_exact, encode, generate, CurveFamily, CurvePoint, CurveSpec, DecodeGrid, Polyline,
    Raster,
};
use serde::Serialize;
use serde_json::json;

use crate::cli::*;
use crate::error::{ensure, CliError, CliResult};

pub const ENV_SEED: &str = "HILQ_SEED";
pub const ENV_OUT: &str = "HILQ_OUT";

const HISTOGRAM_BINS: usize = 64;
const SIMULATE_CSV_HEADER: &str = "series,mean,sd,scaled_mad,outlier_rate,sample_count";

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Curve(c) => curve(c),
        Command::Luts(LutsCmd::Build(c)) => luts_build(c),
        Command::Luts(LutsCmd::Render(c)) => luts_render(c),
        Command::Encode(c) => encode_cmd(c),
        Command::Decode(c) => decode_cmd(c),
        Command::Simulate(c) => simulate(c),
        Command::Sweep(c) => sweep(c),
        Command::Metrics(c) => metrics(c),
        Command::LossEval(c) => loss_eval(c),
        Command::Catalog(c) => catalog(c),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Library errors while reading input files are data errors whatever their
/// kind.
fn data(e: hilq::Error) -> CliError {
    CliError::Data(e.to_string())
}

fn spec_of(args: &CurveArgs) -> CliResult<CurveSpec> {
    let order = args
        .order
        .ok_or_else(|| usage("--order is required"))?;
    let spec = CurveSpec {
        family: args.family.unwrap_or(CurveFamily::Hilbert),
        order,
        border: args.border.unwrap_or(hilq::curve::DEFAULT_BORDER),
    };
    spec.validate()?;
    Ok(spec)
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `out`, or stdout when `out` is `None`.
fn emit(out: Option<&Path>, text: &str) -> CliResult {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(path, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn check_projection(q: f64, r: f64) -> CliResult {
    ensure((0.0..=1.0).contains(&q) && r.is_finite() && r >= 0.0, || {
        format!("decode produced q={q}, r={r}")
    })
}

fn curve(cmd: CurveCmd) -> CliResult {
    let curve = generate(spec_of(&cmd.curve)?)?;
    let text = match cmd.format {
        CurveFormat::Csv => curve_csv(&curve),
        CurveFormat::Svg => curve_svg(&curve),
        CurveFormat::Json => {
            let nodes: Vec<[f64; 2]> = curve.nodes().iter().map(|p| [p.x, p.y]).collect();
            to_json(&json!({
                "curve": curve.spec(),
                "length": curve.length(),
                "edge_length": curve.edge_length(),
                "nodes": nodes,
            }))?
        }
    };
    emit(cmd.out.as_deref(), &text)
}

fn build_grid(curve: &Polyline, n: usize) -> CliResult<DecodeGrid> {
    let grid = DecodeGrid::build(curve, n)?;
    ensure(
        grid.q_map().iter().all(|q| (0.0..=1.0).contains(q))
            && grid.r_map().iter().all(|r| r.is_finite() && *r >= 0.0),
        || "decode grid holds values outside its range".into(),
    )?;
    Ok(grid)
}

fn luts_build(cmd: LutsBuildCmd) -> CliResult {
    let curve = generate(spec_of(&cmd.curve)?)?;
    let grid = build_grid(&curve, cmd.grid_n)?;
    if let Some(dir) = cmd.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_lut(&cmd.out, &grid)?;
    Ok(())
}

fn load_or_build_grid(lut: Option<&Path>, args: &CurveArgs, n: usize) -> CliResult<DecodeGrid> {
    match lut {
        Some(path) => read_lut(path).map_err(data),
        None => build_grid(&generate(spec_of(args)?)?, n),
    }
}

fn luts_render(cmd: LutsRenderCmd) -> CliResult {
    let grid = load_or_build_grid(cmd.lut.as_deref(), &cmd.curve, cmd.grid_n)?;
    let (q_img, r_img) = lut_images(&grid);
    let r_max = r_img.data().iter().copied().fold(0.0, f64::max);
    let q_norm = Normalization::new(0.0, 1.0)?;
    let r_norm = Normalization::new(0.0, if r_max > 0.0 { r_max } else { 1.0 })?;
    fs::create_dir_all(&cmd.out)?;
    for (name, img, norm) in [("q_map", &q_img, q_norm), ("r_map", &r_img, r_norm)] {
        match cmd.format {
            ImageFormat::Pgm => write_raster(&cmd.out.join(format!("{name}.pgm")), img, Some(norm))?,
            ImageFormat::Pfm => write_raster(&cmd.out.join(format!("{name}.pfm")), img, None)?,
            ImageFormat::Svg => {
                let path = cmd.out.join(format!("{name}.svg"));
                fs::write(&path, raster_svg(img, &norm))?;
                write_sidecar(&path, &norm)?;
            }
        }
    }
    Ok(())
}

fn raster_path(dir: &Path, stem: &str, format: RasterFormat) -> PathBuf {
    dir.join(format!("{stem}.{}", format.extension()))
}

/// Writes a raster; PGM output uses `norm` for the sidecar.
fn write_output(dir: &Path, stem: &str, format: RasterFormat, raster: &Raster, norm: Normalization) -> CliResult {
    let path = raster_path(dir, stem, format);
    match format {
        RasterFormat::Pfm => write_raster(&path, raster, None)?,
        RasterFormat::Pgm => write_raster(&path, raster, Some(norm))?,
    }
    Ok(())
}

fn encode_cmd(cmd: EncodeCmd) -> CliResult {
    let curve = generate(spec_of(&cmd.curve)?)?;
    if let Some(q) = cmd.value {
        let p = encode(q, &curve).map_err(data)?;
        return emit(cmd.out.as_deref(), &to_json(&json!({ "q": q, "x": p.x, "y": p.y }))?);
    }
    let input = cmd.input.as_deref().ok_or_else(|| usage("an input raster or --value is required"))?;
    let out = cmd.out.as_deref().ok_or_else(|| usage("--out <DIR> is required for raster input"))?;
    let values = read_raster(input).map_err(data)?;
    let (xs, ys) = hilq::codec::encode_raster(&values, &curve).map_err(data)?;
    let unit = Normalization::new(0.0, 1.0)?;
    fs::create_dir_all(out)?;
    write_output(out, "x", cmd.format, &xs, unit)?;
    write_output(out, "y", cmd.format, &ys, unit)
}

enum Decoder {
    Exact(Polyline),
    Grid(DecodeGrid),
}

impl Decoder {
    fn project(&self, pt: CurvePoint) -> hilq::Projection {
        match self {
            Decoder::Exact(curve) => decode_exact(pt, curve),
            Decoder::Grid(grid) => grid.lookup(pt),
        }
    }
}

fn decode_cmd(cmd: DecodeCmd) -> CliResult {
    let decoder = if cmd.exact {
        Decoder::Exact(generate(spec_of(&cmd.curve)?)?)
    } else {
        Decoder::Grid(load_or_build_grid(cmd.lut.as_deref(), &cmd.curve, cmd.grid_n)?)
    };
    if let Some(point) = &cmd.point {
        let &[x, y] = point.as_slice() else {
            return Err(usage("--point takes exactly two numbers"));
        };
        if !(x.is_finite() && y.is_finite()) {
            return Err(CliError::Data(format!("point ({x}, {y}) is not finite")));
        }
        let p = decoder.project(CurvePoint::new(x, y));
        check_projection(p.q, p.r)?;
        return emit(
            cmd.out.as_deref(),
            &to_json(&json!({ "x": x, "y": y, "q": p.q, "r": p.r, "segment_index": p.segment_index }))?,
        );
    }
    let (Some(xp), Some(yp)) = (&cmd.x, &cmd.y) else {
        return Err(usage("decode needs two rasters or --point"));
    };
    let out = cmd.out.as_deref().ok_or_else(|| usage("--out <DIR> is required for raster input"))?;
    let xs = read_raster(xp).map_err(data)?;
    let ys = read_raster(yp).map_err(data)?;
    if xs.dims() != ys.dims() {
        return Err(CliError::Data(format!(
            "x raster {:?} and y raster {:?} differ in shape",
            xs.dims(),
            ys.dims()
        )));
    }
    let mut qs = Vec::with_capacity(xs.len());
    let mut rs = Vec::with_capacity(xs.len());
    for (&x, &y) in xs.data().iter().zip(ys.data()) {
        if !(x.is_finite() && y.is_finite()) {
            return Err(CliError::Data("non-finite pixel in input".into()));
        }
        let p = decoder.project(CurvePoint::new(x, y));
        check_projection(p.q, p.r)?;
        qs.push(p.q);
        rs.push(p.r);
    }
    let (w, h) = xs.dims();
    let (q, r) = (Raster::new(w, h, qs)?, Raster::new(w, h, rs)?);
    fs::create_dir_all(out)?;
    write_output(out, "q", cmd.format, &q, Normalization::new(0.0, 1.0)?)?;
    write_output(out, "r", cmd.format, &r, Normalization::of(&r)?)
}

/// A fully resolved `simulate` or `sweep` run.
struct Resolved {
    config: ExperimentConfig,
    out: Option<PathBuf>,
}

fn env_seed() -> CliResult<Option<u64>> {
    match env::var(ENV_SEED) {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{ENV_SEED}={s:?} is not an unsigned integer"))),
        Err(env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(usage(format!("{ENV_SEED}: {e}"))),
    }
}

fn env_out() -> Option<PathBuf> {
    env::var_os(ENV_OUT).filter(|v| !v.is_empty()).map(PathBuf::from)
}

/// Config file, then environment (seed, output directory), then flags.
fn resolve(
    curve: &CurveArgs,
    ch: &ChannelArgs,
    formats: &[ReportFormatArg],
    out: Option<&Path>,
    order_required: bool,
) -> CliResult<Resolved> {
    let mut cfg = match &ch.config {
        Some(path) => {
            let bytes = fs::read(path)
                .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
            ExperimentConfig::from_json(&bytes)
                .map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => {
            let order = match (curve.order, order_required) {
                (Some(p), _) => p,
                (None, false) => SWEEP_ORDERS[0],
                (None, true) => return Err(usage("--order or --config is required")),
            };
            ExperimentConfig {
                curve: CurveSpec::hilbert(order),
                grid_n: DEFAULT_GRID_N,
                channel: ChannelConfig::new(Channel::quantizer(8), 0),
                samples: DEFAULT_SAMPLES,
                outputs: String::new(),
                report_formats: vec![ReportFormat::Json, ReportFormat::Csv],
            }
        }
    };

    if let Some(seed) = env_seed()? {
        cfg.channel.seed = seed;
    }
    if let Some(dir) = env_out() {
        cfg.outputs = dir.to_string_lossy().into_owned();
    }

    if let Some(f) = curve.family {
        cfg.curve.family = f;
    }
    if let Some(p) = curve.order {
        cfg.curve.order = p;
    }
    if let Some(b) = curve.border {
        cfg.curve.border = b;
    }
    if let Some(n) = ch.grid_n {
        cfg.grid_n = n;
    }
    let noise = ch.sigma.map(Channel::gaussian);
    let quant = ch.bits.map(Channel::quantizer);
    match (noise, quant) {
        (Some(n), Some(q)) => cfg.channel.channel = Channel::Compose { stages: vec![n, q] },
        (Some(c), None) | (None, Some(c)) => cfg.channel.channel = c,
        (None, None) => {}
    }
    if let Some(seed) = ch.seed {
        cfg.channel.seed = seed;
    }
    if let Some(n) = ch.samples {
        cfg.samples = n;
    }
    if let Some(j) = ch.jitter {
        cfg.channel.input_jitter = j;
    }
    if !formats.is_empty() {
        cfg.report_formats = formats
            .iter()
            .map(|f| match f {
                ReportFormatArg::Json => ReportFormat::Json,
                ReportFormatArg::Csv => ReportFormat::Csv,
                ReportFormatArg::Svg => ReportFormat::Svg,
            })
            .collect();
    }
    if let Some(dir) = out {
        cfg.outputs = dir.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    let out = (!cfg.outputs.is_empty()).then(|| PathBuf::from(&cfg.outputs));
    Ok(Resolved { config: cfg, out })
}

fn check_stats(name: &str, s: &ErrorStats, samples: usize) -> CliResult {
    ensure(
        s.sd.is_finite()
            && s.sd >= 0.0
            && s.scaled_mad.is_finite()
            && s.scaled_mad >= 0.0
            && (0.0..=1.0).contains(&s.outlier_rate)
            && s.sample_count >= samples,
        || format!("{name} statistics are inconsistent: {s:?}"),
    )
}

fn stats_csv(report: &hilq::quantsim::SimulationReport) -> String {
    let mut out = format!("{SIMULATE_CSV_HEADER}\n");
    for (name, s) in [
        ("components", &report.components),
        ("scalar", &report.scalar),
        ("baseline", &report.baseline),
    ] {
        let _ = writeln!(
            out,
            "{name},{},{},{},{},{}",
            s.mean, s.sd, s.scaled_mad, s.outlier_rate, s.sample_count
        );
    }
    out
}

fn simulate(cmd: SimulateCmd) -> CliResult {
    let Resolved { config, out } = resolve(&cmd.curve, &cmd.channel, &cmd.format, cmd.out.as_deref(), true)?;
    let curve = generate(config.curve)?;
    let grid = build_grid(&curve, config.grid_n)?;
    let report = simulate_channel(&curve, &grid, &config.channel, config.samples, &QDistribution::Uniform)?;
    check_stats("component", &report.components, 2 * config.samples)?;
    check_stats("scalar", &report.scalar, config.samples)?;
    check_stats("baseline", &report.baseline, config.samples)?;
    let joint = error_correlation(&curve, &grid, &config.channel, config.samples, HISTOGRAM_BINS)?;
    ensure((joint.outside_box_rate - report.components.outlier_rate).abs() < 1e-12, || {
        "outlier rate differs between two passes over the same samples".into()
    })?;

    let json_report = to_json(&json!({
        "config": config,
        "length": curve.length(),
        "edge_length": curve.edge_length(),
        "report": report,
        "joint_errors": {
            "correlation": joint.correlation,
            "box_half_width": joint.box_half_width,
            "outside_box_rate": joint.outside_box_rate,
            "histogram_extent": joint.histogram.extent,
            "histogram_overflow": joint.histogram.overflow,
        },
    }))?;
    let Some(dir) = out else {
        return emit(None, &json_report);
    };
    fs::create_dir_all(&dir)?;
    for format in &config.report_formats {
        match format {
            ReportFormat::Json => fs::write(dir.join("report.json"), &json_report)?,
            ReportFormat::Csv => fs::write(dir.join("report.csv"), stats_csv(&report))?,
            ReportFormat::Svg => fs::write(
                dir.join("histogram.svg"),
                histogram_svg(&joint.histogram, joint.box_half_width),
            )?,
        }
    }
    Ok(())
}

fn sweep(cmd: SweepCmd) -> CliResult {
    let curve = CurveArgs {
        family: None,
        order: None,
        border: cmd.border,
    };
    let Resolved { config, out } = resolve(&curve, &cmd.channel, &[], cmd.out.as_deref(), false)?;
    if config.curve.family != CurveFamily::Hilbert {
        return Err(usage("sweep runs over Hilbert orders only"));
    }
    let rows = run_sweep(
        &SWEEP_ORDERS,
        config.curve.border,
        config.grid_n,
        &config.channel,
        config.samples,
    )?;
    for (row, p) in rows.iter().zip(SWEEP_ORDERS) {
        ensure(row.p == p && (0.0..=1.0).contains(&row.outlier_rate), || {
            format!("sweep row for order {p} is inconsistent: {row:?}")
        })?;
    }
    let (text, name) = match cmd.format {
        TableFormat::Csv => (sweep_csv(&rows), "sweep.csv"),
        TableFormat::Json => (to_json(&rows)?, "sweep.json"),
    };
    let path = out.map(|dir| dir.join(name));
    emit(path.as_deref(), &text)
}

fn metrics(cmd: MetricsCmd) -> CliResult {
    let gt = read_raster(&cmd.gt).map_err(data)?;
    let pred = read_raster(&cmd.pred).map_err(data)?;
    let sc = SCConfig {
        window: cmd.window,
        stride: cmd.stride,
    };
    if sc.window < 2 || sc.stride == 0 {
        return Err(usage("--window must be >= 2 and --stride >= 1"));
    }
    let report = evaluate(&gt, &pred, &sc).map_err(data)?;
    ensure(
        (0.0..=1.0).contains(&report.delta1) && report.s_c.is_none_or(|s| (-1.0..=1.0).contains(&s)),
        || format!("metrics out of range: {report:?}"),
    )?;
    let text = match cmd.format {
        TableFormat::Json => {
            let mut value = serde_json::to_value(report)?;
            value["window"] = json!(sc.window);
            value["stride"] = json!(sc.stride);
            to_json(&value)?
        }
        TableFormat::Csv => format!(
            "abs_rel,mae,rmse,delta1,s_c,valid_pixel_count\n{},{},{},{},{},{}\n",
            report.abs_rel,
            report.mae,
            report.rmse,
            report.delta1,
            report.s_c.map(|s| s.to_string()).unwrap_or_default(),
            report.valid_pixel_count
        ),
    };
    emit(cmd.out.as_deref(), &text)
}

fn loss_eval(cmd: LossEvalCmd) -> CliResult {
    let curve = generate(spec_of(&cmd.curve)?)?;
    let cfg = LossConfig {
        alpha: cmd.alpha,
        beta: cmd.beta,
        base_loss: match cmd.base_loss {
            BaseLossArg::Squared => BaseLoss::SquaredError,
            BaseLossArg::Absolute => BaseLoss::AbsoluteError,
        },
    };
    if !(cfg.alpha.is_finite() && cfg.alpha >= 0.0 && cfg.beta.is_finite() && cfg.beta >= 0.0) {
        return Err(usage("--alpha and --beta must be finite and >= 0"));
    }
    let gt = read_raster(&cmd.gt).map_err(data)?;
    let px = read_raster(&cmd.pred_x).map_err(data)?;
    let py = read_raster(&cmd.pred_y).map_err(data)?;
    if gt.dims() != px.dims() || gt.dims() != py.dims() {
        return Err(CliError::Data(format!(
            "raster shapes differ: {:?}, {:?}, {:?}",
            gt.dims(),
            px.dims(),
            py.dims()
        )));
    }

    let mut per_pixel = Vec::with_capacity(gt.len());
    let (mut total, mut base, mut hil, mut r_sum, mut r_max) = (0.0, 0.0, 0.0, 0.0, 0.0f64);
    let (mut evaluated, mut skipped, mut kinks) = (0usize, 0usize, 0usize);
    for ((&q, &x), &y) in gt.data().iter().zip(px.data()).zip(py.data()) {
        let pred = CurvePoint::new(x, y);
        let in_square = (0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y);
        if !(q.is_finite() && (0.0..=1.0).contains(&q) && in_square) {
            skipped += 1;
            per_pixel.push(f64::NAN);
            continue;
        }
        let l = full_loss(q, pred, &curve, &cfg).map_err(data)?;
        ensure(l.total.is_finite() && l.total >= 0.0, || format!("negative or non-finite loss {l:?}"))?;
        evaluated += 1;
        kinks += l.non_differentiable as usize;
        total += l.total;
        base += l.base;
        hil += l.hilbert;
        r_sum += l.r;
        r_max = r_max.max(l.r);
        per_pixel.push(l.total);
    }
    if evaluated == 0 {
        return Err(data(hilq::Error::NoValidPixels));
    }
    if let Some(path) = &cmd.loss_map {
        write_raster(path, &Raster::new(gt.width(), gt.height(), per_pixel)?, None)?;
    }
    let n = evaluated as f64;
    let text = to_json(&json!({
        "curve": curve.spec(),
        "loss": cfg,
        "pixels": gt.len(),
        "evaluated": evaluated,
        "skipped": skipped,
        "non_differentiable": kinks,
        "mean_total": total / n,
        "mean_base": base / n,
        "mean_hilbert": hil / n,
        "mean_r": r_sum / n,
        "max_r": r_max,
    }))?;
    emit(cmd.out.as_deref(), &text)
}

fn catalog(cmd: CatalogCmd) -> CliResult {
    let entries = hilq::curve::family_catalog(cmd.max_nodes);
    let text = match cmd.format {
        TableFormat::Json => to_json(&entries)?,
        TableFormat::Csv => {
            let mut out = String::from("family,growth,usable_orders_under_cap,nodes_at_order\n");
            for e in &entries {
                let nodes: Vec<String> = e.nodes_at_order.iter().map(u64::to_string).collect();
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    e.family,
                    e.family.growth(),
                    e.usable_orders_under_cap,
                    nodes.join(";")
                );
            }
            out
        }
    };
    emit(cmd.out.as_deref(), &text)
}

//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any criterion fails.

use std::time::{Duration, Instant};

use hilq::experiments::{run_sweep, sweep_csv, SWEEP_ORDERS};
use hilq::losses::{hilbert_loss, LossConfig};
use hilq::metrics::{depth_metrics, s_c, SCConfig};
use hilq::quantsim::{
    effective_bits, scaled_mad, shannon_prediction, simulate_channel, Channel, ChannelConfig,
    QDistribution,
};
use hilq::{decode_exact, encode, generate, geometry, CurvePoint, CurveSpec, DecodeGrid, Polyline, Raster};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn curve(p: u32) -> Polyline {
    generate(CurveSpec::hilbert(p)).unwrap()
}

fn within_time(detail: String, started: Instant, limit: Duration) -> Outcome {
    let took = started.elapsed();
    if took > limit {
        Err(format!("{detail}; took {took:.2?} > {limit:?}"))
    } else {
        Ok(format!("{detail}; {took:.2?}"))
    }
}

fn geometry_exact() -> Outcome {
    let t = Instant::now();
    let mut detail = Vec::new();
    for p in 1..=4u32 {
        let (l, h) = geometry(CurveSpec::hilbert(p)).map_err(|e| e.to_string())?;
        let c = curve(p);
        let want_l = ((1u64 << p) + 1) as f64 * 0.8;
        let want_h = 0.8 / ((1u64 << p) - 1) as f64;
        for (got, want) in [(l, want_l), (h, want_h), (c.length(), want_l), (c.edge_length(), want_h)] {
            if (got - want).abs() > 1e-12 {
                return Err(format!("p={p}: {got} vs {want}"));
            }
        }
        detail.push(format!("L{p}={l:.1}"));
    }
    within_time(detail.join(" "), t, Duration::from_secs(1))
}

fn round_trip() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for p in 1..=4 {
        let c = curve(p);
        for _ in 0..100_000 {
            let q: f64 = rng.random();
            let back = decode_exact(encode(q, &c).unwrap(), &c).q;
            worst = worst.max((back - q).abs());
        }
    }
    if worst > 1e-12 {
        return Err(format!("max error {worst:e}"));
    }
    within_time(format!("max error {worst:e}"), t, Duration::from_secs(5))
}

fn lut_fidelity() -> Outcome {
    let t = Instant::now();
    let c = curve(3);
    let grid = DecodeGrid::build(&c, 512).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut total): (f64, f64) = (0.0, 0.0);
    let count = 100_000;
    for _ in 0..count {
        let q: f64 = rng.random();
        let err = (grid.lookup(encode(q, &c).unwrap()).q - q).abs();
        worst = worst.max(err);
        total += err;
    }
    let mean = total / count as f64;
    let (max_bound, mean_bound) = (2f64.sqrt() / 512.0, 1.0 / (512.0 * 7.2));
    let detail = format!("max {worst:.3e} (<= {max_bound:.3e}), mean {mean:.3e} (<= {mean_bound:.3e})");
    if worst > max_bound || mean > mean_bound {
        return Err(detail);
    }
    within_time(detail, t, Duration::from_secs(10))
}

fn reduction_factor() -> Outcome {
    let t = Instant::now();
    let cfg = ChannelConfig::new(Channel::quantizer(8), 42);
    let mut factors = Vec::new();
    let mut failures = Vec::new();
    for p in 1..=4u32 {
        let c = curve(p);
        let grid = DecodeGrid::build(&c, 512).map_err(|e| e.to_string())?;
        let report = simulate_channel(&c, &grid, &cfg, 1_000_000, &QDistribution::Uniform)
            .map_err(|e| e.to_string())?;
        let f = report.reduction.measured_factor;
        let tol = if p == 4 { 0.15 } else { 0.10 };
        if f.is_nan() || (f - c.length()).abs() > tol * c.length() {
            failures.push(format!("p={p}: {f:.3} vs L={:.1}", c.length()));
        }
        factors.push(f);
    }
    if !factors.windows(2).all(|w| w[0] < w[1]) {
        failures.push("not strictly increasing".into());
    }
    let detail = format!("factors {factors:.3?}");
    if !failures.is_empty() {
        return Err(format!("{detail}; {}", failures.join(", ")));
    }
    within_time(detail, t, Duration::from_secs(60))
}

/// Not gated: the same channel with a small Gaussian spread on the float
/// prediction before quantization, which keeps the statistics from
/// collapsing onto quantizer levels.
fn reduction_factor_with_jitter() -> String {
    let cfg = ChannelConfig::new(Channel::quantizer(8), 42).with_input_jitter(0.002);
    let parts: Vec<String> = (1..=4u32)
        .map(|p| {
            let c = curve(p);
            let grid = DecodeGrid::build(&c, 512).unwrap();
            let r = simulate_channel(&c, &grid, &cfg, 1_000_000, &QDistribution::Uniform).unwrap();
            format!("p={p} {:.3}/{:.1}", r.reduction.measured_factor, c.length())
        })
        .collect();
    parts.join(", ")
}

fn shannon() -> Outcome {
    let s = shannon_prediction(0.01).map_err(|e| e.to_string())?;
    let detail = format!("two_channel_sigma {:.6}, max_factor {:.2}", s.two_channel_sigma, s.max_factor);
    if (s.two_channel_sigma - 0.000346).abs() <= 1e-6 && (s.max_factor - 28.9).abs() <= 0.1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bits() -> Outcome {
    let b = effective_bits(8, 7.2).map_err(|e| e.to_string())?;
    if (b - 10.85).abs() <= 0.01 {
        Ok(format!("{b:.4}"))
    } else {
        Err(format!("{b:.4}"))
    }
}

fn gradients() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let cfg = LossConfig::default();
    let step = 1e-6;
    let (mut done, mut worst) = (0, 0f64);
    while done < 1000 {
        let c = curve(rng.random_range(1..=4));
        let h = c.edge_length();
        let (a, b) = c.segment(rng.random_range(0..c.segment_count()));
        let on = a.lerp(b, rng.random_range(0.1..0.9));
        let (tx, ty) = ((b.x - a.x) / h, (b.y - a.y) / h);
        let m = rng.random_range(-h / 3.0..h / 3.0);
        let pred = CurvePoint::new(on.x - ty * m, on.y + tx * m);
        if m.abs() < h / 100.0 || !(0.0..=1.0).contains(&pred.x) || !(0.0..=1.0).contains(&pred.y) {
            continue;
        }
        let gt = encode(rng.random(), &c).unwrap();
        let at = |x: f64, y: f64| hilbert_loss(gt, CurvePoint::new(x, y), &c, &cfg).unwrap();
        let l = at(pred.x, pred.y);
        if l.non_differentiable {
            continue;
        }
        let gx = (at(pred.x + step, pred.y).hilbert - at(pred.x - step, pred.y).hilbert) / (2.0 * step);
        let gy = (at(pred.x, pred.y + step).hilbert - at(pred.x, pred.y - step).hilbert) / (2.0 * step);
        worst = worst.max((l.grad_x - gx).hypot(l.grad_y - gy) / l.grad_x.hypot(l.grad_y));
        done += 1;
    }
    let detail = format!("worst relative error {worst:.2e} over {done} samples");
    if worst > 1e-5 {
        return Err(detail);
    }
    within_time(detail, t, Duration::from_secs(10))
}

fn outlier_threshold() -> Outcome {
    let c = curve(2);
    let h = c.edge_length();
    let segs: Vec<_> = c.segments().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut small, mut large) = (0, 0);
    while small < 100 || large < 100 {
        let k = rng.random_range(0..segs.len());
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (a, b) = segs[k];
        let (tx, ty) = ((b.x - a.x) / h, (b.y - a.y) / h);
        let (nx, ny) = (-ty * side, tx * side);
        let base = a.lerp(b, rng.random_range(0.495..0.505));
        let at = |m: f64| CurvePoint::new(base.x + nx * m * h, base.y + ny * m * h);
        if small < 100 {
            let got = decode_exact(at(0.49), &c).segment_index;
            if got != k {
                return Err(format!("0.49h moved segment {k} to {got}"));
            }
            small += 1;
        }
        // Parallel, non-adjacent segment one edge away on this side.
        let target = (
            CurvePoint::new(a.x + nx * h, a.y + ny * h),
            CurvePoint::new(b.x + nx * h, b.y + ny * h),
        );
        let neighbour = segs.iter().position(|&(p0, p1)| {
            (p0.dist(target.0) < 1e-12 && p1.dist(target.1) < 1e-12)
                || (p0.dist(target.1) < 1e-12 && p1.dist(target.0) < 1e-12)
        });
        if let (true, Some(j)) = (large < 100, neighbour.filter(|j| j.abs_diff(k) > 1)) {
            let got = decode_exact(at(1.01), &c).segment_index;
            if got == k {
                return Err(format!("1.01h stayed on segment {k}"));
            }
            if got != j {
                return Err(format!("1.01h from {k} landed on {got}, expected {j}"));
            }
            large += 1;
        }
    }
    Ok(format!("{small} inlier and {large} outlier cases"))
}

fn metric_identities() -> Outcome {
    let a = Raster::from_fn(16, 12, |r, c| 1.0 + 0.25 * ((r * 5 + c * 3) % 11) as f64 + 0.125 * c as f64);
    let m = depth_metrics(&a, &a).map_err(|e| e.to_string())?;
    if (m.abs_rel, m.mae, m.rmse, m.delta1) != (0.0, 0.0, 0.0, 1.0) {
        return Err(format!("depth_metrics(A, A) = {m:?}"));
    }
    let cfg = SCConfig::default();
    let same = s_c(&a, &a, &cfg).map_err(|e| e.to_string())?;
    if same != 1.0 {
        return Err(format!("s_c(A, A) = {same}"));
    }
    let b = a.map(|v| 9.0 - 0.5 * v + 0.0625 * (v * 8.0).rem_euclid(3.0));
    let base = s_c(&a, &b, &cfg).map_err(|e| e.to_string())?;
    for offset in [-4.0, 0.5, 3.0, 1024.0] {
        let shifted = s_c(&a, &b.map(|v| v + offset), &cfg).map_err(|e| e.to_string())?;
        if shifted != base {
            return Err(format!("offset {offset}: {shifted} vs {base}"));
        }
    }
    let mad = scaled_mad(&[1.0, 2.0, 3.0, 4.0, 5.0]).map_err(|e| e.to_string())?;
    if (mad - 1.4826).abs() > 1e-12 {
        return Err(format!("scaled_mad = {mad}"));
    }
    Ok(format!("s_c(A, B) = {base:.6} under offsets; scaled_mad = {mad}"))
}

fn sweep_in_pool(threads: usize, cfg: &ChannelConfig) -> Result<String, String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| e.to_string())?;
    pool.install(|| run_sweep(&SWEEP_ORDERS, 0.1, 512, cfg, 1_000_000))
        .map(|rows| sweep_csv(&rows))
        .map_err(|e| e.to_string())
}

fn determinism() -> Outcome {
    let t = Instant::now();
    let cfg = ChannelConfig::new(Channel::quantizer(8), 2024);
    let first = sweep_in_pool(2, &cfg)?;
    let second = sweep_in_pool(2, &cfg)?;
    let single = sweep_in_pool(1, &cfg)?;
    let four = sweep_in_pool(4, &cfg)?;
    if first != second {
        return Err("two runs differ".into());
    }
    if first != single || first != four {
        return Err("output depends on thread count".into());
    }
    within_time(format!("{} identical bytes", first.len()), t, Duration::from_secs(120))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("geometry", geometry_exact),
        ("round-trip", round_trip),
        ("lut-fidelity", lut_fidelity),
        ("reduction-factor", reduction_factor),
        ("shannon", shannon),
        ("effective-bits", bits),
        ("gradients", gradients),
        ("outlier-threshold", outlier_threshold),
        ("metric-identities", metric_identities),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
        if *name == "reduction-factor" {
            println!("INFO    reduction-factor with input jitter 0.002: {}", reduction_factor_with_jitter());
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

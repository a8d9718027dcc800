use hilq::codec::encode;
use hilq::curve::{generate, CurvePoint, CurveSpec, Polyline};
use hilq::losses::{full_loss, hilbert_loss, BaseLoss, LossConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(p: u32) -> Polyline {
    generate(CurveSpec::hilbert(p)).unwrap()
}

/// Point offset perpendicular to segment `k` at parameter `u`.
fn offset_point(c: &Polyline, k: usize, u: f64, m: f64) -> (CurvePoint, CurvePoint) {
    let (a, b) = c.segment(k);
    let on = a.lerp(b, u);
    let h = c.edge_length();
    let (tx, ty) = ((b.x - a.x) / h, (b.y - a.y) / h);
    (on, CurvePoint::new(on.x - ty * m, on.y + tx * m))
}

/// Independent projection onto an axis-aligned polyline: clamp the free
/// coordinate to each segment's span.
fn brute_projection(pt: CurvePoint, c: &Polyline) -> (f64, f64) {
    let segs = c.segment_count() as f64;
    let mut best = (f64::INFINITY, 0.0);
    for (k, (a, b)) in c.segments().enumerate() {
        let foot = if (a.x - b.x).abs() < 1e-15 {
            CurvePoint::new(a.x, pt.y.clamp(a.y.min(b.y), a.y.max(b.y)))
        } else {
            CurvePoint::new(pt.x.clamp(a.x.min(b.x), a.x.max(b.x)), a.y)
        };
        let r = pt.dist(foot);
        let t = a.dist(foot) / a.dist(b);
        if r < best.0 - 1e-12 {
            best = (r, (k as f64 + t) / segs);
        }
    }
    best
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cfg = LossConfig::default();
    let step = 1e-6;
    let mut done = 0;
    let mut worst: f64 = 0.0;
    while done < 1000 {
        let p = rng.random_range(1..=4);
        let c = curve(p);
        let h = c.edge_length();
        let k = rng.random_range(0..c.segment_count());
        let u = rng.random_range(0.1..0.9);
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let m = side * rng.random_range(h / 100.0..h / 3.0);
        let (_, pred) = offset_point(&c, k, u, m);
        if !(0.0..=1.0).contains(&pred.x) || !(0.0..=1.0).contains(&pred.y) {
            continue;
        }
        let gt = encode(rng.random::<f64>(), &c).unwrap();
        let at = |x: f64, y: f64| hilbert_loss(gt, CurvePoint::new(x, y), &c, &cfg).unwrap();
        let l = at(pred.x, pred.y);
        if l.non_differentiable || !(l.r > h / 100.0 && l.r < h / 3.0) {
            continue;
        }
        let gx = (at(pred.x + step, pred.y).hilbert - at(pred.x - step, pred.y).hilbert) / (2.0 * step);
        let gy = (at(pred.x, pred.y + step).hilbert - at(pred.x, pred.y - step).hilbert) / (2.0 * step);
        let rel = (l.grad_x - gx).hypot(l.grad_y - gy) / l.grad_x.hypot(l.grad_y);
        worst = worst.max(rel);
        done += 1;
    }
    assert!(worst <= 1e-5, "worst relative error {worst}");
}

#[test]
fn full_loss_gradient_includes_decoded_path() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = curve(2);
    let h = c.edge_length();
    for base_loss in [BaseLoss::SquaredError, BaseLoss::AbsoluteError] {
        let cfg = LossConfig { alpha: 0.5, beta: 25.0, base_loss };
        let mut done = 0;
        while done < 200 {
            let k = rng.random_range(0..c.segment_count());
            let (_, pred) = offset_point(&c, k, rng.random_range(0.1..0.9), rng.random_range(-h / 3.0..h / 3.0));
            let q_gt = rng.random::<f64>();
            let at = |x: f64, y: f64| full_loss(q_gt, CurvePoint::new(x, y), &c, &cfg).unwrap();
            let l = at(pred.x, pred.y);
            if l.non_differentiable || (l.q_xy - q_gt).abs() < 1e-4 {
                continue;
            }
            let s = 1e-6;
            let gx = (at(pred.x + s, pred.y).total - at(pred.x - s, pred.y).total) / (2.0 * s);
            let gy = (at(pred.x, pred.y + s).total - at(pred.x, pred.y - s).total) / (2.0 * s);
            let rel = (l.grad_x - gx).hypot(l.grad_y - gy) / l.grad_x.hypot(l.grad_y).max(1e-9);
            assert!(rel <= 1e-5, "{base_loss:?}: {rel}");
            done += 1;
        }
    }
}

#[test]
fn compositional_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for p in 1..=4 {
        let c = curve(p);
        let h = c.edge_length();
        for _ in 0..300 {
            let k = rng.random_range(0..c.segment_count());
            let (_, pred) = offset_point(&c, k, rng.random::<f64>(), rng.random_range(-h / 2.0..h / 2.0));
            let pred = CurvePoint::new(pred.x.clamp(0.0, 1.0), pred.y.clamp(0.0, 1.0));
            let q_gt = rng.random::<f64>();
            let cfg = LossConfig { alpha: rng.random_range(0.0..3.0), beta: 25.0, base_loss: BaseLoss::SquaredError };
            let l = full_loss(q_gt, pred, &c, &cfg).unwrap();

            let gt = encode(q_gt, &c).unwrap();
            let (r, q_xy) = brute_projection(pred, &c);
            let lh = (gt.x - pred.x).powi(2) + (gt.y - pred.y).powi(2) + 25.0 * r * r;
            let expected = (q_gt - q_xy).powi(2) + cfg.alpha * lh;
            assert!((l.total - expected).abs() <= 1e-12, "{} vs {expected}", l.total);
            assert!((l.total - l.base - cfg.alpha * l.hilbert).abs() <= 1e-12);
        }
    }
}

#[test]
fn reflection_across_segment_keeps_loss() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cfg = LossConfig::default();
    for p in 1..=4 {
        let c = curve(p);
        let h = c.edge_length();
        for _ in 0..100 {
            let k = rng.random_range(0..c.segment_count());
            let u = rng.random_range(0.3..0.7);
            let m = (rng.random_range(0.0..0.25) * h).min(0.09);
            let (gt, _) = offset_point(&c, k, rng.random_range(0.0..1.0), 0.0);
            let (_, left) = offset_point(&c, k, u, m);
            let (_, right) = offset_point(&c, k, u, -m);
            let a = hilbert_loss(gt, left, &c, &cfg).unwrap();
            let b = hilbert_loss(gt, right, &c, &cfg).unwrap();
            assert!((a.hilbert - b.hilbert).abs() <= 1e-12);
            assert!((a.r - b.r).abs() <= 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn hilbert_term_is_non_negative(p in 1u32..=4, q in 0.0f64..=1.0, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let c = curve(p);
        let gt = encode(q, &c).unwrap();
        let l = hilbert_loss(gt, CurvePoint::new(x, y), &c, &LossConfig::default()).unwrap();
        prop_assert!(l.hilbert >= 0.0);
        if gt.dist(CurvePoint::new(x, y)) > 1e-9 {
            prop_assert!(l.hilbert > 0.0);
        }
        let same = hilbert_loss(gt, gt, &c, &LossConfig::default()).unwrap();
        prop_assert!(same.hilbert <= 1e-18);
    }
}

use hilq::codec::{cell_center, decode_exact, decode_raster, encode, encode_raster, DecodeGrid};
use hilq::curve::{generate, CurvePoint, CurveSpec, Polyline};
use hilq::Raster;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn curve(p: u32) -> Polyline {
    generate(CurveSpec::hilbert(p)).unwrap()
}

/// Independent arc-length walk: accumulate edge lengths until reaching
/// `q · L`.
fn arc_length_point(q: f64, c: &Polyline) -> CurvePoint {
    let target = q * c.length();
    let mut walked = 0.0;
    for (a, b) in c.segments() {
        let len = a.dist(b);
        if walked + len >= target {
            return a.lerp(b, (target - walked) / len);
        }
        walked += len;
    }
    *c.nodes().last().unwrap()
}

#[test]
fn encode_matches_arc_length_walk() {
    for p in 1..=5 {
        let c = curve(p);
        for i in 0..=1000 {
            let q = i as f64 / 1000.0;
            let a = encode(q, &c).unwrap();
            let b = arc_length_point(q, &c);
            assert!(a.dist(b) < 1e-12, "p={p} q={q}");
        }
    }
}

#[test]
fn dense_round_trip() {
    for p in 1..=5 {
        let c = curve(p);
        let n = 100_000;
        for i in 0..=n {
            let q = i as f64 / n as f64;
            let d = decode_exact(encode(q, &c).unwrap(), &c);
            assert!((d.q - q).abs() <= 1e-12, "p={p} q={q} got {}", d.q);
            assert!(d.r <= 1e-12);
        }
    }
}

#[test]
fn monotone_and_lipschitz() {
    let c = curve(3);
    let l = c.length();
    let eps = 1e-6;
    let mut prev = -1.0;
    for i in 0..20_000 {
        let q = i as f64 / 20_000.0;
        let s = decode_exact(encode(q, &c).unwrap(), &c).q * l;
        assert!(s > prev);
        prev = s;
        let a = encode(q, &c).unwrap();
        let b = encode(q + eps, &c).unwrap();
        assert!(a.dist(b) <= l * eps + 1e-12);
    }
}

/// Segments `k` and direction/normal vectors for interior test points.
fn frame(c: &Polyline, k: usize) -> (CurvePoint, (f64, f64), (f64, f64)) {
    let (a, b) = c.segment(k);
    let h = c.edge_length();
    let t = ((b.x - a.x) / h, (b.y - a.y) / h);
    (a, t, (-t.1, t.0))
}

#[test]
fn inlier_correction() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in 1..=4 {
        let c = curve(p);
        let h = c.edge_length();
        let l = c.length();
        let segs = c.segment_count();
        let mut checked = 0;
        while checked < 500 {
            // Stay more than h away from curve endpoints.
            let k = rng.random_range(0..segs);
            let u: f64 = rng.random_range(0.05..0.95);
            let q = (k as f64 + u) / segs as f64;
            if q * l <= h || (1.0 - q) * l <= h {
                continue;
            }
            let (a, t, nrm) = frame(&c, k);
            let base = CurvePoint::new(a.x + t.0 * u * h, a.y + t.1 * u * h);

            // Along the segment, staying inside it.
            let room = (u.min(1.0 - u) * h).min(0.49 * h);
            let delta = rng.random_range(-room..room);
            let moved = CurvePoint::new(base.x + t.0 * delta, base.y + t.1 * delta);
            let d = decode_exact(moved, &c);
            assert!(((d.q - q).abs() - delta.abs() / l).abs() < 1e-9);

            // Perpendicular, far enough from the segment ends that no
            // neighbouring edge is closer.
            let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let mag = rng.random_range(0.0..1.0) * u.min(1.0 - u).min(0.49) * h;
            let off = CurvePoint::new(base.x + side * nrm.0 * mag, base.y + side * nrm.1 * mag);
            let d = decode_exact(off, &c);
            assert!((d.q - q).abs() < 1e-9, "p={p} k={k} u={u} mag={mag}");
            checked += 1;
        }
    }
}

/// Parallel non-adjacent segment at distance `h` on the given side of
/// segment `k` covering the same span, if any.
fn parallel_neighbour(c: &Polyline, k: usize, side: f64) -> Option<usize> {
    let h = c.edge_length();
    let (_, _, nrm) = frame(c, k);
    let (b0, b1) = c.segment(k);
    let shift = CurvePoint::new(side * nrm.0 * h, side * nrm.1 * h);
    let target = (
        CurvePoint::new(b0.x + shift.x, b0.y + shift.y),
        CurvePoint::new(b1.x + shift.x, b1.y + shift.y),
    );
    c.segments().enumerate().find_map(|(j, (p0, p1))| {
        let same = (p0.dist(target.0) < 1e-12 && p1.dist(target.1) < 1e-12)
            || (p0.dist(target.1) < 1e-12 && p1.dist(target.0) < 1e-12);
        (same && j.abs_diff(k) > 1).then_some(j)
    })
}

#[test]
fn outlier_threshold_on_order_two() {
    let c = curve(2);
    let h = c.edge_length();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut small = 0;
    let mut large = 0;
    while small < 100 || large < 100 {
        let k = rng.random_range(0..c.segment_count());
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let u = rng.random_range(0.495..0.505);
        let (a, t, nrm) = frame(&c, k);
        let base = CurvePoint::new(a.x + t.0 * u * h, a.y + t.1 * u * h);
        let at = |m: f64| CurvePoint::new(base.x + side * nrm.0 * m * h, base.y + side * nrm.1 * m * h);
        if small < 100 {
            assert_eq!(decode_exact(at(0.49), &c).segment_index, k);
            small += 1;
        }
        if large < 100 {
            if let Some(j) = parallel_neighbour(&c, k, side) {
                let d = decode_exact(at(1.01), &c);
                assert_ne!(d.segment_index, k);
                assert_eq!(d.segment_index, j);
                large += 1;
            }
        }
    }
}

#[test]
fn grid_replays_exact_decode() {
    let c = curve(2);
    let grid = DecodeGrid::build(&c, 512).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let (i, j) = (rng.random_range(0..512), rng.random_range(0..512));
        let p = decode_exact(cell_center(512, i, j), &c);
        assert_eq!(grid.q_at(i, j), p.q);
        assert_eq!(grid.r_at(i, j), p.r);
    }
    assert!(grid.q_map().iter().all(|q| (0.0..=1.0).contains(q)));
    assert!(grid.r_map().iter().all(|&r| r >= 0.0));
}

#[test]
fn lut_on_curve_error_bound() {
    let c = curve(3);
    let grid = DecodeGrid::build(&c, 512).unwrap();
    let bound = 2f64.sqrt() / 512.0;
    let mut max_err: f64 = 0.0;
    for i in 0..=100_000 {
        let q = i as f64 / 100_000.0;
        let p = encode(q, &c).unwrap();
        max_err = max_err.max((grid.lookup(p).q - q).abs());
    }
    assert!(max_err <= bound, "max {max_err}");
    let mid = grid.lookup(encode(0.5, &c).unwrap()).q;
    assert!((mid - 0.5).abs() <= bound);
}

#[test]
fn raster_round_trip_within_cell_bound() {
    let c = curve(3);
    let grid = DecodeGrid::build(&c, 256).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let values = Raster::from_fn(40, 30, |_, _| rng.random::<f64>());
    let (x, y) = encode_raster(&values, &c).unwrap();
    let (q, r) = decode_raster(&x, &y, &grid).unwrap();
    for (a, b) in values.data().iter().zip(q.data()) {
        assert!((a - b).abs() <= 2f64.sqrt() / 256.0);
    }
    assert!(r.data().iter().all(|&v| v <= 2f64.sqrt() / 512.0 + 1e-12));
}

proptest! {
    #[test]
    fn decode_is_global_minimum(p in 1u32..=4, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let c = curve(p);
        let pt = CurvePoint::new(x, y);
        let d = decode_exact(pt, &c);
        let foot = encode(d.q, &c).unwrap();
        prop_assert!((pt.dist(foot) - d.r).abs() < 1e-12);
        // Dense sampling of the curve never gets closer.
        let m = c.segment_count() * 16;
        for i in 0..=m {
            let s = encode(i as f64 / m as f64, &c).unwrap();
            prop_assert!(pt.dist(s) >= d.r - 1e-12);
        }
    }
}

#![no_main]

use std::sync::OnceLock;

use hilq::{decode_exact, generate, CurvePoint, CurveSpec, DecodeGrid, Polyline};
use libfuzzer_sys::fuzz_target;

fn curves() -> &'static [(Polyline, DecodeGrid)] {
    static CURVES: OnceLock<Vec<(Polyline, DecodeGrid)>> = OnceLock::new();
    CURVES.get_or_init(|| {
        (1..=4)
            .map(|p| {
                let c = generate(CurveSpec::hilbert(p)).unwrap();
                let g = DecodeGrid::build(&c, 64).unwrap();
                (c, g)
            })
            .collect()
    })
}

// Input: one order byte, then x and y as little-endian f64.
fuzz_target!(|data: &[u8]| {
    let Some((&order, rest)) = data.split_first() else {
        return;
    };
    if rest.len() < 16 {
        return;
    }
    let x = f64::from_le_bytes(rest[..8].try_into().unwrap());
    let y = f64::from_le_bytes(rest[8..16].try_into().unwrap());
    if !(x.is_finite() && y.is_finite()) {
        return;
    }
    let (curve, grid) = &curves()[order as usize % 4];
    let pt = CurvePoint::new(x, y);
    for p in [decode_exact(pt, curve), grid.lookup(pt)] {
        assert!((0.0..=1.0).contains(&p.q), "q = {}", p.q);
        assert!(p.r >= 0.0);
        assert!(p.segment_index < curve.segment_count());
    }
});

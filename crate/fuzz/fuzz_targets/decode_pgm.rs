#![no_main]

use hilq::io::decode_pgm;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(raster) = decode_pgm(data) {
        assert!(raster.data().iter().all(|v| (0.0..=1.0).contains(v)));
    }
});

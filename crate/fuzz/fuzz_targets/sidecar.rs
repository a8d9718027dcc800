#![no_main]

use hilq::io::Normalization;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(norm) = Normalization::from_json(data) {
        assert!(norm.min < norm.max);
        let back = norm.denormalize(norm.normalize(norm.min));
        assert!(back.is_finite());
    }
});

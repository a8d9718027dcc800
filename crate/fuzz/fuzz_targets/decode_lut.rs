#![no_main]

use hilq::io::{decode_lut_file, encode_lut_file};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(grid) = decode_lut_file(data) {
        let bytes = encode_lut_file(&grid).expect("decoded grid must encode");
        let again = decode_lut_file(&bytes).expect("re-encoded LUT must decode");
        assert_eq!(again.n(), grid.n());
    }
});

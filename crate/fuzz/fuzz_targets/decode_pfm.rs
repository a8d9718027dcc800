#![no_main]

use hilq::io::{decode_pfm, encode_pfm};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(raster) = decode_pfm(data) {
        let again = decode_pfm(&encode_pfm(&raster)).expect("re-encoded PFM must decode");
        assert_eq!(again.dims(), raster.dims());
    }
});

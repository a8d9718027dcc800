#![no_main]

use hilq::experiments::ExperimentConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(cfg) = ExperimentConfig::from_json(data) {
        cfg.validate().expect("parsed config must stay valid");
    }
});

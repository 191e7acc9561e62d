#![no_main]
use libfuzzer_sys::fuzz_target;

use peloton_cs::experiment::{parse_config_text, ExperimentConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_config_text(text);
    let _ = ExperimentConfig::from_text(text);
});

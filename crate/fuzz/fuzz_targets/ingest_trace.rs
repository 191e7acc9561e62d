#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = peloton_cs::mobility::ingest_trace(data, 1.0);
});

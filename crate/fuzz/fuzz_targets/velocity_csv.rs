#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok((ids, frames)) = peloton_cs::mobility::read_velocity_csv(data) {
        for f in &frames {
            assert_eq!(f.x.len(), ids.len());
        }
    }
});

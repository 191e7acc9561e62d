#![no_main]
use libfuzzer_sys::fuzz_target;

use peloton_cs::protocol::{decode_message, encode_message, Cap};

// byte 0: sensor count, byte 1: cap (0 = unlimited), rest: the message
fuzz_target!(|data: &[u8]| {
    let [n, cap, body @ ..] = data else {
        return;
    };
    let cap = match *cap {
        0 => Cap::Unlimited,
        m => match Cap::new(m as usize) {
            Ok(c) => c,
            Err(_) => return,
        },
    };
    if let Ok(msg) = decode_message(body, *n as usize, cap) {
        // only canonical encodings decode, so they must round-trip
        let again = encode_message(&msg, cap).expect("decoded message re-encodes");
        assert_eq!(again, body);
    }
});

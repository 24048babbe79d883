#![no_main]

use dtpasp::compile::parse_nnf;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_nnf(src) {
        let _ = c.len();
    }
});

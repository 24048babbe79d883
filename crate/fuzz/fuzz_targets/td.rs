#![no_main]

use dtpasp::treedecomp::parse_td;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    if let Ok((td, _)) = parse_td(src) {
        let _ = td.width();
    }
});

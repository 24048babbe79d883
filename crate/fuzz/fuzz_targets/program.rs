#![no_main]

use dtpasp::lang::{load, parse};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(p) = parse(src) else { return };
    let printed = p.to_string();
    let again = parse(&printed).expect("printed program reparses");
    assert_eq!(again, p);
    if src.len() <= 512 {
        let _ = load(src);
    }
});

#![no_main]

use std::sync::OnceLock;

use dtpasp::credal::parse_query;
use dtpasp::lang::{load, GroundProgram};
use libfuzzer_sys::fuzz_target;

fn program() -> &'static GroundProgram {
    static P: OnceLock<GroundProgram> = OnceLock::new();
    P.get_or_init(|| load("0.3::a. 0.4::b. qr :- a. qr ; nqr :- b. :- a, b. p(1). p(x).").unwrap())
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_query(program(), text);
});

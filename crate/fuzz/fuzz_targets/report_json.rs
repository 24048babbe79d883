#![no_main]

use dtpasp::dt::UtilityReport;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(r) = serde_json::from_slice::<UtilityReport>(data) else { return };
    let text = serde_json::to_string(&r).unwrap();
    let _ = serde_json::from_str::<UtilityReport>(&text).unwrap();
});

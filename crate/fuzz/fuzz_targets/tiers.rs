#![no_main]

use dtpasp::cnf::parse_tiers;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else { return };
    let Ok(spec) = std::str::from_utf8(rest) else { return };
    if let Ok(tiers) = parse_tiers(spec, n as usize) {
        assert_eq!(tiers.len(), n as usize);
    }
});

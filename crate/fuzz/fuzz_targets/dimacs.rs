#![no_main]

use dtpasp::cnf::parse_dimacs;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else { return };
    let Ok(f) = parse_dimacs(src) else { return };
    for clause in &f.cnf.clauses {
        for l in clause {
            assert!(l.var() < f.cnf.num_vars);
        }
    }
    if let Some(t) = &f.tiers {
        assert_eq!(t.len(), f.cnf.num_vars);
    }
});

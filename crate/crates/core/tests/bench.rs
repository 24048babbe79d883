mod common;

use dtpasp::bench::{generate, run, write_csv, BenchSpec, Method, RunOptions, Suite};
use dtpasp::dt::{solve, Optimum, UtilityReport};
use dtpasp::lang::load;
use dtpasp::Error;

fn attains(oracle: &UtilityReport, o: Option<Optimum>, lower: bool) -> bool {
    let Some(o) = o else { return oracle.per_strategy.iter().all(|e| e.all_inconsistent) };
    oracle
        .per_strategy
        .iter()
        .find(|e| e.strategy == o.strategy)
        .is_some_and(|e| !e.all_inconsistent && common::close(if lower { e.lower } else { e.upper }, o.value))
}

fn specs() -> Vec<BenchSpec> {
    let mut out = Vec::new();
    for seed in 0..3 {
        for (n, d) in [(1, 1), (2, 2), (2, 5), (3, 4)] {
            out.push(BenchSpec::new(Suite::T1, n, d, seed));
            out.push(BenchSpec::new(Suite::T2, d, n, seed));
        }
        for suite in [Suite::T3, Suite::T4, Suite::T5, Suite::T6] {
            for size in 1..=4 {
                out.push(BenchSpec::sized(suite, size, seed));
            }
        }
    }
    out
}

#[test]
fn methods_agree_on_every_suite() {
    for spec in specs() {
        let e = run(&spec, Method::Enum, &RunOptions::default()).unwrap();
        let a = run(&spec, Method::Amc3, &RunOptions::default()).unwrap();
        let oracle = &e.report;
        for (x, y) in [(oracle.best_lower, a.report.best_lower), (oracle.best_upper, a.report.best_upper)] {
            assert_eq!(x.is_some(), y.is_some(), "{spec:?}");
            if let (Some(x), Some(y)) = (x, y) {
                assert!(common::close(x.value, y.value), "{spec:?}: {x:?} vs {y:?}");
            }
        }
        assert!(attains(oracle, a.report.best_lower, true), "{spec:?}");
        assert!(attains(oracle, a.report.best_upper, false), "{spec:?}");
    }
}

#[test]
fn generated_text_is_deterministic_and_loads() {
    for spec in specs() {
        let text = generate(&spec).unwrap();
        assert_eq!(text, generate(&spec).unwrap());
        load(&text).unwrap();
    }
    let a = generate(&BenchSpec::sized(Suite::T6, 4, 1)).unwrap();
    assert_ne!(a, generate(&BenchSpec::sized(Suite::T6, 4, 2)).unwrap());
}

#[test]
fn t1_to_t5_worlds_are_consistent() {
    for spec in specs().into_iter().filter(|s| s.suite != Suite::T6) {
        let p = load(&generate(&spec).unwrap()).unwrap();
        let r = solve(&p).unwrap();
        assert!(r.per_strategy.iter().all(|e| e.inconsistent_mass == 0.0), "{spec:?}");
    }
}

#[test]
fn oversized_enumeration_is_refused() {
    let err = run(&BenchSpec::new(Suite::T1, 2, 30, 0), Method::Enum, &RunOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Resource(_)), "{err}");
    assert!(BenchSpec::new(Suite::T3, 2, 3, 0).validate().is_err());
}

#[test]
fn csv_has_header_and_one_row_per_result() {
    let results: Vec<_> = (1..=8)
        .map(|d| run(&BenchSpec::new(Suite::T1, 2, d, 0), Method::Enum, &RunOptions::default()).unwrap())
        .collect();
    let mut buf = Vec::new();
    write_csv(&mut buf, &results).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    let header: Vec<String> = rd.headers().unwrap().iter().map(str::to_string).collect();
    assert_eq!(
        header,
        [
            "suite",
            "n",
            "d",
            "method",
            "seed",
            "wall_time_seconds",
            "lower_value",
            "upper_value",
            "lower_strategy",
            "upper_strategy"
        ]
    );
    let rows: Vec<csv::StringRecord> = rd.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[7][2], "8");
    assert!(rows[0][8].starts_with('{'));
}

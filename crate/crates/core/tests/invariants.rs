mod common;

use proptest::prelude::*;

use dtpasp::algebra::{check_laws, Inner, Middle, Outer};
use dtpasp::bench::{random_tight_program, RandomShape};
use dtpasp::lang::{load, parse};
use dtpasp::stable::{answer_sets, check_stable_with, Interpretation};

fn finite() -> impl Strategy<Value = f64> {
    -10.0f64..10.0
}

fn inner() -> impl Strategy<Value = Inner> {
    (finite(), finite()).prop_map(|(a, b)| Inner::new(a.min(b), a.max(b)))
}

fn middle() -> impl Strategy<Value = Middle> {
    (0.0f64..1.0, finite(), finite()).prop_map(|(p, l, h)| Middle::new(p, l, h))
}

fn outer() -> impl Strategy<Value = Outer> {
    (finite(), finite(), 0u64..16, 0u64..16).prop_map(|(l, h, a, b)| Outer::new(l, h, a, b))
}

proptest! {
    #[test]
    fn inner_laws(a in inner(), b in inner(), c in inner()) {
        prop_assert!(check_laws(&a, &b, &c, 1e-9).is_ok());
    }

    #[test]
    fn middle_laws(a in middle(), b in middle(), c in middle()) {
        prop_assert!(check_laws(&a, &b, &c, 1e-9).is_ok());
    }

    #[test]
    fn outer_laws(a in outer(), b in outer(), c in outer()) {
        prop_assert!(check_laws(&a, &b, &c, 1e-9).is_ok());
    }

    #[test]
    fn credal_bounds_and_duality(seed in any::<u64>()) {
        let src = random_tight_program(seed, &RandomShape::default());
        prop_assert!(common::credal_invariants(&src).is_ok(), "{:?}", common::credal_invariants(&src));
    }

    #[test]
    fn single_answer_set_programs_match_scalar_utility(seed in any::<u64>()) {
        let src = common::random_definite_program(seed);
        prop_assert!(common::degenerate_invariant(&src).is_ok(), "{:?}", common::degenerate_invariant(&src));
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let src = random_tight_program(seed, &RandomShape::default());
        let p = parse(&src).unwrap();
        prop_assert_eq!(parse(&p.to_string()).unwrap(), p);
    }
}

/// Normal and disjunctive programs over `n` atoms, possibly with positive loops.
fn random_program(n: usize) -> impl Strategy<Value = String> {
    let lit = (0..n, any::<bool>());
    let rule = (prop::collection::vec(0..n, 0..=2), prop::collection::vec(lit, 0..=3));
    prop::collection::vec(rule, 1..=8).prop_map(|rules| {
        let mut out = String::new();
        for (head, body) in rules {
            let h: Vec<String> = head.iter().map(|a| format!("a{a}")).collect();
            let b: Vec<String> =
                body.iter().map(|&(a, pos)| if pos { format!("a{a}") } else { format!("not a{a}") }).collect();
            match (h.is_empty(), b.is_empty()) {
                (true, true) => continue,
                (true, false) => out.push_str(&format!(":- {}.\n", b.join(", "))),
                (false, true) => out.push_str(&format!("{}.\n", h.join(" ; "))),
                (false, false) => out.push_str(&format!("{} :- {}.\n", h.join(" ; "), b.join(", "))),
            }
        }
        out
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn answer_sets_are_exactly_the_stable_interpretations(src in random_program(7)) {
        let p = load(&src).unwrap();
        let n = p.num_atoms();
        prop_assume!(n <= 15);
        let found = answer_sets(&p).unwrap();
        let empty = Interpretation::empty(n);
        let mut expected = Vec::new();
        for mask in 0u32..1 << n {
            let i = Interpretation::from_atoms(n, (0..n).filter(|&a| mask >> a & 1 == 1));
            if check_stable_with(&p, &empty, &i) {
                expected.push(i);
            }
        }
        expected.sort();
        let mut got = found.sets.clone();
        got.sort();
        prop_assert_eq!(got, expected, "{}", src);
    }
}

#[test]
fn ten_thousand_samples_per_tier() {
    common::semiring_laws(10_000, 11).unwrap();
}

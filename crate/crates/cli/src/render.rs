use dtpasp::credal::CredalResult;
use dtpasp::dt::{Optimum, UtilityReport};

/// Nine significant digits, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else {
        rounded.to_string()
    }
}

pub fn credal(query: &str, r: &CredalResult) -> String {
    format!("{query}: lower={} upper={} inc={}", num(r.lower), num(r.upper), num(r.inconsistent_mass))
}

fn optimum(r: &UtilityReport, o: Option<Optimum>) -> String {
    match o {
        Some(o) => format!("{} {}", r.render_strategy(o.strategy), num(o.value)),
        None => "none (every strategy is inconsistent)".into(),
    }
}

pub fn report(method: &str, r: &UtilityReport) -> String {
    let mut out = format!("method: {method}\n");
    out.push_str(&format!("lower: {}\n", optimum(r, r.best_lower)));
    out.push_str(&format!("upper: {}\n", optimum(r, r.best_upper)));
    if !r.per_strategy.is_empty() {
        out.push_str("strategies:\n");
        for e in &r.per_strategy {
            let note = if e.all_inconsistent { " (inconsistent)" } else { "" };
            out.push_str(&format!(
                "  {} [{}, {}] inc={}{note}\n",
                r.render_strategy(e.strategy),
                num(e.lower),
                num(e.upper),
                num(e.inconsistent_mass)
            ));
        }
        out.push_str(&format!("pairs evaluated: {}\n", r.pairs_evaluated));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(0.3 + 0.28), "0.58");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(-2.76), "-2.76");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(123456789012.0), "123456789000");
    }
}

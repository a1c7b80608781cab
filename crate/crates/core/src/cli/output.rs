use std::fmt::Write as _;

use crate::simulation::MonteCarloReport;

/// `%g`-style rendering with six significant digits.
pub fn sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn coef_name(experiment: u8, j: usize) -> String {
    if experiment == 3 {
        "theta".into()
    } else {
        format!("beta{}", j + 1)
    }
}

/// Table rows for every report, in report order.
pub fn csv(reports: &[MonteCarloReport]) -> String {
    let mut out = String::new();
    let curve = reports.first().is_some_and(|r| r.experiment == 2);
    out.push_str(if curve {
        "estimator,n,mise\n"
    } else {
        "estimator,n,coef,bias,mse\n"
    });
    for r in reports {
        for e in &r.estimators {
            if let Some(mise) = e.mise {
                let _ = writeln!(out, "{},{},{}", e.name, r.n, sig6(mise));
            } else {
                for (j, (b, m)) in e.bias.iter().zip(&e.mse).enumerate() {
                    let _ = writeln!(out, "{},{},{},{},{}", e.name, r.n, coef_name(r.experiment, j), sig6(*b), sig6(*m));
                }
            }
        }
    }
    out
}

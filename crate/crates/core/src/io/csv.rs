//! CSV emitters. Floats use Rust's shortest round-trip formatting.

use crate::metrics::AblationReport;

pub fn spectrum_csv(values: &[f64]) -> String {
    let mut out = String::from("index,singular_value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, v));
    }
    out
}

pub fn curve_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("rank,relative_error\n");
    for (k, e) in points {
        out.push_str(&format!("{k},{e}\n"));
    }
    out
}

pub fn zipf_csv(points: &[(usize, f64)]) -> String {
    let mut out = String::from("rank,log_frequency\n");
    for (r, f) in points {
        out.push_str(&format!("{r},{f}\n"));
    }
    out
}

pub fn ablation_csv(report: &AblationReport) -> String {
    let mut out = String::from("strategy,parameter_count,weighted_error,unweighted_error\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.strategy, row.parameter_count, row.weighted_error, row.unweighted_error
        ));
    }
    out
}

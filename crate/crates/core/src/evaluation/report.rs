use std::fmt::Write;

use super::ClusterEvaluation;

/// Plain-text table, one row per system, scores to one decimal.
pub fn format_table(rows: &[(&str, &ClusterEvaluation)]) -> String {
    let width = rows
        .iter()
        .map(|(name, _)| name.len())
        .max()
        .unwrap_or(0)
        .max("system".len());
    let mut out = String::new();
    writeln!(out, "{:<width$}  {:>5} {:>5} {:>5}", "system", "PU", "CO", "F1").unwrap();
    for (name, e) in rows {
        writeln!(
            out,
            "{:<width$}  {:>5.1} {:>5.1} {:>5.1}",
            name, e.purity, e.collocation, e.f1
        )
        .unwrap();
    }
    out
}

/// CSV with header `system,purity,collocation,f1`.
pub fn format_csv(rows: &[(&str, &ClusterEvaluation)]) -> String {
    let mut out = String::from("system,purity,collocation,f1\n");
    for (name, e) in rows {
        writeln!(out, "{},{:.1},{:.1},{:.1}", name, e.purity, e.collocation, e.f1).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_row() {
        let e = ClusterEvaluation::from_scores(100.0, 100.0);
        let table = format_table(&[("model", &e)]);
        assert!(table.lines().nth(1).unwrap().ends_with("100.0 100.0 100.0"));
        assert_eq!(format_csv(&[("model", &e)]), "system,purity,collocation,f1\nmodel,100.0,100.0,100.0\n");
    }

    #[test]
    fn reported_rows() {
        let ours = ClusterEvaluation::from_scores(79.7, 86.2);
        let syntf = ClusterEvaluation::from_scores(81.6, 77.5);
        let csv = format_csv(&[("ours", &ours), ("syntf", &syntf)]);
        assert!(csv.contains("ours,79.7,86.2,82.8\n"));
        assert!(csv.contains("syntf,81.6,77.5,79.5\n"));
        let table = format_table(&[("ours", &ours), ("syntf", &syntf)]);
        assert!(table.contains(" 79.7  86.2  82.8"));
        assert!(table.contains(" 81.6  77.5  79.5"));
    }
}

//! Error tables in machine-readable CSV and aligned text form.

use std::fmt::Write as _;

use twolayer::scenarios::{ErrorReport, OrderFit};

/// Fields shown in the aligned tables. The CSV files carry all nine.
pub const TABLE_FIELDS: [&str; 4] = ["h1", "hu1", "h2", "hu2"];

/// One row per (resolution, field): `n,field,l1,linf`.
pub fn sweep_errors_csv(reports: &[ErrorReport]) -> String {
    let mut s = String::from("n,field,l1,linf\n");
    for r in reports {
        for f in &r.fields {
            let _ = writeln!(s, "{},{},{:.16e},{:.16e}", r.n, f.name, f.l1, f.linf);
        }
    }
    s
}

/// One row per (case, field): `case,n,field,l1,linf`.
pub fn suite_errors_csv(cases: &[(String, ErrorReport)]) -> String {
    let mut s = String::from("case,n,field,l1,linf\n");
    for (name, r) in cases {
        for f in &r.fields {
            let _ = writeln!(s, "{name},{},{},{:.16e},{:.16e}", r.n, f.name, f.l1, f.linf);
        }
    }
    s
}

/// One row per field: `field,order,points_used,points_excluded`.
pub fn orders_csv(orders: &[(&str, OrderFit)]) -> String {
    let mut s = String::from("field,order,points_used,points_excluded\n");
    for (name, fit) in orders {
        let _ = writeln!(s, "{name},{:.4},{},{}", fit.order, fit.used, fit.excluded);
    }
    s
}

/// Refinement table: one row per resolution with L1 errors, closed by the
/// fitted order per column.
pub fn sweep_table(title: &str, reports: &[ErrorReport], orders: &[(&str, OrderFit)]) -> String {
    let mut s = format!("{title}\n");
    let _ = write!(s, "{:>8}", "N");
    for f in TABLE_FIELDS {
        let _ = write!(s, "{f:>12}");
    }
    s.push('\n');
    for r in reports {
        let _ = write!(s, "{:>8}", r.n);
        for f in TABLE_FIELDS {
            let e = r.field(f).map_or(f64::NAN, |e| e.l1);
            let _ = write!(s, "{e:>12.3e}");
        }
        s.push('\n');
    }
    let _ = write!(s, "{:>8}", "order");
    for f in TABLE_FIELDS {
        match orders.iter().find(|(n, _)| *n == f) {
            Some((_, fit)) => {
                let _ = write!(s, "{:>12.2}", fit.order);
            }
            None => {
                let _ = write!(s, "{:>12}", "-");
            }
        }
    }
    s.push('\n');
    s
}

/// Rest-state error table: one row per case, an L1 block and an L-inf
/// block.
pub fn suite_table(cases: &[(String, ErrorReport)]) -> String {
    let mut s = String::new();
    for use_l1 in [true, false] {
        let norm = if use_l1 { "L1" } else { "Linf" };
        let _ = writeln!(s, "{norm} errors against the initial rest state");
        let _ = write!(s, "{:<16}", "case");
        for f in TABLE_FIELDS {
            let _ = write!(s, "{f:>12}");
        }
        s.push('\n');
        for (name, r) in cases {
            let _ = write!(s, "{name:<16}");
            for f in TABLE_FIELDS {
                let e = r.field(f).map_or(f64::NAN, |e| if use_l1 { e.l1 } else { e.linf });
                let _ = write!(s, "{e:>12.3e}");
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use twolayer::scenarios::FieldError;

    fn report(n: usize, scale: f64) -> ErrorReport {
        let fields = ["b", "h1", "hu1", "h2", "hu2", "eta1", "eta2", "u1", "u2"]
            .iter()
            .map(|&name| FieldError { name, l1: scale, linf: 2.0 * scale })
            .collect();
        ErrorReport { n, t: 0.5, fields }
    }

    #[test]
    fn sweep_table_lists_resolutions_then_orders() {
        let reports = [report(64, 1e-3), report(128, 2.5e-4)];
        let orders = [("h1", OrderFit { order: 2.0, used: 2, excluded: 0 })];
        let text = sweep_table("title", &reports, &orders);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "title");
        assert!(lines[1].contains("N") && lines[1].contains("hu2"));
        assert!(lines[2].trim_start().starts_with("64"));
        assert!(lines[3].trim_start().starts_with("128"));
        assert!(lines[4].trim_start().starts_with("order"));
        assert!(lines[4].contains("2.00"));
        // Missing orders render as a dash, not a stale number.
        assert!(lines[4].contains('-'));
    }

    #[test]
    fn csv_forms_cover_all_fields() {
        let text = sweep_errors_csv(&[report(64, 1e-3)]);
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("n,field,l1,linf\n"));
        assert!(text.contains("64,eta2,"));

        let text = suite_errors_csv(&[("wb-jump-wet".into(), report(100, 0.0))]);
        assert!(text.contains("wb-jump-wet,100,hu2,0"));
    }
}

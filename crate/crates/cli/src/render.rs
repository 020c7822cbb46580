//! Text tables and flat CSV projections of the JSON documents.

use std::collections::HashMap;
use std::fmt::Write as _;

use isosplit::dynkin::{EulerCharacteristic, FibrationRecord};

use crate::suite::{CheckResult, SelfcheckReport, Status, VerifyReport};
use crate::CatalogOutput;

fn euler(e: EulerCharacteristic) -> String {
    match e {
        EulerCharacteristic::Positive(n) => n.to_string(),
        EulerCharacteristic::Zero => "0".to_string(),
    }
}

fn status(s: Status) -> &'static str {
    match s {
        Status::Pass => "PASS",
        Status::Fail => "FAIL",
        Status::Inconclusive => "INCONCLUSIVE",
    }
}

pub fn catalog_text(out: &CatalogOutput) -> String {
    let by_id: HashMap<&str, &FibrationRecord> = out.records.iter().map(|r| (r.case_id.as_str(), r)).collect();
    let mut s = String::new();
    for c in &out.cases {
        let n0 = c.n0.map(|n| format!(", n0={n}")).unwrap_or_default();
        let class = serde_json::to_value(c.class).unwrap_or_default();
        let _ = write!(s, "{}  [{}{n0}]", c.label, class.as_str().unwrap_or(""));
        if let Some(cl) = &c.classical_label {
            if cl != &c.label {
                let _ = write!(s, "  {cl}");
            }
        }
        if let Some(note) = &c.note {
            let _ = write!(s, "  ({note})");
        }
        s.push('\n');
        for id in &c.record_ids {
            let Some(r) = by_id.get(id.as_str()) else { continue };
            let _ = writeln!(
                s,
                "  {:<44} {}  chi={} dims g={} k1={} k2={} m={}{}",
                r.case_id,
                r.human_label,
                euler(r.euler_characteristic),
                r.dims.g,
                r.dims.k1,
                r.dims.k2,
                r.dims.m,
                if r.out_proxy_exception { "  [component count exceptional]" } else { "" },
            );
        }
    }
    let _ = writeln!(s, "{} bases, {} records", out.cases.len(), out.records.len());
    s
}

pub fn catalog_csv(out: &CatalogOutput) -> anyhow::Result<String> {
    let by_id: HashMap<&str, &FibrationRecord> = out.records.iter().map(|r| (r.case_id.as_str(), r)).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "base_label",
        "class",
        "n0",
        "case_id",
        "human_label",
        "classical_label",
        "swap_partner",
        "equal_rank",
        "euler_characteristic",
        "components_k1",
        "components_k2",
        "out_proxy_exception",
        "dim_g",
        "dim_k1",
        "dim_k2",
        "dim_m",
        "dim_m1",
        "note",
    ])?;
    for c in &out.cases {
        let class = serde_json::to_value(c.class)?.as_str().unwrap_or("").to_string();
        let n0 = c.n0.map(|n| n.to_string()).unwrap_or_default();
        let note = c.note.clone().unwrap_or_default();
        if c.record_ids.is_empty() {
            let mut row = vec![c.label.clone(), class.clone(), n0.clone()];
            row.extend(std::iter::repeat_n(String::new(), 14));
            row.push(note.clone());
            w.write_record(&row)?;
        }
        for id in &c.record_ids {
            let Some(r) = by_id.get(id.as_str()) else { continue };
            w.write_record([
                c.label.clone(),
                class.clone(),
                n0.clone(),
                r.case_id.clone(),
                r.human_label.clone(),
                r.classical_label.clone().unwrap_or_default(),
                r.swap_partner.clone(),
                r.equal_rank.to_string(),
                euler(r.euler_characteristic),
                r.isometry_component_counts.0.to_string(),
                r.isometry_component_counts.1.to_string(),
                r.out_proxy_exception.to_string(),
                r.dims.g.to_string(),
                r.dims.k1.to_string(),
                r.dims.k2.to_string(),
                r.dims.m.to_string(),
                r.dims.m1.to_string(),
                note.clone(),
            ])?;
        }
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn checks_csv(rows: impl Iterator<Item = (String, CheckResult)>) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "property", "subject", "status", "value", "tolerance", "detail"])?;
    for (section, c) in rows {
        w.write_record([
            section,
            c.property,
            c.subject,
            status(c.status).to_string(),
            format!("{:e}", c.value),
            format!("{:e}", c.tolerance),
            c.detail,
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn check_line(s: &mut String, c: &CheckResult) {
    let _ = write!(s, "{:<13} {} [{}] value {:.3e}", status(c.status), c.property, c.subject, c.value);
    if c.tolerance > 0.0 {
        let _ = write!(s, " (tolerance {:.1e})", c.tolerance);
    }
    if !c.detail.is_empty() {
        let _ = write!(s, ": {}", c.detail);
    }
    s.push('\n');
}

pub fn verify_text(r: &VerifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} ({})", r.model, r.case_id);
    let _ = writeln!(
        s,
        "seed {} samples {} restarts {}",
        r.settings.seed, r.settings.samples, r.settings.restarts
    );
    for c in &r.checks {
        check_line(&mut s, c);
    }
    let failed = r.checks.iter().filter(|c| c.status == Status::Fail).count();
    let open = r.checks.iter().filter(|c| c.status == Status::Inconclusive).count();
    let _ = writeln!(s, "{} checks, {failed} failed, {open} inconclusive", r.checks.len());
    s
}

pub fn verify_csv(r: &VerifyReport) -> anyhow::Result<String> {
    checks_csv(r.checks.iter().map(|c| ("verify".to_string(), c.clone())))
}

pub fn selfcheck_text(r: &SelfcheckReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "rank cap {}", r.rank_cap);
    for w in &r.weyl_orders {
        let fmt = |v: Option<u64>| v.map_or("-".to_string(), |n| n.to_string());
        let _ = writeln!(
            s,
            "{:<13} Weyl group order of {}: degree product {}, enumeration {}",
            if w.pass { "PASS" } else { "FAIL" },
            w.ty,
            fmt(w.degree_product),
            fmt(w.enumerated)
        );
    }
    for a in &r.automorphisms {
        let _ = writeln!(
            s,
            "{:<13} diagram automorphisms of {}: search {}, exhaustive {}, expected {}",
            if a.pass() { "PASS" } else { "FAIL" },
            a.ty,
            a.backtracking,
            a.exhaustive,
            a.expected
        );
    }
    for m in &r.models {
        for c in &m.checks {
            check_line(&mut s, c);
        }
    }
    let _ = write!(s, "golden lists ({}):\n{}", r.golden_source, r.golden);
    let _ = writeln!(s, "{}", if r.pass { "selfcheck passed" } else { "selfcheck FAILED" });
    s
}

pub fn selfcheck_csv(r: &SelfcheckReport) -> anyhow::Result<String> {
    let mut rows: Vec<(String, CheckResult)> = Vec::new();
    let mk = |property: String, subject: String, ok: bool, value: f64, detail: String| CheckResult {
        property,
        subject,
        status: if ok { Status::Pass } else { Status::Fail },
        value,
        tolerance: 0.0,
        detail,
    };
    for w in &r.weyl_orders {
        rows.push((
            "weyl".into(),
            mk(
                "degree product equals the Weyl group order".into(),
                w.ty.clone(),
                w.pass,
                w.degree_product.map_or(f64::NAN, |n| n as f64),
                w.enumerated.map_or("not enumerated".into(), |n| format!("enumerated {n}")),
            ),
        ));
    }
    for a in &r.automorphisms {
        rows.push((
            "automorphisms".into(),
            mk(
                "diagram automorphism count".into(),
                a.ty.to_string(),
                a.pass(),
                a.backtracking as f64,
                format!("exhaustive {}, expected {}", a.exhaustive, a.expected),
            ),
        ));
    }
    for m in &r.models {
        for c in &m.checks {
            rows.push(("model".into(), c.clone()));
        }
    }
    for sec in &r.golden.sections {
        let mut detail: Vec<String> = sec.missing.iter().map(|m| format!("missing {m}")).collect();
        detail.extend(sec.unexpected.iter().map(|u| format!("unexpected {u}")));
        rows.push((
            "golden".into(),
            mk(
                "enumeration matches the reference list".into(),
                sec.name.clone(),
                sec.pass,
                (sec.missing.len() + sec.unexpected.len()) as f64,
                detail.join("; "),
            ),
        ));
    }
    checks_csv(rows.into_iter())
}

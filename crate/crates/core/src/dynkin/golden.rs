//! Checked-in lists of isotropy-splitting fibrations, and a comparison of
//! those lists against the enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::bds::{BaseClass, CaseRef, FibrationRecord, KFactor};
use super::catalog::{catalog, catalog_cases, CaseEntry, CatalogFilter};
use crate::error::{Error, Result};
use crate::rootsys::{Family, SimpleType};

const EMBEDDED: &str = include_str!("../../golden/reference_lists.toml");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoldenLists {
    pub schema_version: u32,
    pub hermitian: Hermitian,
    pub symmetric: Symmetric,
    pub nearly_kaehler: NearlyKaehler,
    pub five_symmetric: FiveSymmetric,
    pub odd_grassmannian: OddGrassmannian,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hermitian {
    pub generic_k1: Vec<String>,
    pub su_k1: Vec<String>,
    pub su_min: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Symmetric {
    pub so_s_min: usize,
    pub so_st_even: bool,
    pub sp_s_min: usize,
    pub exceptional: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NearlyKaehler {
    pub simple: Vec<String>,
    pub split: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiveSymmetric {
    pub labels: Vec<String>,
    pub bundles: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OddGrassmannian {
    pub s_min: usize,
}

impl GoldenLists {
    pub fn embedded() -> Self {
        Self::parse(EMBEDDED).expect("embedded golden lists parse")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let g: GoldenLists = toml::from_str(text).map_err(|e| Error::Golden(e.to_string()))?;
        if g.schema_version != 1 {
            return Err(Error::Golden(format!("unsupported schema_version {}", g.schema_version)));
        }
        Ok(g)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Golden(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionReport {
    pub name: String,
    pub pass: bool,
    /// Listed in the golden file but not produced by the enumeration.
    pub missing: Vec<String>,
    /// Produced by the enumeration but not listed.
    pub unexpected: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoldenReport {
    pub rank_cap: usize,
    pub sections: Vec<SectionReport>,
}

impl GoldenReport {
    pub fn pass(&self) -> bool {
        self.sections.iter().all(|s| s.pass)
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.sections {
            writeln!(f, "{} {}", if s.pass { "PASS" } else { "FAIL" }, s.name)?;
            for m in &s.missing {
                writeln!(f, "  - {m}")?;
            }
            for u in &s.unexpected {
                writeln!(f, "  + {u}")?;
            }
        }
        Ok(())
    }
}

fn section(name: &str, expected: BTreeSet<String>, found: BTreeSet<String>) -> SectionReport {
    let missing: Vec<String> = expected.difference(&found).cloned().collect();
    let unexpected: Vec<String> = found.difference(&expected).cloned().collect();
    SectionReport {
        name: name.to_string(),
        pass: missing.is_empty() && unexpected.is_empty(),
        missing,
        unexpected,
    }
}

fn group_rank(label: &str) -> Option<usize> {
    let head = label.split('/').next()?;
    head.parse::<SimpleType>().ok().map(SimpleType::rank)
}

fn case_of(e: &CaseEntry) -> Option<&super::bds::BdSCase> {
    e.case.bds()
}

/// Role of K₁ inside a hermitian K = K'·S whose K' is simple.
fn generic_role(rec: &FibrationRecord) -> String {
    let circle = rec.k1_components.iter().any(|f| matches!(f, KFactor::Circle { .. }));
    let simple = rec.k1_components.iter().filter(|f| f.simple_type().is_some()).count();
    let k_simple = simple + rec.k2_components.iter().filter(|f| f.simple_type().is_some()).count();
    match (circle, simple == k_simple) {
        (false, true) => "K'".to_string(),
        (true, false) if simple == 0 => "S".to_string(),
        _ => format!("partial K' ({})", rec.case_id),
    }
}

/// Concrete K₁ names over SU(s+t)/S(U(s)U(t)), dropping entries where
/// K₁ or K₂ would be trivial.
fn su_expected(roles: &[String], s: usize, t: usize) -> Result<BTreeSet<String>> {
    let dim_k = s * s + t * t - 1;
    let mut out = BTreeSet::new();
    for role in roles {
        let (name, d1) = match role.as_str() {
            "SU(s)" => (format!("SU({s})"), s * s - 1),
            "SU(t)" => (format!("SU({t})"), t * t - 1),
            "U(s)" if s == 1 => ("S".to_string(), 1),
            "U(s)" => (format!("U({s})"), s * s),
            "U(t)" if t == 1 => ("S".to_string(), 1),
            "U(t)" => (format!("U({t})"), t * t),
            "S" => ("S".to_string(), 1),
            "K'" if s == 1 => (format!("SU({t})"), t * t - 1),
            "K'" if t == 1 => (format!("SU({s})"), s * s - 1),
            "K'" => (format!("SU({s})SU({t})"), s * s + t * t - 2),
            other => return Err(Error::Golden(format!("unknown hermitian role {other:?}"))),
        };
        if d1 > 0 && d1 < dim_k {
            out.insert(name);
        }
    }
    Ok(out)
}

fn classical_k1(rec: &FibrationRecord) -> Option<String> {
    let label = rec.classical_label.as_deref()?;
    let head = label.split(" -> ").next()?;
    Some(head.split_once('/')?.1.to_string())
}

/// Dimensions of the simple and circle factors named by a classical
/// quotient such as `SO(7)/SO(3)SO(4)` or `Sp(3)/Sp(1)Sp(2)`.
fn classical_factor_dims(label: &str) -> Option<Vec<usize>> {
    let rhs = label.split_once('/')?.1;
    let mut dims = Vec::new();
    for tok in rhs.split(')').filter(|t| !t.is_empty()) {
        let (kind, n) = tok.split_once('(')?;
        let n: usize = n.parse().ok()?;
        match kind {
            "SO" if n == 2 => dims.push(1),
            "SO" if n == 4 => dims.extend([3, 3]),
            "SO" if n >= 3 => dims.push(n * (n - 1) / 2),
            "SO" => {}
            "Sp" => dims.push(n * (2 * n + 1)),
            _ => return None,
        }
    }
    dims.sort_unstable();
    Some(dims)
}

/// Compares the enumeration up to `rank_cap` with the golden lists.
pub fn check(golden: &GoldenLists, rank_cap: usize) -> Result<GoldenReport> {
    let filter = CatalogFilter { rank_cap, ..CatalogFilter::default() };
    let cases = catalog_cases(&filter)?;
    let records = catalog(&filter)?;
    let by_base: BTreeMap<&str, Vec<&FibrationRecord>> =
        records.iter().fold(BTreeMap::new(), |mut m, r| {
            m.entry(r.base_label.as_str()).or_insert_with(Vec::new).push(r);
            m
        });
    let records_of = |label: &str| by_base.get(label).cloned().unwrap_or_default();
    let in_cap = |label: &String| group_rank(label).is_some_and(|r| r <= rank_cap);
    let mut sections = Vec::new();

    // hermitian, K' simple
    let mut exp = BTreeSet::new();
    let mut found = BTreeSet::new();
    for e in &cases {
        let Some(c) = case_of(e) else { continue };
        if c.base_class != BaseClass::Hermitian || c.ambient.family() == Family::A {
            continue;
        }
        for role in &golden.hermitian.generic_k1 {
            exp.insert(format!("{}: {role}", e.label));
        }
        for r in records_of(&e.label) {
            found.insert(format!("{}: {}", e.label, generic_role(r)));
        }
    }
    sections.push(section("hermitian bases with K' simple", exp, found));

    // hermitian, SU(s+t)/S(U(s)U(t))
    let mut exp = BTreeSet::new();
    let mut found = BTreeSet::new();
    let mut exp_bases = BTreeSet::new();
    let mut found_bases = BTreeSet::new();
    for n in 2..=rank_cap + 1 {
        for s in golden.hermitian.su_min..n {
            let t = n - s;
            if t < golden.hermitian.su_min {
                continue;
            }
            let base = format!("SU({n})/S(U({s})U({t}))");
            for k1 in su_expected(&golden.hermitian.su_k1, s, t)? {
                exp.insert(format!("{base}: {k1}"));
            }
            exp_bases.insert(base);
        }
    }
    for e in &cases {
        let Some(c) = case_of(e) else { continue };
        if c.ambient.family() != Family::A {
            continue;
        }
        let base = e.classical_label.clone().unwrap_or_default();
        for r in records_of(&e.label).into_iter().filter(|r| r.case.bds().map(|b| b.psi0) == Some(c.psi0)) {
            found.insert(format!("{base}: {}", classical_k1(r).unwrap_or_default()));
        }
        found_bases.insert(base);
    }
    sections.push(section("hermitian bases SU(s+t)/S(U(s)U(t))", exp_bases, found_bases));
    sections.push(section("bundles over SU(s+t)/S(U(s)U(t))", exp, found));

    // symmetric, classical
    let mut exp = BTreeSet::new();
    let sym = &golden.symmetric;
    for s in sym.so_s_min..=2 * rank_cap + 1 {
        for t in s..=2 * rank_cap + 1 {
            if (s + t) / 2 <= rank_cap && (!sym.so_st_even || (s * t) % 2 == 0) {
                exp.insert(format!("SO({})/SO({s})SO({t})", s + t));
            }
        }
    }
    for s in sym.sp_s_min..=rank_cap {
        for t in s..=rank_cap {
            if s + t <= rank_cap {
                exp.insert(format!("Sp({})/Sp({s})Sp({t})", s + t));
            }
        }
    }
    let mut found = BTreeSet::new();
    let mut factor_mismatch = BTreeSet::new();
    for e in &cases {
        let Some(c) = case_of(e) else { continue };
        if c.base_class != BaseClass::Symmetric || !e.splittable || c.ambient.family().is_exceptional() {
            continue;
        }
        let label = e.classical_label.clone().unwrap_or_default();
        let mut dims: Vec<usize> = c.k_components.iter().map(|k| k.dim()).collect();
        dims.sort_unstable();
        if classical_factor_dims(&label) != Some(dims) {
            factor_mismatch.insert(format!("{label} vs {}", e.label));
        }
        found.insert(label);
    }
    sections.push(section("symmetric bases, classical", exp, found));
    sections.push(section(
        "classical factors match Dynkin components",
        BTreeSet::new(),
        factor_mismatch,
    ));

    let labels_where = |pred: &dyn Fn(&CaseEntry) -> bool| -> BTreeSet<String> {
        cases.iter().filter(|e| pred(e)).map(|e| e.label.clone()).collect()
    };
    let listed = |v: &[String]| -> BTreeSet<String> { v.iter().filter(|l| in_cap(l)).cloned().collect() };
    let exceptional = |e: &CaseEntry| case_of(e).is_some_and(|c| c.ambient.family().is_exceptional());

    sections.push(section(
        "symmetric bases, exceptional",
        listed(&sym.exceptional),
        labels_where(&|e| e.n0 == Some(2) && e.splittable && exceptional(e)),
    ));
    sections.push(section(
        "nearly-Kaehler bases with K simple",
        listed(&golden.nearly_kaehler.simple),
        labels_where(&|e| e.n0 == Some(3) && !e.splittable),
    ));
    sections.push(section(
        "nearly-Kaehler bases that split",
        listed(&golden.nearly_kaehler.split),
        labels_where(&|e| e.n0 == Some(3) && e.splittable),
    ));

    let five = &golden.five_symmetric;
    let exp: BTreeSet<String> = listed(&five.labels)
        .into_iter()
        .map(|l| format!("{l}: {} bundles", five.bundles))
        .collect();
    let found: BTreeSet<String> = labels_where(&|e| e.n0 == Some(5))
        .into_iter()
        .map(|l| format!("{l}: {} bundles", records_of(&l).len()))
        .collect();
    sections.push(section("5-symmetric bases", exp, found));

    let s_min = golden.odd_grassmannian.s_min;
    let mut exp = BTreeSet::new();
    for s in s_min..=rank_cap {
        for t in s..=rank_cap {
            if s + t < rank_cap {
                let n = if s == t { 1 } else { 2 };
                exp.insert(format!(
                    "SO({})/[SO({})xSO({})]: {n} bundles",
                    2 * (s + t) + 2,
                    2 * s + 1,
                    2 * t + 1
                ));
            }
        }
    }
    let found: BTreeSet<String> = cases
        .iter()
        .filter(|e| matches!(e.case, CaseRef::OddGrassmannian { .. }))
        .map(|e| format!("{}: {} bundles", e.label, e.record_ids.len()))
        .collect();
    sections.push(section("odd real Grassmannians", exp, found));

    Ok(GoldenReport { rank_cap, sections })
}

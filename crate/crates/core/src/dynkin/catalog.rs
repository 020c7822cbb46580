use serde::{Deserialize, Serialize};

use super::bds::{bds_enumerate, odd_grassmannian_records, slugify, splittings, BaseClass, CaseRef, FibrationRecord, WeylTable};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rootsys::{Family, SimpleType};

pub const DEFAULT_RANK_CAP: usize = 8;

/// Short names accepted in place of a case id.
pub const ALIASES: &[(&str, &str)] = &[
    ("su3-hopf", "a2-a1-2-over-a2-a1t1"),
    ("so6-stiefel", "so6-so3-over-so6-so3xso3"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassFilter {
    Hermitian,
    Symmetric,
    NearlyKaehler,
    #[serde(rename = "5-symmetric")]
    FiveSymmetric,
    OddGrassmannian,
}

impl std::str::FromStr for ClassFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "hermitian" => ClassFilter::Hermitian,
            "symmetric" => ClassFilter::Symmetric,
            "nearly-kaehler" | "nearly-kahler" | "nk" => ClassFilter::NearlyKaehler,
            "5-symmetric" | "five-symmetric" => ClassFilter::FiveSymmetric,
            "odd-grassmannian" => ClassFilter::OddGrassmannian,
            other => return Err(Error::InvalidArgument(format!("unknown class {other:?}"))),
        })
    }
}

impl From<BaseClass> for ClassFilter {
    fn from(b: BaseClass) -> Self {
        match b {
            BaseClass::Hermitian => ClassFilter::Hermitian,
            BaseClass::Symmetric => ClassFilter::Symmetric,
            BaseClass::NearlyKaehler => ClassFilter::NearlyKaehler,
            BaseClass::FiveSymmetric => ClassFilter::FiveSymmetric,
        }
    }
}

/// A family letter alone, or a letter with a fixed rank such as `E8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FamilySelector {
    pub family: Family,
    pub rank: Option<usize>,
}

impl std::str::FromStr for FamilySelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let family = chars
            .next()
            .and_then(|c| Family::from_letter(c.to_ascii_uppercase()))
            .ok_or_else(|| Error::ParseType(s.to_string()))?;
        let rest = chars.as_str();
        if rest.is_empty() {
            return Ok(FamilySelector { family, rank: None });
        }
        let ty: SimpleType = s.parse()?;
        Ok(FamilySelector { family, rank: Some(ty.rank()) })
    }
}

#[derive(Clone, Debug)]
pub struct CatalogFilter {
    /// Empty means every family.
    pub families: Vec<FamilySelector>,
    pub rank_cap: usize,
    pub rank: Option<usize>,
    /// Empty means every class.
    pub classes: Vec<ClassFilter>,
    pub n0: Option<i64>,
    /// `Some(true)`: only cases with simple K; `Some(false)`: only splittable ones.
    pub simple_k: Option<bool>,
    pub exec: Exec,
}

impl Default for CatalogFilter {
    fn default() -> Self {
        CatalogFilter {
            families: Vec::new(),
            rank_cap: DEFAULT_RANK_CAP,
            rank: None,
            classes: Vec::new(),
            n0: None,
            simple_k: None,
            exec: Exec::default(),
        }
    }
}

impl CatalogFilter {
    fn type_passes(&self, ty: SimpleType) -> bool {
        ty.rank() <= self.rank_cap
            && self.rank.is_none_or(|r| r == ty.rank())
            && (self.families.is_empty()
                || self
                    .families
                    .iter()
                    .any(|f| f.family == ty.family() && f.rank.is_none_or(|r| r == ty.rank())))
    }

    fn class_passes(&self, c: ClassFilter) -> bool {
        self.classes.is_empty() || self.classes.contains(&c)
    }

    fn types(&self) -> Vec<SimpleType> {
        SimpleType::all_up_to(self.rank_cap)
            .into_iter()
            .filter(|&t| self.type_passes(t))
            .collect()
    }
}

/// A base G/K together with the ids of its splitting records.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CaseEntry {
    pub label: String,
    pub classical_label: Option<String>,
    pub class: ClassFilter,
    pub n0: Option<i64>,
    pub splittable: bool,
    pub note: Option<String>,
    pub record_ids: Vec<String>,
    pub case: CaseRef,
}

fn bds_entries(filter: &CatalogFilter, table: &WeylTable) -> Result<Vec<CaseEntry>> {
    let per_type = filter.exec.map(&filter.types(), |&ty| -> Result<Vec<CaseEntry>> {
        let mut out = Vec::new();
        for case in bds_enumerate(ty)? {
            if !filter.class_passes(case.base_class.into()) || filter.n0.is_some_and(|n| n != case.n0) {
                continue;
            }
            let simple = case.k_is_simple();
            if filter.simple_k.is_some_and(|want| want != simple) {
                continue;
            }
            let records = splittings(&case, table)?;
            out.push(CaseEntry {
                label: case.label.clone(),
                classical_label: case.classical_label.clone(),
                class: case.base_class.into(),
                n0: Some(case.n0),
                splittable: !simple,
                note: simple.then(|| "no splitting: K is simple".to_string()),
                record_ids: records.iter().map(|r| r.case_id.clone()).collect(),
                case: CaseRef::BorelDeSiebenthal(Box::new(case)),
            });
        }
        Ok(out)
    });
    let mut all = Vec::new();
    for v in per_type {
        all.extend(v?);
    }
    Ok(all)
}

fn odd_records(filter: &CatalogFilter) -> Result<Vec<FibrationRecord>> {
    if !filter.class_passes(ClassFilter::OddGrassmannian)
        || filter.n0.is_some()
        || filter.simple_k == Some(true)
    {
        return Ok(Vec::new());
    }
    let recs = odd_grassmannian_records(filter.rank_cap)?;
    Ok(recs
        .into_iter()
        .filter(|r| filter.type_passes(r.case.group()))
        .collect())
}

/// Base cases in catalog order: type (family, then rank), then ψ₀, with the
/// odd Grassmannians last.
pub fn catalog_cases(filter: &CatalogFilter) -> Result<Vec<CaseEntry>> {
    let table = WeylTable::up_to(filter.rank_cap + 1, filter.exec)?;
    let mut entries = bds_entries(filter, &table)?;
    let odd = odd_records(filter)?;
    let mut seen: Vec<String> = Vec::new();
    for r in &odd {
        if seen.contains(&r.base_label) {
            let e = entries.iter_mut().rev().find(|e| e.label == r.base_label).expect("entry");
            e.record_ids.push(r.case_id.clone());
            continue;
        }
        seen.push(r.base_label.clone());
        entries.push(CaseEntry {
            label: r.base_label.clone(),
            classical_label: Some(r.base_label.clone()),
            class: ClassFilter::OddGrassmannian,
            n0: None,
            splittable: true,
            note: Some("rank K < rank G".to_string()),
            record_ids: vec![r.case_id.clone()],
            case: r.case.clone(),
        });
    }
    Ok(entries)
}

/// Every splitting record passing the filter, in catalog order.
pub fn catalog(filter: &CatalogFilter) -> Result<Vec<FibrationRecord>> {
    let table = WeylTable::up_to(filter.rank_cap + 1, filter.exec)?;
    let per_case = filter.exec.map(&bds_entries(filter, &table)?, |e| match &e.case {
        CaseRef::BorelDeSiebenthal(c) => splittings(c, &table),
        CaseRef::OddGrassmannian { .. } => Ok(Vec::new()),
    });
    let mut out = Vec::new();
    for v in per_case {
        out.extend(v?);
    }
    out.extend(odd_records(filter)?);
    Ok(out)
}

/// Looks a record up by case id, alias, or base-label slug (first match).
pub fn find_record(id: &str, rank_cap: usize) -> Result<FibrationRecord> {
    let id = id.trim().to_ascii_lowercase();
    let target = ALIASES
        .iter()
        .find(|(a, _)| *a == id)
        .map(|(_, t)| t.to_string())
        .unwrap_or(id);
    let filter = CatalogFilter {
        rank_cap,
        ..CatalogFilter::default()
    };
    let all = catalog(&filter)?;
    all.iter()
        .find(|r| r.case_id == target)
        .or_else(|| all.iter().find(|r| slugify(&r.base_label) == target))
        .cloned()
        .ok_or_else(|| Error::InvalidArgument(format!("no case with id {target:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn seq(f: CatalogFilter) -> CatalogFilter {
        CatalogFilter { exec: Exec::Sequential, ..f }
    }

    #[test]
    fn ids_unique_and_swap_closed() {
        let recs = catalog(&seq(CatalogFilter::default())).unwrap();
        let ids: HashSet<&str> = recs.iter().map(|r| r.case_id.as_str()).collect();
        assert_eq!(ids.len(), recs.len());
        for r in &recs {
            assert!(ids.contains(r.swap_partner.as_str()), "{}", r.case_id);
        }
    }

    #[test]
    fn exec_modes_agree() {
        let f = CatalogFilter { rank_cap: 5, ..CatalogFilter::default() };
        let a = catalog(&CatalogFilter { exec: Exec::Sequential, ..f.clone() }).unwrap();
        let b = catalog(&CatalogFilter { exec: Exec::Parallel, ..f }).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn filters() {
        let e8 = seq(CatalogFilter {
            families: vec!["E8".parse().unwrap()],
            n0: Some(5),
            ..CatalogFilter::default()
        });
        let recs = catalog(&e8).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.base_label == "E8/A4A4"));

        let simple = seq(CatalogFilter {
            families: vec!["E".parse().unwrap(), "G".parse().unwrap()],
            simple_k: Some(true),
            ..CatalogFilter::default()
        });
        let cases = catalog_cases(&simple).unwrap();
        let labels: Vec<&str> = cases.iter().map(|c| c.label.as_str()).collect();
        assert_eq!(labels, vec!["E7/A7", "E8/D8", "E8/A8", "G2/A2"]);
        assert!(cases.iter().all(|c| c.record_ids.is_empty() && c.note.is_some()));
    }

    #[test]
    fn aliases_resolve() {
        let hopf = find_record("su3-hopf", 3).unwrap();
        assert_eq!(hopf.dims.g, 8);
        assert_eq!(hopf.dims.k1, 3);
        assert_eq!(hopf.dims.k2, 1);
        assert_eq!(hopf.dims.m1, 5);
        let so6 = find_record("so6-stiefel", 3).unwrap();
        assert_eq!(so6.dims.m, 9);
        let a4a4 = find_record("e8-a4a4", 8).unwrap();
        assert_eq!(a4a4.base_label, "E8/A4A4");
        assert!(find_record("nonsense", 3).is_err());
    }

    #[test]
    fn selector_parse() {
        let s: FamilySelector = "E8".parse().unwrap();
        assert_eq!(s.rank, Some(8));
        let s: FamilySelector = "a".parse().unwrap();
        assert_eq!((s.family, s.rank), (Family::A, None));
        assert!("E9".parse::<FamilySelector>().is_err());
        assert!("Q".parse::<FamilySelector>().is_err());
    }
}

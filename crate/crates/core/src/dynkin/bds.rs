use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use super::{classify_components, diagram_automorphisms, Component, DynkinDiagram, LengthClass, VertexId};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::rootsys::{highest_root, weyl_order, Family, Rational, RootSystem, SimpleType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaseClass {
    Hermitian,
    Symmetric,
    NearlyKaehler,
    #[serde(rename = "5-symmetric")]
    FiveSymmetric,
}

impl BaseClass {
    pub fn from_n0(n0: i64) -> Result<BaseClass> {
        match n0 {
            1 => Ok(BaseClass::Hermitian),
            2 => Ok(BaseClass::Symmetric),
            3 => Ok(BaseClass::NearlyKaehler),
            5 => Ok(BaseClass::FiveSymmetric),
            _ => Err(Error::Consistency(format!("no base class for n0 = {n0}"))),
        }
    }
}

impl fmt::Display for BaseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseClass::Hermitian => "hermitian",
            BaseClass::Symmetric => "symmetric",
            BaseClass::NearlyKaehler => "nearly-kaehler",
            BaseClass::FiveSymmetric => "5-symmetric",
        })
    }
}

fn is_prime(n: i64) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// One admissible choice of ψ₀ for a simple type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BdSCase {
    pub ambient: SimpleType,
    /// 1-based index of the deleted simple root.
    pub psi0: usize,
    pub n0: i64,
    pub base_class: BaseClass,
    pub quaternion_kaehler: bool,
    pub label: String,
    pub classical_label: Option<String>,
    pub has_circle_factor: bool,
    pub k_components: Vec<Component>,
    pub k_diagram: DynkinDiagram,
    /// Automorphisms of the diagram of G, as vertex permutations.
    #[serde(skip)]
    pub(crate) g_automorphisms: Vec<Vec<usize>>,
}

impl BdSCase {
    pub fn k_is_simple(&self) -> bool {
        self.k_components.len() == 1 && !self.has_circle_factor
    }

    pub fn factors(&self) -> Vec<KFactor> {
        let mut f: Vec<KFactor> = self.k_components.iter().cloned().map(KFactor::Simple).collect();
        if self.has_circle_factor {
            f.push(KFactor::Circle { psi0: self.psi0 });
        }
        f
    }
}

/// A local factor of K: a simple component, or the circle of a hermitian
/// case (rank 1, dimension 1, trivial Weyl group).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KFactor {
    Simple(Component),
    Circle { psi0: usize },
}

impl KFactor {
    pub fn name(&self) -> String {
        match self {
            KFactor::Simple(c) => c.ty.to_string(),
            KFactor::Circle { .. } => "T1".to_string(),
        }
    }

    /// Name with the vertex set attached, unique within one ambient case.
    pub fn tagged_name(&self) -> String {
        match self {
            KFactor::Simple(c) if c.vertices.is_empty() => c.ty.to_string(),
            KFactor::Simple(c) => {
                let v: Vec<String> = c.vertices.iter().map(ToString::to_string).collect();
                format!("{}[{}]", c.ty, v.join(","))
            }
            KFactor::Circle { psi0 } => format!("T1[{psi0}]"),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            KFactor::Simple(c) => c.dim(),
            KFactor::Circle { .. } => 1,
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            KFactor::Simple(c) => c.rank(),
            KFactor::Circle { .. } => 1,
        }
    }

    pub fn simple_type(&self) -> Option<SimpleType> {
        match self {
            KFactor::Simple(c) => Some(c.ty),
            KFactor::Circle { .. } => None,
        }
    }

    fn simple_vertices(&self) -> Vec<usize> {
        match self {
            KFactor::Simple(c) => c
                .vertices
                .iter()
                .filter_map(|v| match v {
                    VertexId::Simple(i) => Some(i - 1),
                    VertexId::LowestRoot => None,
                })
                .collect(),
            KFactor::Circle { .. } => Vec::new(),
        }
    }
}

/// Either a Borel–de Siebenthal case or the rank-deficient odd real
/// Grassmannian SO(2s+2t+2)/[SO(2s+1)×SO(2t+1)].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CaseRef {
    BorelDeSiebenthal(Box<BdSCase>),
    OddGrassmannian { group: SimpleType, s: usize, t: usize },
}

impl CaseRef {
    pub fn group(&self) -> SimpleType {
        match self {
            CaseRef::BorelDeSiebenthal(c) => c.ambient,
            CaseRef::OddGrassmannian { group, .. } => *group,
        }
    }

    pub fn bds(&self) -> Option<&BdSCase> {
        match self {
            CaseRef::BorelDeSiebenthal(c) => Some(c),
            CaseRef::OddGrassmannian { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EulerCharacteristic {
    Positive(u64),
    Zero,
}

impl Serialize for EulerCharacteristic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EulerCharacteristic::Positive(n) => s.serialize_u64(*n),
            EulerCharacteristic::Zero => s.serialize_str("zero"),
        }
    }
}

impl<'de> Deserialize<'de> for EulerCharacteristic {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(d)? {
            serde_json::Value::String(s) if s == "zero" => Ok(EulerCharacteristic::Zero),
            serde_json::Value::Number(n) => n
                .as_u64()
                .map(EulerCharacteristic::Positive)
                .ok_or_else(|| serde::de::Error::custom("bad Euler characteristic")),
            other => Err(serde::de::Error::custom(format!("bad Euler characteristic {other}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub g: usize,
    pub k1: usize,
    pub k2: usize,
    pub m: usize,
    pub m1: usize,
}

/// One isotropy-splitting fibration G/K₁ → G/K₁K₂.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FibrationRecord {
    pub case_id: String,
    pub human_label: String,
    pub base_label: String,
    pub classical_label: Option<String>,
    pub swap_partner: String,
    pub equal_rank: bool,
    pub euler_characteristic: EulerCharacteristic,
    /// Diagram-automorphism proxies for the orders of Out(G,K₁), Out(G,K₂).
    pub isometry_component_counts: (u64, u64),
    /// Set on cases where the proxy is known to differ from the true group.
    pub out_proxy_exception: bool,
    pub dims: Dims,
    pub k1_components: Vec<KFactor>,
    pub k2_components: Vec<KFactor>,
    pub case: CaseRef,
}

/// Weyl group orders by simple type, computed once.
#[derive(Clone, Debug, Default)]
pub struct WeylTable {
    orders: HashMap<SimpleType, u64>,
}

impl WeylTable {
    pub fn up_to(cap: usize, exec: Exec) -> Result<Self> {
        let types = SimpleType::all_up_to(cap);
        let orders = exec.map(&types, |&t| RootSystem::new(t).and_then(|rs| weyl_order(&rs)));
        let mut table = HashMap::new();
        for (t, o) in types.into_iter().zip(orders) {
            table.insert(t, o?);
        }
        Ok(WeylTable { orders: table })
    }

    pub fn get(&self, t: SimpleType) -> Result<u64> {
        self.orders
            .get(&t)
            .copied()
            .ok_or_else(|| Error::Consistency(format!("Weyl order of {t} not tabulated")))
    }

    fn factor(&self, f: &KFactor) -> Result<u64> {
        match f.simple_type() {
            Some(t) => self.get(t),
            None => Ok(1),
        }
    }
}

fn slug(label: &str) -> String {
    let mut s = String::new();
    for c in label.replace("->", " over ").to_lowercase().chars() {
        match c {
            '(' | ')' | ']' => {}
            c if c.is_ascii_alphanumeric() => s.push(c),
            _ => {
                if !s.ends_with('-') {
                    s.push('-')
                }
            }
        }
    }
    s.trim_matches('-').to_string()
}

pub(crate) fn slugify(label: &str) -> String {
    slug(label)
}

fn k_label(ambient: SimpleType, factors: &[KFactor]) -> String {
    let names: String = factors.iter().map(KFactor::name).collect();
    format!("{ambient}/{names}")
}

/// Classical name of a Borel–de Siebenthal base G/K, for the classical families.
fn classical_case_label(ty: SimpleType, p: usize) -> Option<String> {
    let n = ty.rank();
    let so = |a: usize, b: usize, big: usize| {
        let (s, t) = (a.min(b), a.max(b));
        format!("SO({big})/SO({s})SO({t})")
    };
    Some(match ty.family() {
        Family::A => format!("SU({})/S(U({})U({}))", n + 1, p, n + 1 - p),
        Family::B if n == 2 && p == 2 => "Sp(2)/Sp(1)Sp(1)".to_string(),
        Family::B if p == 1 => so(2, 2 * n - 1, 2 * n + 1),
        Family::B => so(2 * p, 2 * n + 1 - 2 * p, 2 * n + 1),
        Family::C if p == n => format!("Sp({n})/U({n})"),
        Family::C => format!("Sp({n})/Sp({})Sp({})", p.min(n - p), p.max(n - p)),
        Family::D if p == 1 => so(2, 2 * n - 2, 2 * n),
        Family::D if p + 1 >= n => format!("SO({})/U({n})", 2 * n),
        Family::D => so(2 * p, 2 * n - 2 * p, 2 * n),
        _ => return None,
    })
}

/// The parameter s used for the quaternion-Kähler sub-label of n₀ = 2 cases.
fn quaternion_kaehler(ty: SimpleType, p: usize) -> bool {
    let n = ty.rank();
    match ty.family() {
        Family::B if n == 2 && p == 2 => true,
        Family::B => matches!((2 * p).min(2 * n + 1 - 2 * p), 3 | 4),
        Family::D => matches!((2 * p).min(2 * n - 2 * p), 3 | 4),
        Family::C => p.min(n - p) == 1,
        Family::A => false,
        _ => true,
    }
}

/// One case per simple root ψ₀ whose highest-root coefficient is 1 or prime.
pub fn bds_enumerate(ty: SimpleType) -> Result<Vec<BdSCase>> {
    let rs = RootSystem::new(ty)?;
    let beta = highest_root(&rs)?;
    let lowest: Vec<Rational> = beta.vector.iter().map(|x| -x).collect();
    let g_automorphisms = diagram_automorphisms(&DynkinDiagram::of_system(&rs)?).elements;
    let mut cases = Vec::new();
    for (idx, &n0) in beta.coefficients.iter().enumerate() {
        if !(n0 == 1 || is_prime(n0)) {
            continue;
        }
        let psi0 = idx + 1;
        let mut ids: Vec<VertexId> = (1..=rs.rank())
            .filter(|&i| i != psi0)
            .map(VertexId::Simple)
            .collect();
        if n0 > 1 {
            ids.push(VertexId::LowestRoot);
        }
        let k_diagram = DynkinDiagram::from_roots(&rs, &ids, &lowest)?;
        let k_components = classify_components(&k_diagram)?;
        let has_circle_factor = n0 == 1;
        let base_class = BaseClass::from_n0(n0)?;
        let k_rank: usize =
            k_components.iter().map(Component::rank).sum::<usize>() + has_circle_factor as usize;
        if k_rank != rs.rank() {
            return Err(Error::Consistency(format!("{ty} psi0={psi0}: rank k != rank g")));
        }
        let mut factors: Vec<KFactor> = k_components.iter().cloned().map(KFactor::Simple).collect();
        if has_circle_factor {
            factors.push(KFactor::Circle { psi0 });
        }
        cases.push(BdSCase {
            ambient: ty,
            psi0,
            n0,
            base_class,
            quaternion_kaehler: n0 == 2 && quaternion_kaehler(ty, psi0),
            label: k_label(ty, &factors),
            classical_label: classical_case_label(ty, psi0),
            has_circle_factor,
            k_components,
            k_diagram,
            g_automorphisms: g_automorphisms.clone(),
        });
    }
    Ok(cases)
}

/// Whether a case belongs to the families where the automorphism proxy is
/// known not to equal Out(G,K₁): the orthocomplementation cases with two
/// isomorphic factors, and E6/A2A2A2.
fn proxy_exception(case: &BdSCase) -> bool {
    let n = case.ambient.rank();
    let p = case.psi0;
    match case.ambient.family() {
        Family::A => 2 * p == n + 1,
        Family::C => 2 * p == n,
        Family::D => 4 * p == 2 * n,
        Family::E => case.label == "E6/A2A2A2",
        _ => false,
    }
}

fn classical_k1_name_a(case: &BdSCase, k1: &[KFactor]) -> String {
    let p = case.psi0;
    let s = p;
    let t = case.ambient.rank() + 1 - p;
    let left = k1.iter().any(|f| f.simple_vertices().iter().any(|&v| v + 1 < p));
    let right = k1.iter().any(|f| f.simple_vertices().iter().any(|&v| v + 1 > p));
    let circle = k1.iter().any(|f| matches!(f, KFactor::Circle { .. }));
    match (left, right, circle) {
        (true, false, false) => format!("SU({s})"),
        (true, false, true) => format!("U({s})"),
        (false, true, false) => format!("SU({t})"),
        (false, true, true) => format!("U({t})"),
        (false, false, true) => "S".to_string(),
        (true, true, false) => format!("SU({s})SU({t})"),
        _ => "?".to_string(),
    }
}

/// All ordered bipartitions of the factors of K into (K₁, K₂) with both
/// sides nonempty. Cases with simple K and no circle give nothing.
pub fn splittings(case: &BdSCase, table: &WeylTable) -> Result<Vec<FibrationRecord>> {
    let factors = case.factors();
    let n = factors.len();
    if n < 2 {
        return Ok(Vec::new());
    }
    let proxy = |part: &[KFactor]| -> u64 {
        let mut set: Vec<usize> = part.iter().flat_map(KFactor::simple_vertices).collect();
        set.sort_unstable();
        case.g_automorphisms
            .iter()
            .filter(|perm| perm[case.psi0 - 1] == case.psi0 - 1)
            .filter(|perm| {
                let mut img: Vec<usize> = set.iter().map(|&v| perm[v]).collect();
                img.sort_unstable();
                img == set
            })
            .count() as u64
    };

    let g_dim = case.ambient.dimension_hint();
    let w_g = table.get(case.ambient)?;
    let w_k: u64 = factors
        .iter()
        .map(|f| table.factor(f))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .product();
    let chi = checked_ratio(w_g, w_k, &case.label)?;

    let label_of = |k1: &[KFactor]| -> String {
        let names: String = k1.iter().map(KFactor::tagged_name).collect();
        format!("{}/{} -> {}", case.ambient, names, case.label)
    };
    let classical_of = |k1: &[KFactor]| -> Option<String> {
        if case.ambient.family() == Family::A {
            let n = case.ambient.rank() + 1;
            Some(format!(
                "SU({n})/{} -> {}",
                classical_k1_name_a(case, k1),
                case.classical_label.as_deref().unwrap_or("?")
            ))
        } else {
            None
        }
    };

    let full = (1u32 << n) - 1;
    let mut out = Vec::new();
    for mask in 1..full {
        let pick = |m: u32| -> Vec<KFactor> {
            (0..n)
                .filter(|i| m & (1 << i) != 0)
                .map(|i| factors[i].clone())
                .collect()
        };
        let (k1, k2) = (pick(mask), pick(full ^ mask));
        let k1_dim: usize = k1.iter().map(KFactor::dim).sum();
        let k2_dim: usize = k2.iter().map(KFactor::dim).sum();
        let human_label = label_of(&k1);
        out.push(FibrationRecord {
            case_id: slug(&human_label),
            swap_partner: slug(&label_of(&k2)),
            human_label,
            base_label: case.label.clone(),
            classical_label: classical_of(&k1),
            equal_rank: true,
            euler_characteristic: EulerCharacteristic::Positive(chi),
            isometry_component_counts: (proxy(&k1), proxy(&k2)),
            out_proxy_exception: proxy_exception(case),
            dims: Dims {
                g: g_dim,
                k1: k1_dim,
                k2: k2_dim,
                m: g_dim - k1_dim - k2_dim,
                m1: g_dim - k1_dim,
            },
            k1_components: k1,
            k2_components: k2,
            case: CaseRef::BorelDeSiebenthal(Box::new(case.clone())),
        });
    }
    Ok(out)
}

fn checked_ratio(num: u64, den: u64, what: &str) -> Result<u64> {
    if den == 0 || !num.is_multiple_of(den) {
        return Err(Error::Consistency(format!(
            "{what}: |W_G| = {num} not divisible by |W_K| = {den}"
        )));
    }
    Ok(num / den)
}

fn so_component(n: usize) -> KFactor {
    // SO(2q+1) is B_q, with SO(3) = A1
    let q = n / 2;
    let ty = if q == 1 {
        SimpleType::new(Family::A, 1)
    } else {
        SimpleType::new(Family::B, q)
    }
    .expect("valid odd orthogonal type");
    KFactor::Simple(Component {
        ty,
        lengths: LengthClass::Unspecified,
        vertices: Vec::new(),
    })
}

/// The odd real Grassmannian records with s, t ≥ 1 and rank G = s + t + 1 ≤ `cap`. For
/// s = t one record is emitted; it is its own swap partner.
pub(crate) fn odd_grassmannian_records(cap: usize) -> Result<Vec<FibrationRecord>> {
    let mut out = Vec::new();
    for total in 2..cap {
        for s in 1..total {
            let t = total - s;
            let big = 2 * total + 2;
            let rank = total + 1;
            let group = if rank == 3 {
                SimpleType::new(Family::A, 3)?
            } else {
                SimpleType::new(Family::D, rank)?
            };
            let (a, b) = (2 * s.min(t) + 1, 2 * s.max(t) + 1);
            let base = format!("SO({big})/[SO({a})xSO({b})]");
            let label = |k: usize| format!("SO({big})/SO({}) -> {base}", 2 * k + 1);
            let (k1, k2) = (so_component(2 * s + 1), so_component(2 * t + 1));
            let g = big * (big - 1) / 2;
            let (d1, d2) = (s * (2 * s + 1), t * (2 * t + 1));
            out.push(FibrationRecord {
                case_id: slug(&label(s)),
                human_label: label(s),
                base_label: base.clone(),
                classical_label: Some(label(s)),
                swap_partner: slug(&label(t)),
                equal_rank: false,
                euler_characteristic: EulerCharacteristic::Zero,
                // O(2s+2+2t) × r(SO(1+2t)) has two components
                isometry_component_counts: (2, 1),
                out_proxy_exception: s == t,
                dims: Dims {
                    g,
                    k1: d1,
                    k2: d2,
                    m: g - d1 - d2,
                    m1: g - d1,
                },
                k1_components: vec![k1],
                k2_components: vec![k2],
                case: CaseRef::OddGrassmannian { group, s, t },
            });
        }
    }
    Ok(out)
}

/// χ(G/K) = |W_G| / |W_K| on equal-rank records.
pub fn euler_characteristic(rec: &FibrationRecord, table: &WeylTable) -> Result<u64> {
    if !rec.equal_rank {
        return Err(Error::NotEqualRank(format!(
            "{} has rank K < rank G, so chi(M) = 0",
            rec.base_label
        )));
    }
    let w_g = table.get(rec.case.group())?;
    let w_k: u64 = rec
        .k1_components
        .iter()
        .chain(&rec.k2_components)
        .map(|f| table.factor(f))
        .collect::<Result<Vec<_>>>()?
        .iter()
        .product();
    checked_ratio(w_g, w_k, &rec.base_label)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> WeylTable {
        WeylTable::up_to(8, Exec::Sequential).unwrap()
    }

    fn ty(s: &str) -> SimpleType {
        s.parse().unwrap()
    }

    fn labels(cases: &[BdSCase]) -> Vec<(i64, String)> {
        cases.iter().map(|c| (c.n0, c.label.clone())).collect()
    }

    #[test]
    fn g2_cases() {
        let cases = bds_enumerate(ty("G2")).unwrap();
        assert_eq!(
            labels(&cases),
            vec![(3, "G2/A2".to_string()), (2, "G2/A1A1".to_string())]
        );
    }

    #[test]
    fn e8_has_a4a4() {
        let cases = bds_enumerate(ty("E8")).unwrap();
        let c = cases.iter().find(|c| c.n0 == 5).unwrap();
        assert_eq!(c.label, "E8/A4A4");
        assert_eq!(c.base_class, BaseClass::FiveSymmetric);
        // ψ0 with coefficient 4 or 6 is not admissible
        assert!(cases.iter().all(|c| [1, 2, 3, 5].contains(&c.n0)));
        let t = table();
        assert_eq!(splittings(c, &t).unwrap().len(), 2);
    }

    #[test]
    fn su_cases() {
        // A_{s+t-1}: every ψ0 has n0 = 1 and K = A_{s-1} A_{t-1} T
        for (s, t) in [(2, 3), (1, 4), (3, 3)] {
            let n = s + t - 1;
            let case = &bds_enumerate(ty(&format!("A{n}"))).unwrap()[s - 1];
            assert_eq!(case.n0, 1);
            assert!(case.has_circle_factor);
            let mut ranks: Vec<usize> = case.k_components.iter().map(|c| c.rank()).collect();
            ranks.sort();
            let mut want: Vec<usize> = [s - 1, t - 1].into_iter().filter(|&r| r > 0).collect();
            want.sort();
            assert_eq!(ranks, want);
            assert_eq!(case.classical_label.as_deref(), Some(&*format!("SU({})/S(U({s})U({t}))", s + t)));
        }
    }

    #[test]
    fn simple_k_has_no_splittings() {
        let t = table();
        let e8 = bds_enumerate(ty("E8")).unwrap();
        let a8 = e8.iter().find(|c| c.label == "E8/A8").unwrap();
        assert!(a8.k_is_simple());
        assert!(splittings(a8, &t).unwrap().is_empty());
    }

    #[test]
    fn f4_a2a2_long_short() {
        let t = table();
        let f4 = bds_enumerate(ty("F4")).unwrap();
        let c = f4.iter().find(|c| c.label == "F4/A2A2").unwrap();
        let recs = splittings(c, &t).unwrap();
        assert_eq!(recs.len(), 2);
        let k1_lengths: Vec<LengthClass> = recs
            .iter()
            .map(|r| match &r.k1_components[0] {
                KFactor::Simple(c) => c.lengths,
                _ => unreachable!(),
            })
            .collect();
        assert!(k1_lengths.contains(&LengthClass::Long));
        assert!(k1_lengths.contains(&LengthClass::Short));
        assert_eq!(recs[0].swap_partner, recs[1].case_id);
    }

    #[test]
    fn hermitian_su_records() {
        let t = table();
        // SU(5)/S(U(2)U(3))
        let c = &bds_enumerate(ty("A4")).unwrap()[1];
        let recs = splittings(c, &t).unwrap();
        let mut names: Vec<String> = recs
            .iter()
            .map(|r| r.classical_label.clone().unwrap())
            .map(|l| l.split(" -> ").next().unwrap().to_string())
            .collect();
        names.sort();
        assert_eq!(
            names,
            vec!["SU(5)/S", "SU(5)/SU(2)", "SU(5)/SU(2)SU(3)", "SU(5)/SU(3)", "SU(5)/U(2)", "SU(5)/U(3)"]
        );
    }

    #[test]
    fn swap_closure() {
        let t = table();
        for ty in SimpleType::all_up_to(6) {
            for case in bds_enumerate(ty).unwrap() {
                let recs = splittings(&case, &t).unwrap();
                for r in &recs {
                    let partner = recs.iter().find(|p| p.case_id == r.swap_partner).unwrap();
                    assert_eq!(partner.k1_components, r.k2_components);
                    assert_eq!(partner.swap_partner, r.case_id);
                }
            }
        }
    }

    #[test]
    fn euler_values() {
        let t = table();
        let su3 = &bds_enumerate(ty("A2")).unwrap()[0];
        let rec = &splittings(su3, &t).unwrap()[0];
        assert_eq!(euler_characteristic(rec, &t).unwrap(), 3);
        let g2 = bds_enumerate(ty("G2")).unwrap();
        let a1a1 = g2.iter().find(|c| c.label == "G2/A1A1").unwrap();
        let rec = &splittings(a1a1, &t).unwrap()[0];
        assert_eq!(euler_characteristic(rec, &t).unwrap(), 3);
        let odd = &odd_grassmannian_records(3).unwrap()[0];
        assert!(matches!(euler_characteristic(odd, &t), Err(Error::NotEqualRank(_))));
        // K = G degenerates to ratio 1
        assert_eq!(checked_ratio(12, 12, "G2/G2").unwrap(), 1);
    }

    #[test]
    fn dimension_identity() {
        for ty in SimpleType::all_up_to(8) {
            for case in bds_enumerate(ty).unwrap() {
                let dim_k: usize = case.factors().iter().map(KFactor::dim).sum();
                let roots_k: usize =
                    case.k_components.iter().map(|c| c.dim() - c.rank()).sum();
                let roots_g = ty.dimension_hint() - ty.rank();
                // dim m counts the roots of g outside k, so it is even
                assert!(dim_k < ty.dimension_hint());
                assert_eq!((roots_g - roots_k) % 2, 0, "{}", case.label);
                assert_eq!(ty.dimension_hint() - dim_k, roots_g - roots_k, "{}", case.label);
                if case.n0 > 1 {
                    assert_eq!(case.k_diagram.len(), ty.rank());
                }
            }
        }
    }

    #[test]
    fn proxy_counts() {
        let t = table();
        // E6/A2A2A2: the diagram flip fixes ψ0 = α4 and the {α2, −β} factor
        let e6 = bds_enumerate(ty("E6")).unwrap();
        let c = e6.iter().find(|c| c.label == "E6/A2A2A2").unwrap();
        let recs = splittings(c, &t).unwrap();
        assert_eq!(recs.len(), 6);
        assert!(recs.iter().all(|r| r.out_proxy_exception));
        let fixed = recs
            .iter()
            .find(|r| {
                r.k1_components.len() == 1
                    && matches!(&r.k1_components[0], KFactor::Simple(c) if c.contains_lowest_root())
            })
            .unwrap();
        assert_eq!(fixed.isometry_component_counts, (2, 2));
        let e8 = bds_enumerate(ty("E8")).unwrap();
        let a4a4 = e8.iter().find(|c| c.label == "E8/A4A4").unwrap();
        for r in splittings(a4a4, &t).unwrap() {
            assert_eq!(r.isometry_component_counts, (1, 1));
            assert!(!r.out_proxy_exception);
        }
    }

    #[test]
    fn odd_grassmannian_family() {
        let recs = odd_grassmannian_records(4).unwrap();
        let ids: Vec<&str> = recs.iter().map(|r| r.case_id.as_str()).collect();
        assert_eq!(
            ids,
            vec![
                "so6-so3-over-so6-so3xso3",
                "so8-so3-over-so8-so3xso5",
                "so8-so5-over-so8-so3xso5"
            ]
        );
        assert_eq!(recs[0].dims, Dims { g: 15, k1: 3, k2: 3, m: 9, m1: 12 });
        assert_eq!(recs[0].swap_partner, recs[0].case_id);
        assert_eq!(recs[1].swap_partner, recs[2].case_id);
    }
}

//! Dynkin diagrams built from sets of roots, their classification into simple
//! types, and brute-force diagram automorphisms.

mod bds;
mod catalog;
pub mod golden;

pub use bds::{
    bds_enumerate, euler_characteristic, splittings, BaseClass, BdSCase, CaseRef, Dims,
    EulerCharacteristic, FibrationRecord, KFactor, WeylTable,
};
pub use catalog::{
    catalog, catalog_cases, find_record, CaseEntry, CatalogFilter, ClassFilter, FamilySelector,
    ALIASES, DEFAULT_RANK_CAP,
};

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rootsys::{dot, Family, Rational, RootSystem, SimpleType};

/// A vertex of a diagram drawn from the (extended) diagram of G: either a
/// simple root α_i (1-based) or the lowest root −β.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexId {
    Simple(usize),
    LowestRoot,
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexId::Simple(i) => write!(f, "{i}"),
            VertexId::LowestRoot => write!(f, "-b"),
        }
    }
}

impl Serialize for VertexId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s == "-b" {
            Ok(VertexId::LowestRoot)
        } else {
            s.parse()
                .map(VertexId::Simple)
                .map_err(serde::de::Error::custom)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: VertexId,
    /// Squared length relative to the long roots of the ambient system.
    pub length: String,
    #[serde(skip)]
    pub sq_len: Rational,
    /// Simple-root coefficients of the underlying root.
    pub coeffs: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub bond: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynkinDiagram {
    /// Root system the vertices were taken from.
    pub source: SimpleType,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    #[serde(skip)]
    long_sq_len: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthClass {
    Long,
    Short,
    Mixed,
    /// Components not realised on diagram vertices.
    Unspecified,
}

/// A connected component of a diagram, recognised as a simple type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Component {
    #[serde(rename = "type")]
    pub ty: SimpleType,
    pub lengths: LengthClass,
    pub vertices: Vec<VertexId>,
}

impl Component {
    pub fn rank(&self) -> usize {
        self.ty.rank()
    }

    pub fn dim(&self) -> usize {
        self.ty.dimension_hint()
    }

    pub fn contains_lowest_root(&self) -> bool {
        self.vertices.contains(&VertexId::LowestRoot)
    }

    fn sort_key(&self) -> (usize, Family, LengthClass, Vec<VertexId>) {
        (self.ty.rank(), self.ty.family(), self.lengths, self.vertices.clone())
    }
}

impl DynkinDiagram {
    /// Diagram on the given vertices of the extended diagram of `rs`.
    pub fn from_roots(rs: &RootSystem, ids: &[VertexId], lowest: &[Rational]) -> Result<Self> {
        let long = rs.long_length();
        let mut vertices = Vec::with_capacity(ids.len());
        let mut vectors = Vec::with_capacity(ids.len());
        for &id in ids {
            let (vector, coeffs) = match id {
                VertexId::Simple(i) => {
                    let mut c = vec![0; rs.rank()];
                    c[i - 1] = 1;
                    (rs.simple_roots()[i - 1].clone(), c)
                }
                VertexId::LowestRoot => {
                    let c = rs
                        .simple_coordinates(lowest)?
                        .iter()
                        .map(|x| x.to_integer().to_i64().unwrap_or(0))
                        .collect();
                    (lowest.to_vec(), c)
                }
            };
            let sq_len = dot(&vector, &vector);
            let rel = &sq_len / &long;
            vertices.push(Vertex {
                id,
                length: rel.to_string(),
                sq_len,
                coeffs,
            });
            vectors.push(vector);
        }
        let mut edges = Vec::new();
        for a in 0..vectors.len() {
            for b in a + 1..vectors.len() {
                let ip = dot(&vectors[a], &vectors[b]);
                if ip.is_zero() {
                    continue;
                }
                if ip > Rational::zero() {
                    return Err(Error::Consistency(format!(
                        "vertices {} and {} have positive inner product",
                        ids[a], ids[b]
                    )));
                }
                let m = Rational::from_integer(4.into()) * &ip * &ip
                    / (&vertices[a].sq_len * &vertices[b].sq_len);
                let bond = match m.to_integer().to_u8() {
                    Some(k @ 1..=3) if m.is_integer() => k,
                    _ => {
                        return Err(Error::Consistency(format!(
                            "illegal bond between {} and {}",
                            ids[a], ids[b]
                        )))
                    }
                };
                edges.push(Edge { a, b, bond });
            }
        }
        let d = DynkinDiagram {
            source: rs.simple_type(),
            vertices,
            edges,
            long_sq_len: long,
        };
        d.validate()?;
        Ok(d)
    }

    /// The ordinary Dynkin diagram of `rs`.
    pub fn of_system(rs: &RootSystem) -> Result<Self> {
        let ids: Vec<VertexId> = (1..=rs.rank()).map(VertexId::Simple).collect();
        DynkinDiagram::from_roots(rs, &ids, &[])
    }

    fn validate(&self) -> Result<()> {
        for e in &self.edges {
            let (la, lb) = (&self.vertices[e.a].sq_len, &self.vertices[e.b].sq_len);
            let ratio = if la > lb { la / lb } else { lb / la };
            let want = Rational::from_integer(if e.bond == 1 { 1 } else { e.bond as i64 }.into());
            if ratio != want {
                return Err(Error::Consistency(format!(
                    "bond {} inconsistent with length ratio {ratio}",
                    e.bond
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn bond(&self, a: usize, b: usize) -> u8 {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
            .map_or(0, |e| e.bond)
    }

    fn neighbours(&self, v: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|e| {
                if e.a == v {
                    Some(e.b)
                } else if e.b == v {
                    Some(e.a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Vertex index sets of the connected components, each sorted.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut comps = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for w in self.neighbours(v) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    fn classify_one(&self, comp: &[usize]) -> Result<SimpleType> {
        let r = comp.len();
        let in_comp: BTreeSet<usize> = comp.iter().copied().collect();
        let edges: Vec<&Edge> = self
            .edges
            .iter()
            .filter(|e| in_comp.contains(&e.a))
            .collect();
        let describe = || {
            let ids: Vec<String> = comp.iter().map(|&v| self.vertices[v].id.to_string()).collect();
            format!("{{{}}}", ids.join(","))
        };
        if edges.len() + 1 != r {
            return Err(Error::Unclassifiable(format!("{} is not a tree", describe())));
        }
        let degree = |v: usize| edges.iter().filter(|e| e.a == v || e.b == v).count();
        let max_deg = comp.iter().map(|&v| degree(v)).max().unwrap_or(0);
        let multi: Vec<&&Edge> = edges.iter().filter(|e| e.bond > 1).collect();
        let unclassifiable = || Error::Unclassifiable(describe());

        if let Some(e) = multi.first() {
            if multi.len() > 1 || max_deg > 2 {
                return Err(unclassifiable());
            }
            return match (e.bond, r) {
                (3, 2) => SimpleType::new(Family::G, 2),
                (3, _) => Err(unclassifiable()),
                (_, 2) => SimpleType::new(Family::B, 2),
                _ => {
                    let (da, db) = (degree(e.a), degree(e.b));
                    if da == 2 && db == 2 {
                        if r == 4 {
                            SimpleType::new(Family::F, 4)
                        } else {
                            Err(unclassifiable())
                        }
                    } else {
                        let (end, other) = if da == 1 { (e.a, e.b) } else { (e.b, e.a) };
                        let family = if self.vertices[end].sq_len < self.vertices[other].sq_len {
                            Family::B
                        } else {
                            Family::C
                        };
                        SimpleType::new(family, r)
                    }
                }
            };
        }

        match max_deg {
            0..=2 => SimpleType::new(Family::A, r),
            3 => {
                let branches: Vec<usize> = comp.iter().copied().filter(|&v| degree(v) == 3).collect();
                if branches.len() != 1 {
                    return Err(unclassifiable());
                }
                let centre = branches[0];
                let mut arms: Vec<usize> = self
                    .neighbours(centre)
                    .into_iter()
                    .map(|start| {
                        let (mut prev, mut cur, mut len) = (centre, start, 1);
                        loop {
                            let next: Vec<usize> =
                                self.neighbours(cur).into_iter().filter(|&w| w != prev).collect();
                            match next.as_slice() {
                                [w] => {
                                    prev = cur;
                                    cur = *w;
                                    len += 1;
                                }
                                _ => return len,
                            }
                        }
                    })
                    .collect();
                arms.sort_unstable();
                match arms.as_slice() {
                    [1, 1, c] => SimpleType::new(Family::D, c + 3),
                    [1, 2, 2] => SimpleType::new(Family::E, 6),
                    [1, 2, 3] => SimpleType::new(Family::E, 7),
                    [1, 2, 4] => SimpleType::new(Family::E, 8),
                    _ => Err(unclassifiable()),
                }
            }
            _ => Err(unclassifiable()),
        }
    }

    fn length_class(&self, comp: &[usize]) -> LengthClass {
        let long = comp.iter().filter(|&&v| self.vertices[v].sq_len == self.long_sq_len).count();
        if long == comp.len() {
            LengthClass::Long
        } else if long == 0 {
            LengthClass::Short
        } else {
            LengthClass::Mixed
        }
    }

    pub fn permuted_is_automorphism(&self, perm: &[usize]) -> bool {
        self.vertices
            .iter()
            .enumerate()
            .all(|(i, v)| v.sq_len == self.vertices[perm[i]].sq_len)
            && self.edges.iter().all(|e| self.bond(perm[e.a], perm[e.b]) == e.bond)
            && self.edges.len()
                == self
                    .edges
                    .iter()
                    .map(|e| (perm[e.a].min(perm[e.b]), perm[e.a].max(perm[e.b])))
                    .collect::<BTreeSet<_>>()
                    .len()
    }
}

/// Recognises each connected component as a simple type, in canonical order
/// (rank, family, length class, vertices).
pub fn classify_components(d: &DynkinDiagram) -> Result<Vec<Component>> {
    let mut out = Vec::new();
    for comp in d.connected_components() {
        let ty = d.classify_one(&comp)?;
        let mut vertices: Vec<VertexId> = comp.iter().map(|&v| d.vertices[v].id).collect();
        vertices.sort();
        out.push(Component {
            ty,
            lengths: d.length_class(&comp),
            vertices,
        });
    }
    out.sort_by_key(Component::sort_key);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Automorphisms {
    pub order: usize,
    /// Generators as vertex permutations (`perm[i]` is the image of vertex i).
    pub generators: Vec<Vec<usize>>,
    #[serde(skip)]
    pub elements: Vec<Vec<usize>>,
}

/// All permutations of the vertices preserving root lengths and bonds, found
/// by backtracking over partial assignments.
pub fn diagram_automorphisms(d: &DynkinDiagram) -> Automorphisms {
    let n = d.len();
    let mut elements = Vec::new();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend_automorphism(d, 0, &mut perm, &mut used, &mut elements);
    elements.sort();

    // greedy generating set
    let identity: Vec<usize> = (0..n).collect();
    let mut generated: BTreeSet<Vec<usize>> = BTreeSet::from([identity]);
    let mut generators = Vec::new();
    for g in &elements {
        if generated.contains(g) {
            continue;
        }
        generators.push(g.clone());
        loop {
            let mut grown = false;
            let current: Vec<Vec<usize>> = generated.iter().cloned().collect();
            for h in &current {
                for s in &generators {
                    let prod: Vec<usize> = (0..n).map(|i| s[h[i]]).collect();
                    if generated.insert(prod) {
                        grown = true;
                    }
                }
            }
            if !grown {
                break;
            }
        }
    }
    Automorphisms {
        order: elements.len(),
        generators,
        elements,
    }
}

fn extend_automorphism(
    d: &DynkinDiagram,
    k: usize,
    perm: &mut Vec<usize>,
    used: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    let n = d.len();
    if k == n {
        out.push(perm.clone());
        return;
    }
    for img in 0..n {
        if used[img] || d.vertices[img].sq_len != d.vertices[k].sq_len {
            continue;
        }
        // bonds to already-placed vertices must match
        let consistent = (0..k).all(|j| d.bond(j, k) == d.bond(perm[j], img));
        if !consistent {
            continue;
        }
        perm[k] = img;
        used[img] = true;
        extend_automorphism(d, k + 1, perm, used, out);
        used[img] = false;
        perm[k] = usize::MAX;
    }
}

/// Automorphism count of one simple diagram, by three routes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutomorphismRow {
    #[serde(rename = "type")]
    pub ty: SimpleType,
    pub backtracking: usize,
    pub exhaustive: usize,
    /// Classical value: 6 for D4, 2 for A_n (n ≥ 2), D_n (n ≥ 5) and E6, else 1.
    pub expected: usize,
}

impl AutomorphismRow {
    pub fn pass(&self) -> bool {
        self.backtracking == self.expected && self.exhaustive == self.expected
    }
}

fn known_automorphism_count(t: SimpleType) -> usize {
    match (t.family(), t.rank()) {
        (Family::D, 4) => 6,
        (Family::A, n) if n >= 2 => 2,
        (Family::D, n) if n >= 5 => 2,
        (Family::E, 6) => 2,
        _ => 1,
    }
}

/// Counts vertex permutations preserving lengths and bonds by scanning all
/// n! of them (Heap's algorithm).
fn exhaustive_automorphism_count(d: &DynkinDiagram) -> usize {
    let n = d.len();
    let is_auto = |p: &[usize]| {
        (0..n).all(|i| d.vertices[i].sq_len == d.vertices[p[i]].sq_len)
            && (0..n).all(|i| (i + 1..n).all(|j| d.bond(i, j) == d.bond(p[i], p[j])))
    };
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut count = is_auto(&p) as usize;
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            count += is_auto(&p) as usize;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    count
}

/// Automorphism counts for every simple type of rank at most `rank_cap`.
pub fn automorphism_table(rank_cap: usize) -> Result<Vec<AutomorphismRow>> {
    SimpleType::all_up_to(rank_cap)
        .into_iter()
        .map(|t| {
            let d = DynkinDiagram::of_system(&RootSystem::new(t)?)?;
            Ok(AutomorphismRow {
                ty: t,
                backtracking: diagram_automorphisms(&d).order,
                exhaustive: exhaustive_automorphism_count(&d),
                expected: known_automorphism_count(t),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::highest_root;

    fn system(s: &str) -> RootSystem {
        RootSystem::new(s.parse().unwrap()).unwrap()
    }

    fn lowest(rs: &RootSystem) -> Vec<Rational> {
        highest_root(rs).unwrap().vector.iter().map(|x| -x).collect()
    }

    fn types(comps: &[Component]) -> Vec<String> {
        comps.iter().map(|c| c.ty.to_string()).collect()
    }

    #[test]
    fn automorphism_counts() {
        let table = automorphism_table(6).unwrap();
        assert!(table.iter().all(|r| r.pass()), "{table:?}");
        let d4 = table.iter().find(|r| r.ty.to_string() == "D4").unwrap();
        assert_eq!(d4.exhaustive, 6);
    }

    #[test]
    fn every_type_classifies_as_itself() {
        for t in SimpleType::all_up_to(8) {
            let d = DynkinDiagram::of_system(&RootSystem::new(t).unwrap()).unwrap();
            assert_eq!(types(&classify_components(&d).unwrap()), vec![t.to_string()]);
        }
    }

    #[test]
    fn extended_e8_minus_coefficient_two_vertex() {
        let rs = system("E8");
        // α8 has coefficient 2 and is adjacent to −β
        let ids: Vec<VertexId> = (1..=7)
            .map(VertexId::Simple)
            .chain([VertexId::LowestRoot])
            .collect();
        let d = DynkinDiagram::from_roots(&rs, &ids, &lowest(&rs)).unwrap();
        assert_eq!(types(&classify_components(&d).unwrap()), vec!["A1", "E7"]);
    }

    #[test]
    fn extended_f4_minus_coefficient_three_vertex() {
        let rs = system("F4");
        let ids = [
            VertexId::Simple(1),
            VertexId::Simple(3),
            VertexId::Simple(4),
            VertexId::LowestRoot,
        ];
        let d = DynkinDiagram::from_roots(&rs, &ids, &lowest(&rs)).unwrap();
        let comps = classify_components(&d).unwrap();
        assert_eq!(types(&comps), vec!["A2", "A2"]);
        let lens: BTreeSet<LengthClass> = comps.iter().map(|c| c.lengths).collect();
        assert_eq!(lens, BTreeSet::from([LengthClass::Long, LengthClass::Short]));
    }

    #[test]
    fn single_vertex() {
        let rs = system("B3");
        let d = DynkinDiagram::from_roots(&rs, &[VertexId::Simple(3)], &[]).unwrap();
        let comps = classify_components(&d).unwrap();
        assert_eq!(types(&comps), vec!["A1"]);
        assert_eq!(comps[0].lengths, LengthClass::Short);
    }

    /// Oracle: test all n! permutations directly.
    fn brute_force_order(d: &DynkinDiagram) -> usize {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(d.len())
            .into_iter()
            .filter(|p| d.permuted_is_automorphism(p))
            .count()
    }

    #[test]
    fn automorphism_orders() {
        for (name, order) in [("D4", 6), ("A2", 2), ("A5", 2), ("G2", 1), ("E6", 2), ("E8", 1), ("D5", 2), ("F4", 1), ("B3", 1)] {
            let d = DynkinDiagram::of_system(&system(name)).unwrap();
            let aut = diagram_automorphisms(&d);
            assert_eq!(aut.order, order, "{name}");
            assert_eq!(brute_force_order(&d), order, "{name}");
        }
        let a1 = DynkinDiagram::of_system(&system("A1")).unwrap();
        assert_eq!(diagram_automorphisms(&a1).order, 1);
        let d4 = diagram_automorphisms(&DynkinDiagram::of_system(&system("D4")).unwrap());
        assert!(d4.generators.len() <= 2);
    }
}

//! Exact root-system combinatorics for the simple types.
//!
//! Coordinates follow the usual orthonormal-ambient conventions (Bourbaki
//! numbering):
//!
//! | type | ambient | simple roots |
//! |------|---------|--------------|
//! | A_n  | Q^{n+1} | e_i - e_{i+1} |
//! | B_n  | Q^n     | e_i - e_{i+1} (i < n), e_n |
//! | C_n  | Q^n     | e_i - e_{i+1} (i < n), 2 e_n |
//! | D_n  | Q^n     | e_i - e_{i+1} (i < n), e_{n-1} + e_n |
//! | E_8  | Q^8     | ½(e1+e8) - ½(e2+..+e7), e1+e2, e2-e1, e3-e2, .., e7-e6 |
//! | E_7, E_6 | Q^8 | the first 7 (resp. 6) simple roots of E_8 |
//! | F_4  | Q^4     | e2-e3, e3-e4, e4, ½(e1-e2-e3-e4) |
//! | G_2  | Q^3     | e1-e2, -2e1+e2+e3 |
//!
//! Simple roots are indexed from 1 in diagrams and labels, from 0 in vectors.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;

pub type Rational = BigRational;

/// Tolerance for rounding Coxeter eigenvalue arguments to integer exponents.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Largest group the BFS enumeration will materialise.
pub const BFS_LIMIT: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::A,
        Family::B,
        Family::C,
        Family::D,
        Family::E,
        Family::F,
        Family::G,
    ];

    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    pub fn from_letter(c: char) -> Option<Family> {
        Family::ALL
            .into_iter()
            .find(|f| f.letter() == c.to_ascii_uppercase())
    }

    /// Ranks admitted for this family, capped at `cap`.
    pub fn ranks(self, cap: usize) -> Vec<usize> {
        (1..=cap)
            .filter(|&r| SimpleType::new(self, r).is_ok())
            .collect()
    }

    pub fn is_exceptional(self) -> bool {
        matches!(self, Family::E | Family::F | Family::G)
    }
}

/// A simple type X_n. Ranks are restricted so that every isomorphism class
/// has exactly one name (B2 rather than C2, A3 rather than D3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SimpleType {
    family: Family,
    rank: usize,
}

impl SimpleType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let reason = match family {
            Family::A if rank < 1 => Some("A requires rank >= 1"),
            Family::B if rank < 2 => Some("B requires rank >= 2"),
            Family::C if rank < 3 => Some("C requires rank >= 3"),
            Family::D if rank < 4 => Some("D requires rank >= 4"),
            Family::E if !(6..=8).contains(&rank) => Some("E requires rank 6, 7 or 8"),
            Family::F if rank != 4 => Some("F requires rank 4"),
            Family::G if rank != 2 => Some("G requires rank 2"),
            _ => None,
        };
        match reason {
            Some(reason) => Err(Error::InvalidType {
                family: family.letter(),
                rank,
                reason,
            }),
            None => Ok(SimpleType { family, rank }),
        }
    }

    pub fn family(self) -> Family {
        self.family
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    /// Every valid type with rank at most `cap`, in canonical order.
    pub fn all_up_to(cap: usize) -> Vec<SimpleType> {
        Family::ALL
            .into_iter()
            .flat_map(|f| f.ranks(cap).into_iter().map(move |r| SimpleType { family: f, rank: r }))
            .collect()
    }

    /// Number of roots, from the closed formulas (used only as a label aid
    /// and cross-checked against generation in tests).
    pub fn dimension_hint(self) -> usize {
        let n = self.rank;
        match self.family {
            Family::A => n * (n + 2),
            Family::B | Family::C => n * (2 * n + 1),
            Family::D => n * (2 * n - 1),
            Family::E => match n {
                6 => 78,
                7 => 133,
                _ => 248,
            },
            Family::F => 52,
            Family::G => 14,
        }
    }
}

impl fmt::Display for SimpleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FromStr for SimpleType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.trim().chars();
        let family = chars
            .next()
            .and_then(Family::from_letter)
            .ok_or_else(|| Error::ParseType(s.to_string()))?;
        let rank: usize = chars
            .as_str()
            .parse()
            .map_err(|_| Error::ParseType(s.to_string()))?;
        SimpleType::new(family, rank)
    }
}

impl TryFrom<String> for SimpleType {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SimpleType> for String {
    fn from(t: SimpleType) -> String {
        t.to_string()
    }
}

/// A root with its simple-root coefficients and ambient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Root {
    pub coeffs: Vec<i64>,
    pub vector: Vec<Rational>,
}

impl Root {
    pub fn height(&self) -> i64 {
        self.coeffs.iter().sum()
    }

    pub fn is_positive(&self) -> bool {
        self.coeffs.iter().all(|&c| c >= 0)
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    ty: SimpleType,
    simple_roots: Vec<Vec<Rational>>,
    cartan: Vec<Vec<i64>>,
    roots: Vec<Root>,
    gram_inverse: Vec<Vec<Rational>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HighestRoot {
    /// `coefficients[i]` is n_ψ for the simple root ψ = α_{i+1}.
    pub coefficients: Vec<i64>,
    pub vector: Vec<Rational>,
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn half(n: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(2))
}

fn unit_diff(dim: usize, i: usize, j: usize) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); dim];
    v[i] = q(1);
    v[j] = q(-1);
    v
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn simple_roots_for(ty: SimpleType) -> Vec<Vec<Rational>> {
    let n = ty.rank;
    match ty.family {
        Family::A => (0..n).map(|i| unit_diff(n + 1, i, i + 1)).collect(),
        Family::B | Family::C | Family::D => {
            let mut roots: Vec<_> = (0..n - 1).map(|i| unit_diff(n, i, i + 1)).collect();
            let mut last = vec![Rational::zero(); n];
            match ty.family {
                Family::B => last[n - 1] = q(1),
                Family::C => last[n - 1] = q(2),
                _ => {
                    last[n - 2] = q(1);
                    last[n - 1] = q(1);
                }
            }
            roots.push(last);
            roots
        }
        Family::E => {
            let mut a1 = vec![half(-1); 8];
            a1[0] = half(1);
            a1[7] = half(1);
            let mut a2 = vec![Rational::zero(); 8];
            a2[0] = q(1);
            a2[1] = q(1);
            let mut roots = vec![a1, a2];
            // α_{k} = e_{k-1} - e_{k-2} for k = 3..8 (1-based ambient indices)
            for k in 3..=8 {
                roots.push(unit_diff(8, k - 2, k - 3));
            }
            roots.truncate(n);
            roots
        }
        Family::F => {
            let mut a3 = vec![Rational::zero(); 4];
            a3[3] = q(1);
            let a4 = vec![half(1), half(-1), half(-1), half(-1)];
            vec![unit_diff(4, 1, 2), unit_diff(4, 2, 3), a3, a4]
        }
        Family::G => vec![
            vec![q(1), q(-1), q(0)],
            vec![q(-2), q(1), q(1)],
        ],
    }
}

/// Reflection of `v` in the hyperplane orthogonal to `alpha`.
pub fn reflect(v: &[Rational], alpha: &[Rational]) -> Vec<Rational> {
    let factor = q(2) * dot(v, alpha) / dot(alpha, alpha);
    v.iter().zip(alpha).map(|(x, a)| x - &factor * a).collect()
}

/// Exact inverse of a nonsingular rational matrix by Gauss-Jordan.
pub(crate) fn rational_inverse(m: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { q(1) } else { q(0) }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Consistency("singular Gram matrix".into()))?;
        a.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut() {
            *x /= &p;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                let pivot_row = a[col].clone();
                for (x, y) in a[r].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
    }
    Ok(a.into_iter().map(|row| row[n..].to_vec()).collect())
}

fn to_i64(r: &Rational) -> Option<i64> {
    if r.is_integer() {
        r.to_integer().to_i64()
    } else {
        None
    }
}

impl RootSystem {
    pub fn new(ty: SimpleType) -> Result<Self> {
        let simple_roots = simple_roots_for(ty);
        let n = simple_roots.len();

        let mut cartan = vec![vec![0i64; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v = q(2) * dot(&simple_roots[i], &simple_roots[j])
                    / dot(&simple_roots[j], &simple_roots[j]);
                cartan[i][j] = to_i64(&v).ok_or_else(|| {
                    Error::Consistency(format!("{ty}: non-integer Cartan entry ({i},{j})"))
                })?;
            }
        }

        let gram: Vec<Vec<Rational>> = simple_roots
            .iter()
            .map(|a| simple_roots.iter().map(|b| dot(a, b)).collect())
            .collect();
        let gram_inverse = rational_inverse(&gram)?;

        // Close the simple roots under simple reflections.
        let mut seen: HashSet<Vec<Rational>> = simple_roots.iter().cloned().collect();
        let mut queue: VecDeque<Vec<Rational>> = simple_roots.iter().cloned().collect();
        let mut vectors = simple_roots.clone();
        while let Some(v) = queue.pop_front() {
            for alpha in &simple_roots {
                let w = reflect(&v, alpha);
                if seen.insert(w.clone()) {
                    vectors.push(w.clone());
                    queue.push_back(w);
                }
            }
        }

        let mut rs = RootSystem {
            ty,
            simple_roots,
            cartan,
            roots: Vec::with_capacity(vectors.len()),
            gram_inverse,
        };
        let mut roots = Vec::with_capacity(vectors.len());
        for v in vectors {
            let coeffs = rs
                .simple_coordinates(&v)?
                .iter()
                .map(to_i64)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Consistency(format!("{ty}: non-integral root")))?;
            let root = Root { coeffs, vector: v };
            if !(root.is_positive() || root.coeffs.iter().all(|&c| c <= 0)) {
                return Err(Error::Consistency(format!("{ty}: root of mixed sign")));
            }
            roots.push(root);
        }
        roots.sort_by(|a, b| (a.height(), &a.coeffs).cmp(&(b.height(), &b.coeffs)));
        rs.roots = roots;
        rs.validate()?;
        Ok(rs)
    }

    fn validate(&self) -> Result<()> {
        let n = self.rank();
        for i in 0..n {
            if self.cartan[i][i] != 2 {
                return Err(Error::Consistency(format!("{}: Cartan diagonal", self.ty)));
            }
            for j in 0..n {
                if i != j && self.cartan[i][j] > 0 {
                    return Err(Error::Consistency(format!("{}: positive off-diagonal", self.ty)));
                }
            }
        }
        if self.roots.len() + n != self.ty.dimension_hint() {
            return Err(Error::Consistency(format!(
                "{}: {} roots does not match dimension {}",
                self.ty,
                self.roots.len(),
                self.ty.dimension_hint()
            )));
        }
        Ok(())
    }

    pub fn simple_type(&self) -> SimpleType {
        self.ty
    }

    pub fn rank(&self) -> usize {
        self.simple_roots.len()
    }

    pub fn simple_roots(&self) -> &[Vec<Rational>] {
        &self.simple_roots
    }

    /// `cartan()[i][j] = 2(α_i, α_j) / (α_j, α_j)`.
    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn positive_roots(&self) -> impl Iterator<Item = &Root> {
        self.roots.iter().filter(|r| r.is_positive())
    }

    pub fn inner(&self, a: &[Rational], b: &[Rational]) -> Rational {
        dot(a, b)
    }

    /// Coordinates of an ambient vector in the simple-root basis. Errors if
    /// the vector has a component outside the root span.
    pub fn simple_coordinates(&self, v: &[Rational]) -> Result<Vec<Rational>> {
        let rhs: Vec<Rational> = self.simple_roots.iter().map(|a| dot(a, v)).collect();
        let coords: Vec<Rational> = self
            .gram_inverse
            .iter()
            .map(|row| dot(row, &rhs))
            .collect();
        let back = self.ambient(&coords);
        if back != v {
            return Err(Error::NotInRootSpan);
        }
        Ok(coords)
    }

    pub fn ambient(&self, coords: &[Rational]) -> Vec<Rational> {
        let dim = self.simple_roots[0].len();
        let mut out = vec![Rational::zero(); dim];
        for (c, alpha) in coords.iter().zip(&self.simple_roots) {
            for (o, a) in out.iter_mut().zip(alpha) {
                *o += c * a;
            }
        }
        out
    }

    pub fn contains_root(&self, v: &[Rational]) -> bool {
        self.roots.iter().any(|r| r.vector == v)
    }

    /// Squared length of the long roots.
    pub fn long_length(&self) -> Rational {
        self.roots
            .iter()
            .map(|r| dot(&r.vector, &r.vector))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn reflections(&self) -> SimpleReflections {
        SimpleReflections {
            cartan: self.cartan.clone(),
        }
    }

    /// Symmetric Gram matrix of the simple roots, in floating point.
    pub fn gram_f64(&self) -> DMatrix<f64> {
        let n = self.rank();
        DMatrix::from_fn(n, n, |i, j| {
            dot(&self.simple_roots[i], &self.simple_roots[j])
                .to_f64()
                .unwrap_or(f64::NAN)
        })
    }
}

/// The highest root β = Σ n_ψ ψ: the unique root maximal in dominance order.
pub fn highest_root(rs: &RootSystem) -> Result<HighestRoot> {
    let top = rs
        .positive_roots()
        .max_by_key(|r| r.height())
        .ok_or_else(|| Error::Consistency("no positive roots".into()))?;
    for r in rs.positive_roots() {
        if r.coeffs.iter().zip(&top.coeffs).any(|(a, b)| a > b) {
            return Err(Error::Consistency(format!(
                "{}: highest root is not a dominance maximum",
                rs.simple_type()
            )));
        }
    }
    for alpha in rs.simple_roots() {
        let sum: Vec<Rational> = top.vector.iter().zip(alpha).map(|(a, b)| a + b).collect();
        if rs.contains_root(&sum) {
            return Err(Error::Consistency("highest root plus simple root is a root".into()));
        }
    }
    Ok(HighestRoot {
        coefficients: top.coeffs.clone(),
        vector: top.vector.clone(),
    })
}

/// Simple reflections acting on simple-root coordinates. Also used for
/// reducible systems (block-diagonal Cartan matrices).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleReflections {
    cartan: Vec<Vec<i64>>,
}

impl SimpleReflections {
    pub fn from_cartan(cartan: Vec<Vec<i64>>) -> Self {
        SimpleReflections { cartan }
    }

    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    /// Reducible direct sum; the Cartan matrix is block diagonal.
    pub fn direct_sum(&self, other: &SimpleReflections) -> SimpleReflections {
        let (n, m) = (self.rank(), other.rank());
        let mut cartan = vec![vec![0; n + m]; n + m];
        for i in 0..n {
            cartan[i][..n].copy_from_slice(&self.cartan[i]);
        }
        for i in 0..m {
            cartan[n + i][n..].copy_from_slice(&other.cartan[i]);
        }
        SimpleReflections { cartan }
    }

    /// s_i(v) = v - <v, α_i^∨> α_i with <α_j, α_i^∨> = cartan[j][i].
    pub fn apply(&self, i: usize, v: &mut [i64]) {
        let pairing: i64 = v.iter().zip(&self.cartan).map(|(c, row)| c * row[i]).sum();
        v[i] -= pairing;
    }

    /// Group order by breadth-first generation of the group elements (as
    /// integer matrices). `None` when the group exceeds `limit` elements.
    pub fn group_order_bfs(&self, limit: usize) -> Option<u64> {
        let n = self.rank();
        let mut identity = vec![0i64; n * n];
        for i in 0..n {
            identity[i * n + i] = 1;
        }
        let mut seen: HashSet<Vec<i64>> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        while let Some(m) = queue.pop_front() {
            for i in 0..n {
                // left-multiply by s_i: reflect every column
                let mut next = m.clone();
                for col in 0..n {
                    let mut column: Vec<i64> = (0..n).map(|r| next[r * n + col]).collect();
                    self.apply(i, &mut column);
                    for r in 0..n {
                        next[r * n + col] = column[r];
                    }
                }
                if seen.insert(next.clone()) {
                    if seen.len() > limit {
                        return None;
                    }
                    queue.push_back(next);
                }
            }
        }
        Some(seen.len() as u64)
    }

    /// True iff the Weyl orbit of `v` spans the whole space. The orbit is
    /// generated by closure under simple reflections; generation stops early
    /// once the span is full.
    pub fn orbit_spans(&self, v: &[i64]) -> Result<bool> {
        if v.iter().all(|&c| c == 0) {
            return Err(Error::ZeroVector);
        }
        let n = self.rank();
        let mut span = EchelonSpan::new(n);
        let mut seen: HashSet<Vec<i64>> = HashSet::from([v.to_vec()]);
        let mut queue = VecDeque::from([v.to_vec()]);
        span.insert(v);
        while let Some(w) = queue.pop_front() {
            for i in 0..n {
                let mut u = w.clone();
                self.apply(i, &mut u);
                if seen.insert(u.clone()) {
                    if span.insert(&u) && span.rank() == n {
                        return Ok(true);
                    }
                    queue.push_back(u);
                }
            }
        }
        Ok(span.rank() == n)
    }
}

/// Exact row-echelon span over the rationals, kept fraction-free.
struct EchelonSpan {
    rows: Vec<(usize, Vec<i128>)>,
    dim: usize,
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl EchelonSpan {
    fn new(dim: usize) -> Self {
        EchelonSpan { rows: Vec::new(), dim }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Inserts `v`; returns whether the span grew.
    fn insert(&mut self, v: &[i64]) -> bool {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for (pivot, row) in &self.rows {
            if w[*pivot] != 0 {
                let (a, b) = (row[*pivot], w[*pivot]);
                for k in 0..self.dim {
                    w[k] = a * w[k] - b * row[k];
                }
                let g = w.iter().fold(0, |g, &x| gcd(g, x));
                if g > 1 {
                    w.iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        match w.iter().position(|&x| x != 0) {
            None => false,
            Some(pivot) => {
                // eliminate the new pivot from existing rows to stay reduced
                for (_, row) in self.rows.iter_mut() {
                    if row[pivot] != 0 {
                        let (a, b) = (w[pivot], row[pivot]);
                        for k in 0..self.dim {
                            row[k] = a * row[k] - b * w[k];
                        }
                        let g = row.iter().fold(0, |g, &x| gcd(g, x));
                        if g > 1 {
                            row.iter_mut().for_each(|x| *x /= g);
                        }
                    }
                }
                self.rows.push((pivot, w));
                true
            }
        }
    }
}

/// Exponents m_j of the Weyl group from the eigenvalues exp(2πi m_j / h) of a
/// Coxeter element c = s_1 s_2 ... s_n, with h = |roots| / rank.
pub fn coxeter_exponents(rs: &RootSystem) -> Result<Vec<u32>> {
    let n = rs.rank();
    let h = rs.roots().len() / n;
    let refl = rs.reflections();
    // c as a matrix on simple-root coordinates, built column by column
    let mut c = DMatrix::<f64>::zeros(n, n);
    for col in 0..n {
        let mut v = vec![0i64; n];
        v[col] = 1;
        for i in (0..n).rev() {
            refl.apply(i, &mut v);
        }
        for r in 0..n {
            c[(r, col)] = v[r] as f64;
        }
    }
    // Conjugate by the Cholesky factor of the Gram matrix so that the
    // Coxeter element becomes orthogonal (better-conditioned eigenproblem).
    let chol = rs
        .gram_f64()
        .cholesky()
        .ok_or_else(|| Error::Consistency("Gram matrix not positive definite".into()))?;
    let l = chol.l();
    let lt = l.transpose();
    let lt_inv = lt
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Consistency("singular Cholesky factor".into()))?;
    let orth = &lt * c * lt_inv;

    let eig = orth.complex_eigenvalues();
    let mut exps = Vec::with_capacity(n);
    for z in eig.iter() {
        let mut theta = z.im.atan2(z.re);
        if theta < 0.0 {
            theta += std::f64::consts::TAU;
        }
        let m = theta * h as f64 / std::f64::consts::TAU;
        let rounded = m.round();
        if (m - rounded).abs() > EXPONENT_TOL || (z.norm() - 1.0).abs() > EXPONENT_TOL {
            return Err(Error::Consistency(format!(
                "{}: Coxeter eigenvalue {z} gives non-integral exponent {m}",
                rs.simple_type()
            )));
        }
        if rounded < 1.0 || rounded >= h as f64 {
            return Err(Error::Consistency(format!(
                "{}: exponent {rounded} outside 1..h-1",
                rs.simple_type()
            )));
        }
        exps.push(rounded as u32);
    }
    exps.sort_unstable();
    Ok(exps)
}

/// Weyl group order Π (m_j + 1) over the Coxeter exponents.
pub fn weyl_order(rs: &RootSystem) -> Result<u64> {
    let exps = coxeter_exponents(rs)?;
    let order = exps.iter().map(|&m| (m + 1) as u64).product();
    Ok(order)
}

/// Weyl group order by BFS generation; `None` above [`BFS_LIMIT`].
pub fn weyl_order_bfs(rs: &RootSystem) -> Option<u64> {
    rs.reflections().group_order_bfs(BFS_LIMIT)
}

/// Whether the Weyl orbit of a nonzero ambient vector spans the root space.
pub fn weyl_orbit_spans(rs: &RootSystem, v: &[Rational]) -> Result<bool> {
    if v.iter().all(|x| x.is_zero()) {
        return Err(Error::ZeroVector);
    }
    let coords = rs.simple_coordinates(v)?;
    rs.reflections().orbit_spans(&integer_multiple(&coords)?)
}

/// Outcome of [`grid_orbit_check`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridReport {
    pub checked: usize,
    /// Grid vectors whose orbit does not span.
    pub failures: Vec<Vec<i64>>,
}

/// Runs [`SimpleReflections::orbit_spans`] on every vector of
/// [`orbit_grid`]`(rank, max_den)`.
pub fn grid_orbit_check(refl: &SimpleReflections, max_den: i64, exec: Exec) -> Result<GridReport> {
    let grid = orbit_grid(refl.rank(), max_den);
    let spans = exec.map(&grid, |v| refl.orbit_spans(v));
    let mut failures = Vec::new();
    for (v, ok) in grid.iter().zip(spans) {
        if !ok? {
            failures.push(v.clone());
        }
    }
    Ok(GridReport {
        checked: grid.len(),
        failures,
    })
}

/// Smallest positive integer multiple of a rational vector.
pub fn integer_multiple(coords: &[Rational]) -> Result<Vec<i64>> {
    let mut lcm = BigInt::one();
    for c in coords {
        let d = c.denom().clone();
        let g = num_integer_gcd(&lcm, &d);
        lcm = &lcm * &d / g;
    }
    coords
        .iter()
        .map(|c| {
            (c * Rational::from_integer(lcm.clone()))
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::InvalidArgument("coordinates too large".into()))
        })
        .collect()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Distinct rationals in [-1, 1] with denominator at most `max_den`.
pub fn denominator_grid(max_den: i64) -> Vec<Rational> {
    let mut vals: Vec<Rational> = Vec::new();
    for d in 1..=max_den {
        for k in -d..=d {
            let r = Rational::new(BigInt::from(k), BigInt::from(d));
            if !vals.contains(&r) {
                vals.push(r);
            }
        }
    }
    vals.sort();
    vals
}

/// Every nonzero vector of simple-root coordinates drawn from
/// [`denominator_grid`], scaled to integers by the common denominator.
pub fn orbit_grid(rank: usize, max_den: i64) -> Vec<Vec<i64>> {
    let vals = denominator_grid(max_den);
    let lcm: i64 = (1..=max_den).fold(1, |l, d| l / gcd(l as i128, d as i128) as i64 * d);
    let ints: Vec<i64> = vals
        .iter()
        .map(|v| (v * Rational::from_integer(BigInt::from(lcm))).to_integer().to_i64().unwrap())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; rank];
    loop {
        let v: Vec<i64> = idx.iter().map(|&i| ints[i]).collect();
        if v.iter().any(|&c| c != 0) {
            out.push(v);
        }
        let mut k = 0;
        loop {
            if k == rank {
                return out;
            }
            idx[k] += 1;
            if idx[k] < ints.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> SimpleType {
        s.parse().unwrap()
    }

    /// Independent oracle: close the simple roots under reflections using
    /// only the integer Cartan matrix.
    fn closure_count_from_cartan(cartan: &[Vec<i64>]) -> usize {
        let n = cartan.len();
        let refl = SimpleReflections::from_cartan(cartan.to_vec());
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        for i in 0..n {
            let mut e = vec![0i64; n];
            e[i] = 1;
            seen.insert(e.clone());
            queue.push_back(e);
        }
        while let Some(v) = queue.pop_front() {
            for i in 0..n {
                let mut w = v.clone();
                refl.apply(i, &mut w);
                if seen.insert(w.clone()) {
                    queue.push_back(w);
                }
            }
        }
        seen.len()
    }

    #[test]
    fn rank_bounds() {
        assert!(SimpleType::new(Family::C, 2).is_err());
        assert!(SimpleType::new(Family::D, 3).is_err());
        assert!(SimpleType::new(Family::E, 9).is_err());
        assert!(SimpleType::new(Family::A, 0).is_err());
        assert!(SimpleType::new(Family::B, 2).is_ok());
        assert!("X3".parse::<SimpleType>().is_err());
        assert_eq!(ty("e8").to_string(), "E8");
    }

    #[test]
    fn root_counts() {
        assert_eq!(RootSystem::new(ty("A1")).unwrap().roots().len(), 2);
        // oracle values: G2 Cartan [[2,-1],[-3,2]] closes to 12, E8 to 240
        let g2 = vec![vec![2, -1], vec![-3, 2]];
        assert_eq!(closure_count_from_cartan(&g2), 12);
        assert_eq!(RootSystem::new(ty("G2")).unwrap().roots().len(), 12);
        let e8 = RootSystem::new(ty("E8")).unwrap();
        assert_eq!(closure_count_from_cartan(e8.cartan()), 240);
        assert_eq!(e8.roots().len(), 240);
    }

    #[test]
    fn closure_matches_cartan_oracle_everywhere() {
        for t in SimpleType::all_up_to(8) {
            let rs = RootSystem::new(t).unwrap();
            assert_eq!(rs.roots().len(), closure_count_from_cartan(rs.cartan()), "{t}");
        }
    }

    #[test]
    fn roots_closed_under_reflection() {
        for t in SimpleType::all_up_to(5) {
            let rs = RootSystem::new(t).unwrap();
            let set: HashSet<_> = rs.roots().iter().map(|r| r.vector.clone()).collect();
            for r in rs.roots() {
                for a in rs.simple_roots() {
                    assert!(set.contains(&reflect(&r.vector, a)), "{t}");
                }
            }
        }
    }

    #[test]
    fn length_ratios() {
        for t in SimpleType::all_up_to(8) {
            let rs = RootSystem::new(t).unwrap();
            let mut lens: Vec<Rational> =
                rs.roots().iter().map(|r| dot(&r.vector, &r.vector)).collect();
            lens.sort();
            lens.dedup();
            assert!(lens.len() <= 2, "{t}");
            if lens.len() == 2 {
                let ratio = &lens[1] / &lens[0];
                assert!(ratio == q(2) || ratio == q(3), "{t}");
            }
        }
    }

    #[test]
    fn highest_roots() {
        let a5 = highest_root(&RootSystem::new(ty("A5")).unwrap()).unwrap();
        assert!(a5.coefficients.iter().all(|&c| c == 1));
        let e8 = highest_root(&RootSystem::new(ty("E8")).unwrap()).unwrap();
        assert_eq!(e8.coefficients, vec![2, 3, 4, 6, 5, 4, 3, 2]);
        assert_eq!(e8.coefficients.iter().filter(|&&c| c == 5).count(), 1);
        let mut g2 = highest_root(&RootSystem::new(ty("G2")).unwrap()).unwrap().coefficients;
        g2.sort();
        assert_eq!(g2, vec![2, 3]);
        let f4 = highest_root(&RootSystem::new(ty("F4")).unwrap()).unwrap();
        assert_eq!(f4.coefficients, vec![2, 3, 4, 2]);
    }

    #[test]
    fn weyl_orders_small() {
        // BFS oracle values
        for (name, order) in [("A2", 6), ("B2", 8), ("G2", 12), ("A1", 2), ("F4", 1152)] {
            let rs = RootSystem::new(ty(name)).unwrap();
            assert_eq!(weyl_order_bfs(&rs), Some(order), "{name}");
            assert_eq!(weyl_order(&rs).unwrap(), order, "{name}");
        }
    }

    #[test]
    fn exceptional_exponents() {
        let e8 = RootSystem::new(ty("E8")).unwrap();
        assert_eq!(coxeter_exponents(&e8).unwrap(), vec![1, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(weyl_order(&e8).unwrap(), 696_729_600);
        let e6 = RootSystem::new(ty("E6")).unwrap();
        assert_eq!(weyl_order(&e6).unwrap(), 51_840);
    }

    #[test]
    fn orbit_spans() {
        let a2 = RootSystem::new(ty("A2")).unwrap();
        for alpha in a2.simple_roots() {
            assert!(weyl_orbit_spans(&a2, alpha).unwrap());
        }
        let zero = vec![Rational::zero(); 3];
        assert!(matches!(weyl_orbit_spans(&a2, &zero), Err(Error::ZeroVector)));
        // (1,1,1) is orthogonal to the A2 root span
        assert!(matches!(
            weyl_orbit_spans(&a2, &[q(1), q(1), q(1)]),
            Err(Error::NotInRootSpan)
        ));

        let a1 = RootSystem::new(ty("A1")).unwrap().reflections();
        let product = a1.direct_sum(&a1);
        assert!(!product.orbit_spans(&[1, 0]).unwrap());
        assert!(product.orbit_spans(&[1, 1]).unwrap());
    }

    #[test]
    fn grid_shape() {
        assert_eq!(denominator_grid(4).len(), 13);
        assert_eq!(orbit_grid(2, 4).len(), 13 * 13 - 1);
    }
}

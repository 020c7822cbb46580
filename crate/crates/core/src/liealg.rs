//! Matrix models of the classical cases: su(s+t) ⊃ block subalgebras and
//! so(2s+2t+2) ⊃ so(2s+1) ⊕ so(2t+1).
//!
//! Complex matrices are realified, `A + iB ↦ [[A, −B], [B, A]]`, so every
//! algebra here is a real algebra of skew-symmetric matrices. Bases are kept
//! orthonormal for the Frobenius product; the Killing form is computed from
//! ad-traces in that basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dynkin::{CaseRef, FibrationRecord, KFactor, VertexId};
use crate::error::{Error, Result};
use crate::rootsys::Family;

pub type Mat = DMatrix<f64>;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieTolerances {
    /// Closure, orthogonality and reductivity residuals.
    pub structural: f64,
    pub ad_invariance: f64,
    pub exp_inverse: f64,
    /// Largest residual for a matrix to count as a member of an algebra.
    pub membership: f64,
    pub natural_reductivity: f64,
}

impl Default for LieTolerances {
    fn default() -> Self {
        LieTolerances {
            structural: 1e-10,
            ad_invariance: 1e-9,
            exp_inverse: 1e-12,
            membership: 1e-8,
            natural_reductivity: 1e-9,
        }
    }
}

pub fn bracket(x: &Mat, y: &Mat) -> Mat {
    x * y - y * x
}

fn frob(x: &Mat, y: &Mat) -> f64 {
    x.dot(y)
}

/// exp via nalgebra's scaling-and-squaring Padé approximant.
pub fn matrix_exp(x: &Mat) -> Mat {
    x.clone().exp()
}

/// Modified Gram–Schmidt in the Frobenius product; vectors with a residual
/// norm below `tol` are dropped.
fn orthonormalize(mats: &[Mat], tol: f64) -> Vec<Mat> {
    let mut out: Vec<Mat> = Vec::new();
    for m in mats {
        let mut v = m.clone();
        for _ in 0..2 {
            for q in &out {
                let c = frob(&v, q);
                v -= q * c;
            }
        }
        let norm = v.norm();
        if norm > tol {
            out.push(v / norm);
        }
    }
    out
}

/// A real Lie algebra of n×n matrices with a Frobenius-orthonormal basis.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    pub name: String,
    pub n: usize,
    pub basis: Vec<Mat>,
    /// Which factor of the catalog record this algebra realises.
    pub structure: String,
    ad: Vec<DMatrix<f64>>,
    killing_gram: DMatrix<f64>,
    trace_constant: Option<f64>,
}

impl MatrixAlgebra {
    /// Checks linear independence and closure under the bracket.
    pub fn new(name: &str, structure: &str, basis: Vec<Mat>, tol: &LieTolerances) -> Result<Self> {
        let n = basis.first().map_or(0, |b| b.nrows());
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::InvalidArgument(format!("{name}: basis matrices differ in shape")));
        }
        let ortho = orthonormalize(&basis, 1e-9);
        if ortho.len() != basis.len() {
            return Err(Error::Validation(format!("{name}: basis is linearly dependent")));
        }
        let mut alg = MatrixAlgebra {
            name: name.to_string(),
            n,
            basis: ortho,
            structure: structure.to_string(),
            ad: Vec::new(),
            killing_gram: DMatrix::zeros(0, 0),
            trace_constant: None,
        };
        let d = alg.dim();
        let mut worst: f64 = 0.0;
        let mut ad = Vec::with_capacity(d);
        for i in 0..d {
            let mut a = DMatrix::zeros(d, d);
            for j in 0..d {
                let br = bracket(&alg.basis[i], &alg.basis[j]);
                let (c, r) = alg.coords_unchecked(&br);
                worst = worst.max(r);
                a.set_column(j, &c);
            }
            ad.push(a);
        }
        if worst > tol.structural {
            return Err(Error::Validation(format!(
                "{name}: not closed under the bracket (residual {worst:.3e})"
            )));
        }
        let mut gram = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in i..d {
                let v = (&ad[i] * &ad[j]).trace();
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        alg.ad = ad;
        alg.killing_gram = gram;
        alg.trace_constant = alg.fit_trace_constant();
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    fn coords_unchecked(&self, x: &Mat) -> (DVector<f64>, f64) {
        let c = DVector::from_iterator(self.dim(), self.basis.iter().map(|b| frob(x, b)));
        let r = (x - self.combine(&c)).norm();
        (c, r)
    }

    /// Coordinates in the basis; rejects matrices outside the span.
    pub fn coords(&self, x: &Mat) -> Result<DVector<f64>> {
        self.coords_tol(x, LieTolerances::default().membership)
    }

    pub fn coords_tol(&self, x: &Mat, tol: f64) -> Result<DVector<f64>> {
        let (c, r) = self.coords_unchecked(x);
        if r > tol * x.norm().max(1.0) {
            return Err(Error::NotInAlgebra { residual: r });
        }
        Ok(c)
    }

    pub fn combine(&self, c: &DVector<f64>) -> Mat {
        let mut out = Mat::zeros(self.n, self.n);
        for (b, &ci) in self.basis.iter().zip(c.iter()) {
            out += b * ci;
        }
        out
    }

    /// Orthogonal projection onto the span, in the Frobenius product.
    pub fn project(&self, x: &Mat) -> Mat {
        self.combine(&self.coords_unchecked(x).0)
    }

    pub fn contains(&self, x: &Mat, tol: f64) -> bool {
        self.coords_tol(x, tol).is_ok()
    }

    /// Matrix of ad(X) on the basis.
    pub fn ad(&self, x: &Mat) -> Result<DMatrix<f64>> {
        let c = self.coords(x)?;
        let d = self.dim();
        let mut a = DMatrix::zeros(d, d);
        for (ad_i, &ci) in self.ad.iter().zip(c.iter()) {
            a += ad_i * ci;
        }
        Ok(a)
    }

    pub fn killing_gram(&self) -> &DMatrix<f64> {
        &self.killing_gram
    }

    /// The constant c with κ(X,Y) = c·tr(XY), when one exists.
    pub fn trace_constant(&self) -> Option<f64> {
        self.trace_constant
    }

    fn fit_trace_constant(&self) -> Option<f64> {
        let first = self.basis.first()?;
        let t = (first * first).trace();
        if t.abs() < 1e-12 {
            return None;
        }
        let c = self.killing_gram[(0, 0)] / t;
        let d = self.dim();
        for i in 0..d {
            for j in 0..d {
                let closed = c * (&self.basis[i] * &self.basis[j]).trace();
                if (closed - self.killing_gram[(i, j)]).abs() > 1e-9 * c.abs().max(1.0) {
                    return None;
                }
            }
        }
        Some(c)
    }
}

/// κ(X, Y) = tr(ad X ∘ ad Y) for X, Y in the algebra.
pub fn killing_form(a: &MatrixAlgebra, x: &Mat, y: &Mat) -> Result<f64> {
    let cx = a.coords(x)?;
    let cy = a.coords(y)?;
    Ok((cx.transpose() * &a.killing_gram * cy)[(0, 0)])
}

/// Null space of a real matrix, as orthonormal columns.
fn null_space(a: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = a.ncols();
    let ata = a.transpose() * a;
    let eig = SymmetricEigen::new(ata);
    let cols: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.eigenvalues[i].abs().sqrt() < tol)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn smallest_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() == 0 {
        return f64::INFINITY;
    }
    let eig = SymmetricEigen::new(a.transpose() * a);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0).sqrt()
}

/// Basis of the κ-orthogonal complement of `sub` in `g`.
pub fn orthogonal_complement(g: &MatrixAlgebra, sub: &[Mat]) -> Result<Vec<Mat>> {
    let d = g.dim();
    if sub.is_empty() {
        return Ok(g.basis.clone());
    }
    let mut s = DMatrix::zeros(d, sub.len());
    for (j, x) in sub.iter().enumerate() {
        s.set_column(j, &g.coords(x)?);
    }
    let scale = g.killing_gram.amax().max(1.0);
    let a = s.transpose() * &g.killing_gram / scale;
    let null = null_space(&a, 1e-6);
    if null.ncols() == 0 {
        return Ok(Vec::new());
    }
    let form = -(null.transpose() * &g.killing_gram * &null);
    if form.cholesky().is_none() {
        return Err(Error::DegenerateForm);
    }
    let comp: Vec<Mat> = (0..null.ncols())
        .map(|j| g.combine(&null.column(j).into_owned()))
        .collect();
    let comp = orthonormalize(&comp, 1e-9);
    for x in sub {
        for y in &comp {
            let k = killing_form(g, x, y)?;
            if k.abs() > 1e-10 * scale {
                return Err(Error::Validation(format!(
                    "complement not Killing-orthogonal (residual {k:.3e})"
                )));
            }
        }
    }
    Ok(comp)
}

fn realified_entry(m: &mut Mat, n: usize, j: usize, k: usize, re: f64, im: f64) {
    m[(j, k)] += re;
    m[(n + j, n + k)] += re;
    m[(n + j, k)] += im;
    m[(j, n + k)] -= im;
}

/// Realified basis of su(size) embedded as the diagonal block starting at
/// `offset` in u(total).
pub fn su_block_basis(total: usize, offset: usize, size: usize) -> Vec<Mat> {
    let dim = 2 * total;
    let mut out = Vec::new();
    for a in 0..size {
        for b in a + 1..size {
            let (j, k) = (offset + a, offset + b);
            let mut x = Mat::zeros(dim, dim);
            realified_entry(&mut x, total, j, k, 1.0, 0.0);
            realified_entry(&mut x, total, k, j, -1.0, 0.0);
            out.push(x);
            let mut y = Mat::zeros(dim, dim);
            realified_entry(&mut y, total, j, k, 0.0, 1.0);
            realified_entry(&mut y, total, k, j, 0.0, 1.0);
            out.push(y);
        }
    }
    for a in 0..size.saturating_sub(1) {
        let mut h = Mat::zeros(dim, dim);
        realified_entry(&mut h, total, offset + a, offset + a, 0.0, 1.0);
        realified_entry(&mut h, total, offset + a + 1, offset + a + 1, 0.0, -1.0);
        out.push(h);
    }
    out
}

/// Realified diag(i·t·I_s, −i·s·I_t), the generator of the centre of s(u(s) ⊕ u(t)).
pub fn su_circle(s: usize, t: usize) -> Mat {
    let n = s + t;
    let mut x = Mat::zeros(2 * n, 2 * n);
    for j in 0..n {
        let v = if j < s { t as f64 } else { -(s as f64) };
        realified_entry(&mut x, n, j, j, 0.0, v);
    }
    x
}

/// Realified diagonal unitary diag(e^{iθ_j}).
pub fn realified_phases(theta: &[f64]) -> Mat {
    let n = theta.len();
    let mut x = Mat::zeros(2 * n, 2 * n);
    for (j, &t) in theta.iter().enumerate() {
        realified_entry(&mut x, n, j, j, t.cos(), t.sin());
    }
    x
}

/// Basis of so(size) embedded as the diagonal block starting at `offset`.
pub fn so_block_basis(total: usize, offset: usize, size: usize) -> Vec<Mat> {
    let mut out = Vec::new();
    for a in 0..size {
        for b in a + 1..size {
            let mut x = Mat::zeros(total, total);
            x[(offset + a, offset + b)] = 1.0;
            x[(offset + b, offset + a)] = -1.0;
            out.push(x);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelKind {
    /// G = SU(s+t) realified as 2(s+t)×2(s+t) real matrices.
    SpecialUnitary { s: usize, t: usize },
    /// G = SO(2s+2t+2), K₁ = SO(2s+1), K₂ = SO(2t+1).
    OddGrassmannian { s: usize, t: usize },
}

/// How K₁ sits in G, when known; lets distance computations use closed forms.
#[derive(Clone, Debug, PartialEq)]
pub enum Block {
    /// SO(size) on coordinates offset..offset+size.
    So { offset: usize, size: usize },
    /// Realified SU(size) on complex coordinates offset..offset+size.
    Su { offset: usize, size: usize },
    /// exp(θ·generator), periodic in θ with the given period.
    Circle { generator: Mat, period: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn below(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            pass: value.is_finite() && value < tolerance,
        }
    }

    fn above(name: &str, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.to_string(),
            value,
            tolerance,
            pass: value > tolerance,
        }
    }
}

/// g = k₁ ⊕ k₂ ⊕ m with m₁ = k₂ ⊕ m, the normal metric −κ on m₁, and the
/// centre of G as explicit matrices.
#[derive(Clone, Debug)]
pub struct GroupModel {
    pub name: String,
    pub kind: ModelKind,
    pub g: MatrixAlgebra,
    pub k1: MatrixAlgebra,
    pub k2: MatrixAlgebra,
    pub m1: Vec<Mat>,
    pub m: Vec<Mat>,
    pub center_elements: Vec<Mat>,
    /// Gram matrix of −κ on the m₁ basis.
    pub metric: DMatrix<f64>,
    pub tolerances: LieTolerances,
    pub checks: Vec<Check>,
    /// Block structure of K₁; empty when unknown.
    pub k1_shape: Vec<Block>,
}

impl GroupModel {
    pub fn from_parts(
        name: &str,
        kind: ModelKind,
        g: MatrixAlgebra,
        k1: MatrixAlgebra,
        k2: MatrixAlgebra,
        center_elements: Vec<Mat>,
        tolerances: LieTolerances,
    ) -> Result<GroupModel> {
        if k1.dim() == 0 || k2.dim() == 0 {
            return Err(Error::Validation(format!(
                "{name}: K1 and K2 must both have positive dimension"
            )));
        }
        let m1 = orthogonal_complement(&g, &k1.basis)?;
        let mut k = k1.basis.clone();
        k.extend(k2.basis.iter().cloned());
        let m = orthogonal_complement(&g, &k)?;
        let dm = m1.len();
        let mut metric = DMatrix::zeros(dm, dm);
        for i in 0..dm {
            for j in 0..dm {
                metric[(i, j)] = -killing_form(&g, &m1[i], &m1[j])?;
            }
        }
        let mut model = GroupModel {
            name: name.to_string(),
            kind,
            g,
            k1,
            k2,
            m1,
            m,
            center_elements,
            metric,
            tolerances,
            checks: Vec::new(),
            k1_shape: Vec::new(),
        };
        model.checks = model.validate()?;
        if let Some(bad) = model.checks.iter().find(|c| !c.pass) {
            return Err(Error::Validation(format!(
                "{name}: {} (value {:.3e}, tolerance {:.1e})",
                bad.name, bad.value, bad.tolerance
            )));
        }
        Ok(model)
    }

    /// Matrix size of the group elements.
    pub fn size(&self) -> usize {
        self.g.n
    }

    /// κ = c·tr(XY) on g.
    pub fn killing_constant(&self) -> f64 {
        self.g.trace_constant().expect("simple compact model")
    }

    /// Coordinates of the m₁-component of X (Frobenius-orthonormal basis).
    pub fn m1_coords(&self, x: &Mat) -> DVector<f64> {
        DVector::from_iterator(self.m1.len(), self.m1.iter().map(|b| frob(x, b)))
    }

    pub fn project_m1(&self, x: &Mat) -> Mat {
        let c = self.m1_coords(x);
        let mut out = Mat::zeros(self.size(), self.size());
        for (b, &ci) in self.m1.iter().zip(c.iter()) {
            out += b * ci;
        }
        out
    }

    pub fn m1_from_coords(&self, c: &DVector<f64>) -> Mat {
        let mut out = Mat::zeros(self.size(), self.size());
        for (b, &ci) in self.m1.iter().zip(c.iter()) {
            out += b * ci;
        }
        out
    }

    /// Normal-metric inner product of the m₁-components.
    pub fn inner(&self, x: &Mat, y: &Mat) -> f64 {
        let (a, b) = (self.m1_coords(x), self.m1_coords(y));
        (a.transpose() * &self.metric * b)[(0, 0)]
    }

    pub fn norm(&self, x: &Mat) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }

    /// Smallest eigenvalue of the metric against the Frobenius product on m₁.
    pub fn lambda_min(&self) -> f64 {
        SymmetricEigen::new(self.metric.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Whether `x` lies in G, up to `tol`.
    pub fn group_residual(&self, x: &Mat) -> f64 {
        let n = self.size();
        let orth = (x.transpose() * x - Mat::identity(n, n)).amax();
        match self.kind {
            ModelKind::SpecialUnitary { .. } => {
                let half = n / 2;
                let j = complex_structure(half);
                let commute = (x * &j - &j * x).amax();
                let det = complex_det(x);
                let phase = (det - nalgebra::Complex::new(1.0, 0.0)).norm();
                orth.max(commute).max(phase)
            }
            ModelKind::OddGrassmannian { .. } => orth.max((x.determinant() - 1.0).abs()),
        }
    }

    /// All invariants of the decomposition, with their residuals.
    pub fn validate(&self) -> Result<Vec<Check>> {
        let tol = &self.tolerances;
        let g = &self.g;
        let scale = g.killing_gram.amax().max(1.0);
        let mut checks = Vec::new();

        let mut orth: f64 = 0.0;
        for a in &self.k1.basis {
            for b in &self.k2.basis {
                orth = orth.max(killing_form(g, a, b)?.abs() / scale);
            }
        }
        checks.push(Check::below("k2 is Killing-orthogonal to k1", orth, tol.structural));

        let mut red: f64 = 0.0;
        for a in &self.k1.basis {
            for b in &self.m1 {
                let br = bracket(a, b);
                red = red.max((&br - self.project_m1(&br)).norm());
            }
        }
        checks.push(Check::below("[k1, m1] lies in m1", red, tol.structural));

        checks.push(Check::above(
            "minus the Killing form is positive definite on m1",
            self.lambda_min(),
            0.0,
        ));

        checks.push(self.centralizer_check()?);

        let mut k = self.k1.basis.clone();
        k.extend(self.k2.basis.iter().cloned());
        checks.push(Check::above(
            "no nonzero vector of m is fixed by ad(k)",
            fixed_space_gap(g, &k, &self.m)?,
            1e-8,
        ));

        checks.push(Check::below(
            "G/K1 is naturally reductive for g = k1 + m1",
            natural_reductivity_check(self),
            tol.natural_reductivity,
        ));

        let mut adinv: f64 = 0.0;
        for z in g.basis.iter().step_by(3) {
            for x in g.basis.iter().step_by(2) {
                for y in g.basis.iter().step_by(2) {
                    let v = killing_form(g, &bracket(z, x), y)? + killing_form(g, x, &bracket(z, y))?;
                    adinv = adinv.max(v.abs());
                }
            }
        }
        checks.push(Check::below("Killing form is ad-invariant", adinv, tol.ad_invariance));

        let mut centre: f64 = 0.0;
        for z in &self.center_elements {
            centre = centre.max(self.group_residual(z));
            for b in &g.basis {
                centre = centre.max((z * b - b * z).amax());
            }
        }
        checks.push(Check::below("centre elements are central in G", centre, tol.structural));
        Ok(checks)
    }

    /// The fixed space of ad(k₁) on g equals k₂ ⊕ z(k₁).
    fn centralizer_check(&self) -> Result<Check> {
        let g = &self.g;
        let fixed = stacked_null(g, &self.k1.basis, &g.basis)?;
        let centre_k1 = stacked_null(&self.k1, &self.k1.basis, &self.k1.basis)?;
        let mut expected = self.k2.basis.clone();
        expected.extend(centre_k1);
        let expected = orthonormalize(&expected, 1e-9);
        let mut residual: f64 = if fixed.len() == expected.len() { 0.0 } else { f64::INFINITY };
        for e in &expected {
            let proj: Mat = fixed.iter().fold(Mat::zeros(g.n, g.n), |acc, f| acc + f * frob(e, f));
            residual = residual.max((e - proj).norm());
        }
        Ok(Check::below(
            "centraliser of k1 in g is k2 plus the centre of k1",
            residual,
            1e-8,
        ))
    }
}

/// Common null space of ad(a) over a ∈ `acting`, restricted to span(`on`),
/// as matrices.
fn stacked_null(g: &MatrixAlgebra, acting: &[Mat], on: &[Mat]) -> Result<Vec<Mat>> {
    let stacked = stacked_ad(g, acting, on)?;
    let null = null_space(&stacked, 1e-6);
    let mats: Vec<Mat> = (0..null.ncols())
        .map(|j| {
            on.iter()
                .zip(null.column(j).iter())
                .fold(Mat::zeros(g.n, g.n), |acc, (b, &c)| acc + b * c)
        })
        .collect();
    Ok(orthonormalize(&mats, 1e-9))
}

fn stacked_ad(g: &MatrixAlgebra, acting: &[Mat], on: &[Mat]) -> Result<DMatrix<f64>> {
    let d = g.dim();
    let mut stacked = DMatrix::zeros(d * acting.len(), on.len());
    for (i, a) in acting.iter().enumerate() {
        for (j, b) in on.iter().enumerate() {
            let c = g.coords(&bracket(a, b))?;
            stacked.view_mut((i * d, j), (d, 1)).copy_from(&c);
        }
    }
    Ok(stacked)
}

/// Smallest singular value of X ↦ ([a, X])_a on `m`; zero exactly when
/// some nonzero X ∈ m is fixed by every a.
pub fn fixed_space_gap(g: &MatrixAlgebra, acting: &[Mat], m: &[Mat]) -> Result<f64> {
    Ok(smallest_singular_value(&stacked_ad(g, acting, m)?))
}

/// max over basis triples of |⟨[ξ,η]_{m₁}, ζ⟩ + ⟨η, [ξ,ζ]_{m₁}⟩|.
pub fn natural_reductivity_check(model: &GroupModel) -> f64 {
    let m1 = &model.m1;
    let proj: Vec<Vec<Mat>> = m1
        .iter()
        .map(|x| m1.iter().map(|y| model.project_m1(&bracket(x, y))).collect())
        .collect();
    let mut worst: f64 = 0.0;
    for (i, row) in proj.iter().enumerate() {
        for (j, eta) in m1.iter().enumerate() {
            for (k, zeta) in m1.iter().enumerate() {
                let v = model.inner(&row[j], zeta) + model.inner(eta, &proj[i][k]);
                worst = worst.max(v.abs());
            }
        }
    }
    worst
}

/// The real matrix of multiplication by i on realified ℂⁿ.
pub fn complex_structure(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for a in 0..n {
        j[(n + a, a)] = 1.0;
        j[(a, n + a)] = -1.0;
    }
    j
}

/// Complex determinant of a realified matrix.
pub fn complex_det(x: &Mat) -> nalgebra::Complex<f64> {
    let n = x.nrows() / 2;
    let c = DMatrix::from_fn(n, n, |a, b| nalgebra::Complex::new(x[(a, b)], x[(n + a, b)]));
    c.determinant()
}

fn su_factor_blocks(rec: &FibrationRecord, psi0: usize) -> (Vec<(usize, usize)>, bool) {
    // (offset, size) blocks of K₁ and whether K₁ contains the circle
    let mut blocks = Vec::new();
    let mut circle = false;
    let t_size = |f: &KFactor| -> Option<(usize, usize)> {
        match f {
            KFactor::Simple(c) => {
                let first = c.vertices.iter().find_map(|v| match v {
                    VertexId::Simple(i) => Some(*i),
                    VertexId::LowestRoot => None,
                })?;
                Some(if first < psi0 { (0, psi0) } else { (psi0, c.rank() + 1) })
            }
            KFactor::Circle { .. } => None,
        }
    };
    for f in &rec.k1_components {
        match t_size(f) {
            Some(b) => blocks.push(b),
            None => circle = true,
        }
    }
    (blocks, circle)
}

/// The concrete model of a classical record: SU(s+t) cases and the odd
/// real Grassmannians.
pub fn build_model(rec: &FibrationRecord) -> Result<GroupModel> {
    build_model_with(rec, LieTolerances::default())
}

pub fn build_model_with(rec: &FibrationRecord, tol: LieTolerances) -> Result<GroupModel> {
    match &rec.case {
        CaseRef::BorelDeSiebenthal(c) if c.ambient.family() == Family::A => {
            let n = c.ambient.rank() + 1;
            let (s, t) = (c.psi0, n - c.psi0);
            let g = MatrixAlgebra::new(&format!("su({n})"), "G", su_block_basis(n, 0, n), &tol)?;
            let (blocks, circle) = su_factor_blocks(rec, c.psi0);
            let mut k1 = Vec::new();
            for &(off, size) in &blocks {
                k1.extend(su_block_basis(n, off, size));
            }
            if circle {
                k1.push(su_circle(s, t));
            }
            let mut k2 = Vec::new();
            for (off, size) in [(0, s), (s, t)] {
                if !blocks.contains(&(off, size)) {
                    k2.extend(su_block_basis(n, off, size));
                }
            }
            if !circle {
                k2.push(su_circle(s, t));
            }
            let k1 = MatrixAlgebra::new("k1", &factor_names(&rec.k1_components), k1, &tol)?;
            let k2 = MatrixAlgebra::new("k2", &factor_names(&rec.k2_components), k2, &tol)?;
            let centre = (0..n)
                .map(|k| realified_phases(&vec![2.0 * std::f64::consts::PI * k as f64 / n as f64; n]))
                .collect();
            let mut shape: Vec<Block> = blocks
                .iter()
                .map(|&(offset, size)| Block::Su { offset, size })
                .collect();
            if circle {
                shape.push(Block::Circle {
                    generator: su_circle(s, t),
                    period: 2.0 * std::f64::consts::PI / gcd(s, t) as f64,
                });
            }
            let mut model = GroupModel::from_parts(
                &rec.human_label,
                ModelKind::SpecialUnitary { s, t },
                g,
                k1,
                k2,
                centre,
                tol,
            )?;
            model.k1_shape = shape;
            Ok(model)
        }
        CaseRef::OddGrassmannian { s, t, .. } => {
            let (a, b) = (2 * s + 1, 2 * t + 1);
            let n = a + b;
            let g = MatrixAlgebra::new(&format!("so({n})"), "G", so_block_basis(n, 0, n), &tol)?;
            let k1 = MatrixAlgebra::new("k1", &format!("so({a})"), so_block_basis(n, 0, a), &tol)?;
            let k2 = MatrixAlgebra::new("k2", &format!("so({b})"), so_block_basis(n, a, b), &tol)?;
            let centre = vec![Mat::identity(n, n), -Mat::identity(n, n)];
            let mut model = GroupModel::from_parts(
                &rec.human_label,
                ModelKind::OddGrassmannian { s: *s, t: *t },
                g,
                k1,
                k2,
                centre,
                tol,
            )?;
            model.k1_shape = vec![Block::So { offset: 0, size: a }];
            Ok(model)
        }
        _ => Err(Error::NoConcreteModel(rec.human_label.clone())),
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn factor_names(f: &[KFactor]) -> String {
    f.iter().map(KFactor::tagged_name).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynkin::find_record;

    fn tol() -> LieTolerances {
        LieTolerances::default()
    }

    fn su(n: usize) -> MatrixAlgebra {
        MatrixAlgebra::new("su", "G", su_block_basis(n, 0, n), &tol()).unwrap()
    }

    fn so(n: usize) -> MatrixAlgebra {
        MatrixAlgebra::new("so", "G", so_block_basis(n, 0, n), &tol()).unwrap()
    }

    // independent oracle: tr(ad X ad Y) with ad built from raw brackets and a
    // least-squares solve against the unnormalised basis
    fn ad_trace_oracle(basis: &[Mat], x: &Mat, y: &Mat) -> f64 {
        let d = basis.len();
        let n2 = basis[0].len();
        let b = DMatrix::from_fn(n2, d, |r, c| basis[c][r]);
        let solve = |m: &Mat| -> DVector<f64> {
            let v = DVector::from_column_slice(m.as_slice());
            b.clone().svd(true, true).solve(&v, 1e-12).unwrap()
        };
        let ad = |z: &Mat| DMatrix::from_columns(&basis.iter().map(|e| solve(&bracket(z, e))).collect::<Vec<_>>());
        (ad(x) * ad(y)).trace()
    }

    #[test]
    fn su2_killing_value() {
        let a = su(2);
        // diag(i, −i)
        let mut x = Mat::zeros(4, 4);
        realified_entry(&mut x, 2, 0, 0, 0.0, 1.0);
        realified_entry(&mut x, 2, 1, 1, 0.0, -1.0);
        assert!((killing_form(&a, &x, &x).unwrap() + 8.0).abs() < 1e-12);
        let raw = su_block_basis(2, 0, 2);
        assert!((ad_trace_oracle(&raw, &x, &x) + 8.0).abs() < 1e-10);
        assert_eq!(killing_form(&a, &x, &Mat::zeros(4, 4)).unwrap(), 0.0);
    }

    #[test]
    fn trace_constants() {
        for n in 2..=4 {
            assert!((su(n).trace_constant().unwrap() - n as f64).abs() < 1e-9);
        }
        for n in 3..=6 {
            assert!((so(n).trace_constant().unwrap() - (n as f64 - 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn so4_ideals_orthogonal() {
        let a = so(4);
        // self-dual and anti-self-dual parts
        let e = |i: usize, j: usize| {
            let mut m = Mat::zeros(4, 4);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            m
        };
        let x = e(0, 1) + e(2, 3);
        let y = e(0, 2) - e(1, 3);
        assert!(killing_form(&a, &x, &y).unwrap().abs() < 1e-12);
        assert!(ad_trace_oracle(&so_block_basis(4, 0, 4), &x, &y).abs() < 1e-10);
    }

    #[test]
    fn rejects_outside_algebra() {
        let a = su(2);
        let x = Mat::identity(4, 4);
        assert!(matches!(killing_form(&a, &x, &x), Err(Error::NotInAlgebra { .. })));
    }

    #[test]
    fn rejects_dependent_or_open_basis() {
        let mut b = so_block_basis(3, 0, 3);
        b.push(b[0].clone() * 2.0);
        assert!(MatrixAlgebra::new("x", "x", b, &tol()).is_err());
        let b = so_block_basis(3, 0, 3)[..2].to_vec();
        assert!(MatrixAlgebra::new("x", "x", b, &tol()).is_err());
    }

    #[test]
    fn hopf_model() {
        let m = build_model(&find_record("su3-hopf", 3).unwrap()).unwrap();
        assert_eq!((m.g.dim(), m.k1.dim(), m.k2.dim(), m.m1.len(), m.m.len()), (8, 3, 1, 5, 4));
        assert!(m.checks.iter().all(|c| c.pass));
        assert_eq!(m.center_elements.len(), 3);
    }

    #[test]
    fn stiefel_model() {
        let m = build_model(&find_record("so6-stiefel", 3).unwrap()).unwrap();
        assert_eq!((m.g.dim(), m.m.len(), m.m1.len()), (15, 9, 12));
        assert!(natural_reductivity_check(&m) < 1e-9);
    }

    #[test]
    fn complements() {
        let g = su(3);
        assert!(orthogonal_complement(&g, &g.basis).unwrap().is_empty());
        let k1 = su_block_basis(3, 1, 2);
        assert_eq!(orthogonal_complement(&g, &k1).unwrap().len(), 5);
    }

    #[test]
    fn every_su_record_builds() {
        let recs = crate::dynkin::catalog(&crate::dynkin::CatalogFilter {
            families: vec!["A".parse().unwrap()],
            rank_cap: 3,
            ..Default::default()
        })
        .unwrap();
        assert!(!recs.is_empty());
        for r in &recs {
            let m = build_model(r).unwrap();
            assert_eq!(m.k1.dim(), r.dims.k1, "{}", r.case_id);
            assert_eq!(m.k2.dim(), r.dims.k2, "{}", r.case_id);
            assert_eq!(m.m.len(), r.dims.m, "{}", r.case_id);
        }
    }

    #[test]
    fn exceptional_has_no_model() {
        let r = find_record("e8-a4a4", 8).unwrap();
        assert!(matches!(build_model(&r), Err(Error::NoConcreteModel(_))));
    }

    #[test]
    fn empty_k2_rejected() {
        let t = tol();
        let g = MatrixAlgebra::new("so3", "G", so_block_basis(3, 0, 3), &t).unwrap();
        let k1 = MatrixAlgebra::new("k1", "", so_block_basis(3, 0, 2), &t).unwrap();
        let k2 = MatrixAlgebra::new("k2", "", Vec::new(), &t).unwrap();
        let kind = ModelKind::OddGrassmannian { s: 0, t: 0 };
        assert!(GroupModel::from_parts("x", kind, g, k1, k2, vec![], t).is_err());
    }

    #[test]
    fn exp_properties() {
        let z = Mat::zeros(3, 3);
        assert_eq!(matrix_exp(&z), Mat::identity(3, 3));
        let th = 0.7;
        let j = Mat::from_row_slice(2, 2, &[0.0, -th, th, 0.0]);
        let r = matrix_exp(&j);
        let want = Mat::from_row_slice(2, 2, &[th.cos(), -th.sin(), th.sin(), th.cos()]);
        assert!((r - want).amax() < 1e-12);
        let x = so_block_basis(5, 0, 5).iter().enumerate().fold(Mat::zeros(5, 5), |a, (i, b)| a + b * (0.3 * i as f64 - 1.0));
        let e = matrix_exp(&x);
        assert!((&e * matrix_exp(&-&x) - Mat::identity(5, 5)).amax() < 1e-12);
        assert!((e.transpose() * &e - Mat::identity(5, 5)).amax() < 1e-12);
        assert!((e.determinant() - 1.0).abs() < 1e-12);
    }
}

//! Geometry of M̃ = G/K₁ with the normal metric −κ: Killing-field lengths,
//! geodesics, two-sided distance bounds, displacement profiles, and the
//! invariant-plane certificate for det −1 orthogonal matrices.
//!
//! Distances are bracketed rather than computed. The upper bound is the
//! length ‖ξ‖ of a geodesic x·exp(tξ)K₁ found by solving
//! exp(ξ)·exp(η) = x⁻¹y for ξ ∈ m₁, η ∈ k₁. The lower bound uses that the
//! normal metric is the submersion of the bi-invariant metric c·⟨·,·⟩_F on G,
//! so dist(xK₁, yK₁) ≥ √c · min_{k∈K₁} ‖x·k − y‖_F.

use nalgebra::{Complex, DMatrix, DVector, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::liealg::{matrix_exp, Block, GroupModel, Mat, ModelKind};

/// Geodesics shorter than this (in the normal metric) are recovered by
/// [`riemannian_log`] from the default starts.
pub const INJECTIVITY_SCALE: f64 = 0.5;

const ZERO_CHORD: f64 = 1e-12;
const RESTART_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryTolerances {
    /// Residual below which a log solve counts as converged.
    pub log_residual: f64,
    /// Relative spread of upper bounds below which displacement is constant.
    pub constancy: f64,
    /// Margin required between an upper and a lower bound to certify a gap.
    pub gap: f64,
    /// Residual of the invariant-plane certificate.
    pub certificate: f64,
    /// Residual below which a fixed fiber is accepted.
    pub fixed_fiber: f64,
}

impl Default for GeometryTolerances {
    fn default() -> Self {
        GeometryTolerances {
            log_residual: 1e-8,
            constancy: 1e-4,
            gap: 1e-6,
            certificate: 1e-9,
            fixed_fiber: 1e-8,
        }
    }
}

/// A point gK₁ of M̃ given by a representative g ∈ G.
#[derive(Clone, Debug, PartialEq)]
pub struct CosetPoint {
    pub rep: Mat,
}

impl CosetPoint {
    pub fn new(model: &GroupModel, rep: Mat) -> Result<Self> {
        let r = model.group_residual(&rep);
        if !(r < 1e-10) {
            return Err(Error::InvalidArgument(format!("representative not in G (residual {r:.3e})")));
        }
        Ok(CosetPoint { rep })
    }

    pub fn base(model: &GroupModel) -> Self {
        CosetPoint {
            rep: Mat::identity(model.size(), model.size()),
        }
    }
}

/// (g, r(k₂)) acting by xK₁ ↦ g·x·k₂⁻¹K₁.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry {
    pub label: String,
    pub left: Mat,
    pub right: Mat,
}

impl Isometry {
    pub fn new(model: &GroupModel, label: &str, left: Mat, right: Mat) -> Result<Self> {
        let r = model.group_residual(&left).max(model.group_residual(&right));
        if !(r < 1e-10) {
            return Err(Error::InvalidArgument(format!("{label}: factor not in G (residual {r:.3e})")));
        }
        // r(k₂) is well defined on G/K₁ only when k₂ centralises K₁
        let comm = model
            .k1
            .basis
            .iter()
            .map(|b| (&right * b - b * &right).amax())
            .fold(0.0, f64::max);
        if comm > 1e-10 {
            return Err(Error::InvalidArgument(format!("{label}: right factor does not centralise K1")));
        }
        Ok(Isometry {
            label: label.to_string(),
            left,
            right,
        })
    }

    pub fn apply(&self, x: &CosetPoint) -> CosetPoint {
        CosetPoint {
            rep: &self.left * &x.rep * self.right.transpose(),
        }
    }
}

/// A Killing field on M̃: ξ ∈ g acting from the left, or η ∈ k₂ acting
/// through r(K₂).
#[derive(Clone, Debug, PartialEq)]
pub enum KillingField {
    Left(Mat),
    Right(Mat),
}

impl KillingField {
    pub fn left(model: &GroupModel, xi: Mat) -> Result<Self> {
        model.g.coords(&xi)?;
        Ok(KillingField::Left(xi))
    }

    pub fn right(model: &GroupModel, eta: Mat) -> Result<Self> {
        model.k2.coords(&eta)?;
        Ok(KillingField::Right(eta))
    }
}

/// Length of the field at x in the normal metric.
pub fn killing_length(model: &GroupModel, f: &KillingField, x: &CosetPoint) -> f64 {
    let g = &x.rep;
    let v = match f {
        // d/dt exp(tξ)g = g·(g⁻¹ξg)
        KillingField::Left(xi) => g.transpose() * xi * g,
        // d/dt g·exp(−tη) = g·(−η)
        KillingField::Right(eta) => g.transpose() * (g * -eta),
    };
    model.norm(&v)
}

/// t ↦ x·exp(tξ)K₁ for ξ ∈ m₁ in the frame at x.
pub fn geodesic(model: &GroupModel, x: &CosetPoint, xi: &Mat, t: f64) -> Result<CosetPoint> {
    let proj = model.project_m1(xi);
    let r = (xi - &proj).norm();
    if r > 1e-8 * xi.norm().max(1.0) {
        return Err(Error::NotInAlgebra { residual: r });
    }
    Ok(CosetPoint {
        rep: &x.rep * matrix_exp(&(xi * t)),
    })
}

/// Logarithm of an orthogonal matrix with det +1, from its real Schur form.
/// Pairs of −1 eigenvalues become rotations by π.
pub fn orthogonal_log(r: &Mat) -> Result<Mat> {
    let n = r.nrows();
    let (q, t) = real_schur(r)?;
    let blocks = schur_blocks(&t);
    let mut l = Mat::zeros(n, n);
    let mut minus: Vec<usize> = Vec::new();
    for b in &blocks {
        match *b {
            SchurBlock::Pair(i) => {
                let th = (t[(i + 1, i)] - t[(i, i + 1)]).atan2(t[(i, i)] + t[(i + 1, i + 1)]);
                l[(i, i + 1)] = -th;
                l[(i + 1, i)] = th;
            }
            SchurBlock::Single(i) if t[(i, i)] < 0.0 => minus.push(i),
            SchurBlock::Single(_) => {}
        }
    }
    if minus.len() % 2 == 1 {
        return Err(Error::WrongDeterminant(-1.0));
    }
    for p in minus.chunks(2) {
        l[(p[0], p[1])] = -std::f64::consts::PI;
        l[(p[1], p[0])] = std::f64::consts::PI;
    }
    let full = &q * l * q.transpose();
    Ok((&full - full.transpose()) * 0.5)
}

fn real_schur(a: &Mat) -> Result<(Mat, Mat)> {
    [f64::EPSILON, 1e-14, 1e-12]
        .iter()
        .find_map(|&eps| Schur::try_new(a.clone(), eps, 10_000))
        .map(Schur::unpack)
        .ok_or_else(|| Error::Validation("real Schur decomposition did not converge".into()))
}

#[derive(Clone, Copy, Debug)]
enum SchurBlock {
    Single(usize),
    Pair(usize),
}

fn schur_blocks(t: &Mat) -> Vec<SchurBlock> {
    let n = t.nrows();
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)].abs() > 1e-10 {
            out.push(SchurBlock::Pair(i));
            i += 2;
        } else {
            out.push(SchurBlock::Single(i));
            i += 1;
        }
    }
    out
}

/// Result of maximising ⟨k, A⟩_F over K₁.
#[derive(Clone, Debug)]
struct Chord {
    k: Mat,
    value: f64,
    certified: bool,
}

fn block_identity_rest(n: usize, idx: &[usize]) -> Mat {
    let mut m = Mat::identity(n, n);
    for &i in idx {
        m[(i, i)] = 0.0;
    }
    m
}

/// min over K₁ of ‖k − A‖_F, with the minimiser.
fn chord_to_k1(model: &GroupModel, a: &Mat) -> Chord {
    let n = model.size();
    match model.k1_shape.as_slice() {
        [Block::So { offset, size }] => {
            let idx: Vec<usize> = (*offset..offset + size).collect();
            let b = DMatrix::from_fn(*size, *size, |i, j| a[(idx[i], idx[j])]);
            let svd = b.svd(true, true);
            let (u, vt) = (svd.u.expect("u"), svd.v_t.expect("v_t"));
            let mut d = DMatrix::identity(*size, *size);
            if (&u * &vt).determinant() < 0.0 {
                // singular values are sorted, so flip the smallest
                d[(size - 1, size - 1)] = -1.0;
            }
            let kb = &u * d * &vt;
            let mut k = block_identity_rest(n, &idx);
            for i in 0..*size {
                for j in 0..*size {
                    k[(idx[i], idx[j])] = kb[(i, j)];
                }
            }
            let value = (&k - a).norm();
            Chord { k, value, certified: true }
        }
        [Block::Su { offset, size: 2 }] => {
            let half = n / 2;
            let (p, q) = (*offset, offset + 1);
            let idx = [p, q, half + p, half + q];
            let rest = block_identity_rest(n, &idx);
            // [[a, −b̄], [b, ā]] realified, for a unit quaternion (a₁, a₂, b₁, b₂)
            let embed = |w: [f64; 4]| -> Mat {
                let mut m = Mat::zeros(n, n);
                let mut put = |j: usize, k: usize, re: f64, im: f64| {
                    m[(j, k)] += re;
                    m[(half + j, half + k)] += re;
                    m[(half + j, k)] += im;
                    m[(j, half + k)] -= im;
                };
                put(p, p, w[0], w[1]);
                put(q, q, w[0], -w[1]);
                put(q, p, w[2], w[3]);
                put(p, q, -w[2], w[3]);
                m
            };
            let mut w = [0.0; 4];
            for (i, wi) in w.iter_mut().enumerate() {
                let mut e = [0.0; 4];
                e[i] = 1.0;
                *wi = embed(e).dot(a);
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let unit = if norm > 0.0 { w.map(|x| x / norm) } else { [1.0, 0.0, 0.0, 0.0] };
            let k = rest + embed(unit);
            let value = (&k - a).norm();
            Chord { k, value, certified: true }
        }
        [Block::Circle { generator, period }] => {
            let f = |th: f64| (matrix_exp(&(generator * th)) - a).norm();
            let steps = 720;
            let h = period / steps as f64;
            let (best, _) = (0..steps)
                .map(|i| (i, f(i as f64 * h)))
                .fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
            let th = golden_section(&f, (best as f64 - 1.0) * h, (best as f64 + 1.0) * h);
            let k = matrix_exp(&(generator * th));
            let value = (&k - a).norm();
            Chord { k, value, certified: true }
        }
        _ => chord_multistart(model, a),
    }
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    (lo + hi) / 2.0
}

/// Gradient ascent of ⟨k, A⟩ on K₁ from several starts; certified only when
/// every start reaches the same value.
fn chord_multistart(model: &GroupModel, a: &Mat) -> Chord {
    let mut rng = ChaCha8Rng::seed_from_u64(RESTART_STREAM);
    let n = model.size();
    let mut results = Vec::new();
    for start in 0..6 {
        let mut k = if start == 0 {
            Mat::identity(n, n)
        } else {
            matrix_exp(&random_in(&model.k1.basis, &mut rng, 2.0))
        };
        let mut step = 0.5;
        let mut value = k.dot(a);
        for _ in 0..2000 {
            let grad = model.k1.project(&(k.transpose() * a));
            if grad.norm() < 1e-12 {
                break;
            }
            let trial = &k * matrix_exp(&(&grad * step));
            let tv = trial.dot(a);
            if tv > value {
                k = trial;
                value = tv;
                step *= 1.5;
            } else {
                step *= 0.3;
                if step < 1e-14 {
                    break;
                }
            }
        }
        results.push((k, value));
    }
    let best = results
        .iter()
        .max_by(|x, y| x.1.total_cmp(&y.1))
        .cloned()
        .expect("at least one start");
    let certified = results.iter().all(|r| (r.1 - best.1).abs() < 1e-8);
    let value = (&best.0 - a).norm();
    Chord {
        k: best.0,
        value,
        certified,
    }
}

fn random_in(basis: &[Mat], rng: &mut ChaCha8Rng, scale: f64) -> Mat {
    let n = basis[0].nrows();
    basis.iter().fold(Mat::zeros(n, n), |acc, b| {
        let c: f64 = rng.sample(StandardNormal);
        acc + b * (c * scale)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub value: f64,
    /// False when the chord came from local optimisation that did not agree
    /// across starts; such bounds are never used to certify a gap.
    pub certified: bool,
}

/// √λ_min · min_{k∈K₁} ‖x·k − y‖_F.
pub fn distance_lower_bound(model: &GroupModel, x: &CosetPoint, y: &CosetPoint) -> LowerBound {
    let a = x.rep.transpose() * &y.rep;
    let c = chord_to_k1(model, &a);
    LowerBound {
        value: model.lambda_min().sqrt() * c.value,
        certified: c.certified,
    }
}

#[derive(Clone, Debug)]
pub struct LogResult {
    /// Tangent vector in m₁ at x with x·exp(ξ)K₁ = yK₁.
    pub xi: Mat,
    pub upper_bound: f64,
    pub residual: f64,
    pub converged_restarts: usize,
}

/// Levenberg–Marquardt with forward-difference Jacobians.
fn levenberg_marquardt(p0: DVector<f64>, f: &dyn Fn(&DVector<f64>) -> DVector<f64>, max_iter: usize) -> (DVector<f64>, f64) {
    let mut p = p0;
    let mut r = f(&p);
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let d = p.len();
    for _ in 0..max_iter {
        if cost.sqrt() < 1e-14 {
            break;
        }
        let mut j = DMatrix::zeros(r.len(), d);
        for i in 0..d {
            let h = 1e-7 * p[i].abs().max(1.0);
            let mut q = p.clone();
            q[i] += h;
            j.set_column(i, &((f(&q) - &r) / h));
        }
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        for _ in 0..12 {
            let mut a = jtj.clone();
            for i in 0..d {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let q = &p + &step;
            let rq = f(&q);
            let cq = rq.norm_squared();
            if cq < cost {
                let small = step.norm() < 1e-15 * (1.0 + p.norm());
                p = q;
                r = rq;
                cost = cq;
                lambda = (lambda / 3.0).max(1e-12);
                improved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (p, cost.sqrt())
}

fn flatten(m: &Mat) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Shortest geodesic found from `restarts` starts: the first at the
/// chord-optimal k ∈ K₁, the rest at seeded random perturbations of it. The
/// start sequence depends only on `seed`, so the bound is nonincreasing in
/// `restarts`.
pub fn riemannian_log(
    model: &GroupModel,
    x: &CosetPoint,
    y: &CosetPoint,
    restarts: usize,
    seed: u64,
) -> Result<LogResult> {
    riemannian_log_tol(model, x, y, restarts, seed, &GeometryTolerances::default())
}

pub fn riemannian_log_tol(
    model: &GroupModel,
    x: &CosetPoint,
    y: &CosetPoint,
    restarts: usize,
    seed: u64,
    tol: &GeometryTolerances,
) -> Result<LogResult> {
    let n = model.size();
    let a = x.rep.transpose() * &y.rep;
    let chord = chord_to_k1(model, &a);
    if chord.value < ZERO_CHORD {
        return Ok(LogResult {
            xi: Mat::zeros(n, n),
            upper_bound: 0.0,
            residual: chord.value,
            converged_restarts: 1,
        });
    }
    let dm = model.m1.len();
    let dk = model.k1.dim();
    let k1 = &model.k1;
    let residual = |p: &DVector<f64>| -> DVector<f64> {
        let xi = model.m1_from_coords(&p.rows(0, dm).into_owned());
        let eta = k1.combine(&p.rows(dm, dk).into_owned());
        flatten(&(matrix_exp(&xi) * matrix_exp(&eta) - &a))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ RESTART_STREAM);
    let mut best: Option<(f64, Mat, f64)> = None;
    let mut best_residual = f64::INFINITY;
    let mut converged = 0;
    for start in 0..restarts.max(1) {
        let k = if start == 0 {
            chord.k.clone()
        } else {
            &chord.k * matrix_exp(&random_in(&k1.basis, &mut rng, 0.5 * start as f64))
        };
        let zero = Mat::zeros(n, n);
        let eta0 = k1.project(&orthogonal_log(&k).unwrap_or_else(|_| zero.clone()));
        let xi0 = model.project_m1(&orthogonal_log(&(&a * matrix_exp(&-&eta0))).unwrap_or(zero));
        let mut p0 = DVector::zeros(dm + dk);
        p0.rows_mut(0, dm).copy_from(&model.m1_coords(&xi0));
        p0.rows_mut(dm, dk).copy_from(&k1.coords_tol(&eta0, 1e-6).unwrap_or_else(|_| DVector::zeros(dk)));
        let (p, res) = levenberg_marquardt(p0, &residual, 200);
        best_residual = best_residual.min(res);
        if res < tol.log_residual {
            converged += 1;
            let xi = model.m1_from_coords(&p.rows(0, dm).into_owned());
            let len = model.norm(&xi);
            if best.as_ref().is_none_or(|b| len < b.0) {
                best = Some((len, xi, res));
            }
        }
    }
    match best {
        Some((len, xi, res)) => Ok(LogResult {
            xi,
            upper_bound: len,
            residual: res,
            converged_restarts: converged,
        }),
        None => Err(Error::NoLogFound {
            restarts,
            best_residual,
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ConstantWithinTol,
    CertifiedNonconstant,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointBounds {
    pub index: usize,
    /// +∞ when no log was found.
    pub upper: f64,
    pub lower: f64,
    pub lower_certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisplacementReport {
    pub isometry: String,
    pub seed: u64,
    pub samples: usize,
    pub restarts: usize,
    pub min_upper: f64,
    pub max_upper: f64,
    pub max_lower: f64,
    pub relative_spread: f64,
    /// Largest certified lower bound minus smallest upper bound.
    pub certified_gap: f64,
    pub bounds_consistent: bool,
    pub verdict: Verdict,
    pub points: Vec<PointBounds>,
}

/// Uniform random element of G: QR of a Gaussian matrix with the phases of
/// R divided out, then the determinant fixed.
pub fn haar_element(model: &GroupModel, rng: &mut ChaCha8Rng) -> Mat {
    match model.kind {
        ModelKind::SpecialUnitary { s, t } => {
            let n = s + t;
            let z = DMatrix::from_fn(n, n, |_, _| {
                Complex::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
            });
            let qr = z.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..n {
                let d = r[(j, j)];
                let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
                let mut col = q.column_mut(j);
                col *= phase;
            }
            let det = q.determinant();
            let fix = (det / det.norm()).conj();
            let mut col = q.column_mut(0);
            col *= fix;
            let mut out = Mat::zeros(2 * n, 2 * n);
            for a in 0..n {
                for b in 0..n {
                    let c = q[(a, b)];
                    out[(a, b)] = c.re;
                    out[(n + a, n + b)] = c.re;
                    out[(n + a, b)] = c.im;
                    out[(a, n + b)] = -c.im;
                }
            }
            out
        }
        ModelKind::OddGrassmannian { .. } => {
            let n = model.size();
            let z = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let qr = z.qr();
            let (mut q, r) = (qr.q(), qr.r());
            for j in 0..n {
                if r[(j, j)] < 0.0 {
                    let mut col = q.column_mut(j);
                    col *= -1.0;
                }
            }
            if q.determinant() < 0.0 {
                let mut col = q.column_mut(0);
                col *= -1.0;
            }
            q
        }
    }
}

/// The base point followed by `n - 1` Haar-random points.
pub fn sample_points(model: &GroupModel, n: usize, seed: u64) -> Vec<CosetPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![CosetPoint::base(model)];
    while out.len() < n {
        out.push(CosetPoint {
            rep: haar_element(model, &mut rng),
        });
    }
    out.truncate(n);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tol: GeometryTolerances,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            samples: 200,
            restarts: 3,
            seed: 42,
            tol: GeometryTolerances::default(),
        }
    }
}

/// Bounds on δ_γ(x) = dist(x, γx) over the sample, and a verdict.
pub fn displacement_profile(model: &GroupModel, gamma: &Isometry, cfg: &ProfileConfig, exec: Exec) -> DisplacementReport {
    let points = sample_points(model, cfg.samples, cfg.seed);
    let indexed: Vec<(usize, &CosetPoint)> = points.iter().enumerate().collect();
    let bounds = exec.map(&indexed, |&(index, x)| {
        let y = gamma.apply(x);
        let upper = riemannian_log_tol(model, x, &y, cfg.restarts, cfg.seed, &cfg.tol)
            .map(|r| r.upper_bound)
            .unwrap_or(f64::INFINITY);
        let lower = distance_lower_bound(model, x, &y);
        PointBounds {
            index,
            upper,
            lower: lower.value,
            lower_certified: lower.certified,
        }
    });
    summarize(gamma.label.clone(), cfg, bounds)
}

fn summarize(isometry: String, cfg: &ProfileConfig, points: Vec<PointBounds>) -> DisplacementReport {
    let tol = &cfg.tol;
    let min_upper = points.iter().map(|p| p.upper).fold(f64::INFINITY, f64::min);
    let max_upper = points.iter().map(|p| p.upper).fold(f64::NEG_INFINITY, f64::max);
    let max_lower = points
        .iter()
        .filter(|p| p.lower_certified)
        .map(|p| p.lower)
        .fold(0.0, f64::max);
    let mean = points.iter().map(|p| p.upper).sum::<f64>() / points.len().max(1) as f64;
    let relative_spread = if max_upper.is_finite() {
        if mean > tol.gap {
            (max_upper - min_upper) / mean
        } else {
            max_upper - min_upper
        }
    } else {
        f64::INFINITY
    };
    let certified_gap = max_lower - min_upper;
    let bounds_consistent = points.iter().all(|p| p.lower <= p.upper + tol.gap);
    let verdict = if certified_gap > tol.gap {
        Verdict::CertifiedNonconstant
    } else if relative_spread < tol.constancy && bounds_consistent {
        Verdict::ConstantWithinTol
    } else {
        Verdict::Inconclusive
    };
    DisplacementReport {
        isometry,
        seed: cfg.seed,
        samples: points.len(),
        restarts: cfg.restarts,
        min_upper,
        max_upper,
        max_lower,
        relative_spread,
        certified_gap,
        bounds_consistent,
        verdict,
        points,
    }
}

#[derive(Clone, Debug)]
pub struct FixedFiber {
    /// x with g·xK = xK, when found.
    pub witness: Option<Mat>,
    pub residual: f64,
    pub restarts: usize,
}

/// Searches for a fiber xF = π⁻¹(xK) preserved by γ, i.e. x with
/// x⁻¹·g·x ∈ K = K₁K₂. The right factor of γ acts trivially on G/K.
pub fn fixed_fiber(model: &GroupModel, gamma: &Isometry, restarts: usize, seed: u64) -> FixedFiber {
    let tol = GeometryTolerances::default().fixed_fiber;
    let mut k_basis = model.k1.basis.clone();
    k_basis.extend(model.k2.basis.iter().cloned());
    let dg = model.g.dim();
    let dk = k_basis.len();
    let n = model.size();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ RESTART_STREAM);
    let mut best = (f64::INFINITY, None);
    for start in 0..restarts.max(1) {
        let x0 = if start == 0 {
            Mat::identity(n, n)
        } else {
            haar_element(model, &mut rng)
        };
        let b = x0.transpose() * &gamma.left * &x0;
        let residual = |p: &DVector<f64>| -> DVector<f64> {
            let z = model.g.combine(&p.rows(0, dg).into_owned());
            let e = matrix_exp(&z);
            let k = k_basis
                .iter()
                .zip(p.rows(dg, dk).iter())
                .fold(Mat::zeros(n, n), |acc, (m, &c)| acc + m * c);
            flatten(&(e.transpose() * &b * &e - matrix_exp(&k)))
        };
        let mut p0 = DVector::zeros(dg + dk);
        // seed the K part with the log of the K-block of x₀⁻¹gx₀
        if let Ok(l) = orthogonal_log(&b) {
            for (i, m) in k_basis.iter().enumerate() {
                p0[dg + i] = m.dot(&l);
            }
        }
        let (p, res) = levenberg_marquardt(p0, &residual, 150);
        if res < best.0 {
            let x = &x0 * matrix_exp(&model.g.combine(&p.rows(0, dg).into_owned()));
            best = (res, Some(x));
        }
        if res < tol {
            break;
        }
    }
    FixedFiber {
        witness: if best.0 < tol { best.1 } else { None },
        residual: best.0,
        restarts,
    }
}

/// An A-invariant (2s+1)-plane for A ∈ O(2s+2t+2) with det A = −1, as
/// orthonormal columns, and its invariance residual.
#[derive(Clone, Debug)]
pub struct PlaneCertificate {
    pub basis: Mat,
    pub residual: f64,
}

pub fn fixed_point_certificate(a: &Mat, s: usize, t: usize) -> Result<PlaneCertificate> {
    fixed_point_certificate_tol(a, s, t, GeometryTolerances::default().certificate)
}

pub fn fixed_point_certificate_tol(a: &Mat, s: usize, t: usize, tol: f64) -> Result<PlaneCertificate> {
    let n = 2 * s + 2 * t + 2;
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::InvalidArgument(format!("expected a {n}x{n} matrix")));
    }
    let orth = (a.transpose() * a - Mat::identity(n, n)).amax();
    if orth > 1e-9 {
        return Err(Error::InvalidArgument(format!("matrix is not orthogonal ({orth:.3e})")));
    }
    let det = a.determinant();
    if det > 0.0 {
        return Err(Error::WrongDeterminant(det));
    }
    let (q, t_mat) = real_schur(a)?;
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    let mut planes: Vec<[usize; 2]> = Vec::new();
    for b in schur_blocks(&t_mat) {
        match b {
            SchurBlock::Pair(i) => planes.push([i, i + 1]),
            SchurBlock::Single(i) if t_mat[(i, i)] > 0.0 => plus.push(i),
            SchurBlock::Single(i) => minus.push(i),
        }
    }
    let line = plus
        .first()
        .copied()
        .ok_or_else(|| Error::Validation("no +1 eigenvalue in the Schur form".into()))?;
    // +1 pairs first, then rotation planes, then −1 pairs
    let mut two_planes: Vec<[usize; 2]> = plus[1..].chunks_exact(2).map(|c| [c[0], c[1]]).collect();
    two_planes.extend(planes);
    two_planes.extend(minus.chunks_exact(2).map(|c| [c[0], c[1]]));
    if two_planes.len() < s {
        return Err(Error::Validation("too few invariant planes".into()));
    }
    let mut cols = vec![line];
    for p in &two_planes[..s] {
        cols.extend_from_slice(p);
    }
    let basis = DMatrix::from_columns(&cols.iter().map(|&c| q.column(c).into_owned()).collect::<Vec<_>>());
    let image = a * &basis;
    let residual = (&image - &basis * (basis.transpose() * &image)).amax();
    if residual > tol {
        return Err(Error::Validation(format!("plane not invariant (residual {residual:.3e})")));
    }
    Ok(PlaneCertificate { basis, residual })
}

/// Projector onto the column span.
pub fn projector(basis: &Mat) -> Mat {
    basis * basis.transpose()
}

/// The standard isometries for a model: elements of Z_G × r(K₂) other than
/// the identity, and elements (k, 1) with k ∈ K₁ ∪ K₂ non-central.
pub struct StandardIsometries {
    pub constant: Vec<Isometry>,
    pub nonconstant: Vec<Isometry>,
}

fn is_central(model: &GroupModel, k: &Mat) -> bool {
    model.center_elements.iter().any(|z| (z - k).amax() < 1e-6)
}

pub fn standard_isometries(model: &GroupModel, seed: u64) -> Result<StandardIsometries> {
    let n = model.size();
    let id = Mat::identity(n, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = |basis: &[Mat], rng: &mut ChaCha8Rng| {
        let x = random_in(basis, rng, 1.0);
        let len = model_norm_g(model, &x);
        x / len
    };
    let k2_dirs: Vec<Mat> = (0..3).map(|_| unit(&model.k2.basis, &mut rng)).collect();
    // enough angles that |Z_G| · #angles − 1 ≥ 11
    let per_centre = 12usize.div_ceil(model.center_elements.len().max(1));
    let angles = &[0.0, 0.45, 1.1, 2.3, 0.8, 1.7, 2.9, 0.25, 1.4, 2.6, 0.6, 2.0][..per_centre.min(12)];
    let mut constant = Vec::new();
    for (zi, z) in model.center_elements.iter().enumerate() {
        for (ai, &th) in angles.iter().enumerate() {
            let dir = &k2_dirs[ai % k2_dirs.len()];
            let r = matrix_exp(&(dir * th));
            if zi == 0 && th == 0.0 {
                continue;
            }
            constant.push(Isometry::new(
                model,
                &format!("(z{zi}, r(exp({th}·eta{})))", ai % k2_dirs.len()),
                z.clone(),
                r,
            )?);
        }
    }
    let mut nonconstant = Vec::new();
    for (name, basis) in [("k1", &model.k1.basis), ("k2", &model.k2.basis)] {
        let mut made = 0;
        let mut tries = 0;
        while made < 6 && tries < 100 {
            tries += 1;
            let th: f64 = 0.2 + 1.0 * rng.random::<f64>();
            let k = matrix_exp(&(unit(basis, &mut rng) * th));
            if is_central(model, &k) || (&k - &id).amax() < 1e-6 {
                continue;
            }
            nonconstant.push(Isometry::new(model, &format!("({name}: exp({th:.3}·X{made}), 1)"), k, id.clone())?);
            made += 1;
        }
    }
    Ok(StandardIsometries { constant, nonconstant })
}

fn model_norm_g(model: &GroupModel, x: &Mat) -> f64 {
    (model.killing_constant() * x.norm_squared()).sqrt()
}

/// Random ξ ∈ g and η ∈ k₂, each of unit length in −κ.
pub fn random_fields(model: &GroupModel, left: usize, right: usize, seed: u64) -> (Vec<Mat>, Vec<Mat>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |basis: &[Mat], k: usize| -> Vec<Mat> {
        (0..k)
            .map(|_| {
                let x = random_in(basis, &mut rng, 1.0);
                let len = model_norm_g(model, &x);
                x / len
            })
            .collect()
    };
    let l = draw(&model.g.basis, left);
    let r = draw(&model.k2.basis, right);
    (l, r)
}

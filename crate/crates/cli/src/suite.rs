//! The numeric verification run behind `verify`, and the internal
//! consistency run behind `selfcheck`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use isosplit::dynkin::golden::{self, GoldenLists, GoldenReport};
use isosplit::dynkin::{automorphism_table, find_record, AutomorphismRow, FibrationRecord};
use isosplit::exec::Exec;
use isosplit::homspace::{
    displacement_profile, fixed_fiber, fixed_point_certificate_tol, haar_element, killing_length,
    random_fields, sample_points, standard_isometries, DisplacementReport, GeometryTolerances, Isometry,
    KillingField, ProfileConfig, Verdict,
};
use isosplit::liealg::{build_model_with, natural_reductivity_check, GroupModel, LieTolerances, ModelKind};
use isosplit::rootsys::{weyl_order, weyl_order_bfs, RootSystem, SimpleType};

pub const LEFT_FIELDS: usize = 50;
pub const RIGHT_FIELDS: usize = 20;
pub const FIBER_ELEMENTS: usize = 6;
pub const CERTIFICATE_ELEMENTS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    pub lie: LieTolerances,
    pub geometry: GeometryTolerances,
    /// Largest spread of a right Killing field's length counted as constant.
    pub killing_length: f64,
    /// Smallest spread of a left Killing field's length counted as nonconstant.
    pub nonconstancy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            lie: LieTolerances::default(),
            geometry: GeometryTolerances::default(),
            killing_length: 1e-9,
            nonconstancy: 1e-3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Neither confirmed nor contradicted; does not affect the exit code.
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub property: String,
    pub subject: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(property: &str, subject: &str, ok: bool, value: f64, tolerance: f64, detail: String) -> Self {
        CheckResult {
            property: property.to_string(),
            subject: subject.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            value,
            tolerance,
            detail,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifySettings {
    pub seed: u64,
    pub samples: usize,
    pub restarts: usize,
    pub left_fields: usize,
    pub right_fields: usize,
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub case_id: String,
    pub model: String,
    pub settings: VerifySettings,
    pub tolerances: Tolerances,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
    pub displacement: Vec<DisplacementReport>,
}

pub fn verify(record: &FibrationRecord, settings: VerifySettings, tol: Tolerances, exec: Exec) -> anyhow::Result<VerifyReport> {
    let model = build_model_with(record, tol.lie)?;
    let mut checks = Vec::new();

    for c in model.validate()? {
        checks.push(CheckResult::new(&c.name, &model.name, c.pass, c.value, c.tolerance, String::new()));
    }
    let nr = natural_reductivity_check(&model);
    checks.push(CheckResult::new(
        "normal metric is naturally reductive",
        &model.name,
        nr < tol.lie.natural_reductivity,
        nr,
        tol.lie.natural_reductivity,
        String::new(),
    ));

    checks.extend(field_lengths(&model, settings, tol));

    let cfg = ProfileConfig {
        samples: settings.samples,
        restarts: settings.restarts,
        seed: settings.seed,
        tol: tol.geometry,
    };
    let std = standard_isometries(&model, settings.seed)?;
    let mut displacement = Vec::new();
    let central = central_group_name(&model);
    for (g, expect_constant) in std
        .constant
        .iter()
        .map(|g| (g, true))
        .chain(std.nonconstant.iter().map(|g| (g, false)))
    {
        let rep = displacement_profile(&model, g, &cfg, exec);
        checks.push(displacement_check(&rep, expect_constant, &central));
        displacement.push(rep);
    }

    if record.equal_rank {
        checks.extend(fixed_fibers(&model, &std.nonconstant, settings, tol));
    }
    if let ModelKind::OddGrassmannian { s, t } = model.kind {
        checks.extend(plane_certificates(&model, s, t, settings.seed, tol));
    }

    let pass = checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifyReport {
        schema_version: crate::SCHEMA_VERSION,
        command: "verify",
        case_id: record.case_id.clone(),
        model: model.name.clone(),
        settings,
        tolerances: tol,
        pass,
        checks,
        displacement,
    })
}

fn central_group_name(model: &GroupModel) -> String {
    match model.kind {
        ModelKind::SpecialUnitary { .. } => "Z(G) x r(K2)".to_string(),
        ModelKind::OddGrassmannian { t, .. } => format!("{{+-I}} x r(SO({}))", 2 * t + 1),
    }
}

fn spread(model: &GroupModel, f: &KillingField, pts: &[isosplit::homspace::CosetPoint]) -> f64 {
    let (lo, hi) = pts.iter().map(|x| killing_length(model, f, x)).fold((f64::MAX, f64::MIN), |(lo, hi), l| {
        (lo.min(l), hi.max(l))
    });
    hi - lo
}

fn field_lengths(model: &GroupModel, settings: VerifySettings, tol: Tolerances) -> Vec<CheckResult> {
    let pts = sample_points(model, settings.samples, settings.seed);
    let (xis, etas) = random_fields(model, settings.left_fields, settings.right_fields, settings.seed);
    let worst_eta = etas
        .into_iter()
        .map(|e| spread(model, &KillingField::Right(e), &pts))
        .fold(0.0, f64::max);
    let least_xi = xis
        .into_iter()
        .map(|x| spread(model, &KillingField::Left(x), &pts))
        .fold(f64::INFINITY, f64::min);
    vec![
        CheckResult::new(
            "Killing fields from k2 acting on the right have constant length",
            &format!("{} fields", settings.right_fields),
            worst_eta < tol.killing_length,
            worst_eta,
            tol.killing_length,
            "largest spread of length over the sample".to_string(),
        ),
        CheckResult::new(
            "random Killing fields from g acting on the left have nonconstant length",
            &format!("{} fields", settings.left_fields),
            least_xi > tol.nonconstancy,
            least_xi,
            tol.nonconstancy,
            "smallest spread of length over the sample".to_string(),
        ),
    ]
}

fn displacement_check(rep: &DisplacementReport, expect_constant: bool, central: &str) -> CheckResult {
    let (property, status) = if expect_constant {
        let status = match rep.verdict {
            Verdict::ConstantWithinTol => Status::Pass,
            Verdict::CertifiedNonconstant => Status::Fail,
            Verdict::Inconclusive => Status::Inconclusive,
        };
        (format!("isometries in {central} have constant displacement"), status)
    } else {
        let status = match rep.verdict {
            Verdict::CertifiedNonconstant => Status::Pass,
            Verdict::ConstantWithinTol => Status::Fail,
            Verdict::Inconclusive => Status::Inconclusive,
        };
        (format!("isometries outside {central} do not have constant displacement"), status)
    };
    CheckResult {
        property,
        subject: rep.isometry.clone(),
        status,
        value: if expect_constant { rep.relative_spread } else { rep.certified_gap },
        tolerance: 0.0,
        detail: format!(
            "verdict {}; upper bounds in [{:.6e}, {:.6e}], largest certified lower bound {:.6e}",
            verdict_name(rep.verdict),
            rep.min_upper,
            rep.max_upper,
            rep.max_lower
        ),
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::ConstantWithinTol => "constant-within-tol",
        Verdict::CertifiedNonconstant => "certified-nonconstant",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn fixed_fibers(model: &GroupModel, from_k: &[Isometry], settings: VerifySettings, tol: Tolerances) -> Vec<CheckResult> {
    let n = model.size();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut gammas: Vec<Isometry> = from_k.iter().take(2).cloned().collect();
    for i in 0..FIBER_ELEMENTS {
        let g = haar_element(model, &mut rng);
        if let Ok(iso) = Isometry::new(model, &format!("(random g{i}, 1)"), g, DMatrix::identity(n, n)) {
            gammas.push(iso);
        }
    }
    let restarts = settings.restarts.max(4);
    gammas
        .iter()
        .map(|g| {
            let ff = fixed_fiber(model, g, restarts, settings.seed);
            CheckResult::new(
                "every isometry of the identity component preserves some fiber",
                &g.label,
                ff.residual < tol.geometry.fixed_fiber,
                ff.residual,
                tol.geometry.fixed_fiber,
                format!("best residual over {} restarts", ff.restarts),
            )
        })
        .collect()
}

fn plane_certificates(model: &GroupModel, s: usize, t: usize, seed: u64, tol: Tolerances) -> Vec<CheckResult> {
    let n = model.size();
    let diag: Vec<f64> = (0..n).map(|i| if i < 2 * s + 1 { 1.0 } else { -1.0 }).collect();
    let refl = DMatrix::from_diagonal(&DVector::from_vec(diag));
    let property = format!("orientation-reversing elements of O({n}) leave a {}-plane invariant", 2 * s + 1);
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut elements = vec![("s".to_string(), refl.clone())];
    for i in 0..CERTIFICATE_ELEMENTS {
        elements.push((format!("s*g{i}"), &refl * haar_element(model, &mut rng)));
    }
    for (label, a) in elements {
        let c = match fixed_point_certificate_tol(&a, s, t, tol.geometry.certificate) {
            Ok(c) => CheckResult::new(
                &property,
                &label,
                c.residual < tol.geometry.certificate,
                c.residual,
                tol.geometry.certificate,
                format!("plane of dimension {}", c.basis.ncols()),
            ),
            Err(e) => CheckResult::new(&property, &label, false, f64::INFINITY, tol.geometry.certificate, e.to_string()),
        };
        out.push(c);
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct WeylRow {
    #[serde(rename = "type")]
    pub ty: String,
    pub degree_product: Option<u64>,
    /// None when the group is too large to enumerate.
    pub enumerated: Option<u64>,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ModelChecks {
    pub case_id: String,
    pub checks: Vec<CheckResult>,
}

#[derive(Debug, Serialize)]
pub struct SelfcheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub rank_cap: usize,
    pub golden_source: String,
    pub tolerances: LieTolerances,
    pub pass: bool,
    pub weyl_orders: Vec<WeylRow>,
    pub automorphisms: Vec<AutomorphismRow>,
    pub models: Vec<ModelChecks>,
    pub golden: GoldenReport,
}

pub fn selfcheck(rank_cap: usize, golden: &GoldenLists, golden_source: String, tol: LieTolerances) -> anyhow::Result<SelfcheckReport> {
    let weyl_orders: Vec<WeylRow> = SimpleType::all_up_to(rank_cap)
        .into_iter()
        .map(|t| {
            let rs = RootSystem::new(t)?;
            let product = weyl_order(&rs).ok();
            let enumerated = weyl_order_bfs(&rs);
            let pass = product.is_some() && enumerated.is_none_or(|e| Some(e) == product);
            Ok(WeylRow {
                ty: t.to_string(),
                degree_product: product,
                enumerated,
                pass,
            })
        })
        .collect::<isosplit::Result<_>>()?;
    let automorphisms = automorphism_table(rank_cap)?;

    let mut models = Vec::new();
    for id in ["su3-hopf", "so6-stiefel"] {
        let rec = find_record(id, 3)?;
        let checks = match build_model_with(&rec, tol) {
            Ok(m) => {
                let mut v: Vec<CheckResult> = m
                    .validate()?
                    .into_iter()
                    .map(|c| CheckResult::new(&c.name, &m.name, c.pass, c.value, c.tolerance, String::new()))
                    .collect();
                let nr = natural_reductivity_check(&m);
                v.push(CheckResult::new(
                    "normal metric is naturally reductive",
                    &m.name,
                    nr < tol.natural_reductivity,
                    nr,
                    tol.natural_reductivity,
                    String::new(),
                ));
                v
            }
            Err(e) => vec![CheckResult::new("model can be built", id, false, f64::NAN, 0.0, e.to_string())],
        };
        models.push(ModelChecks { case_id: rec.case_id, checks });
    }

    let golden = golden::check(golden, rank_cap)?;
    let pass = weyl_orders.iter().all(|w| w.pass)
        && automorphisms.iter().all(|a| a.pass())
        && models.iter().all(|m| m.checks.iter().all(|c| c.status == Status::Pass))
        && golden.pass();
    Ok(SelfcheckReport {
        schema_version: crate::SCHEMA_VERSION,
        command: "selfcheck",
        rank_cap,
        golden_source,
        tolerances: tol,
        pass,
        weyl_orders,
        automorphisms,
        models,
        golden,
    })
}

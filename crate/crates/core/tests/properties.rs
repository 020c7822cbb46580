use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use isosplit::dynkin::{
    bds_enumerate, catalog, euler_characteristic, find_record, splittings, CatalogFilter, FibrationRecord,
    WeylTable,
};
use isosplit::exec::Exec;
use isosplit::homspace::{
    distance_lower_bound, fixed_point_certificate, geodesic, haar_element, riemannian_log, CosetPoint,
};
use isosplit::liealg::{bracket, build_model, killing_form, GroupModel, Mat};
use isosplit::rootsys::{dot, highest_root, reflect, RootSystem, SimpleType};

fn types(cap: usize) -> Vec<SimpleType> {
    SimpleType::all_up_to(cap)
}

fn hopf() -> &'static GroupModel {
    static M: OnceLock<GroupModel> = OnceLock::new();
    M.get_or_init(|| build_model(&find_record("su3-hopf", 3).unwrap()).unwrap())
}

fn stiefel() -> &'static GroupModel {
    static M: OnceLock<GroupModel> = OnceLock::new();
    M.get_or_init(|| build_model(&find_record("so6-stiefel", 3).unwrap()).unwrap())
}

fn small_catalog() -> &'static Vec<FibrationRecord> {
    static C: OnceLock<Vec<FibrationRecord>> = OnceLock::new();
    C.get_or_init(|| {
        catalog(&CatalogFilter {
            rank_cap: 6,
            exec: Exec::Sequential,
            ..CatalogFilter::default()
        })
        .unwrap()
    })
}

fn combo(basis: &[Mat], coeffs: &[f64]) -> Mat {
    let n = basis[0].nrows();
    basis
        .iter()
        .zip(coeffs.iter().cycle())
        .fold(Mat::zeros(n, n), |acc, (b, &c)| acc + b * c)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reflections_permute_roots(t in prop::sample::select(types(6)), i in 0usize..6, j in 0usize..400) {
        let rs = RootSystem::new(t).unwrap();
        let alpha = &rs.simple_roots()[i % rs.rank()];
        let root = &rs.roots()[j % rs.roots().len()];
        prop_assert!(rs.contains_root(&reflect(&root.vector, alpha)));
    }

    #[test]
    fn cartan_axioms(t in prop::sample::select(types(8))) {
        let rs = RootSystem::new(t).unwrap();
        let a = rs.cartan();
        for i in 0..rs.rank() {
            prop_assert_eq!(a[i][i], 2);
            for j in 0..rs.rank() {
                if i != j {
                    prop_assert!(a[i][j] <= 0);
                    prop_assert_eq!(a[i][j] == 0, a[j][i] == 0);
                }
            }
        }
    }

    #[test]
    fn highest_root_is_dominant_and_maximal(t in prop::sample::select(types(8))) {
        let rs = RootSystem::new(t).unwrap();
        let beta = highest_root(&rs).unwrap();
        for alpha in rs.simple_roots() {
            prop_assert!(!dot(&beta.vector, alpha).is_negative());
            let up: Vec<_> = beta.vector.iter().zip(alpha).map(|(b, a)| b + a).collect();
            prop_assert!(!rs.contains_root(&up));
        }
        prop_assert!(beta.coefficients.iter().all(|&c| c > 0));
    }

    #[test]
    fn bds_cases_have_full_rank(t in prop::sample::select(types(8))) {
        for case in bds_enumerate(t).unwrap() {
            let rank: usize = case.k_components.iter().map(|c| c.rank()).sum::<usize>()
                + case.has_circle_factor as usize;
            prop_assert_eq!(rank, t.rank());
            prop_assert!(case.n0 == 1 || [2, 3, 5].contains(&case.n0));
        }
    }

    #[test]
    fn records_are_consistent(idx in 0usize..10_000) {
        let recs = small_catalog();
        let r = &recs[idx % recs.len()];
        prop_assert_eq!(r.dims.k1 + r.dims.k2 + r.dims.m, r.dims.g);
        prop_assert_eq!(r.dims.m1, r.dims.m + r.dims.k2);
        let partner = recs.iter().find(|p| p.case_id == r.swap_partner).unwrap();
        prop_assert_eq!(&partner.swap_partner, &r.case_id);
        prop_assert_eq!(&partner.k1_components, &r.k2_components);
        let json = serde_json::to_string(r).unwrap();
        let back: FibrationRecord = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back.case_id, &r.case_id);
        prop_assert_eq!(back.dims, r.dims);
    }

    #[test]
    fn killing_form_symmetric_invariant(
        x in prop::collection::vec(-2.0f64..2.0, 15),
        y in prop::collection::vec(-2.0f64..2.0, 15),
        z in prop::collection::vec(-2.0f64..2.0, 15),
        which in 0usize..2,
    ) {
        let m = if which == 0 { hopf() } else { stiefel() };
        let g = &m.g;
        let (x, y, z) = (combo(&g.basis, &x), combo(&g.basis, &y), combo(&g.basis, &z));
        let kxy = killing_form(g, &x, &y).unwrap();
        prop_assert!((kxy - killing_form(g, &y, &x).unwrap()).abs() < 1e-9);
        let inv = killing_form(g, &bracket(&z, &x), &y).unwrap() + killing_form(g, &x, &bracket(&z, &y)).unwrap();
        prop_assert!(inv.abs() < 1e-9 * (1.0 + x.norm() * y.norm() * z.norm()));
        if x.norm() > 1e-6 {
            prop_assert!(killing_form(g, &x, &x).unwrap() < 0.0);
        }
        let c = g.trace_constant().unwrap();
        prop_assert!((kxy - c * (&x * &y).trace()).abs() < 1e-9 * (1.0 + kxy.abs()));
    }

    #[test]
    fn geodesics_have_constant_speed(
        coeffs in prop::collection::vec(-1.0f64..1.0, 12),
        seed in 0u64..1000,
        which in 0usize..2,
    ) {
        let m = if which == 0 { hopf() } else { stiefel() };
        let xi = combo(&m.m1, &coeffs);
        prop_assume!(m.norm(&xi) > 1e-3);
        let xi = &xi / m.norm(&xi);
        let x = CosetPoint { rep: haar_element(m, &mut ChaCha8Rng::seed_from_u64(seed)) };
        // speed from short chords along the curve, in the frame at each point
        let h = 1e-5;
        let mut speeds = Vec::new();
        for t in [0.0, 0.7, 1.9] {
            let a = geodesic(m, &x, &xi, t).unwrap();
            let b = geodesic(m, &x, &xi, t + h).unwrap();
            let v = a.rep.transpose() * (&b.rep - &a.rep) / h;
            speeds.push(m.norm(&v));
        }
        for s in &speeds {
            prop_assert!((s - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn lower_bound_below_upper(seed in 0u64..1000, which in 0usize..2) {
        let m = if which == 0 { hopf() } else { stiefel() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = CosetPoint { rep: haar_element(m, &mut rng) };
        let y = CosetPoint { rep: haar_element(m, &mut rng) };
        let lb = distance_lower_bound(m, &x, &y);
        if let Ok(log) = riemannian_log(m, &x, &y, 3, 42) {
            prop_assert!(lb.value <= log.upper_bound + 1e-9);
        }
        prop_assert!(distance_lower_bound(m, &x, &x).value < 1e-12);
    }

    #[test]
    fn certificate_planes_invariant(seed in 0u64..10_000) {
        let s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0]));
        let a = &s * haar_element(stiefel(), &mut ChaCha8Rng::seed_from_u64(seed));
        let c = fixed_point_certificate(&a, 1, 1).unwrap();
        prop_assert_eq!(c.basis.ncols(), 3);
        prop_assert!(c.residual < 1e-9);
        let gram = c.basis.transpose() * &c.basis;
        prop_assert!((gram - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);
    }

    #[test]
    fn exec_map_matches_sequential(v in prop::collection::vec(-1000i64..1000, 0..64)) {
        let f = |x: &i64| x * x - 3;
        prop_assert_eq!(Exec::Parallel.map(&v, f), Exec::Sequential.map(&v, f));
    }
}

#[test]
fn euler_characteristic_divides_everywhere() {
    let table = WeylTable::up_to(8, Exec::Sequential).unwrap();
    for t in types(8) {
        for case in bds_enumerate(t).unwrap() {
            for r in splittings(&case, &table).unwrap() {
                let chi = euler_characteristic(&r, &table).unwrap();
                assert!(chi > 0);
            }
        }
    }
}

#[test]
fn zero_is_not_a_root() {
    for t in types(4) {
        let rs = RootSystem::new(t).unwrap();
        assert!(rs.roots().iter().all(|r| r.vector.iter().any(|c| !c.is_zero())));
    }
}

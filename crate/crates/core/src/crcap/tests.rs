use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

use super::*;

/// Grid search at 41 levels, |U| = 3, computed by a standalone enumeration
/// script before the optimizer existed.
const GOLDEN_DSBS01_C02: f64 = 0.502_504_289_254_837_3;

fn opts() -> OptimizerOptions {
    OptimizerOptions {
        parallel: false,
        ..OptimizerOptions::default()
    }
}

fn random_source(rng: &mut impl Rng, nx: usize, ny: usize) -> JointSource<f64> {
    let w: Vec<f64> = (0..nx * ny).map(|_| rng.random::<f64>() + 1e-3).collect();
    JointSource::normalized(w, nx, ny).unwrap()
}

#[test]
fn info_pair_examples() {
    let src = JointSource::dsbs(0.1).unwrap();
    let id = AuxChannel::identity(2, 2).unwrap();
    let (iux, iuy) = id.info_pair(&src).unwrap();
    assert_abs_diff_eq!(iux, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(iuy, 0.531004, epsilon = 1e-6);

    let c = AuxChannel::constant(2, 1).unwrap();
    assert_eq!(c.info_pair(&src).unwrap(), (0.0, 0.0));

    let indep = AuxChannel::new(vec![0.3, 0.3, 0.7, 0.7], 2, 2).unwrap();
    let (a, b) = indep.info_pair(&src).unwrap();
    assert_abs_diff_eq!(a, 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(b, 0.0, epsilon = 1e-12);

    let wrong = AuxChannel::identity(3, 3).unwrap();
    assert!(matches!(wrong.info_pair(&src), Err(Error::DimensionMismatch(_))));
}

#[test]
fn aux_channel_validation() {
    assert!(AuxChannel::new(vec![0.5, 0.5, 0.4, 0.5], 2, 2).is_err());
    assert!(AuxChannel::new(vec![1.2, 1.0, -0.2, 0.0], 2, 2).is_err());
    assert!(AuxChannel::<f64>::new(vec![1.0], 2, 2).is_err());
    assert!(AuxChannel::<f64>::identity(3, 2).is_err());
}

#[test]
fn capacity_when_x_equals_y() {
    for px in [[0.5, 0.5], [0.2, 0.8]] {
        let src = JointSource::new(vec![px[0], 0.0, 0.0, px[1]], 2, 2).unwrap();
        for c in [0.0, 0.3, 2.0] {
            let r = cr_capacity(&src, c, &opts()).unwrap();
            assert_abs_diff_eq!(r.value, src.entropy_x(), epsilon = 1e-9);
            assert!(converse_bound_check(&r, &src, c));
        }
    }
}

#[test]
fn capacity_saturates_at_conditional_entropy() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let src = random_source(&mut rng, 2, 2);
        let c = src.conditional_entropy_x_given_y();
        let r = cr_capacity(&src, c, &opts()).unwrap();
        assert_abs_diff_eq!(r.value, src.entropy_x(), epsilon = 1e-6);
        let oracle = brute_force_cr_capacity(&src, c, 11, 3).unwrap();
        assert_abs_diff_eq!(oracle.value, src.entropy_x(), epsilon = 1e-9);
    }
}

#[test]
fn independent_source_capacity_equals_budget() {
    let src = JointSource::dsbs(0.5).unwrap();
    let r = cr_capacity(&src, 0.3, &opts()).unwrap();
    assert_abs_diff_eq!(r.value, 0.3, epsilon = 1e-6);
    let oracle = brute_force_cr_capacity(&src, 0.3f64, 21, 3).unwrap();
    assert!((oracle.value - 0.3).abs() < 5e-3);
}

#[test]
fn negative_budget_rejected() {
    let src = JointSource::dsbs(0.1).unwrap();
    assert!(cr_capacity(&src, -0.1, &opts()).is_err());
    assert!(cr_capacity(&src, f64::NAN, &opts()).is_err());
    assert!(brute_force_cr_capacity(&src, -1.0, 11, 3).is_err());
}

#[test]
fn oracle_examples() {
    let same = JointSource::dsbs(0.0).unwrap();
    let r = brute_force_cr_capacity(&same, 1.0, 11, 2).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-12);

    let d = JointSource::dsbs(0.1).unwrap();
    let r = brute_force_cr_capacity(&d, 0.0, 21, 3).unwrap();
    assert!(r.value <= 2e-2);

    let r = brute_force_cr_capacity(&d, 0.2, 41, 3).unwrap();
    assert_abs_diff_eq!(r.value, GOLDEN_DSBS01_C02, epsilon = 1e-9);
    assert!(r.excess <= 0.2 + 1e-9);
}

#[test]
fn oracle_resource_guard() {
    let src = JointSource::independent(&[0.25; 4], &[0.5, 0.5]).unwrap();
    let err = brute_force_cr_capacity_capped(&src, 0.1, 41, 5, 1e6).unwrap_err();
    assert!(err.is_resource_cap());
    assert!(brute_force_cr_capacity(&src, 0.1, 1, 5).is_err());
}

#[test]
fn optimizer_matches_golden_oracle() {
    let d = JointSource::dsbs(0.1).unwrap();
    let r = cr_capacity(&d, 0.2, &opts()).unwrap();
    assert!(r.value >= GOLDEN_DSBS01_C02 - 5e-3, "{}", r.value);
    assert!(r.value <= GOLDEN_DSBS01_C02 + 5e-3, "{}", r.value);
    assert!(r.excess <= 0.2 + FEASIBILITY_TOL);
}

#[test]
fn dsbs_zero_budget_collapses() {
    for p in [0.1, 0.2, 0.3] {
        let d = JointSource::dsbs(p).unwrap();
        let r = cr_capacity(&d, 0.0, &opts()).unwrap();
        assert!(r.value <= 2e-2, "p = {p}: {}", r.value);
        assert!(r.excess <= FEASIBILITY_TOL);
    }
}

#[test]
fn common_part_survives_zero_budget() {
    // X = (A, B) with Y revealing A exactly: U = A costs nothing.
    let src = JointSource::new(
        vec![
            0.2, 0.05, 0.0, 0.0, //
            0.05, 0.2, 0.0, 0.0, //
            0.0, 0.0, 0.2, 0.05, //
            0.0, 0.0, 0.05, 0.2,
        ],
        4,
        4,
    )
    .unwrap();
    let r = cr_capacity(&src, 0.0, &opts()).unwrap();
    assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
}

#[test]
fn converse_check_flags_violations() {
    let d = JointSource::dsbs(0.1).unwrap();
    let r = cr_capacity(&d, 0.2, &opts()).unwrap();
    assert!(converse_bound_check(&r, &d, 0.2));
    let mut bad = r.clone();
    bad.excess = 0.3;
    assert!(!converse_bound_check(&bad, &d, 0.2));
    let mut bad = r;
    bad.value = 1.5;
    assert!(!converse_bound_check(&bad, &d, 0.2));
}

#[test]
fn oracle_outputs_pass_converse_check() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let src = random_source(&mut rng, 2, 2);
        let c = rng.random::<f64>() * 0.6;
        let r = brute_force_cr_capacity(&src, c, 11, 3).unwrap();
        assert!(converse_bound_check(&r, &src, c));
    }
}

#[test]
fn optimizer_is_deterministic() {
    let d = JointSource::dsbs(0.15).unwrap();
    let par = OptimizerOptions {
        seed: 3,
        ..OptimizerOptions::default()
    };
    let seq = OptimizerOptions {
        parallel: false,
        ..par.clone()
    };
    let a = cr_capacity(&d, 0.25, &par).unwrap();
    let b = cr_capacity(&d, 0.25, &seq).unwrap();
    assert_eq!(a, b);
}

#[test]
fn f32_capacity() {
    let d = JointSource::<f32>::dsbs(0.1).unwrap();
    let r = cr_capacity(&d, 0.2f32, &opts()).unwrap();
    assert!((r.value as f64 - GOLDEN_DSBS01_C02).abs() < 1e-2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn data_processing_holds(
        px in prop::collection::vec(0.01f64..1.0, 6),
        w in prop::collection::vec(0.0f64..1.0, 9),
    ) {
        let src = JointSource::normalized(px, 3, 2).unwrap();
        let mut cols = vec![vec![0.0; 3]; 3];
        for x in 0..3 {
            let s: f64 = (0..3).map(|u| w[u * 3 + x]).sum::<f64>() + 1e-9;
            for u in 0..3 {
                cols[x][u] = (w[u * 3 + x] + 1e-9 / 3.0) / s;
            }
        }
        let aux = AuxChannel::from_columns(&cols);
        let (iux, iuy) = aux.info_pair(&src).unwrap();
        prop_assert!(iux - iuy >= -1e-9);
        prop_assert!(iux <= src.entropy_x() + 1e-9);
    }
}

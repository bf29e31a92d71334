//! Algebraic laws of the composition operators over random data. The
//! checks live in `vca_testkit::laws`; each property feeds them seeds.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vca_core::lift::{sample_grid, samples_per_feature};
use vca_core::AggFunc;
use vca_testkit::chains::{random_context, random_group, random_view};
use vca_testkit::laws;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn holds<T>(r: laws::Check<T>) -> Result<T, TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn difference_is_antisymmetric(seed in any::<u64>()) {
        holds(laws::antisymmetry(seed))?;
    }

    #[test]
    fn sum_is_symmetric(seed in any::<u64>()) {
        holds(laws::symmetry(seed))?;
    }

    #[test]
    fn self_difference_is_zero(seed in any::<u64>()) {
        holds(laws::self_difference(seed))?;
    }

    #[test]
    fn extract_true_is_identity(seed in any::<u64>()) {
        holds(laws::extract_identity(seed))?;
    }

    #[test]
    fn explode_then_aggregate_regroups_raw_rows(seed in any::<u64>()) {
        let ran = holds(laws::explode_round_trip(seed))?;
        prop_assume!(ran);
    }

    #[test]
    fn sampling_grid_is_capped(seed in any::<u64>()) {
        holds(laws::sampling_cap(seed))?;
    }
}

#[test]
fn laws_hold_on_full_outer_results() {
    // the row-for-row branch of the symmetry laws must itself run on enough cases
    let mut full = (0, 0);
    for seed in 0..2000u64 {
        if full.0 < 100 && laws::antisymmetry(seed).unwrap() {
            full.0 += 1;
        }
        if full.1 < 100 && laws::symmetry(seed).unwrap() {
            full.1 += 1;
        }
    }
    assert_eq!(full, (100, 100));
}

#[test]
fn sampling_counts() {
    assert_eq!(samples_per_feature(1), 20);
    assert_eq!(samples_per_feature(2), 20);
    assert_eq!(samples_per_feature(3), 10);
    assert_eq!(sample_grid(&[(0.0, 1.0), (0.0, 1.0)]).len(), 400);
    assert_eq!(sample_grid(&[(0.0, 1.0); 3]).len(), 1000);
    assert_eq!(sample_grid(&[(0.0, 1.0); 4]).len(), 5usize.pow(4));
}

#[test]
fn lifted_model_view_respects_cap() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let ctx = random_context(&mut rng, 8);
        let group = random_group(&mut rng, &ctx);
        let v = random_view(&mut rng, &ctx, &group, AggFunc::Avg);
        let numeric: Vec<String> = {
            let s = ctx.evaluate(&v).unwrap().schema().clone();
            group
                .iter()
                .filter(|g| s.get(g).unwrap().kind == vca_core::ValueKind::Numeric)
                .cloned()
                .collect()
        };
        if numeric.is_empty() {
            continue;
        }
        let Ok(mv) = vca_core::lift(&ctx, &v, &numeric, &[]) else {
            continue;
        };
        if let Ok(rel) = vca_core::sample_model_view(&ctx, &mv) {
            assert!(rel.len() <= 1000 * mv.models.len().max(1));
        }
    }
}

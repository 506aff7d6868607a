use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use saf_core::enumeration::{enumerate_models, grid_oracle, EnumerationConfig, ModelSet};
use saf_core::framework::{ArgumentId, SocialFramework};
use saf_core::semantics::{residual, SemanticsConfig};
use saf_core::solver::SolverConfig;
use saf_core::testing::random_framework;
use saf_core::{certify_uniqueness, Valuation};

fn cfg() -> SemanticsConfig {
    SemanticsConfig::default()
}

fn models(fw: &SocialFramework) -> ModelSet {
    enumerate_models(fw, &cfg(), &SolverConfig::default(), &EnumerationConfig::default()).unwrap()
}

fn by_name(fw: &SocialFramework, values: &[f64]) -> BTreeMap<String, f64> {
    fw.arguments().iter().map(|a| a.as_str().to_owned()).zip(values.iter().copied()).collect()
}

fn relabel(fw: &SocialFramework, names: &BTreeMap<String, String>) -> SocialFramework {
    let id = |a: &ArgumentId| ArgumentId::new(names[a.as_str()].clone()).unwrap();
    let args: Vec<_> = fw.arguments().iter().map(id).collect();
    let attacks: Vec<_> = fw.attacks().map(|(a, b)| (id(a), id(b))).collect();
    let votes: BTreeMap<_, _> = fw.arguments().iter().map(|a| (id(a), fw.votes_of(a).unwrap())).collect();
    SocialFramework::build(args, attacks, &votes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn oracle_and_multistart_agree(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = random_framework(&mut rng, 4, 0.5, 6);
        let multi = models(&fw);
        let grid = grid_oracle(&fw, &cfg(), 100).unwrap();
        let dedup = EnumerationConfig::default().dedup_distance;
        prop_assert_eq!(multi.len(), grid.len());
        for m in &multi.models {
            prop_assert!(grid.position_near(m.model.values(), dedup).is_some());
        }
    }

    #[test]
    fn relabelling_commutes_with_enumeration(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = random_framework(&mut rng, 6, 0.4, 6);
        let mut targets: Vec<String> = (0..fw.len()).map(|i| format!("z{i}")).collect();
        targets.shuffle(&mut rng);
        let names: BTreeMap<String, String> =
            fw.arguments().iter().map(|a| a.as_str().to_owned()).zip(targets).collect();
        let image = relabel(&fw, &names);
        let (before, after) = (models(&fw), models(&image));
        prop_assert_eq!(before.len(), after.len());
        for m in &before.models {
            let named = by_name(&fw, m.model.values());
            let moved: Vec<f64> = image.arguments().iter().map(|a| {
                let source = names.iter().find(|(_, t)| t.as_str() == a.as_str()).unwrap().0;
                named[source]
            }).collect();
            prop_assert!(after.position_near(&moved, 1e-6).is_some());
        }
    }

    #[test]
    fn every_reported_model_is_a_fixed_point(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = random_framework(&mut rng, 8, 0.3, 10);
        for m in &models(&fw).models {
            let v = Valuation::new(&fw, m.model.values().to_vec()).unwrap();
            prop_assert!(residual(&fw, &cfg(), &v) < 1e-9);
        }
    }

    #[test]
    fn certified_frameworks_have_one_model(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fw = random_framework(&mut rng, 8, 0.15, 10);
        if certify_uniqueness(&fw, &cfg()).holds {
            prop_assert_eq!(models(&fw).len(), 1);
        }
    }
}

#[test]
fn union_model_restricts_to_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let left = random_framework(&mut rng, 4, 0.2, 5);
    let right = relabel(
        &random_framework(&mut rng, 4, 0.2, 5),
        &(0..4).map(|i| (format!("a{i}"), format!("r{i}"))).collect(),
    );
    let union = left.disjoint_union(&right).unwrap();
    let (l, r, u) = (models(&left), models(&right), models(&union));
    assert_eq!(u.len(), l.len() * r.len());
}

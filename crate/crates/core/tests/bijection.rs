use std::collections::BTreeSet;

use bphull_core::planar_maps::enumerate::{labeled_trees, rooted_quadrangulations};
use bphull_core::planar_maps::{schaeffer, TreeVariant};

#[test]
fn well_labeled_trees_biject_onto_rooted_quadrangulations() {
    for n in 1..=4 {
        let trees = labeled_trees(n, TreeVariant::WellLabeled);
        let mut image = BTreeSet::new();
        for t in &trees {
            let q = schaeffer(t).unwrap();
            q.validate().unwrap();
            assert!(
                image.insert(q.canonical_code()),
                "n={n}: two trees give the same rooted map"
            );
        }
        let oracle = rooted_quadrangulations(n).unwrap();
        assert_eq!(image.len(), trees.len());
        assert_eq!(
            image, oracle,
            "n={n}: image differs from the enumerated maps"
        );
    }
}

#[test]
fn free_pointed_trees_map_into_rooted_quadrangulations() {
    for n in 1..=3 {
        let mut hits = std::collections::BTreeMap::new();
        for t in labeled_trees(n, TreeVariant::FreePointed) {
            let q = schaeffer(&t).unwrap();
            q.validate().unwrap();
            *hits.entry(q.canonical_code()).or_insert(0usize) += 1;
        }
        let total: usize = hits.values().sum();
        assert_eq!(
            total,
            bphull_core::planar_maps::enumerate::dyck_words(n).len() * 3usize.pow(n as u32)
        );
        let oracle = rooted_quadrangulations(n).unwrap();
        assert!(
            hits.keys().all(|k| oracle.contains(k)),
            "n={n}: image outside the rooted maps"
        );
    }
}

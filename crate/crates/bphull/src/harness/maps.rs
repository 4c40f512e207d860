//! Suites on discrete quadrangulations.

use std::collections::{BTreeMap, BTreeSet};

use bphull_core::formulas::boundary_length_cdf;
use bphull_core::path::Moments;
use bphull_core::planar_maps::enumerate::{labeled_trees, rooted_quadrangulations};
use bphull_core::planar_maps::growth::{
    growth_stats_from, least_squares_slope, sample_hull_series, sample_map,
};
use bphull_core::planar_maps::quad::{schaeffer, Quadrangulation};
use bphull_core::planar_maps::tree::{
    default_attempts, sample_labeled_tree_with, LabeledTree, TreeVariant,
};
use bphull_core::rng::{stream, Lane};

use super::{ensemble, Outcome, SuiteSpec};
use crate::error::AppResult;
use crate::report::Check;
use crate::stats::{chi2_uniform, ks_one_sample};

/// Faces of the sampled maps checked for invariants.
const INVARIANT_FACES: usize = 1000;
/// Largest size with a brute-force oracle.
const ORACLE_MAX: usize = 4;
/// Expected draws per rooted map in the uniformity test.
const DRAWS_PER_MAP: u64 = 200;
/// Tree size and single-attempt trials for the rejection-rate check.
const ACCEPT_EDGES: usize = 100;
const ACCEPT_TRIALS: u64 = 100_000;
/// Stream offsets keeping the auxiliary draws apart from map replicates.
const UNIFORM_OFFSET: u64 = 1 << 40;
const ACCEPT_OFFSET: u64 = 2 << 40;

/// Radii of the growth fit and the radius of the boundary-shape test.
const K_MIN: u32 = 5;
const K_MAX: u32 = 25;
const K_SHAPE: u32 = 10;
const DEFAULT_SCALING_FACES: usize = 100_000;

/// Number of rooted planar quadrangulations with `n` faces,
/// `2 3^n (2n)! / (n! (n+2)!)`.
pub(crate) fn rooted_count(n: u32) -> u64 {
    let num: u128 = ((n + 1)..=(2 * n)).map(u128::from).product();
    let den: u128 = (1..=(n + 2)).map(u128::from).product();
    (2 * 3u128.pow(n) * num / den) as u64
}

/// Invariant violations of one map: face degree, Euler relation,
/// bipartite distances, labels equal to distances, rotation system.
fn violations(tree: &LabeledTree, q: &Quadrangulation, n: usize) -> [u64; 5] {
    let face = q
        .faces
        .iter()
        .filter(|f| (0..4).any(|k| q.phi(f[k]) != f[(k + 1) % 4]) || q.phi(f[3]) != f[0])
        .count() as u64
        + u64::from(q.n_faces() != n);
    let euler = u64::from(q.n_vertices as i64 - q.n_edges() as i64 + q.n_faces() as i64 != 2);
    let bipartite = q
        .edge_list()
        .iter()
        .filter(|&&(u, v)| q.dist[u as usize].abs_diff(q.dist[v as usize]) != 1)
        .count() as u64;
    let labels = tree.distances();
    // Tree vertices keep their numbers; the extra vertex is the source.
    let label = q.dist.iter().zip(&labels).filter(|(a, b)| a != b).count() as u64
        + u64::from(q.dist.len() != labels.len() + 1)
        + u64::from(q.source as usize != labels.len() || q.dist.last() != Some(&0));
    let rotation = u64::from(q.validate().is_err());
    [face, euler, bipartite, label, rotation]
}

pub(super) fn quad_exactness(spec: &SuiteSpec) -> AppResult<Outcome> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();

    let mut oracles = BTreeMap::new();
    for n in 1..=ORACLE_MAX {
        let oracle = rooted_quadrangulations(n)?;
        let trees = labeled_trees(n, TreeVariant::WellLabeled);
        let mut image = BTreeSet::new();
        let mut duplicates = 0u64;
        for t in &trees {
            if !image.insert(schaeffer(t)?.canonical_code()) {
                duplicates += 1;
            }
        }
        let mismatch = image.symmetric_difference(&oracle).count() as u64 + duplicates;
        checks.push(Check::count(
            format!("bijection onto rooted maps, n={n}"),
            mismatch,
        ));
        checks.push(Check::count(
            format!("rooted map count, n={n}"),
            (oracle.len() as u64).abs_diff(rooted_count(n as u32)),
        ));
        oracles.insert(n, oracle);
    }

    let n_faces = spec.params.n_faces.unwrap_or(INVARIANT_FACES);
    let seed = spec.seed;
    let per_map = ensemble(spec.samples, |i| {
        let (tree, q) = sample_map(n_faces, seed, i)?;
        Ok(violations(&tree, &q, n_faces))
    })?;
    let names = [
        "face degree 4",
        "Euler relation",
        "bipartite distances",
        "labels equal distances",
        "rotation system",
    ];
    for (k, name) in names.iter().enumerate() {
        let total = per_map.iter().map(|v| v[k]).sum();
        checks.push(Check::count(
            format!("{name} on {} maps, n={n_faces}", spec.samples),
            total,
        ));
    }

    for (&n, oracle) in &oracles {
        if n == ORACLE_MAX {
            continue;
        }
        let index: BTreeMap<&Vec<u32>, usize> =
            oracle.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let draws = DRAWS_PER_MAP * oracle.len() as u64;
        let codes = ensemble(draws, |i| {
            let mut rng = stream(seed, Lane::Tree, UNIFORM_OFFSET + ((n as u64) << 32) + i);
            let t = sample_labeled_tree_with(
                &mut rng,
                n,
                TreeVariant::WellLabeled,
                default_attempts(n),
            )?;
            Ok(schaeffer(&t)?.canonical_code())
        })?;
        let mut counts = vec![0u64; oracle.len()];
        let mut stray = 0u64;
        for c in &codes {
            match index.get(c) {
                Some(&k) => counts[k] += 1,
                None => stray += 1,
            }
        }
        checks.push(Check::count(
            format!("sampled maps outside the oracle, n={n}"),
            stray,
        ));
        if counts.len() > 1 {
            let r = chi2_uniform(&counts)?;
            checks.push(Check::chi2(
                format!("uniformity over {} rooted maps, n={n}", counts.len()),
                &r,
                spec.tolerance.chi2_level,
            ));
        }
    }

    let accepted = ensemble(ACCEPT_TRIALS, |i| {
        let mut rng = stream(seed, Lane::Tree, ACCEPT_OFFSET + i);
        Ok(sample_labeled_tree_with(&mut rng, ACCEPT_EDGES, TreeVariant::WellLabeled, 1).is_ok())
    })?;
    let est = accepted
        .iter()
        .map(|&a| f64::from(u8::from(a)))
        .collect::<Moments>()
        .estimate();
    checks.push(Check::mean(
        format!("rejection acceptance rate, n={ACCEPT_EDGES}"),
        est.mean,
        est.stderr,
        2.0 / (ACCEPT_EDGES as f64 + 2.0),
        spec.tolerance.sigmas,
        0.0,
    ));
    notes.push(format!(
        "{DRAWS_PER_MAP} draws per rooted map in the uniformity test"
    ));
    Ok(Outcome { checks, notes })
}

pub(super) fn hull_scaling(spec: &SuiteSpec) -> AppResult<Outcome> {
    let n_faces = spec.params.n_faces.unwrap_or(DEFAULT_SCALING_FACES);
    let seed = spec.seed;
    let series = ensemble(spec.samples, |i| {
        sample_hull_series(n_faces, K_MAX, seed, i)
    })?;
    let grid: Vec<u32> = (K_MIN..=K_MAX).collect();
    let stats = growth_stats_from(&series, &grid)?;
    let mut checks = Vec::new();
    checks.push(Check::range(
        "hull growth exponent",
        stats.slope.unwrap_or(f64::NAN),
        3.5,
        4.5,
    ));

    let log_fit = |f: &dyn Fn(&bphull_core::planar_maps::growth::GrowthRow) -> f64| {
        let pts: Vec<(f64, f64)> = stats
            .rows
            .iter()
            .filter(|r| f(r) > 0.0)
            .map(|r| ((r.k as f64).ln(), f(r).ln()))
            .collect();
        least_squares_slope(&pts).unwrap_or(f64::NAN)
    };
    checks.push(
        Check::range(
            "boundary growth exponent",
            log_fit(&|r| r.boundary_edges.mean),
            1.5,
            2.5,
        )
        .informational(),
    );
    checks.push(
        Check::range(
            "ball growth exponent",
            log_fit(&|r| r.ball_faces.mean),
            3.5,
            4.5,
        )
        .informational(),
    );
    let head: Vec<u32> = (K_MIN..=K_MIN + 7).collect();
    let local = growth_stats_from(&series, &head)?.slope.unwrap_or(f64::NAN);
    checks.push(
        Check::range(
            format!("hull growth exponent over k={K_MIN}..{}", K_MIN + 7),
            local,
            3.5,
            4.5,
        )
        .informational(),
    );

    if let Some((_, scaled)) = stats.rescaled_boundary.iter().find(|(k, _)| *k == K_SHAPE) {
        let r = ks_one_sample(scaled, |z| boundary_length_cdf(1.0, z))?;
        checks.push(Check::ks(
            format!("rescaled boundary at k={K_SHAPE} against Gamma(3/2)"),
            &r,
            spec.tolerance.ks_level,
        ));
    }
    let last = stats
        .rows
        .last()
        .map(|r| r.hull_faces.mean / n_faces as f64)
        .unwrap_or(f64::NAN);
    let notes = vec![
        format!("{n_faces} faces, radii {K_MIN}..={K_MAX}"),
        format!(
            "mean hull at k={K_MAX} covers {:.1}% of the map",
            100.0 * last
        ),
    ];
    Ok(Outcome { checks, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::run_suite;

    #[test]
    fn rooted_counts() {
        assert_eq!([1, 2, 3, 4, 5].map(rooted_count), [2, 9, 54, 378, 2916]);
    }

    #[test]
    fn sampled_maps_have_no_violations() {
        for i in 0..5 {
            let (t, q) = sample_map(200, 4, i).unwrap();
            assert_eq!(violations(&t, &q, 200), [0; 5]);
        }
    }

    #[test]
    fn broken_labels_are_counted() {
        let (mut t, q) = sample_map(50, 4, 0).unwrap();
        t.labels[3] += 7;
        assert!(violations(&t, &q, 50)[3] > 0);
        assert_eq!(violations(&t, &q, 51)[0], 1);
    }

    #[test]
    fn small_scaling_suite_runs() {
        let mut spec = SuiteSpec::new("hull-scaling", 2, 2);
        spec.params.n_faces = Some(50_000);
        let r = run_suite(&spec).unwrap();
        assert!(r.checks.iter().any(|c| c.name == "hull growth exponent"));
    }
}

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};

use super::quad::{opposite, Quadrangulation};
use super::tree::LabeledTree;

/// Sizes of the ball and hull of radius `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullRow {
    pub k: u32,
    pub ball_faces: u64,
    pub hull_faces: u64,
    pub hull_vertices: u64,
    pub boundary_edges: u64,
}

/// Hull sizes for `k = 1..=k_max` on one map.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HullSeries {
    pub rows: Vec<HullRow>,
}

impl HullSeries {
    pub fn row(&self, k: u32) -> Option<&HullRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn validate(&self) -> Result<()> {
        for r in &self.rows {
            ensure!(
                r.ball_faces <= r.hull_faces,
                Structural,
                "k={}: ball larger than hull",
                r.k
            );
            ensure!(
                r.hull_vertices >= r.hull_faces.min(1)
                    && r.hull_vertices <= r.hull_faces + r.boundary_edges + 2,
                Structural,
                "k={}: {} hull vertices for {} faces and {} boundary edges",
                r.k,
                r.hull_vertices,
                r.hull_faces,
                r.boundary_edges
            );
        }
        for w in self.rows.windows(2) {
            ensure!(
                w[0].hull_faces <= w[1].hull_faces,
                Structural,
                "hull shrinks at k={}",
                w[1].k
            );
        }
        Ok(())
    }
}

/// Stand-in for the point at infinity: the vertex farthest from the source,
/// smallest id among ties.
pub fn far_marker(q: &Quadrangulation) -> u32 {
    let mut best = 0u32;
    for (v, &d) in q.dist.iter().enumerate() {
        if d > q.dist[best as usize] {
            best = v as u32;
        }
    }
    best
}

fn face_min_dist(q: &Quadrangulation) -> Vec<u32> {
    q.faces
        .iter()
        .map(|f| {
            f.iter()
                .map(|&d| q.dist[q.origin[d as usize] as usize])
                .min()
                .expect("faces have four darts")
        })
        .collect()
}

/// Faces incident to a vertex at distance `<= k - 1` from the source.
pub fn ball(q: &Quadrangulation, k: u32) -> Vec<bool> {
    face_min_dist(q).into_iter().map(|m| m + 1 <= k).collect()
}

/// Adds to `set` every complement component except the one holding faces
/// incident to `marker`. If all faces around `marker` are already in `set`,
/// the result is the whole map.
pub fn fill(q: &Quadrangulation, set: &[bool], marker: u32) -> Vec<bool> {
    let nf = q.n_faces();
    let mut outer = vec![false; nf];
    let mut queue = VecDeque::new();
    for (d, &o) in q.origin.iter().enumerate() {
        if o == marker {
            let f = q.dart_face[d] as usize;
            if !set[f] && !outer[f] {
                outer[f] = true;
                queue.push_back(f);
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        for &d in &q.faces[f] {
            let g = q.dart_face[opposite(d) as usize] as usize;
            if !set[g] && !outer[g] {
                outer[g] = true;
                queue.push_back(g);
            }
        }
    }
    outer.into_iter().map(|o| !o).collect()
}

/// Face, vertex and boundary-edge counts of a face set.
pub fn measure(q: &Quadrangulation, k: u32, ball: &[bool], hull: &[bool]) -> HullRow {
    let mut touched = vec![false; q.n_vertices];
    let mut boundary = 0u64;
    for (f, darts) in q.faces.iter().enumerate() {
        if !hull[f] {
            continue;
        }
        for &d in darts {
            touched[q.origin[d as usize] as usize] = true;
            if !hull[q.dart_face[opposite(d) as usize] as usize] {
                boundary += 1;
            }
        }
    }
    HullRow {
        k,
        ball_faces: ball.iter().filter(|&&b| b).count() as u64,
        hull_faces: hull.iter().filter(|&&b| b).count() as u64,
        hull_vertices: touched.iter().filter(|&&b| b).count() as u64,
        boundary_edges: boundary,
    }
}

/// Ball and hull sizes for every `k <= k_max`, against the far marker.
pub fn hull_series(q: &Quadrangulation, k_max: u32) -> Result<HullSeries> {
    let top = q.max_dist();
    ensure!(
        k_max >= 1 && k_max < top,
        Domain,
        "k_max must lie in [1, {top}), got {k_max}"
    );
    let marker = far_marker(q);
    let mins = face_min_dist(q);
    let mut rows = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let b: Vec<bool> = mins.iter().map(|&m| m + 1 <= k).collect();
        let h = fill(q, &b, marker);
        rows.push(measure(q, k, &b, &h));
    }
    Ok(HullSeries { rows })
}

/// `m(u)`: smallest distance label on the tree path from `u` to `marker`.
pub fn min_label_toward(tree: &LabeledTree, marker: u32) -> Vec<u32> {
    let nv = tree.n_vertices();
    let dist = tree.distances();
    let parent = tree.parents();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); nv];
    for (v, &p) in parent.iter().enumerate().skip(1) {
        adj[v].push(p);
        adj[p as usize].push(v as u32);
    }
    let mut m = vec![u32::MAX; nv];
    m[marker as usize] = dist[marker as usize];
    let mut queue = VecDeque::from([marker]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v as usize] {
            if m[w as usize] == u32::MAX {
                m[w as usize] = dist[w as usize].min(m[v as usize]);
                queue.push_back(w);
            }
        }
    }
    m
}

/// Outcome of comparing hull membership with the tree bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SandwichReport {
    pub checked: u64,
    /// Vertices with `m(u) <= k` missing from the hull.
    pub inner_violations: u64,
    /// Vertices with `m(u) >= k + 3` found in the hull.
    pub outer_violations: u64,
}

/// Checks `m(u) <= k => u in hull` and `m(u) >= k + 3 => u not in hull` for
/// tree vertices farther than `2k` from the marker.
pub fn sandwich_check(q: &Quadrangulation, tree: &LabeledTree, k: u32) -> Result<SandwichReport> {
    ensure!(
        q.n_vertices == tree.n_vertices() + 1,
        Domain,
        "map and tree sizes disagree"
    );
    let marker = far_marker(q);
    ensure!(
        (marker as usize) < tree.n_vertices(),
        Domain,
        "marker is not a tree vertex"
    );
    let b = ball(q, k);
    let h = fill(q, &b, marker);
    let mut in_hull = vec![false; q.n_vertices];
    for (f, darts) in q.faces.iter().enumerate() {
        if h[f] {
            for &d in darts {
                in_hull[q.origin[d as usize] as usize] = true;
            }
        }
    }
    let m = min_label_toward(tree, marker);
    let from_marker = q.bfs_from(marker);
    let mut report = SandwichReport::default();
    for u in 0..tree.n_vertices() {
        if from_marker[u] <= 2 * k {
            continue;
        }
        report.checked += 1;
        if m[u] <= k && !in_hull[u] {
            report.inner_violations += 1;
        }
        if m[u] >= k + 3 && in_hull[u] {
            report.outer_violations += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planar_maps::quad::schaeffer;
    use crate::planar_maps::tree::{sample_labeled_tree_with, TreeVariant};
    use crate::rng::{stream, Lane};

    fn sample(n: usize, i: u64) -> (LabeledTree, Quadrangulation) {
        let mut rng = stream(21, Lane::Tree, i);
        let t = sample_labeled_tree_with(&mut rng, n, TreeVariant::WellLabeled, 1_000_000).unwrap();
        let q = schaeffer(&t).unwrap();
        (t, q)
    }

    #[test]
    fn single_face_ball_is_everything() {
        let t = LabeledTree::new(vec![true, false], vec![1, 2], TreeVariant::WellLabeled).unwrap();
        let q = schaeffer(&t).unwrap();
        let b = ball(&q, 1);
        assert_eq!(b, vec![true]);
        assert_eq!(fill(&q, &b, far_marker(&q)), vec![true]);
    }

    #[test]
    fn hull_contains_ball_and_is_idempotent() {
        for i in 0..10 {
            let (_, q) = sample(400, i);
            let marker = far_marker(&q);
            let series = hull_series(&q, q.max_dist() - 1).unwrap();
            series.validate().unwrap();
            for k in 1..q.max_dist() {
                let b = ball(&q, k);
                let h = fill(&q, &b, marker);
                assert!(b.iter().zip(&h).all(|(&x, &y)| !x || y));
                assert_eq!(fill(&q, &h, marker), h);
            }
        }
    }

    #[test]
    fn k_max_must_stay_below_radius() {
        let (_, q) = sample(100, 0);
        assert!(hull_series(&q, q.max_dist()).is_err());
        assert!(hull_series(&q, 0).is_err());
    }

    #[test]
    fn sandwich_bounds_hold() {
        for i in 0..10 {
            let (t, q) = sample(2000, i);
            for k in 1..q.max_dist() / 3 {
                let r = sandwich_check(&q, &t, k).unwrap();
                assert_eq!(r.inner_violations, 0, "map {i}, k={k}: {r:?}");
                assert_eq!(r.outer_violations, 0, "map {i}, k={k}: {r:?}");
            }
        }
    }
}

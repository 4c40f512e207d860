use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{ensure, Error, Result};

/// Which labelings are admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum TreeVariant {
    /// Root label 1, all labels `>= 1`.
    WellLabeled,
    /// Root label 1, no positivity constraint; distances are `label - min + 1`.
    FreePointed,
}

/// Plane tree with integer labels.
///
/// Vertices are numbered in depth-first (preorder) order, root 0. The shape is
/// stored as its Dyck word: `true` goes down to a new child, `false` back up.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledTree {
    pub dyck: Vec<bool>,
    pub labels: Vec<i64>,
    pub variant: TreeVariant,
}

impl LabeledTree {
    /// Builds and validates a tree from its Dyck word and preorder labels.
    pub fn new(dyck: Vec<bool>, labels: Vec<i64>, variant: TreeVariant) -> Result<Self> {
        let t = Self {
            dyck,
            labels,
            variant,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn n_edges(&self) -> usize {
        self.dyck.len() / 2
    }

    pub fn n_vertices(&self) -> usize {
        self.n_edges() + 1
    }

    /// Parent of each vertex (`u32::MAX` for the root).
    pub fn parents(&self) -> Vec<u32> {
        let mut parent = vec![u32::MAX; self.n_vertices()];
        let mut stack = vec![0u32];
        let mut next = 1u32;
        for &down in &self.dyck {
            if down {
                parent[next as usize] = *stack.last().expect("stack holds the root");
                stack.push(next);
                next += 1;
            } else {
                stack.pop();
            }
        }
        parent
    }

    /// Vertex at each of the `2n` corners in contour order; corner 0 is the
    /// root corner.
    pub fn contour(&self) -> Vec<u32> {
        let mut out = Vec::with_capacity(self.dyck.len());
        let mut stack = vec![0u32];
        let mut next = 1u32;
        for &down in &self.dyck {
            out.push(*stack.last().expect("contour stays inside the tree"));
            if down {
                stack.push(next);
                next += 1;
            } else {
                stack.pop();
            }
        }
        out
    }

    pub fn min_label(&self) -> i64 {
        self.labels.iter().copied().min().unwrap_or(1)
    }

    /// Distance from the distinguished vertex encoded by the labels:
    /// `label - min + 1`, which is the label itself for well-labeled trees.
    pub fn distances(&self) -> Vec<u32> {
        let m = self.min_label();
        self.labels.iter().map(|&l| (l - m + 1) as u32).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_edges();
        ensure!(
            n >= 1 && self.dyck.len() == 2 * n,
            Structural,
            "tree needs an even, nonempty Dyck word"
        );
        ensure!(
            self.labels.len() == n + 1,
            Structural,
            "need {} labels, got {}",
            n + 1,
            self.labels.len()
        );
        let mut h = 0i64;
        for &d in &self.dyck {
            h += if d { 1 } else { -1 };
            ensure!(h >= 0, Structural, "Dyck word goes below zero");
        }
        ensure!(h == 0, Structural, "Dyck word does not return to zero");
        ensure!(
            self.labels[0] == 1,
            Structural,
            "root label must be 1, got {}",
            self.labels[0]
        );
        for (v, &p) in self.parents().iter().enumerate().skip(1) {
            let d = self.labels[v] - self.labels[p as usize];
            ensure!(
                d.abs() <= 1,
                Structural,
                "labels of {v} and its parent differ by {d}"
            );
        }
        if self.variant == TreeVariant::WellLabeled {
            ensure!(
                self.min_label() >= 1,
                Structural,
                "well-labeled tree has a label below 1"
            );
        }
        Ok(())
    }
}

/// Uniform Dyck word with `n` up-steps, via the cycle lemma.
pub fn uniform_dyck<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<bool> {
    let len = 2 * n + 1;
    let mut steps: Vec<bool> = (0..len).map(|i| i < n).collect();
    for i in (1..len).rev() {
        let j = rng.random_range(0..=i);
        steps.swap(i, j);
    }
    // The rotation starting after the first global minimum of the partial
    // sums is a Dyck word followed by one final down-step.
    let (mut h, mut min, mut at) = (0i64, 0i64, 0usize);
    for (i, &s) in steps.iter().enumerate() {
        h += if s { 1 } else { -1 };
        if h < min {
            min = h;
            at = i + 1;
        }
    }
    let mut out = Vec::with_capacity(2 * n);
    out.extend_from_slice(&steps[at..]);
    out.extend_from_slice(&steps[..at]);
    out.pop();
    out
}

/// Labels in preorder with independent uniform `{-1, 0, 1}` increments.
/// With `floor = Some(1)` gives up (returning `None`) as soon as a label drops
/// below 1.
fn labels_for<R: Rng + ?Sized>(rng: &mut R, dyck: &[bool], floor: Option<i64>) -> Option<Vec<i64>> {
    let n = dyck.len() / 2;
    let mut labels = Vec::with_capacity(n + 1);
    labels.push(1i64);
    let mut stack = vec![0usize];
    for &down in dyck {
        if down {
            let parent = labels[*stack.last().expect("stack holds the root")];
            let inc: i64 = rng.random_range(-1..=1);
            let l = parent + inc;
            if floor.is_some_and(|f| l < f) {
                return None;
            }
            stack.push(labels.len());
            labels.push(l);
        } else {
            stack.pop();
        }
    }
    Some(labels)
}

/// Uniform labeled tree with `n_edges` edges. The well-labeled variant
/// rejects whole (tree, labels) draws until all labels are positive, within
/// `max_attempts`.
pub fn sample_labeled_tree_with<R: Rng + ?Sized>(
    rng: &mut R,
    n_edges: usize,
    variant: TreeVariant,
    max_attempts: u64,
) -> Result<LabeledTree> {
    ensure!(n_edges >= 1, Domain, "need at least one edge");
    ensure!(
        n_edges < u32::MAX as usize / 4,
        Domain,
        "tree too large: {n_edges} edges"
    );
    match variant {
        TreeVariant::FreePointed => {
            let dyck = uniform_dyck(rng, n_edges);
            let labels = labels_for(rng, &dyck, None).expect("unconstrained labels always succeed");
            Ok(LabeledTree {
                dyck,
                labels,
                variant,
            })
        }
        TreeVariant::WellLabeled => {
            for _ in 0..max_attempts {
                let dyck = uniform_dyck(rng, n_edges);
                if let Some(labels) = labels_for(rng, &dyck, Some(1)) {
                    return Ok(LabeledTree {
                        dyck,
                        labels,
                        variant,
                    });
                }
            }
            Err(Error::Resource(alloc::format!(
                "no well-labeled tree with {n_edges} edges in {max_attempts} attempts"
            )))
        }
    }
}

/// Rejection budget: the acceptance rate is `2/(n+2)`, so this allows about
/// 25 times the expected number of attempts.
pub fn default_attempts(n_edges: usize) -> u64 {
    25 * (n_edges as u64 + 2) / 2 + 100
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Lane};

    #[test]
    fn dyck_words_are_valid() {
        let mut rng = stream(1, Lane::Test, 0);
        for n in 1..40 {
            let d = uniform_dyck(&mut rng, n);
            let t = LabeledTree {
                labels: vec![1; n + 1],
                dyck: d,
                variant: TreeVariant::FreePointed,
            };
            t.validate().unwrap();
        }
    }

    #[test]
    fn single_edge_labels() {
        let mut rng = stream(2, Lane::Test, 0);
        let mut seen = [0u32; 3];
        for _ in 0..3000 {
            let t = sample_labeled_tree_with(&mut rng, 1, TreeVariant::FreePointed, 1).unwrap();
            seen[t.labels[1] as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c > 900), "{seen:?}");
        for _ in 0..200 {
            let t = sample_labeled_tree_with(&mut rng, 1, TreeVariant::WellLabeled, 1000).unwrap();
            assert!(t.labels[1] == 1 || t.labels[1] == 2);
        }
    }

    #[test]
    fn contour_and_parents_agree() {
        let mut rng = stream(3, Lane::Test, 0);
        let t = sample_labeled_tree_with(&mut rng, 50, TreeVariant::WellLabeled, 10_000).unwrap();
        t.validate().unwrap();
        let c = t.contour();
        let p = t.parents();
        assert_eq!(c.len(), 100);
        assert_eq!(c[0], 0);
        for w in c.windows(2) {
            let (a, b) = (w[0], w[1]);
            assert!(p[b as usize] == a || p[a as usize] == b);
        }
    }

    #[test]
    fn rejection_budget() {
        let mut rng = stream(4, Lane::Test, 0);
        let r = sample_labeled_tree_with(&mut rng, 5000, TreeVariant::WellLabeled, 1);
        // One attempt at n = 5000 succeeds with probability 2/5002.
        if let Err(e) = r {
            assert!(matches!(e, Error::Resource(_)));
        }
    }
}

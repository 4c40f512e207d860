//! Exhaustive enumeration for small sizes, used as an oracle.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Result};

use super::quad::canonical_code;
use super::tree::{LabeledTree, TreeVariant};

/// All Dyck words with `n` up-steps, in lexicographic order (`true` first).
pub fn dyck_words(n: usize) -> Vec<Vec<bool>> {
    fn go(n: usize, up: usize, down: usize, cur: &mut Vec<bool>, out: &mut Vec<Vec<bool>>) {
        if up == n && down == n {
            out.push(cur.clone());
            return;
        }
        if up < n {
            cur.push(true);
            go(n, up + 1, down, cur, out);
            cur.pop();
        }
        if down < up {
            cur.push(false);
            go(n, up, down + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, 0, 0, &mut Vec::new(), &mut out);
    out
}

/// Every labeled tree with `n` edges, root label 1, admissible for `variant`.
pub fn labeled_trees(n: usize, variant: TreeVariant) -> Vec<LabeledTree> {
    let mut out = Vec::new();
    for dyck in dyck_words(n) {
        let parent = LabeledTree {
            dyck: dyck.clone(),
            labels: vec![1; n + 1],
            variant,
        }
        .parents();
        for code in 0..3usize.pow(n as u32) {
            let mut labels = vec![1i64; n + 1];
            let mut c = code;
            for v in 1..=n {
                labels[v] = labels[parent[v] as usize] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if variant == TreeVariant::WellLabeled && labels.iter().any(|&l| l < 1) {
                continue;
            }
            out.push(LabeledTree {
                dyck: dyck.clone(),
                labels,
                variant,
            });
        }
    }
    out
}

/// Canonical codes of all rooted planar quadrangulations with `n <= 4` faces,
/// found by gluing the sides of `n` labeled squares in every possible way and
/// keeping the connected gluings of genus 0.
pub fn rooted_quadrangulations(n: usize) -> Result<BTreeSet<Vec<u32>>> {
    ensure!(
        (1..=4).contains(&n),
        Domain,
        "brute-force enumeration supports 1..=4 faces, got {n}"
    );
    let nd = 4 * n;
    let mut alpha = vec![u32::MAX; nd];
    let mut out = BTreeSet::new();
    glue(&mut alpha, n, &mut out);
    Ok(out)
}

fn phi(d: u32) -> u32 {
    4 * (d / 4) + (d + 1) % 4
}

fn glue(alpha: &mut [u32], n: usize, out: &mut BTreeSet<Vec<u32>>) {
    let Some(first) = alpha.iter().position(|&a| a == u32::MAX) else {
        record(alpha, n, out);
        return;
    };
    for other in first + 1..alpha.len() {
        if alpha[other] != u32::MAX {
            continue;
        }
        alpha[first] = other as u32;
        alpha[other] = first as u32;
        glue(alpha, n, out);
        alpha[first] = u32::MAX;
        alpha[other] = u32::MAX;
    }
}

fn record(alpha: &[u32], n: usize, out: &mut BTreeSet<Vec<u32>>) {
    let nd = alpha.len();
    // Vertex rotation is sigma = phi . alpha, so that phi = sigma . alpha.
    let sigma: Vec<u32> = (0..nd).map(|d| phi(alpha[d])).collect();
    let mut seen = vec![false; nd];
    let mut vertices = 0;
    for d in 0..nd {
        if seen[d] {
            continue;
        }
        vertices += 1;
        let mut e = d;
        while !seen[e] {
            seen[e] = true;
            e = sigma[e] as usize;
        }
    }
    if vertices != n + 2 {
        return;
    }
    let code = canonical_code(&sigma, |d| alpha[d as usize], 0);
    // The breadth-first numbering reaches every dart only if the gluing is connected.
    if code.len() == 2 * nd {
        out.insert(code);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_counts() {
        let counts: Vec<usize> = (1..=5).map(|n| dyck_words(n).len()).collect();
        assert_eq!(counts, vec![1, 2, 5, 14, 42]);
    }

    #[test]
    fn well_labeled_counts() {
        // 2 * 3^n (2n)! / (n! (n+2)!)
        let counts: Vec<usize> = (1..=4)
            .map(|n| labeled_trees(n, TreeVariant::WellLabeled).len())
            .collect();
        assert_eq!(counts, vec![2, 9, 54, 378]);
        assert_eq!(labeled_trees(3, TreeVariant::FreePointed).len(), 5 * 27);
    }

    #[test]
    fn small_gluing_counts() {
        let counts: Vec<usize> = (1..=3)
            .map(|n| rooted_quadrangulations(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![2, 9, 54]);
        assert!(rooted_quadrangulations(5).is_err());
    }
}

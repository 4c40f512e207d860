use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure, Error, Result};

use super::tree::LabeledTree;

/// A rooted planar map with quadrangular faces, stored as a rotation system.
///
/// Darts come in pairs `2e, 2e+1` (the two orientations of edge `e`), so the
/// opposite dart is `d ^ 1`. `sigma[d]` is the next dart around the origin of
/// `d`, and the face permutation is `phi(d) = sigma(d ^ 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quadrangulation {
    pub n_vertices: usize,
    /// The distinguished vertex from which distances are measured.
    pub source: u32,
    pub origin: Vec<u32>,
    pub sigma: Vec<u32>,
    /// Darts of each face, in face order.
    pub faces: Vec<[u32; 4]>,
    pub dart_face: Vec<u32>,
    pub root_dart: u32,
    /// Graph distance from `source`.
    pub dist: Vec<u32>,
}

#[inline]
pub fn opposite(d: u32) -> u32 {
    d ^ 1
}

impl Quadrangulation {
    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.origin.len() / 2
    }

    pub fn phi(&self, d: u32) -> u32 {
        self.sigma[opposite(d) as usize]
    }

    pub fn target(&self, d: u32) -> u32 {
        self.origin[opposite(d) as usize]
    }

    /// Undirected edges as `(u, v)` vertex pairs, one per dart pair.
    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        (0..self.n_edges())
            .map(|e| (self.origin[2 * e], self.origin[2 * e + 1]))
            .collect()
    }

    /// The four vertices of each face, in face order.
    pub fn face_vertices(&self) -> Vec<[u32; 4]> {
        self.faces
            .iter()
            .map(|f| f.map(|d| self.origin[d as usize]))
            .collect()
    }

    pub fn max_dist(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Builds faces from `sigma` and computes distances from `source`.
    pub(crate) fn assemble(
        n_vertices: usize,
        source: u32,
        origin: Vec<u32>,
        sigma: Vec<u32>,
        root_dart: u32,
    ) -> Result<Self> {
        let nd = origin.len();
        let mut dart_face = vec![u32::MAX; nd];
        let mut faces = Vec::with_capacity(nd / 4);
        for start in 0..nd as u32 {
            if dart_face[start as usize] != u32::MAX {
                continue;
            }
            let id = faces.len() as u32;
            let mut face = [0u32; 4];
            let mut d = start;
            let mut len = 0usize;
            loop {
                ensure!(
                    len < 4,
                    Structural,
                    "face through dart {start} has degree above 4"
                );
                face[len] = d;
                dart_face[d as usize] = id;
                len += 1;
                d = sigma[opposite(d) as usize];
                if d == start {
                    break;
                }
            }
            ensure!(
                len == 4,
                Structural,
                "face through dart {start} has degree {len}"
            );
            faces.push(face);
        }
        let mut q = Self {
            n_vertices,
            source,
            origin,
            sigma,
            faces,
            dart_face,
            root_dart,
            dist: Vec::new(),
        };
        q.dist = q.bfs_from(source);
        Ok(q)
    }

    /// Darts out of each vertex, as CSR offsets into a dart array.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<u32>) {
        let mut deg = vec![0usize; self.n_vertices + 1];
        for &o in &self.origin {
            deg[o as usize + 1] += 1;
        }
        for i in 0..self.n_vertices {
            deg[i + 1] += deg[i];
        }
        let mut fill = deg.clone();
        let mut darts = vec![0u32; self.origin.len()];
        for (d, &o) in self.origin.iter().enumerate() {
            darts[fill[o as usize]] = d as u32;
            fill[o as usize] += 1;
        }
        (deg, darts)
    }

    /// Graph distances from `from`; unreachable vertices get `u32::MAX`.
    pub fn bfs_from(&self, from: u32) -> Vec<u32> {
        let (off, darts) = self.adjacency();
        let mut dist = vec![u32::MAX; self.n_vertices];
        let mut queue = VecDeque::new();
        dist[from as usize] = 0;
        queue.push_back(from);
        while let Some(v) = queue.pop_front() {
            for &d in &darts[off[v as usize]..off[v as usize + 1]] {
                let w = self.target(d);
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Face degrees, Euler count for `n` faces, connectivity and
    /// bipartiteness (every edge joins distances differing by exactly 1).
    pub fn validate(&self) -> Result<()> {
        let n = self.n_faces();
        ensure!(
            self.n_edges() == 2 * n,
            Structural,
            "{} edges for {n} faces",
            self.n_edges()
        );
        ensure!(
            self.n_vertices == n + 2,
            Structural,
            "Euler relation fails: {} vertices for {n} faces",
            self.n_vertices
        );
        ensure!(
            self.dist.iter().all(|&d| d != u32::MAX),
            Structural,
            "map is not connected"
        );
        ensure!(
            self.dist[self.source as usize] == 0,
            Structural,
            "source distance is not 0"
        );
        for (u, v) in self.edge_list() {
            let (a, b) = (self.dist[u as usize], self.dist[v as usize]);
            ensure!(
                a.abs_diff(b) == 1,
                Structural,
                "edge {u}-{v} joins distances {a} and {b}"
            );
        }
        // Each vertex's rotation must be a single cycle of sigma over its darts.
        let mut seen = vec![false; self.origin.len()];
        let mut cycles = 0usize;
        for d in 0..self.origin.len() {
            if seen[d] {
                continue;
            }
            cycles += 1;
            let mut e = d as u32;
            loop {
                seen[e as usize] = true;
                ensure!(
                    self.origin[e as usize] == self.origin[d],
                    Structural,
                    "rotation leaves vertex"
                );
                e = self.sigma[e as usize];
                if e as usize == d {
                    break;
                }
            }
        }
        ensure!(
            cycles == self.n_vertices,
            Structural,
            "{cycles} rotation cycles for {} vertices",
            self.n_vertices
        );
        Ok(())
    }

    /// Canonical code of the rooted map: darts numbered in breadth-first order
    /// from the root using `sigma` then the opposite dart, then listed as
    /// `(number of sigma(d), number of opposite(d))`. Two rooted maps are
    /// isomorphic exactly when their codes agree.
    pub fn canonical_code(&self) -> Vec<u32> {
        canonical_code(&self.sigma, |d| opposite(d), self.root_dart)
    }
}

/// Canonical code of the rooted map generated by `sigma` and the involution
/// `alpha`, rooted at `root`.
pub fn canonical_code(sigma: &[u32], alpha: impl Fn(u32) -> u32, root: u32) -> Vec<u32> {
    let nd = sigma.len();
    let mut num = vec![u32::MAX; nd];
    let mut order = Vec::with_capacity(nd);
    num[root as usize] = 0;
    order.push(root);
    let mut head = 0;
    while head < order.len() {
        let d = order[head];
        head += 1;
        for e in [sigma[d as usize], alpha(d)] {
            if num[e as usize] == u32::MAX {
                num[e as usize] = order.len() as u32;
                order.push(e);
            }
        }
    }
    let mut code = Vec::with_capacity(2 * order.len());
    for &d in &order {
        code.push(num[sigma[d as usize] as usize]);
        code.push(num[alpha(d) as usize]);
    }
    code
}

/// The Schaeffer map of a labeled tree.
///
/// Corners are visited in contour order starting from the first corner of
/// minimal label. A corner of minimal label is joined to the extra vertex;
/// any other corner is joined to the last preceding corner (cyclically) whose
/// label is one less. Tree vertices keep their preorder ids; the extra vertex
/// is `n + 1`. The root dart leaves the target of the root corner's arc and
/// points to the tree root.
pub fn schaeffer(tree: &LabeledTree) -> Result<Quadrangulation> {
    tree.validate()?;
    let n = tree.n_edges();
    let nc = 2 * n;
    let contour = tree.contour();
    let dist = tree.distances();
    let corner_label: Vec<u32> = contour.iter().map(|&v| dist[v as usize]).collect();
    let start = corner_label
        .iter()
        .position(|&l| l == 1)
        .expect("minimum label is 1 after the offset");
    let max_label = *dist.iter().max().expect("tree has vertices") as usize;

    // successor[i] = corner joined to corner i, or NONE for the extra vertex.
    const NONE: u32 = u32::MAX;
    let mut successor = vec![NONE; nc];
    let mut last_seen = vec![NONE; max_label + 1];
    for step in 0..nc {
        let i = (start + step) % nc;
        let l = corner_label[i] as usize;
        if l > 1 {
            let s = last_seen[l - 1];
            if s == NONE {
                return Err(Error::Structural(alloc::format!(
                    "corner {i} with label {l} has no predecessor"
                )));
            }
            successor[i] = s;
        }
        last_seen[l] = i as u32;
    }

    // Positions on a circle of circumference 4n: corner i at 2i, the extra
    // vertex just before the first minimal corner.
    let circ = 2 * nc as u64;
    let extra_pos = (2 * start as u64 + circ - 1) % circ;
    let corner_pos = |c: u32| 2 * c as u64;
    let rel = |from: u64, to: u64| (to + circ - from) % circ;

    let extra = (n + 1) as u32;
    let nd = 2 * nc;
    let mut origin = vec![0u32; nd];
    // Darts grouped by where they sit, each with its sort key.
    let mut at_corner: Vec<Vec<(u64, u32)>> = vec![Vec::new(); nc];
    let mut at_extra: Vec<(u64, u32)> = Vec::new();
    for i in 0..nc {
        let out = 2 * i as u32;
        let back = out + 1;
        origin[out as usize] = contour[i];
        let here = corner_pos(i as u32);
        match successor[i] {
            NONE => {
                origin[back as usize] = extra;
                at_corner[i].push((rel(here, extra_pos), out));
                at_extra.push((rel(extra_pos, here), back));
            }
            s => {
                origin[back as usize] = contour[s as usize];
                at_corner[i].push((rel(here, corner_pos(s)), out));
                at_corner[s as usize].push((rel(corner_pos(s), here), back));
            }
        }
    }

    // Around a tree vertex the corners come in contour order and, inside a
    // corner, arcs run from the side of the incoming tree edge to the side of
    // the outgoing one, i.e. by decreasing relative position.
    let mut sigma = vec![0u32; nd];
    let mut rotation: Vec<Vec<u32>> = vec![Vec::new(); n + 2];
    for (i, darts) in at_corner.iter_mut().enumerate() {
        darts.sort_unstable_by(|a, b| b.0.cmp(&a.0));
        rotation[contour[i] as usize].extend(darts.iter().map(|&(_, d)| d));
    }
    at_extra.sort_unstable_by(|a, b| b.0.cmp(&a.0));
    rotation[extra as usize].extend(at_extra.iter().map(|&(_, d)| d));
    for (v, rot) in rotation.iter().enumerate() {
        ensure!(
            !rot.is_empty(),
            Structural,
            "vertex {v} has no incident arc"
        );
        for (k, &d) in rot.iter().enumerate() {
            sigma[d as usize] = rot[(k + 1) % rot.len()];
        }
    }

    let q = Quadrangulation::assemble(n + 2, extra, origin, sigma, 1)?;
    for (v, &d) in dist.iter().enumerate() {
        ensure!(
            q.dist[v] == d,
            Structural,
            "vertex {v}: distance {} differs from label distance {d}",
            q.dist[v]
        );
    }
    Ok(q)
}

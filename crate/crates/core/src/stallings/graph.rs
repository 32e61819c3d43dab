//! Folded, based, edge-labelled core graphs.
//!
//! Labels are letter ordinals (`2*(g-1)` for a generator, `2*(g-1)+1` for its
//! inverse), so the same machinery serves subgroups of `F_m` for any `m`,
//! including the abstract free groups on a subgroup's own basis.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

/// A path label: a sequence of letter ordinals.
pub type Label = Vec<usize>;

pub(crate) fn inverse_label(path: &[usize]) -> Label {
    path.iter().rev().map(|&o| o ^ 1).collect()
}

pub(crate) fn reduce_label(path: impl IntoIterator<Item = usize>) -> Label {
    let mut out: Label = Vec::new();
    for o in path {
        if out.last() == Some(&(o ^ 1)) {
            out.pop();
        } else {
            out.push(o);
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Folds a labelled graph on `n` vertices. Returns the deterministic
/// transition table indexed by original vertex ids (only class
/// representatives carry edges) and the representative of every vertex.
pub(crate) fn fold_table(
    rank: usize,
    n: usize,
    edges: &[(usize, usize, usize)],
) -> (Vec<Vec<Option<usize>>>, Vec<usize>) {
    let mut uf = UnionFind::new(n);
    // Normalise to positive labels.
    let edges: Vec<(usize, usize, usize)> = edges
        .iter()
        .map(|&(u, o, v)| if o % 2 == 0 { (u, o, v) } else { (v, o ^ 1, u) })
        .collect();
    loop {
        let mut changed = false;
        let mut seen: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &(u, o, v) in &edges {
            for (x, lab, y) in [(u, o, v), (v, o ^ 1, u)] {
                let (rx, ry) = (uf.find(x), uf.find(y));
                match seen.get(&(rx, lab)).copied() {
                    Some(z) => {
                        if uf.union(z, ry) {
                            changed = true;
                        }
                    }
                    None => {
                        seen.insert((rx, lab), ry);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out = vec![vec![None; 2 * rank]; n];
    for &(u, o, v) in &edges {
        let (ru, rv) = (uf.find(u), uf.find(v));
        out[ru][o] = Some(rv);
        out[rv][o ^ 1] = Some(ru);
    }
    let roots = (0..n).map(|v| uf.find(v)).collect();
    (out, roots)
}

/// Index of a subgroup in its ambient free group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl Index {
    pub fn is_finite(self) -> bool {
        matches!(self, Index::Finite(_))
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Index::Finite(n) => Some(n),
            Index::Infinite => None,
        }
    }
}

impl std::fmt::Display for Index {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => write!(f, "INFINITE"),
        }
    }
}

impl Serialize for Index {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Index::Finite(n) => s.serialize_u64(*n as u64),
            Index::Infinite => s.serialize_str("INFINITE"),
        }
    }
}

/// Folded core graph with base vertex `0`, canonically numbered.
///
/// `out[v][o]` is the endpoint of the edge leaving `v` with label ordinal
/// `o`. Every positive edge `u -x-> v` is stored twice, as `out[u][2x] = v`
/// and `out[v][2x+1] = u`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StallingsGraph {
    rank: usize,
    out: Vec<Vec<Option<usize>>>,
}

impl StallingsGraph {
    /// Folds the wedge of the given loops at the base.
    pub fn from_loops(rank: usize, loops: &[Label]) -> Self {
        let mut n = 1;
        let mut edges = Vec::new();
        for path in loops {
            let path = reduce_label(path.iter().copied());
            if path.is_empty() {
                continue;
            }
            let mut prev = 0;
            for (i, &o) in path.iter().enumerate() {
                let next = if i + 1 == path.len() {
                    0
                } else {
                    n += 1;
                    n - 1
                };
                edges.push((prev, o, next));
                prev = next;
            }
        }
        Self::fold(rank, n, &edges, 0)
    }

    /// Folds an arbitrary labelled graph and returns the based core of the
    /// component containing `base`.
    pub fn fold(rank: usize, n: usize, edges: &[(usize, usize, usize)], base: usize) -> Self {
        let (out, roots) = fold_table(rank, n, edges);
        Self::trimmed(rank, out, roots[base])
    }

    /// Builds from an already folded table, keeping the core of the
    /// component of `base` with `base` renumbered to `0`.
    pub(crate) fn trimmed(rank: usize, mut out: Vec<Vec<Option<usize>>>, base: usize) -> Self {
        let n = out.len();
        let mut alive = vec![true; n];
        let mut degree: Vec<usize> = out.iter().map(|row| row.iter().flatten().count()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| v != base && degree[v] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for o in 0..2 * rank {
                if let Some(t) = out[v][o].take() {
                    out[t][o ^ 1] = None;
                    if t != v {
                        degree[t] -= 1;
                        if alive[t] && t != base && degree[t] <= 1 {
                            queue.push_back(t);
                        }
                    }
                }
            }
        }
        Self::canonical(rank, &out, base)
    }

    /// Breadth-first renumbering from `base`, edges visited by ordinal.
    fn canonical(rank: usize, out: &[Vec<Option<usize>>], base: usize) -> Self {
        let mut order = vec![usize::MAX; out.len()];
        let mut visit = vec![base];
        order[base] = 0;
        let mut head = 0;
        while head < visit.len() {
            let v = visit[head];
            head += 1;
            for t in out[v].iter().flatten() {
                if order[*t] == usize::MAX {
                    order[*t] = visit.len();
                    visit.push(*t);
                }
            }
        }
        let table = visit
            .iter()
            .map(|&v| out[v].iter().map(|t| t.map(|t| order[t])).collect())
            .collect();
        StallingsGraph { rank, out: table }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_vertices(&self) -> usize {
        self.out.len()
    }

    /// Number of positively oriented edges.
    pub fn num_edges(&self) -> usize {
        self.out
            .iter()
            .map(|row| row.iter().step_by(2).flatten().count())
            .sum()
    }

    /// Rank of the fundamental group, `|E| - |V| + 1`.
    pub fn subgroup_rank(&self) -> usize {
        self.num_edges() + 1 - self.num_vertices()
    }

    pub fn target(&self, v: usize, ordinal: usize) -> Option<usize> {
        self.out[v][ordinal]
    }

    pub fn trace(&self, start: usize, path: &[usize]) -> Option<usize> {
        path.iter().try_fold(start, |v, &o| self.out[v][o])
    }

    pub fn is_complete(&self) -> bool {
        self.out.iter().all(|row| row.iter().all(Option::is_some))
    }

    pub fn index(&self) -> Index {
        if self.is_complete() {
            Index::Finite(self.num_vertices())
        } else {
            Index::Infinite
        }
    }

    /// Positive edges `(u, generator ordinal, v)` in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (u, row) in self.out.iter().enumerate() {
            for (o, t) in row.iter().enumerate().step_by(2) {
                if let Some(v) = t {
                    out.push((u, o, *v));
                }
            }
        }
        out
    }

    /// Labels of the breadth-first spanning tree paths from the base, plus
    /// the set of tree edges (as `(u, ordinal)` pairs, both orientations).
    pub fn spanning_tree(&self) -> (Vec<Label>, Vec<Vec<bool>>) {
        let n = self.num_vertices();
        let mut paths: Vec<Option<Label>> = vec![None; n];
        let mut tree = vec![vec![false; 2 * self.rank]; n];
        paths[0] = Some(Vec::new());
        let mut queue = VecDeque::from([0usize]);
        while let Some(v) = queue.pop_front() {
            for o in 0..2 * self.rank {
                if let Some(t) = self.out[v][o] {
                    if paths[t].is_none() {
                        let mut p = paths[v].clone().unwrap();
                        p.push(o);
                        paths[t] = Some(p);
                        tree[v][o] = true;
                        tree[t][o ^ 1] = true;
                        queue.push_back(t);
                    }
                }
            }
        }
        (
            paths
                .into_iter()
                .map(|p| p.expect("graph is connected"))
                .collect(),
            tree,
        )
    }

    /// Free basis read off the non-tree edges, in canonical edge order.
    pub fn basis(&self) -> Vec<Label> {
        let (paths, tree) = self.spanning_tree();
        self.edges()
            .into_iter()
            .filter(|&(u, o, _)| !tree[u][o])
            .map(|(u, o, v)| {
                let mut p = paths[u].clone();
                p.push(o);
                p.extend(inverse_label(&paths[v]));
                reduce_label(p)
            })
            .collect()
    }

    /// Rewrites a closed path at the base in terms of [`Self::basis`]:
    /// returns `(basis index, inverted)` per non-tree edge crossed.
    pub fn express(&self, path: &[usize]) -> Option<Vec<(usize, bool)>> {
        let (_, tree) = self.spanning_tree();
        let mut basis_index = BTreeMap::new();
        for (u, o, _) in self.edges() {
            if !tree[u][o] {
                let k = basis_index.len();
                basis_index.insert((u, o), k);
            }
        }
        let mut v = 0;
        let mut word = Vec::new();
        for &o in path {
            let t = self.out[v][o]?;
            if !tree[v][o] {
                if o % 2 == 0 {
                    word.push((basis_index[&(v, o)], false));
                } else {
                    word.push((basis_index[&(t, o ^ 1)], true));
                }
            }
            v = t;
        }
        (v == 0).then_some(word)
    }

    /// Vertices of the unbased core: everything left after repeatedly
    /// deleting vertices of degree at most one, the base included.
    pub fn cyclic_core_mask(&self) -> Vec<bool> {
        let n = self.num_vertices();
        let mut alive = vec![true; n];
        let mut degree: Vec<usize> = self
            .out
            .iter()
            .map(|row| row.iter().flatten().count())
            .collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v] {
                continue;
            }
            alive[v] = false;
            for t in self.out[v].iter().flatten() {
                if alive[*t] && *t != v {
                    degree[*t] -= 1;
                    if degree[*t] <= 1 {
                        queue.push_back(*t);
                    }
                }
            }
        }
        alive
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // ordinals for rank 2: a=0, A=1, b=2, B=3
    #[test]
    fn wedge_of_a_and_b_is_the_rose() {
        let g = StallingsGraph::from_loops(2, &[vec![0], vec![2]]);
        assert_eq!(g.num_vertices(), 1);
        assert_eq!(g.num_edges(), 2);
        assert_eq!(g.index(), Index::Finite(1));
    }

    #[test]
    fn folding_merges_common_prefixes() {
        // abA and aBA fold to one a-edge with a b-loop at its end.
        let g = StallingsGraph::from_loops(2, &[vec![0, 2, 1], vec![0, 3, 1]]);
        assert_eq!(g.num_vertices(), 2);
        assert_eq!(g.subgroup_rank(), 1);
    }

    #[test]
    fn trimming_removes_hairs_but_keeps_base() {
        // a b A: base has degree one.
        let g = StallingsGraph::from_loops(2, &[vec![0, 2, 1]]);
        assert_eq!(g.num_vertices(), 2);
        let mask = g.cyclic_core_mask();
        assert_eq!(mask, vec![false, true]);
    }

    #[test]
    fn basis_and_express_round_trip() {
        let g = StallingsGraph::from_loops(2, &[vec![0, 0], vec![2], vec![0, 2, 1]]);
        let basis = g.basis();
        assert_eq!(basis.len(), g.subgroup_rank());
        for (i, b) in basis.iter().enumerate() {
            assert_eq!(g.express(b), Some(vec![(i, false)]));
        }
        assert_eq!(g.express(&[0]), None);
    }
}

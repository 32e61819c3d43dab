//! Fiber products of subgroup graphs and the decision procedures built on
//! them: intersections, conjugate intersections, malnormality,
//! commensurators and power-conjugacy.

use std::collections::VecDeque;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use super::graph::{fold_table, inverse_label, Label, StallingsGraph};
use super::subgroup::{label_of, word_of, SubgroupHandle};
use crate::error::{Error, Result};
use crate::word::Word;

fn same_rank(h: &SubgroupHandle, k: &SubgroupHandle) -> Result<usize> {
    if h.ambient_rank() == k.ambient_rank() {
        Ok(h.ambient_rank())
    } else {
        Err(Error::RankMismatch {
            left: h.ambient_rank(),
            right: k.ambient_rank(),
        })
    }
}

/// Transition table of the product of two graphs restricted to the vertex
/// masks. Pair `(u, v)` has index `u * n2 + v`.
fn product_table(
    g1: &StallingsGraph,
    mask1: &[bool],
    g2: &StallingsGraph,
    mask2: &[bool],
) -> Vec<Vec<Option<usize>>> {
    let rank = g1.rank();
    let (n1, n2) = (g1.num_vertices(), g2.num_vertices());
    let mut out = vec![vec![None; 2 * rank]; n1 * n2];
    for u in (0..n1).filter(|&u| mask1[u]) {
        for v in (0..n2).filter(|&v| mask2[v]) {
            for o in 0..2 * rank {
                if let (Some(s), Some(t)) = (g1.target(u, o), g2.target(v, o)) {
                    if mask1[s] && mask2[t] {
                        out[u * n2 + v][o] = Some(s * n2 + t);
                    }
                }
            }
        }
    }
    out
}

/// `H ∩ K`, read from the component of the product containing the pair of
/// base vertices.
pub fn based_intersection(h: &SubgroupHandle, k: &SubgroupHandle) -> Result<SubgroupHandle> {
    let rank = same_rank(h, k)?;
    let (g1, g2) = (h.graph(), k.graph());
    let table = product_table(
        g1,
        &vec![true; g1.num_vertices()],
        g2,
        &vec![true; g2.num_vertices()],
    );
    Ok(SubgroupHandle::from_graph(StallingsGraph::trimmed(
        rank, table, 0,
    )))
}

/// One connected component of the unbased fiber product of two core graphs.
#[derive(Clone, Debug)]
pub struct FiberComponent {
    /// Representative `w` of the double coset `H w K` the component stands for.
    pub witness: Word,
    /// `H ∩ w K w⁻¹`.
    pub intersection: SubgroupHandle,
    /// `[H : H ∩ wKw⁻¹]` is finite.
    pub left_covering: bool,
    /// `[wKw⁻¹ : H ∩ wKw⁻¹]` is finite.
    pub right_covering: bool,
    pub trivial: bool,
    pub vertices: usize,
}

impl FiberComponent {
    pub fn rank(&self) -> usize {
        self.intersection.rank()
    }

    pub fn is_bicovering(&self) -> bool {
        self.left_covering && self.right_covering
    }
}

impl Serialize for FiberComponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("FiberComponent", 6)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("rank", &self.rank())?;
        st.serialize_field("intersection", &self.intersection.basis())?;
        st.serialize_field("left_covering", &self.left_covering)?;
        st.serialize_field("right_covering", &self.right_covering)?;
        st.serialize_field("trivial", &self.trivial)?;
        st.end()
    }
}

/// Components of the product of the cyclic cores of `H` and `K`.
///
/// Nontrivial components are in bijection with the double cosets `H w K`
/// for which `H ∩ wKw⁻¹ ≠ 1`; bi-covering components are exactly the
/// double cosets of commensurating elements when `H = K`. Output is ordered
/// by the smallest vertex pair of each component.
pub fn conjugate_intersections(
    h: &SubgroupHandle,
    k: &SubgroupHandle,
) -> Result<Vec<FiberComponent>> {
    let rank = same_rank(h, k)?;
    let (g1, g2) = (h.graph(), k.graph());
    let (mask1, mask2) = (g1.cyclic_core_mask(), g2.cyclic_core_mask());
    let table = product_table(g1, &mask1, g2, &mask2);
    let n2 = g2.num_vertices();
    let (paths1, _) = g1.spanning_tree();
    let (paths2, _) = g2.spanning_tree();

    let mut component = vec![usize::MAX; table.len()];
    let mut result = Vec::new();
    for start in 0..table.len() {
        if component[start] != usize::MAX || !mask1[start / n2] || !mask2[start % n2] {
            continue;
        }
        let id = result.len();
        let mut members = vec![start];
        component[start] = id;
        let mut head = 0;
        while head < members.len() {
            let x = members[head];
            head += 1;
            for t in table[x].iter().flatten() {
                if component[*t] == usize::MAX {
                    component[*t] = id;
                    members.push(*t);
                }
            }
        }
        members.sort_unstable();

        // shortest witness a(u)·b(v)⁻¹ over the component
        let (witness, chosen) = members
            .iter()
            .map(|&x| {
                let (u, v) = (x / n2, x % n2);
                let mut lab = paths1[u].clone();
                lab.extend(inverse_label(&paths2[v]));
                (word_of(rank, &lab), x)
            })
            .min()
            .expect("component is nonempty");

        let local: Vec<Vec<Option<usize>>> = members
            .iter()
            .map(|&x| {
                table[x]
                    .iter()
                    .map(|t| t.map(|t| members.binary_search(&t).expect("closed component")))
                    .collect()
            })
            .collect();
        let base = members.binary_search(&chosen).unwrap();
        let local_graph = StallingsGraph::trimmed(rank, local, base);
        let a = word_of(rank, &paths1[chosen / n2]);
        let gens: Vec<Word> = local_graph
            .basis()
            .iter()
            .map(|l| word_of(rank, l).conjugate_by(&a))
            .collect();
        let intersection = SubgroupHandle::build(rank, &gens)?;
        let left = h.relative_index(&intersection)?.is_finite();
        let pulled_back = intersection.conjugate(&witness.invert())?;
        let right = k.relative_index(&pulled_back)?.is_finite();
        result.push(FiberComponent {
            witness,
            trivial: intersection.is_trivial(),
            intersection,
            left_covering: left,
            right_covering: right,
            vertices: members.len(),
        });
    }
    Ok(result)
}

/// Folds `H`'s graph with a path labelled `tail` hanging off the base.
/// Returns the table, the base and the end of the tail; the labels of paths
/// from base to end are exactly the coset `H·tail`.
fn coset_graph(h: &SubgroupHandle, tail: &Word) -> (Vec<Vec<Option<usize>>>, usize, usize) {
    let graph = h.graph();
    let mut edges = graph.edges();
    let mut n = graph.num_vertices();
    let mut end = 0;
    for o in label_of(tail) {
        edges.push((end, o, n));
        end = n;
        n += 1;
    }
    let (table, roots) = fold_table(graph.rank(), n, &edges);
    (table, roots[0], roots[end])
}

/// Decides `g ∈ H w K`, i.e. whether the cosets `Hg` and `wK` meet, by a
/// reachability search in the product of their two coset graphs.
pub fn double_coset_contains(
    h: &SubgroupHandle,
    w: &Word,
    k: &SubgroupHandle,
    g: &Word,
) -> Result<bool> {
    let rank = same_rank(h, k)?;
    if w.rank() != rank || g.rank() != rank {
        return Err(Error::RankMismatch {
            left: rank,
            right: w.rank().max(g.rank()),
        });
    }
    // paths base_h -> t spell Hg; paths s -> base_k spell wK
    let (t1, base_h, t) = coset_graph(h, g);
    let (t2, base_k, s) = coset_graph(k, &w.invert());
    let n2 = t2.len();
    let start = base_h * n2 + s;
    let goal = t * n2 + base_k;
    let mut seen = std::collections::BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x == goal {
            return Ok(true);
        }
        let (u, v) = (x / n2, x % n2);
        for o in 0..2 * rank {
            if let (Some(a), Some(b)) = (t1[u][o], t2[v][o]) {
                let y = a * n2 + b;
                if seen.insert(y) {
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(false)
}

/// Verdict of a malnormality check with its counterexamples.
#[derive(Clone, Debug)]
pub struct MalnormalityReport {
    pub verdict: bool,
    /// Non-diagonal components with nontrivial fundamental group; each
    /// witness `g ∉ H` has `H ∩ gHg⁻¹ ≠ 1`.
    pub offenders: Vec<FiberComponent>,
}

#[derive(Serialize)]
struct OffenderSummary<'a> {
    witness: &'a Word,
    rank: usize,
}

impl Serialize for MalnormalityReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MalnormalityReport", 2)?;
        st.serialize_field("verdict", &self.verdict)?;
        let offenders: Vec<OffenderSummary> = self
            .offenders
            .iter()
            .map(|c| OffenderSummary {
                witness: &c.witness,
                rank: c.rank(),
            })
            .collect();
        st.serialize_field("offenders", &offenders)?;
        st.end()
    }
}

/// Malnormality of a nontrivial subgroup of a free group. The ambient group
/// is torsion-free, so weak malnormality and malnormality coincide.
pub fn is_malnormal(h: &SubgroupHandle) -> Result<MalnormalityReport> {
    if h.is_trivial() {
        return Err(Error::TrivialSubgroup);
    }
    let mut offenders = Vec::new();
    for c in conjugate_intersections(h, h)? {
        if !c.trivial && !h.contains(&c.witness)? {
            offenders.push(c);
        }
    }
    Ok(MalnormalityReport {
        verdict: offenders.is_empty(),
        offenders,
    })
}

/// `Comm(H)` in the free group with the data that certifies it.
#[derive(Clone, Debug)]
pub struct CommensuratorResult {
    pub subgroup: SubgroupHandle,
    /// `[Comm(H) : H]`.
    pub index_of_h: usize,
    /// One representative per commensurating double coset other than `H`.
    pub witnesses: Vec<Word>,
}

impl Serialize for CommensuratorResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CommensuratorResult", 4)?;
        st.serialize_field("generators", &self.subgroup.basis())?;
        st.serialize_field("rank", &self.subgroup.rank())?;
        st.serialize_field("index_of_h", &self.index_of_h)?;
        st.serialize_field("witnesses", &self.witnesses)?;
        st.end()
    }
}

fn commensurating_witnesses(h: &SubgroupHandle) -> Result<Vec<Word>> {
    let mut out = Vec::new();
    for c in conjugate_intersections(h, h)? {
        if c.is_bicovering() && !h.contains(&c.witness)? {
            out.push(c.witness);
        }
    }
    Ok(out)
}

/// Commensurator of a nontrivial finitely generated subgroup of `F_m`,
/// verified to contain `H` with finite index and to be self-commensurated.
pub fn commensurator_in_free(h: &SubgroupHandle) -> Result<CommensuratorResult> {
    if h.is_trivial() {
        return Err(Error::TrivialSubgroup);
    }
    let witnesses = commensurating_witnesses(h)?;
    let subgroup = h.join(&witnesses)?;
    let index_of_h = subgroup.relative_index(h)?.finite().ok_or_else(|| {
        Error::TheoremViolation(format!("{h:?} has infinite index in its commensurator"))
    })?;
    let again = commensurating_witnesses(&subgroup)?;
    if !again.is_empty() {
        return Err(Error::TheoremViolation(format!(
            "commensurator of {h:?} is not self-commensurated (extra witness {})",
            again[0]
        )));
    }
    Ok(CommensuratorResult {
        subgroup,
        index_of_h,
        witnesses,
    })
}

/// Evidence that `g^n ∈ y H y⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerConjugacy {
    pub exponent: usize,
    pub conjugator: Word,
}

/// Whether some positive power of `g` is conjugate into `H`.
///
/// The cyclic core `c` of `g` is read repeatedly from every vertex of the
/// graph; reading `c` is a partial injection on vertices, so a vertex either
/// returns to itself within `|V|` rounds or its orbit dies. The smallest
/// exponent found is reported, ties going to the lowest vertex.
pub fn power_conjugates_into(g: &Word, h: &SubgroupHandle) -> Result<Option<PowerConjugacy>> {
    if g.is_identity() {
        return Err(Error::TrivialElement);
    }
    if g.rank() != h.ambient_rank() {
        return Err(Error::RankMismatch {
            left: h.ambient_rank(),
            right: g.rank(),
        });
    }
    let decomposition = g.cyclic_reduce();
    let core = label_of(&decomposition.core);
    let graph = h.graph();
    let n = graph.num_vertices();
    let mut best: Option<(usize, usize)> = None;
    for start in 0..n {
        let mut v = start;
        for round in 1..=n {
            match graph.trace(v, &core) {
                Some(t) => v = t,
                None => break,
            }
            if v == start {
                if best.map_or(true, |(e, _)| round < e) {
                    best = Some((round, start));
                }
                break;
            }
            if best.is_some_and(|(e, _)| round >= e) {
                break;
            }
        }
    }
    let Some((exponent, vertex)) = best else {
        return Ok(None);
    };
    let (paths, _) = graph.spanning_tree();
    let p: Label = paths[vertex].clone();
    let conjugator = &decomposition.conjugator * &word_of(g.rank(), &p).invert();
    Ok(Some(PowerConjugacy {
        exponent,
        conjugator,
    }))
}

/// Breadth-first distance-limited list of elements of `H` given as products
/// of at most `depth` generator symbols. Used by brute-force cross-checks.
pub fn short_products(h: &SubgroupHandle, depth: usize) -> Vec<Word> {
    let rank = h.ambient_rank();
    let mut symbols: Vec<Word> = Vec::new();
    for g in h.generators() {
        symbols.push(g.clone());
        symbols.push(g.invert());
    }
    let mut seen = std::collections::BTreeSet::from([Word::identity(rank)]);
    let mut frontier = VecDeque::from([(Word::identity(rank), 0usize)]);
    while let Some((w, d)) = frontier.pop_front() {
        if d == depth {
            continue;
        }
        for s in &symbols {
            let x = &w * s;
            if seen.insert(x.clone()) {
                frontier.push_back((x, d + 1));
            }
        }
    }
    seen.into_iter().collect()
}

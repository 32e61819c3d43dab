use std::fmt;

use serde::Serialize;

use super::graph::{Index, Label, StallingsGraph};
use crate::error::{Error, Result};
use crate::word::{Letter, Word};

pub(crate) fn label_of(w: &Word) -> Label {
    w.letters().iter().map(|l| l.ordinal()).collect()
}

pub(crate) fn word_of(rank: usize, label: &[usize]) -> Word {
    Word::from_letters(rank, label.iter().map(|&o| Letter::from_ordinal(o)))
        .expect("label within rank")
}

/// A finitely generated subgroup of `F_m` together with its folded graph.
#[derive(Clone)]
pub struct SubgroupHandle {
    generators: Vec<Word>,
    graph: StallingsGraph,
}

impl SubgroupHandle {
    /// Folds the wedge of the generator loops.
    pub fn build(rank: usize, generators: &[Word]) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.rank() != rank) {
            return Err(Error::RankMismatch {
                left: rank,
                right: g.rank(),
            });
        }
        let loops: Vec<Label> = generators.iter().map(label_of).collect();
        Ok(SubgroupHandle {
            generators: generators.to_vec(),
            graph: StallingsGraph::from_loops(rank, &loops),
        })
    }

    pub fn trivial(rank: usize) -> Self {
        SubgroupHandle::build(rank, &[]).expect("no generators")
    }

    pub fn whole(rank: usize) -> Self {
        let gens: Vec<Word> = (1..=rank).map(|i| Word::generator(rank, i)).collect();
        SubgroupHandle::build(rank, &gens).expect("same rank")
    }

    /// A handle whose generators are the canonical free basis of `graph`.
    pub fn from_graph(graph: StallingsGraph) -> Self {
        let rank = graph.rank();
        let generators = graph.basis().iter().map(|l| word_of(rank, l)).collect();
        SubgroupHandle { generators, graph }
    }

    pub fn ambient_rank(&self) -> usize {
        self.graph.rank()
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn graph(&self) -> &StallingsGraph {
        &self.graph
    }

    fn check(&self, w: &Word) -> Result<()> {
        if w.rank() == self.ambient_rank() {
            Ok(())
        } else {
            Err(Error::RankMismatch {
                left: self.ambient_rank(),
                right: w.rank(),
            })
        }
    }

    pub fn contains(&self, w: &Word) -> Result<bool> {
        self.check(w)?;
        Ok(self.graph.trace(0, &label_of(w)) == Some(0))
    }

    /// Rank of the subgroup as a free group.
    pub fn rank(&self) -> usize {
        self.graph.subgroup_rank()
    }

    pub fn index(&self) -> Index {
        self.graph.index()
    }

    pub fn is_trivial(&self) -> bool {
        self.graph.num_edges() == 0
    }

    /// Canonical free basis (Schreier generators of the breadth-first tree).
    pub fn basis(&self) -> Vec<Word> {
        let rank = self.ambient_rank();
        self.graph
            .basis()
            .iter()
            .map(|l| word_of(rank, l))
            .collect()
    }

    /// Rewrites a member as a product of [`Self::basis`] elements.
    pub fn express(&self, w: &Word) -> Result<Option<Vec<(usize, bool)>>> {
        self.check(w)?;
        Ok(self.graph.express(&label_of(w)))
    }

    /// `[self : sub]` for a subgroup `sub ≤ self`, computed by rewriting the
    /// generators of `sub` in a free basis of `self` and folding over that
    /// basis.
    pub fn relative_index(&self, sub: &SubgroupHandle) -> Result<Index> {
        let r = self.rank();
        if r == 0 {
            return if sub.is_trivial() {
                Ok(Index::Finite(1))
            } else {
                Err(Error::NotASubgroup(format!("{sub:?}")))
            };
        }
        let mut loops = Vec::new();
        for g in sub.generators() {
            let expr = self
                .express(g)?
                .ok_or_else(|| Error::NotASubgroup(format!("{g} is not a member")))?;
            loops.push(
                expr.into_iter()
                    .map(|(i, inv)| 2 * i + inv as usize)
                    .collect::<Label>(),
            );
        }
        Ok(StallingsGraph::from_loops(r, &loops).index())
    }

    pub fn is_subgroup_of(&self, other: &SubgroupHandle) -> Result<bool> {
        for g in &self.generators {
            if !other.contains(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Equality as subgroups (canonical graphs coincide).
    pub fn same_subgroup(&self, other: &SubgroupHandle) -> bool {
        self.graph == other.graph
    }

    /// `x H x⁻¹`.
    pub fn conjugate(&self, x: &Word) -> Result<SubgroupHandle> {
        self.check(x)?;
        let gens: Vec<Word> = self.generators.iter().map(|g| g.conjugate_by(x)).collect();
        SubgroupHandle::build(self.ambient_rank(), &gens)
    }

    /// Subgroup generated by `self` and extra elements.
    pub fn join(&self, extra: &[Word]) -> Result<SubgroupHandle> {
        let mut gens = self.generators.clone();
        gens.extend_from_slice(extra);
        SubgroupHandle::build(self.ambient_rank(), &gens)
    }

    /// Image under the endomorphism `x_i ↦ images[i-1]`.
    pub fn image_under_map(&self, images: &[Word]) -> Result<SubgroupHandle> {
        if images.len() != self.ambient_rank() {
            return Err(Error::RankMismatch {
                left: self.ambient_rank(),
                right: images.len(),
            });
        }
        let target = images[0].rank();
        let gens = self
            .generators
            .iter()
            .map(|g| g.substitute(images))
            .collect::<Result<Vec<_>>>()?;
        SubgroupHandle::build(target, &gens)
    }
}

impl PartialEq for SubgroupHandle {
    fn eq(&self, other: &Self) -> bool {
        self.same_subgroup(other)
    }
}

impl Eq for SubgroupHandle {}

impl fmt::Debug for SubgroupHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, g) in self.generators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{g:?}")?;
        }
        write!(f, ">")
    }
}

/// Whether `x_i ↦ images[i-1]` defines an automorphism of `F_m`.
///
/// Surjectivity is decided by checking that the images generate a subgroup
/// of index one. Finitely generated free groups are Hopfian, so a surjective
/// endomorphism is injective and no inverse map is needed.
pub fn is_automorphism(images: &[Word]) -> Result<bool> {
    let Some(first) = images.first() else {
        return Ok(false);
    };
    let m = first.rank();
    if images.len() != m {
        return Err(Error::RankMismatch {
            left: m,
            right: images.len(),
        });
    }
    let h = SubgroupHandle::build(m, images)?;
    Ok(h.index() == Index::Finite(1))
}

/// Serializable summary of a subgroup graph.
#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub generators: Vec<Word>,
    pub basis: Vec<Word>,
    pub rank: usize,
    pub index: Index,
    pub vertices: usize,
    /// `[source, "letter", target]` triples in canonical order.
    pub edges: Vec<(usize, String, usize)>,
}

impl From<&SubgroupHandle> for GraphSummary {
    fn from(h: &SubgroupHandle) -> Self {
        GraphSummary {
            generators: h.generators.clone(),
            basis: h.basis(),
            rank: h.rank(),
            index: h.index(),
            vertices: h.graph.num_vertices(),
            edges: h
                .graph
                .edges()
                .into_iter()
                .map(|(u, o, v)| (u, Letter::from_ordinal(o).to_char().to_string(), v))
                .collect(),
        }
    }
}

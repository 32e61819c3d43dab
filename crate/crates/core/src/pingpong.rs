//! Synthesis of ping-pong pairs avoiding the limit sets of given subgroups,
//! and bounded searches for malnormal subgroups.
//!
//! For a seed `w ∉ [F,F]` the candidate set is
//! `A = { wg : g ∈ [F,F], wg reduced and cyclically reduced }`. Every
//! element of `A` has the abelianization of `w`. A candidate `x` avoids the
//! limit set of every conjugate of `E` exactly when no positive power of `x`
//! is conjugate into `E`, which [`power_conjugates_into`] decides.

use std::collections::HashSet;

use itertools::Itertools;
use rayon::prelude::*;
use serde::Serialize;

use crate::enumerate::ReducedWords;
use crate::error::{Error, Result};
use crate::stallings::{
    conjugate_intersections, power_conjugates_into, FiberComponent, Index, SubgroupHandle,
};
use crate::word::Word;

/// Search bounds for the existence statements that carry no effective bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateBudget {
    /// Longest commutator padding `g` (or longest generator word in a
    /// subgroup search).
    pub max_pad_length: usize,
    /// Candidates (or generator tuples) examined before giving up.
    pub max_candidates: usize,
    /// Largest exponent `k` tried for `⟨g1^k, g2^k⟩`.
    pub max_exponent: usize,
}

impl Default for CandidateBudget {
    fn default() -> Self {
        CandidateBudget {
            max_pad_length: 8,
            max_candidates: 20_000,
            max_exponent: 6,
        }
    }
}

impl CandidateBudget {
    pub fn new(max_pad_length: usize, max_candidates: usize, max_exponent: usize) -> Result<Self> {
        if max_pad_length == 0 || max_candidates == 0 || max_exponent == 0 {
            return Err(Error::Parse("budget values must be positive".into()));
        }
        Ok(CandidateBudget {
            max_pad_length,
            max_candidates,
            max_exponent,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateStrategy {
    /// Every `g ∈ [F,F]` up to the pad length, shortlex.
    Exhaustive,
    /// `g = s·ι(s)` for `s` up to half the pad length, shortlex in `s`.
    Padding,
}

/// Whether `x` belongs to the candidate set of the seed `w`.
pub fn in_candidate_set(w: &Word, x: &Word) -> Result<bool> {
    let g = &w.invert() * x;
    Ok(g.in_commutator_subgroup()
        && w.is_reduced_product(&g)?
        && x.is_cyclically_reduced()
        && !x.is_identity())
}

/// Lazy, duplicate-free enumeration of the candidate set.
pub struct CandidateSet {
    seed: Word,
    strategy: CandidateStrategy,
    pads: ReducedWords,
    seen: HashSet<Word>,
    remaining: usize,
}

/// Starts enumerating `A` for the seed `w`.
pub fn candidate_set_a(
    w: &Word,
    budget: CandidateBudget,
    strategy: CandidateStrategy,
) -> Result<CandidateSet> {
    if w.in_commutator_subgroup() {
        return Err(Error::SeedInCommutator(w.to_string()));
    }
    if w.rank() < 2 {
        return Err(Error::UnsupportedRank(w.rank()));
    }
    let pad_words = match strategy {
        CandidateStrategy::Exhaustive => budget.max_pad_length,
        CandidateStrategy::Padding => budget.max_pad_length / 2,
    };
    Ok(CandidateSet {
        seed: w.clone(),
        strategy,
        pads: ReducedWords::new(w.rank(), pad_words),
        seen: HashSet::new(),
        remaining: budget.max_candidates,
    })
}

impl CandidateSet {
    /// Collects everything within budget; `BudgetExhausted` if empty.
    pub fn collect_nonempty(self) -> Result<Vec<Word>> {
        let seed = self.seed.clone();
        let out: Vec<Word> = self.collect();
        if out.is_empty() {
            Err(Error::BudgetExhausted(format!(
                "no candidate for seed {seed} within budget"
            )))
        } else {
            Ok(out)
        }
    }
}

impl Iterator for CandidateSet {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.remaining == 0 {
            return None;
        }
        for s in self.pads.by_ref() {
            let g = match self.strategy {
                CandidateStrategy::Exhaustive => {
                    if s.len() % 2 == 1 || !s.in_commutator_subgroup() {
                        continue;
                    }
                    s
                }
                CandidateStrategy::Padding => s.commutator_square(),
            };
            if !self.seed.is_reduced_product(&g).unwrap_or(false) {
                continue;
            }
            let x = &self.seed * &g;
            if !x.is_cyclically_reduced() || !self.seen.insert(x.clone()) {
                continue;
            }
            self.remaining -= 1;
            return Some(x);
        }
        None
    }
}

/// Rejects subgroups whose limit set is all of the boundary.
pub fn check_avoidable(es: &[SubgroupHandle]) -> Result<()> {
    for e in es {
        if e.index().is_finite() {
            return Err(Error::FiniteIndexInput(format!("{e:?}")));
        }
    }
    Ok(())
}

/// True iff no positive power of `x` is conjugate into any `E`.
pub fn avoids_limit_sets(x: &Word, es: &[SubgroupHandle]) -> Result<bool> {
    for e in es {
        if power_conjugates_into(x, e)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Keeps the candidates whose axes avoid every limit set `Λ(gE)`.
/// Candidates are tested in parallel; the output keeps the input order.
pub fn avoid_limit_sets<I>(candidates: I, es: &[SubgroupHandle]) -> Result<Vec<Word>>
where
    I: IntoIterator<Item = Word>,
{
    check_avoidable(es)?;
    let candidates: Vec<Word> = candidates.into_iter().collect();
    let keep: Vec<bool> = candidates
        .par_iter()
        .map(|x| avoids_limit_sets(x, es))
        .collect::<Result<Vec<bool>>>()?;
    Ok(candidates
        .into_iter()
        .zip(keep)
        .filter_map(|(x, k)| k.then_some(x))
        .collect())
}

/// Fiber-product evidence that `⟨g1^k, g2^k⟩` meets no conjugate of `E`.
#[derive(Clone, Debug, Serialize)]
pub struct AvoidanceEvidence {
    pub subgroup: Vec<Word>,
    pub components: Vec<FiberComponent>,
    pub all_trivial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PingpongVerification {
    pub rank2_ok: bool,
    pub candidates_ok: bool,
    pub avoidance: Vec<AvoidanceEvidence>,
}

impl PingpongVerification {
    pub fn passed(&self) -> bool {
        self.rank2_ok && self.candidates_ok && self.avoidance.iter().all(|e| e.all_trivial)
    }
}

/// `g1, g2 ∈ A` and `k` with `⟨g1^k, g2^k⟩` free of rank two and meeting no
/// conjugate of any avoided subgroup.
#[derive(Clone, Debug, Serialize)]
pub struct PingpongPair {
    pub seed: Word,
    pub g1: Word,
    pub g2: Word,
    pub k: usize,
    pub verification: PingpongVerification,
}

impl PingpongPair {
    pub fn subgroup(&self) -> SubgroupHandle {
        let k = self.k as i64;
        SubgroupHandle::build(self.seed.rank(), &[self.g1.pow(k), self.g2.pow(k)])
            .expect("same rank")
    }
}

fn rank_two(x: &Word, y: &Word) -> Result<bool> {
    Ok(SubgroupHandle::build(x.rank(), &[x.clone(), y.clone()])?.rank() == 2)
}

/// Recomputes the verification record from fresh graphs.
pub fn verify_pingpong_pair(
    seed: &Word,
    g1: &Word,
    g2: &Word,
    k: usize,
    es: &[SubgroupHandle],
) -> Result<PingpongVerification> {
    let powers = [g1.pow(k as i64), g2.pow(k as i64)];
    let h = SubgroupHandle::build(seed.rank(), &powers)?;
    let candidates_ok = in_candidate_set(seed, g1)? && in_candidate_set(seed, g2)?;
    let mut avoidance = Vec::new();
    for e in es {
        let e = SubgroupHandle::build(e.ambient_rank(), e.generators())?;
        let components = conjugate_intersections(&h, &e)?;
        let all_trivial = components.iter().all(|c| c.trivial);
        avoidance.push(AvoidanceEvidence {
            subgroup: e.generators().to_vec(),
            components,
            all_trivial,
        });
    }
    Ok(PingpongVerification {
        rank2_ok: h.rank() == 2,
        candidates_ok,
        avoidance,
    })
}

fn least_exponent(
    g1: &Word,
    g2: &Word,
    es: &[SubgroupHandle],
    max_exponent: usize,
) -> Result<Option<usize>> {
    'k: for k in 1..=max_exponent {
        let h = SubgroupHandle::build(g1.rank(), &[g1.pow(k as i64), g2.pow(k as i64)])?;
        for e in es {
            if conjugate_intersections(&h, e)?.iter().any(|c| !c.trivial) {
                continue 'k;
            }
        }
        return Ok(Some(k));
    }
    Ok(None)
}

/// Finds the first ping-pong pair in candidate order.
///
/// Filtered candidates are paired in the order `(x_0, x_1), (x_0, x_2),
/// (x_1, x_2), (x_0, x_3), ...`; the first pair of rank two that admits an
/// exponent `k ≤ max_exponent` wins, with `k` as small as possible.
pub fn select_pingpong_pair(
    w: &Word,
    es: &[SubgroupHandle],
    budget: CandidateBudget,
) -> Result<PingpongPair> {
    check_avoidable(es)?;
    let candidates = candidate_set_a(w, budget, CandidateStrategy::Exhaustive)?;
    let mut examined = 0;
    let mut filtered: Vec<Word> = Vec::new();
    let mut pairs_tried = 0;
    for x in candidates {
        examined += 1;
        if !avoids_limit_sets(&x, es)? {
            continue;
        }
        for g1 in &filtered {
            if !rank_two(g1, &x)? {
                continue;
            }
            pairs_tried += 1;
            if let Some(k) = least_exponent(g1, &x, es, budget.max_exponent)? {
                let verification = verify_pingpong_pair(w, g1, &x, k, es)?;
                if !verification.passed() {
                    return Err(Error::TheoremViolation(format!(
                        "ping-pong pair ({g1}, {x}) failed re-verification"
                    )));
                }
                return Ok(PingpongPair {
                    seed: w.clone(),
                    g1: g1.clone(),
                    g2: x,
                    k,
                    verification,
                });
            }
        }
        filtered.push(x);
    }
    Err(Error::BudgetExhausted(format!(
        "seed {w}: examined {examined} candidates, {} passed the limit-set filter, {pairs_tried} rank-two pairs had no exponent ≤ {}",
        filtered.len(),
        budget.max_exponent
    )))
}

/// `g` is elliptic in the coned-off Cayley graph iff some power of it is
/// conjugate into one of the coned subgroups (free groups have no torsion).
pub fn is_coned_elliptic(g: &Word, hs: &[SubgroupHandle]) -> Result<bool> {
    if g.is_identity() {
        return Err(Error::TrivialElement);
    }
    Ok(!avoids_limit_sets(g, hs)?)
}

/// Result of a subgroup search: the subgroup and its generators written as
/// words in the search basis.
#[derive(Clone, Debug)]
pub struct SearchHit {
    pub subgroup: SubgroupHandle,
    pub basis_words: Vec<Word>,
}

/// Enumerates `r`-tuples of distinct nontrivial words over `basis` (words
/// in the free group on `basis.len()` letters, mapped through the basis) in
/// deterministic order: by the position of the largest word, then
/// lexicographically on the remaining positions. Tuples generating a
/// subgroup of rank below `r` or of finite index are skipped; the first
/// tuple accepted by `accept` is returned.
pub fn search_subgroups<F>(
    basis: &[Word],
    r: usize,
    budget: CandidateBudget,
    mut accept: F,
) -> Result<SearchHit>
where
    F: FnMut(&SubgroupHandle) -> Result<bool>,
{
    let Some(first) = basis.first() else {
        return Err(Error::TrivialSubgroup);
    };
    let ambient = first.rank();
    let mut words: Vec<Word> = Vec::new();
    let mut mapped: Vec<Word> = Vec::new();
    let mut source = ReducedWords::with_lengths(basis.len(), 1, budget.max_pad_length);
    let mut tried = 0;
    loop {
        let Some(next) = source.next() else { break };
        mapped.push(next.substitute(basis)?);
        words.push(next);
        let j = words.len() - 1;
        if j + 1 < r {
            continue;
        }
        for combo in (0..j).combinations(r - 1) {
            tried += 1;
            if tried > budget.max_candidates {
                return Err(Error::BudgetExhausted(format!(
                    "no accepted subgroup among {} tuples",
                    tried - 1
                )));
            }
            let gens: Vec<Word> = combo
                .iter()
                .chain([&j])
                .map(|&i| mapped[i].clone())
                .collect();
            let h = SubgroupHandle::build(ambient, &gens)?;
            if h.rank() != r || h.index() != Index::Infinite {
                continue;
            }
            if accept(&h)? {
                let basis_words = combo
                    .iter()
                    .chain([&j])
                    .map(|&i| words[i].clone())
                    .collect();
                return Ok(SearchHit {
                    subgroup: h,
                    basis_words,
                });
            }
        }
    }
    Err(Error::BudgetExhausted(format!(
        "no accepted subgroup among {tried} tuples"
    )))
}

/// An `r`-generated malnormal subgroup of `F_m` of rank `r`.
pub fn malnormal_subgroup_search(
    m: usize,
    r: usize,
    budget: CandidateBudget,
) -> Result<SubgroupHandle> {
    if m < 2 || r < 2 {
        return Err(Error::UnsupportedRank(m.min(r)));
    }
    let basis: Vec<Word> = (1..=m).map(|i| Word::generator(m, i)).collect();
    let hit = search_subgroups(&basis, r, budget, |h| {
        Ok(crate::stallings::is_malnormal(h)?.verdict)
    })?;
    Ok(hit.subgroup)
}

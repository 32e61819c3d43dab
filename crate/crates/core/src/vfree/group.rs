use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{IntMatrix, Matrix};
use crate::stallings::{is_automorphism, SubgroupHandle};
use crate::word::Word;

/// A finite group given by its multiplication table on `0..order`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteGroupTable {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// Verifies closure, associativity on all triples, identity and inverses.
    pub fn new(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::NotAGroup("empty table".into()));
        }
        if table
            .iter()
            .any(|row| row.len() != n || row.iter().any(|&x| x >= n))
        {
            return Err(Error::NotAGroup(
                "table is not an n×n table over 0..n".into(),
            ));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::NotAGroup("no identity".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(Error::NotAGroup(format!("({a}·{b})·{c} ≠ {a}·({b}·{c})")));
                    }
                }
            }
        }
        let inverse = (0..n)
            .map(|a| {
                (0..n)
                    .find(|&b| table[a][b] == identity && table[b][a] == identity)
                    .ok_or_else(|| Error::NotAGroup(format!("element {a} has no inverse")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteGroupTable {
            table,
            identity,
            inverse,
        })
    }

    /// The cyclic group of order `n`.
    pub fn cyclic(n: usize) -> Self {
        let table = (0..n)
            .map(|a| (0..n).map(|b| (a + b) % n).collect())
            .collect();
        FiniteGroupTable::new(table).expect("cyclic group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

/// An automorphism of `F_m` given by the images of the generators.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct FreeAutomorphism {
    images: Vec<Word>,
}

impl FreeAutomorphism {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        if !is_automorphism(&images)? {
            let shown: Vec<String> = images.iter().map(|w| w.to_string()).collect();
            return Err(Error::NotAnAutomorphism(format!("[{}]", shown.join(", "))));
        }
        Ok(FreeAutomorphism { images })
    }

    pub fn identity(rank: usize) -> Self {
        FreeAutomorphism {
            images: (1..=rank).map(|i| Word::generator(rank, i)).collect(),
        }
    }

    /// Conjugation `x ↦ w x w⁻¹`.
    pub fn inner(w: &Word) -> Self {
        let rank = w.rank();
        FreeAutomorphism {
            images: (1..=rank)
                .map(|i| Word::generator(rank, i).conjugate_by(w))
                .collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        *self == FreeAutomorphism::identity(self.rank())
    }

    pub fn apply(&self, w: &Word) -> Word {
        w.substitute(&self.images)
            .expect("rank checked at construction")
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FreeAutomorphism) -> FreeAutomorphism {
        FreeAutomorphism {
            images: other.images.iter().map(|w| self.apply(w)).collect(),
        }
    }

    pub fn apply_subgroup(&self, h: &SubgroupHandle) -> SubgroupHandle {
        h.image_under_map(&self.images)
            .expect("rank checked at construction")
    }

    /// Action on the abelianization: column `j` is the exponent-sum vector
    /// of the image of `x_j`.
    pub fn abelian_matrix(&self) -> IntMatrix {
        let columns: Vec<Vec<i64>> = self.images.iter().map(|w| w.abelianize().0).collect();
        Matrix::from_columns(&columns).expect("square")
    }
}

/// Raw description of `F_m ⋊ Q`, as read from a file.
///
/// `action` maps `"q<i>"` to the images of the free generators under
/// `φ_{q_i}`; absent keys mean the identity automorphism.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VirtuallyFreeData {
    pub rank: usize,
    pub q_order: usize,
    pub table: Vec<Vec<usize>>,
    #[serde(default)]
    pub action: BTreeMap<String, Vec<String>>,
}

impl VirtuallyFreeData {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// `F_m × Z/n` with the trivial action.
    pub fn direct_product(rank: usize, n: usize) -> Self {
        VirtuallyFreeData {
            rank,
            q_order: n,
            table: FiniteGroupTable::cyclic(n).table().to_vec(),
            action: BTreeMap::new(),
        }
    }

    /// `F_m ⋊ Z/2` with the generator of `Z/2` acting by `images`.
    pub fn involution(rank: usize, images: &[&str]) -> Self {
        let mut data = VirtuallyFreeData::direct_product(rank, 2);
        data.action
            .insert("q1".into(), images.iter().map(|s| s.to_string()).collect());
        data
    }
}

/// An element `(w, q)` of `F_m ⋊ Q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct GElement {
    pub w: Word,
    pub q: usize,
}

impl GElement {
    pub fn new(w: Word, q: usize) -> Self {
        GElement { w, q }
    }
}

impl fmt::Display for GElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:?}, q{})", self.w, self.q)
    }
}

/// A validated split extension `F_m ⋊ Q` with element arithmetic
/// `(w1,q1)·(w2,q2) = (w1·φ_{q1}(w2), q1q2)`.
#[derive(Clone, Debug)]
pub struct VirtuallyFree {
    rank: usize,
    q: FiniteGroupTable,
    action: Vec<FreeAutomorphism>,
}

/// Checks the group table, each automorphism and the action law.
pub fn validate(data: &VirtuallyFreeData) -> Result<VirtuallyFree> {
    let rank = data.rank;
    if !(2..=crate::word::MAX_RANK).contains(&rank) {
        return Err(Error::UnsupportedRank(rank));
    }
    if data.table.len() != data.q_order {
        return Err(Error::NotAGroup(format!(
            "table has {} rows, q_order is {}",
            data.table.len(),
            data.q_order
        )));
    }
    let q = FiniteGroupTable::new(data.table.clone())?;
    let mut action = vec![FreeAutomorphism::identity(rank); q.order()];
    for (key, images) in &data.action {
        let idx: usize = key
            .strip_prefix('q')
            .and_then(|s| s.parse().ok())
            .filter(|&i| i < q.order())
            .ok_or_else(|| Error::Parse(format!("bad action key {key:?}")))?;
        if images.len() != rank {
            return Err(Error::NotAnAutomorphism(format!(
                "{key}: expected {rank} images, got {}",
                images.len()
            )));
        }
        let words = images
            .iter()
            .map(|s| Word::parse(rank, s))
            .collect::<Result<Vec<_>>>()?;
        action[idx] = FreeAutomorphism::new(words)?;
    }
    VirtuallyFree::new(rank, q, action)
}

impl VirtuallyFree {
    pub fn new(rank: usize, q: FiniteGroupTable, action: Vec<FreeAutomorphism>) -> Result<Self> {
        if action.len() != q.order() {
            return Err(Error::NotAnAction(format!(
                "{} automorphisms for a group of order {}",
                action.len(),
                q.order()
            )));
        }
        if let Some(phi) = action.iter().find(|phi| phi.rank() != rank) {
            return Err(Error::RankMismatch {
                left: rank,
                right: phi.rank(),
            });
        }
        if !action[q.identity()].is_identity() {
            return Err(Error::NotAnAction(
                "the identity of Q acts nontrivially".into(),
            ));
        }
        for a in 0..q.order() {
            for b in 0..q.order() {
                if action[q.mul(a, b)] != action[a].compose(&action[b]) {
                    return Err(Error::NotAnAction(format!(
                        "φ(q{a}·q{b}) ≠ φ(q{a})∘φ(q{b})"
                    )));
                }
            }
        }
        Ok(VirtuallyFree { rank, q, action })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn quotient(&self) -> &FiniteGroupTable {
        &self.q
    }

    pub fn action(&self, q: usize) -> &FreeAutomorphism {
        &self.action[q]
    }

    pub fn identity(&self) -> GElement {
        GElement::new(Word::identity(self.rank), self.q.identity())
    }

    /// `(w, e)`.
    pub fn fiber(&self, w: &Word) -> GElement {
        GElement::new(w.clone(), self.q.identity())
    }

    pub fn mul(&self, x: &GElement, y: &GElement) -> GElement {
        GElement::new(&x.w * &self.action[x.q].apply(&y.w), self.q.mul(x.q, y.q))
    }

    pub fn inv(&self, x: &GElement) -> GElement {
        let qi = self.q.inv(x.q);
        GElement::new(self.action[qi].apply(&x.w.invert()), qi)
    }

    /// `g x g⁻¹` for `x` in the fiber, as a fiber word: `w φ_q(x) w⁻¹`.
    pub fn conjugate_fiber(&self, g: &GElement, x: &Word) -> Word {
        self.action[g.q].apply(x).conjugate_by(&g.w)
    }

    /// `g h g⁻¹`.
    pub fn conjugate(&self, g: &GElement, h: &GElement) -> GElement {
        self.mul(&self.mul(g, h), &self.inv(g))
    }

    /// Elements of `G` whose fiber word has length at most `max_len`.
    pub fn elements_up_to(&self, max_len: usize) -> impl Iterator<Item = GElement> + '_ {
        (0..self.q.order()).flat_map(move |q| {
            crate::enumerate::ReducedWords::new(self.rank, max_len)
                .map(move |w| GElement::new(w, q))
        })
    }
}

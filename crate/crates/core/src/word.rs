//! Reduced words in a free group of rank at most 26.
//!
//! Generators print as `a..z`, their inverses as `A..Z`; the empty string is
//! the identity. Letters are ordered `a < A < b < B < ...`, and words are
//! compared shortlex (length first, then lexicographically).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 26;

/// A generator or its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Letter(i8);

impl Letter {
    /// `generator` is 1-based.
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(
            (1..=MAX_RANK).contains(&generator),
            "generator {generator} out of range"
        );
        let g = generator as i8;
        Letter(if inverse { -g } else { g })
    }

    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position in the order `a, A, b, B, ...`; also the edge slot used by
    /// subgroup graphs.
    pub fn ordinal(self) -> usize {
        2 * (self.generator() - 1) + self.is_inverse() as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Letter {
        Letter::new(ordinal / 2 + 1, ordinal % 2 == 1)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + (self.generator() - 1) as u8) as char
    }

    pub fn from_char(c: char) -> Option<Letter> {
        match c {
            'a'..='z' => Some(Letter::new((c as u8 - b'a') as usize + 1, false)),
            'A'..='Z' => Some(Letter::new((c as u8 - b'A') as usize + 1, true)),
            _ => None,
        }
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.ordinal().cmp(&other.ordinal())
    }
}

fn check_rank(rank: usize) -> Result<()> {
    if (1..=MAX_RANK).contains(&rank) {
        Ok(())
    } else {
        Err(Error::UnsupportedRank(rank))
    }
}

/// A freely reduced word in the free group of the given rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

/// Appends `letter` to an already reduced buffer, cancelling if possible.
fn push_reduced(buf: &mut Vec<Letter>, letter: Letter) {
    if buf.last() == Some(&letter.inverse()) {
        buf.pop();
    } else {
        buf.push(letter);
    }
}

/// Freely reduces a raw sequence of `(generator, ±1)` pairs.
pub fn free_reduce(rank: usize, raw: &[(usize, i8)]) -> Result<Word> {
    check_rank(rank)?;
    let mut letters = Vec::with_capacity(raw.len());
    for &(index, sign) in raw {
        if index == 0 || index > rank || sign == 0 {
            return Err(Error::IndexOutOfRange { index, rank });
        }
        push_reduced(&mut letters, Letter::new(index, sign < 0));
    }
    Ok(Word { rank, letters })
}

impl Word {
    pub fn identity(rank: usize) -> Word {
        assert!((1..=MAX_RANK).contains(&rank), "rank {rank} out of range");
        Word {
            rank,
            letters: Vec::new(),
        }
    }

    /// The `index`-th basis element (1-based).
    pub fn generator(rank: usize, index: usize) -> Word {
        assert!(
            index >= 1 && index <= rank,
            "generator {index} out of range for rank {rank}"
        );
        Word {
            rank,
            letters: vec![Letter::new(index, false)],
        }
    }

    /// Builds a word from letters, reducing freely.
    pub fn from_letters<I: IntoIterator<Item = Letter>>(rank: usize, letters: I) -> Result<Word> {
        check_rank(rank)?;
        let mut buf = Vec::new();
        for l in letters {
            if l.generator() > rank {
                return Err(Error::IndexOutOfRange {
                    index: l.generator(),
                    rank,
                });
            }
            push_reduced(&mut buf, l);
        }
        Ok(Word { rank, letters: buf })
    }

    pub fn parse(rank: usize, text: &str) -> Result<Word> {
        check_rank(rank)?;
        let mut buf = Vec::with_capacity(text.len());
        for c in text.chars() {
            let l = Letter::from_char(c).ok_or(Error::InvalidCharacter(c))?;
            if l.generator() > rank {
                return Err(Error::IndexOutOfRange {
                    index: l.generator(),
                    rank,
                });
            }
            push_reduced(&mut buf, l);
        }
        Ok(Word { rank, letters: buf })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    fn same_rank(&self, other: &Word) -> Result<()> {
        if self.rank == other.rank {
            Ok(())
        } else {
            Err(Error::RankMismatch {
                left: self.rank,
                right: other.rank,
            })
        }
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.same_rank(other)?;
        let mut letters = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut letters, l);
        }
        Ok(Word {
            rank: self.rank,
            letters,
        })
    }

    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, exponent: i64) -> Word {
        let base = if exponent < 0 {
            self.invert()
        } else {
            self.clone()
        };
        let mut out = Word::identity(self.rank);
        for _ in 0..exponent.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// `x * self * x⁻¹`.
    pub fn conjugate_by(&self, x: &Word) -> Word {
        &(x * self) * &x.invert()
    }

    /// True iff no cancellation occurs when forming `self * other`.
    pub fn is_reduced_product(&self, other: &Word) -> Result<bool> {
        self.same_rank(other)?;
        Ok(match (self.last(), other.first()) {
            (Some(x), Some(y)) => x != y.inverse(),
            _ => true,
        })
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.first(), self.last()) {
            (Some(f), Some(l)) => self.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Splits the word as `u c u⁻¹` with `c` cyclically reduced and `u` as
    /// short as possible.
    pub fn cyclic_reduce(&self) -> CyclicDecomposition {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k] == self.letters[n - 1 - k].inverse() {
            k += 1;
        }
        CyclicDecomposition {
            conjugator: Word {
                rank: self.rank,
                letters: self.letters[..k].to_vec(),
            },
            core: Word {
                rank: self.rank,
                letters: self.letters[k..n - k].to_vec(),
            },
        }
    }

    /// Image under the automorphism inverting every basis letter.
    pub fn iota(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().map(|l| l.inverse()).collect(),
        }
    }

    /// `s · ι(s)`, always a member of the commutator subgroup.
    pub fn commutator_square(&self) -> Word {
        self * &self.iota()
    }

    pub fn abelianize(&self) -> AbelianVector {
        let mut v = vec![0i64; self.rank];
        for l in &self.letters {
            v[l.generator() - 1] += if l.is_inverse() { -1 } else { 1 };
        }
        AbelianVector(v)
    }

    pub fn in_commutator_subgroup(&self) -> bool {
        self.abelianize().is_zero()
    }

    /// Replaces each basis letter `x_i` by `images[i-1]`; the images may live
    /// in a free group of a different rank.
    pub fn substitute(&self, images: &[Word]) -> Result<Word> {
        let target = images.first().map(|w| w.rank).ok_or(Error::RankMismatch {
            left: self.rank,
            right: 0,
        })?;
        if images.len() != self.rank {
            return Err(Error::RankMismatch {
                left: self.rank,
                right: images.len(),
            });
        }
        if let Some(bad) = images.iter().find(|w| w.rank != target) {
            return Err(Error::RankMismatch {
                left: target,
                right: bad.rank,
            });
        }
        let inverses: Vec<Word> = images.iter().map(Word::invert).collect();
        let mut letters = Vec::new();
        for l in &self.letters {
            let img = if l.is_inverse() {
                &inverses[l.generator() - 1]
            } else {
                &images[l.generator() - 1]
            };
            for &x in &img.letters {
                push_reduced(&mut letters, x);
            }
        }
        Ok(Word {
            rank: target,
            letters,
        })
    }

    /// Same letters viewed in a free group of larger rank.
    pub fn with_rank(&self, rank: usize) -> Result<Word> {
        Word::from_letters(rank, self.letters.iter().copied())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
            .then_with(|| self.rank.cmp(&other.rank))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Panics on rank mismatch; use [`Word::multiply`] for a checked product.
impl Mul<&Word> for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.multiply(rhs).expect("rank mismatch in word product")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            write!(f, "ε")
        } else {
            write!(f, "{self}")
        }
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `word = conjugator · core · conjugator⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicDecomposition {
    pub conjugator: Word,
    pub core: Word,
}

/// Exponent-sum vector of a word.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianVector(pub Vec<i64>);

impl AbelianVector {
    pub fn zero(rank: usize) -> Self {
        AbelianVector(vec![0; rank])
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }
}

impl Add for AbelianVector {
    type Output = AbelianVector;

    fn add(self, rhs: AbelianVector) -> AbelianVector {
        assert_eq!(self.0.len(), rhs.0.len());
        AbelianVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Neg for AbelianVector {
    type Output = AbelianVector;

    fn neg(self) -> AbelianVector {
        AbelianVector(self.0.into_iter().map(|x| -x).collect())
    }
}

impl fmt::Display for AbelianVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for AbelianVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The eventually periodic geodesic ray `prefix · period^∞` from the
/// identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPointRep {
    prefix: Word,
    period: Word,
}

impl BoundaryPointRep {
    pub fn new(prefix: Word, period: Word) -> Result<Self> {
        prefix.same_rank(&period)?;
        if period.is_identity() {
            return Err(Error::MalformedBoundaryPoint("empty period".into()));
        }
        if !period.is_cyclically_reduced() {
            return Err(Error::MalformedBoundaryPoint(format!(
                "period {period} is not cyclically reduced"
            )));
        }
        if !prefix.is_reduced_product(&period)? {
            return Err(Error::MalformedBoundaryPoint(format!(
                "{prefix}·{period} cancels"
            )));
        }
        Ok(BoundaryPointRep { prefix, period })
    }

    /// The ray `g^∞` of a nontrivial element.
    pub fn from_element(g: &Word) -> Result<Self> {
        if g.is_identity() {
            return Err(Error::TrivialElement);
        }
        let CyclicDecomposition { conjugator, core } = g.cyclic_reduce();
        // u c c c ... with u·c possibly cancelling only if c starts with the
        // inverse of u's last letter, which cyclic reduction rules out.
        BoundaryPointRep::new(conjugator, core)
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn letter_at(&self, i: usize) -> Letter {
        if i < self.prefix.len() {
            self.prefix.letters[i]
        } else {
            let j = (i - self.prefix.len()) % self.period.len();
            self.period.letters[j]
        }
    }

    /// Shortest prefix and primitive period describing the same ray.
    pub fn canonical(&self) -> BoundaryPointRep {
        let p = &self.period.letters;
        let n = p.len();
        let root_len = (1..=n)
            .find(|d| n % d == 0 && (0..n).all(|i| p[i] == p[i % d]))
            .unwrap_or(n);
        let mut period: Vec<Letter> = p[..root_len].to_vec();
        let mut prefix = self.prefix.letters.clone();
        while let (Some(&a), Some(&b)) = (prefix.last(), period.last()) {
            if a != b {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        BoundaryPointRep {
            prefix: Word {
                rank: self.prefix.rank,
                letters: prefix,
            },
            period: Word {
                rank: self.prefix.rank,
                letters: period,
            },
        }
    }
}

/// A value of the boundary metric: `0` or `2^-n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundaryDistance {
    Zero,
    /// `2^-n` where `n` is the length of the common initial segment.
    PowerOfHalf(u32),
}

impl BoundaryDistance {
    pub fn value(self) -> f64 {
        match self {
            BoundaryDistance::Zero => 0.0,
            BoundaryDistance::PowerOfHalf(n) => 0.5f64.powi(n as i32),
        }
    }
}

impl PartialOrd for BoundaryDistance {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BoundaryDistance {
    fn cmp(&self, other: &Self) -> Ordering {
        use BoundaryDistance::*;
        match (self, other) {
            (Zero, Zero) => Ordering::Equal,
            (Zero, _) => Ordering::Less,
            (_, Zero) => Ordering::Greater,
            (PowerOfHalf(a), PowerOfHalf(b)) => b.cmp(a),
        }
    }
}

impl fmt::Display for BoundaryDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryDistance::Zero => write!(f, "0"),
            BoundaryDistance::PowerOfHalf(n) => write!(f, "2^-{n}"),
        }
    }
}

/// Distance `2^-n` between two rays, `n` being the length of their longest
/// common initial segment.
pub fn boundary_distance(p: &BoundaryPointRep, q: &BoundaryPointRep) -> Result<BoundaryDistance> {
    p.prefix.same_rank(&q.prefix)?;
    // Two eventually periodic words agreeing on this many letters agree
    // everywhere (Fine–Wilf on the common periodic tail).
    let bound = p.prefix.len().max(q.prefix.len()) + p.period.len() + q.period.len();
    for i in 0..bound {
        if p.letter_at(i) != q.letter_at(i) {
            return Ok(BoundaryDistance::PowerOfHalf(i as u32));
        }
    }
    Ok(BoundaryDistance::Zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(2, s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        assert_eq!(free_reduce(2, &[(1, 1), (1, -1), (2, 1)]).unwrap(), w("b"));
        assert!(free_reduce(2, &[]).unwrap().is_identity());
        assert!(free_reduce(2, &[(1, 1), (2, 1), (2, -1), (1, -1)])
            .unwrap()
            .is_identity());
        assert_eq!(
            free_reduce(2, &[(3, 1)]),
            Err(Error::IndexOutOfRange { index: 3, rank: 2 })
        );
    }

    #[test]
    fn parse_rejects_letters_beyond_rank() {
        assert_eq!(
            Word::parse(2, "ac"),
            Err(Error::IndexOutOfRange { index: 3, rank: 2 })
        );
        assert_eq!(Word::parse(2, "a1"), Err(Error::InvalidCharacter('1')));
        assert_eq!(Word::parse(27, ""), Err(Error::UnsupportedRank(27)));
        assert_eq!(Word::parse(2, "aAb").unwrap().to_string(), "b");
    }

    #[test]
    fn products_and_inverses() {
        assert!(w("ab").multiply(&w("BA")).unwrap().is_identity());
        assert_eq!(w("aB").invert(), w("bA"));
        assert_eq!(w("ab").multiply(&w("ba")).unwrap(), w("abba"));
        let other = Word::parse(3, "a").unwrap();
        assert_eq!(
            w("a").multiply(&other),
            Err(Error::RankMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn reduced_products() {
        assert!(w("ab").is_reduced_product(&w("ba")).unwrap());
        assert!(!w("ab").is_reduced_product(&w("BA")).unwrap());
        assert!(w("a").is_reduced_product(&w("a")).unwrap());
    }

    #[test]
    fn cyclic_reduction_examples() {
        let d = w("Bab").cyclic_reduce();
        assert_eq!((d.conjugator, d.core), (w("B"), w("a")));
        let d = w("ab").cyclic_reduce();
        assert_eq!((d.conjugator, d.core), (w(""), w("ab")));
        let d = w("abA").cyclic_reduce();
        assert_eq!((d.conjugator, d.core), (w("a"), w("b")));
        let d = w("").cyclic_reduce();
        assert!(d.core.is_identity() && d.conjugator.is_identity());
        let d = w("abbA").cyclic_reduce();
        assert_eq!((d.conjugator, d.core), (w("a"), w("bb")));
    }

    #[test]
    fn iota_and_commutator_square() {
        assert_eq!(w("a").iota(), w("A"));
        assert_eq!(w("ab").iota(), w("AB"));
        assert_eq!(w("abA").iota(), w("ABa"));
        assert_eq!(w("ab").commutator_square(), w("abAB"));
        assert!(w("a").commutator_square().is_identity());
        let s = w("aB").commutator_square();
        assert_eq!(s, w("aBAb"));
        assert!(s.in_commutator_subgroup());
    }

    #[test]
    fn abelianization() {
        assert_eq!(w("abAB").abelianize(), AbelianVector(vec![0, 0]));
        assert!(w("abAB").in_commutator_subgroup());
        assert_eq!(w("abb").abelianize(), AbelianVector(vec![1, 2]));
        assert!(!w("abb").in_commutator_subgroup());
        let n = 7;
        let v = (&w("a") * &w("b").pow(n)).abelianize();
        assert_eq!(v, AbelianVector(vec![1, n]));
        assert_eq!(v.to_string(), "(1,7)");
    }

    fn ray(prefix: &str, period: &str) -> BoundaryPointRep {
        BoundaryPointRep::new(w(prefix), w(period)).unwrap()
    }

    #[test]
    fn boundary_distance_examples() {
        assert_eq!(
            boundary_distance(&ray("", "a"), &ray("", "a")).unwrap(),
            BoundaryDistance::Zero
        );
        assert_eq!(
            boundary_distance(&ray("", "a"), &ray("a", "b")).unwrap(),
            BoundaryDistance::PowerOfHalf(1)
        );
        // abababab… vs ababab·aaaa…: expanded to 8 letters they first differ at index 7.
        let d = boundary_distance(&ray("", "ab"), &ray("ababab", "a")).unwrap();
        assert_eq!(d, BoundaryDistance::PowerOfHalf(7));
        assert_eq!(d.value(), 1.0 / 128.0);
    }

    #[test]
    fn equal_rays_with_different_presentations() {
        let p = ray("ab", "ab");
        let q = ray("", "abab");
        assert_eq!(boundary_distance(&p, &q).unwrap(), BoundaryDistance::Zero);
        assert_eq!(p.canonical(), q.canonical());
        assert_eq!(p.canonical(), ray("", "ab"));
    }

    #[test]
    fn malformed_boundary_points() {
        assert!(BoundaryPointRep::new(w("a"), w("")).is_err());
        assert!(BoundaryPointRep::new(w(""), w("abA")).is_err());
        assert!(BoundaryPointRep::new(w("b"), w("Ba")).is_err());
    }
}

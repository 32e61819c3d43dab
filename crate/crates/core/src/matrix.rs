//! Square integer matrices and finite matrix groups, generic over the
//! integer scalar.

use std::collections::HashMap;
use std::fmt::{self, Debug, Display};
use std::hash::Hash;
use std::ops::Mul;

use num_integer::Integer;
use num_traits::{FromPrimitive, Signed, ToPrimitive};
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};

pub type IntMatrix = Matrix<i64>;
pub type BigIntMatrix = Matrix<num_bigint::BigInt>;
pub type IntMatrixGroup = FiniteMatrixGroup<i64>;
pub type BigIntMatrixGroup = FiniteMatrixGroup<num_bigint::BigInt>;

/// Exact integer scalar usable as a matrix entry.
pub trait Scalar:
    Integer + Signed + FromPrimitive + ToPrimitive + Clone + Hash + Debug + Display + Send + Sync
{
}

impl<T> Scalar for T where
    T: Integer
        + Signed
        + FromPrimitive
        + ToPrimitive
        + Clone
        + Hash
        + Debug
        + Display
        + Send
        + Sync
{
}

/// Row-major square matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix<T> {
    dim: usize,
    entries: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![T::zero(); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = T::one();
        }
        Matrix { dim, entries }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Parse("matrix is not square".into()));
        }
        Ok(Matrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds the matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<T>]) -> Result<Self> {
        let dim = columns.len();
        if columns.iter().any(|c| c.len() != dim) {
            return Err(Error::Parse("matrix is not square".into()));
        }
        let entries = (0..dim)
            .flat_map(|i| columns.iter().map(move |c| c[i].clone()))
            .collect();
        Ok(Matrix { dim, entries })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.entries[row * self.dim + col]
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.entries
            .chunks(self.dim.max(1))
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Matrix::identity(self.dim)
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(v.len(), self.dim, "dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim).fold(T::zero(), |acc, j| {
                    acc + self.get(i, j).clone() * v[j].clone()
                })
            })
            .collect()
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> T {
        let n = self.dim;
        if n == 0 {
            return T::one();
        }
        let mut a = self.rows();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].clone() * a[k][k].clone() - a[i][k].clone() * a[k][j].clone();
                    a[i][j] = num / prev.clone();
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    /// `Some(c)` when the matrix is `c·I`.
    pub fn scalar_value(&self) -> Option<T> {
        let c = self.get(0, 0).clone();
        let scalar = (0..self.dim).all(|i| {
            (0..self.dim).all(|j| *self.get(i, j) == if i == j { c.clone() } else { T::zero() })
        });
        scalar.then_some(c)
    }

    /// Whether `M·v` is an integer multiple of `v`; returns the factor.
    pub fn eigenvalue_of(&self, v: &[T]) -> Option<T> {
        let mv = self.mul_vec(v);
        let pivot = v.iter().position(|x| !x.is_zero())?;
        let (q, r) = mv[pivot].div_rem(&v[pivot]);
        if !r.is_zero() {
            return None;
        }
        v.iter()
            .zip(&mv)
            .all(|(x, y)| x.clone() * q.clone() == *y)
            .then_some(q)
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut entries = vec![T::zero(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    entries[i * n + j] =
                        entries[i * n + j].clone() + a.clone() * rhs.get(k, j).clone();
                }
            }
        }
        Matrix { dim: n, entries }
    }
}

impl<T: Scalar> Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.rows().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(
                f,
                "[{}]",
                row.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        Display::fmt(self, f)
    }
}

/// Entries that fit in `i64` serialize as numbers, larger ones as strings.
struct Entry<'a, T>(&'a T);

impl<T: Scalar> Serialize for Entry<'_, T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim))?;
        for row in self.entries.chunks(self.dim.max(1)) {
            seq.serialize_element(&row.iter().map(Entry).collect::<Vec<_>>())?;
        }
        seq.end()
    }
}

/// A finite group of unimodular matrices together with the map from an
/// indexing set (typically a finite group `Q`) onto it.
#[derive(Clone, Debug, Serialize)]
pub struct FiniteMatrixGroup<T: Scalar> {
    pub dim: usize,
    /// Distinct elements; the identity comes first, the rest in order of
    /// first appearance in the image list.
    pub elements: Vec<Matrix<T>>,
    /// `q ↦` position in `elements`.
    pub image_of: Vec<usize>,
}

impl<T: Scalar> FiniteMatrixGroup<T> {
    /// Collects the images and verifies the group axioms.
    pub fn from_images(dim: usize, images: &[Matrix<T>]) -> Result<Self> {
        let mut elements = vec![Matrix::identity(dim)];
        let mut position: HashMap<Matrix<T>, usize> = HashMap::from([(Matrix::identity(dim), 0)]);
        let mut image_of = Vec::with_capacity(images.len());
        for m in images {
            if m.dim() != dim {
                return Err(Error::RankMismatch {
                    left: dim,
                    right: m.dim(),
                });
            }
            let next = elements.len();
            let idx = *position.entry(m.clone()).or_insert(next);
            if idx == next {
                elements.push(m.clone());
            }
            image_of.push(idx);
        }
        let group = FiniteMatrixGroup {
            dim,
            elements,
            image_of,
        };
        group.verify()?;
        Ok(group)
    }

    fn verify(&self) -> Result<()> {
        let members: HashMap<&Matrix<T>, usize> = self
            .elements
            .iter()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        for (i, m) in self.elements.iter().enumerate() {
            let det = m.determinant();
            if !det.is_one() && !(-det).is_one() {
                return Err(Error::NotAGroup(format!(
                    "matrix {m} has determinant other than ±1"
                )));
            }
            for n in &self.elements {
                if !members.contains_key(&(m * n)) {
                    return Err(Error::NotClosed(format!("product of {m} and {n}")));
                }
            }
            if !self.elements.iter().any(|n| (m * n).is_identity()) {
                return Err(Error::NotClosed(format!("inverse of element {i}")));
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn nontrivial(&self) -> impl Iterator<Item = &Matrix<T>> {
        self.elements.iter().filter(|m| !m.is_identity())
    }

    pub fn image(&self, q: usize) -> &Matrix<T> {
        &self.elements[self.image_of[q]]
    }

    /// Whether `q ↦ M_q` respects a multiplication table on the index set.
    pub fn is_homomorphism(&self, table: &[Vec<usize>]) -> bool {
        (0..table.len()).all(|a| {
            (0..table.len()).all(|b| *self.image(table[a][b]) == self.image(a) * self.image(b))
        })
    }
}

/// One rejected exponent: `M·v = λ·v`.
#[derive(Clone, Debug, Serialize)]
pub struct EigenRejection<T: Scalar> {
    pub n: u64,
    pub matrix: Matrix<T>,
    pub vector: Vec<T>,
    pub eigenvalue: T,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExponentChoice<T: Scalar> {
    pub n: u64,
    /// The first offending matrix for every smaller exponent.
    pub rejected: Vec<EigenRejection<T>>,
}

fn probe<T: Scalar>(dim: usize, n: u64) -> Vec<T> {
    let mut v = vec![T::zero(); dim];
    v[0] = T::one();
    v[1] = T::from_u64(n).expect("exponent fits the scalar");
    v
}

/// Least `N ≥ 1` such that `v = e₁ + N·e₂` is an eigenvector of no
/// nontrivial element of `L`.
///
/// A finite-order integer matrix can only have eigenvalues `±1` on integer
/// vectors, so each `M` rejects at most two exponents unless it acts as a
/// scalar on `span(e₁, e₂)`, in which case it rejects all of them. The
/// search is therefore bounded by `2·|L| + 1`.
pub fn choose_exponent_n<T: Scalar>(l: &FiniteMatrixGroup<T>) -> Result<ExponentChoice<T>> {
    if l.dim < 2 {
        return Err(Error::UnsupportedRank(l.dim));
    }
    for m in l.nontrivial() {
        let e1 = probe::<T>(l.dim, 0);
        let mut e2 = vec![T::zero(); l.dim];
        e2[1] = T::one();
        if let (Some(a), Some(b)) = (m.eigenvalue_of(&e1), m.eigenvalue_of(&e2)) {
            if a == b {
                return Err(Error::ScalarObstruction(format!(
                    "{m} acts as the scalar {a} on span(e1, e2), so every v = e1 + N e2 is an eigenvector"
                )));
            }
        }
    }
    let bound = 2 * l.order() as u64 + 1;
    let mut rejected = Vec::new();
    for n in 1..=bound {
        let v = probe::<T>(l.dim, n);
        match l
            .nontrivial()
            .find_map(|m| m.eigenvalue_of(&v).map(|e| (m, e)))
        {
            Some((m, eigenvalue)) => rejected.push(EigenRejection {
                n,
                matrix: m.clone(),
                vector: v,
                eigenvalue,
            }),
            None => return Ok(ExponentChoice { n, rejected }),
        }
    }
    Err(Error::TheoremViolation(format!(
        "no admissible exponent up to {bound}"
    )))
}

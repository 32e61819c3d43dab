//! Shortlex enumeration of reduced words.

use crate::word::{Letter, Word};

/// All reduced words of length `min_len..=max_len` in shortlex order.
#[derive(Clone, Debug)]
pub struct ReducedWords {
    rank: usize,
    max_len: usize,
    current: Option<Vec<usize>>,
}

impl ReducedWords {
    pub fn new(rank: usize, max_len: usize) -> Self {
        Self::with_lengths(rank, 0, max_len)
    }

    pub fn with_lengths(rank: usize, min_len: usize, max_len: usize) -> Self {
        let current = if min_len <= max_len {
            first_of_length(min_len)
        } else {
            None
        };
        ReducedWords {
            rank,
            max_len,
            current,
        }
    }

    fn advance(&self, word: &[usize]) -> Option<Vec<usize>> {
        let alphabet = 2 * self.rank;
        let mut w = word.to_vec();
        for i in (0..w.len()).rev() {
            let mut next = w[i] + 1;
            if i > 0 && next == inverse_ordinal(w[i - 1]) {
                next += 1;
            }
            if next < alphabet {
                w[i] = next;
                fill_smallest(&mut w, i + 1);
                return Some(w);
            }
        }
        if word.len() < self.max_len {
            first_of_length(word.len() + 1)
        } else {
            None
        }
    }
}

fn inverse_ordinal(o: usize) -> usize {
    o ^ 1
}

fn first_of_length(len: usize) -> Option<Vec<usize>> {
    let mut w = vec![0; len];
    fill_smallest(&mut w, 0);
    Some(w)
}

fn fill_smallest(w: &mut [usize], from: usize) {
    for j in from..w.len() {
        w[j] = if j > 0 && inverse_ordinal(w[j - 1]) == 0 {
            1
        } else {
            0
        };
    }
}

impl Iterator for ReducedWords {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.take()?;
        if cur.len() > self.max_len {
            return None;
        }
        self.current = self.advance(&cur);
        Some(
            Word::from_letters(self.rank, cur.iter().map(|&o| Letter::from_ordinal(o)))
                .expect("ordinal within rank"),
        )
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A word over the symbols `0..m`.
///
/// Serialized as its digit string, e.g. `"0121"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Word(pub Vec<u8>);

const DIGITS: &[u8; 36] = b"0123456789abcdefghijklmnopqrstuvwxyz";

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[u8] {
        &self.0
    }

    /// Left cyclic rotation by `k` letters.
    pub fn rotated(&self, k: usize) -> Word {
        let n = self.0.len();
        Word((0..n).map(|i| self.0[(i + k) % n]).collect())
    }

    /// Mirror image (letters in reverse order).
    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &s in &self.0 {
            write!(f, "{}", DIGITS[s as usize] as char)?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Word> {
        s.bytes()
            .map(|b| {
                DIGITS
                    .iter()
                    .position(|&d| d == b.to_ascii_lowercase())
                    .map(|p| p as u8)
                    .ok_or_else(|| Error::InvalidWord(format!("bad letter {:?} in {s:?}", b as char)))
            })
            .collect::<Result<Vec<u8>>>()
            .map(Word)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Word> {
        s.parse()
    }
}

impl From<Vec<u8>> for Word {
    fn from(v: Vec<u8>) -> Self {
        Word(v)
    }
}

/// Subshift of finite type on `m` symbols given by a boolean adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subshift {
    m: usize,
    transition: Vec<bool>,
}

impl Subshift {
    /// Validates the adjacency: no dead symbols and an irreducible recurrent
    /// part.
    pub fn new(transition: Vec<Vec<bool>>) -> Result<Self> {
        let m = transition.len();
        if m < 2 {
            return Err(Error::InvalidSubshift(format!("need at least 2 symbols, got {m}")));
        }
        if m > DIGITS.len() {
            return Err(Error::InvalidSubshift(format!("at most {} symbols supported", DIGITS.len())));
        }
        if transition.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidSubshift("adjacency is not square".into()));
        }
        let flat: Vec<bool> = transition.into_iter().flatten().collect();
        let shift = Subshift { m, transition: flat };
        for i in 0..m {
            if !(0..m).any(|j| shift.allowed(i, j)) {
                return Err(Error::InvalidSubshift(format!("symbol {i} has no outgoing transition")));
            }
            if !(0..m).any(|j| shift.allowed(j, i)) {
                return Err(Error::InvalidSubshift(format!("symbol {i} has no incoming transition")));
            }
        }
        if !shift.recurrent_part_irreducible() {
            return Err(Error::InvalidSubshift("recurrent part is not irreducible".into()));
        }
        Ok(shift)
    }

    /// Full shift on `m` symbols.
    pub fn full(m: usize) -> Result<Self> {
        Self::new(vec![vec![true; m]; m])
    }

    /// All transitions except `i → i` (the disk-billiard coding).
    pub fn no_repeat(m: usize) -> Result<Self> {
        Self::new((0..m).map(|i| (0..m).map(|j| i != j).collect()).collect())
    }

    pub fn symbol_count(&self) -> usize {
        self.m
    }

    pub fn allowed(&self, from: usize, to: usize) -> bool {
        self.transition[from * self.m + to]
    }

    pub fn is_admissible(&self, word: &[u8]) -> bool {
        word.iter().all(|&s| (s as usize) < self.m)
            && word.windows(2).all(|w| self.allowed(w[0] as usize, w[1] as usize))
    }

    /// Admissible and the wrap-around transition `last → first` is allowed.
    pub fn is_cyclically_admissible(&self, word: &[u8]) -> bool {
        match (word.first(), word.last()) {
            (Some(&f), Some(&l)) => self.is_admissible(word) && self.allowed(l as usize, f as usize),
            _ => false,
        }
    }

    /// All admissible words of length `n`, in lexicographic order.
    pub fn words(&self, n: usize) -> Vec<Word> {
        let mut out: Vec<Vec<u8>> = (0..self.m as u8).map(|s| vec![s]).collect();
        if n == 0 {
            return vec![Word(Vec::new())];
        }
        for _ in 1..n {
            out = out
                .into_iter()
                .flat_map(|w| {
                    let last = *w.last().unwrap() as usize;
                    (0..self.m)
                        .filter(move |&j| self.allowed(last, j))
                        .map(move |j| {
                            let mut v = w.clone();
                            v.push(j as u8);
                            v
                        })
                })
                .collect();
        }
        out.into_iter().map(Word).collect()
    }

    /// Words of length `n` that close up into periodic orbits.
    pub fn cyclic_words(&self, n: usize) -> Vec<Word> {
        self.words(n)
            .into_iter()
            .filter(|w| self.is_cyclically_admissible(&w.0))
            .collect()
    }

    fn reach(&self) -> Vec<Vec<bool>> {
        // transitive closure (paths of length >= 1)
        let m = self.m;
        let mut r: Vec<Vec<bool>> = (0..m).map(|i| (0..m).map(|j| self.allowed(i, j)).collect()).collect();
        for k in 0..m {
            for i in 0..m {
                if r[i][k] {
                    for j in 0..m {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    fn recurrent_symbols(&self) -> Vec<usize> {
        let r = self.reach();
        (0..self.m).filter(|&i| r[i][i]).collect()
    }

    fn recurrent_part_irreducible(&self) -> bool {
        let r = self.reach();
        let rec = self.recurrent_symbols();
        !rec.is_empty() && rec.iter().all(|&i| rec.iter().all(|&j| r[i][j]))
    }

    /// Whether some power of the adjacency is positive on the recurrent
    /// symbols (irreducible and aperiodic).
    pub fn is_primitive(&self) -> bool {
        let rec = self.recurrent_symbols();
        let k = rec.len();
        if k == 0 {
            return false;
        }
        // Wielandt bound
        let max_power = (k - 1) * (k - 1) + 1;
        let mut power: Vec<Vec<bool>> = rec.iter().map(|&i| rec.iter().map(|&j| self.allowed(i, j)).collect()).collect();
        for _ in 1..max_power {
            if power.iter().flatten().all(|&b| b) {
                return true;
            }
            let next = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| (0..k).any(|l| power[i][l] && self.allowed(rec[l], rec[j])))
                        .collect()
                })
                .collect();
            power = next;
        }
        power.iter().flatten().all(|&b| b)
    }
}

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::subshift::{Subshift, Word};
use crate::{Error, Result};

/// Birkhoff sums carried by one cylinder.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderEntry {
    /// Sum of the unstable log-Jacobian `φ_u` over the word (dimensionless).
    #[serde(rename = "logJ")]
    pub log_j: f64,
    /// Sum of return times over the word (flow-time units).
    pub t: f64,
}

/// Per-step lower bounds every entry must respect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableBounds {
    pub lambda_floor: f64,
    pub t_min: f64,
}

impl Default for TableBounds {
    fn default() -> Self {
        TableBounds { lambda_floor: 1e-6, t_min: 1e-6 }
    }
}

/// Word-indexed weights at a fixed depth `n` on a [`Subshift`].
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderTable {
    n: usize,
    subshift: Subshift,
    entries: BTreeMap<Word, CylinderEntry>,
}

impl CylinderTable {
    pub fn new(
        subshift: Subshift,
        n: usize,
        entries: BTreeMap<Word, CylinderEntry>,
        bounds: TableBounds,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidTable("depth must be at least 1".into()));
        }
        for (w, e) in &entries {
            if w.len() != n {
                return Err(Error::InvalidTable(format!("word {w} has length {} != {n}", w.len())));
            }
            if !subshift.is_admissible(w.symbols()) {
                return Err(Error::InvalidTable(format!("word {w} is not admissible")));
            }
            if !e.log_j.is_finite() || !e.t.is_finite() {
                return Err(Error::InvalidTable(format!("word {w} has non-finite weights")));
            }
            if e.log_j < n as f64 * bounds.lambda_floor {
                return Err(Error::InvalidTable(format!(
                    "word {w}: logJ = {} below n·λ_floor = {}",
                    e.log_j,
                    n as f64 * bounds.lambda_floor
                )));
            }
            if e.t < n as f64 * bounds.t_min {
                return Err(Error::InvalidTable(format!(
                    "word {w}: t = {} below n·t_min = {}",
                    e.t,
                    n as f64 * bounds.t_min
                )));
            }
        }
        Ok(CylinderTable { n, subshift, entries })
    }

    /// Table with per-step constant weights on every admissible word.
    pub fn constant(subshift: Subshift, n: usize, log_j_per_step: f64, t_per_step: f64) -> Result<Self> {
        let entry = CylinderEntry { log_j: n as f64 * log_j_per_step, t: n as f64 * t_per_step };
        let entries = subshift.words(n).into_iter().map(|w| (w, entry)).collect();
        Self::new(subshift, n, entries, TableBounds::default())
    }

    pub fn depth(&self) -> usize {
        self.n
    }

    pub fn subshift(&self) -> &Subshift {
        &self.subshift
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, w: &Word) -> Option<&CylinderEntry> {
        self.entries.get(w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &CylinderEntry)> {
        self.entries.iter()
    }

    /// Writes `word,logJ,t` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["word", "logJ", "t"]).map_err(csv_err)?;
        for (w, e) in &self.entries {
            wtr.write_record([w.to_string(), fmt_f64(e.log_j), fmt_f64(e.t)]).map_err(csv_err)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a table written by [`CylinderTable::write_csv`]; depth is taken
    /// from the word length.
    pub fn read_csv<R: Read>(subshift: Subshift, input: R, bounds: TableBounds) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        if headers.iter().collect::<Vec<_>>() != ["word", "logJ", "t"] {
            return Err(Error::InvalidTable(format!("unexpected header {headers:?}")));
        }
        let mut entries = BTreeMap::new();
        let mut n = None;
        for rec in rdr.records() {
            let rec = rec.map_err(csv_err)?;
            let word: Word = rec[0].parse()?;
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidTable(format!("{s:?}: {e}")));
            let entry = CylinderEntry { log_j: parse(&rec[1])?, t: parse(&rec[2])? };
            n.get_or_insert(word.len());
            entries.insert(word, entry);
        }
        let n = n.ok_or(Error::EmptyTable)?;
        Self::new(subshift, n, entries, bounds)
    }
}

/// Shortest representation that parses back to the same bits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Serialization(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_inadmissible_and_non_hyperbolic_entries() {
        let shift = Subshift::no_repeat(3).unwrap();
        let bad_word: BTreeMap<_, _> = [(Word(vec![0, 0]), CylinderEntry { log_j: 1.0, t: 1.0 })].into();
        assert!(CylinderTable::new(shift.clone(), 2, bad_word, TableBounds::default()).is_err());
        let flat: BTreeMap<_, _> = [(Word(vec![0, 1]), CylinderEntry { log_j: 0.0, t: 1.0 })].into();
        assert!(CylinderTable::new(shift.clone(), 2, flat, TableBounds::default()).is_err());
        let timeless: BTreeMap<_, _> = [(Word(vec![0, 1]), CylinderEntry { log_j: 1.0, t: 0.0 })].into();
        assert!(CylinderTable::new(shift, 2, timeless, TableBounds::default()).is_err());
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let shift = Subshift::no_repeat(3).unwrap();
        let entries = shift
            .words(3)
            .into_iter()
            .enumerate()
            .map(|(i, w)| (w, CylinderEntry { log_j: 1.0 / 3.0 + i as f64, t: std::f64::consts::PI * (i + 1) as f64 }))
            .collect();
        let table = CylinderTable::new(shift.clone(), 3, entries, TableBounds::default()).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"word,logJ,t\n"));
        let back = CylinderTable::read_csv(shift, buf.as_slice(), TableBounds::default()).unwrap();
        assert_eq!(back, table);
    }
}

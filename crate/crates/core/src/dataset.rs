//! Labeled binary samples and the CSV dataset format.
//!
//! The CSV layout is a header `f1,...,fn,label` followed by one row per
//! sample: `n` cells of `0`/`1` and a label of `pos`/`neg` (`1`/`0` are
//! accepted on input). Output always uses `pos`/`neg` and `\n` line ends.

use std::collections::HashMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sample {
    pub bits: Vec<bool>,
    pub label: Label,
}

impl Sample {
    pub fn new(bits: Vec<bool>, label: Label) -> Self {
        Sample { bits, label }
    }

    /// Builds a sample from a `0`/`1` string such as `"101"`.
    pub fn from_bits(text: &str, label: Label) -> Self {
        Sample::new(text.chars().map(|c| c == '1').collect(), label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    n: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(n: usize, samples: Vec<Sample>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("datasets need at least one feature".into()));
        }
        if let Some(s) = samples.iter().find(|s| s.bits.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.bits.len(),
            });
        }
        Ok(Dataset { n, samples })
    }

    pub fn empty(n: usize) -> Result<Self> {
        Dataset::new(n, Vec::new())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn positives(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.label == Label::Positive)
    }

    pub fn negatives(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.label == Label::Negative)
    }

    pub fn m_p(&self) -> usize {
        self.positives().count()
    }

    pub fn m_n(&self) -> usize {
        self.negatives().count()
    }

    /// First pair of sample indices carrying the same vector with opposite labels.
    pub fn find_conflict(&self) -> Option<(usize, usize)> {
        let mut seen: HashMap<&[bool], (usize, Label)> = HashMap::new();
        for (i, s) in self.samples.iter().enumerate() {
            match seen.get(s.bits.as_slice()) {
                Some(&(j, label)) if label != s.label => return Some((j, i)),
                Some(_) => {}
                None => {
                    seen.insert(&s.bits, (i, s.label));
                }
            }
        }
        None
    }

    /// Same dataset with samples in the given order (a permutation of indices).
    pub fn permuted(&self, order: &[usize]) -> Dataset {
        Dataset {
            n: self.n,
            samples: order.iter().map(|&i| self.samples[i].clone()).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity((self.samples.len() + 1) * (2 * self.n + 5));
        for i in 1..=self.n {
            out.push('f');
            out.push_str(&i.to_string());
            out.push(',');
        }
        out.push_str("label\n");
        for s in &self.samples {
            for &b in &s.bits {
                out.push(if b { '1' } else { '0' });
                out.push(',');
            }
            out.push_str(match s.label {
                Label::Positive => "pos\n",
                Label::Negative => "neg\n",
            });
        }
        out
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Dataset> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let csv_err = |e: csv::Error| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse {
                line,
                column: 0,
                message: e.to_string(),
            }
        };
        let header = rdr.headers().map_err(csv_err)?.clone();
        let width = header.len();
        if width < 2 || &header[width - 1] != "label" {
            return Err(Error::Parse {
                line: 1,
                column: width,
                message: "header must be f1,...,fn,label".into(),
            });
        }
        let n = width - 1;
        let mut samples = Vec::new();
        for record in rdr.records() {
            let record = record.map_err(csv_err)?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != width {
                return Err(Error::Parse {
                    line,
                    column: record.len().min(width) + 1,
                    message: format!("expected {width} cells, found {}", record.len()),
                });
            }
            let mut bits = Vec::with_capacity(n);
            for (c, cell) in record.iter().take(n).enumerate() {
                bits.push(match cell {
                    "0" => false,
                    "1" => true,
                    other => {
                        return Err(Error::Parse {
                            line,
                            column: c + 1,
                            message: format!("non-binary cell `{other}`"),
                        })
                    }
                });
            }
            let label = match &record[n] {
                "pos" | "1" => Label::Positive,
                "neg" | "0" => Label::Negative,
                other => {
                    return Err(Error::Parse {
                        line,
                        column: width,
                        message: format!("unknown label `{other}`"),
                    })
                }
            };
            samples.push(Sample { bits, label });
        }
        Dataset::new(n, samples)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_counts_and_conflicts() {
        let d = Dataset::new(
            2,
            vec![
                Sample::from_bits("11", Label::Positive),
                Sample::from_bits("00", Label::Negative),
                Sample::from_bits("11", Label::Positive),
            ],
        )
        .unwrap();
        assert_eq!((d.m_p(), d.m_n()), (2, 1));
        assert_eq!(d.find_conflict(), None);
        let c = Dataset::new(
            2,
            vec![
                Sample::from_bits("10", Label::Positive),
                Sample::from_bits("01", Label::Negative),
                Sample::from_bits("10", Label::Negative),
            ],
        )
        .unwrap();
        assert_eq!(c.find_conflict(), Some((0, 2)));
    }

    #[test]
    fn csv_round_trip() {
        let text = "f1,f2,f3,label\n1,0,1,pos\n0,0,0,neg\n";
        let d = Dataset::from_csv(text.as_bytes()).unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.to_csv(), text);
    }

    #[test]
    fn numeric_labels_accepted() {
        let d = Dataset::from_csv("f1,label\n1,1\n0,0\n".as_bytes()).unwrap();
        assert_eq!((d.m_p(), d.m_n()), (1, 1));
    }

    fn parse_err(text: &str) -> (u64, usize) {
        match Dataset::from_csv(text.as_bytes()) {
            Err(Error::Parse { line, column, .. }) => (line, column),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn diagnostics_point_at_the_bad_cell() {
        assert_eq!(parse_err("f1,f2,label\n1,0,pos\n1,2,neg\n"), (3, 2));
        assert_eq!(parse_err("f1,f2,label\n1,0,pos\n1,neg\n"), (3, 3));
        assert_eq!(parse_err("f1,f2,label\n1,0,maybe\n"), (2, 3));
        assert_eq!(parse_err("f1,f2\n1,0\n"), (1, 2));
    }
}

//! Golden tables of coefficients and valuations, loaded from CSV files.
//!
//! The files under `data/appendix` are compiled in; [`Appendix::load_dir`]
//! reads a replacement set from disk.

use std::path::Path;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::padic::int_valuation;
use crate::psi::solve_psi;

const PSI2_COEFFICIENTS: &str = include_str!("../data/appendix/psi2_coefficients.csv");
const PSI2_VALUATIONS: &str = include_str!("../data/appendix/psi2_valuations.csv");
const PSI3_VALUATIONS: &str = include_str!("../data/appendix/psi3_valuations.csv");
const LEADING_TERMS: &str = include_str!("../data/appendix/leading_terms.csv");

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("{file}: {source}")]
    Csv { file: String, source: csv::Error },
    #[error("{file} row {row}: {msg}")]
    Row { file: String, row: usize, msg: String },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
}

#[derive(Clone, Debug, Deserialize)]
struct CoeffRow {
    n: usize,
    b_n: String,
}

#[derive(Clone, Debug, Deserialize)]
struct ValRow {
    n: usize,
    v: u32,
}

/// `b_n = sign · cofactor · p^exponent` for `Ψ_p`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
pub struct LeadingTerm {
    pub p: u64,
    pub n: usize,
    pub sign: i8,
    pub cofactor: String,
    pub exponent: u32,
}

impl LeadingTerm {
    pub fn value(&self) -> Option<BigInt> {
        let c: BigInt = self.cofactor.parse().ok()?;
        Some(BigInt::from(self.sign) * c * num_traits::pow(BigInt::from(self.p), self.exponent as usize))
    }
}

#[derive(Clone, Debug)]
pub struct Appendix {
    pub psi2_coefficients: Vec<(usize, BigInt)>,
    pub psi2_valuations: Vec<(usize, u32)>,
    pub psi3_valuations: Vec<(usize, u32)>,
    pub leading_terms: Vec<LeadingTerm>,
}

fn rows<T: for<'de> Deserialize<'de>>(file: &str, text: &str) -> Result<Vec<T>, FixtureError> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|source| FixtureError::Csv { file: file.into(), source })
}

impl Appendix {
    pub fn bundled() -> Self {
        Self::parse(PSI2_COEFFICIENTS, PSI2_VALUATIONS, PSI3_VALUATIONS, LEADING_TERMS).expect("bundled tables parse")
    }

    /// Reads the four CSV files from `dir`.
    pub fn load_dir(dir: &Path) -> Result<Self, FixtureError> {
        let read = |name: &str| {
            let path = dir.join(name);
            std::fs::read_to_string(&path).map_err(|e| FixtureError::Io(path.display().to_string(), e))
        };
        Self::parse(
            &read("psi2_coefficients.csv")?,
            &read("psi2_valuations.csv")?,
            &read("psi3_valuations.csv")?,
            &read("leading_terms.csv")?,
        )
    }

    fn parse(c2: &str, v2: &str, v3: &str, lead: &str) -> Result<Self, FixtureError> {
        let psi2_coefficients = rows::<CoeffRow>("psi2_coefficients.csv", c2)?
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.b_n.parse().map(|b| (r.n, b)).map_err(|_| FixtureError::Row {
                    file: "psi2_coefficients.csv".into(),
                    row: i + 1,
                    msg: format!("not an integer: {}", r.b_n),
                })
            })
            .collect::<Result<_, _>>()?;
        let vals = |file: &str, text: &str| -> Result<Vec<(usize, u32)>, FixtureError> {
            Ok(rows::<ValRow>(file, text)?.into_iter().map(|r| (r.n, r.v)).collect())
        };
        Ok(Appendix {
            psi2_coefficients,
            psi2_valuations: vals("psi2_valuations.csv", v2)?,
            psi3_valuations: vals("psi3_valuations.csv", v3)?,
            leading_terms: rows("leading_terms.csv", lead)?,
        })
    }
}

/// Outcome of one named comparison.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check { name: name.into(), passed, detail: detail.into() }
    }
}

fn compare_rows<T: PartialEq + std::fmt::Display>(
    name: &str,
    file: &str,
    rows: impl Iterator<Item = (usize, T, T)>,
) -> Check {
    let mut count = 0;
    for (n, expected, got) in rows {
        count += 1;
        if expected != got {
            return Check::new(name, false, format!("{file} row n={n}: expected {expected}, computed {got}"));
        }
    }
    Check::new(name, true, format!("{count} rows match"))
}

/// Compares the tables relevant to `Ψ_p` with freshly computed coefficients.
/// Primes without tabulated data yield no checks.
pub fn check_appendix(tables: &Appendix, p: u64) -> Vec<Check> {
    let mut out = Vec::new();
    let lead: Vec<&LeadingTerm> = tables.leading_terms.iter().filter(|t| t.p == p).collect();
    let mut degree = lead.iter().map(|t| t.n).max().unwrap_or(0);
    match p {
        2 => {
            degree = degree
                .max(tables.psi2_coefficients.iter().map(|r| r.0).max().unwrap_or(0))
                .max(tables.psi2_valuations.iter().map(|r| r.0).max().unwrap_or(0));
        }
        3 => degree = degree.max(tables.psi3_valuations.iter().map(|r| r.0).max().unwrap_or(0)),
        _ => {}
    }
    if degree == 0 {
        return out;
    }
    let psi = match solve_psi(p, 1, degree) {
        Ok(t) => t,
        Err(e) => return vec![Check::new("solve", false, e.to_string())],
    };
    let coeff = |n: usize| if n <= degree { psi.coeff(n).clone() } else { BigInt::zero() };
    let val = |n: usize| {
        let c = coeff(n);
        if c.is_zero() {
            u32::MAX
        } else {
            int_valuation(&c, p)
        }
    };
    if p == 2 {
        out.push(compare_rows(
            "psi2 exact coefficients",
            "psi2_coefficients.csv",
            tables.psi2_coefficients.iter().map(|(n, b)| (*n, b.clone(), coeff(*n))),
        ));
        out.push(compare_rows(
            "psi2 valuations",
            "psi2_valuations.csv",
            tables.psi2_valuations.iter().map(|(n, v)| (*n, *v, val(*n))),
        ));
    }
    if p == 3 {
        out.push(compare_rows(
            "psi3 valuations",
            "psi3_valuations.csv",
            tables.psi3_valuations.iter().map(|(n, v)| (*n, *v, val(*n))),
        ));
    }
    if !lead.is_empty() {
        // listed terms exactly, every unlisted degree up to the last one zero
        let top = lead.iter().map(|t| t.n).max().unwrap_or(0);
        let expected = |n: usize| -> BigInt {
            lead.iter().find(|t| t.n == n).map(|t| t.value().unwrap_or_else(|| -BigInt::one())).unwrap_or_default()
        };
        out.push(compare_rows(
            &format!("psi{p} leading terms"),
            "leading_terms.csv",
            (1..=top).map(|n| (n, expected(n), coeff(n))),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_tables_parse() {
        let a = Appendix::bundled();
        assert_eq!(a.psi2_coefficients.len(), 24);
        assert_eq!(a.psi2_valuations.len(), 32);
        assert_eq!(a.psi3_valuations.len(), 40);
        assert_eq!(a.psi2_coefficients[8], (9, BigInt::from(20711204716544i64)));
    }

    #[test]
    fn corrupted_row_is_named() {
        let mut a = Appendix::bundled();
        a.psi2_valuations[4].1 += 1;
        let checks = check_appendix(&a, 2);
        let bad = checks.iter().find(|c| !c.passed).unwrap();
        assert!(bad.detail.contains("n=5"), "{}", bad.detail);
    }
}

//! Output rows and their CSV / JSON encodings.
//!
//! Infinity is written as the string `inf` in both formats so a column
//! keeps one schema whether its values are finite or not.

use std::fmt;
use std::io::Write;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{Character, ExtOrder};
use crate::search::Length;

/// Fixed CSV header for sweep output.
pub const CSV_HEADER: [&str; 13] = [
    "p",
    "s",
    "modulus",
    "f2",
    "t2",
    "g2_character",
    "opt_formula",
    "opt_brute",
    "ml",
    "witness_f1",
    "witness_f0",
    "trivial_only",
    "elapsed_ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub f1: u64,
    pub f0: u64,
}

/// One `opt` result for a leading coefficient `f2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub p: u64,
    pub s: u32,
    pub modulus: u64,
    pub f2: u64,
    #[serde(with = "ext_order_serde")]
    pub t2: ExtOrder,
    pub g2_character: Character,
    pub opt_formula: Option<Length>,
    pub opt_brute: Option<Length>,
    pub ml: Option<Length>,
    pub witness: Option<Witness>,
    pub trivial_only: Option<bool>,
    pub elapsed_ms: Option<u64>,
}

impl OutputRecord {
    /// Both engines ran and disagree.
    pub fn disagrees(&self) -> bool {
        matches!((self.opt_formula, self.opt_brute), (Some(a), Some(b)) if a != b)
    }

    fn csv_fields(&self) -> [String; 13] {
        fn opt<T: ToString>(v: Option<T>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        [
            self.p.to_string(),
            self.s.to_string(),
            self.modulus.to_string(),
            self.f2.to_string(),
            self.t2.to_string(),
            self.g2_character.to_string(),
            opt(self.opt_formula),
            opt(self.opt_brute),
            opt(self.ml),
            opt(self.witness.map(|w| w.f1)),
            opt(self.witness.map(|w| w.f0)),
            opt(self.trivial_only),
            opt(self.elapsed_ms),
        ]
    }

    /// Parses one CSV data row produced by [`write_csv`].
    pub fn from_csv_row(row: &str) -> Result<Self, String> {
        let fields: Vec<&str> = row.split(',').collect();
        if fields.len() != CSV_HEADER.len() {
            return Err(format!("expected {} fields, got {}", CSV_HEADER.len(), fields.len()));
        }
        fn int<T: std::str::FromStr>(s: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad integer {s:?}"))
        }
        fn opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>, String> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| format!("bad value {s:?}"))
            }
        }
        let t2 = match fields[4] {
            "inf" => ExtOrder::Infinity,
            t => ExtOrder::Finite(int(t)?),
        };
        let g2_character = match fields[5] {
            "zero" => Character::Zero,
            "square" => Character::Square,
            "nonsquare" => Character::Nonsquare,
            other => return Err(format!("bad character {other:?}")),
        };
        let witness = match (opt::<u64>(fields[9])?, opt::<u64>(fields[10])?) {
            (Some(f1), Some(f0)) => Some(Witness { f1, f0 }),
            (None, None) => None,
            _ => return Err("half a witness".into()),
        };
        Ok(OutputRecord {
            p: int(fields[0])?,
            s: int(fields[1])?,
            modulus: int(fields[2])?,
            f2: int(fields[3])?,
            t2,
            g2_character,
            opt_formula: opt(fields[6])?,
            opt_brute: opt(fields[7])?,
            ml: opt(fields[8])?,
            witness,
            trivial_only: opt(fields[11])?,
            elapsed_ms: opt(fields[12])?,
        })
    }
}

/// Length of a single polynomial's sequence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthRecord {
    pub p: u64,
    pub s: u32,
    pub modulus: u64,
    pub f2: u64,
    pub f1: u64,
    pub f0: u64,
    pub length: Length,
    pub trivial: bool,
    pub elapsed_ms: Option<u64>,
}

/// Writes the fixed header followed by one line per record.
pub fn write_csv<W: Write>(mut out: W, records: &[OutputRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_HEADER.join(","))?;
    for r in records {
        writeln!(out, "{}", r.csv_fields().join(","))?;
    }
    Ok(())
}

pub fn to_csv(records: &[OutputRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

/// Serde adapter writing orders as integers and infinity as `"inf"`.
pub mod ext_order_serde {
    use super::*;

    pub fn serialize<S: Serializer>(t: &ExtOrder, s: S) -> Result<S::Ok, S::Error> {
        match t {
            ExtOrder::Finite(t) => s.serialize_u32(*t),
            ExtOrder::Infinity => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ExtOrder, D::Error> {
        struct OrderVisitor;

        impl Visitor<'_> for OrderVisitor {
            type Value = ExtOrder;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtOrder, E> {
                u32::try_from(v).map(ExtOrder::Finite).map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtOrder, E> {
                u32::try_from(v).map(ExtOrder::Finite).map_err(E::custom)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtOrder, E> {
                match v {
                    "inf" => Ok(ExtOrder::Infinity),
                    _ => v.parse().map(ExtOrder::Finite).map_err(E::custom),
                }
            }
        }

        d.deserialize_any(OrderVisitor)
    }
}

//! One-shot template store and nearest-template letter classification.
//!
//! Each axis of the rotated acceleration is compared with DTW independently
//! and the three distances are summed; the template with the smallest total
//! wins, ties going to the earlier letter in the alphabet.

mod dtw;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use dtw::{dtw_distance, dtw_distance_with, DtwOptions};

use crate::error::{Error, Result};
use crate::orientation::RotatedSample;
use crate::scalar::Scalar;

pub const TEMPLATE_SCHEMA: u32 = 1;

/// A single-character class label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter(char);

impl Letter {
    pub const fn new(c: char) -> Self {
        Letter(c)
    }

    pub fn as_char(self) -> char {
        self.0
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<char> for Letter {
    fn from(c: char) -> Self {
        Letter(c)
    }
}

impl FromStr for Letter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => Ok(Letter(c)),
            _ => Err(format!("expected a single character label, got {s:?}")),
        }
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lowercase `a..=z`.
pub fn latin_alphabet() -> Vec<Letter> {
    ('a'..='z').map(Letter).collect()
}

/// Parses `"abjwz"` into letters.
pub fn letters(s: &str) -> Vec<Letter> {
    s.chars().map(Letter).collect()
}

/// Three equal-length axes of rotated acceleration.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct SessionTraceMatrix<T> {
    x: Vec<T>,
    y: Vec<T>,
    z: Vec<T>,
}

impl<T: Scalar> SessionTraceMatrix<T> {
    pub fn new(x: Vec<T>, y: Vec<T>, z: Vec<T>) -> Result<Self> {
        if x.len() != y.len() || y.len() != z.len() {
            return Err(Error::InvalidTrace(format!(
                "axis lengths differ: {}/{}/{}",
                x.len(),
                y.len(),
                z.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidTrace(format!(
                "need at least 2 samples, got {}",
                x.len()
            )));
        }
        if x.iter().chain(&y).chain(&z).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("trace matrix"));
        }
        Ok(Self { x, y, z })
    }

    pub fn from_rotated(samples: &[RotatedSample<T>]) -> Result<Self> {
        Self::new(
            samples.iter().map(|s| s.accel.x).collect(),
            samples.iter().map(|s| s.accel.y).collect(),
            samples.iter().map(|s| s.accel.z).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn x(&self) -> &[T] {
        &self.x
    }

    pub fn y(&self) -> &[T] {
        &self.y
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn axes(&self) -> [&[T]; 3] {
        [&self.x, &self.y, &self.z]
    }
}

impl<'de, T: Scalar> Deserialize<'de> for SessionTraceMatrix<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(bound = "T: Scalar", deny_unknown_fields)]
        struct Raw<T> {
            x: Vec<T>,
            y: Vec<T>,
            z: Vec<T>,
        }
        let raw = Raw::<T>::deserialize(d)?;
        SessionTraceMatrix::new(raw.x, raw.y, raw.z).map_err(serde::de::Error::custom)
    }
}

/// Sum of the per-axis DTW distances.
pub fn total_distance<T: Scalar>(
    a: &SessionTraceMatrix<T>,
    b: &SessionTraceMatrix<T>,
    opts: &DtwOptions,
) -> Result<T> {
    let mut total = T::zero();
    for (pa, pb) in a.axes().into_iter().zip(b.axes()) {
        total = total + dtw_distance_with(pa, pb, opts)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Ranked<T> {
    pub letter: Letter,
    pub distance: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Prediction<T> {
    pub letter: Letter,
    /// Every alphabet letter, nearest first.
    pub ranked: Vec<Ranked<T>>,
}

/// One template per letter of an ordered alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet<T> {
    alphabet: Vec<Letter>,
    templates: BTreeMap<Letter, SessionTraceMatrix<T>>,
}

impl<T: Scalar> TemplateSet<T> {
    pub fn new(alphabet: Vec<Letter>) -> Result<Self> {
        let mut seen = alphabet.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != alphabet.len() {
            return Err(Error::Config("alphabet has duplicate letters".into()));
        }
        Ok(Self {
            alphabet,
            templates: BTreeMap::new(),
        })
    }

    pub fn alphabet(&self) -> &[Letter] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, letter: Letter) -> Option<&SessionTraceMatrix<T>> {
        self.templates.get(&letter)
    }

    pub fn missing(&self) -> Vec<Letter> {
        self.alphabet
            .iter()
            .copied()
            .filter(|l| !self.templates.contains_key(l))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.templates.len() == self.alphabet.len()
    }

    /// Stores (or replaces) the template for `letter` in place.
    pub fn insert(&mut self, letter: Letter, trace: SessionTraceMatrix<T>) -> Result<()> {
        if !self.alphabet.contains(&letter) {
            return Err(Error::UnknownLetter(letter));
        }
        self.templates.insert(letter, trace);
        Ok(())
    }

    /// Copy-on-write training: returns a new set with `letter` (re)trained.
    pub fn train(&self, letter: Letter, trace: SessionTraceMatrix<T>) -> Result<Self> {
        let mut next = self.clone();
        next.insert(letter, trace)?;
        Ok(next)
    }

    pub fn classify(
        &self,
        trace: &SessionTraceMatrix<T>,
        opts: &DtwOptions,
    ) -> Result<Prediction<T>> {
        if !self.is_complete() {
            return Err(Error::NotTrained {
                missing: self.missing(),
            });
        }
        if self.alphabet.is_empty() {
            return Err(Error::Config(
                "cannot classify with an empty alphabet".into(),
            ));
        }
        let distances: Vec<T> = self
            .alphabet
            .par_iter()
            .map(|l| total_distance(trace, &self.templates[l], opts))
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..self.alphabet.len()).collect();
        // Stable sort keeps alphabet order on ties.
        order.sort_by(|&i, &j| {
            distances[i]
                .partial_cmp(&distances[j])
                .expect("finite distances")
        });
        let ranked: Vec<Ranked<T>> = order
            .into_iter()
            .map(|i| Ranked {
                letter: self.alphabet[i],
                distance: distances[i],
            })
            .collect();
        Ok(Prediction {
            letter: ranked[0].letter,
            ranked,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&TemplateFile::from(self))?)
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, &TemplateFile::from(self))?;
        Ok(())
    }

    pub fn read_json<R: Read>(reader: R) -> Result<Self> {
        let file: TemplateFile<T> = serde_json::from_reader(reader)?;
        file.try_into()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let file: TemplateFile<T> = serde_json::from_str(s)?;
        file.try_into()
    }
}

/// On-disk layout: `{"schema":1,"alphabet":[..],"templates":{"a":{"x":[..],"y":[..],"z":[..]}}}`.
#[derive(Serialize, Deserialize)]
#[serde(bound = "T: Scalar", deny_unknown_fields)]
struct TemplateFile<T> {
    schema: u32,
    alphabet: Vec<Letter>,
    templates: BTreeMap<Letter, SessionTraceMatrix<T>>,
}

impl<T: Scalar> From<&TemplateSet<T>> for TemplateFile<T> {
    fn from(set: &TemplateSet<T>) -> Self {
        TemplateFile {
            schema: TEMPLATE_SCHEMA,
            alphabet: set.alphabet.clone(),
            templates: set.templates.clone(),
        }
    }
}

impl<T: Scalar> TryFrom<TemplateFile<T>> for TemplateSet<T> {
    type Error = Error;

    fn try_from(file: TemplateFile<T>) -> Result<Self> {
        if file.schema != TEMPLATE_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported template schema {}",
                file.schema
            )));
        }
        let mut set = TemplateSet::new(file.alphabet)?;
        for (letter, trace) in file.templates {
            set.insert(letter, trace)?;
        }
        Ok(set)
    }
}

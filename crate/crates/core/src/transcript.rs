//! Ordered protocol event logs.
//!
//! Every construction records its qubit transmissions, classical messages,
//! the memory-bound event and any later reveals here. A summary transcript
//! keeps event kinds and sizes but drops bulky payloads.

use alloc::string::String;
use alloc::vec::Vec;

use crate::conjugate::ConjugateState;
use crate::{Error, Profile, Result};

pub const TRANSCRIPT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Detail {
    Full,
    Summary,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum ParamValue {
    Int(i64),
    Float(f64),
    Text(String),
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<u64> for ParamValue {
    fn from(v: u64) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.into())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Header {
    pub version: u32,
    pub profile: Profile,
    pub seed: Option<u64>,
    pub params: Vec<(String, ParamValue)>,
}

/// A classical payload. `Hex` carries any bitstring or packed table as
/// `(bit length, hex)`.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "snake_case"))]
pub enum Body {
    Empty,
    Hex { bits: usize, hex: String },
    Text { text: String },
    OtPhase2 { theta: String, f0_hex: String, f1_hex: String, e0_hex: String, e1_hex: String },
    Omitted { bits: u64 },
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Event {
    Qubits {
        seq: u64,
        label: String,
        count: usize,
        #[cfg_attr(feature = "serde", serde(with = "prep_records"))]
        state: Option<ConjugateState>,
    },
    Message { seq: u64, label: String, body: Body },
    Bound { seq: u64, label: String },
    Reveal { seq: u64, label: String, body: Body },
}

impl Event {
    pub fn seq(&self) -> u64 {
        match self {
            Event::Qubits { seq, .. }
            | Event::Message { seq, .. }
            | Event::Bound { seq, .. }
            | Event::Reveal { seq, .. } => *seq,
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Event::Qubits { label, .. }
            | Event::Message { label, .. }
            | Event::Bound { label, .. }
            | Event::Reveal { label, .. } => label,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Transcript {
    pub header: Header,
    pub detail: Detail,
    pub events: Vec<Event>,
    next_seq: u64,
}

impl Transcript {
    pub fn new(profile: Profile, detail: Detail) -> Self {
        Transcript {
            header: Header { version: TRANSCRIPT_VERSION, profile, seed: None, params: Vec::new() },
            detail,
            events: Vec::new(),
            next_seq: 0,
        }
    }

    pub fn summary() -> Self {
        Transcript::new(Profile::Paper, Detail::Summary)
    }

    pub fn full() -> Self {
        Transcript::new(Profile::Paper, Detail::Full)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.header.seed = Some(seed);
        self
    }

    pub fn param(&mut self, key: &str, v: impl Into<ParamValue>) {
        self.header.params.push((key.into(), v.into()));
    }

    fn take_seq(&mut self) -> u64 {
        let s = self.next_seq;
        self.next_seq += 1;
        s
    }

    pub fn qubits(&mut self, label: &str, state: &ConjugateState) -> u64 {
        let seq = self.take_seq();
        let payload = (self.detail == Detail::Full).then(|| state.clone());
        self.events.push(Event::Qubits { seq, label: label.into(), count: state.len(), state: payload });
        seq
    }

    pub fn message(&mut self, label: &str, body: Body) -> u64 {
        let seq = self.take_seq();
        let body = self.trim(body);
        self.events.push(Event::Message { seq, label: label.into(), body });
        seq
    }

    pub fn bound(&mut self, label: &str) -> u64 {
        let seq = self.take_seq();
        self.events.push(Event::Bound { seq, label: label.into() });
        seq
    }

    pub fn reveal(&mut self, label: &str, body: Body) -> u64 {
        let seq = self.take_seq();
        let body = self.trim(body);
        self.events.push(Event::Reveal { seq, label: label.into(), body });
        seq
    }

    fn trim(&self, body: Body) -> Body {
        match (self.detail, body) {
            (Detail::Summary, Body::Hex { bits, .. }) => Body::Omitted { bits: bits as u64 },
            (Detail::Summary, Body::OtPhase2 { theta, f0_hex, f1_hex, e0_hex, e1_hex }) => Body::Omitted {
                bits: 4 * (theta.len() + f0_hex.len() + f1_hex.len() + e0_hex.len() + e1_hex.len()) as u64,
            },
            (_, b) => b,
        }
    }

    /// Sequence number of the latest bound event, if any.
    pub fn last_bound(&self) -> Option<u64> {
        self.events.iter().rev().find_map(|e| match e {
            Event::Bound { seq, .. } => Some(*seq),
            _ => None,
        })
    }

    /// Require a bound event strictly after `seq`.
    pub fn require_bound_after(&self, seq: u64, what: &'static str) -> Result<()> {
        match self.last_bound() {
            Some(b) if b > seq => Ok(()),
            _ => Err(Error::PhaseViolation(what)),
        }
    }

    /// Append another transcript's events, renumbered.
    pub fn append(&mut self, other: &Transcript) {
        for e in &other.events {
            let seq = self.take_seq();
            let mut e = e.clone();
            match &mut e {
                Event::Qubits { seq: s, .. }
                | Event::Message { seq: s, .. }
                | Event::Bound { seq: s, .. }
                | Event::Reveal { seq: s, .. } => *s = seq,
            }
            self.events.push(e);
        }
    }
}

/// Qubit states as arrays of `{bit, basis}` records.
#[cfg(feature = "serde")]
mod prep_records {
    use alloc::vec::Vec;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::conjugate::{ConjugateState, QubitPrep};

    pub fn serialize<S: Serializer>(state: &Option<ConjugateState>, s: S) -> Result<S::Ok, S::Error> {
        state.as_ref().map(ConjugateState::preps).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<ConjugateState>, D::Error> {
        let preps: Option<Vec<QubitPrep>> = Option::deserialize(d)?;
        Ok(preps.map(|p| ConjugateState::from_preps(&p)))
    }
}

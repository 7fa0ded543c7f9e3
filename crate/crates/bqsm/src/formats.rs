//! JSON artifact files exchanged between subcommands.
//!
//! Ciphertexts, tags, signatures, one-time programs and tokens are
//! simulated quantum transmissions. Their files carry the prepared qubits
//! as `(bit, basis)` records, so a file stands for a transmission in
//! flight inside the loopback simulation, not for anything storable.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use bqsm_core::encryption::{AsymCiphertext, AsymParams, AsymPrivKey, SubKey, SymCiphertext, SymKey};
use bqsm_core::entropy::Dist;
use bqsm_core::otp::CompiledFunction;
use bqsm_core::tokens::{Signature, SigTokenKey, Token, TokenKey};
use bqsm_core::Bits;

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyFile {
    Sym { key: SymKey },
    /// Private key plus the sub-key the loopback receiver extracted from
    /// the key broadcast.
    Asym { params: AsymParams, sk: AsymPrivKey, kv: SubKey },
    EncToken { key: TokenKey },
    SigToken { key: SigTokenKey },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiphertextFile {
    Sym { ct: SymCiphertext },
    Asym { ct: AsymCiphertext },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthFile {
    Mac { tag: SymCiphertext },
    Signature { sig: Signature },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProgramFile {
    pub formulas: Vec<String>,
    pub inputs: usize,
    pub otp: CompiledFunction,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TokenFile {
    pub token: Token,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistEntry {
    pub value_hex: String,
    pub prob: f64,
}

/// `{width, support: [{value_hex, prob}]}`. `width` defaults to four bits
/// per hex digit of the first value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    pub support: Vec<DistEntry>,
}

impl DistFile {
    pub fn from_dist(d: &Dist) -> Self {
        DistFile {
            width: Some(d.width()),
            support: d.support().iter().map(|(v, p)| DistEntry { value_hex: v.to_hex(), prob: *p }).collect(),
        }
    }

    pub fn to_dist(&self) -> Result<Dist, CliError> {
        let width = match (self.width, self.support.first()) {
            (Some(w), _) => w,
            (None, Some(e)) => 4 * e.value_hex.len(),
            (None, None) => return Err(CliError::Format("empty support".into())),
        };
        let entries = self
            .support
            .iter()
            .map(|e| Ok((parse_hex(&e.value_hex, width)?, e.prob)))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Dist::new(entries)?)
    }
}

/// Hex with an even number of digits (one is prepended if needed), read
/// into `len` bits.
pub fn parse_hex(hex: &str, len: usize) -> Result<Bits, CliError> {
    let hex = if hex.len() % 2 == 1 { format!("0{hex}") } else { hex.to_string() };
    let bytes = hex::decode(&hex).map_err(|e| CliError::Usage(format!("bad hex {hex:?}: {e}")))?;
    if bytes.len() * 8 < len {
        return Err(CliError::Usage(format!("{hex:?} holds fewer than {len} bits")));
    }
    Ok(Bits::from_bytes(&bytes, len)?)
}

/// A message given as hex: four bits per digit.
pub fn message_bits(hex: &str) -> Result<Bits, CliError> {
    let hex = if hex.len() % 2 == 1 { format!("0{hex}") } else { hex.to_string() };
    parse_hex(&hex, 4 * hex.len())
}

/// A `0`/`1` string, bit 0 first.
pub fn bit_string(s: &str) -> Result<Bits, CliError> {
    Bits::from_bit_str(s).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn to_bit_string(b: &Bits) -> String {
    b.iter().map(|v| if v { '1' } else { '0' }).collect()
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Pretty JSON with a trailing newline; byte-identical for equal values.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    fs::write(path, to_json(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dist_file_round_trip() {
        let d = Dist::new(vec![(Bits::from_u64(3, 4), 0.25), (Bits::from_u64(9, 4), 0.75)]).unwrap();
        let f = DistFile::from_dist(&d);
        assert_eq!(f.to_dist().unwrap(), d);
        let text = r#"{"support":[{"value_hex":"0f","prob":1.0}]}"#;
        let g: DistFile = serde_json::from_str(text).unwrap();
        assert_eq!(g.to_dist().unwrap().width(), 8);
    }

    #[test]
    fn hex_messages() {
        assert_eq!(message_bits("1a2b").unwrap().len(), 16);
        assert_eq!(message_bits("f").unwrap().len(), 8);
        assert!(message_bits("zz").is_err());
    }
}

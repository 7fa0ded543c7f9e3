//! Binary matrix-branching-program files.
//!
//! Layout: magic `BQMB`, program length `N` and input count `n` as
//! little-endian `u32`, then per instruction the two permutations as five
//! image bytes each. Accept and reject permutations are the fixed
//! 5-cycle and identity, so they are not stored.

use bqsm_core::bp::Mbp;
use bqsm_core::perm::Perm5;

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"BQMB";
const HEADER: usize = 12;

pub fn encode(p: &Mbp) -> Result<Vec<u8>, CliError> {
    if p.q_acc != Perm5::CYCLE || p.q_rej != Perm5::IDENTITY {
        return Err(CliError::Format("program uses non-standard accept/reject permutations".into()));
    }
    let len = u32::try_from(p.len()).map_err(|_| CliError::Format("program too long for the file format".into()))?;
    let n = u32::try_from(p.n).map_err(|_| CliError::Format("too many inputs for the file format".into()))?;
    let mut out = Vec::with_capacity(HEADER + 10 * p.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&len.to_le_bytes());
    out.extend_from_slice(&n.to_le_bytes());
    for pair in &p.instructions {
        for perm in pair {
            out.extend_from_slice(&perm.map());
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Mbp, CliError> {
    if bytes.len() < HEADER || &bytes[..4] != MAGIC {
        return Err(CliError::Format("not a BQMB file".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (len, n) = (word(4), word(8));
    if bytes.len() != HEADER + 10 * len {
        return Err(CliError::Format(format!("expected {} bytes for {len} instructions, found {}", HEADER + 10 * len, bytes.len())));
    }
    let perm = |off: usize| -> Result<Perm5, CliError> {
        let map: [u8; 5] = bytes[off..off + 5].try_into().expect("5 bytes");
        Perm5::new(map).map_err(CliError::Core)
    };
    let instructions = (0..len)
        .map(|j| {
            let off = HEADER + 10 * j;
            Ok([perm(off)?, perm(off + 5)?])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Mbp { instructions, n, q_acc: Perm5::CYCLE, q_rej: Perm5::IDENTITY })
}

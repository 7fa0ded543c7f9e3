//! Classical simulation of cryptography in the bounded quantum storage model.
//!
//! Honest parties only ever prepare and measure BB84 states, so qubits are
//! tracked symbolically as `(bit, basis)` pairs. On top of that sit 1-2
//! oblivious transfer, width-5 branching programs, one-time programs built
//! from Kilian-randomized and one-time-padded instruction tables, program
//! broadcast, encryption, MACs, signatures, tokens, and a harness of
//! storage-bounded adversaries plus exact counting oracles.
//!
//! The crate is `no_std` (with `alloc`). All randomness is injected through
//! [`rand_core::RngCore`].
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bits;
pub mod bp;
pub mod broadcast;
pub mod conjugate;
pub mod encryption;
pub mod entropy;
mod error;
pub mod gf2;
pub mod gf2k;
pub mod harness;
pub mod ot;
pub mod otp;
pub mod perm;
pub mod slicing;
pub mod statevector;
pub mod tokens;
pub mod transcript;

pub use bits::Bits;
pub use error::{Error, Result};
pub use rand_core::RngCore;

/// Parameter profile for constructions whose literal sizes are out of reach.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Profile {
    /// Literal parameter formulas.
    Paper,
    /// Downscaled formulas with the same structural relations.
    Desk,
}

impl Profile {
    pub fn as_str(self) -> &'static str {
        match self {
            Profile::Paper => "paper",
            Profile::Desk => "desk",
        }
    }
}

/// `⌈lg x⌉` for `x ≥ 1`.
pub(crate) fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

//! Relational refinement checking over finite state spaces.
//!
//! A relational triple between a low-level and a high-level program is
//! checked directly, or encoded into a family of unary Hoare triples whose
//! assertions mention `Exec` atoms over the high-level program. Proof
//! scripts in annotated-program style are checked against the encoding.

pub mod assertions;
pub mod execpred;
pub mod lang;
pub mod prover;
pub mod scalar;
pub mod semantics;
pub mod testkit;
pub mod triples;

use fixedbitset::FixedBitSet;

/// Machine-word integers: the representation of stored values.
pub type FastInt = i64;
/// Exact integers used when word arithmetic overflows.
pub type ExactInt = num_bigint::BigInt;

/// A value as stored in program states.
pub type Val = lang::Value<FastInt>;
/// A value produced by exact evaluation.
pub type ExactVal = lang::Value<ExactInt>;

/// A set of states, indexed by position in a [`semantics::StateSpace`].
pub type StateSet = FixedBitSet;

/// Default number of high-level states up to which every subset X is enumerated.
pub const DEFAULT_X_CAP: usize = 16;

/// Environment variable overriding [`DEFAULT_X_CAP`].
pub const X_CAP_ENV: &str = "REFINE_ENC_X_CAP";

/// The exhaustive-X cap, honouring the environment override.
pub fn x_cap_from_env() -> usize {
    std::env::var(X_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_X_CAP)
}

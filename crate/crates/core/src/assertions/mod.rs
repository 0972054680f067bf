//! Assertions over low-level states (possibly with `Exec` atoms over the
//! high-level program) and relational assertions over triples of a low state,
//! a high state and a high-level program.
//!
//! Evaluation grounds an assertion: every disjunct of its normal form is
//! instantiated for each valuation of its binders, giving state sets that can
//! be combined cheaply for each choice of the set `X`.

mod ground;
mod normal;
mod rel;
mod syntax;

pub use ground::{ground_high, ground_low, Grounded, GroundEntry, ProgTable};
pub use normal::{normalize, Disjunct, NormalForm};
pub use rel::{
    decode, decompose, enc, enc_syntactic, ground_rel, BinRel, Decomposed, DecomposedDisjunct, RelExt,
};
pub use syntax::{check_high, check_low, check_rel, Assertion};

use crate::lang::{Sort, SortError, Value};
use crate::semantics::{Semantics, SemanticsError};
use crate::StateSet;
use thiserror::Error;

/// Largest number of binder valuations enumerated for one disjunct.
pub const MAX_VALUATIONS: u64 = 1 << 20;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AssertionError {
    #[error("assertion has Exec atoms but no set X was supplied")]
    MissingX,
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("Exec atoms need a high-level state space")]
    NoHighSpace,
    #[error("{0} is not allowed here")]
    Misplaced(&'static str),
    #[error("not in decomposed form: {0}")]
    NotDecomposed(String),
    #[error("binders have {0} valuations, more than {MAX_VALUATIONS}")]
    TooManyValuations(u64),
}

/// All valuations of a binder list, in lexicographic order.
pub fn valuations(binders: &[(String, Sort)]) -> Result<Vec<Vec<Value>>, AssertionError> {
    let mut total: u64 = 1;
    for (_, s) in binders {
        total = total.saturating_mul(s.cardinality());
    }
    if total > MAX_VALUATIONS {
        return Err(AssertionError::TooManyValuations(total));
    }
    let mut out = vec![Vec::new()];
    for (_, s) in binders {
        let vals = s.values();
        let mut next = Vec::with_capacity(out.len() * vals.len());
        for p in &out {
            for v in &vals {
                let mut q = p.clone();
                q.push(v.clone());
                next.push(q);
            }
        }
        out = next;
    }
    Ok(out)
}

/// `wlp(c, X)` over the high-level space.
pub fn wlp(high: &Semantics, c: &crate::lang::Stmt, x: &StateSet) -> StateSet {
    high.denote(c).wlp(x)
}

/// Extension of a low-level assertion: exactly for Exec-free assertions, or
/// for a given `X` otherwise.
pub fn extension(
    a: &Assertion,
    low: &Semantics,
    high: Option<&Semantics>,
    x: Option<&StateSet>,
) -> Result<StateSet, AssertionError> {
    let g = ground_low(a, low, high, &[])?;
    g.extension_at(high, x)
}

/// Whether a low state satisfies an assertion, for a given `X` if needed.
pub fn holds(
    a: &Assertion,
    low: &Semantics,
    high: Option<&Semantics>,
    state: usize,
    x: Option<&StateSet>,
) -> Result<bool, AssertionError> {
    Ok(extension(a, low, high, x)?.contains(state))
}

/// Every subset of a space of size `n`, as bitsets, in mask order.
pub fn all_subsets(n: usize, cap: usize) -> Result<impl Iterator<Item = StateSet>, AssertionError> {
    if n > cap || n >= 63 {
        return Err(SemanticsError::CapExceeded { size: n, cap }.into());
    }
    Ok((0u64..(1u64 << n)).map(move |mask| {
        let mut s = StateSet::with_capacity(n);
        for b in 0..n {
            if mask >> b & 1 == 1 {
                s.insert(b);
            }
        }
        s
    }))
}

/// Semantic entailment. Exec-free assertions are compared directly; with
/// Exec atoms, inclusion must hold for every `X` up to the cap.
pub fn entails(
    a: &Assertion,
    b: &Assertion,
    low: &Semantics,
    high: Option<&Semantics>,
    cap: usize,
) -> Result<bool, AssertionError> {
    let ga = ground_low(a, low, high, &[])?;
    let gb = ground_low(b, low, high, &[])?;
    if !ga.has_exec() && !gb.has_exec() {
        return Ok(ga.extension_at(None, None)?.is_subset(&gb.extension_at(None, None)?));
    }
    let h = high.ok_or(AssertionError::NoHighSpace)?;
    for x in all_subsets(h.space.len(), cap)? {
        if !ga.extension_at(high, Some(&x))?.is_subset(&gb.extension_at(high, Some(&x))?) {
            return Ok(false);
        }
    }
    Ok(true)
}

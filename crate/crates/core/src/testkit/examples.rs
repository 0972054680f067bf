//! Worked examples shared by the integration tests and the acceptance run.

use crate::assertions::{ground_high, ground_low};
use crate::lang::{parse_stmt, Parser};
use crate::triples::{bin_rel, parse_triple_file, vc_fc, TripleError, VcOutcome};
use crate::StateSet;

const BITMASK: &str = include_str!("../../../../corpus/triples/bitmask.triple");

/// Composes the bitmask refinement (pre: all pairs, post: `x == sum2(s)`)
/// with `{true} set_union {!(s == {})}`. Returns the outcome and the
/// extension of `x > 0`, which the composed postcondition must equal.
pub fn bitmask_vertical() -> Result<(VcOutcome, StateSet), TripleError> {
    let file = parse_triple_file(BITMASK)?;
    let (low, high) = (&file.setting.low, &file.setting.high);
    let assertion = |src: &str| Parser::new(src, false).and_then(|mut p| p.parse_assertion());
    let p = bin_rel(&assertion("true")?, low, high)?;
    let q = bin_rel(&assertion("x == sum2(s)")?, low, high)?;
    let ch = parse_stmt("s := {}; s := s ∪ {a0}; s := s ∪ {a1}")?;
    let p_high = high.space.full_set();
    let q_high = ground_high(&assertion("!(s == {})")?, high, &[])?;
    let out = vc_fc(low, high, &p, &ch, &file.triple.low, &q, &p_high, &q_high)?;
    let expected = ground_low(&assertion("x > 0")?, low, None, &[])?.extension_at(None, None)?;
    Ok((out, expected))
}

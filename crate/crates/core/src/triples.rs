//! Standard and relational triples: validity by enumeration, the check that a
//! relational triple is valid exactly when its encoding is valid for every
//! `X`, and vertical composition of refinements with high-level triples.

use crate::assertions::{enc, ground_low, ground_rel, AssertionError, Assertion, BinRel, ProgTable, RelExt};
use crate::lang::{Checker, Header, ParseError, Parser, Sort, SortError, Stmt};
use crate::semantics::{Denotation, Semantics, SemanticsError, StateSpace};
use crate::StateSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TripleError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Assertion(#[from] AssertionError),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error("`{0}` is declared on both the low and the high side")]
    SharedName(String),
    #[error("missing section `{0}`")]
    Missing(&'static str),
    #[error("premise fails: {0}")]
    PremiseFails(String),
    #[error("state spaces of the composed refinements do not match")]
    SpaceMismatch,
    #[error("no high state satisfies the store precondition for u = {0}")]
    InhabitantFails(String),
}

/// Low and high state spaces built from one set of declarations. Plain `var`
/// declarations belong to the low side.
#[derive(Debug)]
pub struct Setting {
    pub header: Header,
    pub low: Semantics,
    pub high: Semantics,
}

impl Setting {
    pub fn new(header: Header) -> Result<Setting, TripleError> {
        let low_vars: Vec<(String, Sort)> = header.low_vars.iter().chain(&header.vars).cloned().collect();
        for (x, _) in &header.high_vars {
            if low_vars.iter().any(|(y, _)| y == x) {
                return Err(TripleError::SharedName(x.clone()));
            }
        }
        let low = Semantics::new(StateSpace::new(&low_vars, &header.consts)?);
        let high = Semantics::new(StateSpace::new(&header.high_vars, &header.consts)?);
        Ok(Setting { header, low, high })
    }

    pub fn low_vars(&self) -> Vec<(String, Sort)> {
        self.low.space.vars()
    }

    pub fn high_vars(&self) -> Vec<(String, Sort)> {
        self.high.space.vars()
    }

    pub fn low_names(&self) -> Vec<String> {
        self.low.space.names().to_vec()
    }

    pub fn high_names(&self) -> Vec<String> {
        self.high.space.names().to_vec()
    }

    fn checker(&self, vars: &[(String, Sort)]) -> Result<Checker, SortError> {
        let mut c = Checker::new();
        for k in &self.header.consts {
            c.declare_const(&k.name, &k.sort)?;
        }
        for (x, s) in vars {
            c.declare_var(x, s)?;
        }
        Ok(c)
    }

    pub fn check_low_stmt(&self, c: &Stmt) -> Result<(), SortError> {
        self.checker(&self.low_vars())?.check_stmt(c)
    }

    pub fn check_high_stmt(&self, c: &Stmt) -> Result<(), SortError> {
        self.checker(&self.high_vars())?.check_stmt(c)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdTriple {
    pub pre: Assertion,
    pub stmt: Stmt,
    pub post: Assertion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelTriple {
    pub pre: Assertion,
    pub low: Stmt,
    pub post: Assertion,
}

/// A parsed triple file.
#[derive(Debug)]
pub struct TripleFile {
    pub setting: Setting,
    pub high: Option<Stmt>,
    pub triple: RelTriple,
}

struct Sections {
    header: Header,
    high: Option<Stmt>,
    low: Option<Stmt>,
    pre: Option<Assertion>,
    post: Option<Assertion>,
}

fn parse_sections(src: &str) -> Result<Sections, TripleError> {
    let mut p = Parser::new(src, false)?;
    let mut sec = Sections { header: Header::default(), high: None, low: None, pre: None, post: None };
    loop {
        if p.parse_header_item(&mut sec.header)? {
            continue;
        }
        if p.eat_kw("low") {
            sec.low = Some(p.parse_block()?);
        } else if p.eat_kw("high") {
            let b = p.parse_block()?;
            p.define_program("high", b.clone());
            sec.high = Some(b);
        } else if p.eat_kw("pre") {
            p.expect_sym(":")?;
            sec.pre = Some(p.parse_assertion()?);
            p.eat_sym(";");
        } else if p.eat_kw("post") {
            p.expect_sym(":")?;
            sec.post = Some(p.parse_assertion()?);
            p.eat_sym(";");
        } else {
            break;
        }
    }
    p.expect_eof()?;
    Ok(sec)
}

/// Parses declarations, `low { .. }`, `high { .. }`, `pre:` and `post:`.
/// The high block is also available as the program `high`.
pub fn parse_triple_file(src: &str) -> Result<TripleFile, TripleError> {
    let sec = parse_sections(src)?;
    let setting = Setting::new(sec.header)?;
    let triple = RelTriple {
        pre: sec.pre.ok_or(TripleError::Missing("pre"))?,
        low: sec.low.ok_or(TripleError::Missing("low"))?,
        post: sec.post.ok_or(TripleError::Missing("post"))?,
    };
    check_rel_triple(&setting, &triple)?;
    Ok(TripleFile { setting, high: sec.high, triple })
}

/// A standard triple over the low program, with its setting.
#[derive(Debug)]
pub struct StdFile {
    pub setting: Setting,
    pub triple: StdTriple,
}

/// Same layout as a triple file, but `pre` and `post` are low-level
/// assertions, possibly with Exec atoms over the high space.
pub fn parse_std_file(src: &str) -> Result<StdFile, TripleError> {
    let sec = parse_sections(src)?;
    let setting = Setting::new(sec.header)?;
    let triple = StdTriple {
        pre: sec.pre.ok_or(TripleError::Missing("pre"))?,
        stmt: sec.low.ok_or(TripleError::Missing("low"))?,
        post: sec.post.ok_or(TripleError::Missing("post"))?,
    };
    let (lv, hv, consts) = (setting.low_vars(), setting.high_vars(), &setting.header.consts);
    crate::assertions::check_low(&triple.pre, &lv, &hv, consts, &[])?;
    crate::assertions::check_low(&triple.post, &lv, &hv, consts, &[])?;
    setting.check_low_stmt(&triple.stmt)?;
    Ok(StdFile { setting, triple })
}

/// Verdict on a standard triple over every `X` it depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdReport {
    pub valid: bool,
    /// False when the high space exceeded the cap and sampled sets were used.
    pub exhaustive: bool,
    pub x_checked: u64,
    /// The refuting set (when Exec atoms occur) and the failure.
    pub failure: Option<(Option<StateSet>, StdFailure)>,
}

/// Checks a standard triple; with Exec atoms, for every `X` up to the cap
/// and for the fallback family beyond it.
pub fn std_valid_all_x(setting: &Setting, t: &StdTriple, opts: &EncOptions) -> Result<StdReport, TripleError> {
    let (low, high) = (&setting.low, &setting.high);
    let gpre = ground_low(&t.pre, low, Some(high), &[])?;
    let gpost = ground_low(&t.post, low, Some(high), &[])?;
    if !gpre.has_exec() && !gpost.has_exec() {
        let f = std_valid_sets(low, &gpre.extension_with(&[]), &t.stmt, &gpost.extension_with(&[]));
        return Ok(StdReport { valid: f.is_none(), exhaustive: true, x_checked: 0, failure: f.map(|f| (None, f)) });
    }
    let n = high.space.len();
    let exhaustive = n <= opts.cap && n < 63;
    let sets: Vec<StateSet> = if exhaustive {
        (0u64..(1u64 << n)).map(|m| mask_set(n, m)).collect()
    } else {
        let mut configs = Vec::new();
        for e in &gpre.entries {
            for (st, k) in &e.execs {
                configs.extend(st.ones().map(|h| (h, gpre.progs.get(*k))));
            }
        }
        witness_sets(high, configs, opts.samples, opts.seed)
    };
    let mut x_checked = 0;
    for x in sets {
        x_checked += 1;
        let p = gpre.extension_with(&gpre.wlps(high, &x));
        let q = gpost.extension_with(&gpost.wlps(high, &x));
        if let Some(f) = std_valid_sets(low, &p, &t.stmt, &q) {
            return Ok(StdReport { valid: false, exhaustive, x_checked, failure: Some((Some(x), f)) });
        }
    }
    Ok(StdReport { valid: true, exhaustive, x_checked, failure: None })
}

pub fn check_rel_triple(setting: &Setting, t: &RelTriple) -> Result<(), TripleError> {
    let (lv, hv) = (setting.low_vars(), setting.high_vars());
    let consts = &setting.header.consts;
    crate::assertions::check_rel(&t.pre, &lv, &hv, consts)?;
    crate::assertions::check_rel(&t.post, &lv, &hv, consts)?;
    setting.check_low_stmt(&t.low)?;
    Ok(())
}

/// Programs a relational triple can pair with high states: `skip`, every
/// program named in the assertions, and their subterms.
pub fn universe(t: &RelTriple) -> ProgTable {
    let mut table = ProgTable::default();
    table.intern(&Stmt::Skip);
    let mut named = Vec::new();
    t.pre.programs(&mut named);
    t.post.programs(&mut named);
    for c in &named {
        for s in c.subterms() {
            table.intern(&s);
        }
    }
    table
}

/// Why a standard triple fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StdFailure {
    Error { state: usize },
    Outcome { state: usize, final_state: usize },
}

impl StdFailure {
    pub fn render(&self, space: &StateSpace) -> String {
        match self {
            StdFailure::Error { state } => format!("{} may go wrong", space.show_state(*state)),
            StdFailure::Outcome { state, final_state } => {
                format!("{} may end in {} outside the postcondition", space.show_state(*state), space.show_state(*final_state))
            }
        }
    }
}

/// `{pre} c {post}` over extensional assertions, with the no-error clause.
pub fn std_valid_sets(sem: &Semantics, pre: &StateSet, c: &Stmt, post: &StateSet) -> Option<StdFailure> {
    let d = sem.denote(c);
    for s in pre.ones() {
        if d.err.contains(s) {
            return Some(StdFailure::Error { state: s });
        }
        if let Some(f) = d.nrm[s].difference(post).next() {
            return Some(StdFailure::Outcome { state: s, final_state: f });
        }
    }
    None
}

/// Validity of a standard triple whose assertions may carry Exec atoms, for
/// one given `X`.
pub fn std_valid(
    low: &Semantics,
    high: Option<&Semantics>,
    t: &StdTriple,
    x: Option<&StateSet>,
) -> Result<Option<StdFailure>, AssertionError> {
    let pre = ground_low(&t.pre, low, high, &[])?.extension_at(high, x)?;
    let post = ground_low(&t.post, low, high, &[])?.extension_at(high, x)?;
    Ok(std_valid_sets(low, &pre, &t.stmt, &post))
}

/// Why a relational triple fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RelFailure {
    /// The low program may go wrong while the high configuration cannot.
    LowError { low: usize, high: usize, prog: Stmt },
    /// A low outcome has no matching high configuration.
    Unmatched { low: usize, high: usize, prog: Stmt, low_final: usize },
}

impl RelFailure {
    pub fn render(&self, low: &StateSpace, high: &StateSpace) -> String {
        match self {
            RelFailure::LowError { low: l, high: h, prog } => format!(
                "low {} may go wrong but high ({}, {}) cannot",
                low.show_state(*l),
                high.show_state(*h),
                prog
            ),
            RelFailure::Unmatched { low: l, high: h, prog, low_final } => format!(
                "low {} may end in {} with no matching high outcome from ({}, {})",
                low.show_state(*l),
                low.show_state(*low_final),
                high.show_state(*h),
                prog
            ),
        }
    }
}

/// Relational validity over extensional assertions: every low run from a
/// precondition triple is simulated by a refinement of the high configuration
/// into one related by the postcondition, unless the high side may go wrong.
pub fn rel_valid_ext(low: &Semantics, high: &Semantics, pre: &RelExt, cl: &Stmt, post: &RelExt) -> Option<RelFailure> {
    let dl = low.denote(cl);
    let post_d: Vec<_> = post.progs.progs.iter().map(|c| high.denote(c)).collect();
    for (k, c1) in pre.progs.progs.iter().enumerate() {
        let d1 = high.denote(c1);
        for (l, row) in pre.rels[k].rows.iter().enumerate() {
            for h in row.ones() {
                if d1.err.contains(h) {
                    continue;
                }
                if dl.err.contains(l) {
                    return Some(RelFailure::LowError { low: l, high: h, prog: c1.clone() });
                }
                for l2 in dl.nrm[l].ones() {
                    if !matched(&d1, h, l2, post, &post_d) {
                        return Some(RelFailure::Unmatched { low: l, high: h, prog: c1.clone(), low_final: l2 });
                    }
                }
            }
        }
    }
    None
}

fn matched(d1: &Denotation, h: usize, l2: usize, post: &RelExt, post_d: &[std::sync::Arc<Denotation>]) -> bool {
    post.rels.iter().zip(post_d).any(|(rel, d2)| {
        rel.rows[l2].ones().any(|h2| d2.nrm[h2].is_subset(&d1.nrm[h]) && !d2.err.contains(h2))
    })
}

/// Grounds both sides of a relational triple over its program universe.
pub fn ground_rel_triple(setting: &Setting, t: &RelTriple) -> Result<(RelExt, RelExt), TripleError> {
    let u = universe(t);
    let pre = ground_rel(&t.pre, &setting.low, &setting.high, &u)?;
    let post = ground_rel(&t.post, &setting.low, &setting.high, &u)?;
    Ok((pre, post))
}

pub fn rel_valid(setting: &Setting, t: &RelTriple) -> Result<Option<RelFailure>, TripleError> {
    let (pre, post) = ground_rel_triple(setting, t)?;
    Ok(rel_valid_ext(&setting.low, &setting.high, &pre, &t.low, &post))
}

/// Deliberate defects for exercising the cross-checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EncFault {
    /// Encode with a `wlp` that ignores error states.
    WlpIgnoresErrors,
}

#[derive(Clone, Debug)]
pub struct EncOptions {
    /// Largest high space whose subsets are all enumerated.
    pub cap: usize,
    /// Random sets tried beyond the cap.
    pub samples: usize,
    pub seed: u64,
    pub fault: Option<EncFault>,
}

impl Default for EncOptions {
    fn default() -> Self {
        EncOptions { cap: crate::DEFAULT_X_CAP, samples: 256, seed: 0, fault: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncFailure {
    pub x: StateSet,
    pub failure: StdFailure,
}

/// Relational verdict next to the verdict on the encoded triples.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingReport {
    pub relational: bool,
    pub encoded_all_x: bool,
    /// Whether every subset of the high space was tried.
    pub exhaustive: bool,
    pub x_checked: u64,
    /// How many of the tried sets refute the encoded triple.
    pub x_failing: u64,
    pub rel_failure: Option<RelFailure>,
    pub enc_failure: Option<EncFailure>,
}

impl EncodingReport {
    pub fn agree(&self) -> bool {
        self.relational == self.encoded_all_x
    }
}

fn enc_with(p: &RelExt, high: &Semantics, x: &StateSet, fault: Option<EncFault>) -> StateSet {
    match fault {
        None => enc(p, high, x),
        Some(EncFault::WlpIgnoresErrors) => {
            let rows = p.rels.first().map(|r| r.rows.len()).unwrap_or(0);
            let mut out = StateSet::with_capacity(rows);
            for (k, c) in p.progs.progs.iter().enumerate() {
                out.union_with(&p.rels[k].link(&high.denote(c).wlp_ignoring_errors(x)));
            }
            out
        }
    }
}

fn mask_set(n: usize, mask: u64) -> StateSet {
    let mut s = StateSet::with_capacity(n);
    for b in 0..n {
        if mask >> b & 1 == 1 {
            s.insert(b);
        }
    }
    s
}

/// Sets `X` tried when the high space exceeds the cap: the empty and full
/// sets, the terminal set of each given high configuration, and seeded
/// random sets.
pub fn witness_sets<'a>(
    high: &Semantics,
    configs: impl IntoIterator<Item = (usize, &'a Stmt)>,
    samples: usize,
    seed: u64,
) -> Vec<StateSet> {
    let n = high.space.len();
    let mut out = vec![high.space.empty_set(), high.space.full_set()];
    for (h, c) in configs {
        let t = high.terminal_set(h, c);
        if !out.contains(&t) {
            out.push(t);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let mut s = StateSet::with_capacity(n);
        for b in 0..n {
            if rng.gen_bool(0.5) {
                s.insert(b);
            }
        }
        out.push(s);
    }
    out
}

fn fallback_sets(high: &Semantics, pre: &RelExt, opts: &EncOptions) -> Vec<StateSet> {
    let mut configs = Vec::new();
    for (k, c) in pre.progs.progs.iter().enumerate() {
        let mut cols = high.space.empty_set();
        for r in &pre.rels[k].rows {
            cols.union_with(r);
        }
        configs.extend(cols.ones().map(|h| (h, c)));
    }
    witness_sets(high, configs, opts.samples, opts.seed)
}

/// Compares relational validity with validity of the encoded triple
/// `{Enc_X(pre)} c {Enc_X(post)}` over every `X` (or a fallback family of
/// sets when the high space exceeds the cap).
pub fn check_encoding_equiv(setting: &Setting, t: &RelTriple, opts: &EncOptions) -> Result<EncodingReport, TripleError> {
    let (pre, post) = ground_rel_triple(setting, t)?;
    let (low, high) = (&setting.low, &setting.high);
    let rel_failure = rel_valid_ext(low, high, &pre, &t.low, &post);
    let n = high.space.len();
    let exhaustive = n <= opts.cap && n < 63;
    let mut x_checked = 0u64;
    let mut x_failing = 0u64;
    let mut enc_failure = None;
    let mut try_x = |x: StateSet| {
        x_checked += 1;
        let p = enc_with(&pre, high, &x, opts.fault);
        let q = enc_with(&post, high, &x, opts.fault);
        if let Some(f) = std_valid_sets(low, &p, &t.low, &q) {
            x_failing += 1;
            if enc_failure.is_none() {
                enc_failure = Some(EncFailure { x, failure: f });
            }
        }
    };
    if exhaustive {
        for mask in 0u64..(1u64 << n) {
            try_x(mask_set(n, mask));
        }
    } else {
        for x in fallback_sets(high, &pre, opts) {
            try_x(x);
        }
    }
    Ok(EncodingReport {
        relational: rel_failure.is_none(),
        encoded_all_x: enc_failure.is_none(),
        exhaustive,
        x_checked,
        x_failing,
        rel_failure,
        enc_failure,
    })
}

/// A relational assertion without program atoms as a relation between low
/// and high states.
pub fn bin_rel(a: &Assertion, low: &Semantics, high: &Semantics) -> Result<BinRel, TripleError> {
    if a.has_prog() {
        return Err(AssertionError::Misplaced("a prog atom in a binary assertion").into());
    }
    let mut u = ProgTable::default();
    u.intern(&Stmt::Skip);
    Ok(ground_rel(a, low, high, &u)?.rels.remove(0))
}

fn refinement_valid(low: &Semantics, high: &Semantics, p: &BinRel, ch: &Stmt, cl: &Stmt, q: &BinRel) -> Option<RelFailure> {
    let mut tp = ProgTable::default();
    tp.intern(ch);
    let mut tq = ProgTable::default();
    tq.intern(&Stmt::Skip);
    rel_valid_ext(low, high, &RelExt::single(tp, 0, p.clone()), cl, &RelExt::single(tq, 0, q.clone()))
}

/// The conclusion of a vertical composition and whether it holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcOutcome {
    pub pre: StateSet,
    pub post: StateSet,
    pub failure: Option<StdFailure>,
}

impl VcOutcome {
    pub fn valid(&self) -> bool {
        self.failure.is_none()
    }
}

/// Composes `⟨ℙ ∧ ⌜cH⌝⟩ cL ⟨ℚ ∧ ⌜skip⌝⟩` with `{P̌} cH {Q̌}` into
/// `{ℙ ⊙ P̌} cL {ℚ ⊙ Q̌}`, checking both premises and the conclusion.
#[allow(clippy::too_many_arguments)]
pub fn vc_fc(
    low: &Semantics,
    high: &Semantics,
    p: &BinRel,
    ch: &Stmt,
    cl: &Stmt,
    q: &BinRel,
    p_high: &StateSet,
    q_high: &StateSet,
) -> Result<VcOutcome, TripleError> {
    if let Some(f) = refinement_valid(low, high, p, ch, cl, q) {
        return Err(TripleError::PremiseFails(format!("refinement: {}", f.render(&low.space, &high.space))));
    }
    if let Some(f) = std_valid_sets(high, p_high, ch, q_high) {
        return Err(TripleError::PremiseFails(format!("high triple: {}", f.render(&high.space))));
    }
    let (pre, post) = (p.link(p_high), q.link(q_high));
    let failure = std_valid_sets(low, &pre, cl, &post);
    Ok(VcOutcome { pre, post, failure })
}

/// A composed refinement and whether it holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RefineOutcome {
    pub pre: BinRel,
    pub post: BinRel,
    pub failure: Option<RelFailure>,
}

/// Chains `⟨ℙ1 ∧ ⌜c2⌝⟩ c1 ⟨ℚ1 ∧ ⌜skip⌝⟩` and `⟨ℙ2 ∧ ⌜c3⌝⟩ c2 ⟨ℚ2 ∧ ⌜skip⌝⟩`
/// into `⟨ℙ1 ∘ ℙ2 ∧ ⌜c3⌝⟩ c1 ⟨ℚ1 ∘ ℚ2 ∧ ⌜skip⌝⟩`.
#[allow(clippy::too_many_arguments)]
pub fn vc_refine(
    s1: &Semantics,
    s2: &Semantics,
    s3: &Semantics,
    p1: &BinRel,
    q1: &BinRel,
    c1: &Stmt,
    c2: &Stmt,
    p2: &BinRel,
    q2: &BinRel,
    c3: &Stmt,
) -> Result<RefineOutcome, TripleError> {
    let (n1, n2, n3) = (s1.space.len(), s2.space.len(), s3.space.len());
    let shaped = |r: &BinRel, a: usize, b: usize| r.rows.len() == a && r.cols == b;
    if !(shaped(p1, n1, n2) && shaped(q1, n1, n2) && shaped(p2, n2, n3) && shaped(q2, n2, n3)) {
        return Err(TripleError::SpaceMismatch);
    }
    if let Some(f) = refinement_valid(s1, s2, p1, c2, c1, q1) {
        return Err(TripleError::PremiseFails(format!("first refinement: {}", f.render(&s1.space, &s2.space))));
    }
    if let Some(f) = refinement_valid(s2, s3, p2, c3, c2, q2) {
        return Err(TripleError::PremiseFails(format!("second refinement: {}", f.render(&s2.space, &s3.space))));
    }
    let (pre, post) = (p1.compose(p2), q1.compose(q2));
    let failure = refinement_valid(s1, s3, &pre, c3, c1, &post);
    Ok(RefineOutcome { pre, post, failure })
}

/// A refinement in store form: `u` and `v` range over finite index sets and
/// each index names a low and a high store assertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StoreShape {
    pub pre_low: Vec<StateSet>,
    pub pre_high: Vec<StateSet>,
    pub post_low: Vec<StateSet>,
    pub post_high: Vec<StateSet>,
}

impl StoreShape {
    fn rel(lows: &[StateSet], highs: &[StateSet], nl: usize, nh: usize) -> BinRel {
        let mut r = BinRel::empty(nl, nh);
        for (l, h) in lows.iter().zip(highs) {
            r.union_with(&BinRel::product(l, h));
        }
        r
    }
}

/// From `⟨∃u. storePreL(u) ∧ storePreH(u) ∧ ⌜cH⌝⟩ cL ⟨∃v. storePostL(v) ∧ storePostH(v) ∧ ⌜skip⌝⟩`,
/// `{∃u. B1(u) ∧ storePreH(u)} cH {∀v. storePostH(v) ⇒ B2(v)}` and
/// `∀u. B1(u) ⇒ storePreH(u) ≠ ∅`, concludes
/// `{∃u. B1(u) ∧ storePreL(u)} cL {∃v. B2(v) ∧ storePostL(v)}`.
/// `show_u` renders an index of `u` for error messages.
#[allow(clippy::too_many_arguments)]
pub fn vc_store_rule(
    low: &Semantics,
    high: &Semantics,
    shape: &StoreShape,
    ch: &Stmt,
    cl: &Stmt,
    b1: &[bool],
    b2: &[bool],
    show_u: &dyn Fn(usize) -> String,
) -> Result<VcOutcome, TripleError> {
    let (nl, nh) = (low.space.len(), high.space.len());
    if shape.pre_low.len() != shape.pre_high.len()
        || shape.post_low.len() != shape.post_high.len()
        || b1.len() != shape.pre_low.len()
        || b2.len() != shape.post_low.len()
    {
        return Err(TripleError::SpaceMismatch);
    }
    let p = StoreShape::rel(&shape.pre_low, &shape.pre_high, nl, nh);
    let q = StoreShape::rel(&shape.post_low, &shape.post_high, nl, nh);
    if let Some(f) = refinement_valid(low, high, &p, ch, cl, &q) {
        return Err(TripleError::PremiseFails(format!("refinement: {}", f.render(&low.space, &high.space))));
    }
    let mut high_pre = high.space.empty_set();
    for (u, h) in shape.pre_high.iter().enumerate() {
        if b1[u] {
            high_pre.union_with(h);
        }
    }
    let mut high_post = high.space.full_set();
    for (v, h) in shape.post_high.iter().enumerate() {
        if !b2[v] {
            high_post.difference_with(h);
        }
    }
    if let Some(f) = std_valid_sets(high, &high_pre, ch, &high_post) {
        return Err(TripleError::PremiseFails(format!("high triple: {}", f.render(&high.space))));
    }
    if let Some(u) = (0..b1.len()).find(|u| b1[*u] && shape.pre_high[*u].is_clear()) {
        return Err(TripleError::InhabitantFails(show_u(u)));
    }
    let mut pre = low.space.empty_set();
    for (u, l) in shape.pre_low.iter().enumerate() {
        if b1[u] {
            pre.union_with(l);
        }
    }
    let mut post = low.space.empty_set();
    for (v, l) in shape.post_low.iter().enumerate() {
        if b2[v] {
            post.union_with(l);
        }
    }
    let failure = std_valid_sets(low, &pre, cl, &post);
    Ok(VcOutcome { pre, post, failure })
}

#[cfg(test)]
mod tests {
    use super::*;

    const NONDET: &str = "low var x : int[0..2]; high var y : int[0..2];
        high { y := nondet(0, 2) }
        low { x := nondet(0, 1) }
        pre: prog[high]
        post: x == y && prog[skip]";

    #[test]
    fn nondet_triple_is_valid_and_agrees() {
        let f = parse_triple_file(NONDET).unwrap();
        assert_eq!(rel_valid(&f.setting, &f.triple).unwrap(), None);
        let r = check_encoding_equiv(&f.setting, &f.triple, &EncOptions::default()).unwrap();
        assert!(r.relational && r.encoded_all_x && r.exhaustive);
        assert_eq!(r.x_checked, 8);
    }

    #[test]
    fn swapped_ranges_are_rejected() {
        let src = NONDET.replace("nondet(0, 2)", "nondet(0, 9)").replace("nondet(0, 1)", "nondet(0, 2)").replace("nondet(0, 9)", "nondet(0, 1)");
        let f = parse_triple_file(&src).unwrap();
        let fail = rel_valid(&f.setting, &f.triple).unwrap().unwrap();
        assert!(matches!(fail, RelFailure::Unmatched { .. }));
        let r = check_encoding_equiv(&f.setting, &f.triple, &EncOptions::default()).unwrap();
        assert!(r.agree() && !r.relational);
    }

    #[test]
    fn false_precondition_is_vacuous() {
        let src = "low var x : int[0..1]; high var y : int[0..1]; low { assert(false) } pre: false post: false";
        let f = parse_triple_file(src).unwrap();
        let r = check_encoding_equiv(&f.setting, &f.triple, &EncOptions::default()).unwrap();
        assert!(r.relational && r.encoded_all_x);
    }

    #[test]
    fn high_error_excuses_low_error() {
        let src = "low var x : int[0..1]; high var y : int[0..1];
            low { assert(x < 0) } pre: prog[assert(y < 0)] post: false";
        let f = parse_triple_file(src).unwrap();
        let r = check_encoding_equiv(&f.setting, &f.triple, &EncOptions::default()).unwrap();
        assert!(r.relational && r.agree());
        let faulty = EncOptions { fault: Some(EncFault::WlpIgnoresErrors), ..EncOptions::default() };
        assert!(!check_encoding_equiv(&f.setting, &f.triple, &faulty).unwrap().agree());
    }

    #[test]
    fn config_refinement_post() {
        let src = "low var x : int[0..3]; high var y : int[0..3];
            low { x := x + 1 } pre: x == y && prog[skip] && x < 3 post: x == y + 1 && prog[skip] || x == y && prog[y := y - 1]";
        let f = parse_triple_file(src).unwrap();
        assert_eq!(rel_valid(&f.setting, &f.triple).unwrap(), None);
    }

    #[test]
    fn std_triples() {
        let src = "low var x : int[0..1]; high var y : int[0..1]; low { skip } pre: true post: true";
        let f = parse_triple_file(src).unwrap();
        let low = &f.setting.low;
        let t = |c: &str, post: &str| StdTriple {
            pre: Assertion::tt(),
            stmt: crate::lang::parse_stmt(c).unwrap(),
            post: Parser::new(post, false).unwrap().parse_assertion().unwrap(),
        };
        assert_eq!(std_valid(low, None, &t("skip", "true"), None).unwrap(), None);
        assert!(matches!(
            std_valid(low, None, &t("x := nondet(0, 1)", "x == 0"), None).unwrap(),
            Some(StdFailure::Outcome { .. })
        ));
        assert!(matches!(std_valid(low, None, &t("assert(false)", "true"), None).unwrap(), Some(StdFailure::Error { .. })));
        let ex = t("skip", "Exec[true; skip]");
        assert_eq!(std_valid(low, Some(&f.setting.high), &ex, None), Err(AssertionError::MissingX));
    }

    #[test]
    fn std_file_with_exec_atoms() {
        let src = "low var x : int[0..2]; high var y : int[0..2];
            low { x := 1 } pre: Exec[true ; y := nondet(0, 2)] post: exists n : int[0..2]. Exec[y == n ; skip] && x == n";
        let f = parse_std_file(src).unwrap();
        let r = std_valid_all_x(&f.setting, &f.triple, &EncOptions::default()).unwrap();
        assert!(r.valid && r.exhaustive);
        assert_eq!(r.x_checked, 8);
        let bad = parse_std_file(&src.replace("nondet(0, 2)", "nondet(0, 0)")).unwrap();
        let r = std_valid_all_x(&bad.setting, &bad.triple, &EncOptions::default()).unwrap();
        assert!(!r.valid);
        assert!(r.failure.unwrap().0.is_some());
        assert!(parse_std_file("low var x : int[0..1]; low { skip } pre: prog[skip] post: true").is_err());
    }
}

//! Checking refinement proofs written as annotated low-level programs.
//!
//! A proof is compiled into obligations following the Hoare rules for the
//! low-level statements. Obligations are discharged without choosing any set
//! `X`: `Exec` atoms are rewritten by the rules named in `@exec` directives
//! and an atom of the target is accepted only when an available atom names
//! the same program over a smaller set of high states.

mod script;

pub use script::{erase, parse_proof_file, parse_rule, Item, Located, ProofFile, RuleSpec};

use crate::assertions::{check_low, decode, ground_high, ground_low, valuations, Assertion, AssertionError};
use crate::execpred::{apply_lifted, ExecPred, PureCert, RuleApp};
use crate::lang::{eval_expr, BoolExpr, Frame, Frames, Pos, Sort, Stmt, Value};
use crate::semantics::Semantics;
use crate::triples::{rel_valid, witness_sets, RelTriple, Setting, StdFailure, TripleError};
use crate::StateSet;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProofError {
    #[error(transparent)]
    Load(#[from] TripleError),
    #[error("{pos}: {msg}")]
    Structure { pos: Pos, msg: String },
}

impl From<AssertionError> for ProofError {
    fn from(e: AssertionError) -> Self {
        ProofError::Load(e.into())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ObligationKind {
    /// `from` implies `to` once the chain has rewritten the Exec atoms.
    Entailment { from: Assertion, chain: Vec<RuleSpec>, to: Assertion },
    /// `{pre} stmt {post}` for a basic statement, with Exec atoms of `pre`
    /// rewritten by the chain and carried across the low step.
    Step { pre: Assertion, chain: Vec<RuleSpec>, stmt: Stmt, post: Assertion },
    /// The guard evaluates without fault wherever the assertion holds.
    GuardSafe { assertion: Assertion, guard: BoolExpr },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Obligation {
    pub label: String,
    pub pos: Pos,
    /// Logical variables introduced by `@exintro` and in scope here.
    pub free: Vec<(String, Sort)>,
    pub kind: ObligationKind,
}

impl Obligation {
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ObligationKind::Entailment { .. } => "consequence",
            ObligationKind::Step { .. } => "axiom",
            ObligationKind::GuardSafe { .. } => "side-condition",
        }
    }
}

struct Gen<'a> {
    setting: &'a Setting,
    out: Vec<Obligation>,
}

fn structure<T>(pos: Pos, msg: impl Into<String>) -> Result<T, ProofError> {
    Err(ProofError::Structure { pos, msg: msg.into() })
}

fn strip_exists(a: &Assertion, v: &str) -> Option<(Sort, Assertion)> {
    let free_in = |b: &Assertion| {
        let mut fv = Vec::new();
        b.free_vars(&mut fv);
        fv.iter().any(|x| x == v)
    };
    match a {
        Assertion::Exists(x, s, b) if x == v => Some((s.clone(), (**b).clone())),
        Assertion::Exists(x, s, b) => {
            let (sv, inner) = strip_exists(b, v)?;
            Some((sv, Assertion::Exists(x.clone(), s.clone(), Box::new(inner))))
        }
        Assertion::And(l, r) => {
            if let Some((s, l2)) = strip_exists(l, v) {
                if !free_in(r) {
                    return Some((s, Assertion::and(l2, (**r).clone())));
                }
            }
            let (s, r2) = strip_exists(r, v)?;
            if free_in(l) {
                return None;
            }
            Some((s, Assertion::and((**l).clone(), r2)))
        }
        _ => None,
    }
}

impl<'a> Gen<'a> {
    fn check(&self, a: &Assertion, free: &[(String, Sort)], pos: Pos) -> Result<(), ProofError> {
        let s = self.setting;
        check_low(a, &s.low_vars(), &s.high_vars(), &s.header.consts, free)
            .map_err(|e| ProofError::Structure { pos, msg: format!("ill-formed assertion: {e}") })
    }

    fn push(&mut self, label: impl Into<String>, pos: Pos, free: &[(String, Sort)], kind: ObligationKind) {
        self.out.push(Obligation { label: label.into(), pos, free: free.to_vec(), kind });
    }

    /// Next `@assert` after optional `@exec` items, starting at `i`.
    fn lookahead_assert(items: &[Located], i: usize) -> Option<(usize, Vec<RuleSpec>, Assertion)> {
        let mut chain = Vec::new();
        for (j, l) in items.iter().enumerate().skip(i) {
            match &l.item {
                Item::Exec(r) => chain.push(r.clone()),
                Item::Assert(a) => return Some((j, chain, a.clone())),
                _ => return None,
            }
        }
        None
    }

    fn block(
        &mut self,
        items: &[Located],
        mut cur: Assertion,
        target: &Assertion,
        end_pos: Pos,
        free: &mut Vec<(String, Sort)>,
    ) -> Result<(), ProofError> {
        let mark = free.len();
        let mut chain: Vec<RuleSpec> = Vec::new();
        let mut reached_target = false;
        let mut invariant: Option<(Assertion, Pos)> = None;
        let mut i = 0;
        while i < items.len() {
            let Located { pos, item } = &items[i];
            let pos = *pos;
            reached_target = false;
            if invariant.is_some() && !matches!(item, Item::While(..)) {
                return structure(pos, "@invariant must be followed by a while loop");
            }
            match item {
                Item::Exec(r) => chain.push(r.clone()),
                Item::Assert(a) => {
                    self.check(a, free, pos)?;
                    let ch = std::mem::take(&mut chain);
                    self.push(format!("consequence at {pos}"), pos, free, ObligationKind::Entailment {
                        from: cur,
                        chain: ch,
                        to: a.clone(),
                    });
                    cur = a.clone();
                }
                Item::ExIntro(v) => {
                    if !chain.is_empty() {
                        return structure(pos, "@exec directives must be followed by an @assert before @exintro");
                    }
                    match strip_exists(&cur, v) {
                        Some((s, body)) => {
                            free.push((v.clone(), s));
                            cur = body;
                        }
                        None => return structure(pos, format!("precondition does not start with `exists {v}`")),
                    }
                }
                Item::Invariant(a) => {
                    self.check(a, free, pos)?;
                    invariant = Some((a.clone(), pos));
                }
                Item::Basic(s) => {
                    let (post, post_chain, next) = match Self::lookahead_assert(items, i + 1) {
                        Some((j, ch, a)) => {
                            self.check(&a, free, items[j].pos)?;
                            (a, ch, j + 1)
                        }
                        None if items[i + 1..].iter().all(|l| matches!(l.item, Item::Exec(_))) => {
                            let ch = items[i + 1..]
                                .iter()
                                .filter_map(|l| match &l.item {
                                    Item::Exec(r) => Some(r.clone()),
                                    _ => None,
                                })
                                .collect();
                            reached_target = true;
                            (target.clone(), ch, items.len())
                        }
                        None => return structure(pos, format!("`{s}` needs an @assert after it")),
                    };
                    let mut ch = std::mem::take(&mut chain);
                    ch.extend(post_chain);
                    self.push(format!("step `{s}` at {pos}"), pos, free, ObligationKind::Step {
                        pre: cur,
                        chain: ch,
                        stmt: s.clone(),
                        post: post.clone(),
                    });
                    cur = post;
                    i = next;
                    continue;
                }
                Item::While(b, body) => {
                    if !chain.is_empty() {
                        return structure(pos, "@exec directives before a loop need an @assert");
                    }
                    let Some((inv, ipos)) = invariant.take() else {
                        return structure(pos, "while loop without @invariant");
                    };
                    self.push(format!("invariant holds on entry at {ipos}"), ipos, free, ObligationKind::Entailment {
                        from: cur,
                        chain: vec![],
                        to: inv.clone(),
                    });
                    self.push(format!("loop guard defined at {pos}"), pos, free, ObligationKind::GuardSafe {
                        assertion: inv.clone(),
                        guard: b.clone(),
                    });
                    let entry = Assertion::and(inv.clone(), Assertion::Pred(b.clone()));
                    self.block(body, entry, &inv, pos, free)?;
                    cur = Assertion::and(inv, Assertion::Pred(BoolExpr::not(b.clone())));
                }
                Item::If(b, t, e) => {
                    if !chain.is_empty() {
                        return structure(pos, "@exec directives before a branch need an @assert");
                    }
                    let (join, next) = self.join(items, i, target)?;
                    self.push(format!("branch guard defined at {pos}"), pos, free, ObligationKind::GuardSafe {
                        assertion: cur.clone(),
                        guard: b.clone(),
                    });
                    self.block(t, Assertion::and(cur.clone(), Assertion::Pred(b.clone())), &join, pos, free)?;
                    let neg = Assertion::and(cur, Assertion::Pred(BoolExpr::not(b.clone())));
                    self.block(e, neg, &join, pos, free)?;
                    reached_target = next == items.len();
                    cur = join;
                    i = next;
                    continue;
                }
                Item::Choice(l, r) => {
                    if !chain.is_empty() {
                        return structure(pos, "@exec directives before a choice need an @assert");
                    }
                    let (join, next) = self.join(items, i, target)?;
                    self.block(l, cur.clone(), &join, pos, free)?;
                    self.block(r, cur, &join, pos, free)?;
                    reached_target = next == items.len();
                    cur = join;
                    i = next;
                    continue;
                }
            }
            i += 1;
        }
        if let Some((_, ipos)) = invariant {
            return structure(ipos, "@invariant must be followed by a while loop");
        }
        if !reached_target {
            self.push(format!("block end at {end_pos}"), end_pos, free, ObligationKind::Entailment {
                from: cur,
                chain,
                to: target.clone(),
            });
        }
        free.truncate(mark);
        Ok(())
    }

    /// The assertion at which the branches of a compound statement meet: the
    /// next `@assert`, or the block target at the end of the block.
    fn join(&self, items: &[Located], i: usize, target: &Assertion) -> Result<(Assertion, usize), ProofError> {
        match items.get(i + 1).map(|l| &l.item) {
            Some(Item::Assert(a)) => Ok((a.clone(), i + 2)),
            None => Ok((target.clone(), items.len())),
            Some(_) => structure(items[i + 1].pos, "the branches need an @assert right after them"),
        }
    }
}

/// Compiles a proof into its obligations.
pub fn generate_obligations(f: &ProofFile) -> Result<Vec<Obligation>, ProofError> {
    let mut g = Gen { setting: &f.setting, out: Vec::new() };
    let origin = Pos { line: 0, col: 0 };
    g.check(&f.pre, &[], origin)?;
    g.check(&f.post, &[], origin)?;
    f.setting
        .check_low_stmt(&f.program)
        .map_err(|e| ProofError::Structure { pos: origin, msg: format!("ill-sorted program: {e}") })?;
    let end = f.body.last().map(|l| l.pos).unwrap_or(origin);
    g.block(&f.body, f.pre.clone(), &f.post, end, &mut Vec::new())?;
    Ok(g.out)
}

/// Result of discharging one obligation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub ok: bool,
    pub detail: Option<String>,
    /// Rule applications actually used, after lifting to sequence heads.
    pub rules: Vec<String>,
    /// Whether Exec atoms were carried across a low-level step.
    pub framed: bool,
    /// Ground disjunct instances examined.
    pub instances: u64,
}

struct Discharger<'a> {
    setting: &'a Setting,
}

fn show_env(env: &[(String, Value)]) -> String {
    if env.is_empty() {
        return String::new();
    }
    let parts: Vec<String> = env.iter().map(|(n, v)| format!("{n}={v}")).collect();
    format!(" with {}", parts.join(", "))
}

type Atom = ExecPred;

impl<'a> Discharger<'a> {
    fn low(&self) -> &Semantics {
        &self.setting.low
    }

    fn high(&self) -> &Semantics {
        &self.setting.high
    }

    fn instantiate(&self, r: &RuleSpec, env: &[(String, Value)]) -> Result<RuleApp, String> {
        Ok(match r {
            RuleSpec::Assign => RuleApp::Assign,
            RuleSpec::Nondet(e) => {
                let names: Vec<String> = env.iter().map(|(n, _)| n.clone()).collect();
                let values: Vec<Value> = env.iter().map(|(_, v)| v.clone()).collect();
                let fr = [self.high().space.const_frame(), Frame { names: &names, values: &values }];
                RuleApp::Nondet(eval_expr(e, &Frames(&fr)).map_err(|f| format!("cannot evaluate `{e}`: {f}"))?)
            }
            RuleSpec::ChoiceL => RuleApp::ChoiceL,
            RuleSpec::ChoiceR => RuleApp::ChoiceR,
            RuleSpec::Assume => RuleApp::Assume,
            RuleSpec::WhileEnd => RuleApp::WhileEnd,
            RuleSpec::WhileUnroll => RuleApp::WhileUnroll,
            RuleSpec::Assert => RuleApp::AssertStep,
            RuleSpec::Focus(a) => RuleApp::Focus { post: ground_high(a, self.high(), env).map_err(|e| e.to_string())? },
            RuleSpec::Pure { replacement, by } => RuleApp::Pure {
                replacement: replacement.clone(),
                cert: match by {
                    None => PureCert::Semantic,
                    Some(c) => PureCert::Chain(c.iter().map(|r| self.instantiate(r, env)).collect::<Result<_, _>>()?),
                },
            },
            RuleSpec::Seq(c) => RuleApp::SeqStep(c.iter().map(|r| self.instantiate(r, env)).collect::<Result<_, _>>()?),
        })
    }

    /// Rewrites every atom by the chain; returns the atoms available afterwards.
    fn run_chain(
        &self,
        atoms: &[Atom],
        chain: &[RuleSpec],
        env: &[(String, Value)],
        used: &mut Vec<String>,
    ) -> Result<Vec<Atom>, String> {
        if chain.is_empty() {
            return Ok(atoms.to_vec());
        }
        if atoms.is_empty() {
            return Err("@exec directives given but the assertion has no Exec atom".into());
        }
        let mut avail = atoms.to_vec();
        for a in atoms {
            let mut cur = a.clone();
            for r in chain {
                let app = self.instantiate(r, env)?;
                let (next, applied) = apply_lifted(self.high(), &cur, &app).map_err(|e| format!("rule `{r}`: {e}"))?;
                let name = applied.to_string();
                if !used.contains(&name) {
                    used.push(name);
                }
                avail.push(next.clone());
                cur = next;
            }
        }
        Ok(avail)
    }

    /// Shared core of entailments and steps: for every instance of `pre`,
    /// every low state it reaches through `stmt` satisfies `post` given the
    /// Exec atoms available after the chain.
    fn transfer(
        &self,
        pre: &Assertion,
        chain: &[RuleSpec],
        stmt: Option<&Stmt>,
        post: &Assertion,
        free: &[(String, Sort)],
    ) -> Result<Verdict, AssertionError> {
        let (low, high) = (self.low(), self.high());
        let names: Vec<String> = free.iter().map(|(n, _)| n.clone()).collect();
        let mut v = Verdict { ok: true, detail: None, rules: vec![], framed: false, instances: 0 };
        let d = stmt.map(|s| low.denote(s));
        for fv in valuations(free)? {
            let logical: Vec<(String, Value)> = names.iter().cloned().zip(fv).collect();
            let gpre = ground_low(pre, low, Some(high), &logical)?;
            let gpost = ground_low(post, low, Some(high), &logical)?;
            for e in &gpre.entries {
                v.instances += 1;
                let atoms: Vec<Atom> = e
                    .execs
                    .iter()
                    .map(|(s, k)| ExecPred { states: s.clone(), prog: gpre.progs.get(*k).clone() })
                    .collect();
                if atoms.iter().any(|a| a.states.is_clear()) {
                    continue;
                }
                let mut env = logical.clone();
                let binders = &gpre.nf.disjuncts[e.disjunct].binders;
                env.extend(binders.iter().map(|(n, _)| n.clone()).zip(e.valuation.iter().cloned()));
                let avail = match self.run_chain(&atoms, chain, &env, &mut v.rules) {
                    Ok(a) => a,
                    Err(msg) => {
                        v.ok = false;
                        v.detail = Some(format!("{msg}{}", show_env(&env)));
                        return Ok(v);
                    }
                };
                if avail.iter().any(|a| a.states.is_clear()) {
                    continue;
                }
                if stmt.is_some() && !atoms.is_empty() {
                    v.framed = true;
                }
                let mut good = low.space.empty_set();
                for f in &gpost.entries {
                    let implied = f.execs.iter().all(|(t, k)| {
                        let c = gpost.progs.get(*k);
                        avail.iter().any(|a| a.prog == *c && a.states.is_subset(t))
                    });
                    if implied {
                        good.union_with(&f.low);
                    }
                }
                let failure = match &d {
                    None => e.low.difference(&good).next().map(|s| format!("{} does not satisfy the target", low.space.show_state(s))),
                    Some(d) => e.low.ones().find_map(|s| {
                        if d.err.contains(s) {
                            Some(format!("{} may go wrong", low.space.show_state(s)))
                        } else {
                            d.nrm[s].difference(&good).next().map(|t| {
                                format!(
                                    "{} may end in {} which does not satisfy the target",
                                    low.space.show_state(s),
                                    low.space.show_state(t)
                                )
                            })
                        }
                    }),
                };
                if let Some(msg) = failure {
                    v.ok = false;
                    v.detail = Some(format!("{msg}{}", show_env(&env)));
                    return Ok(v);
                }
            }
        }
        Ok(v)
    }

    fn guard_safe(&self, a: &Assertion, b: &BoolExpr, free: &[(String, Sort)]) -> Result<Verdict, AssertionError> {
        let (low, high) = (self.low(), self.high());
        let names: Vec<String> = free.iter().map(|(n, _)| n.clone()).collect();
        let mut v = Verdict { ok: true, detail: None, rules: vec![], framed: false, instances: 0 };
        for fv in valuations(free)? {
            let logical: Vec<(String, Value)> = names.iter().cloned().zip(fv).collect();
            let g = ground_low(a, low, Some(high), &logical)?;
            for e in &g.entries {
                v.instances += 1;
                if e.execs.iter().any(|(s, _)| s.is_clear()) {
                    continue;
                }
                if let Some(s) = e.low.ones().find(|s| low.space.eval_bool(*s, b).is_none()) {
                    v.ok = false;
                    v.detail = Some(format!("guard `{b}` faults at {}{}", low.space.show_state(s), show_env(&logical)));
                    return Ok(v);
                }
            }
        }
        Ok(v)
    }

    fn discharge(&self, ob: &Obligation) -> Verdict {
        let r = match &ob.kind {
            ObligationKind::Entailment { from, chain, to } => self.transfer(from, chain, None, to, &ob.free),
            ObligationKind::Step { pre, chain, stmt, post } => self.transfer(pre, chain, Some(stmt), post, &ob.free),
            ObligationKind::GuardSafe { assertion, guard } => self.guard_safe(assertion, guard, &ob.free),
        };
        r.unwrap_or_else(|e| Verdict { ok: false, detail: Some(e.to_string()), rules: vec![], framed: false, instances: 0 })
    }
}

pub fn discharge(setting: &Setting, ob: &Obligation) -> Verdict {
    Discharger { setting }.discharge(ob)
}

/// Semantic cross-check of the goal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    /// Validity of the decoded relational triple; absent when some disjunct
    /// does not carry exactly one Exec atom.
    pub relational: Option<bool>,
    pub encoded_all_x: bool,
    pub exhaustive: bool,
    pub x_checked: u64,
    pub counterexample: Option<String>,
}

impl OracleReport {
    pub fn valid(&self) -> bool {
        self.encoded_all_x && self.relational.unwrap_or(true)
    }

    pub fn consistent(&self) -> bool {
        self.relational.is_none_or(|r| r == self.encoded_all_x)
    }
}

#[derive(Clone, Debug)]
pub struct ProveOptions {
    pub oracle: bool,
    pub cap: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for ProveOptions {
    fn default() -> Self {
        ProveOptions { oracle: true, cap: crate::DEFAULT_X_CAP, samples: 256, seed: 0 }
    }
}

/// Checks the goal `{pre} c {post}` by brute force: for every `X` (or the
/// fallback family beyond the cap) and, through decoding, as a relational triple.
pub fn oracle(f: &ProofFile, opts: &ProveOptions) -> Result<OracleReport, TripleError> {
    let s = &f.setting;
    let (low, high) = (&s.low, &s.high);
    let gpre = ground_low(&f.pre, low, Some(high), &[])?;
    let gpost = ground_low(&f.post, low, Some(high), &[])?;
    let n = high.space.len();
    let exhaustive = n <= opts.cap && n < 63;
    let sets: Box<dyn Iterator<Item = StateSet>> = if exhaustive {
        Box::new(crate::assertions::all_subsets(n, opts.cap)?)
    } else {
        let mut configs = Vec::new();
        for e in &gpre.entries {
            for (st, k) in &e.execs {
                configs.extend(st.ones().map(|h| (h, gpre.progs.get(*k))));
            }
        }
        Box::new(witness_sets(high, configs, opts.samples, opts.seed).into_iter())
    };
    let mut x_checked = 0;
    let mut counterexample = None;
    for x in sets {
        x_checked += 1;
        let p = gpre.extension_with(&gpre.wlps(high, &x));
        let q = gpost.extension_with(&gpost.wlps(high, &x));
        if let Some(fail) = crate::triples::std_valid_sets(low, &p, &f.program, &q) {
            let shown: Vec<String> = x.ones().map(|h| high.space.show_state(h)).collect();
            counterexample = Some(format!("X = {{{}}}: {}", shown.join(", "), render(&fail, s)));
            break;
        }
    }
    let lows = s.low_names();
    let relational = match (decode(&f.pre, &lows), decode(&f.post, &lows)) {
        (Ok(p), Ok(q)) => {
            let t = RelTriple { pre: p.to_rel_assertion(), low: f.program.clone(), post: q.to_rel_assertion() };
            Some(rel_valid(s, &t)?.is_none())
        }
        _ => None,
    };
    Ok(OracleReport { relational, encoded_all_x: counterexample.is_none(), exhaustive, x_checked, counterexample })
}

fn render(f: &StdFailure, s: &Setting) -> String {
    f.render(&s.low.space)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObligationReport {
    pub index: usize,
    pub label: String,
    pub kind: &'static str,
    pub chain: Vec<String>,
    pub verdict: Verdict,
}

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_OBLIGATION: i32 = 1;
pub const EXIT_STRUCTURE: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub certified: bool,
    pub exit_code: i32,
    pub error: Option<String>,
    /// Obligations by kind, plus `frame` for steps that carried Exec atoms.
    pub counts: BTreeMap<String, usize>,
    pub obligations: Vec<ObligationReport>,
    pub oracle: Option<OracleReport>,
}

impl Report {
    fn structural(e: impl std::fmt::Display) -> Report {
        Report {
            certified: false,
            exit_code: EXIT_STRUCTURE,
            error: Some(e.to_string()),
            counts: BTreeMap::new(),
            obligations: vec![],
            oracle: None,
        }
    }

    pub fn failed(&self) -> Vec<&ObligationReport> {
        self.obligations.iter().filter(|o| !o.verdict.ok).collect()
    }

    /// Human-readable summary.
    pub fn render(&self) -> String {
        let mut s = String::new();
        if let Some(e) = &self.error {
            s.push_str(&format!("error: {e}\n"));
        }
        for o in &self.obligations {
            let mark = if o.verdict.ok { "ok  " } else { "FAIL" };
            s.push_str(&format!("[{mark}] #{} {} ({})", o.index, o.label, o.kind));
            if !o.verdict.rules.is_empty() {
                s.push_str(&format!(" rules: {}", o.verdict.rules.join("; ")));
            }
            s.push('\n');
            if let Some(d) = &o.verdict.detail {
                s.push_str(&format!("       {d}\n"));
            }
        }
        if !self.counts.is_empty() {
            let c: Vec<String> = self.counts.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!("obligations: {}\n", c.join(" ")));
        }
        if let Some(o) = &self.oracle {
            let rel = match o.relational {
                Some(true) => "valid",
                Some(false) => "invalid",
                None => "n/a",
            };
            s.push_str(&format!(
                "oracle: relational={rel} encoded_all_x={} exhaustive={} x_checked={}\n",
                o.encoded_all_x, o.exhaustive, o.x_checked
            ));
            if let Some(c) = &o.counterexample {
                s.push_str(&format!("oracle counterexample: {c}\n"));
            }
        }
        let verdict = match self.exit_code {
            EXIT_CERTIFIED => "certified",
            EXIT_OBLIGATION => "not certified: obligation failure",
            EXIT_STRUCTURE => "not certified: malformed proof",
            _ => "ORACLE DISAGREEMENT",
        };
        s.push_str(verdict);
        s.push('\n');
        s
    }
}

/// Generates and discharges all obligations of a loaded proof.
pub fn check_proof(f: &ProofFile, opts: &ProveOptions) -> Report {
    let obs = match generate_obligations(f) {
        Ok(o) => o,
        Err(e) => return Report::structural(e),
    };
    let d = Discharger { setting: &f.setting };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut reports = Vec::new();
    for (index, ob) in obs.iter().enumerate() {
        let verdict = d.discharge(ob);
        *counts.entry(ob.kind_name().to_string()).or_default() += 1;
        let chain: Vec<String> = match &ob.kind {
            ObligationKind::Entailment { chain, .. } | ObligationKind::Step { chain, .. } => {
                chain.iter().map(|r| r.to_string()).collect()
            }
            ObligationKind::GuardSafe { .. } => vec![],
        };
        if matches!(ob.kind, ObligationKind::Step { .. }) && !chain.is_empty() {
            *counts.entry("consequence".to_string()).or_default() += 1;
        }
        if verdict.framed {
            *counts.entry("frame".to_string()).or_default() += 1;
        }
        reports.push(ObligationReport { index, label: ob.label.clone(), kind: ob.kind_name(), chain, verdict });
    }
    let certified = reports.iter().all(|r| r.verdict.ok);
    let mut report = Report {
        certified,
        exit_code: if certified { EXIT_CERTIFIED } else { EXIT_OBLIGATION },
        error: None,
        counts,
        obligations: reports,
        oracle: None,
    };
    if opts.oracle {
        match oracle(f, opts) {
            Ok(o) => {
                if !o.consistent() || (certified && !o.valid()) {
                    report.exit_code = EXIT_ORACLE;
                }
                report.oracle = Some(o);
            }
            Err(e) => {
                report.error = Some(format!("oracle: {e}"));
            }
        }
    }
    report
}

/// Parses and checks a proof file.
pub fn prove_source(src: &str, opts: &ProveOptions) -> Report {
    match parse_proof_file(src) {
        Ok(f) => check_proof(&f, opts),
        Err(e) => Report::structural(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const STRAIGHT: &str = "low var x : int[0..3]; high var y : int[0..3];
        pre: Exec[true ; y := 1; y := y + 1]
        post: Exec[y == 2 ; skip] && x == 2
        proof {
          // @exec assign
          // @assert Exec[y == 1 ; y := y + 1]
          x := 1;
          // @exec assign
          // @assert Exec[y == 2 ; skip] && x == 1
          x := x + 1;
        }";

    #[test]
    fn straight_line_proof_is_certified() {
        let r = prove_source(STRAIGHT, &ProveOptions::default());
        assert_eq!(r.exit_code, EXIT_CERTIFIED, "{}", r.render());
        assert_eq!(r.counts["axiom"], 2);
        assert_eq!(r.oracle.as_ref().unwrap().relational, Some(true));
    }

    #[test]
    fn wrong_assertion_fails_one_obligation() {
        let bad = STRAIGHT.replace("&& x == 1\n", "&& x == 0\n");
        let r = prove_source(&bad, &ProveOptions::default());
        assert_eq!(r.exit_code, EXIT_OBLIGATION, "{}", r.render());
        assert_eq!(r.failed().len(), 2);
    }

    #[test]
    fn failing_side_condition_names_state() {
        let src = "low var x : int[0..1]; high var j : int[0..1];
            pre: Exec[true ; assume(j < 0)] post: Exec[true ; skip]
            proof { // @exec assume
            skip }";
        let r = prove_source(src, &ProveOptions::default());
        assert_eq!(r.exit_code, EXIT_OBLIGATION);
        assert!(r.failed()[0].verdict.detail.as_ref().unwrap().contains("j=0"), "{}", r.render());
    }

    #[test]
    fn trivial_skip_proof() {
        let src = "low var x : int[0..1]; high var y : int[0..1];
            pre: Exec[y == 0 ; skip] && x == 0 post: Exec[y == 0 ; skip] && x == 0 proof { skip }";
        let r = prove_source(src, &ProveOptions::default());
        assert_eq!(r.exit_code, EXIT_CERTIFIED, "{}", r.render());
        assert_eq!(r.obligations.len(), 1);
    }

    #[test]
    fn missing_invariant_is_structural() {
        let src = "low var i : int[0..2]; high var y : int[0..1];
            pre: Exec[true ; skip] post: Exec[true ; skip] proof { while (i < 2) { i := i + 1 } }";
        assert_eq!(prove_source(src, &ProveOptions::default()).exit_code, EXIT_STRUCTURE);
    }

    #[test]
    fn strip_exists_through_conjunction() {
        let a = crate::lang::Parser::new("(exists n : int[0..1]. x == n) && x < 1", false).unwrap().parse_assertion().unwrap();
        let (s, body) = strip_exists(&a, "n").unwrap();
        assert_eq!(s, Sort::int(0, 1));
        assert!(!matches!(body, Assertion::Exists(..)));
        assert!(strip_exists(&a, "m").is_none());
    }
}

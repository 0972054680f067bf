//! Property suites over generated instances. Each case gets its own seed,
//! derived from the run seed and the case index, so a failing case can be
//! regenerated on its own.

use super::{subst_assertion, universe_of, Gen, GenConfig, Vars};
use crate::assertions::{all_subsets, decompose, enc, enc_syntactic, extension, ground_rel, Assertion, BinRel};
use crate::execpred::{apply_lifted, exec_holds, RuleKind};
use crate::lang::{Expr, Header, Sort, Stmt};
use crate::semantics::{check_decomposition, ErrorMode, Semantics, StateSpace};
use crate::triples::{check_encoding_equiv, vc_fc, vc_refine, vc_store_rule, EncFault, EncOptions, Setting, StoreShape};
use crate::StateSet;
use rand::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    /// Relational validity agrees with the encoded triples over all `X`.
    Thm4,
    /// Configuration refinement agrees with the `wlp` implication.
    Decomp,
    /// Accepted `Exec` rule applications are sound for every `X`.
    ExecRules,
    /// Vertical composition conclusions hold whenever the premises do.
    Vc,
    /// Algebraic laws of the encoding and agreement of its two definitions.
    Enc,
}

impl Property {
    pub const ALL: [Property; 5] = [Property::Thm4, Property::Decomp, Property::ExecRules, Property::Vc, Property::Enc];

    pub fn name(self) -> &'static str {
        match self {
            Property::Thm4 => "thm4",
            Property::Decomp => "decomp",
            Property::ExecRules => "exec-rules",
            Property::Vc => "vc",
            Property::Enc => "enc",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| format!("unknown property `{s}`"))
    }
}

#[derive(Clone, Debug)]
pub struct FuzzOptions {
    pub seed: u64,
    pub count: usize,
    pub depth: usize,
    /// Largest high space whose subsets are enumerated.
    pub cap: usize,
    /// Deliberate bug in the encoding, for testing the harness itself. Only
    /// the thm4 property consults it.
    pub fault: Option<EncFault>,
}

impl Default for FuzzOptions {
    fn default() -> Self {
        FuzzOptions { seed: 0, count: 100, depth: 3, cap: crate::DEFAULT_X_CAP, fault: None }
    }
}

/// A counterexample together with enough text to replay it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzCase {
    pub index: usize,
    pub seed: u64,
    pub detail: String,
    pub artifact: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FuzzSummary {
    pub property: Property,
    pub seed: u64,
    pub count: usize,
    /// Cases whose instance satisfied the property's preconditions.
    pub checked: usize,
    pub passed: usize,
    /// Cases discarded because the generated instance was not applicable.
    pub skipped: usize,
    pub stats: BTreeMap<String, u64>,
    pub failures: Vec<FuzzCase>,
}

impl FuzzSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn stat(&self, key: &str) -> u64 {
        self.stats.get(key).copied().unwrap_or(0)
    }
}

enum Outcome {
    Pass,
    Skip,
    Fail { detail: String, artifact: String },
}

/// Seed of case `i` of a run seeded with `seed` (a splitmix64 step).
pub fn case_seed(seed: u64, i: usize) -> u64 {
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_property(p: Property, opts: &FuzzOptions) -> FuzzSummary {
    let mut s = FuzzSummary {
        property: p,
        seed: opts.seed,
        count: opts.count,
        checked: 0,
        passed: 0,
        skipped: 0,
        stats: BTreeMap::new(),
        failures: Vec::new(),
    };
    for i in 0..opts.count {
        let seed = case_seed(opts.seed, i);
        let mut stats = BTreeMap::new();
        let out = match p {
            Property::Thm4 => thm4_case(seed, opts, &mut stats),
            Property::Decomp => decomp_case(seed, opts, &mut stats),
            Property::ExecRules => exec_case(seed, i, opts, &mut stats),
            Property::Vc => vc_case(seed, i, opts, &mut stats),
            Property::Enc => enc_case(seed, opts, &mut stats),
        };
        for (k, v) in stats {
            *s.stats.entry(k).or_insert(0) += v;
        }
        match out {
            Outcome::Pass => {
                s.checked += 1;
                s.passed += 1;
            }
            Outcome::Skip => s.skipped += 1,
            Outcome::Fail { detail, artifact } => {
                s.checked += 1;
                s.failures.push(FuzzCase { index: i, seed, detail, artifact });
            }
        }
    }
    s
}

fn bump(stats: &mut BTreeMap<String, u64>, key: impl Into<String>, by: u64) {
    *stats.entry(key.into()).or_insert(0) += by;
}

fn cfg(seed: u64, opts: &FuzzOptions, max_states: usize) -> GenConfig {
    GenConfig { seed, max_depth: opts.depth, max_states, ..GenConfig::default() }
}

fn replay_header(p: Property, seed: u64, opts: &FuzzOptions) -> String {
    format!("// fuzz {p} case-seed={seed} depth={}\n", opts.depth)
}

fn thm4_case(seed: u64, opts: &FuzzOptions, stats: &mut BTreeMap<String, u64>) -> Outcome {
    let t = Gen::new(cfg(seed, opts, 12)).rel_triple();
    let enc_opts = EncOptions { cap: opts.cap, seed, fault: opts.fault, ..EncOptions::default() };
    let r = match check_encoding_equiv(&t.file.setting, &t.file.triple, &enc_opts) {
        Ok(r) => r,
        Err(e) => return Outcome::Fail { detail: format!("checker error: {e}"), artifact: t.text },
    };
    bump(stats, if r.relational { "valid" } else { "invalid" }, 1);
    bump(stats, "x_checked", r.x_checked);
    if r.exhaustive {
        bump(stats, "exhaustive", 1);
    }
    if t.perturbed {
        bump(stats, "perturbed", 1);
    }
    if r.agree() {
        Outcome::Pass
    } else {
        Outcome::Fail {
            detail: format!("relational={} encoded_all_x={}", r.relational, r.encoded_all_x),
            artifact: format!("{}{}", replay_header(Property::Thm4, seed, opts), t.text),
        }
    }
}

fn decomp_case(seed: u64, opts: &FuzzOptions, stats: &mut BTreeMap<String, u64>) -> Outcome {
    let mut g = Gen::new(cfg(seed, opts, 10));
    let p = g.config_pair();
    let show = |s: usize, c: &Stmt| format!("({}, {c})", p.sem.space.show_state(s));
    let artifact = format!(
        "{}space: {}\nleft: {}\nright: {}\n",
        replay_header(Property::Decomp, seed, opts),
        p.sem.space.vars().iter().map(|(x, s)| format!("{x} : {s}")).collect::<Vec<_>>().join(", "),
        show(p.s1, &p.c1),
        show(p.s2, &p.c2)
    );
    let mut problems = Vec::new();
    for mode in [ErrorMode::Ignore, ErrorMode::Track] {
        let r = match check_decomposition(&p.sem, p.s1, &p.c1, p.s2, &p.c2, mode, opts.cap.max(10)) {
            Ok(r) => r,
            Err(e) => return Outcome::Fail { detail: e.to_string(), artifact },
        };
        if mode == ErrorMode::Track && r.initial_error {
            bump(stats, "track_initial_error", 1);
            continue;
        }
        let tag = if mode == ErrorMode::Ignore { "ignore" } else { "track" };
        bump(stats, format!("{tag}_{}", if r.refines { "refines" } else { "not_refines" }), 1);
        if !r.agree() {
            problems.push(format!("{tag}: refines={} wlp_implication={}", r.refines, r.wlp_implication));
        }
        if r.witness_refutes == Some(false) {
            problems.push(format!("{tag}: the terminal set of the left configuration does not refute"));
        }
    }
    if problems.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail { detail: problems.join("; "), artifact }
    }
}

fn exec_case(seed: u64, i: usize, opts: &FuzzOptions, stats: &mut BTreeMap<String, u64>) -> Outcome {
    let kind = RuleKind::ALL[i % RuleKind::ALL.len()];
    let mut g = Gen::new(GenConfig { max_depth: opts.depth.min(3), ..cfg(seed, opts, 8) });
    let c = g.exec_case(kind);
    let (q, used) = match apply_lifted(&c.sem, &c.pred, &c.rule) {
        Ok(r) => r,
        Err(_) => {
            bump(stats, format!("rejected_{}", kind.name()), 1);
            return Outcome::Skip;
        }
    };
    bump(stats, format!("accepted_{}", kind.name()), 1);
    let n = c.sem.space.len();
    let xs = match all_subsets(n, opts.cap) {
        Ok(xs) => xs,
        Err(e) => return Outcome::Fail { detail: e.to_string(), artifact: String::new() },
    };
    for x in xs {
        if exec_holds(&c.sem, &c.pred, &x) && !exec_holds(&c.sem, &q, &x) {
            let show = |s: &StateSet| s.ones().map(|i| c.sem.space.show_state(i)).collect::<Vec<_>>().join(" ");
            return Outcome::Fail {
                detail: format!("rule {used} is unsound for X = [{}]", show(&x)),
                artifact: format!(
                    "{}rule: {used}\nstates: [{}]\nprogram: {}\n",
                    replay_header(Property::ExecRules, seed, opts),
                    show(&c.pred.states),
                    c.pred.prog
                ),
            };
        }
    }
    Outcome::Pass
}

fn space_of(vars: &Vars) -> Semantics {
    Semantics::new(StateSpace::new(vars, &[]).expect("small space"))
}

/// Drops pairs of `p` whose refinement would need an outcome the high side
/// cannot supply, then builds a postcondition from sampled joint outcomes
/// plus a little noise, so `⟨p ∧ ⌜ch⌝⟩ cl ⟨q ∧ ⌜skip⌝⟩` holds.
fn sampled_refinement(g: &mut Gen, low: &Semantics, high: &Semantics, cl: &Stmt, ch: &Stmt, p: &mut BinRel) -> BinRel {
    let (dl, dh) = (low.denote(cl), high.denote(ch));
    let (nl, nh) = (low.space.len(), high.space.len());
    let mut q = BinRel::empty(nl, nh);
    for l in 0..nl {
        for h in 0..nh {
            if !p.contains(l, h) || dh.err.contains(h) {
                continue;
            }
            let outs: Vec<usize> = dh.nrm[h].ones().collect();
            if dl.err.contains(l) || (outs.is_empty() && !dl.nrm[l].is_clear()) {
                p.rows[l].set(h, false);
                continue;
            }
            for l2 in dl.nrm[l].ones() {
                q.insert(l2, *outs.choose(g.rng()).expect("nonempty"));
            }
        }
    }
    for l in 0..nl {
        for h in 0..nh {
            if g.rng().gen_bool(0.05) {
                q.insert(l, h);
            }
        }
    }
    q
}

fn random_rel(g: &mut Gen, nl: usize, nh: usize, density: f64) -> BinRel {
    let mut r = BinRel::empty(nl, nh);
    for l in 0..nl {
        for h in 0..nh {
            if g.rng().gen_bool(density) {
                r.insert(l, h);
            }
        }
    }
    r
}

fn vc_case(seed: u64, i: usize, opts: &FuzzOptions, stats: &mut BTreeMap<String, u64>) -> Outcome {
    let mut g = Gen::new(GenConfig { max_depth: opts.depth.min(3), ..cfg(seed, opts, 6) });
    let depth = g.config().max_depth;
    let which = ["vc_fc", "vc_refine", "vc_store_rule"][i % 3];
    let (lv, hv) = (g.vars("x", 6), g.vars("h", 6));
    let (low, high) = (space_of(&lv), space_of(&hv));
    let (nl, nh) = (low.space.len(), high.space.len());
    let cl = g.stmt(&lv, depth);
    let ch = g.stmt(&hv, depth);
    let artifact = format!("{}kind: {which}\nlow: {cl}\nhigh: {ch}\n", replay_header(Property::Vc, seed, opts));
    let result: Result<bool, String> = match which {
        "vc_fc" => {
            let mut p = random_rel(&mut g, nl, nh, 0.3);
            let q = sampled_refinement(&mut g, &low, &high, &cl, &ch, &mut p);
            let dh = high.denote(&ch);
            let mut p_high = g.subset(nh, 0.5);
            p_high.difference_with(&dh.err);
            let mut q_high = dh.image(&p_high);
            q_high.union_with(&g.subset(nh, 0.1));
            vc_fc(&low, &high, &p, &ch, &cl, &q, &p_high, &q_high).map(|o| o.valid()).map_err(|e| e.to_string())
        }
        "vc_refine" => {
            let mv = g.vars("m", 6);
            let mid = space_of(&mv);
            let nm = mid.space.len();
            let cm = g.stmt(&mv, depth);
            let mut p1 = random_rel(&mut g, nl, nm, 0.3);
            let q1 = sampled_refinement(&mut g, &low, &mid, &cl, &cm, &mut p1);
            let mut p2 = random_rel(&mut g, nm, nh, 0.3);
            let q2 = sampled_refinement(&mut g, &mid, &high, &cm, &ch, &mut p2);
            vc_refine(&low, &mid, &high, &p1, &q1, &cl, &cm, &p2, &q2, &ch)
                .map(|o| o.failure.is_none())
                .map_err(|e| e.to_string())
        }
        _ => {
            let (dl, dh) = (low.denote(&cl), high.denote(&ch));
            let k = g.rng().gen_range(1..=3);
            let mut shape = StoreShape { pre_low: vec![], pre_high: vec![], post_low: vec![], post_high: vec![] };
            let mut b1 = Vec::new();
            for _ in 0..k {
                let mut l = g.subset(nl, 0.4);
                l.difference_with(&dl.err);
                let mut h = g.subset(nh, 0.4);
                h.difference_with(&dh.err);
                let blocked: Vec<usize> = h.ones().filter(|s| dh.nrm[*s].is_clear()).collect();
                for s in blocked {
                    h.set(s, false);
                }
                shape.post_low.push(dl.image(&l));
                shape.post_high.push(dh.image(&h));
                shape.pre_low.push(l);
                b1.push(!h.is_clear() && g.rng().gen_bool(0.7));
                shape.pre_high.push(h);
            }
            let mut high_pre = high.space.empty_set();
            for (u, h) in shape.pre_high.iter().enumerate() {
                if b1[u] {
                    high_pre.union_with(h);
                }
            }
            let reach = dh.image(&high_pre);
            let b2: Vec<bool> = shape.post_high.iter().map(|h| !h.is_disjoint(&reach) || g.rng().gen_bool(0.5)).collect();
            vc_store_rule(&low, &high, &shape, &ch, &cl, &b1, &b2, &|u| format!("u={u}"))
                .map(|o| o.valid())
                .map_err(|e| e.to_string())
        }
    };
    match result {
        Ok(true) => {
            bump(stats, format!("accepted_{which}"), 1);
            Outcome::Pass
        }
        Ok(false) => Outcome::Fail { detail: format!("{which}: premises hold but the conclusion fails"), artifact },
        Err(_) => {
            bump(stats, format!("premise_fails_{which}"), 1);
            Outcome::Skip
        }
    }
}

fn enc_case(seed: u64, opts: &FuzzOptions, stats: &mut BTreeMap<String, u64>) -> Outcome {
    let mut g = Gen::new(GenConfig { max_depth: opts.depth.min(3), ..cfg(seed, opts, 6) });
    let (lv, hv) = (g.vars("x", 6), g.vars("h", 6));
    let setting = match Setting::new(Header { low_vars: lv.clone(), high_vars: hv.clone(), ..Header::default() }) {
        Ok(s) => s,
        Err(e) => return Outcome::Fail { detail: e.to_string(), artifact: String::new() },
    };
    let (low, high) = (&setting.low, &setting.high);
    let binder = ("a".to_string(), Sort::int(0, 2));
    let body = |g: &mut Gen| {
        let (pure, lp, hp, c) = g.decomposed_body(&lv, &hv, &binder);
        let a = Assertion::and_all(vec![Assertion::Pred(pure), Assertion::Pred(lp), Assertion::Pred(hp), Assertion::Prog(c.clone())]);
        (a, c)
    };
    let (d1, c1) = body(&mut g);
    let (d2, c2) = body(&mut g);
    let universe = universe_of(&[&c1, &c2]);
    let ex = |a: &Assertion| Assertion::exists(&binder.0, binder.1.clone(), a.clone());
    let inst = |a: &Assertion, k: i64| subst_assertion(a, &binder.0, &Expr::int(k));
    let extra_pure = g.bool_expr(&vec![binder.clone()], 0);
    let extra_low = g.bool_expr(&lv, 1);
    let artifact = format!(
        "{}low: {:?}\nhigh: {:?}\nP1: {d1}\nP2: {d2}\nB: {extra_pure}\nL: {extra_low}\n",
        replay_header(Property::Enc, seed, opts),
        lv,
        hv
    );
    let rel = |a: &Assertion| ground_rel(a, low, high, &universe);
    let (Ok(e1), Ok(e2), Ok(eor)) = (rel(&ex(&d1)), rel(&ex(&d2)), rel(&Assertion::or(ex(&d1), ex(&d2)))) else {
        return Outcome::Fail { detail: "grounding failed".into(), artifact };
    };
    let insts: Vec<_> = (0..=2).map(|k| rel(&inst(&d1, k)).expect("grounds")).collect();
    let with_pure: Vec<_> = (0..=2)
        .map(|k| {
            let b = extra_pure.subst(&|n| (n == binder.0).then(|| Expr::int(k)));
            (b.clone(), rel(&Assertion::and(Assertion::Pred(b), inst(&d1, k))).expect("grounds"))
        })
        .collect();
    let with_low: Vec<_> =
        (0..=2).map(|k| rel(&Assertion::and(Assertion::Pred(extra_low.clone()), inst(&d1, k))).expect("grounds")).collect();
    let low_ext = low.space.extension(&extra_low);
    let whole = Assertion::or(ex(&d1), ex(&d2));
    let syntactic = match decompose(&whole, &setting.low_names(), &setting.high_names()) {
        Ok(d) => enc_syntactic(&d),
        Err(e) => return Outcome::Fail { detail: format!("decompose: {e}"), artifact },
    };
    let xs = match all_subsets(high.space.len(), opts.cap) {
        Ok(xs) => xs,
        Err(e) => return Outcome::Fail { detail: e.to_string(), artifact },
    };
    for x in xs {
        bump(stats, "x_checked", 1);
        let mut union = low.space.empty_set();
        for r in &insts {
            union.union_with(&enc(r, high, &x));
        }
        if enc(&e1, high, &x) != union {
            return Outcome::Fail { detail: "existential law fails".into(), artifact };
        }
        for (k, (b, r)) in with_pure.iter().enumerate() {
            let holds = crate::lang::eval_bool(b, &crate::lang::Frames(&[])) == Ok(true);
            let want = if holds { enc(&insts[k], high, &x) } else { low.space.empty_set() };
            if enc(r, high, &x) != want {
                return Outcome::Fail { detail: "pure-conjunct law fails".into(), artifact };
            }
        }
        for (k, r) in with_low.iter().enumerate() {
            let mut want = enc(&insts[k], high, &x);
            want.intersect_with(&low_ext);
            if enc(r, high, &x) != want {
                return Outcome::Fail { detail: "low-conjunct law fails".into(), artifact };
            }
        }
        let mut union = enc(&e1, high, &x);
        union.union_with(&enc(&e2, high, &x));
        if enc(&eor, high, &x) != union {
            return Outcome::Fail { detail: "disjunction law fails".into(), artifact };
        }
        match extension(&syntactic, low, Some(high), Some(&x)) {
            Ok(s) if s == enc(&eor, high, &x) => {}
            Ok(s) => {
                let sem = enc(&eor, high, &x);
                let show = |v: &StateSet| v.ones().map(|i| low.space.show_state(i)).collect::<Vec<_>>().join(" ");
                return Outcome::Fail {
                    detail: format!("syntactic [{}] and semantic [{}] encodings differ", show(&s), show(&sem)),
                    artifact,
                };
            }
            Err(e) => return Outcome::Fail { detail: format!("syntactic encoding: {e}"), artifact },
        }
    }
    bump(stats, "assertions", 1);
    Outcome::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(p: Property, count: usize) -> FuzzSummary {
        run_property(p, &FuzzOptions { seed: 5, count, depth: 2, ..FuzzOptions::default() })
    }

    #[test]
    fn properties_hold_on_small_runs() {
        for p in Property::ALL {
            let s = quick(p, 30);
            assert!(s.ok(), "{p}: {:?}", s.failures.first());
        }
    }

    #[test]
    fn zero_count_is_trivially_ok() {
        let s = quick(Property::Thm4, 0);
        assert!(s.ok() && s.checked == 0);
    }

    #[test]
    fn injected_fault_is_caught() {
        let s = run_property(
            Property::Thm4,
            &FuzzOptions { seed: 1, count: 200, depth: 3, fault: Some(EncFault::WlpIgnoresErrors), ..FuzzOptions::default() },
        );
        assert!(!s.ok());
        assert!(s.failures[0].artifact.starts_with("// fuzz thm4"));
    }

    #[test]
    fn property_names_round_trip() {
        for p in Property::ALL {
            assert_eq!(p.name().parse::<Property>().unwrap(), p);
        }
    }
}

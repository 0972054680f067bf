//! Command-line front end: semantics dumps, triple checking, proof checking,
//! property fuzzing and the syntactic encoding. Every command returns its
//! records as JSON values; text output is rendered from the same records.

use clap::{Parser, Subcommand, ValueEnum};
use refine_core::assertions::{decompose, enc_syntactic};
use refine_core::lang::parse_program;
use refine_core::prover::{prove_source, ProveOptions, Report};
use refine_core::semantics::{Semantics, StateSpace};
use refine_core::testkit::{render_header, run_property, FuzzOptions, FuzzSummary, Property};
use refine_core::triples::{
    check_encoding_equiv, parse_std_file, parse_triple_file, rel_valid, std_valid_all_x, EncFault, EncOptions,
};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::time::Instant;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DISAGREE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Std,
    Rel,
    EncodeEquiv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    WlpIgnoresErrors,
}

#[derive(Parser, Debug)]
#[command(name = "refine", version, about = "Check refinement between a low-level and a high-level program")]
pub struct Cli {
    /// Output format: human-readable text or one JSON record per line.
    #[arg(long, value_enum, default_value = "text", global = true)]
    pub format: Format,
    /// Largest high state space whose subsets X are all enumerated.
    #[arg(long, env = "REFINE_ENC_X_CAP", default_value_t = refine_core::DEFAULT_X_CAP,
          value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..63), global = true)]
    pub cap: usize,
    /// Report wall-clock time. Off by default so output is reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Print the denotation of a program file.
    Semantics { file: PathBuf },
    /// Check a triple file.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "rel")]
        mode: Mode,
    },
    /// Check a proof file.
    Prove {
        file: PathBuf,
        /// Cross-check the goal semantically.
        #[arg(long)]
        oracle: bool,
    },
    /// Run a property suite on generated instances.
    Fuzz {
        #[arg(long)]
        property: Property,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        /// Where counterexamples are written.
        #[arg(long, default_value = "fuzz-failures")]
        out_dir: PathBuf,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Print the encoded standard triple of a relational triple file.
    Encode { file: PathBuf },
}

/// Result of one command: an exit code and the lines it prints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Out {
    code: i32,
    records: Vec<Value>,
    text: String,
    warnings: Vec<String>,
}

impl Out {
    fn new() -> Out {
        Out { code: EXIT_OK, records: vec![], text: String::new(), warnings: vec![] }
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn input_error(e: impl std::fmt::Display) -> Out {
        let mut o = Out::new();
        o.code = EXIT_INPUT;
        o.records.push(json!({"record": "error", "message": e.to_string()}));
        o.line(format!("error: {e}"));
        o
    }
}

pub fn run_args<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                Output { code, stdout: String::new(), stderr: rendered }
            } else {
                Output { code, stdout: rendered, stderr: String::new() }
            }
        }
    }
}

pub fn run(cli: &Cli) -> Output {
    let start = Instant::now();
    let mut out = match &cli.cmd {
        Cmd::Semantics { file } => read(file).map_or_else(Out::input_error, |s| semantics(&s)),
        Cmd::Check { file, mode } => read(file).map_or_else(Out::input_error, |s| check(&s, *mode, cli.cap)),
        Cmd::Prove { file, oracle } => read(file).map_or_else(Out::input_error, |s| prove(&s, *oracle, cli.cap)),
        Cmd::Fuzz { property, inject_fault: Some(_), .. } if *property != Property::Thm4 => {
            Out::input_error(format!("--inject-fault only applies to the thm4 property, not {property}"))
        }
        Cmd::Fuzz { property, seed, count, depth, out_dir, inject_fault } => {
            let opts = FuzzOptions {
                seed: *seed,
                count: *count,
                depth: *depth,
                cap: cli.cap,
                fault: inject_fault.map(|Fault::WlpIgnoresErrors| EncFault::WlpIgnoresErrors),
            };
            fuzz(*property, &opts, out_dir)
        }
        Cmd::Encode { file } => read(file).map_or_else(Out::input_error, |s| encode(&s)),
    };
    if cli.timing {
        let ms = start.elapsed().as_millis() as u64;
        out.records.push(json!({"record": "timing", "elapsed_ms": ms}));
        out.line(format!("elapsed: {ms} ms"));
    }
    let stdout = match cli.format {
        Format::Text => out.text,
        Format::Json => out.records.iter().map(|r| format!("{r}\n")).collect(),
    };
    let stderr = out.warnings.iter().map(|w| format!("warning: {w}\n")).collect();
    Output { code: out.code, stdout, stderr }
}

fn read(p: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn semantics(src: &str) -> Out {
    let decl = match parse_program(src) {
        Ok(d) => d,
        Err(e) => return Out::input_error(e),
    };
    let space = match StateSpace::new(&decl.vars, &decl.consts) {
        Ok(s) => s,
        Err(e) => return Out::input_error(e),
    };
    let mut checker = refine_core::lang::Checker::new();
    for k in &decl.consts {
        if let Err(e) = checker.declare_const(&k.name, &k.sort) {
            return Out::input_error(e);
        }
    }
    for (x, s) in &decl.vars {
        if let Err(e) = checker.declare_var(x, s) {
            return Out::input_error(e);
        }
    }
    if let Err(e) = checker.check_stmt(&decl.body) {
        return Out::input_error(e);
    }
    let sem = Semantics::new(space);
    let d = sem.denote(&decl.body);
    let mut o = Out::new();
    o.text = sem.dump(&decl.body);
    let sp = &sem.space;
    for i in 0..sp.len() {
        for j in d.nrm[i].ones() {
            o.records.push(json!({"record": "nrm", "from": sp.show_state(i), "to": sp.show_state(j)}));
        }
    }
    for i in d.err.ones() {
        o.records.push(json!({"record": "err", "state": sp.show_state(i)}));
    }
    o
}

fn verdict_word(b: bool) -> &'static str {
    if b {
        "valid"
    } else {
        "invalid"
    }
}

fn check(src: &str, mode: Mode, cap: usize) -> Out {
    let mut o = Out::new();
    let opts = EncOptions { cap, ..EncOptions::default() };
    match mode {
        Mode::Std => {
            let f = match parse_std_file(src) {
                Ok(f) => f,
                Err(e) => return Out::input_error(e),
            };
            let r = match std_valid_all_x(&f.setting, &f.triple, &opts) {
                Ok(r) => r,
                Err(e) => return Out::input_error(e),
            };
            if !r.exhaustive {
                o.warnings.push(format!("high space exceeds the cap of {cap}; checked {} sampled sets X", r.x_checked));
            }
            let cex = r.failure.as_ref().map(|(x, fail)| {
                let prefix = x
                    .as_ref()
                    .map(|x| {
                        let hs: Vec<String> = x.ones().map(|h| f.setting.high.space.show_state(h)).collect();
                        format!("X = {{{}}}: ", hs.join(", "))
                    })
                    .unwrap_or_default();
                format!("{prefix}{}", fail.render(&f.setting.low.space))
            });
            o.records.push(json!({
                "record": "check", "mode": "std", "verdict": verdict_word(r.valid),
                "exhaustive": r.exhaustive, "x_checked": r.x_checked, "counterexample": cex,
            }));
            o.line(format!("std: {}", verdict_word(r.valid)));
            if let Some(c) = cex {
                o.line(format!("counterexample: {c}"));
            }
            o.code = if r.valid { EXIT_OK } else { EXIT_INVALID };
        }
        Mode::Rel => {
            let f = match parse_triple_file(src) {
                Ok(f) => f,
                Err(e) => return Out::input_error(e),
            };
            let fail = match rel_valid(&f.setting, &f.triple) {
                Ok(r) => r,
                Err(e) => return Out::input_error(e),
            };
            let cex = fail.as_ref().map(|x| x.render(&f.setting.low.space, &f.setting.high.space));
            o.records.push(json!({
                "record": "check", "mode": "rel", "verdict": verdict_word(fail.is_none()), "counterexample": cex,
            }));
            o.line(format!("relational: {}", verdict_word(fail.is_none())));
            if let Some(c) = cex {
                o.line(format!("counterexample: {c}"));
            }
            o.code = if fail.is_none() { EXIT_OK } else { EXIT_INVALID };
        }
        Mode::EncodeEquiv => {
            let f = match parse_triple_file(src) {
                Ok(f) => f,
                Err(e) => return Out::input_error(e),
            };
            let r = match check_encoding_equiv(&f.setting, &f.triple, &opts) {
                Ok(r) => r,
                Err(e) => return Out::input_error(e),
            };
            if !r.exhaustive {
                o.warnings.push(format!("high space exceeds the cap of {cap}; checked {} sampled sets X", r.x_checked));
            }
            let (low, high) = (&f.setting.low.space, &f.setting.high.space);
            let rel_cex = r.rel_failure.as_ref().map(|x| x.render(low, high));
            let enc_cex = r.enc_failure.as_ref().map(|e| {
                let hs: Vec<String> = e.x.ones().map(|h| high.show_state(h)).collect();
                format!("X = {{{}}}: {}", hs.join(", "), e.failure.render(low))
            });
            o.records.push(json!({
                "record": "check", "mode": "encode-equiv",
                "relational": verdict_word(r.relational), "encoded_all_x": verdict_word(r.encoded_all_x),
                "agree": r.agree(), "exhaustive": r.exhaustive, "x_checked": r.x_checked, "x_failing": r.x_failing,
                "relational_counterexample": rel_cex, "encoded_counterexample": enc_cex,
            }));
            o.line(format!("relational: {}", verdict_word(r.relational)));
            o.line(format!("encoded for all X: {}", verdict_word(r.encoded_all_x)));
            o.line(format!("agree: {}", r.agree()));
            o.line(format!(
                "sets X checked: {}{}, refuting: {}",
                r.x_checked,
                if r.exhaustive { " (all)" } else { " (sampled)" },
                r.x_failing
            ));
            if let Some(c) = rel_cex {
                o.line(format!("relational counterexample: {c}"));
            }
            if let Some(c) = enc_cex {
                o.line(format!("encoded counterexample: {c}"));
            }
            o.code = match (r.agree(), r.relational) {
                (false, _) => EXIT_DISAGREE,
                (true, true) => EXIT_OK,
                (true, false) => EXIT_INVALID,
            };
        }
    }
    o
}

fn prove_records(r: &Report) -> Vec<Value> {
    let mut recs: Vec<Value> = r
        .obligations
        .iter()
        .map(|ob| {
            json!({
                "record": "obligation", "index": ob.index, "label": ob.label, "kind": ob.kind,
                "chain": ob.chain, "ok": ob.verdict.ok, "detail": ob.verdict.detail,
                "rules": ob.verdict.rules, "instances": ob.verdict.instances,
            })
        })
        .collect();
    if let Some(or) = &r.oracle {
        recs.push(json!({"record": "oracle", "report": or}));
    }
    recs.push(json!({
        "record": "summary", "certified": r.certified, "exit_code": r.exit_code,
        "error": r.error, "counts": r.counts,
    }));
    recs
}

fn prove(src: &str, oracle: bool, cap: usize) -> Out {
    let opts = ProveOptions { oracle, cap, ..ProveOptions::default() };
    let r = prove_source(src, &opts);
    let mut o = Out::new();
    o.code = r.exit_code;
    o.text = r.render();
    o.records = prove_records(&r);
    o
}

fn summary_record(s: &FuzzSummary) -> Value {
    json!({
        "record": "fuzz", "property": s.property, "seed": s.seed, "count": s.count,
        "checked": s.checked, "passed": s.passed, "skipped": s.skipped,
        "failures": s.failures.len(), "stats": s.stats,
    })
}

fn fuzz(p: Property, opts: &FuzzOptions, out_dir: &std::path::Path) -> Out {
    let s = run_property(p, opts);
    let mut o = Out::new();
    o.records.push(summary_record(&s));
    o.line(format!(
        "{p}: {}/{} passed, {} skipped, {} failed (seed {})",
        s.passed, s.checked, s.skipped, s.failures.len(), s.seed
    ));
    if !s.stats.is_empty() {
        let st: Vec<String> = s.stats.iter().map(|(k, v)| format!("{k}={v}")).collect();
        o.line(format!("  {}", st.join(" ")));
    }
    if !s.ok() {
        o.code = EXIT_INVALID;
        if let Err(e) = std::fs::create_dir_all(out_dir) {
            o.warnings.push(format!("cannot create {}: {e}", out_dir.display()));
        }
        for f in &s.failures {
            let path = out_dir.join(format!("{p}-{}.case", f.index));
            let saved = std::fs::write(&path, &f.artifact).is_ok();
            if !saved {
                o.warnings.push(format!("cannot write {}", path.display()));
            }
            o.records.push(json!({
                "record": "counterexample", "index": f.index, "seed": f.seed, "detail": f.detail,
                "file": saved.then(|| path.display().to_string()),
            }));
            o.line(format!("  case {} (seed {}): {}", f.index, f.seed, f.detail));
            if saved {
                o.line(format!("    saved to {}", path.display()));
            }
        }
    }
    o
}

/// Prints the encoded triple as a file that `check --mode std` accepts.
fn encode(src: &str) -> Out {
    let f = match parse_triple_file(src) {
        Ok(f) => f,
        Err(e) => return Out::input_error(e),
    };
    let (lows, highs) = (f.setting.low_names(), f.setting.high_names());
    let (pre, post) = match (decompose(&f.triple.pre, &lows, &highs), decompose(&f.triple.post, &lows, &highs)) {
        (Ok(p), Ok(q)) => (enc_syntactic(&p), enc_syntactic(&q)),
        (Err(e), _) | (_, Err(e)) => return Out::input_error(e),
    };
    let mut o = Out::new();
    let mut header = f.setting.header.clone();
    header.programs.clear();
    o.text.push_str(&render_header(&header));
    o.line(format!("low {{ {} }}", f.triple.low));
    o.line(format!("pre: {pre}"));
    o.line(format!("post: {post}"));
    o.records.push(json!({
        "record": "encode", "pre": pre.to_string(), "low": f.triple.low.to_string(), "post": post.to_string(),
    }));
    o
}

//! Acceptance run: one PASS/FAIL line per criterion. Every check goes through
//! the command-line front end in json mode, and the concatenated records form
//! the report compared across two runs for determinism.

use refine_cli::{run_args, Output, EXIT_DISAGREE, EXIT_INVALID, EXIT_OK};
use refine_core::execpred::RuleKind;
use refine_core::testkit::bitmask_vertical;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

const PROOFS: [&str; 6] = [
    "bitmask_straight",
    "nondet_choice",
    "bitmask_loop",
    "bitmask_loop_peeled",
    "bitmask_loop_unrolled",
    "array_guarded",
];

fn corpus(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel).to_string_lossy().into_owned()
}

struct Suite {
    out_dir: PathBuf,
    report: String,
}

impl Suite {
    fn run(&mut self, args: &[&str]) -> (Output, Vec<Value>) {
        let full = ["refine", "--format", "json"].iter().chain(args).copied();
        let o = run_args(full);
        self.report.push_str(&format!("# {} => {}\n", args.join(" "), o.code));
        self.report.push_str(&o.stdout);
        let recs = o.stdout.lines().filter_map(|l| serde_json::from_str(l).ok()).collect();
        (o, recs)
    }

    fn fuzz(&mut self, property: &str, seed: u64, count: usize) -> (i32, Value) {
        let dir = self.out_dir.join(property);
        let (o, recs) = self.run(&[
            "fuzz",
            "--property",
            property,
            "--seed",
            &seed.to_string(),
            "--count",
            &count.to_string(),
            "--out-dir",
            dir.to_str().unwrap(),
        ]);
        let summary = recs.into_iter().find(|r| r["record"] == "fuzz").unwrap_or(Value::Null);
        (o.code, summary)
    }
}

fn stat(summary: &Value, key: &str) -> u64 {
    summary["stats"][key].as_u64().unwrap_or(0)
}

fn clean(code: i32, s: &Value, count: u64) -> Result<(), String> {
    if code != EXIT_OK || s["failures"] != 0 || s["checked"].as_u64() != Some(count) {
        return Err(format!("exit {code}, summary {s}"));
    }
    Ok(())
}

fn c1(s: &mut Suite) -> Result<String, String> {
    let (code, sum) = s.fuzz("thm4", 7, 500);
    clean(code, &sum, 500)?;
    if stat(&sum, "exhaustive") != 500 {
        return Err(format!("only {} of 500 exhaustive", stat(&sum, "exhaustive")));
    }
    Ok(format!("500 triples agree ({} valid, {} invalid)", stat(&sum, "valid"), stat(&sum, "invalid")))
}

fn c2(s: &mut Suite) -> Result<String, String> {
    let (code, sum) = s.fuzz("decomp", 7, 1000);
    clean(code, &sum, 1000)?;
    Ok("1000 configuration pairs agree".into())
}

fn c3(s: &mut Suite) -> Result<String, String> {
    let count = RuleKind::ALL.len() * 400;
    let (code, sum) = s.fuzz("exec-rules", 7, count);
    if code != EXIT_OK || sum["failures"] != 0 {
        return Err(format!("exit {code}, summary {sum}"));
    }
    let mut least = u64::MAX;
    for k in RuleKind::ALL {
        let n = stat(&sum, &format!("accepted_{}", k.name()));
        if n < 200 {
            return Err(format!("{} accepted only {n} times", k.name()));
        }
        least = least.min(n);
    }
    Ok(format!("{} rules, at least {least} sound applications each", RuleKind::ALL.len()))
}

fn c4(s: &mut Suite) -> Result<String, String> {
    let start = Instant::now();
    for p in PROOFS {
        let (o, recs) = s.run(&["prove", "--oracle", &corpus(&format!("proofs/{p}.proof"))]);
        if o.code != EXIT_OK {
            return Err(format!("{p} exited {}", o.code));
        }
        let oracle = recs.iter().find(|r| r["record"] == "oracle").ok_or(format!("{p}: no oracle record"))?;
        if oracle["report"]["relational"] != true || oracle["report"]["encoded_all_x"] != true {
            return Err(format!("{p}: oracle says {oracle}"));
        }
    }
    let took = start.elapsed();
    if took > Duration::from_secs(30) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} proofs certified and confirmed", PROOFS.len()))
}

fn c5(s: &mut Suite) -> Result<String, String> {
    let (code, sum) = s.fuzz("enc", 7, 300);
    clean(code, &sum, 300)?;
    Ok(format!("300 assertions, {} X values", stat(&sum, "x_checked")))
}

fn c6(s: &mut Suite) -> Result<String, String> {
    let (out, expected) = bitmask_vertical().map_err(|e| e.to_string())?;
    if !out.valid() || out.pre.count_ones(..) != out.pre.len() || out.post != expected {
        return Err(format!("composed triple {out:?}"));
    }
    s.report.push_str(&format!("# set union composed with bitmask => post {:?}\n", out.post.ones().collect::<Vec<_>>()));
    let (code, sum) = s.fuzz("vc", 7, 600);
    if code != EXIT_OK || sum["failures"] != 0 {
        return Err(format!("exit {code}, summary {sum}"));
    }
    for which in ["vc_fc", "vc_refine", "vc_store_rule"] {
        let n = stat(&sum, &format!("accepted_{which}"));
        if n < 100 {
            return Err(format!("{which}: only {n} instances with premises holding"));
        }
    }
    Ok("set union composed with bitmask yields {true} bit_mask {x > 0}; vc suites sound".into())
}

fn c7(s: &mut Suite) -> Result<String, String> {
    let bad = corpus("triples/nondet_overreach.triple");
    let (rel, recs) = s.run(&["check", &bad]);
    if rel.code != EXIT_INVALID || !recs[0]["counterexample"].is_string() {
        return Err(format!("rel: exit {} {}", rel.code, rel.stdout));
    }
    let (enc, recs) = s.run(&["check", "--mode", "encode-equiv", &bad]);
    let r = &recs[0];
    if enc.code != EXIT_INVALID || r["agree"] != true || r["encoded_all_x"] != "invalid" || !r["encoded_counterexample"].is_string() {
        return Err(format!("encode-equiv: exit {} {}", enc.code, enc.stdout));
    }
    let (o, recs) = s.run(&["prove", &corpus("proofs/bitmask_loop_bad_invariant.proof")]);
    let failed: Vec<&Value> = recs.iter().filter(|r| r["record"] == "obligation" && r["ok"] == false).collect();
    if o.code != EXIT_INVALID || failed.len() != 1 {
        return Err(format!("mutated invariant: exit {}, {} failing obligations", o.code, failed.len()));
    }
    Ok(format!("overreach rejected; mutated invariant fails only {}", failed[0]["label"]))
}

type Check = fn(&mut Suite) -> Result<String, String>;

const CRITERIA: [(&str, Check); 7] = [
    ("encoding equivalence", c1),
    ("decomposition", c2),
    ("exec rule soundness", c3),
    ("worked examples", c4),
    ("encoding transformations", c5),
    ("vertical composition", c6),
    ("negative controls", c7),
];

fn suite(out_dir: &Path) -> (Vec<Result<String, String>>, String) {
    let mut s = Suite { out_dir: out_dir.to_path_buf(), report: String::new() };
    let results = CRITERIA.iter().map(|(_, f)| f(&mut s)).collect();
    (results, s.report)
}

fn main() {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let (first, report) = suite(tmp.path());
    let (_, again) = suite(tmp.path());
    let mut failed = 0;
    for (i, ((name, _), r)) in CRITERIA.iter().zip(&first).enumerate() {
        match r {
            Ok(msg) => println!("PASS {} {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {} {name}: {msg}", i + 1)
            }
        }
    }
    let det = if report == again {
        Ok(format!("two runs produced identical {}-line reports", report.lines().count()))
    } else {
        let line = report.lines().zip(again.lines()).position(|(a, b)| a != b).unwrap_or(0);
        Err(format!("reports differ at line {}", line + 1))
    };
    match det {
        Ok(msg) => println!("PASS 8 determinism: {msg}"),
        Err(msg) => {
            failed += 1;
            println!("FAIL 8 determinism: {msg}")
        }
    }
    if report.lines().any(|l| l.contains(&format!("=> {EXIT_DISAGREE}"))) {
        println!("note: some command reported a disagreement");
    }
    if failed > 0 {
        std::process::exit(1);
    }
}

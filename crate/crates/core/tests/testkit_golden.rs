//! Generator output is frozen per seed. Set REFINE_BLESS=1 to rewrite the
//! golden files after an intended generator change.

use refine_core::lang::Stmt;
use refine_core::testkit::{gen_rel_triple, gen_stmt, GenConfig};
use std::path::PathBuf;

fn golden(name: &str, actual: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("REFINE_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs");
}

#[test]
fn depth_one_is_a_single_basic_statement() {
    let (vars, c) = gen_stmt(&GenConfig { seed: 0, max_depth: 1, ..GenConfig::default() });
    assert!(!matches!(c, Stmt::Seq(..) | Stmt::Choice(..) | Stmt::While(..)), "{c}");
    let shown: Vec<String> = vars.iter().map(|(x, s)| format!("{x} : {s}")).collect();
    golden("stmt_seed0_depth1.txt", &format!("{}\n{c}\n", shown.join(", ")));
}

#[test]
fn seeded_statement_is_frozen() {
    let (_, c) = gen_stmt(&GenConfig { seed: 2024, max_depth: 4, ..GenConfig::default() });
    golden("stmt_seed2024_depth4.txt", &format!("{c}\n"));
}

#[test]
fn seeded_triple_is_frozen() {
    let t = gen_rel_triple(&GenConfig { seed: 7, ..GenConfig::default() });
    golden("triple_seed7.triple", &t.text);
}

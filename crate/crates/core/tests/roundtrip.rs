//! Printing then parsing is the identity on generated statements and
//! assertions.

use proptest::prelude::*;
use refine_core::lang::{parse_stmt, Parser};
use refine_core::testkit::{gen_rel_triple, gen_stmt, GenConfig};
use refine_core::triples::parse_triple_file;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn statements_round_trip(seed in any::<u64>(), depth in 0usize..6) {
        let cfg = GenConfig { seed, max_depth: depth, assert_in_while: true, ..GenConfig::default() };
        let (_, c) = gen_stmt(&cfg);
        let text = c.to_string();
        prop_assert_eq!(parse_stmt(&text).unwrap(), c, "{}", text);
    }

    #[test]
    fn assertions_round_trip(seed in any::<u64>()) {
        let t = gen_rel_triple(&GenConfig { seed, ..GenConfig::default() });
        for a in [&t.file.triple.pre, &t.file.triple.post] {
            let text = a.to_string();
            let back = Parser::new(&text, false).and_then(|mut p| p.parse_assertion()).unwrap();
            prop_assert_eq!(&back, a, "{}", text);
        }
    }

    #[test]
    fn triple_text_is_stable(seed in any::<u64>()) {
        let t = gen_rel_triple(&GenConfig { seed, ..GenConfig::default() });
        let again = parse_triple_file(&t.text).unwrap();
        prop_assert_eq!(again.triple, t.file.triple);
    }
}

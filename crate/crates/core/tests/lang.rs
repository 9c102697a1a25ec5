mod common;

use std::collections::BTreeSet;

use interact_core::lang::{export_graph_dot, format_canonical, lint_source, parse};
use interact_core::scene::evaluate_condition;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::laser_script::repo_root;
use common::oracles::{random_condition, truth_table, ATOMS};

const MINIMAL: &str = r#"scenario "t" { part p { shape = sphere(0.1); mass = 0; pose = (0,0,0) rpy(0,0,0); } step s : action { action_id = go; requires = start; par_time = 5; instruction = "go"; } }"#;

const MINIMAL_CANONICAL: &str = r#"scenario "t" {
  part p {
    shape = sphere(0.1);
    mass = 0;
    pose = (0, 0, 0) rpy(0, 0, 0);
  }

  step s : action {
    action_id = go;
    requires = start;
    par_time = 5;
    instruction = "go";
  }
}
"#;

fn corpus() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(repo_root().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "itx"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&p).unwrap()))
        .collect();
    out.sort();
    out
}

#[test]
fn minimal_scenario_formats_to_the_golden_text() {
    let s = parse(MINIMAL).scenario.unwrap();
    assert_eq!(format_canonical(&s), MINIMAL_CANONICAL);
}

#[test]
fn corpus_round_trips_and_formatting_is_idempotent() {
    let files = corpus();
    assert!(files.len() >= 10);
    assert!(files.iter().any(|(n, _)| n == "laser_cutter.itx"));
    for (name, text) in files {
        let s = parse(&text).scenario.unwrap_or_else(|| panic!("{name} does not parse"));
        let once = format_canonical(&s);
        let back = parse(&once).scenario.unwrap();
        assert_eq!(back, s, "{name}");
        assert_eq!(format_canonical(&back), once, "{name}");
    }
}

#[test]
fn corpus_lints_clean() {
    for (name, text) in corpus() {
        let (s, diags) = lint_source(&text);
        assert!(s.is_some(), "{name}");
        assert!(diags.is_empty(), "{name}: {diags:?}");
    }
}

#[test]
fn unicode_text_survives_formatting() {
    let src = MINIMAL.replace(r#"instruction = "go""#, r#"instruction = "Drücke \"Start\" ✓ \\ fertig""#);
    let s = parse(&src).scenario.unwrap();
    assert_eq!(s.steps[0].instruction, "Drücke \"Start\" ✓ \\ fertig");
    let text = format_canonical(&s);
    assert!(text.contains(r#"instruction = "Drücke \"Start\" ✓ \\ fertig";"#));
    assert_eq!(parse(&text).scenario.unwrap(), s);
}

#[test]
fn laser_cutter_graph_has_a_node_per_step() {
    let text = std::fs::read_to_string(repo_root().join("scenarios/laser_cutter.itx")).unwrap();
    let s = parse(&text).scenario.unwrap();
    let dot = export_graph_dot(&s);
    for st in &s.steps {
        assert!(dot.contains(&format!("\"{}\" [", st.id)), "{}", st.id);
    }
    assert!(dot.contains("\"wipe_lens\" -> \"sponge_plate\""));
    assert!(dot.contains("\"wipe_nozzle\" -> \"sponge_plate\""));
}

/// Wraps `requires` in a scenario where s0..s2 exist and f0..f2 are settable.
fn with_requires(cond: &str) -> String {
    let mut src = String::from("scenario \"c\" {\n");
    for s in ["s0", "s1", "s2"] {
        src.push_str(&format!("  step {s} : action {{ action_id = {s}; requires = start; par_time = 1; }}\n"));
    }
    src.push_str("  event e { when = time(1); do = set_flag(f0), set_flag(f1), set_flag(f2); }\n");
    src.push_str(&format!("  step x : action {{ action_id = x; requires = {cond}; par_time = 1; }}\n}}\n"));
    src
}

#[test]
fn conditions_agree_with_the_truth_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..2000 {
        let e = random_condition(&mut rng, 6);
        let table = truth_table(&e);
        let parsed = parse(&with_requires(&e.to_string())).scenario.unwrap();
        let reparsed = &parsed.step("x").unwrap().requires;
        for a in 0..64u64 {
            let done: BTreeSet<String> = (0..3).filter(|i| a >> i & 1 == 1).map(|i| ATOMS[i].to_string()).collect();
            let flags: BTreeSet<String> = (3..6).filter(|i| a >> i & 1 == 1).map(|i| ATOMS[i].to_string()).collect();
            let want = table >> a & 1 == 1;
            assert_eq!(evaluate_condition(&e, &done, &flags), want, "{e} under {a:06b}");
            assert_eq!(evaluate_condition(reparsed, &done, &flags), want, "parsed {e} under {a:06b}");
        }
    }
}

#[test]
fn diagnostics_point_inside_the_source() {
    let broken = [
        "scenario \"x\" { part { } }",
        "scenario \"x\" { step a : action { requires = done(zz); } }",
        "scenario \"x\" { step a : bogus { } part p { shape = cone(1); } }",
        "scenario",
        "\"unterminated",
    ];
    for src in broken {
        let r = parse(src);
        assert!(r.scenario.is_none());
        assert!(!r.diagnostics.is_empty());
        for d in &r.diagnostics {
            let span = d.span.expect("every diagnostic has a span");
            assert!(span.offset + span.length <= src.len(), "{src:?}: {d:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let text = String::from_utf8_lossy(&bytes);
        let r = parse(&text);
        for d in &r.diagnostics {
            let span = d.span.expect("span");
            prop_assert!(span.offset + span.length <= text.len());
        }
        prop_assert_eq!(r.scenario.is_some(), !r.diagnostics.iter().any(|d| d.is_error()));
    }

    #[test]
    fn mutated_corpus_never_panics(idx in 0usize..10, cut in 0usize..4000, junk in "[{}();=,.a-z0-9 \"!&|]{0,12}") {
        let files = corpus();
        let text = &files[idx % files.len()].1;
        let mut at = cut.min(text.len());
        while !text.is_char_boundary(at) {
            at -= 1;
        }
        let src = format!("{}{}{}", &text[..at], junk, &text[at..]);
        let r = parse(&src);
        for d in &r.diagnostics {
            let span = d.span.expect("span");
            prop_assert!(span.offset + span.length <= src.len());
        }
    }
}

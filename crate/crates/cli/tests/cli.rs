use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name).to_str().unwrap().to_string()
}

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_patcfg"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn text(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json_lines(o: &Output) -> Vec<Value> {
    text(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

fn temp(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("patcfg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

#[test]
fn validate_exit_codes() {
    assert_eq!(run(&["validate", &fixture("figure1.pcfg")], "").status.code(), Some(0));
    let cycle = run(&["validate", &fixture("cycle.pcfg")], "");
    assert_eq!(cycle.status.code(), Some(1));
    // diagnostics carry file, line and column
    assert!(text(&cycle).lines().all(|l| l.starts_with(&fixture("cycle.pcfg"))));
    assert_eq!(run(&["validate", "/nonexistent/g.pcfg"], "").status.code(), Some(2));
    let bad = temp("bad.pcfg", "start S\npattern a: NP:1 -> S:1 || S:1 <- NP:2\n");
    assert_eq!(run(&["validate", bad.to_str().unwrap()], "").status.code(), Some(1));
    let garbled = temp("garbled.pcfg", "start S\npattern a NP:1 S:1\n");
    assert_eq!(run(&["validate", garbled.to_str().unwrap()], "").status.code(), Some(2));

    let structured = run(&["--format", "structured", "validate", &fixture("cycle.pcfg")], "");
    let v = &json_lines(&structured)[0];
    assert_eq!(v["valid"], false);
    assert_eq!(v["diagnostics"][0]["check"], "SynchronizedCycle");
    assert!(v["diagnostics"][0]["line"].is_u64());
}

#[test]
fn translate_lines_and_failures() {
    let g = fixture("figure1.pcfg");
    let out = run(&["translate", &g], "He knows me well\n\nzzz\n");
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(text(&out), "1\t0\til me connait bien\nFAIL NoParse\n");

    let ok = run(&["translate", &g, "--m", "3"], "he knows me well\n");
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(text(&ok), "1\t0\til me connait bien\n2\t3\til me sait bien\n3\t3\til me sait beaucoup\n");
}

#[test]
fn structured_output_matches_text() {
    let g = fixture("figure1.pcfg");
    let input = "he knows me well\nhe knows me\nzzz\nme knows he\n";
    let plain = text(&run(&["translate", &g, "--m", "4"], input));
    let records = json_lines(&run(&["--format", "structured", "translate", &g, "--m", "4"], input));
    let mut rebuilt = String::new();
    for r in &records {
        if r["ok"] == true {
            for row in r["results"].as_array().unwrap() {
                rebuilt.push_str(&format!("{}\t{}\t{}\n", row["rank"], row["cost"], row["text"].as_str().unwrap()));
            }
        } else {
            rebuilt.push_str(&format!("FAIL {}\n", r["failure"].as_str().unwrap()));
        }
    }
    // serde_json prints 0.0 where Display prints 0
    assert_eq!(rebuilt.replace(".0\t", "\t"), plain);
    assert_eq!(records.len(), 4);
}

#[test]
fn jobs_keep_input_order() {
    let g = fixture("ambiguity.pcfg");
    let input: String = (1..=12).map(|n| format!("{}b\n", "a ".repeat(n))).collect();
    let serial = run(&["translate", &g, "--m", "2"], &input);
    let parallel = run(&["translate", &g, "--m", "2", "--jobs", "4"], &input);
    assert_eq!(serial.status.code(), Some(0));
    assert_eq!(text(&serial), text(&parallel));
}

#[test]
fn trace_is_appended() {
    let out = run(&["translate", &fixture("figure1.pcfg"), "--trace"], "He knows me well\n");
    let t = text(&out);
    for heading in ["Input: He knows me well", "Phase 1: Source Analysis", "Phase 2: Constraint Checking"] {
        assert!(t.contains(heading), "{heading}");
    }
    assert!(t.contains("Phase 3: Target Generation"));
    assert!(t.trim_end().ends_with("Translation: il me connait bien"));
}

#[test]
fn config_file_and_flags() {
    let g = fixture("figure1.pcfg");
    let cfg = temp("strict.toml", "m = 2\nstrict = true\n[penalties]\nviolation = 7\n");
    let c = cfg.to_str().unwrap();
    let out = run(&["--config", c, "translate", &g], "he knows me well\n");
    let lines: Vec<String> = text(&out).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    // flags win over the file
    let one = run(&["--config", c, "translate", &g, "--m", "1"], "he knows me well\n");
    assert_eq!(text(&one).lines().count(), 1);

    let bad = temp("bad.toml", "colour = 3\n");
    assert_eq!(run(&["--config", bad.to_str().unwrap(), "translate", &g], "").status.code(), Some(2));
}

#[test]
fn equiv_and_bounds_exit_codes() {
    let g = fixture("figure1.pcfg");
    let eq = run(&["equiv", &g, "--max-len", "4"], "");
    assert_eq!(eq.status.code(), Some(0));
    assert!(text(&eq).contains("result: PASS"));
    assert_eq!(run(&["bounds", &g, "--max-len", "4"], "").status.code(), Some(0));
    assert_eq!(run(&["equiv", &g, "--max-len", "7"], "").status.code(), Some(2));
    let capped = run(&["equiv", &g, "--size-cap", "10"], "");
    assert_eq!(capped.status.code(), Some(3));
    assert!(text(&capped).contains("would need 157 rules"));

    let mut big = String::from("start S\npattern p: A:1 A:2 A:3 -> S:1 || S:1 <- A:1 A:2 A:3\n");
    for i in 0..40 {
        big.push_str(&format!("lex w{i}: w{i} -> A || A <- w{i}\n"));
    }
    let big = temp("big.pcfg", &big);
    let out = run(&["--format", "structured", "equiv", big.to_str().unwrap()], "");
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json_lines(&out)[0]["error"], "SizeCapExceeded");
}

#[test]
fn mutant_head_is_reported_but_passes() {
    let figure1 = std::fs::read_to_string(fixture("figure1.pcfg")).unwrap();
    let mutant = figure1.replace("pattern a: NP:1:*AGRS VP:2:*AGRV", "pattern a: NP:1:*AGRS go:VP:2:*AGRV");
    let path = temp("mutant.pcfg", &mutant);
    let p = path.to_str().unwrap();
    let b = run(&["bounds", p, "--max-len", "4"], "");
    assert_eq!(b.status.code(), Some(0));
    assert!(text(&b).contains("in G but not T"));
    assert_eq!(run(&["equiv", p, "--max-len", "4"], "").status.code(), Some(0));
}

#[test]
fn enumerate_counts() {
    let out = run(&["enumerate", &fixture("ambiguity.pcfg")], "a a a b\nzzz\n");
    assert_eq!(out.status.code(), Some(1));
    let t = text(&out);
    assert!(t.starts_with("derivations\t8\ta a a b\n"));
    assert!(t.ends_with("FAIL NoParse\n"));
}

#[test]
fn integrate_writes_grammar_and_report() {
    let out_path = temp("out.pcfg", "");
    let o = out_path.to_str().unwrap();
    let failures = temp("failures.tsv", "good morning\tbonjour\nshe sleeps\telle dort\n");
    let r = run(&["integrate", &fixture("figure1.pcfg"), failures.to_str().unwrap(), "--out", o], "");
    assert_eq!(r.status.code(), Some(0));
    let written = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(written.lines().filter(|l| l.starts_with("lex sent_")).count(), 2);
    assert!(text(&r).contains("summary: 2 pairs, NewSentencePattern=2, patterns 11 -> 13"));

    // a corpus the grammar already handles leaves the serialized grammar as is
    let handled = temp("handled.tsv", "he knows me well\til me connait bien\n");
    run(&["integrate", o, handled.to_str().unwrap(), "--out", o], "");
    assert_eq!(std::fs::read_to_string(&out_path).unwrap(), written);

    let swap = temp(
        "swap.pcfg",
        "start S\npattern s: A:1 B:2 -> S:1 || S:1 <- A:1 B:2\npattern t user: A:1 B:2 -> S:1 || S:1 <- B:2 A:1\nlex a: x -> A || A <- xa\nlex b: y -> B || B <- yb\n",
    );
    let pair = temp("swap.tsv", "x y\txa yb\n");
    let stuck =
        run(&["integrate", swap.to_str().unwrap(), pair.to_str().unwrap(), "--out", o, "--max-rounds", "2"], "");
    assert_eq!(stuck.status.code(), Some(1));
    assert!(text(&stuck).contains("NotIntegrable"));
}

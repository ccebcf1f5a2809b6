//! End-to-end runs of the `qham` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn qham(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qham")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn pair_file(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("pairs").join(name).display().to_string()
}

fn temp_file(name: &str, contents: &str) -> String {
    let dir = std::env::temp_dir().join(format!("qham-cli-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path.display().to_string()
}

const SU3_PAIR: &str = r#"{
  "group": {"factors": [{"type": "A", "rank": 2}]},
  "polytope": {"vertices": [VERTICES], "coordinates": "values"},
  "lattice": {"named": "weight"}
}"#;

#[test]
fn fold_reduces_into_the_alcove() {
    let o = qham(&["fold", "--type", "A1~1", "--point", "13/10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("7/10"), "{}", stdout(&o));
}

#[test]
fn spherical_pair_exits_zero_with_a_certificate() {
    let o = qham(&["check-pair", &pair_file("spinning-6-sphere.json"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "Spherical", "{v}");
    assert_eq!(v["certificate"]["dimension"], 6, "{v}");
}

#[test]
fn verdicts_map_to_exit_codes() {
    let o = qham(&["check-pair", &pair_file("su-3-with-outer-twist-alcove-4p.json")]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = qham(&["check-pair", &pair_file("double-su-2-unequal-factor-scales.json")]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
}

#[test]
fn input_errors_have_distinct_codes_and_diagnostics() {
    let malformed = temp_file("malformed.json", "{ \"group\": ");
    let outside = temp_file("outside.json", &SU3_PAIR.replace("VERTICES", r#"["0","0"],["2","0"]"#));
    let invalid = temp_file(
        "invalid.json",
        r#"{"group": {"factors": [{"type": "A", "rank": 1}], "twist": {"permutation": [0], "diagram_order": 5}},
            "polytope": {"vertices": [["0"]], "coordinates": "values"}, "lattice": {"named": "weight"}}"#,
    );
    let cases = [
        (malformed, 3, "malformed JSON"),
        (outside, 4, "polytope outside the alcove"),
        (invalid, 5, "invalid group specification"),
    ];
    let mut seen = Vec::new();
    for (file, code, text) in cases {
        let o = qham(&["check-pair", &file]);
        assert_eq!(o.status.code(), Some(code), "{file}: {}", stderr(&o));
        assert!(stderr(&o).contains(text), "{file}: {}", stderr(&o));
        assert!(stdout(&o).is_empty());
        seen.push(stderr(&o).lines().next().unwrap_or_default().to_string());
    }
    seen.dedup();
    assert_eq!(seen.len(), 3);

    let o = qham(&["fold", "--type", "A1~1", "--point", "1,2"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = qham(&["alcove", "--type", "X3~1"]);
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn svg_is_reserved_for_render() {
    let o = qham(&["alcove", "--type", "A2~1", "--format", "svg"]);
    assert_eq!(o.status.code(), Some(7));
    let o = qham(&["render", "--type", "A3~1"]);
    assert_eq!(o.status.code(), Some(7));
    assert!(stderr(&o).contains("two-dimensional"));
}

fn count(s: &str, pat: &str) -> usize {
    s.matches(pat).count()
}

#[test]
fn render_shades_polytopes_and_draws_axes() {
    let o = qham(&["render", "--type", "A2~1"]);
    assert_eq!(o.status.code(), Some(0));
    let alone = stdout(&o);
    assert_eq!(count(&alone, r#"class="alcove""#), 1);
    assert_eq!(count(&alone, r#"class="polytope""#), 0);
    assert_eq!(count(&alone, r#"class="axis""#), 0);

    let o = qham(&["render", "--pair", &pair_file("su-3-triangle-of-edge-midpoints-p.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let tri = stdout(&o);
    assert_eq!(count(&tri, r#"<polygon class="polytope""#), 1);
    assert!(tri.contains("(1/2, 0)"), "{tri}");

    let o = qham(&["render", "--pair", &pair_file("su-3-surjective-free.json"), "--axes"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let full = stdout(&o);
    assert_eq!(count(&full, r#"class="axis""#), 3);
    assert_eq!(count(&full, r#"stroke-dasharray="6 4""#), 3);
    assert_eq!(count(&full, r#"<polygon class="polytope""#), 1);
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["check-pair".to_string(), pair_file("double-su-3.json"), "--format".into(), "json".into()],
        vec!["render".to_string(), "--pair".into(), pair_file("su-3-surjective-free.json"), "--axes".into()],
        vec!["cohomology".to_string(), "--type".into(), "C2~1".into(), "--format".into(), "json".into()],
    ] {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let a = qham(&args);
        let b = qham(&args);
        assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
        assert_eq!(a.stdout, b.stdout);
    }
}

#[test]
fn bundled_examples_pass() {
    let o = qham(&["examples", "--all", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let results = v.as_array().or_else(|| v["results"].as_array()).expect("a list of results");
    assert!(results.len() >= 38);
    for r in results {
        assert_eq!(r["passed"], true, "{r}");
    }
    let names: Vec<&str> = results.iter().map(|r| r["name"].as_str().unwrap()).collect();
    for needle in ["double", "spinning", "Grassmannian", "surjective", "triangle", "outer twist"] {
        assert!(names.iter().any(|n| n.contains(needle)), "no {needle} example");
    }
    for r in results {
        let n = r["name"].as_str().unwrap();
        assert_eq!(r["verdict"], r["expected"]["verdict"], "{n}");
        if (n.contains("outer twist") && n.contains("4P")) || n.contains("unequal") {
            assert_eq!(r["verdict"], "NotSpherical", "{n}");
        } else {
            assert_eq!(r["verdict"], "Spherical", "{n}");
        }
    }
}

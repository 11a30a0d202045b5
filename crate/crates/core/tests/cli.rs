use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn milw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_milw"))
        .args(args)
        .env_remove("MILW_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("milw-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn check_two_bound_model() {
    let model = fixture("two_bound_model.txt");
    let o = milw(&["check", p(&model), "<*> p q", "--point", "x"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "x: true\n");
    let o = milw(&["check", p(&model), "<*> p q", "--point", "x", "--mode", "sup"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "x: false\n");
}

#[test]
fn check_reports_every_point() {
    let o = milw(&["--format", "structured", "check", p(&fixture("two_bound_model.txt")), "p | q"]);
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<serde_json::Value> = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[2]["point"], "y");
    assert_eq!(lines[2]["satisfied"], true);
}

#[test]
fn malformed_input_exits_2() {
    let o = milw(&["check", p(&fixture("malformed.txt")), "p"]);
    assert_eq!(o.status.code(), Some(2));
    let o = milw(&["check", p(&fixture("two_bound_model.txt")), "p &"]);
    assert_eq!(o.status.code(), Some(2));
    let o = milw(&["check", p(&fixture("missing.txt")), "p"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_distinguishing_formula() {
    let formula = format!("@{}", p(&fixture("distinguishing.formula")));
    let o = milw(&["validate", &formula, "--mode", "mub", "--max-size", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "valid\n");

    let out = scratch("validate");
    let o = milw(&["validate", &formula, "--mode", "sup", "--max-size", "4", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let text = std::fs::read_to_string(out.join("countermodel.txt")).unwrap();
    let model = milw::format::parse_model(&text, "countermodel").unwrap();
    assert_eq!(
        milw::order::canonical_code(&model.frame).unwrap(),
        milw::order::canonical_code(&milw::order::two_mub_frame()).unwrap()
    );
}

#[test]
fn inline_formula_wins_over_file() {
    let file = p(&fixture("distinguishing.formula")).to_string();
    let o = milw(&["validate", "p", "--formula-file", &file, "--mode", "sup"]);
    assert_eq!(o.status.code(), Some(1));
    let o = milw(&["validate", "--formula-file", &file, "--mode", "mub"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn validate_axiom_four_on_preorders() {
    let o = milw(&["validate", "<P><P>p -> <P>p", "--mode", "sup", "--kind", "preorder", "--max-size", "4"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn size_cap_exits_3() {
    let o = milw(&["validate", "p", "--max-size", "8"]);
    assert_eq!(o.status.code(), Some(3));
    let o = Command::new(env!("CARGO_BIN_EXE_milw"))
        .args(["enumerate", "4"])
        .env("MILW_CAP", "3")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn construct_on_two_bound_frame() {
    let out = scratch("construct");
    let o = milw(&["construct", p(&fixture("two_bound_frame.txt")), "--triple", "x,y,z", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let frame = milw::format::parse_frame(&std::fs::read_to_string(out.join("extended.txt")).unwrap(), "e").unwrap();
    assert_eq!(frame.len(), 7);
    let base = milw::order::two_mub_frame();
    let map = milw::format::parse_map(&std::fs::read_to_string(out.join("map.txt")).unwrap(), "m", &frame, &base).unwrap();
    assert!(map.check_all().unwrap().is_empty());
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn construct_rejects_non_violating_triple() {
    let o = milw(&["construct", p(&fixture("diamond.txt")), "--triple", "top,l,r"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn iterate_lattice_has_one_stage() {
    let out = scratch("iterate");
    let o = milw(&["iterate", p(&fixture("diamond.txt")), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trace.json")).unwrap()).unwrap();
    assert_eq!(manifest["stages"].as_array().unwrap().len(), 1);
}

#[test]
fn iterate_writes_stage_files() {
    let out = scratch("iterate-two-bound");
    let o = milw(&["iterate", p(&fixture("two_bound_frame.txt")), "--stages", "3", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(0));
    for n in 0..=3 {
        assert!(out.join(format!("stage-{n}.txt")).exists());
        assert!(out.join(format!("map-{n}.txt")).exists());
    }
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "stage 1: 7 points after (x, y, z)");
}

#[test]
fn pmorphism_identity() {
    let frame = fixture("two_bound_frame.txt");
    let o = milw(&["pmorphism", p(&frame), p(&frame), p(&fixture("identity_map.txt"))]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn prove_bundled_and_fake() {
    let proofs = Path::new(env!("CARGO_MANIFEST_DIR")).join("proofs");
    let o = milw(&["prove", p(&proofs.join("commutativity.jsonl")), "--system", "mil"]);
    assert_eq!(o.status.code(), Some(0));
    let o = milw(&["prove", p(&proofs.join("residual_l2.jsonl")), "--system", "mil"]);
    assert_eq!(o.status.code(), Some(1));
    let o = milw(&["prove", p(&proofs.join("residual_l2.jsonl")), "--system", "mil-res", "--spotcheck", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = milw(&["prove", p(&fixture("fake_distinguishing.jsonl")), "--spotcheck", "4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn enumerate_labeled_pairs() {
    let o = milw(&["enumerate", "2", "--labeled"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).matches("points:").count(), 3);
    let o = milw(&["enumerate", "3", "--kind", "preorder", "--format", "structured"]);
    assert_eq!(stdout(&o).lines().count(), 9);
}

#[test]
fn output_is_deterministic() {
    let args = ["enumerate", "5", "--sample", "10", "--seed", "3"];
    let a = milw(&args);
    assert_eq!(stdout(&a), stdout(&milw(&args)));
    assert_eq!(stdout(&a).matches("points:").count(), 10);
    let other = milw(&["enumerate", "5", "--sample", "10", "--seed", "4"]);
    assert_ne!(stdout(&a), stdout(&other));
}

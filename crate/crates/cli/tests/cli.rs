use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use awmc::transforms::find_isomorphism;
use awmc::{
    enumerate_formulas, fixtures, load_model, model_to_string, parse_model, Model,
    DEFAULT_MAX_ATOMS,
};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn awmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_awmc"))
        .args(args)
        .env_remove("AWMC_MAX_ATOMS")
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> (i32, String) {
    let out = awmc(args);
    (
        out.status.code().expect("exited"),
        String::from_utf8(out.stdout).unwrap(),
    )
}

fn check(file: &str, world: &str, formula: &str) -> (i32, String) {
    let path = fixture(file);
    let (code, out) = run(&["check", path.to_str().unwrap(), world, formula]);
    (code, out.trim().to_string())
}

/// Two worlds, one agent, a non-symmetric relation.
const NON_EQUIVALENCE: &str = r#"{
  "kind": "kripke_lattice",
  "atoms": ["p"],
  "agents": ["a"],
  "worlds": ["u", "v"],
  "relations": {"a": [["u", "u"], ["v", "v"], ["u", "v"]]},
  "valuation": {"p": ["u"]},
  "awareness": {"a": {"u@{}": "u@{}", "v@{}": "v@{}", "u@{p}": "u@{p}", "v@{p}": "v@{p}"}}
}"#;

#[test]
fn check_verdicts_and_exit_codes() {
    assert_eq!(
        check("trade.klm.json", "w1@{i,l}", "K{B}(i & l)"),
        (0, "true".into())
    );
    assert_eq!(
        check("trade.klm.json", "w2@{i}", "l"),
        (2, "undefined".into())
    );
    assert_eq!(
        check("trade.hms.json", "(i,l)", "!K{O} i"),
        (0, "true".into())
    );
    assert_eq!(
        check("trade.klm.json", "w2@{i,l}", "A{B} l"),
        (1, "false".into())
    );
    assert_eq!(check("trade.hms.json", "!i", "l").0, 2);
}

#[test]
fn check_errors() {
    assert_eq!(check("trade.klm.json", "w9@{i}", "i").0, 5);
    assert_eq!(check("trade.klm.json", "w1@{x}", "i").0, 5);
    assert_eq!(check("trade.hms.json", "nowhere", "i").0, 5);
    assert_eq!(check("trade.hms.json", "(i,l)", "i &").0, 3);
    assert_eq!(check("trade.hms.json", "(i,l)", "zz").0, 3);

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.json");
    fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(run(&["check", garbage.to_str().unwrap(), "w", "p"]).0, 3);
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["check", missing.to_str().unwrap(), "w", "p"]).0, 3);

    // Drop one awareness entry: the map is no longer total.
    let text = fixtures::TRADE_KLM_JSON.replacen("\"w1@{}\": \"w1@{}\",", "", 1);
    assert_ne!(text, fixtures::TRADE_KLM_JSON);
    let partial = dir.path().join("partial.json");
    fs::write(&partial, text).unwrap();
    assert_eq!(
        run(&["check", partial.to_str().unwrap(), "w1@{}", "top"]).0,
        4
    );
}

#[test]
fn max_atoms_env_var() {
    let path = fixture("trade.klm.json");
    let out = Command::new(env!("CARGO_BIN_EXE_awmc"))
        .args(["check", path.to_str().unwrap(), "w1@{i,l}", "i"])
        .env("AWMC_MAX_ATOMS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(4));
    let out = Command::new(env!("CARGO_BIN_EXE_awmc"))
        .args(["check", path.to_str().unwrap(), "w1@{i,l}", "i"])
        .env("AWMC_MAX_ATOMS", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn transform_l_matches_bundled_klm() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.klm.json");
    let (code, _) = run(&[
        "transform",
        "l",
        fixture("trade.hms.json").to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let Model::KripkeLattice(klm) = load_model(&out, DEFAULT_MAX_ATOMS).unwrap() else {
        panic!("expected a kripke_lattice file");
    };
    assert!(find_isomorphism(&klm, &fixtures::trade_klm()).is_some());

    let sidecar = dir.path().join("out.klm.json.corr.json");
    let table: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sidecar).unwrap()).unwrap();
    assert_eq!(table["(i,l)"], serde_json::json!(["(i,l)@{i,l}"]));
    assert_eq!(table["empty"].as_array().unwrap().len(), 3);

    let back = dir.path().join("back.hms.json");
    assert_eq!(
        run(&[
            "transform",
            "h",
            out.to_str().unwrap(),
            back.to_str().unwrap()
        ])
        .0,
        0
    );
    let (code, report) = run(&["validate", back.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(report.contains("5/5 HMS properties hold"));
}

#[test]
fn transform_errors_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("noneq.klm.json");
    fs::write(&input, NON_EQUIVALENCE).unwrap();
    let out = dir.path().join("out.hms.json");
    let res = awmc(&[
        "transform",
        "h",
        input.to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not an equivalence relation"));

    let res = awmc(&[
        "transform",
        "l",
        input.to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));
    let res = awmc(&[
        "transform",
        "h",
        fixture("trade.hms.json").to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(4));

    let entries: Vec<_> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    assert_eq!(entries, vec![std::ffi::OsString::from("noneq.klm.json")]);
}

#[test]
fn validate_reports() {
    let (code, out) = run(&["validate", fixture("trade.hms.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "5/5 HMS properties hold"));
    let (code, out) = run(&["validate", fixture("trade.klm.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("D, II, NS"));

    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("noneq.klm.json");
    fs::write(&input, NON_EQUIVALENCE).unwrap();
    let (code, out) = run(&["validate", input.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("not equivalence relations: a"));

    // Valid frame whose projection merges an aware and an unaware state.
    let asymmetric = dir.path().join("asym.hms.json");
    fs::write(
        &asymmetric,
        r#"{
        "kind": "hms", "atoms": ["p"], "agents": ["a"],
        "spaces": [{"name": "bot", "states": ["b"]}, {"name": "top", "states": ["u", "v"]}],
        "order": [["bot", "top"]],
        "projections": {"u": {"bot": "b"}, "v": {"bot": "b"}},
        "correspondences": {"a": {"u": ["u"], "v": ["b"], "b": ["b"]}},
        "valuation": {"p": {"space": "top", "states": []}}
    }"#,
    )
    .unwrap();
    let (code, out) = run(&["validate", asymmetric.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.lines().any(|l| l == "5/5 HMS properties hold"));
    assert!(out.contains("VIOLATION L-transform relation is not an equivalence for: a"));
}

#[test]
fn equiv_reports() {
    for file in ["trade.hms.json", "trade.klm.json"] {
        let (code, out) = run(&["equiv", fixture(file).to_str().unwrap(), "--depth", "2"]);
        assert_eq!(code, 0);
        assert_eq!(
            out.trim(),
            "0 counterexamples / 507 formulas × 12 (state,world) pairs"
        );
    }
}

#[test]
fn axioms_report() {
    let (code, out) = run(&["axioms", "--seed", "0", "--samples", "20", "--depth", "1"]);
    assert_eq!(code, 0);
    let last = out.lines().last().unwrap();
    let n: usize = last
        .strip_prefix("all schemas valid; schema5 counterexamples: ")
        .expect(last)
        .parse()
        .unwrap();
    assert!(n >= 1);
    assert!(out
        .lines()
        .any(|l| l == "SCHEMA T INSTANCE * MODEL * WORLD * -> VALID"));
    let again = run(&["axioms", "--seed", "0", "--samples", "20", "--depth", "1"]);
    assert_eq!(again, (code, out));
}

#[test]
fn parse_echoes_normal_form() {
    assert_eq!(run(&["parse", "p -> q"]), (0, "!(p & !q)\n".into()));
    assert_eq!(run(&["parse", "A{a} p"]).1.trim(), parse_normal("A{a} p"));
    assert_eq!(
        run(&["parse", parse_normal("U{a} (p | q)").as_str()])
            .1
            .trim(),
        parse_normal("U{a} (p | q)")
    );
    assert_eq!(run(&["parse", "p <-"]).0, 3);
}

fn parse_normal(text: &str) -> String {
    awmc::parse(text).unwrap().to_string()
}

#[test]
fn save_load_round_trip() {
    for (name, text) in [
        ("klm", fixtures::TRADE_KLM_JSON),
        ("hms", fixtures::TRADE_HMS_JSON),
    ] {
        let model = parse_model(text, DEFAULT_MAX_ATOMS).unwrap();
        let saved = model_to_string(&model);
        let reloaded = parse_model(&saved, DEFAULT_MAX_ATOMS).unwrap();
        assert_eq!(model_to_string(&reloaded), saved, "{name}");
        let (atoms, agents) = match &model {
            Model::KripkeLattice(m) => (
                m.lattice().base().atoms().to_vec(),
                m.lattice().base().agents().to_vec(),
            ),
            Model::Hms(m) => (m.atoms().to_vec(), m.agents().to_vec()),
        };
        for phi in enumerate_formulas(&atoms, &agents, 1) {
            let verdicts = |m: &Model| match m {
                Model::KripkeLattice(m) => m.extension(&phi).unwrap(),
                Model::Hms(m) => m.extension(&phi).unwrap(),
            };
            assert_eq!(verdicts(&model), verdicts(&reloaded), "{name} {phi}");
        }
    }
}

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const M1: &str = r#"{"states":["a","b"],"edges":[["a","b"],["b","b"]],"val":{"p":["b"]}}"#;
const AFP: &str = "mu X. (p | []X)";
const STAR: &str = "nu X. [] mu Y. (<>Y | (p & X))";
const CHI: &str = "mu X. (p_B | (q_B & <> X) | (!q_B & [] X))";

fn mucalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mucalc"))
        .args(args)
        .output()
        .expect("run mucalc")
}

fn mucalc_with_input(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_mucalc"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn mucalc");
    let mut stdin = child.stdin.take().unwrap();
    // the process may exit before reading everything
    let _ = stdin.write_all(input.as_bytes());
    drop(stdin);
    child.wait_with_output().expect("wait for mucalc")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(dir: &TempDir, family: &str, n: usize) -> PathBuf {
    let path = dir.path().join(format!("{family}{n}.json"));
    let out = mucalc(&["gen", family, &n.to_string(), "--out", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

fn eval(model: &Path, formula: &str, state: &str, semantics: &str) -> Output {
    mucalc(&[
        "eval",
        "--model",
        s(model),
        "--formula",
        formula,
        "--state",
        state,
        "--semantics",
        semantics,
    ])
}

#[test]
fn bounded_two_afp_is_true_at_a() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = eval(&m1, AFP, "a", "bounded:2");
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out).trim(), "true");
    let out = eval(&m1, AFP, "a", "bounded:1");
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out).trim(), "false");
}

#[test]
fn free_mu_x_x_is_undetermined() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = eval(&m1, "mu X. X", "a", "free");
    assert_eq!(code(&out), 2);
    assert_eq!(stdout(&out).trim(), "undetermined");
    assert_eq!(code(&eval(&m1, AFP, "a", "free")), 0);
}

#[test]
fn omega_matches_standard() {
    let dir = TempDir::new().unwrap();
    let models = [
        write(&dir, "m1.json", M1),
        gen(&dir, "starN", 3),
        gen(&dir, "daggerN", 2),
        gen(&dir, "chain", 3),
    ];
    let formulas = [
        AFP,
        STAR,
        "nu X. <>X",
        "mu X. X",
        "nu X. (p & []X)",
        "mu X. (p | <>X)",
        "[] mu X. (p | <> X)",
    ];
    for model in &models {
        let text = std::fs::read_to_string(model).unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        for state in value["states"].as_array().unwrap() {
            let state = state.as_str().unwrap();
            for f in formulas {
                let standard = code(&eval(model, f, state, "standard"));
                let omega = code(&eval(model, f, state, "omega"));
                assert!(standard <= 1, "{f} at {state}");
                assert_eq!(standard, omega, "{f} at {state} in {}", model.display());
            }
        }
    }
}

#[test]
fn fbounded_afp_at_a() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = eval(&m1, AFP, "a", "fbounded:1");
    assert_eq!(code(&out), 0);
    assert_eq!(code(&eval(&m1, "mu X. X", "a", "fbounded:1")), 1);
    assert_eq!(code(&eval(&m1, "nu X. X", "a", "fbounded:2")), 0);
}

#[test]
fn json_report_is_schema_stable() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    for semantics in ["standard", "bounded:2", "omega", "fbounded:1", "free"] {
        let out = mucalc(&[
            "eval",
            "--model",
            s(&m1),
            "--formula",
            AFP,
            "--semantics",
            semantics,
            "--json",
        ]);
        assert_eq!(code(&out), 0, "{semantics}");
        let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        for key in [
            "verdict",
            "semantics",
            "state",
            "formula",
            "timings",
            "positions",
            "strategy",
            "trace",
        ] {
            assert!(v.get(key).is_some(), "{semantics}: missing {key}");
        }
        assert_eq!(v["verdict"], "true");
        assert_eq!(v["semantics"], semantics);
        assert_eq!(v["state"], "a");
        assert!(v["timings"]["total_ms"].as_f64().is_some());
    }
}

#[test]
fn trace_and_strategy_output() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = mucalc(&[
        "eval",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--semantics",
        "bounded:2",
        "--trace",
        "--strategy",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("strategy for Eloise:"), "{text}");
    assert!(text.contains("0: (a, /, []) | Eloise: set clock 1"), "{text}");
    let last = text.lines().last().unwrap();
    assert!(last.ends_with("| won: Eloise"), "{last}");
    let rounds = text.lines().filter(|l| l.contains(" | ")).count() - 1;
    assert!(rounds <= 8, "{rounds}");

    let out = mucalc(&[
        "eval",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--semantics",
        "bounded:2",
        "--trace",
        "--json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let steps = v["trace"].as_array().unwrap();
    assert_eq!(steps[0]["state"], "a");
    assert_eq!(steps.last().unwrap()["winner"], "Eloise");
}

#[test]
fn check_flag_and_formula_file() {
    let dir = TempDir::new().unwrap();
    let star = gen(&dir, "starN", 3);
    let f = write(&dir, "star.mu", &format!("{STAR}\n"));
    let out = mucalc(&[
        "eval",
        "--model",
        s(&star),
        "--formula-file",
        s(&f),
        "--semantics",
        "bounded:2",
        "--check",
    ]);
    assert!(code(&out) <= 1, "{}", String::from_utf8_lossy(&out.stderr));
    let out = mucalc(&[
        "eval",
        "--model",
        s(&star),
        "--formula-file",
        s(&f),
        "--semantics",
        "omega",
        "--check",
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn errors_exit_ten_or_more() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let bad = write(&dir, "bad.json", r#"{"states":["a"],"edges":[["a","z"]]}"#);
    assert_eq!(code(&eval(&m1, AFP, "nowhere", "standard")), 10);
    assert_eq!(code(&eval(&m1, "mu X. (p | ", "a", "standard")), 10);
    assert_eq!(code(&eval(&m1, "p | X", "a", "standard")), 10);
    assert_eq!(code(&eval(&bad, "p", "a", "standard")), 10);
    assert_eq!(code(&eval(&m1, AFP, "a", "bounded:0")), 10);
    assert_eq!(code(&eval(&m1, AFP, "a", "fbounded:0")), 10);
    assert_eq!(
        code(&mucalc(&["eval", "--model", "/nonexistent.json", "--formula", "p"])),
        10
    );
    let out = mucalc(&[
        "eval",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--semantics",
        "bounded:2",
        "--max-positions",
        "1",
    ]);
    assert_eq!(code(&out), 11);
}

#[test]
fn reduce_then_eval_chi() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out_path = dir.path().join("reduced.json");
    let out = mucalc(&[
        "reduce",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--state",
        "a",
        "--gamma",
        "2",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let summary = stdout(&out);
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let root = value["root"].as_str().unwrap();
    assert!(summary.contains(&format!("root: {root}")), "{summary}");
    let count = value["states"].as_array().unwrap().len();
    assert!(summary.contains(&format!("positions: {count}")), "{summary}");
    assert!(value["backmap"][root]["state"] == "a");
    let out = eval(&out_path, CHI, root, "standard");
    assert_eq!(stdout(&out).trim(), "true");
    assert_eq!(code(&out), 0);

    // at bound 1 the reduced instance is false
    let out = mucalc(&[
        "reduce",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--state",
        "a",
        "--gamma",
        "1",
        "--out",
        s(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&mucalc(&["eval", "--model", s(&out_path), "--formula", CHI])), 1);
}

#[test]
fn reduce_auto_matches_card() {
    let dir = TempDir::new().unwrap();
    let star = gen(&dir, "starN", 2);
    for f in [STAR, AFP, "nu X. <>X"] {
        let mut verdicts = Vec::new();
        for gamma in ["auto", "3"] {
            let path = dir.path().join(format!("r{gamma}.json"));
            let out = mucalc(&[
                "reduce",
                "--model",
                s(&star),
                "--formula",
                f,
                "--gamma",
                gamma,
                "--out",
                s(&path),
            ]);
            assert_eq!(code(&out), 0);
            verdicts.push(code(&mucalc(&["eval", "--model", s(&path), "--formula", CHI])));
        }
        assert_eq!(verdicts[0], verdicts[1], "{f}");
        assert_eq!(verdicts[0], code(&eval(&star, f, "w_0", "standard")), "{f}");
    }
}

#[test]
fn reduce_literal_gives_one_position() {
    let dir = TempDir::new().unwrap();
    let one = write(&dir, "one.json", r#"{"states":["a"],"edges":[],"val":{"p":["a"]}}"#);
    let out = mucalc(&["reduce", "--model", s(&one), "--formula", "p"]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["states"].as_array().unwrap().len(), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("positions: 1"));
}

#[test]
fn reduce_tree_and_cap() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let path = dir.path().join("tree.json");
    let out = mucalc(&[
        "reduce",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--gamma",
        "2",
        "--tree",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(value["states"]
        .as_array()
        .unwrap()
        .iter()
        .all(|n| n.as_str().unwrap().contains('#')));
    assert_eq!(code(&mucalc(&["eval", "--model", s(&path), "--formula", CHI])), 0);
    let out = mucalc(&[
        "reduce",
        "--model",
        s(&m1),
        "--formula",
        AFP,
        "--gamma",
        "2",
        "--max-positions",
        "2",
    ]);
    assert_eq!(code(&out), 11);
}

#[test]
fn compare_small_sweep_agrees() {
    let out = mucalc(&[
        "compare",
        "--max-states",
        "2",
        "--max-binders",
        "1",
        "--max-nodes",
        "3",
        "--gammas",
        "1,2,omega",
    ]);
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    assert!(text.contains("all agree"));
    for check in [
        "game-vs-bounded",
        "card-collapse",
        "position-model",
        "greedy-vs-exhaustive",
        "canonical-vs-full",
    ] {
        assert!(text.contains(check), "{check} missing from\n{text}");
    }
}

#[test]
fn compare_catches_broken_engine() {
    let out = mucalc(&[
        "compare",
        "--max-states",
        "2",
        "--max-nodes",
        "3",
        "--checks",
        "game-vs-bounded",
        "--inject-bug",
    ]);
    let text = stdout(&out);
    assert_eq!(code(&out), 1, "{text}");
    assert!(text.contains("FAIL"));
    assert!(text.contains("counterexample"));
    assert!(text.contains("formula:"));
}

#[test]
fn compare_sampling_is_deterministic() {
    let args = [
        "compare",
        "--seed",
        "7",
        "--max-states",
        "4",
        "--samples",
        "12",
        "--max-nodes",
        "3",
        "--random",
        "5",
    ];
    let strip = |o: &Output| {
        stdout(o)
            .lines()
            .filter(|l| !l.starts_with("elapsed"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = mucalc(&args);
    let b = mucalc(&args);
    assert_eq!(code(&a), 0, "{}", stdout(&a));
    assert_eq!(strip(&a), strip(&b));
    assert!(stdout(&a).contains("seed 7"));
}

#[test]
fn compare_reports_partial_on_cap() {
    let out = mucalc(&[
        "compare",
        "--max-states",
        "1",
        "--max-nodes",
        "2",
        "--checks",
        "game-vs-bounded",
        "--max-positions",
        "1",
    ]);
    assert_eq!(code(&out), 12, "{}", stdout(&out));
    assert!(stdout(&out).contains("partial"));
}

#[test]
fn gen_families() {
    let dir = TempDir::new().unwrap();
    let read = |p: &Path| -> serde_json::Value { serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap() };
    let star = read(&gen(&dir, "starN", 3));
    assert_eq!(star["states"].as_array().unwrap().len(), 4);
    assert_eq!(star["val"]["p"], serde_json::json!(["w_0"]));
    let dagger = read(&gen(&dir, "daggerN", 2));
    assert_eq!(dagger["val"]["p"], serde_json::json!(["w_1"]));
    let chain = read(&gen(&dir, "chain", 1));
    assert_eq!(chain["states"].as_array().unwrap().len(), 2);
    assert_eq!(chain["edges"].as_array().unwrap().len(), 1);
    assert_eq!(code(&mucalc(&["gen", "nosuch", "2"])), 10);
    assert_eq!(code(&mucalc(&["gen", "chain", "0"])), 10);
}

#[test]
fn play_aborts_on_eof() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = mucalc_with_input(
        &[
            "play",
            "--model",
            s(&m1),
            "--formula",
            AFP,
            "--semantics",
            "bounded:2",
            "--human",
            "eloise",
        ],
        "",
    );
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("Eloise to move:"));
}

#[test]
fn play_invalid_index_reprompts() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = mucalc_with_input(
        &[
            "play",
            "--model",
            s(&m1),
            "--formula",
            AFP,
            "--semantics",
            "bounded:2",
            "--human",
            "eloise",
        ],
        "9\nx\n2\n2\n1\n1\n1\n1\n",
    );
    let text = stdout(&out);
    assert!(text.contains("enter a number between 1 and 2"), "{text}");
    assert!(text.contains("won:"), "{text}");
}

#[test]
fn machine_eloise_wins_on_star() {
    let dir = TempDir::new().unwrap();
    let star = gen(&dir, "starN", 3);
    // invalid indices re-prompt, so each script falls back to a legal move
    let scripts = [
        "1\n".repeat(200),
        "2\n1\n".repeat(200),
        "3\n2\n1\n".repeat(200),
        "4\n3\n2\n1\n".repeat(200),
    ];
    for script in scripts {
        let out = mucalc_with_input(
            &[
                "play",
                "--model",
                s(&star),
                "--formula",
                STAR,
                "--semantics",
                "omega",
                "--human",
                "abelard",
            ],
            &script,
        );
        let text = stdout(&out);
        assert_eq!(code(&out), 0, "{text}");
        assert!(text.contains("won: Eloise"), "{text}");
        assert!(text.contains("Eloise plays:"), "{text}");
    }
}

#[test]
fn nu_x_x_ends_with_eloise() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = mucalc_with_input(
        &[
            "play",
            "--model",
            s(&m1),
            "--formula",
            "nu X. X",
            "--semantics",
            "omega",
            "--human",
            "eloise",
        ],
        "",
    );
    let text = stdout(&out);
    assert_eq!(code(&out), 0, "{text}");
    let rounds: usize = text
        .lines()
        .find_map(|l| l.strip_prefix("won: Eloise after "))
        .and_then(|r| r.split_whitespace().next())
        .and_then(|n| n.parse().ok())
        .expect("winner line");
    // one clock announcement and then at most card(M) descents, each through the binder body
    assert!(rounds <= 2 * 2 + 1, "{rounds}");
}

#[test]
fn play_as_referee() {
    let dir = TempDir::new().unwrap();
    let m1 = write(&dir, "m1.json", M1);
    let out = mucalc_with_input(
        &[
            "play",
            "--model",
            s(&m1),
            "--formula",
            AFP,
            "--semantics",
            "bounded:2",
            "--human",
            "both",
        ],
        &"1\n".repeat(20),
    );
    let text = stdout(&out);
    assert!(text.contains("won:"), "{text}");
    assert!(!text.contains("plays:"), "{text}");
    assert!(code(&out) <= 1);
}

use std::path::PathBuf;

use malnormal::stallings::SubgroupHandle;
use malnormal::word::Word;
use malnormal_cli::{run, BUDGET_EXHAUSTED, INPUT_ERROR, NEGATIVE, SUCCESS};
use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .display()
        .to_string()
}

fn cli(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["malnormal"];
    argv.extend_from_slice(args);
    run(&argv)
}

fn cli_json(args: &[&str]) -> (i32, Value) {
    let (code, out) = cli(args);
    (
        code,
        serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out}")),
    )
}

#[test]
fn word_commands() {
    assert_eq!(cli(&["words", "reduce", "aAb"]), (SUCCESS, "b\n".into()));
    assert_eq!(
        cli(&["words", "multiply", "ab", "BA"]),
        (SUCCESS, "1\n".into())
    );
    assert_eq!(cli(&["words", "invert", "aB"]), (SUCCESS, "bA\n".into()));
    assert_eq!(
        cli(&["words", "abelianize", "abb"]),
        (SUCCESS, "(1,2)\n".into())
    );
    assert_eq!(cli(&["words", "iota", "ab"]), (SUCCESS, "AB\n".into()));
    assert_eq!(
        cli(&["words", "comm-square", "ba"]),
        (SUCCESS, "baBA\n".into())
    );
    assert_eq!(
        cli(&["words", "reduced-product", "ab", "ba"]),
        (SUCCESS, "true\n".into())
    );
    assert_eq!(cli(&["words", "reduced-product", "ab", "Ba"]).0, NEGATIVE);
    assert_eq!(
        cli(&["words", "boundary-distance", "(a)", "a(b)"]),
        (SUCCESS, "2^-1\n".into())
    );
    assert_eq!(
        cli(&["words", "boundary-distance", "(ab)", "ababab(a)"]),
        (SUCCESS, "2^-7\n".into())
    );
    let (code, v) = cli_json(&["words", "cyclic", "baaB"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["conjugator"], "b");
    assert_eq!(v["core"], "aa");
}

#[test]
fn malformed_input_exits_with_two() {
    assert_eq!(cli(&["words", "reduce", "a1b"]).0, INPUT_ERROR);
    assert_eq!(
        cli(&["words", "--rank", "1", "reduce", "ab"]).0,
        INPUT_ERROR
    );
    assert_eq!(
        cli(&["words", "boundary-distance", "ab", "a(b)"]).0,
        INPUT_ERROR
    );
    assert_eq!(cli(&["frobnicate"]).0, INPUT_ERROR);
    assert_eq!(
        cli(&["vfree", "--vfree", "/nonexistent.json"]).0,
        INPUT_ERROR
    );
    let (code, v) = cli_json(&["malnormal", "--rank", "2", "--gens", "aC"]);
    assert_eq!(code, INPUT_ERROR);
    assert_eq!(v["error"], "IndexOutOfRange");
}

#[test]
fn subgroup_summary_round_trips() {
    let (code, v) = cli_json(&["subgroup", "--gens", "aa,b", "--gens", "abA"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["rank"], 3);
    assert_eq!(v["index"], 2);
    let basis: Vec<Word> = v["basis"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| Word::parse(2, x.as_str().unwrap()).unwrap())
        .collect();
    let original = SubgroupHandle::build(
        2,
        &[
            Word::parse(2, "aa").unwrap(),
            Word::parse(2, "b").unwrap(),
            Word::parse(2, "abA").unwrap(),
        ],
    )
    .unwrap();
    assert_eq!(SubgroupHandle::build(2, &basis).unwrap(), original);
    let (_, again) = cli_json(&[
        "subgroup",
        "--gens",
        &basis
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join(","),
    ]);
    assert_eq!(again["edges"], v["edges"]);
    let (_, v) = cli_json(&["subgroup", "--gens", "a"]);
    assert_eq!(v["index"], "INFINITE");
}

#[test]
fn decision_commands() {
    let (code, v) = cli_json(&["malnormal", "--rank", "2", "--gens", "aa"]);
    assert_eq!(code, NEGATIVE);
    assert_eq!(v["verdict"], false);
    assert_eq!(v["offenders"][0]["witness"], "a");
    assert_eq!(cli(&["malnormal", "--gens", "abAB"]).0, SUCCESS);

    let (code, v) = cli_json(&["commensurator", "--gens", "aa"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["index_of_h"], 2);

    let (code, v) = cli_json(&["intersect", "--gens", "a,bb", "--other", "aa,b"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["intersection"]["rank"], 2);

    let (code, v) = cli_json(&["conj-intersections", "--gens", "aa", "--other", "aaa"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["nontrivial"], 1);

    assert_eq!(
        cli(&["coned-elliptic", "--element", "baB", "--avoid", "aa"]).0,
        SUCCESS
    );
    assert_eq!(
        cli(&[
            "coned-elliptic",
            "--element",
            "ab",
            "--avoid",
            "a",
            "--avoid",
            "b"
        ])
        .0,
        NEGATIVE
    );
}

#[test]
fn pingpong_command() {
    let (code, v) = cli_json(&["pingpong", "--seed", "abb", "--avoid", "a", "--avoid", "b"]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["verification"]["rank2_ok"], true);
    assert_eq!(cli(&["pingpong", "--seed", "abAB"]).0, INPUT_ERROR);
    assert_eq!(
        cli(&["pingpong", "--seed", "ab", "--avoid", "a,b"]).0,
        INPUT_ERROR
    );
    let tight = [
        "pingpong",
        "--seed",
        "abb",
        "--avoid",
        "abb",
        "--max-pad",
        "2",
        "--max-candidates",
        "3",
    ];
    assert_eq!(cli(&tight).0, BUDGET_EXHAUSTED);
}

#[test]
fn avoid_accepts_generator_files() {
    let dir = std::env::temp_dir().join(format!("malnormal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("e.txt");
    std::fs::write(&file, "# the subgroup <a>\na\n").unwrap();
    let by_file = cli(&[
        "pingpong",
        "--seed",
        "abb",
        "--avoid",
        file.to_str().unwrap(),
    ]);
    let inline = cli(&["pingpong", "--seed", "abb", "--avoid", "a"]);
    assert_eq!(by_file, inline);
    let gens = dir.join("h.txt");
    std::fs::write(&gens, "aa\n\nb  # second\n").unwrap();
    let (_, v) = cli_json(&["subgroup", "--gens-file", gens.to_str().unwrap()]);
    assert_eq!(v["generators"], serde_json::json!(["aa", "b"]));
}

#[test]
fn vfree_commands() {
    let (code, v) = cli_json(&["vfree", "--vfree", &data("f2_swap.json")]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["exponent"]["n"], 2);
    assert_eq!(v["baumslag_taylor"], true);
    let (_, v) = cli_json(&["vfree", "--vfree", &data("f2_iota.json")]);
    assert!(v["exponent"]["error"].as_str().unwrap().contains("scalar"));

    let (code, v) = cli_json(&["construct", "--vfree", &data("f2xz2.json")]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["a"].as_array().unwrap().len(), 2);
    assert_eq!(v["verdicts"]["weakly_malnormal_ok"], true);
    let (code, v) = cli_json(&["construct", "--vfree", &data("f2_iota.json")]);
    assert_eq!(code, INPUT_ERROR);
    assert_eq!(v["error"], "ScalarObstruction");

    let (code, v) = cli_json(&[
        "commensurator",
        "--gens",
        "aa",
        "--vfree",
        &data("f2xz2.json"),
    ]);
    assert_eq!(code, SUCCESS);
    assert_eq!(v["index_of_k"], 4);
}

#[test]
fn output_is_independent_of_parallelism_and_copied_to_file() {
    let out = std::env::temp_dir().join(format!("malnormal-out-{}.json", std::process::id()));
    let args = ["construct", "--vfree", &data("f2_swap.json")];
    let (_, serial) = cli(&[&args[..], &["--jobs", "1"]].concat());
    let (_, parallel) =
        cli(&[&args[..], &["--jobs", "4", "--out", out.to_str().unwrap()]].concat());
    assert_eq!(serial, parallel);
    assert_eq!(std::fs::read_to_string(&out).unwrap(), parallel);
}

use std::process::{Command, Output};

use dhr_sieve::optimizer::{generate_table, read_table_csv, SieveContext};
use dhr_sieve::sievefn::LimitsSource;

fn dhr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhr")).args(args).env_remove("DHR_THREADS").output().expect("run dhr")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn limits_for_the_linear_sieve() {
    assert_eq!(stdout(&dhr(&["limits", "--g", "1"])), "alpha=2 beta=2\n");
    let solved = dhr(&["limits", "--g", "1", "--limits", "solved"]);
    assert_eq!(stdout(&solved), "alpha=2 beta=2\n");
    assert!(String::from_utf8_lossy(&solved.stderr).contains("delta_alpha=0e0"));
}

#[test]
fn table_csv_round_trips() {
    let text = stdout(&dhr(&["table", "--g", "2", "--k", "1..5", "--format", "csv"]));
    let parsed = read_table_csv(text.as_bytes()).unwrap();
    let direct = generate_table(&[2], &[1, 2, 3, 4, 5], 400, &SieveContext::new(LimitsSource::Reference)).unwrap();
    assert_eq!(parsed.len(), 5);
    for (p, d) in parsed.iter().zip(&direct) {
        assert_eq!((p.g, p.k, p.status, p.r(), p.classical_r), (d.g, d.k, d.status, d.r(), d.classical_r));
        let (pr, dr) = (p.result, d.result);
        assert_eq!(pr.map(|c| c.r), dr.map(|c| c.r));
        assert_eq!(pr.map(|c| c.threshold.to_bits()), dr.map(|c| c.threshold.to_bits()));
        assert_eq!(pr.map(|c| c.v.to_bits()), dr.map(|c| c.v.to_bits()));
    }
    assert!(text.starts_with("g,k,r,classical_r,v,w,u,threshold\n2,1,-,7,"), "{text}");
}

#[test]
fn output_is_identical_across_thread_counts() {
    let runs = [
        vec!["table", "--g", "2..3", "--k", "4..6", "--format", "csv"],
        vec!["verify", "--poly", "n^3+2; n^3+6", "--x", "3000", "--r", "9", "--v", "6", "--u", "1.2", "--factors"],
        vec!["density", "--poly", "n^3+2; n^3+6", "--x", "200000", "--format", "json"],
    ];
    for args in runs {
        let one = dhr(&[args.as_slice(), &["--threads", "1"]].concat());
        let three = dhr(&[args.as_slice(), &["--threads", "3"]].concat());
        let env = Command::new(env!("CARGO_BIN_EXE_dhr")).args(&args).env("DHR_THREADS", "2").output().unwrap();
        let base = stdout(&one);
        assert_eq!(base, stdout(&three), "{args:?}");
        assert_eq!(base, stdout(&env), "{args:?}");
        assert_eq!(base, stdout(&dhr(&[args.as_slice(), &["--threads", "1"]].concat())), "{args:?}");
    }
}

#[test]
fn writes_to_a_file() {
    let dir = std::env::temp_dir().join(format!("dhr-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("limits.json");
    let out = dhr(&["limits", "--g", "2..3", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(stdout(&out).is_empty());
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(json[0]["g"], 2);
    assert_eq!(json[1]["alpha"], 8.371931240875);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_statuses() {
    assert_eq!(dhr(&["optimize", "--g", "3", "--k", "1"]).status.code(), Some(2));
    assert_eq!(dhr(&["verify", "--poly", "n^3+2; n^3+4", "--x", "100", "--r", "5"]).status.code(), Some(2));
    assert_eq!(dhr(&["verify", "--poly", "n^3+; n", "--x", "100", "--r", "5"]).status.code(), Some(4));
    let budget = ["verify", "--poly", "n^3+2; n^3+6", "--x", "10000", "--r", "15", "--max-iterations", "1"];
    assert_eq!(dhr(&budget).status.code(), Some(3));
    assert_eq!(dhr(&["sievefn", "--g", "2", "--step", "0.5"]).status.code(), Some(4));
    assert_eq!(dhr(&["table", "--g", "0"]).status.code(), Some(4));
    assert_eq!(dhr(&["limits", "--format", "yaml"]).status.code(), Some(4));
    assert_eq!(dhr(&["--help"]).status.code(), Some(0));
}

#[test]
fn optimize_reports_a_published_cell() {
    let text = stdout(&dhr(&["optimize", "--g", "2", "--k", "3", "--format", "json"]));
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["r"], 15);
    assert_eq!(json["published_r"], 15);
    assert_eq!(json["classical_r"], 16);
    let sieve = stdout(&dhr(&["sievefn", "--g", "1", "--at", "2,3"]));
    let lines: Vec<&str> = sieve.lines().collect();
    assert_eq!(lines[0], "u,F,f");
    let f2: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((f2 - dhr_sieve::numeric::exp_gamma()).abs() < 1e-12);
}

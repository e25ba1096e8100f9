use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn flashlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flashlab"))
        .args(args)
        .env_remove("FLASHLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn markov_reproduces_table_values() {
    for (p, expected) in [("0.5,0.5", 0.091006), ("0.2,0.8", 0.095431)] {
        let v = json(&flashlab(&[
            "markov", "--code", "layered", "--n", "4", "--k", "2", "--q", "4", "--p", p,
        ]));
        let pe = v["erase_probability"].as_f64().unwrap();
        assert!((pe - expected).abs() <= 5e-7, "{p}: {pe}");
        assert_eq!(v["states"], 67);
        assert!(v["residual"].as_f64().unwrap() <= 1e-12);
    }
}

#[test]
fn markov_exact_and_chain_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("chain.csv");
    let v = json(&flashlab(&[
        "markov",
        "--code",
        "ilifc",
        "--n",
        "4",
        "--k",
        "2",
        "--q",
        "2",
        "--exact",
        "--dump",
        dump.to_str().unwrap(),
    ]));
    assert!(v["exact"]["erase_probability"]
        .as_str()
        .unwrap()
        .contains('/'));
    let text = fs::read_to_string(&dump).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("from,to,bit,prob,erase"));
    assert_eq!(lines.clone().count(), 22);
    assert!(lines.all(|l| l.split(',').count() == 5));
}

#[test]
fn worstcase_json() {
    let v = json(&flashlab(&[
        "worstcase",
        "--code",
        "ilifc",
        "--n",
        "4",
        "--k",
        "2",
        "--q",
        "2",
    ]));
    assert_eq!(v["min_writes"], 3);
    assert_eq!(v["witness"].as_array().unwrap().len(), 4);
    let v = json(&flashlab(&[
        "worstcase",
        "--code",
        "layered",
        "--n",
        "4",
        "--k",
        "2",
        "--q",
        "4",
    ]));
    assert_eq!(v["min_writes"], 7);
}

#[test]
fn simulate_outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let hist = dir.path().join(name);
        let stats = dir.path().join(format!("{name}.json"));
        let out = flashlab(&[
            "simulate",
            "--code",
            "layered",
            "--n",
            "16",
            "--k",
            "4",
            "--q",
            "8",
            "--erases",
            "10000",
            "--seed",
            "1",
            "--out",
            hist.to_str().unwrap(),
            "--stats",
            stats.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        (
            fs::read_to_string(hist).unwrap(),
            fs::read_to_string(stats).unwrap(),
        )
    };
    let (hist_a, stats_a) = run("a.csv");
    let (hist_b, stats_b) = run("b.csv");
    assert_eq!(hist_a, hist_b);
    assert_eq!(stats_a, stats_b);

    let mut lines = hist_a.lines();
    assert_eq!(lines.next(), Some("rewrites,frequency"));
    let rows: Vec<(u64, u64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0));
    assert_eq!(rows.iter().map(|r| r.1).sum::<u64>(), 10_000);

    let v: Value = serde_json::from_str(&stats_a).unwrap();
    let avg = v["average"].as_f64().unwrap();
    assert!((avg - 100.89).abs() <= 1.5, "{avg}");
    assert_eq!(v["intervals"], 10_000);
}

#[test]
fn replicas_do_not_depend_on_thread_count() {
    let args = [
        "simulate", "--code", "ilifc", "--n", "8", "--k", "2", "--q", "3", "--erases", "200",
        "--runs", "6", "--seed", "5",
    ];
    let with = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_flashlab"))
            .args(args)
            .env("FLASHLAB_THREADS", threads)
            .output()
            .unwrap()
    };
    let one = with("1");
    let three = with("3");
    assert!(one.status.success());
    assert_eq!(one.stdout, three.stdout);
    assert_eq!(json(&one)["intervals"], 1200);
}

#[test]
fn sweep_csv() {
    let out = flashlab(&["sweep", "--k", "2", "--q", "4", "--n", "4,6,8,10"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,rate,avg_ilifc,avg_layered"));
    for line in lines {
        let f: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(f[3] >= f[2], "{line}");
    }
}

#[test]
fn verify_report() {
    let v = json(&flashlab(&[
        "verify", "--n", "4", "--k", "2", "--q", "3", "--depth", "6",
    ]));
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["passed"] == true));
    assert!(checks.iter().any(|c| c["name"] == "worst_case_equality"));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["markov", "--n", "4", "--k", "2", "--q", "4", "--p", "0.5"][..],
        &[
            "markov", "--n", "4", "--k", "2", "--q", "4", "--p", "0.5,0.6",
        ],
        &["markov", "--n", "4", "--k", "3", "--q", "4"],
        &[
            "simulate", "--n", "4", "--k", "2", "--q", "4", "--code", "gray",
        ],
        &[
            "simulate", "--n", "4", "--k", "2", "--q", "4", "--erases", "0",
        ],
        &["frobnicate"],
    ] {
        assert_eq!(flashlab(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn runtime_failures_exit_with_two() {
    let out = flashlab(&[
        "markov", "--n", "16", "--k", "4", "--q", "8", "--cap", "1000",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("simulator"));
    let out = flashlab(&[
        "worstcase",
        "--n",
        "16",
        "--k",
        "4",
        "--q",
        "8",
        "--cap",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

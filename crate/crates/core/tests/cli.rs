use std::process::Command;

use megflood::cli::{run, EXIT_OK, EXIT_TIMEOUT, EXIT_USAGE};

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("megflood").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn single_node_floods_at_time_zero() {
    let (code, out, err) = call(&["flood", "--n", "1", "--rho", "0", "--r", "1"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert_eq!(
        out,
        "t,informed,y_max,quasi_cells,density_ok,largest_comp_frac\n0,1,,,,\n"
    );
    assert_eq!(err.trim(), "flood_time=0 bootstrap=none spread=none");
}

#[test]
fn flood_summary_line_is_stable() {
    let args = [
        "flood",
        "--n",
        "1024",
        "--rho-rule",
        "4*sqrt(log n)",
        "--r",
        "2",
        "--seed",
        "11",
    ];
    let (code, out, err) = call(&args);
    assert_eq!(code, EXIT_OK);
    let (_, out2, err2) = call(&args);
    assert_eq!((out.clone(), err.clone()), (out2, err2));
    let last = out.lines().last().unwrap();
    let t: u64 = last.split(',').next().unwrap().parse().unwrap();
    assert!(
        err.starts_with(&format!("flood_time={t} bootstrap=")),
        "{err}"
    );
    assert!(last.contains(",1024,"));
}

#[test]
fn missing_n_is_a_usage_error() {
    let (code, _, err) = call(&["flood", "--rho", "1", "--r", "1"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--n"));
}

#[test]
fn rho_and_rule_conflict() {
    let (code, _, _) = call(&[
        "flood",
        "--n",
        "16",
        "--rho",
        "1",
        "--rho-rule",
        "2",
        "--r",
        "1",
    ]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn invalid_values_are_usage_errors() {
    assert_eq!(
        call(&["flood", "--n", "0", "--rho", "1", "--r", "1"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["flood", "--n", "16", "--rho", "1", "--r", "0"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["flood", "--n", "16", "--rho", "9", "--r", "1"]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&["flood", "--n", "16", "--rho", "1", "--r", "1", "--source", "16"]).0,
        EXIT_USAGE
    );
}

#[test]
fn static_far_pair_times_out() {
    // two nodes that never move; with n = 2 and r tiny they only meet if placed together
    let mut saw_timeout = false;
    for seed in 0..20 {
        let s = seed.to_string();
        let (code, out, err) = call(&[
            "flood",
            "--n",
            "2",
            "--rho",
            "0",
            "--r",
            "0.1",
            "--seed",
            &s,
            "--max-steps",
            "5",
        ]);
        match code {
            EXIT_TIMEOUT => {
                saw_timeout = true;
                assert!(err.starts_with("flood_time=none"));
                assert_eq!(out.lines().count(), 1 + 6);
            }
            EXIT_OK => assert!(err.starts_with("flood_time=1")),
            other => panic!("unexpected exit {other}: {err}"),
        }
    }
    assert!(saw_timeout);
}

#[test]
fn verify_spreading_and_boundary_pass() {
    let (code, out, _) = call(&["verify", "--lemma", "spreading", "--kmax", "2000"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("spreading: 2000 cases, 0 violations"), "{out}");
    let (code, out, _) = call(&["verify", "--lemma", "boundary", "--m", "4", "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["cases"], 2 + 16 + 512 + 65536);
    let (code, out, _) = call(&[
        "verify",
        "--lemma",
        "boundary",
        "--m",
        "9",
        "--samples",
        "2000",
        "--seed",
        "4",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("seed 4 [PASS]"), "{out}");
}

#[test]
fn verify_almost_increasing_small() {
    let (code, out, _) = call(&[
        "verify",
        "--lemma",
        "almost-increasing",
        "--trials",
        "5000",
        "--json",
    ]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("\"lemma\":\"almost-increasing\""));
}

#[test]
fn unknown_lemma_is_usage_error() {
    assert_eq!(call(&["verify", "--lemma", "pythagoras"]).0, EXIT_USAGE);
}

#[test]
fn sweep_config_handling() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.json");
    std::fs::write(&empty, r#"{"points":[],"trials":3,"master_seed":1}"#).unwrap();
    let (code, out, _) = call(&["sweep", "--config", empty.to_str().unwrap(), "--jobs", "1"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1);

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ points: ").unwrap();
    assert_eq!(
        call(&["sweep", "--config", bad.to_str().unwrap()]).0,
        EXIT_USAGE
    );
    assert_eq!(
        call(&[
            "sweep",
            "--config",
            dir.path().join("none.json").to_str().unwrap()
        ])
        .0,
        EXIT_USAGE
    );

    let good = dir.path().join("good.json");
    std::fs::write(
        &good,
        r#"{"points":[{"n":256,"rho":4,"r":2}],"trials":4,"master_seed":5}"#,
    )
    .unwrap();
    let csv1 = dir.path().join("a.csv");
    let csv2 = dir.path().join("b.csv");
    let g = good.to_str().unwrap();
    assert_eq!(
        call(&[
            "sweep",
            "--config",
            g,
            "--jobs",
            "1",
            "-o",
            csv1.to_str().unwrap()
        ])
        .0,
        EXIT_OK
    );
    assert_eq!(
        call(&[
            "sweep",
            "--config",
            g,
            "--jobs",
            "3",
            "-o",
            csv2.to_str().unwrap()
        ])
        .0,
        EXIT_OK
    );
    let a = std::fs::read(&csv1).unwrap();
    assert_eq!(a, std::fs::read(&csv2).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 5);
    let (_, other, _) = call(&["sweep", "--config", g, "--jobs", "1", "--seed", "6"]);
    assert_ne!(other.as_bytes(), std::fs::read(&csv1).unwrap());
}

#[test]
fn snapshot_stats_rows() {
    let (code, out, _) = call(&[
        "snapshot-stats",
        "--n",
        "400",
        "--r",
        "1",
        "--samples",
        "10",
        "--seed",
        "2",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<_> = out.lines().collect();
    assert_eq!(lines[0], "sample,n,r,components,largest,max_comp_frac");
    assert_eq!(lines.len(), 11);
    for (k, l) in lines[1..].iter().enumerate() {
        assert!(l.starts_with(&format!("{k},400,1,")));
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_megflood");
    let ok = Command::new(bin)
        .args(["flood", "--n", "1", "--rho", "0", "--r", "1"])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let usage = Command::new(bin)
        .args(["flood", "--r", "1"])
        .output()
        .unwrap();
    assert_eq!(usage.status.code(), Some(EXIT_USAGE));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(EXIT_OK));
    assert!(String::from_utf8_lossy(&help.stdout).contains("snapshot-stats"));
}

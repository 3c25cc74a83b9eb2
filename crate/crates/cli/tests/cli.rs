use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn cgnet(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cgnet"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("CGNET_OUT")
        .env_remove("CGNET_JOBS")
        .output()
        .expect("binary runs")
}

fn summary(o: &Output) -> Value {
    let line = String::from_utf8_lossy(&o.stdout);
    serde_json::from_str(line.trim()).unwrap_or_else(|e| panic!("bad summary {line:?}: {e}"))
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn bins_with_ordinal_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = cgnet(
        &out,
        &[
            "network",
            "--system",
            "rossler-periodic",
            "--kind",
            "ordinal",
            "--bins",
            "3",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    let s = summary(&o);
    assert_eq!(s["status"], "failed");
    assert_eq!(s["error"], "validation");
    assert!(!out.exists(), "nothing is written on validation failure");
}

#[test]
fn unknown_flag_and_unknown_names_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(cgnet(&out, &["persist", "--bogus"]).status.code(), Some(1));
    assert_eq!(
        cgnet(&out, &["simulate", "--system", "no-such"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(cgnet(&out, &["repro", "no-such"]).status.code(), Some(1));
    assert_eq!(
        cgnet(
            &out,
            &[
                "bin-sweep",
                "--system",
                "rossler-periodic",
                "--bins-min",
                "1"
            ]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        cgnet(&out, &["noise-sweep", "--snr", "30,20,25"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        cgnet(&out, &["--jobs", "0", "repro", "fig4-toy"])
            .status
            .code(),
        Some(1)
    );
    assert!(!out.exists());
}

#[test]
fn help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(cgnet(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn persist_reports_low_entropy_for_periodic_rossler() {
    let dir = tempfile::tempdir().unwrap();
    let o = cgnet(
        dir.path(),
        &[
            "persist",
            "--system",
            "rossler-periodic",
            "--kind",
            "coarse",
            "--bins",
            "12",
            "--tau",
            "43",
            "--dim",
            "4",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&o);
    assert_eq!(s["status"], "ok");
    let e = s["entropy"].as_f64().unwrap();
    assert!(e < 0.1, "E' = {e}");
    for f in ["distance.csv", "distance.json", "diagram.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let dgm: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("diagram.json")).unwrap())
            .unwrap();
    assert!(dgm.is_object());

    // the diagram feeds the entropy subcommand
    let again = dir.path().join("entropy");
    let diagram = dir.path().join("diagram.json");
    let o = cgnet(&again, &["entropy", "--diagram", diagram.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!((summary(&o)["entropy"].as_f64().unwrap() - e).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = [
        "bin-sweep",
        "--system",
        "rossler-periodic",
        "--tau",
        "43",
        "--dim",
        "4",
        "--bins-min",
        "8",
        "--bins-max",
        "12",
    ];
    assert_eq!(cgnet(&a, &args).status.code(), Some(0));
    assert_eq!(cgnet(&b, &args).status.code(), Some(0));
    assert_eq!(listing(&a), listing(&b));
}

#[test]
fn network_from_csv_writes_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    let rows: String = (0..400)
        .map(|i| format!("{}\n", (i as f64 * 0.3).sin()))
        .collect();
    fs::write(&csv, rows).unwrap();
    let out = dir.path().join("net");
    let o = cgnet(
        &out,
        &[
            "network",
            "--csv",
            csv.to_str().unwrap(),
            "--fs",
            "10",
            "--tau",
            "5",
            "--dim",
            "3",
            "--kind",
            "ordinal",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let s = summary(&o);
    assert!(s["nodes"].as_u64().unwrap() >= 2);
    let edges = fs::read_to_string(out.join("edges.csv")).unwrap();
    assert!(edges.lines().count() > 1);
}

#[test]
fn csv_without_rate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("x.csv");
    fs::write(&csv, "1\n2\n3\n").unwrap();
    let o = cgnet(
        &dir.path().join("o"),
        &[
            "embed",
            "--csv",
            csv.to_str().unwrap(),
            "--tau",
            "1",
            "--dim",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn small_reproductions_pass() {
    for name in ["fig4-toy", "sine-method-example"] {
        let dir = tempfile::tempdir().unwrap();
        let o = cgnet(dir.path(), &["repro", name]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{name}: {}",
            String::from_utf8_lossy(&o.stdout)
        );
        let s = summary(&o);
        assert!(s["checks"]
            .as_array()
            .unwrap()
            .iter()
            .all(|c| c["pass"] == true));
    }
}

#[test]
fn bottleneck_and_mds_over_diagram_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (k, sys) in ["rossler-periodic", "rossler-chaotic", "lorenz-periodic"]
        .iter()
        .enumerate()
    {
        let d = dir.path().join(format!("d{k}"));
        let o = cgnet(&d, &["persist", "--system", sys]);
        assert_eq!(o.status.code(), Some(0), "{sys}");
        paths.push(d.join("diagram.json").display().to_string());
    }
    let mut args = vec!["mds".to_string()];
    for p in &paths {
        args.push("--diagram".into());
        args.push(p.clone());
    }
    let out = dir.path().join("mds");
    let argv: Vec<&str> = args.iter().map(String::as_str).collect();
    let o = cgnet(&out, &[&argv[..], &["--plot"]].concat());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let mds = fs::read_to_string(out.join("mds.csv")).unwrap();
    assert_eq!(mds.lines().count(), paths.len() + 1);
    assert!(out.join("mds.svg").exists());
}

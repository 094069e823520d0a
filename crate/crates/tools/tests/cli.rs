use std::fs;
use std::process::Command;

fn ducc() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ducc"));
    cmd.env("RUST_LOG", "warn");
    cmd
}

#[test]
fn run_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("h4.conf");
    fs::write(
        &config,
        "# small chain\nsystem = 4\nspacings = 2.0\ncc_ranks = 2, 4\nactive_spaces = {2,3}\nbaselines = hf, fci, cc, casscf\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = ducc()
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );

    let text = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(text.starts_with("system,R,method,energy,converged,seconds\n"));
    let records: Vec<csv::StringRecord> = csv::Reader::from_reader(text.as_bytes())
        .records()
        .collect::<Result<_, _>>()
        .unwrap();
    let methods: Vec<&str> = records.iter().map(|r| &r[2]).collect();
    assert_eq!(
        methods,
        [
            "HF",
            "FCI",
            "CASSCF(4,4)",
            "SD",
            "SDTQ",
            "DUCC-SD",
            "DUCC-SDTQ"
        ]
    );
    assert_eq!(
        (&records[2][3], &records[2][4], &records[2][5]),
        ("n/a", "n/a", "")
    );
    assert!(records.iter().all(|r| r[5].is_empty()));
    let text = fs::read_to_string(out.join("results.txt")).unwrap();
    assert!(text.contains("n/a — out of scope"));
}

#[test]
fn timings_fill_the_seconds_column() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("h2.conf");
    fs::write(&config, "system = 2\nspacings = 1.4\ncc_ranks = 2\n").unwrap();
    let out = dir.path().join("out");
    let status = ducc()
        .args([
            "run",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--timings",
            "--no-cache",
        ])
        .status()
        .unwrap();
    assert!(status.success());
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let seconds = line.rsplit(',').next().unwrap();
        assert!(seconds.parse::<f64>().is_ok(), "{line}");
    }
    assert!(!out.join("cache").exists());
}

#[test]
fn bad_input_exits_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = ducc().args(["preset", "table9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown preset"));

    let config = dir.path().join("bad.conf");
    fs::write(
        &config,
        "system = 6\nspacings = 2.0\nactive_spaces = {2,3,4,9}\n",
    )
    .unwrap();
    let out = ducc()
        .args(["run", config.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn selftest_passes() {
    let out = ducc().arg("selftest").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

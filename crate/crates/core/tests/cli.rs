use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-filter"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn filter_table_has_header_and_columns() {
    let o = cli(&[
        "filter", "--model", "lz", "--g0", "0.2", "--lambda", "1", "--m", "1,5", "--n-max", "10",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("# cavity-filter "));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "n,lower_m1,lower_m5,upper_m1,upper_m5");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 12);
}

#[test]
fn sequence_output_is_a_distribution() {
    let o = cli(&[
        "filter",
        "--model",
        "dk",
        "--g0",
        "4",
        "--A0",
        "0.1",
        "--T",
        "0.1",
        "--nbar",
        "25",
        "--sequence",
        "-+-",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("\"steps\":3"));
    assert!(text.contains("n,p_n"));
}

#[test]
fn json_output_parses() {
    let o = cli(&[
        "widths", "--kind", "lowpass", "--model", "dk", "--g0", "1", "--A0", "2", "--T", "1",
        "--m", "5", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["config"]["command"], "widths");
    assert_eq!(v["table"]["axis"].as_array().unwrap().len(), 5);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &[
            "widths", "--model", "dk", "--g0", "1", "--A0", "2", "--T", "1", "--kind", "lowpass",
            "--m", "0",
        ][..],
        &[
            "filter", "--model", "dk", "--g0", "-1", "--A0", "0.1", "--T", "0.1",
        ],
        &["filter", "--model", "xyz"],
        &[
            "sweep-q", "--model", "lz", "--g0", "1", "--lambda", "1", "--nbar", "10",
        ],
        &[
            "filter",
            "--model",
            "dk",
            "--g0",
            "4",
            "--A0",
            "0.1",
            "--T",
            "0.1",
            "--nbar",
            "5",
            "--sequence",
            "+x",
        ],
    ] {
        let o = cli(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
    }
}

#[test]
fn numeric_errors_exit_3() {
    // the vacuum can never send an atom to the upper level
    let o = cli(&[
        "filter",
        "--model",
        "lz",
        "--g0",
        "0.2",
        "--lambda",
        "1",
        "--state",
        "fock",
        "--nbar",
        "0",
        "--sequence",
        "+",
    ]);
    assert_eq!(o.status.code(), Some(3));
    // tolerance far below double precision
    let o = cli(&[
        "evolve",
        "--model",
        "dk",
        "--g0",
        "4",
        "--A0",
        "0.1",
        "--T",
        "0.1",
        "--n-max",
        "2",
        "--rel-tol",
        "1e-20",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n=1"));
}

#[test]
fn unwritable_output_exits_1() {
    let o = cli(&[
        "widths",
        "--kind",
        "lowpass",
        "--model",
        "dk",
        "--g0",
        "1",
        "--A0",
        "2",
        "--T",
        "1",
        "--out",
        "/nonexistent/dir/x.csv",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"command":"widths","model":{"type":"demkov-kunike","g0":1,"A0":2,"T":1},"kind":"lowpass","m":[1,2]}"#,
    )
    .unwrap();
    let o = cli(&["widths", "--config", path.to_str().unwrap(), "--m", "3"]);
    assert!(o.status.success());
    let rows = stdout(&o).lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 4);
}

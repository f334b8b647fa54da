use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn chcl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chcl"))
        .env("CHCL_WORKERS", "1")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = chcl(args);
    assert!(
        out.status.success(),
        "chcl {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/TINY")
}

/// Small synthetic edge list shared by the tests.
fn synth(dir: &Path, per_class: &str) -> PathBuf {
    let p = dir.join("synth.el");
    ok(&["synth", "--per-class", per_class, "--out", s(&p)]);
    p
}

#[test]
fn signature_csv_has_one_row_per_graph_and_default_width() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let out = dir.path().join("sig.csv");
    ok(&["signature", "--data", s(&data), "--out", s(&out)]);
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 9);
    assert!(lines[0].starts_with("graph_id,d_c,d_h,v_1,"));
    for row in &lines[1..] {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 3 + 22, "{row}");
        assert_eq!(&cells[1..3], ["8", "14"]);
        for c in &cells[3..] {
            assert!(c.parse::<f64>().unwrap().is_finite());
        }
    }
}

#[test]
fn tu_fixture_loads_every_graph() {
    let dir = tempfile::tempdir().unwrap();
    let labels = fs::read_to_string(fixture().join("TINY_graph_labels.txt")).unwrap();
    let expected = labels.lines().filter(|l| !l.trim().is_empty()).count();
    let tu = format!("{}/TINY", s(&fixture().parent().unwrap().join("TINY")));
    let out = dir.path().join("sig.csv");
    ok(&[
        "signature",
        "--tu",
        &tu,
        "--dc",
        "3",
        "--dh",
        "2",
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count() - 1, expected);
    // triangle first: filled, so no harmonic 1-form and L1 spectrum {3, 3, 3}
    let tri: Vec<f64> = text
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(3)
        .map(|c| c.parse().unwrap())
        .collect();
    assert!((tri[3] - 4f64.ln()).abs() < 1e-12, "{tri:?}");
    // the 4-cycle has one hole, hence a zero Hodge eigenvalue
    let sq: Vec<f64> = text
        .lines()
        .nth(3)
        .unwrap()
        .split(',')
        .skip(3)
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(sq[3], 0.0, "{sq:?}");
}

#[test]
fn manifests_are_written_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let first = dir.path().join("first");
    ok(&[
        "pretrain",
        "--data",
        s(&data),
        "--epochs",
        "2",
        "--hidden",
        "16",
        "--seed",
        "11",
        "--out",
        s(&first),
    ]);
    let manifest = first.join("manifest.txt");
    assert!(fs::read_to_string(&manifest).unwrap().contains("seed = 11"));
    let second = dir.path().join("second");
    ok(&[
        "pretrain",
        "--data",
        s(&data),
        "--config",
        s(&manifest),
        "--out",
        s(&second),
    ]);
    for f in ["loss_trace.csv", "checkpoint.txt"] {
        assert_eq!(
            fs::read(first.join(f)).unwrap(),
            fs::read(second.join(f)).unwrap(),
            "{f}"
        );
    }
    let sig = dir.path().join("sig.csv");
    ok(&["signature", "--data", s(&data), "--out", s(&sig)]);
    assert!(dir.path().join("sig.csv.manifest").exists());
}

#[test]
fn loss_trace_has_one_row_per_epoch() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let out = dir.path().join("run");
    ok(&[
        "pretrain",
        "--data",
        s(&data),
        "--epochs",
        "3",
        "--out",
        s(&out),
    ]);
    let trace = fs::read_to_string(out.join("loss_trace.csv")).unwrap();
    let epochs: Vec<&str> = trace
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(epochs, ["1", "2", "3"]);
}

#[test]
fn probe_and_sweep_from_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "5");
    let run = dir.path().join("run");
    ok(&[
        "pretrain",
        "--data",
        s(&data),
        "--epochs",
        "2",
        "--out",
        s(&run),
    ]);
    let ckpt = run.join("checkpoint.txt");
    let probe = dir.path().join("probe.csv");
    ok(&[
        "probe",
        "--data",
        s(&data),
        "--checkpoint",
        s(&ckpt),
        "--k-folds",
        "4",
        "--out",
        s(&probe),
    ]);
    let text = fs::read_to_string(&probe).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 + 1);
    assert!(text.lines().last().unwrap().starts_with("concat,mean,"));

    let sweep = dir.path().join("sweep");
    ok(&[
        "sweep",
        "--data",
        s(&data),
        "--checkpoint",
        s(&ckpt),
        "--levels",
        "0.1,0.3",
        "--sweep-seeds",
        "2",
        "--sweep-probe-seeds",
        "1",
        "--k-folds",
        "4",
        "--out",
        s(&sweep),
    ]);
    let text = fs::read_to_string(sweep.join("sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
}

#[test]
fn probe_on_raw_signatures_needs_no_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "5");
    let probe = dir.path().join("probe.csv");
    ok(&[
        "probe",
        "--data",
        s(&data),
        "--source",
        "signature",
        "--k-folds",
        "4",
        "--out",
        s(&probe),
    ]);
    let out = chcl(&[
        "probe",
        "--data",
        s(&data),
        "--k-folds",
        "4",
        "--out",
        s(&probe),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn ablate_writes_one_row_per_variant() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "5");
    let out = dir.path().join("abl");
    ok(&[
        "ablate",
        "--data",
        s(&data),
        "--epochs",
        "1",
        "--ablate-seeds",
        "2",
        "--k-folds",
        "4",
        "--out",
        s(&out),
    ]);
    let text = fs::read_to_string(out.join("ablation.csv")).unwrap();
    let names: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(names, ["full", "no_cheeger", "no_hodge", "no_ch"]);
    let runs = fs::read_to_string(out.join("ablation_runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 1 + 4 * 2);
}

#[test]
fn inputs_are_left_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# small run\nepochs = 1\n").unwrap();
    let before = (fs::read(&data).unwrap(), fs::read(&cfg).unwrap());
    ok(&[
        "pretrain",
        "--data",
        s(&data),
        "--config",
        s(&cfg),
        "--out",
        s(&dir.path().join("run")),
    ]);
    assert_eq!(before, (fs::read(&data).unwrap(), fs::read(&cfg).unwrap()));
}

#[test]
fn bad_invocations_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "1");
    let out = s(&dir.path().join("x")).to_string();

    let unknown = chcl(&[
        "pretrain",
        "--data",
        s(&data),
        "--bogus",
        "1",
        "--out",
        &out,
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let missing = chcl(&[
        "signature",
        "--data",
        "/nonexistent/graphs.el",
        "--out",
        &out,
    ]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent/graphs.el"));

    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "epochs = 2\nthis line has no equals sign\n").unwrap();
    let malformed = chcl(&[
        "pretrain",
        "--data",
        s(&data),
        "--config",
        s(&cfg),
        "--out",
        &out,
    ]);
    assert_eq!(malformed.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&malformed.stderr).contains("line 2"));

    let bad_value = chcl(&["pretrain", "--data", s(&data), "--tau=0", "--out", &out]);
    assert_eq!(bad_value.status.code(), Some(1));

    let broken = dir.path().join("broken.el");
    fs::write(&broken, "# graph g0\nn 3\ne 0 7\n").unwrap();
    let parse = chcl(&["signature", "--data", s(&broken), "--out", &out]);
    assert_eq!(parse.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line 3"));
}

#[test]
fn edge_list_round_trips_through_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = synth(dir.path(), "2");
    let loaded = chcl::edgelist::load_edge_list(&data).unwrap();
    let again = dir.path().join("again.el");
    chcl::edgelist::save_edge_list(&loaded, &again).unwrap();
    assert_eq!(
        fs::read_to_string(&data).unwrap(),
        fs::read_to_string(&again).unwrap()
    );
    assert_eq!(loaded.len(), 8);
    assert_eq!(loaded.ids()[..4], ["A0", "B0", "C0", "D0"]);
}

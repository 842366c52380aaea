use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn loopsoup(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopsoup"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("spawn loopsoup")
}

fn ok(out: &Path, args: &[&str]) -> String {
    let o = loopsoup(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn formulas_table_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["formulas", "--grid", "0.25:1:0.25"]);
    let table = fs::read_to_string(dir.path().join("formulas.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.lines().last().unwrap().starts_with("1.0,4.0,"));
    let manifest = fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("formulas.csv") && manifest.contains("wall_clock_seconds"));
}

#[test]
fn soup_is_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    let args = ["soup", "--c", "1", "--size", "24", "--max-len", "32"];
    ok(&a, &[&["--seed", "5"], &args[..]].concat());
    ok(&b, &[&["--seed", "5", "--threads", "2"], &args[..]].concat());
    ok(&c, &[&["--seed", "6"], &args[..]].concat());
    let read = |d: &Path| fs::read(d.join("soup.txt")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    let stdout = ok(
        &dir.path().join("r"),
        &["rerun", a.join("manifest.json").to_str().unwrap()],
    );
    assert!(stdout.contains("reproduced"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let conf = dir.path().join("run.conf");
    fs::write(&conf, "# defaults\nc = 0.5\nsize = 16\nmax_len = 8\n").unwrap();
    ok(dir.path(), &["--config", conf.to_str().unwrap(), "soup", "--c", "1.5"]);
    let header = fs::read_to_string(dir.path().join("soup.txt")).unwrap();
    let header = header.lines().next().unwrap();
    assert!(
        header.contains("c=1.5") && header.contains("W=16") && header.contains("maxlen=8"),
        "{header}"
    );
}

#[test]
fn merge_is_commutative_and_pools_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "scan",
        "--c",
        "0.5,1.5",
        "--size",
        "16",
        "--max-len",
        "16",
        "--reps",
        "10",
    ];
    for s in ["1", "2"] {
        ok(&dir.path().join(s), &[&["--seed", s], &args[..]].concat());
    }
    let a = dir.path().join("1/scan.csv");
    let b = dir.path().join("2/scan.csv");
    let (ab, ba) = (dir.path().join("ab"), dir.path().join("ba"));
    ok(&ab, &["merge", a.to_str().unwrap(), b.to_str().unwrap()]);
    ok(&ba, &["merge", b.to_str().unwrap(), a.to_str().unwrap()]);
    let merged = fs::read_to_string(ab.join("merged.csv")).unwrap();
    assert_eq!(merged, fs::read_to_string(ba.join("merged.csv")).unwrap());
    assert!(merged.lines().skip(1).all(|l| l.ends_with(",20")), "{merged}");

    let single = dir.path().join("single");
    ok(&single, &["merge", a.to_str().unwrap()]);
    let mut original: Vec<String> = fs::read_to_string(&a).unwrap().lines().map(String::from).collect();
    let mut merged_one: Vec<String> = fs::read_to_string(single.join("merged.csv"))
        .unwrap()
        .lines()
        .map(String::from)
        .collect();
    original.sort();
    merged_one.sort();
    assert_eq!(original, merged_one);
}

#[test]
fn merge_rejects_different_configurations() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        &dir.path().join("a"),
        &["scan", "--c", "1", "--size", "16", "--max-len", "16", "--reps", "4"],
    );
    ok(
        &dir.path().join("b"),
        &["scan", "--c", "1", "--size", "20", "--max-len", "16", "--reps", "4"],
    );
    let o = loopsoup(
        &dir.path().join("m"),
        &[
            "merge",
            dir.path().join("a/scan.csv").to_str().unwrap(),
            dir.path().join("b/scan.csv").to_str().unwrap(),
        ],
    );
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("different configuration"));
}

#[test]
fn invalid_input_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = loopsoup(dir.path(), &["soup", "--c=-1"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("loopsoup: "));
    let o = loopsoup(dir.path(), &["soup", "--max-len", "seven"]);
    assert!(!o.status.success());
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mide(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mide"));
    cmd.args(args).env_remove("MIDE_OUT_DIR");
    if let Some(dir) = env_out {
        cmd.env("MIDE_OUT_DIR", dir);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, file: &str, text: &str) -> PathBuf {
    let p = dir.join(file);
    fs::write(&p, text).unwrap();
    p
}

const SMALL_LEMMAS: &str = r#"
name = "small"
seed = 3

[experiment]
kind = "lemmas"
triples = 20
convolutions = 10
closed_form = 5
trace_pairs = 20
"#;

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn unknown_key_exits_two_without_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &SMALL_LEMMAS.replace("triples = 20", "triples = 20\nbogus = 1"));
    let out_dir = tmp.path().join("out");
    let o = mide(&["run", cfg.to_str().unwrap(), "--out-dir", out_dir.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    assert!(!out_dir.exists());
}

#[test]
fn malformed_expression_fails_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
name = "broken"
[experiment]
kind = "isaacs"
grid = { d1 = 1, n = 16 }
coefficients = [1.0]
c = 1.0
forcing = "cos(2*pi*"
"#;
    let cfg = write_config(tmp.path(), "broken.toml", text);
    assert_eq!(mide(&["validate", cfg.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL_LEMMAS);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for dir in [&a, &b] {
        let o = mide(&["run", cfg.to_str().unwrap(), "--out-dir", dir.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (ra, rb) = (read_dir_sorted(&a.join("small")), read_dir_sorted(&b.join("small")));
    assert_eq!(ra.len(), 2);
    assert_eq!(ra, rb);
}

#[test]
fn seed_flag_overrides_config_and_changes_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL_LEMMAS);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    mide(&["run", cfg.to_str().unwrap(), "--out-dir", a.to_str().unwrap()], None);
    mide(&["run", cfg.to_str().unwrap(), "--out-dir", b.to_str().unwrap(), "--seed", "9"], None);
    let manifest = fs::read_to_string(b.join("small/manifest.json")).unwrap();
    assert!(manifest.contains("\"seed\": 9"));
    assert_ne!(fs::read(a.join("small/lemmas.csv")).unwrap(), fs::read(b.join("small/lemmas.csv")).unwrap());
}

#[test]
fn environment_names_the_output_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "small.toml", SMALL_LEMMAS);
    let env_dir = tmp.path().join("env");
    let o = mide(&["run", cfg.to_str().unwrap()], Some(&env_dir));
    assert_eq!(o.status.code(), Some(0));
    assert!(env_dir.join("small/manifest.json").exists());
}

#[test]
fn failed_assertion_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"
name = "wrong"
[experiment]
kind = "solve"
grid = { d1 = 1, d2 = 1, n = 16 }
equation = { type = "toy-model", beta = 1.0, forcing = "cos(2*pi*x1)*cos(2*pi*x2)" }

[experiment.check]
basis = "cos(2*pi*x1)*cos(2*pi*x2)"
expected = 0.03
rel_tol = 0.02
"#;
    let cfg = write_config(tmp.path(), "wrong.toml", text);
    let out = tmp.path().join("out");
    let o = mide(&["run", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
    let checks = fs::read_to_string(out.join("wrong/checks.csv")).unwrap();
    assert!(checks.lines().any(|l| l.starts_with("projection") && l.ends_with("FAIL")));
    assert!(out.join("wrong/field.bin").exists());
    assert!(fs::read_to_string(out.join("wrong/manifest.json")).unwrap().contains("\"status\": \"FAIL\""));
}

#[test]
fn lists_every_kind() {
    let o = mide(&["list-experiments"], None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    for k in ["lemmas", "estimates", "conditions", "solve", "parabolic", "isaacs", "regularity"] {
        assert!(text.lines().any(|l| l.starts_with(k)), "{k}");
    }
}

#[test]
fn shipped_configs_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut paths: Vec<String> = fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path().display().to_string()).collect();
    paths.sort();
    assert!(paths.len() >= 7);
    let mut args = vec!["validate"];
    args.extend(paths.iter().map(String::as_str));
    let o = mide(&args, None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

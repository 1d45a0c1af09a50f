use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

fn rules_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("rules")
}

fn cmd() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cryptriage"));
    for k in [
        "CRYPTRIAGE_RULES",
        "CRYPTRIAGE_THREAT_MODEL",
        "CRYPTRIAGE_FORMAT",
        "CRYPTRIAGE_FAIL_ON",
        "CRYPTRIAGE_DEMOTE_EFP",
        "CRYPTRIAGE_INCLUDE_TESTS",
        "CRYPTRIAGE_INLINE_DEPTH",
        "CRYPTRIAGE_JOBS",
        "CRYPTRIAGE_CONFIG",
    ] {
        c.env_remove(k);
    }
    c
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn copy_rules(to: &Path) {
    for e in fs::read_dir(rules_dir()).unwrap() {
        let p = e.unwrap().path();
        fs::copy(&p, to.join(p.file_name().unwrap())).unwrap();
    }
}

#[test]
fn lint_builtin_pack() {
    let o = cmd().arg("rules-lint").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let first = stdout(&o).lines().next().unwrap().to_string();
    assert!(first.starts_with("15 rules"), "{first}");
    assert!(stdout(&o).contains("java.security.MessageDigest: states="));

    let o = cmd().args(["rules-lint", "--rules"]).arg(rules_dir()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).is_empty(), "{}", stderr(&o));
}

#[test]
fn lint_rejects_duplicate_class() {
    let d = tempfile::tempdir().unwrap();
    copy_rules(d.path());
    fs::copy(rules_dir().join("Mac.rule"), d.path().join("Mac2.rule")).unwrap();
    let o = cmd().args(["rules-lint", "--rules"]).arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("javax.crypto.Mac"), "{}", stderr(&o));
}

#[test]
fn lint_rejects_syntax_error() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("X.rule"), "CLASS a.X\nEVENTS\n  e: f(;\nORDER\n  e\n").unwrap();
    let o = cmd().args(["rules-lint", "--rules"]).arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("X.rule"), "{}", stderr(&o));
}

#[test]
fn lint_warns_on_shadowed_event() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("X.rule"),
        "CLASS a.X\nEVENTS\n  e1: f(_);\n  e2: f(key);\nORDER\n  e1 e2\n",
    )
    .unwrap();
    let o = cmd().args(["rules-lint", "--rules"]).arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("warning:") && err.contains("shadowed"), "{err}");
    assert!(err.contains("unreachable"), "{err}");
}

#[test]
fn emitted_ir_rescans_identically() {
    let d = tempfile::tempdir().unwrap();
    let src = fixtures().join("catalog");
    let o = cmd().arg("emit-ir").arg(&src).arg("--out-dir").arg(d.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let from_java = cmd().args(["scan", "--fail-on", "never"]).arg(&src).output().unwrap();
    let from_ir = cmd().args(["scan", "--fail-on", "never"]).arg(d.path()).output().unwrap();
    assert_eq!(from_ir.status.code(), Some(0), "{}", stderr(&from_ir));
    let strip = |s: String| -> serde_json::Value {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        // units are named after their input file
        for f in v["findings"].as_array_mut().unwrap() {
            f.as_object_mut().unwrap().remove("unit");
        }
        v
    };
    let (a, b) = (strip(stdout(&from_java)), strip(stdout(&from_ir)));
    assert_eq!(a["findings"].as_array().unwrap().len(), 24);
    assert_eq!(a, b);
}

#[test]
fn text_lines_fit_width() {
    let o = cmd().args(["scan", "--format", "text", "--fail-on", "never"]).arg(fixtures()).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("Unclassified"));
    for l in out.lines() {
        assert!(l.chars().count() <= 120, "{l}");
    }
}

#[test]
fn output_file_and_json_shape() {
    let d = tempfile::tempdir().unwrap();
    let file = d.path().join("r.json");
    let o = cmd()
        .args(["scan", "--fail-on", "never", "-o"])
        .arg(&file)
        .arg(fixtures().join("listing1"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(file).unwrap()).unwrap();
    assert_eq!(v["schemaVersion"], 1);
    assert_eq!(v["findings"].as_array().unwrap().len(), 3);
    assert_eq!(v["aggregates"]["total"], 3);
}

#[test]
fn config_file_then_env_then_flag() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("cryptriage.toml");
    fs::write(&cfg, "fail-on = \"never\"\nformat = \"text\"\n").unwrap();
    let target = fixtures().join("listing1");

    let o = cmd().arg("scan").arg("--config").arg(&cfg).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("cryptriage"), "{}", stdout(&o));

    let o = cmd().arg("scan").arg(&target).env("CRYPTRIAGE_CONFIG", &cfg).env("CRYPTRIAGE_FAIL_ON", "low").output().unwrap();
    assert_eq!(o.status.code(), Some(1));

    let o = cmd()
        .args(["scan", "--fail-on", "never"])
        .arg(&target)
        .env("CRYPTRIAGE_CONFIG", &cfg)
        .env("CRYPTRIAGE_FAIL_ON", "low")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_paths_resolve_against_config_dir() {
    let d = tempfile::tempdir().unwrap();
    fs::create_dir(d.path().join("pack")).unwrap();
    copy_rules(&d.path().join("pack"));
    fs::write(d.path().join("c.toml"), "rules = \"pack\"\n").unwrap();
    let o = cmd()
        .args(["scan", "--fail-on", "never", "--config"])
        .arg(d.path().join("c.toml"))
        .arg(fixtures().join("listing1"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn bad_configuration_is_a_tool_error() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("c.toml");
    fs::write(&cfg, "fail-on = \"sometimes\"\n").unwrap();
    let target = fixtures().join("listing1");
    let o = cmd().arg("scan").arg("--config").arg(&cfg).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    fs::write(&cfg, "unknown-key = 1\n").unwrap();
    let o = cmd().arg("scan").arg("--config").arg(&cfg).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(2));

    let o = cmd().args(["scan", "--jobs", "0"]).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = cmd().args(["scan", "--rules"]).arg(d.path().join("nope")).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = cmd().args(["scan", "--threat-model"]).arg(&cfg).arg(&target).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn excluding_tests_drops_test_units() {
    let d = tempfile::tempdir().unwrap();
    fs::create_dir(d.path().join("test")).unwrap();
    fs::copy(
        fixtures().join("catalog/r19-insecure-hash/Md5Hash.java"),
        d.path().join("test/Md5Hash.java"),
    )
    .unwrap();
    let with = cmd().args(["scan", "--fail-on", "never"]).arg(d.path()).output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&with)).unwrap();
    assert_eq!(v["findings"].as_array().unwrap().len(), 1);
    assert_eq!(v["findings"][0]["efpFlags"][0]["kind"], "TestContext");
    let without = cmd().args(["scan", "--fail-on", "never", "--include-tests", "false"]).arg(d.path()).output().unwrap();
    let v: serde_json::Value = serde_json::from_str(&stdout(&without)).unwrap();
    assert!(v["findings"].as_array().unwrap().is_empty());
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(cmd().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(cmd().arg("--version").output().unwrap().status.code(), Some(0));
    assert_eq!(cmd().arg("bogus").output().unwrap().status.code(), Some(2));
}

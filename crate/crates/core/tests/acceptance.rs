//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below.

mod support;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Deserialize;

use cryptriage::analysis::{analyze_unit, FindingDetail};
use cryptriage::efp::EfpConfig;
use cryptriage::frontend::inline_local_helpers;
use cryptriage::pipeline::{scan_paths, scan_units, ScanOptions};
use cryptriage::report::{render_json, Report};
use cryptriage::rulelang::{builtin_pack, parse_rule};
use cryptriage::threatmodel::{catalog, Severity};
use cryptriage::parse_java;
use support::*;

const LISTING1_LIMIT: Duration = Duration::from_secs(1);
const CORPUS_LIMIT: Duration = Duration::from_secs(10);
const ORACLE_LIMIT: Duration = Duration::from_secs(60);
const ORACLE_CASES: usize = 1000;
const PATTERN_CASES: usize = 500;
const PATTERN_DEPTH: usize = 4;
const WORD_LENGTH: usize = 6;
const SEED: u64 = 0x5eed_2024;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn scan_dir(dir: &Path) -> Report {
    scan_paths(&[dir.to_path_buf()], &ScanOptions::default()).expect("scan")
}

fn scan_src(src: &str, path: &str) -> Report {
    scan_units(&[parse_java(src, path).unwrap()], &ScanOptions::default())
}

fn row(r: &Report, i: usize) -> (String, Severity) {
    let c = r.findings[i].classification.as_ref().expect("classified");
    (c.display_name.clone(), c.severity)
}

fn ac1_listing1() -> Outcome {
    let t = Instant::now();
    let r = scan_dir(&fixtures().join("listing1"));
    let took = t.elapsed();
    let mut got: Vec<(&str, u32, String, Severity)> = r
        .findings
        .iter()
        .map(|i| {
            let c = i.classification.as_ref().unwrap();
            (
                i.finding.error_type.abbrev(),
                i.finding.location.line,
                c.display_name.clone(),
                c.severity,
            )
        })
        .collect();
    got.sort();
    // getInstance on line 7, initSign on 8; the missing sign() belongs after
    // the update on line 9, which is where the operation is left incomplete
    let want = vec![
        ("C", 7, "Insecure cryptographic signature".to_string(), Severity::Low),
        ("IO", 9, "Missed to finish crypto function".to_string(), Severity::High),
        ("RP", 8, "Predictable/constant crypto keys".to_string(), Severity::High),
    ];
    ensure(got == want, || format!("got {got:?}"))?;
    ensure(took < LISTING1_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("3 findings as annotated in {took:?}"))
}

fn ac2_listing2() -> Outcome {
    let r = scan_dir(&fixtures().join("listing2"));
    ensure(r.findings.len() == 1, || format!("{} findings", r.findings.len()))?;
    let f = &r.findings[0].finding.path_flags;
    ensure(f.loop_guarded && !f.exists_on_all_paths, || format!("flags {f:?}"))?;
    Ok("1 finding, loopGuarded and not on all paths".into())
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct TableRow {
    display_name: String,
    attack_type: String,
    severity: String,
    novel: bool,
    error_types: Vec<String>,
}

fn ac3_catalog() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("vulnerability-table.json")).unwrap();
    let table: Vec<TableRow> = serde_json::from_str(&text).unwrap();
    let cat = catalog();
    ensure(cat.len() == 22 && table.len() == 22, || format!("{} catalog rows", cat.len()))?;
    for (e, t) in cat.iter().zip(&table) {
        let ets: Vec<String> = e.applicable_error_types.iter().map(|x| x.abbrev().to_string()).collect();
        let got = (
            e.display_name.as_str(),
            e.attack_type.display_name(),
            e.severity.letter(),
            e.novel,
            ets,
        );
        let want = (
            t.display_name.as_str(),
            t.attack_type.as_str(),
            t.severity.as_str(),
            t.novel,
            t.error_types.clone(),
        );
        ensure(got == want, || format!("row mismatch: {got:?} vs {want:?}"))?;
    }
    let attacks: BTreeSet<_> = cat.iter().map(|e| e.attack_type).collect();
    ensure(attacks.len() == 8, || format!("{} attack types", attacks.len()))?;
    Ok("22 rows and 8 attack types match field for field".into())
}

fn ac4_reachability() -> Outcome {
    let t = Instant::now();
    let r = scan_dir(&fixtures());
    let took = t.elapsed();
    let hit: BTreeSet<&str> = r
        .findings
        .iter()
        .filter_map(|i| i.classification.as_ref())
        .map(|c| c.entry_id.as_str())
        .collect();
    let missing: Vec<&str> = catalog().iter().map(|e| e.id.as_str()).filter(|id| !hit.contains(id)).collect();
    ensure(missing.is_empty(), || format!("rows never reached: {missing:?}"))?;
    let manifest: BTreeMap<String, Vec<String>> =
        serde_json::from_str(&std::fs::read_to_string(fixtures().join("catalog/manifest.json")).unwrap()).unwrap();
    let dirs = manifest.len();
    ensure(dirs >= 22, || format!("{dirs} catalog fixtures"))?;
    let mut got: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for i in &r.findings {
        if let (Some(file), Some(c)) = (i.unit.strip_prefix("catalog/"), &i.classification) {
            got.entry(file.to_string()).or_default().push(c.entry_id.clone());
        }
    }
    let mut want = manifest.clone();
    got.values_mut().chain(want.values_mut()).for_each(|v| v.sort());
    ensure(got == want, || format!("catalog findings {got:?}\nmanifest {want:?}"))?;
    // per attack type and severity, as implied by the manifest and the catalog
    let mut expect: BTreeMap<(String, String), usize> = BTreeMap::new();
    for id in manifest.values().flatten() {
        let e = catalog().iter().find(|e| &e.id == id).unwrap();
        *expect.entry((e.attack_type.display_name().to_string(), e.severity.letter().to_string())).or_default() += 1;
    }
    let mut seen: BTreeMap<(String, String), usize> = BTreeMap::new();
    for c in r.findings.iter().filter(|i| i.unit.starts_with("catalog/")).filter_map(|i| i.classification.as_ref()) {
        let e = catalog().iter().find(|e| e.id == c.entry_id).unwrap();
        *seen.entry((e.attack_type.display_name().to_string(), e.severity.letter().to_string())).or_default() += 1;
    }
    ensure(seen == expect, || format!("attack/severity counts {seen:?} vs {expect:?}"))?;
    ensure(took < CORPUS_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("all 22 rows reached from {dirs} programs in {took:?}"))
}

fn ac5_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED);
    let rules = builtin_pack();
    let t = Instant::now();
    for case in 0..ORACLE_CASES {
        let mut p = random_program(&mut rng);
        let (stmts, branches, loops) = count(&p);
        ensure(stmts <= MAX_STATEMENTS && branches <= MAX_BRANCHES && loops <= MAX_LOOPS, || {
            format!("generator exceeded bounds: {stmts}/{branches}/{loops}")
        })?;
        let src = render(&mut p);
        let want = oracle(&p);
        let unit = parse_java(&src, "Gen.java").map_err(|e| format!("case {case}: {e}\n{src}"))?;
        let got: BTreeSet<(&str, u32)> = analyze_unit(&inline_local_helpers(&unit, 1), &rules)
            .iter()
            .map(|f| (f.error_type.abbrev(), f.location.line))
            .collect();
        ensure(got == want, || format!("case {case}: analysis {got:?} oracle {want:?}\n{src}"))?;
    }
    let took = t.elapsed();
    ensure(took < ORACLE_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("{ORACLE_CASES}/{ORACLE_CASES} methods agree in {took:?}"))
}

fn ac6_patterns() -> Outcome {
    let mut rng = StdRng::seed_from_u64(SEED ^ 0xabc);
    let words = all_words(WORD_LENGTH);
    for case in 0..PATTERN_CASES {
        let p = random_pattern(&mut rng, PATTERN_DEPTH);
        let text = pattern_text(&p);
        let rule = format!(
            "CLASS x.Y\nEVENTS\n  a: a();\n  b: b();\n  c: c();\n  d: d();\n  e: e();\nORDER\n  {text}\n"
        );
        let spec = parse_rule(&rule).map_err(|e| format!("case {case}: `{text}`: {e}"))?;
        let lang = language(&p, WORD_LENGTH);
        for w in &words {
            let labels: Vec<&str> = w.iter().map(|i| ALPHABET[*i as usize]).collect();
            let dfa = spec.automaton.accepts(labels.iter().copied());
            ensure(dfa == lang.contains(w), || {
                format!("case {case}: `{text}` on {labels:?}: automaton {dfa}")
            })?;
        }
    }
    Ok(format!(
        "{PATTERN_CASES}/{PATTERN_CASES} patterns agree on all {} words up to length {WORD_LENGTH}",
        words.len()
    ))
}

const CIPHER: &str = r#"import javax.crypto.Cipher;
import javax.crypto.KeyGenerator;
import javax.crypto.SecretKey;
class E {
  byte[] enc(byte[] data) throws Exception {
    KeyGenerator kg = KeyGenerator.getInstance("AES");
    kg.init(256);
    SecretKey key = kg.generateKey();
    Cipher c = Cipher.getInstance("TRANSFORMATION");
    c.init(Cipher.ENCRYPT_MODE, key);
    return c.doFinal(data);
  }
}"#;

fn ac7_default_transformation() -> Outcome {
    let a = scan_src(&CIPHER.replace("TRANSFORMATION", "AES"), "E.java");
    let b = scan_src(&CIPHER.replace("TRANSFORMATION", "AES/ECB/PKCS5Padding"), "E.java");
    ensure(a.findings.len() == 1 && b.findings.len() == 1, || {
        format!("{} and {} findings", a.findings.len(), b.findings.len())
    })?;
    let (ca, cb) = (&a.findings[0].classification, &b.findings[0].classification);
    ensure(ca == cb, || format!("{ca:?} vs {cb:?}"))?;
    let want = ("ECB mode in symmetric cipher".to_string(), Severity::Medium);
    ensure(row(&a, 0) == want, || format!("{:?}", row(&a, 0)))?;
    let flag = |r: &Report| match &r.findings[0].finding.detail {
        FindingDetail::Constraint { defaulted, .. } => Some(*defaulted),
        _ => None,
    };
    ensure(flag(&a) == Some(true) && flag(&b) == Some(false), || {
        format!("defaulted {:?} / {:?}", flag(&a), flag(&b))
    })?;
    // everything but the defaulted tags and the message agrees
    let norm = |r: &Report| {
        let mut v = serde_json::to_value(&r.findings[0]).unwrap();
        let f = v["finding"].as_object_mut().unwrap();
        f.remove("message");
        let d = f["detail"].as_object_mut().unwrap();
        d.remove("defaulted");
        if let Some(t) = d.get_mut("transformation").and_then(|t| t.as_object_mut()) {
            t.remove("defaulted");
        }
        v
    };
    ensure(norm(&a) == norm(&b), || format!("{}\nvs\n{}", norm(&a), norm(&b)))?;
    Ok("both ECB mode in symmetric cipher/Medium, defaulted true vs false".into())
}

fn pbe(n: u32) -> String {
    format!(
        r#"import java.security.SecureRandom;
import javax.crypto.spec.PBEKeySpec;
class P {{
  void derive(char[] password) {{
    byte[] salt = new byte[16];
    SecureRandom r = new SecureRandom();
    r.nextBytes(salt);
    PBEKeySpec spec = new PBEKeySpec(password, salt, {n}, 256);
    spec.clearPassword();
  }}
}}"#
    )
}

fn ac8_pbe_boundary() -> Outcome {
    let name = "Fewer than 10,000 iterations for PBE";
    let below = scan_src(&pbe(9_999), "P.java");
    let at = scan_src(&pbe(10_000), "P.java");
    ensure(below.findings.len() == 1, || format!("{} findings at 9999", below.findings.len()))?;
    ensure(row(&below, 0) == (name.to_string(), Severity::Low), || format!("{:?}", row(&below, 0)))?;
    let hits = at
        .findings
        .iter()
        .filter(|i| i.classification.as_ref().is_some_and(|c| c.display_name == name))
        .count();
    ensure(hits == 0, || format!("{hits} iteration findings at 10000"))?;
    Ok("9999 is Low, 10000 is clean".into())
}

fn ac9_determinism() -> Outcome {
    let run = |jobs| {
        let opts = ScanOptions {
            jobs: Some(jobs),
            ..ScanOptions::default()
        };
        render_json(&scan_paths(&[fixtures()], &opts).unwrap())
    };
    let (a, b, c) = (run(1), run(4), run(1));
    ensure(a == b && a == c, || "reports differ between runs".into())?;
    Ok(format!("{} bytes identical across 1 and 4 workers", a.len()))
}

fn ac10_efp_non_suppression() -> Outcome {
    let none = EfpConfig {
        test_path_segments: vec![],
        test_class_suffixes: vec![],
        non_security_tokens: vec![],
        fixture_method_tokens: vec![],
        ..EfpConfig::default()
    };
    let eager = EfpConfig {
        non_security_tokens: vec!["a".into(), "e".into(), "hash".into()],
        test_path_segments: vec!["catalog".into(), "listing1".into()],
        fixture_threshold: 1,
        fixture_method_tokens: vec!["e".into()],
        ..EfpConfig::default()
    };
    let mut reports = Vec::new();
    for efp in [EfpConfig::default(), none, eager] {
        let opts = ScanOptions {
            efp,
            ..ScanOptions::default()
        };
        reports.push(scan_paths(&[fixtures()], &opts).unwrap());
    }
    let strip = |r: &Report| -> Vec<_> {
        r.findings
            .iter()
            .map(|i| (i.finding.clone(), i.classification.clone(), i.unit.clone()))
            .collect()
    };
    let flags: Vec<usize> = reports.iter().map(|r| r.findings.iter().map(|i| i.efp_flags.len()).sum()).collect();
    ensure(strip(&reports[0]) == strip(&reports[1]) && strip(&reports[0]) == strip(&reports[2]), || {
        "findings differ between EFP configurations".into()
    })?;
    ensure(flags[1] <= flags[0] && flags[0] < flags[2], || format!("flag counts {flags:?} did not vary"))?;
    Ok(format!("{} findings under all 3 configs; flag counts {flags:?}", reports[0].findings.len()))
}

fn ac11_exit_codes() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_cryptriage");
    // (fixture, [high, medium, low, never] without demotion, same with demotion)
    let table: [(&str, [i32; 4], [i32; 4]); 4] = [
        ("listing1", [1, 1, 1, 0], [1, 1, 1, 0]),
        ("secure", [0, 0, 0, 0], [0, 0, 0, 0]),
        ("loopguarded", [1, 1, 1, 0], [0, 0, 0, 0]),
        ("listing2", [0, 1, 1, 0], [0, 0, 0, 0]),
    ];
    let mut checked = 0;
    for (fixture, plain, demoted) in table {
        for (demote, want) in [(false, plain), (true, demoted)] {
            for (level, code) in ["high", "medium", "low", "never"].into_iter().zip(want) {
                let mut cmd = Command::new(bin);
                cmd.args(["scan", "--fail-on", level])
                    .arg(fixtures().join(fixture))
                    .env_remove("CRYPTRIAGE_CONFIG");
                if demote {
                    cmd.arg("--demote-efp");
                }
                let out = cmd.output().unwrap();
                let got = out.status.code();
                ensure(got == Some(code), || {
                    format!("{fixture} fail-on {level} demote {demote}: exit {got:?}, want {code}")
                })?;
                checked += 1;
            }
        }
    }
    let bad = Command::new(bin).args(["scan", "/nonexistent/input"]).output().unwrap();
    ensure(bad.status.code() == Some(2), || format!("tool error exit {:?}", bad.status.code()))?;
    Ok(format!("{checked} combinations plus tool error match"))
}

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("AC1 listing 1 conformance", ac1_listing1),
        ("AC2 listing 2 conformance", ac2_listing2),
        ("AC3 catalog fidelity", ac3_catalog),
        ("AC4 catalog reachability", ac4_reachability),
        ("AC5 oracle equivalence", ac5_oracle),
        ("AC6 pattern/automaton equivalence", ac6_patterns),
        ("AC7 default transformation", ac7_default_transformation),
        ("AC8 PBE boundary", ac8_pbe_boundary),
        ("AC9 determinism", ac9_determinism),
        ("AC10 EFP non-suppression", ac10_efp_non_suppression),
        ("AC11 exit-code contract", ac11_exit_codes),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed: {failed:?}");
}

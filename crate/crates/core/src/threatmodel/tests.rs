use super::*;
use crate::analysis::analyze_unit;
use crate::frontend::{inline_local_helpers, parse_java};
use crate::rulelang::builtin_pack;

fn classified(body: &str) -> Vec<(ErrorType, String, Severity)> {
    let src = format!(
        "import java.security.*;\nimport javax.crypto.*;\nimport javax.crypto.spec.*;\nimport javax.net.ssl.*;\nclass T {{\n  void f(byte[] data, String pw, java.io.InputStream in) {{\n{body}\n  }}\n}}\n"
    );
    let u = inline_local_helpers(&parse_java(&src, "T.java").unwrap(), 1);
    analyze_unit(&u, &builtin_pack())
        .iter()
        .map(|f| {
            let c = classify(f).expect("classified");
            (f.error_type, c.display_name, c.severity)
        })
        .collect()
}

fn row(name: &str, sev: Severity) -> (String, Severity) {
    (name.to_string(), sev)
}

#[test]
fn builtin_catalog_has_every_row() {
    let c = catalog();
    assert_eq!(c.len(), 22);
    let attacks: BTreeSet<AttackType> = c.iter().map(|e| e.attack_type).collect();
    assert_eq!(attacks.len(), 8);
    let hash = c.iter().find(|e| e.display_name == "Insecure cryptographic hash").unwrap();
    assert_eq!(
        (hash.attack_type, hash.severity, hash.novel),
        (AttackType::Bruteforce, Severity::High, false)
    );
    assert_eq!(
        hash.applicable_error_types,
        [ErrorType::ConstraintError, ErrorType::RequiredPredicateError]
    );
}

#[test]
fn md5_is_insecure_hash() {
    let got = classified(r#"MessageDigest md = MessageDigest.getInstance("MD5"); byte[] h = md.digest(data);"#);
    assert_eq!(got, [(ErrorType::ConstraintError, "Insecure cryptographic hash".into(), Severity::High)]);
}

#[test]
fn ecb_and_tls_rows() {
    let ecb = classified(
        r#"KeyGenerator kg = KeyGenerator.getInstance("AES");
kg.init(256);
SecretKey k = kg.generateKey();
Cipher c = Cipher.getInstance("AES/ECB/PKCS5Padding");
c.init(1, k);
byte[] o = c.doFinal(data);"#,
    );
    assert_eq!(ecb.len(), 1);
    assert_eq!((ecb[0].1.clone(), ecb[0].2), row("ECB mode in symmetric cipher", Severity::Medium));
    let tls = classified(
        r#"SSLContext ctx = SSLContext.getInstance("TLSv1.1");
ctx.init(null, null, null);"#,
    );
    assert_eq!(tls.len(), 1);
    assert_eq!((tls[0].1.clone(), tls[0].2), row("Insecure SSL/TLS standard", Severity::High));
}

#[test]
fn pbe_rows() {
    let got = classified(
        r#"PBEKeySpec s = new PBEKeySpec(pw.toCharArray());"#,
    );
    let rows: BTreeSet<(String, Severity)> = got.into_iter().map(|(_, n, s)| (n, s)).collect();
    assert_eq!(
        rows,
        BTreeSet::from([
            row("Usage of String", Severity::Low),
            row("Predictable/constant passwords for PBE", Severity::High),
            row("Missed to clear password", Severity::Low),
        ])
    );
}

#[test]
fn typestate_always_offers_trigger_exception() {
    let src = r#"import java.security.Signature;
class S { void f(byte[] d, java.security.PrivateKey k) {
  Signature s = Signature.getInstance("SHA256withRSA");
  s.update(d);
} }"#;
    let u = parse_java(src, "S.java").unwrap();
    let fs = analyze_unit(&u, &builtin_pack());
    let ts = fs.iter().find(|f| f.error_type == ErrorType::TypestateError).unwrap();
    let c = classify(ts).unwrap();
    assert!(c.matched_alternatives.contains(&"trigger-exception".to_string()));
    assert!(c.matched_alternatives.contains(&c.entry_id));
}

#[test]
fn severity_ranks() {
    assert_eq!(severity_rank(Severity::High), 3);
    assert_eq!(severity_rank(Severity::Low), 1);
    let mut v = vec![Severity::Low, Severity::High, Severity::Medium];
    v.sort_by_key(|s| std::cmp::Reverse(severity_rank(*s)));
    assert_eq!(v, [Severity::High, Severity::Medium, Severity::Low]);
}

#[test]
fn matcher_outside_applicable_columns_is_rejected() {
    let mut tm = ThreatModel::builtin().clone();
    tm.entries[0].matchers[0].error_types = vec![ErrorType::NeverTypeOfError];
    let text = serde_json::to_string(&tm).unwrap();
    let err = ThreatModel::from_json(&text, "x.json").unwrap_err();
    assert!(err.to_string().contains("does not apply"), "{err}");
}

#[test]
fn schema_errors_carry_a_path() {
    let err = ThreatModel::from_json(
        r#"{"schemaVersion":1,"version":"v","entries":[{"id":"a"}]}"#,
        "x.json",
    )
    .unwrap_err();
    assert!(err.to_string().contains("entries[0]"), "{err}");
}

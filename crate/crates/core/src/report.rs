//! Report assembly, aggregates and rendering.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{ErrorType, Finding};
use crate::diag::Diagnostic;
use crate::efp::{EfpFlag, EfpKind};
use crate::rulelang::simple_name;
use crate::threatmodel::{severity_rank, AttackType, Classification, Severity};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Maximum width of any line produced by [`render_text`].
pub const TEXT_WIDTH: usize = 120;

/// One finding with everything attached to it downstream of analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportItem {
    pub finding: Finding,
    /// `None` when no catalog row matched.
    pub classification: Option<Classification>,
    pub efp_flags: Vec<EfpFlag>,
    /// Source path of the compilation unit.
    pub unit: String,
}

impl ReportItem {
    pub fn severity(&self) -> Option<Severity> {
        self.classification.as_ref().map(|c| c.severity)
    }

    pub fn severity_label(&self) -> &'static str {
        match self.severity() {
            Some(Severity::High) => "High",
            Some(Severity::Medium) => "Medium",
            Some(Severity::Low) => "Low",
            None => "none",
        }
    }
}

/// (severity desc, file, line, column, entryId); unclassified last. Remaining
/// ties fall back to the finding order so the sort is total.
pub fn item_order(a: &ReportItem, b: &ReportItem) -> Ordering {
    let key = |i: &ReportItem| {
        (
            Reverse(i.severity().map_or(0, severity_rank)),
            i.finding.location.file.clone(),
            i.finding.location.line,
            i.finding.location.column,
            i.classification.as_ref().map(|c| c.entry_id.clone()).unwrap_or_default(),
        )
    };
    key(a)
        .cmp(&key(b))
        .then_with(|| crate::analysis::finding_order(&a.finding, &b.finding))
        .then_with(|| a.unit.cmp(&b.unit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RuleClassCount {
    pub misuse_count: usize,
    pub affected_unit_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Aggregates {
    pub total: usize,
    pub unclassified: usize,
    pub per_rule_class: BTreeMap<String, RuleClassCount>,
    pub per_error_type: BTreeMap<ErrorType, usize>,
    pub per_attack_type_severity: BTreeMap<AttackType, BTreeMap<Severity, usize>>,
    pub efp_flag_counts: BTreeMap<EfpKind, usize>,
}

pub fn aggregate(items: &[ReportItem]) -> Aggregates {
    let mut a = Aggregates {
        total: items.len(),
        per_error_type: ErrorType::ALL.iter().map(|e| (*e, 0)).collect(),
        per_attack_type_severity: AttackType::ALL
            .iter()
            .map(|t| (*t, Severity::ALL.iter().map(|s| (*s, 0)).collect()))
            .collect(),
        efp_flag_counts: EfpKind::ALL.iter().map(|k| (*k, 0)).collect(),
        ..Aggregates::default()
    };
    let mut units: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for i in items {
        let f = &i.finding;
        a.per_rule_class.entry(f.rule_class.clone()).or_default().misuse_count += 1;
        units.entry(&f.rule_class).or_default().insert(&i.unit);
        *a.per_error_type.entry(f.error_type).or_default() += 1;
        match &i.classification {
            Some(c) => {
                *a.per_attack_type_severity
                    .entry(c.attack_type)
                    .or_default()
                    .entry(c.severity)
                    .or_default() += 1
            }
            None => a.unclassified += 1,
        }
        for fl in &i.efp_flags {
            *a.efp_flag_counts.entry(fl.kind).or_default() += 1;
        }
    }
    for (class, u) in units {
        a.per_rule_class.get_mut(class).unwrap().affected_unit_count = u.len();
    }
    a
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub rule_pack_version: String,
    pub threat_model_version: String,
    pub findings: Vec<ReportItem>,
    pub aggregates: Aggregates,
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    /// Sorts items and diagnostics and computes the aggregates.
    pub fn new(
        rule_pack_version: impl Into<String>,
        threat_model_version: impl Into<String>,
        mut findings: Vec<ReportItem>,
        mut diagnostics: Vec<Diagnostic>,
    ) -> Report {
        findings.sort_by(item_order);
        diagnostics.sort();
        diagnostics.dedup();
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            tool_version: crate::TOOL_VERSION.to_string(),
            rule_pack_version: rule_pack_version.into(),
            threat_model_version: threat_model_version.into(),
            aggregates: aggregate(&findings),
            findings,
            diagnostics,
        }
    }
}

/// Pretty JSON with lexicographically sorted keys and a trailing newline.
pub fn render_json(report: &Report) -> String {
    // Value's object map is a BTreeMap, so going through it sorts every key.
    let v = serde_json::to_value(report).expect("report is always serializable");
    let mut s = serde_json::to_string_pretty(&v).expect("value is always serializable");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> serde_json::Result<Report> {
    serde_json::from_str(text)
}

fn clip(line: &str) -> String {
    if line.chars().count() <= TEXT_WIDTH {
        return line.to_string();
    }
    let mut s: String = line.chars().take(TEXT_WIDTH - 3).collect();
    s.push_str("...");
    s
}

/// Summary table by attack type and severity, then one line per finding.
pub fn render_text(report: &Report) -> String {
    let mut lines = Vec::new();
    let a = &report.aggregates;
    lines.push(format!(
        "cryptriage {}  rules {}  threat model {}",
        report.tool_version, report.rule_pack_version, report.threat_model_version
    ));
    lines.push(String::new());
    lines.push(format!("{:<40} {:>6} {:>6} {:>6} {:>6}", "Attack type", "High", "Medium", "Low", "Total"));
    let mut col = [0usize; 3];
    for t in AttackType::ALL {
        let row = &a.per_attack_type_severity[&t];
        let n: Vec<usize> = Severity::ALL.iter().map(|s| row.get(s).copied().unwrap_or(0)).collect();
        for (c, v) in col.iter_mut().zip(&n) {
            *c += v;
        }
        lines.push(format!(
            "{:<40} {:>6} {:>6} {:>6} {:>6}",
            t.display_name(),
            n[0],
            n[1],
            n[2],
            n.iter().sum::<usize>()
        ));
    }
    lines.push(format!(
        "{:<40} {:>6} {:>6} {:>6} {:>6}",
        "All",
        col[0],
        col[1],
        col[2],
        col.iter().sum::<usize>()
    ));
    lines.push(format!("{:<40} {:>27}", "Unclassified", a.unclassified));
    lines.push(String::new());
    lines.push(format!("{} finding(s)", report.findings.len()));
    for i in &report.findings {
        let f = &i.finding;
        let tag = match i.severity() {
            Some(s) => s.letter(),
            None => "-",
        };
        let name = i.classification.as_ref().map_or("Unclassified", |c| c.display_name.as_str());
        let mut line = format!(
            "[{tag}] {name}  {}  {} {}",
            f.location,
            f.error_type.abbrev(),
            simple_name(&f.rule_class)
        );
        if !i.efp_flags.is_empty() {
            let kinds: Vec<String> = i.efp_flags.iter().map(|k| format!("{:?}", k.kind)).collect();
            let _ = write!(line, "  efp: {}", kinds.join(","));
        }
        lines.push(line);
        lines.push(format!("      {}", f.message));
    }
    if !report.diagnostics.is_empty() {
        lines.push(String::new());
        lines.push(format!("{} diagnostic(s)", report.diagnostics.len()));
        for d in &report.diagnostics {
            lines.push(format!("  {d}"));
        }
    }
    let mut out = String::new();
    for l in lines {
        out.push_str(clip(&l).trim_end());
        out.push('\n');
    }
    out
}

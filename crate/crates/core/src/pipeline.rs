//! File discovery and the per-unit scan pipeline.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use walkdir::WalkDir;

use crate::analysis::analyze_unit_with_diagnostics;
use crate::diag::Diagnostic;
use crate::efp::{contexts_for_unit, flag_effective_false_positives, EfpConfig};
use crate::frontend::{inline_local_helpers, load_ir, parse_java, CompilationUnitIR};
use crate::report::{Report, ReportItem};
use crate::rulelang::{builtin_pack, simple_name, RuleSet};
use crate::threatmodel::ThreatModel;

pub const IR_SUFFIX: &str = ".ir.json";

#[derive(Debug, Clone)]
pub struct ScanOptions {
    pub rules: RuleSet,
    pub threat_model: ThreatModel,
    pub efp: EfpConfig,
    pub inline_depth: usize,
    /// When false, units that look like test code are skipped entirely.
    pub include_tests: bool,
    /// Worker threads; `None` uses the available parallelism.
    pub jobs: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            rules: builtin_pack(),
            threat_model: ThreatModel::builtin().clone(),
            efp: EfpConfig::default(),
            inline_depth: 1,
            include_tests: true,
            jobs: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("input path `{0}` does not exist")]
    MissingInput(PathBuf),
    #[error("no input paths given")]
    NoInputs,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// A discovered input file and the path used for it in reports.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct InputFile {
    pub path: PathBuf,
    /// Relative to the scan root, `/`-separated.
    pub display: String,
}

impl InputFile {
    pub fn is_ir(&self) -> bool {
        self.display.ends_with(IR_SUFFIX)
    }
}

fn rel(path: &Path, root: &Path) -> String {
    let p = path.strip_prefix(root).unwrap_or(path);
    let parts: Vec<String> = p.components().map(|c| c.as_os_str().to_string_lossy().into_owned()).collect();
    parts.join("/")
}

/// `.java` and `.ir.json` files under the inputs. Directories are walked
/// recursively and their files are named relative to the directory; a file
/// given directly is named by its file name.
pub fn discover(inputs: &[PathBuf]) -> Result<Vec<InputFile>, PipelineError> {
    if inputs.is_empty() {
        return Err(PipelineError::NoInputs);
    }
    let wanted = |p: &Path| {
        let n = p.file_name().map(|n| n.to_string_lossy()).unwrap_or_default();
        n.ends_with(".java") || n.ends_with(IR_SUFFIX)
    };
    let mut out = Vec::new();
    for input in inputs {
        if !input.exists() {
            return Err(PipelineError::MissingInput(input.clone()));
        }
        if input.is_file() {
            let root = input.parent().unwrap_or(Path::new(""));
            out.push(InputFile {
                path: input.clone(),
                display: rel(input, root),
            });
            continue;
        }
        for e in WalkDir::new(input).sort_by_file_name().into_iter().flatten() {
            if e.file_type().is_file() && wanted(e.path()) {
                out.push(InputFile {
                    path: e.path().to_path_buf(),
                    display: rel(e.path(), input),
                });
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Read and parse one input without inlining.
pub fn load_unit(file: &InputFile) -> Result<CompilationUnitIR, Diagnostic> {
    let text = fs::read_to_string(&file.path)
        .map_err(|e| Diagnostic::new("unreadable-file", format!("{}: {e}", file.display)))?;
    if file.is_ir() {
        load_ir(&text).map_err(|e| Diagnostic::new("invalid-ir", format!("{}: {e}", file.display)))
    } else {
        parse_java(&text, &file.display)
            .map_err(|e| Diagnostic::new("parse-error", e.to_string()))
    }
}

pub fn looks_like_test(unit: &CompilationUnitIR, cfg: &EfpConfig) -> bool {
    let seg = |s: &str| cfg.test_path_segments.iter().any(|t| t.eq_ignore_ascii_case(s));
    unit.source_path.split('/').any(seg)
        || unit.package_name.split('.').any(seg)
        || cfg
            .test_class_suffixes
            .iter()
            .any(|s| !s.is_empty() && simple_name(&unit.class_name).ends_with(s.as_str()))
}

/// Analyze, classify and flag one parsed unit.
pub fn scan_unit(unit: &CompilationUnitIR, opts: &ScanOptions) -> (Vec<ReportItem>, Vec<Diagnostic>) {
    let mut diags = unit.diagnostics.clone();
    if !opts.include_tests && looks_like_test(unit, &opts.efp) {
        return (Vec::new(), diags);
    }
    let inlined = inline_local_helpers(unit, opts.inline_depth);
    let (findings, d) = analyze_unit_with_diagnostics(&inlined, &opts.rules);
    diags.extend(d);
    let ctxs = contexts_for_unit(&inlined, &findings, &opts.efp);
    let items = findings
        .into_iter()
        .zip(ctxs)
        .map(|(f, ctx)| {
            let classification = opts.threat_model.classify(&f);
            let efp_flags = flag_effective_false_positives(&f, classification.as_ref(), &ctx, &opts.efp);
            ReportItem {
                finding: f,
                classification,
                efp_flags,
                unit: unit.source_path.clone(),
            }
        })
        .collect();
    (items, diags)
}

/// Scan already-loaded units into a report.
pub fn scan_units(units: &[CompilationUnitIR], opts: &ScanOptions) -> Report {
    let (items, diags): (Vec<_>, Vec<_>) = units.iter().map(|u| scan_unit(u, opts)).unzip();
    build_report(items, diags, opts)
}

fn build_report(items: Vec<Vec<ReportItem>>, diags: Vec<Vec<Diagnostic>>, opts: &ScanOptions) -> Report {
    Report::new(
        opts.rules.pack_version.clone(),
        opts.threat_model.version.clone(),
        items.into_iter().flatten().collect(),
        diags.into_iter().flatten().collect(),
    )
}

/// Discover, load and scan files in parallel. Unreadable or unparsable
/// files become diagnostics; the merge is independent of worker count.
pub fn scan_paths(inputs: &[PathBuf], opts: &ScanOptions) -> Result<Report, PipelineError> {
    let files = discover(inputs)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder.build().map_err(|e| PipelineError::Pool(e.to_string()))?;
    let results: Vec<(Vec<ReportItem>, Vec<Diagnostic>)> = pool.install(|| {
        files
            .par_iter()
            .map(|f| {
                log::debug!("scanning {}", f.display);
                match load_unit(f) {
                    Ok(u) => scan_unit(&u, opts),
                    Err(d) => {
                        log::warn!("{d}");
                        (Vec::new(), vec![d])
                    }
                }
            })
            .collect()
    });
    let (items, diags) = results.into_iter().unzip();
    Ok(build_report(items, diags, opts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_units_can_be_excluded() {
        let u = parse_java(
            r#"import java.security.MessageDigest;
class HashTest { void h(byte[] b) { MessageDigest md = MessageDigest.getInstance("MD5"); md.digest(b); } }"#,
            "HashTest.java",
        )
        .unwrap();
        let mut opts = ScanOptions::default();
        assert_eq!(scan_units(std::slice::from_ref(&u), &opts).findings.len(), 1);
        opts.include_tests = false;
        assert!(scan_units(&[u], &opts).findings.is_empty());
    }

    #[test]
    fn discovery_names_files_relative_to_root() {
        let d = tempfile::tempdir().unwrap();
        fs::create_dir_all(d.path().join("a/b")).unwrap();
        fs::write(d.path().join("a/b/X.java"), "class X {}").unwrap();
        fs::write(d.path().join("a/notes.txt"), "").unwrap();
        let got = discover(&[d.path().to_path_buf()]).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].display, "a/b/X.java");
        assert!(matches!(
            discover(&[d.path().join("missing")]),
            Err(PipelineError::MissingInput(_))
        ));
    }
}

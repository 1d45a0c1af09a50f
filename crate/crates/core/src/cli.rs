//! Command-line interface of the `cryptriage` binary.
//!
//! Precedence for every setting: command-line flag, then `CRYPTRIAGE_*`
//! environment variable, then the TOML config file, then the default.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::efp::EfpConfig;
use crate::frontend::dump_ir_string;
use crate::pipeline::{discover, load_unit, scan_paths, ScanOptions, IR_SUFFIX};
use crate::report::{render_json, render_text, Report};
use crate::rulelang::{builtin_pack, lint_rule, load_rule_pack, RuleSet};
use crate::threatmodel::{severity_rank, Severity, ThreatModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "cryptriage", version, about = "Find and triage crypto API misuses in Java code")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scan Java sources (or `.ir.json` files) and report misuses.
    Scan(ScanArgs),
    /// Parse and validate a rule pack and print automaton statistics.
    RulesLint(LintArgs),
    /// Write the IR of each Java file before helper inlining.
    EmitIr(EmitArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailOn {
    High,
    Medium,
    Low,
    Never,
}

impl FailOn {
    pub fn threshold(self) -> Option<Severity> {
        match self {
            FailOn::High => Some(Severity::High),
            FailOn::Medium => Some(Severity::Medium),
            FailOn::Low => Some(Severity::Low),
            FailOn::Never => None,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Files or directories to scan.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Rule pack directory; the built-in starter pack when omitted.
    #[arg(long, env = "CRYPTRIAGE_RULES")]
    pub rules: Option<PathBuf>,
    /// Threat model JSON replacing the built-in catalog.
    #[arg(long, env = "CRYPTRIAGE_THREAT_MODEL")]
    pub threat_model: Option<PathBuf>,
    #[arg(long, value_enum, env = "CRYPTRIAGE_FORMAT")]
    pub format: Option<Format>,
    /// Write the report here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Lowest severity that makes the scan exit with 1 [default: high].
    #[arg(long, value_enum, env = "CRYPTRIAGE_FAIL_ON")]
    pub fail_on: Option<FailOn>,
    /// Ignore findings carrying an EFP flag when applying --fail-on.
    #[arg(long, env = "CRYPTRIAGE_DEMOTE_EFP", num_args = 0..=1, default_missing_value = "true")]
    pub demote_efp: Option<bool>,
    /// Scan files that look like tests [default: true].
    #[arg(long, env = "CRYPTRIAGE_INCLUDE_TESTS", num_args = 0..=1, default_missing_value = "true")]
    pub include_tests: Option<bool>,
    /// Depth of local helper inlining [default: 1].
    #[arg(long, env = "CRYPTRIAGE_INLINE_DEPTH")]
    pub inline_depth: Option<usize>,
    /// Worker threads [default: available parallelism].
    #[arg(long, short, env = "CRYPTRIAGE_JOBS")]
    pub jobs: Option<usize>,
    /// TOML config file.
    #[arg(long, env = "CRYPTRIAGE_CONFIG")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LintArgs {
    /// Rule pack directory; the built-in starter pack when omitted.
    #[arg(long, env = "CRYPTRIAGE_RULES")]
    pub rules: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmitArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Directory receiving one `<path>.ir.json` per Java file.
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Contents of the `--config` file. Keys mirror the long flag names.
#[derive(Debug, Default, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub rules: Option<PathBuf>,
    pub threat_model: Option<PathBuf>,
    pub format: Option<Format>,
    pub fail_on: Option<FailOn>,
    pub demote_efp: Option<bool>,
    pub include_tests: Option<bool>,
    pub inline_depth: Option<usize>,
    pub jobs: Option<usize>,
    pub efp: Option<EfpConfig>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg: FileConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.rules, &mut cfg.threat_model].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Fully merged scan settings.
#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub inputs: Vec<PathBuf>,
    pub rules: Option<PathBuf>,
    pub threat_model: Option<PathBuf>,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub fail_on: FailOn,
    pub demote_efp: bool,
    pub include_tests: bool,
    pub inline_depth: usize,
    pub jobs: Option<usize>,
    pub efp: EfpConfig,
}

impl ScanConfig {
    pub fn resolve(a: ScanArgs) -> Result<ScanConfig, String> {
        let file = match &a.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        if a.jobs.or(file.jobs) == Some(0) {
            return Err("--jobs must be at least 1".into());
        }
        Ok(ScanConfig {
            inputs: a.inputs,
            rules: a.rules.or(file.rules),
            threat_model: a.threat_model.or(file.threat_model),
            format: a.format.or(file.format).unwrap_or(Format::Json),
            output: a.output,
            fail_on: a.fail_on.or(file.fail_on).unwrap_or(FailOn::High),
            demote_efp: a.demote_efp.or(file.demote_efp).unwrap_or(false),
            include_tests: a.include_tests.or(file.include_tests).unwrap_or(true),
            inline_depth: a.inline_depth.or(file.inline_depth).unwrap_or(1),
            jobs: a.jobs.or(file.jobs),
            efp: file.efp.unwrap_or_default(),
        })
    }
}

/// Exit code for a finished scan.
pub fn gate(report: &Report, fail_on: FailOn, demote_efp: bool) -> i32 {
    let Some(min) = fail_on.threshold() else {
        return EXIT_OK;
    };
    let failing = report.findings.iter().any(|i| {
        i.severity().is_some_and(|s| severity_rank(s) >= severity_rank(min))
            && !(demote_efp && !i.efp_flags.is_empty())
    });
    if failing {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    }
}

fn load_rules(dir: Option<&Path>, err: &mut dyn Write) -> Result<RuleSet, String> {
    match dir {
        None => Ok(builtin_pack()),
        Some(d) => {
            let load = load_rule_pack(d).map_err(|e| e.to_string())?;
            for w in &load.warnings {
                let _ = writeln!(err, "warning: {w}");
            }
            Ok(load.rules)
        }
    }
}

pub fn scan(cfg: &ScanConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let rules = load_rules(cfg.rules.as_deref(), err)?;
    let threat_model = match &cfg.threat_model {
        Some(p) => ThreatModel::load(p).map_err(|e| e.to_string())?,
        None => ThreatModel::builtin().clone(),
    };
    let opts = ScanOptions {
        rules,
        threat_model,
        efp: cfg.efp.clone(),
        inline_depth: cfg.inline_depth,
        include_tests: cfg.include_tests,
        jobs: cfg.jobs,
    };
    let report = scan_paths(&cfg.inputs, &opts).map_err(|e| e.to_string())?;
    let text = match cfg.format {
        Format::Json => render_json(&report),
        Format::Text => render_text(&report),
    };
    match &cfg.output {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => out.write_all(text.as_bytes()).map_err(|e| e.to_string())?,
    }
    Ok(gate(&report, cfg.fail_on, cfg.demote_efp))
}

pub fn rules_lint(a: &LintArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, String> {
    let rules = load_rules(a.rules.as_deref(), err)?;
    if a.rules.is_none() {
        for r in rules.iter() {
            for w in lint_rule(r) {
                let _ = writeln!(err, "warning: {w}");
            }
        }
    }
    let w = |out: &mut dyn Write, s: String| out.write_all(s.as_bytes()).map_err(|e| e.to_string());
    w(out, format!("{} rules (pack {})\n", rules.len(), rules.pack_version))?;
    for r in rules.iter() {
        w(
            out,
            format!(
                "{}: states={} accepting={} transitions={} events={} constraints={} requires={} ensures={}\n",
                r.class_name,
                r.automaton.state_count(),
                r.automaton.accepting().len(),
                r.automaton.transition_count(),
                r.events.len(),
                r.constraints.len(),
                r.requires.len(),
                r.ensures.len()
            ),
        )?;
    }
    Ok(EXIT_OK)
}

pub fn emit_ir(a: &EmitArgs, err: &mut dyn Write) -> Result<i32, String> {
    let files = discover(&a.inputs).map_err(|e| e.to_string())?;
    let mut code = EXIT_OK;
    for f in files.iter().filter(|f| !f.is_ir()) {
        match load_unit(f) {
            Ok(u) => {
                let dest = a.out_dir.join(format!("{}{IR_SUFFIX}", f.display.trim_end_matches(".java")));
                if let Some(p) = dest.parent() {
                    fs::create_dir_all(p).map_err(|e| format!("cannot create {}: {e}", p.display()))?;
                }
                fs::write(&dest, dump_ir_string(&u)).map_err(|e| format!("cannot write {}: {e}", dest.display()))?;
            }
            Err(d) => {
                let _ = writeln!(err, "error: {d}");
                code = EXIT_ERROR;
            }
        }
    }
    Ok(code)
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Scan(a) => ScanConfig::resolve(a).and_then(|c| scan(&c, out, err)),
        Command::RulesLint(a) => rules_lint(&a, out, err),
        Command::EmitIr(a) => emit_ir(&a, err),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

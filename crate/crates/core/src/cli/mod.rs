//! Command driver behind the `cantorflow` binary: builds systems and chains
//! from a [`RunConfig`], runs one suite and assembles a [`Report`].

mod args;
mod commands;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

pub use args::Cli;

use crate::error::{Error, Result};

pub const REPORT_SCHEMA: &str = "cantorflow.report.v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    System,
    Towers,
    K0,
    ExactSequence,
    OrderIso,
    Flow,
    Flowbox,
    KernelsCheck,
    Bratteli,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::System => "system",
            Command::Towers => "towers",
            Command::K0 => "k0",
            Command::ExactSequence => "verify exact-sequence",
            Command::OrderIso => "verify order-iso",
            Command::Flow => "suspension flow",
            Command::Flowbox => "suspension flowbox",
            Command::KernelsCheck => "kernels check",
            Command::Bratteli => "bratteli",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub system: String,
    pub slices: Option<String>,
    pub auto_nest: Option<usize>,
    pub point: Option<String>,
    pub depth: Option<usize>,
    pub stages: Option<usize>,
    pub grid: usize,
    pub tau: String,
    pub time: String,
    pub samples: Option<usize>,
    pub seed: u64,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub json: bool,
    #[serde(skip)]
    pub timings: bool,
}

impl RunConfig {
    pub fn new(command: Command, system: &str) -> Self {
        RunConfig {
            command,
            system: system.to_string(),
            slices: None,
            auto_nest: None,
            point: None,
            depth: None,
            stages: None,
            grid: 64,
            tau: "1".into(),
            time: "1/2".into(),
            samples: None,
            seed: 0,
            out: None,
            json: false,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: RunConfig,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub result: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, f64>>,
    /// Side artifact such as DOT source.
    #[serde(skip)]
    pub artifact: Option<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(if c.pass { "ok    " } else { "FAIL  " });
            s.push_str(&c.name);
            s.push('\n');
        }
        s.push_str(&format!(
            "{}: {}\n",
            self.command,
            if self.passed { "passed" } else { "failed" }
        ));
        s
    }
}

/// Dispatches `cfg.command`.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    let start = Instant::now();
    let out = commands::dispatch(cfg)?;
    let passed = out.checks.iter().all(|c| c.pass);
    let timings_ms = cfg.timings.then(|| {
        let mut m = BTreeMap::new();
        m.insert("total".to_string(), start.elapsed().as_secs_f64() * 1e3);
        m
    });
    Ok(Report {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        config: cfg.clone(),
        passed,
        checks: out.checks,
        result: out.result,
        timings_ms,
        artifact: out.artifact,
    })
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        Error::Invalid(format!("output path {} has no file name", path.display()))
    })?;
    let mut tmp_name = OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = dir.join(tmp_name);
    let res = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if res.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(res?)
}

/// Runs the command line and returns the process exit code: 0 when every
/// check passes, 1 when one fails, 2 on errors.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = cli.into_config();
    match execute(&cfg) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn execute(cfg: &RunConfig) -> Result<i32> {
    let report = run(cfg)?;
    let dot = report.artifact.as_deref();
    if let Some(path) = &cfg.out {
        match dot {
            Some(d) => write_atomic(path, d.as_bytes())?,
            None => write_atomic(path, report.to_json().as_bytes())?,
        }
    }
    let mut stdout = std::io::stdout().lock();
    if cfg.json {
        stdout.write_all(report.to_json().as_bytes())?;
    } else if let (Some(d), None) = (dot, &cfg.out) {
        stdout.write_all(d.as_bytes())?;
    } else {
        stdout.write_all(report.summary().as_bytes())?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

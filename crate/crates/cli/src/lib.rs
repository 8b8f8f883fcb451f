//! Scenario runner for the imcf-core verification suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod output;
pub mod scenario;

use anyhow::{Context, Result};
use config::ScenarioConfig;
use scenario::{run_scenario, Report};
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

/// Exit status when every verdict passes.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a mathematical verdict fails.
pub const EXIT_VERDICT_FAILED: i32 = 1;
/// Exit status for numerical failures and invalid input.
pub const EXIT_ERROR: i32 = 2;

/// Shipped scenario files, by name.
pub const SHIPPED: [(&str, &str); 6] = [
    (
        "centered_sphere",
        include_str!("../scenarios/centered_sphere.toml"),
    ),
    (
        "offcenter_sphere",
        include_str!("../scenarios/offcenter_sphere.toml"),
    ),
    (
        "perturbed_convex",
        include_str!("../scenarios/perturbed_convex.toml"),
    ),
    (
        "balance_demo",
        include_str!("../scenarios/balance_demo.toml"),
    ),
    (
        "conjecture_explorer",
        include_str!("../scenarios/conjecture_explorer.toml"),
    ),
    (
        "identity_suite",
        include_str!("../scenarios/identity_suite.toml"),
    ),
];

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            EXIT_ERROR
        } else if self.summary.all_passed {
            EXIT_PASS
        } else {
            EXIT_VERDICT_FAILED
        }
    }
}

/// Runs `config` and writes its trace, summary and plots.
pub fn execute(config: &ScenarioConfig) -> Result<Report> {
    let report = run_scenario(config)?;
    write_artifacts(config, &report)?;
    Ok(report)
}

pub fn write_artifacts(config: &ScenarioConfig, report: &Report) -> Result<()> {
    let dir = &config.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let trace = config.trace_path();
    let file =
        File::create(&trace).with_context(|| format!("cannot create {}", trace.display()))?;
    output::write_trace(BufWriter::new(file), &report.records)?;
    let summary = config.summary_path();
    std::fs::write(&summary, output::to_json(&report.summary)?)
        .with_context(|| format!("cannot write {}", summary.display()))?;
    if config.output.plots {
        output::write_plots(dir, &report.records)?;
    }
    Ok(())
}

/// Loads a shipped scenario with its output redirected under `root`.
pub fn shipped_config(name: &str, text: &str, root: &Path) -> Result<ScenarioConfig> {
    let mut config =
        ScenarioConfig::parse(text).with_context(|| format!("shipped scenario {name}"))?;
    config.output.dir = root.join(&config.output.dir);
    Ok(config)
}

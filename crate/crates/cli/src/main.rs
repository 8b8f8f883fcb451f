#![allow(clippy::neg_cmp_op_on_partial_ord)]

use anyhow::Result;
use clap::{Parser, Subcommand};
use imcf_cli::config::ScenarioConfig;
use imcf_cli::scenario::Report;
use imcf_cli::{execute, output, shipped_config, EXIT_ERROR, EXIT_PASS, SHIPPED};
use imcf_core::functionals::FunctionalRecord;
use imcf_core::oracle::{offcenter_oracle, sphere_closed_forms, OffCenterOracle};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "imcf-lab",
    version,
    about = "Inverse mean curvature flow experiments in S^n"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { config: PathBuf },
    /// Run every shipped scenario.
    Suite {
        /// Directory receiving one subdirectory per scenario.
        #[arg(long, default_value = "imcf-suite")]
        out: PathBuf,
    },
    /// Print closed-form and quadrature reference values as JSON.
    Oracle {
        #[command(subcommand)]
        target: OracleTarget,
    },
}

#[derive(Subcommand)]
enum OracleTarget {
    /// A geodesic sphere of radius r0 whose center lies at distance d.
    Sphere {
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        r0: f64,
        #[arg(long, default_value_t = 0.0)]
        d: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config } => run(config),
        Command::Suite { out } => suite(out),
        Command::Oracle {
            target: OracleTarget::Sphere { n, r0, d },
        } => oracle(n, r0, d),
    };
    ExitCode::from(code as u8)
}

fn report_line(name: &str, report: &Report) {
    let failed: Vec<String> = report
        .summary
        .verdicts
        .iter()
        .filter(|v| !v.passed)
        .map(|v| format!("{} ({})", v.statement, v.check))
        .collect();
    let status = match report.exit_code() {
        EXIT_PASS => "PASS".to_string(),
        EXIT_ERROR => format!("ERROR {}", report.failure.as_deref().unwrap_or("")),
        _ => format!("FAIL {}", failed.join("; ")),
    };
    println!(
        "{name}: {status} [{} verdicts]",
        report.summary.verdicts.len()
    );
}

fn run(path: PathBuf) -> i32 {
    let result = ScenarioConfig::load(&path).and_then(|c| execute(&c));
    match result {
        Ok(report) => {
            report_line(&path.display().to_string(), &report);
            if let Some(failure) = &report.failure {
                eprintln!("error: {failure}");
            }
            report.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn suite(out: PathBuf) -> i32 {
    let results: Vec<(&str, Result<Report>)> = std::thread::scope(|s| {
        let handles: Vec<_> = SHIPPED
            .iter()
            .map(|&(name, text)| {
                let out = &out;
                (
                    name,
                    s.spawn(move || execute(&shipped_config(name, text, out)?)),
                )
            })
            .collect();
        handles
            .into_iter()
            .map(|(name, h)| (name, h.join().expect("scenario thread panicked")))
            .collect()
    });
    let mut code = EXIT_PASS;
    for (name, result) in results {
        let this = match result {
            Ok(report) => {
                report_line(name, &report);
                report.exit_code()
            }
            Err(e) => {
                eprintln!("{name}: error: {e:#}");
                EXIT_ERROR
            }
        };
        code = code.max(this);
    }
    code
}

#[derive(Serialize)]
struct ClosedForms {
    area: f64,
    #[serde(rename = "A")]
    area_ratio: f64,
    #[serde(rename = "I")]
    rho_h: f64,
    #[serde(rename = "J")]
    support: f64,
    #[serde(rename = "L")]
    weighted_volume: f64,
    #[serde(rename = "calK")]
    area_power: f64,
    #[serde(rename = "Q")]
    q: f64,
    #[serde(rename = "H")]
    mean_curvature: f64,
    lambda: f64,
    rho_over_h: f64,
}

impl From<&FunctionalRecord> for ClosedForms {
    fn from(r: &FunctionalRecord) -> Self {
        Self {
            area: r.area,
            area_ratio: r.area_ratio,
            rho_h: r.rho_h,
            support: r.support,
            weighted_volume: r.weighted_volume,
            area_power: r.area_power,
            q: r.monotone_q,
            mean_curvature: r.min_h,
            lambda: r.lambda_min,
            rho_over_h: r.rho_over_h,
        }
    }
}

#[derive(Serialize)]
struct OffCenter {
    d: f64,
    #[serde(rename = "L")]
    weighted_volume: f64,
    #[serde(rename = "L_center")]
    weighted_volume_center: f64,
    #[serde(rename = "I")]
    rho_h: f64,
    rhs_naive: f64,
    naive_gap: f64,
    theorem_gap: f64,
}

impl From<&OffCenterOracle> for OffCenter {
    fn from(o: &OffCenterOracle) -> Self {
        Self {
            d: o.spec.d,
            weighted_volume: o.weighted_volume,
            weighted_volume_center: o.weighted_volume_center,
            rho_h: o.rho_h,
            rhs_naive: o.rhs_naive,
            naive_gap: o.naive_gap,
            theorem_gap: o.theorem_gap,
        }
    }
}

#[derive(Serialize)]
struct OracleOutput {
    n: usize,
    r0: f64,
    centered: ClosedForms,
    #[serde(skip_serializing_if = "Option::is_none")]
    offcenter: Option<OffCenter>,
}

fn oracle(n: usize, r0: f64, d: f64) -> i32 {
    let result = (|| -> Result<String> {
        let centered = sphere_closed_forms(n, r0)?;
        let offcenter = if d > 0.0 {
            Some(OffCenter::from(&offcenter_oracle(n, r0, d)?))
        } else {
            None
        };
        output::to_json(&OracleOutput {
            n,
            r0,
            centered: ClosedForms::from(&centered),
            offcenter,
        })
    })();
    match result {
        Ok(text) => {
            print!("{text}");
            EXIT_PASS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

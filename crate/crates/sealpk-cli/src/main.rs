//! `sealpk` — scenario runner for the sealable protection-key simulator.
//!
//! Exit status: 0 when the run completed and every applicable expectation
//! was met, 1 when an expectation went unmet, 2 on parse, validation, or
//! I/O errors.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result, bail};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sealpk_sim::machine::cost_report;
use sealpk_sim::report::{ReportFormat, build_report, render_log, render_report};
use sealpk_sim::scenario::{Scenario, evaluate_expectations, parse_scenario, run_scenario};
use sealpk_sim::shadow_stack::{
    CaseStudyOptions, CaseStudyRun, CompareReport, Variant, compare_costs, run_case_study,
};
use sealpk_sim::{CostReport, PermPair, builtins};

#[derive(Parser)]
#[command(name = "sealpk", version, about = "Sealable protection-key simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, ValueEnum)]
enum ReportArg {
    Json,
    #[default]
    Text,
}

impl From<ReportArg> for ReportFormat {
    fn from(arg: ReportArg) -> ReportFormat {
        match arg {
            ReportArg::Json => ReportFormat::Json,
            ReportArg::Text => ReportFormat::Text,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum)]
enum VariantArg {
    Unprotected,
    SealpkWr,
    SealpkRdrw,
    Mprotect,
}

impl From<VariantArg> for Variant {
    fn from(arg: VariantArg) -> Variant {
        match arg {
            VariantArg::Unprotected => Variant::Unprotected,
            VariantArg::SealpkWr => Variant::SealPkWr,
            VariantArg::SealpkRdrw => Variant::SealPkRdRw,
            VariantArg::Mprotect => Variant::Mprotect,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and check its expectations.
    Run {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        report: ReportArg,
        /// Write the full event log (JSON) to this path.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Override config fields, e.g. lazy_dealloc=false or cost.wrpkr=11.
        #[arg(long = "config", value_name = "KEY=VALUE")]
        config: Vec<String>,
    },
    /// Run a shipped scenario by name (see `list`).
    Builtin {
        name: String,
        #[arg(long, value_enum, default_value_t)]
        report: ReportArg,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long = "config", value_name = "KEY=VALUE")]
        config: Vec<String>,
    },
    /// List the shipped scenarios.
    List,
    /// Run a Call/Return trace file under one shadow-stack variant.
    Shadowstack {
        file: PathBuf,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value_t)]
        report: ReportArg,
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long = "config", value_name = "KEY=VALUE")]
        config: Vec<String>,
        /// Skip the permission seal over the instrumentation range.
        #[arg(long)]
        no_perm_seal: bool,
        /// Allocate a deny-all key sharing the shadow key's PKR row.
        #[arg(long)]
        row_mate: bool,
    },
    /// Run a trace under all four variants and compare toggle costs.
    ShadowstackCompare {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        report: ReportArg,
        #[arg(long = "config", value_name = "KEY=VALUE")]
        config: Vec<String>,
        #[arg(long)]
        no_perm_seal: bool,
        #[arg(long)]
        row_mate: bool,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("sealpk: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            file,
            report,
            log,
            config,
        } => {
            let text =
                fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let mut scenario = parse_scenario(&text)?;
            apply_overrides(&mut scenario, &config)?;
            run_and_report(&scenario, report, log.as_deref())
        }
        Command::Builtin {
            name,
            report,
            log,
            config,
        } => {
            let Some(mut scenario) = builtins::builtin(&name) else {
                bail!(
                    "unknown builtin `{name}`; available: {}",
                    builtins::NAMES.join(", ")
                );
            };
            apply_overrides(&mut scenario, &config)?;
            run_and_report(&scenario, report, log.as_deref())
        }
        Command::List => {
            for (name, description) in builtins::NAMES.iter().zip(builtins::DESCRIPTIONS) {
                println!("{name:<22} {description}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Shadowstack {
            file,
            variant,
            report,
            log,
            config,
            no_perm_seal,
            row_mate,
        } => {
            let scenario = load_trace(&file, &config)?;
            let options = case_options(no_perm_seal, row_mate);
            let run = run_case_study(&scenario, variant.into(), &options)?;
            if let Some(path) = log {
                fs::write(&path, render_log(run.machine.log()))
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            print_case_study(&run, report);
            Ok(ExitCode::SUCCESS)
        }
        Command::ShadowstackCompare {
            file,
            report,
            config,
            no_perm_seal,
            row_mate,
        } => {
            let scenario = load_trace(&file, &config)?;
            let options = case_options(no_perm_seal, row_mate);
            let compared = compare_costs(&scenario, &options)?;
            print_compare(&compared, report);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_trace(file: &std::path::Path, overrides: &[String]) -> Result<Scenario> {
    let text = fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let mut scenario = parse_scenario(&text)?;
    apply_overrides(&mut scenario, overrides)?;
    Ok(scenario)
}

fn case_options(no_perm_seal: bool, row_mate: bool) -> CaseStudyOptions {
    CaseStudyOptions {
        perm_seal: !no_perm_seal,
        row_mate: row_mate.then_some(PermPair::DENY_ALL),
    }
}

/// Applies `key=value` config overrides to a parsed scenario.
fn apply_overrides(scenario: &mut Scenario, overrides: &[String]) -> Result<()> {
    for entry in overrides {
        let Some((key, value)) = entry.split_once('=') else {
            bail!("config override `{entry}` is not of the form KEY=VALUE");
        };
        let config = &mut scenario.config;
        match key {
            "lazy_dealloc" => config.lazy_dealloc = parse_value(key, value)?,
            "cam_capacity" => {
                config.cam_capacity = parse_value(key, value)?;
                if config.cam_capacity < 1 {
                    bail!("cam_capacity must be at least 1");
                }
            }
            "continue_on_fault" => config.continue_on_fault = parse_value(key, value)?,
            _ => match key.strip_prefix("cost.") {
                Some("load") => config.cost.load = parse_value(key, value)?,
                Some("store") => config.cost.store = parse_value(key, value)?,
                Some("wrpkr") => config.cost.wrpkr = parse_value(key, value)?,
                Some("rdpkr") => config.cost.rdpkr = parse_value(key, value)?,
                Some("mprotect") => config.cost.mprotect = parse_value(key, value)?,
                Some("pkey_syscall") => config.cost.pkey_syscall = parse_value(key, value)?,
                Some("context_switch") => config.cost.context_switch = parse_value(key, value)?,
                Some("cam_refill") => config.cost.cam_refill = parse_value(key, value)?,
                _ => bail!("unknown config key `{key}`"),
            },
        }
    }
    Ok(())
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow::anyhow!("invalid value `{value}` for config key `{key}`"))
}

fn run_and_report(
    scenario: &Scenario,
    format: ReportArg,
    log_path: Option<&std::path::Path>,
) -> Result<ExitCode> {
    let machine = run_scenario(scenario);
    let expectations = evaluate_expectations(scenario, &machine);
    let all_met = expectations.all_met();
    if let Some(path) = log_path {
        fs::write(path, render_log(machine.log()))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let report = build_report(&machine, Some(expectations));
    println!("{}", render_report(&report, format.into()));
    Ok(if all_met {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct CaseStudyJson {
    summary: sealpk_sim::shadow_stack::CaseStudySummary,
    cycles: CostReport,
}

fn print_case_study(run: &CaseStudyRun, format: ReportArg) {
    match format {
        ReportArg::Json => {
            let out = CaseStudyJson {
                summary: run.summary(),
                cycles: cost_report(run.machine.log()),
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("serializes")
            );
        }
        ReportArg::Text => {
            let summary = run.summary();
            println!("variant: {}", summary.variant);
            println!(
                "shadow pages: {} x{} (pkey {})",
                summary.shadow_pages.start(),
                summary.shadow_pages.count(),
                summary
                    .shadow_pkey
                    .map_or("none".to_string(), |k| k.to_string())
            );
            println!("calls: {}", summary.calls);
            println!(
                "cycles: setup={} trace={} total={}",
                summary.setup_cycles, summary.trace_cycles, summary.total_cycles
            );
            let d = &summary.detection;
            println!(
                "detection: mismatches={} blocked_shadow_stores={} silent_shadow_writes={}",
                d.mismatches.len(),
                d.blocked_shadow_stores,
                d.silent_shadow_writes
            );
            for m in &d.mismatches {
                println!(
                    "  ROP flagged: {} return (event {}) expected {:#x}, got {:#x}",
                    m.thread, m.event, m.expected, m.actual
                );
            }
        }
    }
}

fn print_compare(report: &CompareReport, format: ReportArg) {
    match format {
        ReportArg::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(report).expect("serializes")
            );
        }
        ReportArg::Text => {
            println!("calls: {}", report.calls);
            println!(
                "{:<14} {:>12} {:>12} {:>10}",
                "variant", "trace_cycles", "toggle/call", "flags"
            );
            for row in &report.rows {
                println!(
                    "{:<14} {:>12} {:>12.1} {:>10}",
                    row.variant.name(),
                    row.trace_cycles,
                    row.toggle_cycles_per_call,
                    row.mismatches
                );
            }
            println!(
                "mprotect / sealpk-rdrw toggle ratio: {:.2}",
                report.mprotect_over_rdrw
            );
        }
    }
}

//! Command-line front end: run scenario files, generate example scenarios,
//! and execute the verification suites.
//!
//! Exit codes: 0 all checks passed, 1 some check failed, 2 input error.

use anyhow::Context;
use calab_core::filtered::Caps;
use calab_core::gen::{generate_example, ExampleKind, ExampleParams};
use calab_core::scenario::{build, run, Scenario};
use calab_core::suite::{run_all, run_suite, SUITE_NAMES};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "calab",
    version,
    about = "Exact verification bench for filtered modules over finite metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeFlag {
    /// Let the caps pick exhaustive / generator-reduced / sampled per check.
    Auto,
    /// Force exhaustive sweeps regardless of space size (can be slow).
    Exhaustive,
    /// Force sampled sweeps everywhere.
    Sampled,
}

#[derive(Args)]
struct CapsArgs {
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Search-mode policy.
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeFlag,
    /// Caps as `subset=14,pairs=10,trials=256`.
    #[arg(long)]
    caps: Option<String>,
}

impl CapsArgs {
    fn apply(&self, base: Caps) -> anyhow::Result<Caps> {
        let mut caps = base;
        if let Some(spec) = &self.caps {
            for part in spec.split(',') {
                let (k, v) = part
                    .split_once('=')
                    .with_context(|| format!("bad caps entry `{part}`"))?;
                let v: u64 = v
                    .trim()
                    .parse()
                    .with_context(|| format!("bad caps value `{v}`"))?;
                match k.trim() {
                    "subset" => caps.subset_points = v as usize,
                    "pairs" => caps.pair_points = v as usize,
                    "trials" => caps.trials = v as u32,
                    other => anyhow::bail!("unknown caps key `{other}`"),
                }
            }
        }
        match self.mode {
            ModeFlag::Auto => {}
            ModeFlag::Exhaustive => {
                caps.subset_points = 64;
                caps.pair_points = 32;
            }
            ModeFlag::Sampled => {
                caps.subset_points = 0;
                caps.pair_points = 0;
            }
        }
        Ok(caps)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and report per-check outcomes.
    Check {
        /// Path to the scenario JSON.
        scenario: PathBuf,
        #[command(flatten)]
        caps: CapsArgs,
        /// Write the machine-readable report here.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
    /// Generate a runnable example scenario.
    Gen {
        /// One of: zball-kernel, z2ball-chain, cycle-equivariant,
        /// idempotent, random.
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Parameters as `key=value` (n, lean-d, control-b, insular-d,
        /// broken).
        #[arg(long = "param")]
        params: Vec<String>,
    },
    /// Run a verification suite (or `all`).
    Suite {
        /// Suite name or `all`.
        name: String,
        #[command(flatten)]
        caps: CapsArgs,
        /// Write the suite summaries as JSON.
        #[arg(long)]
        json_out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Check {
            scenario,
            caps,
            json_out,
        } => {
            let text = std::fs::read_to_string(&scenario)
                .with_context(|| format!("reading {}", scenario.display()))?;
            let mut sc = Scenario::from_json(&text).context("parsing scenario")?;
            if let Some(seed) = caps.seed {
                sc.caps.seed = seed;
            }
            let effective = caps.apply(sc.caps.caps())?;
            sc.caps.subset_points = effective.subset_points;
            sc.caps.pair_points = effective.pair_points;
            sc.caps.trials = effective.trials;
            let built = build(sc).context("building scenario")?;
            let (report, timings) = run(&built).context("running scenario")?;
            print!("{}", report.render_text(&timings));
            if let Some(path) = json_out {
                std::fs::write(&path, report.to_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if report.failed() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Cmd::Gen {
            kind,
            seed,
            out,
            params,
        } => {
            let kind = ExampleKind::parse(&kind).with_context(|| {
                format!(
                    "unknown kind `{kind}`; expected one of {:?}",
                    ExampleKind::ALL
                )
            })?;
            let mut p = ExampleParams::default();
            for param in &params {
                let (k, v) = param
                    .split_once('=')
                    .with_context(|| format!("bad param `{param}`"))?;
                match k.trim() {
                    "n" => p.n = Some(v.trim().parse()?),
                    "lean-d" | "D" => p.lean_d = Some(v.trim().parse()?),
                    "control-b" | "b" => p.control_b = Some(v.trim().parse()?),
                    "insular-d" | "d" => p.insular_d = Some(v.trim().parse()?),
                    "broken" => p.broken = v.trim().parse()?,
                    other => anyhow::bail!("unknown param `{other}`"),
                }
            }
            let scenario = generate_example(kind, p, seed);
            let text = scenario.to_json();
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Suite {
            name,
            caps,
            json_out,
        } => {
            let effective = caps.apply(Caps::default())?;
            let seed = caps.seed.unwrap_or(0);
            let outcomes = if name == "all" {
                run_all(seed, &effective)
            } else {
                vec![run_suite(&name, seed, &effective).with_context(|| {
                    format!("unknown suite `{name}`; expected one of {SUITE_NAMES:?} or `all`")
                })?]
            };
            let mut any_failed = false;
            for o in &outcomes {
                println!("{}", o.line());
                for line in o.detail.lines() {
                    println!("    {line}");
                }
                any_failed |= !o.passed;
            }
            if let Some(path) = json_out {
                let rows: Vec<serde_json::Value> = outcomes
                    .iter()
                    .map(|o| {
                        serde_json::json!({
                            "name": o.name,
                            "passed": o.passed,
                            "cases_total": o.cases_total,
                            "cases_failed": o.cases_failed,
                            "detail": o.detail,
                        })
                    })
                    .collect();
                std::fs::write(&path, serde_json::to_string_pretty(&rows)? + "\n")
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(if any_failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
    }
}

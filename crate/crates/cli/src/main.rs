use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use matchmarket_cli::experiments::{self, scenarios_for};
use matchmarket_cli::output::{agent_labels, summarize, trace_csv, write_file};
use matchmarket_cli::{batch, load_scenario, LoadedScenario};

#[derive(Parser)]
#[command(name = "matchmarket", version, about = "Two-sided matching markets with UCB learners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; defaults to the file's `outputs.dir`, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds overriding the file.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario and write trace CSVs plus a summary JSON.
    Simulate(Common),
    /// Print the stable set of the true instance.
    Enumerate(Common),
    /// Print gap statistics and the three regret bounds.
    Bounds(Common),
    /// Zero-rule batch with providers proposing; per-agent regret and
    /// stable-matching visit counts.
    #[command(name = "example1-linear")]
    Example1Linear(Common),
    /// Full proportional cost under the pinned-random scheduler.
    #[command(name = "prop3-adversary")]
    Prop3Adversary(Common),
}

fn load(common: &Common) -> Result<LoadedScenario> {
    let mut loaded = load_scenario(&common.scenario)?;
    if let Some(seeds) = &common.seeds {
        anyhow::ensure!(!seeds.is_empty(), "--seeds needs at least one seed");
        loaded.seeds = seeds.clone();
        loaded.file.seeds = seeds.clone();
        loaded.scenario.seed = seeds[0];
    }
    Ok(loaded)
}

fn out_dir(common: &Common, loaded: &LoadedScenario) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| loaded.file.outputs.dir.clone())
        .unwrap_or_else(|| PathBuf::from("."))
}

fn trace_name(base: &str, seed: u64, many: bool) -> String {
    if !many {
        return base.to_string();
    }
    match base.rsplit_once('.') {
        Some((stem, ext)) => format!("{stem}_seed{seed}.{ext}"),
        None => format!("{base}_seed{seed}"),
    }
}

fn write_json(dir: &Path, name: &str, value: &impl serde::Serialize) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_file(&path, &bytes)?;
    Ok(path)
}

fn simulate(common: &Common) -> Result<()> {
    let loaded = load(common)?;
    let dir = out_dir(common, &loaded);
    let traces = batch::run_all(&scenarios_for(&loaded))?;
    let base = loaded.file.outputs.trace_csv.clone().unwrap_or_else(|| "trace.csv".into());
    let many = traces.len() > 1;
    for trace in &traces {
        let path = dir.join(trace_name(&base, trace.scenario.seed, many));
        write_file(&path, &trace_csv(trace)?)?;
        println!("wrote {}", path.display());
    }
    let summary = summarize(&loaded, &traces)?;
    let name = loaded.file.outputs.summary_json.clone().unwrap_or_else(|| "summary.json".into());
    let path = write_json(&dir, &name, &summary)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn enumerate(common: &Common) -> Result<()> {
    let loaded = load(common)?;
    let report = experiments::enumerate(&loaded)?;
    println!("{} stable matching(s) under {}:", report.matchings.len(), report.rule);
    for m in &report.matchings {
        println!("  {m}");
    }
    if let Some(dir) = &common.out {
        write_json(dir, "enumerate.json", &report)?;
    }
    Ok(())
}

fn bounds(common: &Common) -> Result<()> {
    let loaded = load(common)?;
    let report = experiments::bounds(&loaded)?;
    println!(
        "T = {}, sigma2 = {}, alpha = {}, delta_min = {}, delta_rho_min = {}",
        report.horizon, report.sigma2, report.alpha, report.gaps.delta_min, report.gaps.delta_rho_min
    );
    println!("{:<6} {:>12} {:>16} {:>16} {:>16}", "agent", "delta_max", "prop1_pessimal", "thm1", "thm2");
    let cell = |kind: &str, agent: &str| -> String {
        report.bounds[kind]
            .as_ref()
            .map_or_else(|| "n/a".to_string(), |m| format!("{:.6e}", m[agent]))
    };
    for agent in agent_labels(loaded.shape()) {
        println!(
            "{:<6} {:>12.6} {:>16} {:>16} {:>16}",
            agent,
            report.gaps.delta_max[&agent],
            cell("prop1_pessimal", &agent),
            cell("thm1", &agent),
            cell("thm2", &agent)
        );
    }
    if let Some(dir) = &common.out {
        write_json(dir, "bounds.json", &report)?;
    }
    Ok(())
}

fn example1_linear(common: &Common) -> Result<()> {
    let loaded = load(common)?;
    let report = experiments::example1_linear(&loaded)?;
    println!("stable set: {}", report.stable_set.join(", "));
    println!("checkpoints: {:?}", report.checkpoints);
    for (agent, curve) in &report.optimal {
        let verdict = report.classifier.as_ref().map(|c| format!("{:?}", c[agent].optimal));
        println!("  {agent} optimal regret {curve:?} {}", verdict.unwrap_or_default());
    }
    let holds = report.counts.iter().all(|c| c.identity_holds);
    println!("visit-count identity holds on every seed: {holds}");
    write_json(&out_dir(common, &loaded), "example1_linear.json", &report)?;
    Ok(())
}

fn prop3_adversary(common: &Common) -> Result<()> {
    let loaded = load(common)?;
    let report = experiments::prop3_adversary(&loaded)?;
    println!("checkpoints: {:?}", report.checkpoints);
    println!("  p0 (pinned)     {:?} {:?}", report.pinned, report.pinned_verdict);
    println!("  p1 (randomized) {:?} {:?}", report.randomized, report.randomized_verdict);
    println!("welfare zero at every step: {}", report.welfare_always_zero);
    write_json(&out_dir(common, &loaded), "prop3_adversary.json", &report)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Enumerate(c) => enumerate(c),
        Command::Bounds(c) => bounds(c),
        Command::Example1Linear(c) => example1_linear(c),
        Command::Prop3Adversary(c) => prop3_adversary(c),
    };
    match result.context("matchmarket failed") {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

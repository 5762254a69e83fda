//! `rcp`: experiment runner for the renewal contact process.
//!
//! Exit status: 0 on success, 2 when a checked inequality is flagged, 1 on error.

mod config;
mod ops;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use config::{ExperimentConfig, Op};
use ops::{CliError, CliResult, Outcome};

#[derive(Debug, Parser)]
#[command(
    name = "rcp",
    version,
    about = "Renewal contact process simulator and estimators"
)]
struct Args {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Operation; overrides the config's `op`.
    #[arg(long, value_enum)]
    op: Option<Op>,
    /// Master seed; overrides the config's `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: hardware parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Validate the config and print the event budget without sampling.
    #[arg(long)]
    dry_run: bool,
    /// System dump: written by `simulate`, read by `replay`.
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Infection rate; overrides the config's `lambda`.
    #[arg(long)]
    lambda: Option<f64>,
}

const DEFAULT_OUT: &str = "rcp-out";

fn load_config(args: &Args) -> CliResult<ExperimentConfig> {
    let path = args
        .config
        .as_ref()
        .ok_or_else(|| CliError::Other("--config is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::from_json(&text).map_err(CliError::Other)?;
    if let Some(op) = args.op {
        cfg.op = Some(op);
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(l) = args.lambda {
        cfg.lambda = Some(l);
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn summary_bytes(outcome: &Outcome) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(&outcome.summary).expect("summary serializes");
    s.push(b'\n');
    s
}

fn write_outcome(out: &Path, outcome: &Outcome, dump: Option<&Path>) -> CliResult<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    for (name, bytes) in &outcome.files {
        write_file(&out.join(name), bytes)?;
        eprintln!("[rcp] wrote {}", out.join(name).display());
    }
    let summary = summary_bytes(outcome);
    write_file(&out.join("summary.json"), &summary)?;
    if let (Some(path), Some(system)) = (dump, &outcome.system) {
        let mut buf = Vec::new();
        rcp_core::graphical::write_dump(system, &mut buf)?;
        write_file(path, &buf)?;
        write_file(&ops::sidecar(path), &summary)?;
        eprintln!("[rcp] dumped system to {}", path.display());
    }
    Ok(())
}

fn execute(args: &Args) -> CliResult<bool> {
    if let Ok(raw) = std::env::var(rcp_core::graphical::MAX_EVENTS_ENV) {
        rcp_core::graphical::parse_max_events(&raw)?;
    }
    if let Some(t) = args.threads {
        if t == 0 {
            return Err(CliError::Other("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Other(e.to_string()))?;
    }

    if args.op == Some(Op::Replay) {
        let dump = args
            .dump
            .as_deref()
            .ok_or_else(|| CliError::Other("replay needs --dump".into()))?;
        if args.dry_run {
            let bytes = std::fs::read(dump)
                .map_err(|e| CliError::Io(format!("{}: {e}", dump.display())))?;
            let sys = rcp_core::graphical::read_dump(&mut bytes.as_slice())?;
            println!("{}", json!({ "op": "replay", "events": sys.num_events() }));
            return Ok(false);
        }
        let outcome = ops::replay(dump, args.lambda)?;
        let out = args
            .out
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        write_outcome(&out, &outcome, None)?;
        return Ok(outcome.summary.flagged);
    }

    let cfg = load_config(args)?;
    let op = cfg.op.ok_or_else(|| {
        CliError::Other("no operation: set `op` in the config or pass --op".into())
    })?;
    if op == Op::Replay {
        return Err(CliError::Other(
            "replay is selected with --op replay --dump <path>".into(),
        ));
    }
    if args.dump.is_some() && op != Op::Simulate {
        return Err(CliError::Other("--dump is only written by simulate".into()));
    }
    if args.dry_run {
        let expected = ops::budget(&cfg, op)?;
        let cap = rcp_core::graphical::max_events();
        println!(
            "{}",
            json!({
                "op": op,
                "config_hash": cfg.hash(),
                "seed": cfg.seed,
                "expected_events": expected,
                "max_events": cap,
                "within_cap": expected <= cap,
            })
        );
        ops::check_capacity(expected)?;
        return Ok(false);
    }
    eprintln!("[rcp] {op} seed={} config={}", cfg.seed, cfg.hash());
    let outcome = ops::run(&cfg, op)?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    write_outcome(&out, &outcome, args.dump.as_deref())?;
    Ok(outcome.summary.flagged)
}

/// 0 ok, 2 flagged, 1 error.
fn exit_status(result: &CliResult<bool>) -> u8 {
    match result {
        Ok(false) => 0,
        Ok(true) => 2,
        Err(_) => 1,
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = execute(&args);
    match &result {
        Ok(true) => eprintln!("[rcp] inequality flagged"),
        Err(e) => eprintln!("error: {e}"),
        Ok(false) => {}
    }
    ExitCode::from(exit_status(&result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(exit_status(&Ok(false)), 0);
        assert_eq!(exit_status(&Ok(true)), 2);
        assert_eq!(exit_status(&Err(CliError::Other("x".into()))), 1);
    }

    #[test]
    fn args_parse() {
        let a = Args::try_parse_from([
            "rcp",
            "--config",
            "c.json",
            "--op",
            "pr-scan",
            "--seed",
            "4",
            "--dry-run",
        ])
        .unwrap();
        assert_eq!(a.op, Some(Op::PrScan));
        assert_eq!(a.seed, Some(4));
        assert!(a.dry_run);
        assert!(Args::try_parse_from(["rcp", "--op", "nonsense"]).is_err());
    }
}

//! `gnnflow` — analytical GNN-accelerator dataflow explorer.
//!
//! Exit codes: 0 success, 2 config/input error, 3 dataflow syntax or
//! legality error.

mod config;
mod csv;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gnnflow_core::energy::EnergyModel;
use gnnflow_core::error::Error;
use gnnflow_core::graph::{generate_synthetic, SyntheticModel};
use gnnflow_core::sweep::{configure_threads, evaluate_jobs, normalize_runtime};
use gnnflow_core::taxonomy::{parse_dataflow, validate, TileConfig};

use config::SweepConfig;
use svg::ChartKind;

#[derive(Parser)]
#[command(name = "gnnflow", version, about = "GNN accelerator dataflow cost model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a sweep config and print the rows as CSV.
    Simulate {
        /// Sweep config (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a sweep config and write the rows to a CSV file.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV; overrides the config's `output` path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a dataflow string (with tiles) against the legality rules.
    Validate {
        /// Dataflow notation, e.g. "SP_AC(V_s F_x N_t, V_s F_x G_x)".
        dataflow: String,
        /// Tile tuple T_V_agg,T_N,T_F_agg,T_V_cmb,T_G,T_F_cmb.
        #[arg(long, value_parser = parse_tiles, default_value = "1,1,1,1,1,1")]
        tiles: TileConfig,
        /// PE budget shared by both phases.
        #[arg(long, default_value_t = 512)]
        pes: u64,
        /// Per-phase budgets "agg,cmb" for pipelined arrays.
        #[arg(long, value_parser = parse_split)]
        pp_split: Option<(u64, u64)>,
    },
    /// Generate a synthetic graph and write it as an edge list.
    GenGraph {
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 32)]
        features: u64,
        /// Target average degree.
        #[arg(long)]
        degree: f64,
        /// uniform-random, fixed-degree or skewed.
        #[arg(long, default_value = "uniform-random")]
        model: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a sweep CSV as an SVG chart.
    Report {
        /// Sweep rows CSV.
        #[arg(long)]
        input: PathBuf,
        /// runtime-bars, energy-stacked or gb-breakdown.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_tiles(s: &str) -> Result<TileConfig, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 6 {
        return Err("expected six comma-separated tile sizes".into());
    }
    let mut t = [0u64; 6];
    for (i, p) in parts.iter().enumerate() {
        t[i] = p
            .trim()
            .parse()
            .map_err(|_| format!("bad tile size `{p}`"))?;
    }
    Ok(TileConfig::from_tuple(t))
}

fn parse_split(s: &str) -> Result<(u64, u64), String> {
    let (a, c) = s
        .split_once(',')
        .ok_or("expected two comma-separated PE counts")?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad count `{a}`"))?,
        c.trim().parse().map_err(|_| format!("bad count `{c}`"))?,
    ))
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Syntax { .. } | Error::Semantic(_) | Error::IllegalDataflow(_) => 3,
        _ => 2,
    }
}

fn run_sweep(config_path: &Path) -> gnnflow_core::Result<String> {
    let text = std::fs::read_to_string(config_path)?;
    let cfg = SweepConfig::parse(&text)?;
    let base_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let jobs = cfg.jobs(base_dir)?;
    let mut rows = evaluate_jobs(&jobs, &EnergyModel::default())?;
    normalize_runtime(&mut rows, &cfg.baseline)?;
    Ok(csv::format_rows(&rows))
}

fn config_output(config_path: &Path) -> Option<PathBuf> {
    let text = std::fs::read_to_string(config_path).ok()?;
    let cfg = SweepConfig::parse(&text).ok()?;
    let out = cfg.output?;
    if out.is_absolute() {
        Some(out)
    } else {
        Some(config_path.parent().unwrap_or_else(|| Path::new(".")).join(out))
    }
}

fn real_main() -> Result<(), (u8, String)> {
    let cli = Cli::parse();
    let workers: usize = std::env::var("SIM_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(0);
    configure_threads(workers);

    let fail = |e: Error| (exit_code_for(&e), e.to_string());

    match cli.command {
        Command::Simulate { config, out } => {
            let rows = run_sweep(&config).map_err(fail)?;
            match out {
                Some(path) => std::fs::write(path, rows).map_err(|e| (2, e.to_string()))?,
                None => print!("{rows}"),
            }
            Ok(())
        }
        Command::Sweep { config, out } => {
            let rows = run_sweep(&config).map_err(fail)?;
            let path = out.or_else(|| config_output(&config)).ok_or((
                2u8,
                "no output path: pass --out or set `output` in the config".to_string(),
            ))?;
            std::fs::write(&path, rows).map_err(|e| (2, e.to_string()))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Validate {
            dataflow,
            tiles,
            pes,
            pp_split,
        } => {
            let spec = parse_dataflow(&dataflow).map_err(fail)?.with_tiles(tiles);
            let (agg_budget, cmb_budget) = pp_split.unwrap_or((pes, pes));
            let report = validate(&spec, agg_budget, cmb_budget);
            println!(
                "dataflow: {}",
                gnnflow_core::taxonomy::format_dataflow(&spec)
            );
            println!("tiles: {:?}", tiles.as_tuple());
            println!(
                "mapping efficiency: agg {:.1}%, cmb {:.1}%",
                report.mapping_efficiency_agg * 100.0,
                report.mapping_efficiency_cmb * 100.0
            );
            for w in &report.warnings {
                println!("warning: {w}");
            }
            if report.legal {
                println!("legal");
                Ok(())
            } else {
                for v in &report.violations {
                    println!("violation ({}): {}", v.rule, v.message);
                }
                Err((3, "dataflow is illegal".into()))
            }
        }
        Command::GenGraph {
            vertices,
            features,
            degree,
            model,
            seed,
            out,
        } => {
            let model: SyntheticModel = model.parse().map_err(fail)?;
            let g = generate_synthetic(vertices, features, degree, model, seed).map_err(fail)?;
            let mut text = String::new();
            text.push_str(&format!(
                "# synthetic graph: V={} E={} F={} seed={}\n",
                g.num_vertices(),
                g.num_edges(),
                g.num_features(),
                seed
            ));
            for v in 0..g.num_vertices() {
                for &n in g.neighbors(v) {
                    text.push_str(&format!("{v} {n}\n"));
                }
            }
            std::fs::write(&out, text).map_err(|e| (2, e.to_string()))?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Report { input, kind, out } => {
            let kind: ChartKind = kind.parse().map_err(fail)?;
            let text = std::fs::read_to_string(&input).map_err(|e| (2, e.to_string()))?;
            let rows = csv::parse_rows(&text).map_err(fail)?;
            let chart = svg::render(kind, &rows).map_err(fail)?;
            std::fs::write(&out, chart).map_err(|e| (2, e.to_string()))?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

//! Design-space sweep driver: evaluates a batch of (dataset, dataflow,
//! tiles) points, in parallel when the `parallel` feature is on. Row order
//! in the output always matches job order, so results are deterministic
//! regardless of worker count.

use std::sync::Arc;

use crate::energy::{EnergyModel, EnergyReport};
use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::interphase::{run_layer, LayerCost, LayerHardware};
use crate::taxonomy::{builtin_configs, format_dataflow, DataflowSpec, InterPhase, PeBudget,
    ProblemDims, TileConfig};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Caps the global worker pool. `0` keeps the default (one worker per
/// core). Must be called before any parallel work; later calls are
/// ignored. No-op without the `parallel` feature.
pub fn configure_threads(workers: usize) {
    #[cfg(feature = "parallel")]
    if workers > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = workers;
}

/// One sweep point. Graphs are shared so a dataset loaded once can feed
/// many points.
#[derive(Debug, Clone)]
pub struct SweepJob {
    pub name: String,
    pub dataset: String,
    pub graph: Arc<CsrGraph>,
    pub out_features: u64,
    pub spec: DataflowSpec,
    pub hw: LayerHardware,
}

/// Evaluated sweep point. `norm_runtime` is 1.0 until normalized against
/// a baseline row.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub name: String,
    pub dataset: String,
    pub notation: String,
    pub tiles: TileConfig,
    pub cost: LayerCost,
    pub energy: EnergyReport,
    pub norm_runtime: f64,
}

fn evaluate_one(job: &SweepJob, energy: &EnergyModel) -> Result<SweepRow> {
    let cost = run_layer(&job.graph, job.out_features, &job.spec, &job.hw)?;
    let report = energy.report(&cost);
    Ok(SweepRow {
        name: job.name.clone(),
        dataset: job.dataset.clone(),
        notation: format_dataflow(&job.spec),
        tiles: job.spec.tiles,
        cost,
        energy: report,
        norm_runtime: 1.0,
    })
}

/// Evaluates all jobs; fails on the first illegal or misconfigured point.
#[cfg(feature = "parallel")]
pub fn evaluate_jobs(jobs: &[SweepJob], energy: &EnergyModel) -> Result<Vec<SweepRow>> {
    jobs.par_iter().map(|j| evaluate_one(j, energy)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn evaluate_jobs(jobs: &[SweepJob], energy: &EnergyModel) -> Result<Vec<SweepRow>> {
    evaluate_jobs_seq(jobs, energy)
}

/// Sequential evaluation, kept available alongside the parallel path so
/// the benchmark suite can compare both in one build.
pub fn evaluate_jobs_seq(jobs: &[SweepJob], energy: &EnergyModel) -> Result<Vec<SweepRow>> {
    jobs.iter().map(|j| evaluate_one(j, energy)).collect()
}

/// Divides every row's cycle count by its dataset's baseline row.
pub fn normalize_runtime(rows: &mut [SweepRow], baseline: &str) -> Result<()> {
    let baselines: std::collections::HashMap<String, u64> = rows
        .iter()
        .filter(|r| r.name == baseline)
        .map(|r| (r.dataset.clone(), r.cost.total_cycles))
        .collect();
    for row in rows.iter_mut() {
        let base = baselines.get(&row.dataset).ok_or_else(|| {
            Error::Config(format!(
                "no baseline row `{baseline}` for dataset `{}`",
                row.dataset
            ))
        })?;
        row.norm_runtime = if *base == 0 {
            1.0
        } else {
            row.cost.total_cycles as f64 / *base as f64
        };
    }
    Ok(())
}

/// Builds jobs for every builtin configuration against one graph. The PE
/// array is shared for Seq/SP points and split evenly for PP points.
pub fn builtin_jobs(
    dataset: &str,
    graph: Arc<CsrGraph>,
    out_features: u64,
    pe_count: u64,
) -> Result<Vec<SweepJob>> {
    let stats = crate::graph::degree_stats(&graph);
    let dims = ProblemDims {
        v: graph.num_vertices() as u64,
        f: graph.num_features(),
        g: out_features,
        avg_degree: stats.avg_degree,
    };
    let mut jobs = Vec::new();
    for cfg in builtin_configs() {
        let spec = cfg.spec();
        let (budget, hw) = match spec.inter {
            InterPhase::Pp(_) => (
                PeBudget::split(pe_count / 2, pe_count - pe_count / 2),
                LayerHardware::split(pe_count / 2, pe_count - pe_count / 2),
            ),
            _ => (PeBudget::shared(pe_count), LayerHardware::shared(pe_count)),
        };
        let tiles = cfg.tiles_for(dims, budget)?;
        jobs.push(SweepJob {
            name: cfg.name.to_string(),
            dataset: dataset.to_string(),
            graph: Arc::clone(&graph),
            out_features,
            spec: spec.with_tiles(tiles),
            hw,
        });
    }
    Ok(jobs)
}

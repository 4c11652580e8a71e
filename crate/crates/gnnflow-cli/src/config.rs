//! TOML sweep configuration: datasets (registry names, edge-list files or
//! synthetic specs) crossed with dataflows (builtin names or notation
//! strings, optionally with explicit tiles or per-dimension tile grids).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Deserialize;

use gnnflow_core::error::{Error, Result};
use gnnflow_core::graph::{
    batch_graphs, generate_synthetic, graph_from_descriptor, load_edge_list, lookup_dataset,
    CsrGraph, SyntheticModel,
};
use gnnflow_core::interphase::LayerHardware;
use gnnflow_core::sweep::SweepJob;
use gnnflow_core::taxonomy::{
    derive_tiles, lookup_builtin, parse_dataflow, Granularity, InterPhase, PeBudget, ProblemDims,
    TileConfig,
};

fn default_g() -> u64 {
    16
}
fn default_batch() -> usize {
    1
}
fn default_baseline() -> String {
    "Seq-Nt".into()
}
fn default_seed() -> u64 {
    42
}
fn default_pes() -> u64 {
    512
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Output feature width G of the layer.
    #[serde(default = "default_g")]
    pub g: u64,
    /// Graphs per batch for multi-graph datasets.
    #[serde(default = "default_batch")]
    pub batch: usize,
    /// Dataflow label runtimes are normalized against.
    #[serde(default = "default_baseline")]
    pub baseline: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Default CSV output path; `--out` overrides.
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub hw: HwConfig,
    #[serde(rename = "dataset")]
    pub datasets: Vec<DatasetEntry>,
    #[serde(rename = "dataflow")]
    pub dataflows: Vec<DataflowEntry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HwConfig {
    #[serde(default = "default_pes")]
    pub pe_count: u64,
    /// (aggregation, combination) PEs for parallel-pipeline dataflows;
    /// defaults to an even split of `pe_count`.
    pub pp_split: Option<[u64; 2]>,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            pe_count: default_pes(),
            pp_split: None,
        }
    }
}

impl HwConfig {
    pub fn split(&self) -> (u64, u64) {
        match self.pp_split {
            Some([a, c]) => (a, c),
            None => (self.pe_count / 2, self.pe_count - self.pe_count / 2),
        }
    }
}

/// One dataset: exactly one of `name` (registry), `path` (edge list) or
/// `synthetic` must be set.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: Option<String>,
    pub path: Option<PathBuf>,
    pub synthetic: Option<String>,
    /// Row label; defaults to the name, file stem, or synthetic model.
    pub label: Option<String>,
    /// Feature width for `path`/`synthetic` datasets.
    pub features: Option<u64>,
    pub v: Option<usize>,
    pub d: Option<f64>,
    #[serde(default)]
    pub self_loops: bool,
}

impl DatasetEntry {
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        if let Some(n) = &self.name {
            return n.clone();
        }
        if let Some(p) = &self.path {
            return p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.to_string_lossy().into_owned());
        }
        self.synthetic.clone().unwrap_or_else(|| "dataset".into())
    }

    pub fn load(&self, batch: usize, seed: u64, base_dir: &Path) -> Result<CsrGraph> {
        let picked =
            [self.name.is_some(), self.path.is_some(), self.synthetic.is_some()]
                .iter()
                .filter(|&&x| x)
                .count();
        if picked != 1 {
            return Err(Error::Config(format!(
                "dataset `{}` must set exactly one of name, path, synthetic",
                self.label()
            )));
        }
        if let Some(name) = &self.name {
            let desc = lookup_dataset(name)
                .ok_or_else(|| Error::Config(format!("unknown dataset `{name}`")))?;
            return graph_from_descriptor(&desc, batch, seed);
        }
        if let Some(path) = &self.path {
            let features = self.features.ok_or_else(|| {
                Error::Config(format!("dataset `{}` needs `features`", self.label()))
            })?;
            let full = if path.is_absolute() {
                path.clone()
            } else {
                base_dir.join(path)
            };
            return load_edge_list(&full, features, self.self_loops);
        }
        let model: SyntheticModel = self.synthetic.as_deref().unwrap().parse()?;
        let v = self
            .v
            .ok_or_else(|| Error::Config(format!("dataset `{}` needs `v`", self.label())))?;
        let d = self
            .d
            .ok_or_else(|| Error::Config(format!("dataset `{}` needs `d`", self.label())))?;
        let features = self
            .features
            .ok_or_else(|| Error::Config(format!("dataset `{}` needs `features`", self.label())))?;
        let one = |i: u64| {
            generate_synthetic(v, features, d, model, seed.wrapping_add(i)).map(|g| {
                if self.self_loops {
                    g.with_self_loops()
                } else {
                    g
                }
            })
        };
        if batch > 1 {
            let graphs: Vec<CsrGraph> = (0..batch as u64).map(one).collect::<Result<_>>()?;
            batch_graphs(&graphs, batch)
        } else {
            one(0)
        }
    }
}

/// One dataflow: a builtin `name` or a `notation` string, with optional
/// explicit `tiles`, a per-dimension `grid`, and a PP `granularity`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataflowEntry {
    pub name: Option<String>,
    pub notation: Option<String>,
    pub label: Option<String>,
    pub tiles: Option<[u64; 6]>,
    pub granularity: Option<String>,
    pub grid: Option<TileGrid>,
}

/// Tile-size lists crossed into a grid; unspecified dimensions keep the
/// derived (or explicit) base value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileGrid {
    pub t_v_agg: Option<Vec<u64>>,
    pub t_n: Option<Vec<u64>>,
    pub t_f_agg: Option<Vec<u64>>,
    pub t_v_cmb: Option<Vec<u64>>,
    pub t_g: Option<Vec<u64>>,
    pub t_f_cmb: Option<Vec<u64>>,
}

impl TileGrid {
    fn expand(&self, base: TileConfig) -> Vec<TileConfig> {
        let b = base.as_tuple();
        let axes: [Vec<u64>; 6] = [
            self.t_v_agg.clone().unwrap_or_else(|| vec![b[0]]),
            self.t_n.clone().unwrap_or_else(|| vec![b[1]]),
            self.t_f_agg.clone().unwrap_or_else(|| vec![b[2]]),
            self.t_v_cmb.clone().unwrap_or_else(|| vec![b[3]]),
            self.t_g.clone().unwrap_or_else(|| vec![b[4]]),
            self.t_f_cmb.clone().unwrap_or_else(|| vec![b[5]]),
        ];
        let mut out = vec![[0u64; 6]];
        for (i, axis) in axes.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * axis.len());
            for partial in &out {
                for &val in axis {
                    let mut p = *partial;
                    p[i] = val;
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter().map(TileConfig::from_tuple).collect()
    }
}

impl DataflowEntry {
    pub fn label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        if let Some(n) = &self.name {
            return n.clone();
        }
        self.notation.clone().unwrap_or_else(|| "dataflow".into())
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("bad sweep config: {e}")))?;
        if cfg.datasets.is_empty() {
            return Err(Error::Config("config lists no datasets".into()));
        }
        if cfg.dataflows.is_empty() {
            return Err(Error::Config("config lists no dataflows".into()));
        }
        if !cfg.dataflows.iter().any(|d| d.label() == cfg.baseline) {
            return Err(Error::Config(format!(
                "baseline `{}` is not among the configured dataflows",
                cfg.baseline
            )));
        }
        Ok(cfg)
    }

    /// Expands the config into evaluation jobs in deterministic order:
    /// datasets outermost, then dataflows, then grid points.
    pub fn jobs(&self, base_dir: &Path) -> Result<Vec<SweepJob>> {
        let mut jobs = Vec::new();
        for ds in &self.datasets {
            let graph = Arc::new(ds.load(self.batch, self.seed, base_dir)?);
            let stats = gnnflow_core::graph::degree_stats(&graph);
            let dims = ProblemDims {
                v: graph.num_vertices() as u64,
                f: graph.num_features(),
                g: self.g,
                avg_degree: stats.avg_degree,
            };
            for df in &self.dataflows {
                let (mut spec, derived) = match (&df.name, &df.notation) {
                    (Some(name), None) => {
                        let builtin = lookup_builtin(name)
                            .ok_or_else(|| Error::Config(format!("unknown dataflow `{name}`")))?;
                        let spec = builtin.spec();
                        let budget = self.budget_for(spec.inter);
                        let tiles = builtin.tiles_for(dims, budget)?;
                        (spec, tiles)
                    }
                    (None, Some(notation)) => {
                        let spec = parse_dataflow(notation)?;
                        let budget = self.budget_for(spec.inter);
                        let tiles = match df.tiles {
                            Some(t) => TileConfig::from_tuple(t),
                            None => derive_tiles(&spec, dims, budget)?,
                        };
                        (spec, tiles)
                    }
                    _ => {
                        return Err(Error::Config(format!(
                            "dataflow `{}` must set exactly one of name, notation",
                            df.label()
                        )))
                    }
                };
                if let Some(g) = &df.granularity {
                    let gran: Granularity = g.parse()?;
                    spec = spec.with_granularity(gran);
                }
                let base = match df.tiles {
                    Some(t) => TileConfig::from_tuple(t),
                    None => derived,
                };
                let tile_sets = match &df.grid {
                    Some(grid) => grid.expand(base),
                    None => vec![base],
                };
                let hw = self.hw_for(spec.inter);
                for tiles in tile_sets {
                    jobs.push(SweepJob {
                        name: df.label(),
                        dataset: ds.label(),
                        graph: Arc::clone(&graph),
                        out_features: self.g,
                        spec: spec.clone().with_tiles(tiles),
                        hw,
                    });
                }
            }
        }
        Ok(jobs)
    }

    pub fn budget_for(&self, inter: InterPhase) -> PeBudget {
        match inter {
            InterPhase::Pp(_) => {
                let (a, c) = self.hw.split();
                PeBudget::split(a, c)
            }
            _ => PeBudget::shared(self.hw.pe_count),
        }
    }

    pub fn hw_for(&self, inter: InterPhase) -> LayerHardware {
        match inter {
            InterPhase::Pp(_) => {
                let (a, c) = self.hw.split();
                LayerHardware::split(a, c)
            }
            _ => LayerHardware::shared(self.hw.pe_count),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
g = 8
baseline = "Seq-Nt"
seed = 7

[hw]
pe_count = 64

[[dataset]]
synthetic = "fixed-degree"
v = 32
d = 4.0
features = 16

[[dataflow]]
name = "Seq-Nt"

[[dataflow]]
notation = "Seq_AC(V_x F_x N_t, V_x G_x F_x)"
label = "custom"
tiles = [1, 1, 8, 2, 2, 1]
[dataflow.grid]
t_f_agg = [2, 4, 8]
"#;

    #[test]
    fn sample_config_expands_to_grid() {
        let cfg = SweepConfig::parse(SAMPLE).unwrap();
        let jobs = cfg.jobs(Path::new(".")).unwrap();
        // 1 dataset x (1 builtin + 3 grid points).
        assert_eq!(jobs.len(), 4);
        assert_eq!(jobs[0].name, "Seq-Nt");
        assert_eq!(jobs[1].spec.tiles.t_f_agg, 2);
        assert_eq!(jobs[3].spec.tiles.t_f_agg, 8);
        assert_eq!(jobs[3].spec.tiles.t_v_cmb, 2);
    }

    #[test]
    fn missing_baseline_rejected() {
        let bad = SAMPLE.replace("baseline = \"Seq-Nt\"", "baseline = \"nope\"");
        assert!(SweepConfig::parse(&bad).is_err());
    }

    #[test]
    fn empty_dataflows_rejected() {
        let cfg = r#"
[[dataset]]
name = "cora"
"#;
        assert!(SweepConfig::parse(cfg).is_err());
    }
}

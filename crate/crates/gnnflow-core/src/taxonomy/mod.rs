//! Data model, parser, formatter and legality validator for the dataflow
//! notation `<Inter>_<order>(<AggIntra>, <CmbIntra>)`, plus the registry of
//! named evaluation configurations.

mod builtins;
mod parse;
mod tiles;
mod validate;

pub use builtins::{builtin_configs, lookup_builtin, BuiltinConfig};
pub use parse::{format_dataflow, parse_dataflow};
pub use tiles::{derive_tiles, PeBudget, ProblemDims};
pub use validate::{validate, ValidationReport, Violation};

use serde::{Deserialize, Serialize};

/// Loop dimension. Aggregation loops range over {V, F, N}; combination
/// loops range over {V, F, G}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dim {
    V,
    F,
    N,
    G,
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let c = match self {
            Dim::V => 'V',
            Dim::F => 'F',
            Dim::N => 'N',
            Dim::G => 'G',
        };
        write!(f, "{c}")
    }
}

/// Whether a dimension is unrolled across PEs (`Spatial`, tile size > 1),
/// iterated over cycles (`Temporal`, tile size = 1), or left open
/// (`Either`, subscript `x`) to be resolved by the tile configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mapping {
    Spatial,
    Temporal,
    Either,
}

impl Mapping {
    pub fn subscript(self) -> char {
        match self {
            Mapping::Spatial => 's',
            Mapping::Temporal => 't',
            Mapping::Either => 'x',
        }
    }
}

/// Ordered loop nest for one phase, outermost first. `groups` marks index
/// ranges whose relative order is interchangeable (curly brackets in the
/// notation); costing uses the written order, the groups only relax
/// validation rule matching.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoopSpec {
    pub loops: Vec<(Dim, Mapping)>,
    pub groups: Vec<(usize, usize)>,
}

impl LoopSpec {
    pub fn new(loops: Vec<(Dim, Mapping)>) -> Self {
        Self {
            loops,
            groups: Vec::new(),
        }
    }

    pub fn position(&self, dim: Dim) -> Option<usize> {
        self.loops.iter().position(|&(d, _)| d == dim)
    }

    pub fn mapping(&self, dim: Dim) -> Option<Mapping> {
        self.loops
            .iter()
            .find(|&&(d, _)| d == dim)
            .map(|&(_, m)| m)
    }

    pub fn dims(&self) -> Vec<Dim> {
        self.loops.iter().map(|&(d, _)| d).collect()
    }

    /// All dim orders reachable by permuting within interchangeable groups.
    pub fn possible_orders(&self) -> Vec<Vec<Dim>> {
        let base = self.dims();
        let mut orders = vec![base.clone()];
        for &(start, end) in &self.groups {
            let mut expanded = Vec::new();
            for order in &orders {
                let mut sub: Vec<Dim> = order[start..end].to_vec();
                let perms = permutations(&mut sub);
                for p in perms {
                    let mut next = order.clone();
                    next[start..end].copy_from_slice(&p);
                    expanded.push(next);
                }
            }
            expanded.sort();
            expanded.dedup();
            orders = expanded;
        }
        orders
    }
}

fn permutations(items: &mut Vec<Dim>) -> Vec<Vec<Dim>> {
    fn rec(items: &mut Vec<Dim>, k: usize, out: &mut Vec<Vec<Dim>>) {
        if k == items.len() {
            out.push(items.clone());
            return;
        }
        for i in k..items.len() {
            items.swap(k, i);
            rec(items, k + 1, out);
            items.swap(k, i);
        }
    }
    let mut out = Vec::new();
    rec(items, 0, &mut out);
    out
}

/// Tile sizes (elements of a dimension mapped in parallel across PEs) for
/// both phases, in the order (T_V_agg, T_N, T_F_agg, T_V_cmb, T_G, T_F_cmb).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileConfig {
    pub t_v_agg: u64,
    pub t_n: u64,
    pub t_f_agg: u64,
    pub t_v_cmb: u64,
    pub t_g: u64,
    pub t_f_cmb: u64,
}

impl TileConfig {
    pub fn unit() -> Self {
        Self {
            t_v_agg: 1,
            t_n: 1,
            t_f_agg: 1,
            t_v_cmb: 1,
            t_g: 1,
            t_f_cmb: 1,
        }
    }

    pub fn from_tuple(t: [u64; 6]) -> Self {
        Self {
            t_v_agg: t[0],
            t_n: t[1],
            t_f_agg: t[2],
            t_v_cmb: t[3],
            t_g: t[4],
            t_f_cmb: t[5],
        }
    }

    pub fn as_tuple(&self) -> [u64; 6] {
        [
            self.t_v_agg,
            self.t_n,
            self.t_f_agg,
            self.t_v_cmb,
            self.t_g,
            self.t_f_cmb,
        ]
    }

    pub fn agg_product(&self) -> u64 {
        self.t_v_agg * self.t_n * self.t_f_agg
    }

    pub fn cmb_product(&self) -> u64 {
        self.t_v_cmb * self.t_g * self.t_f_cmb
    }

    pub fn agg_tile(&self, dim: Dim) -> u64 {
        match dim {
            Dim::V => self.t_v_agg,
            Dim::F => self.t_f_agg,
            Dim::N => self.t_n,
            Dim::G => 1,
        }
    }

    pub fn cmb_tile(&self, dim: Dim) -> u64 {
        match dim {
            Dim::V => self.t_v_cmb,
            Dim::F => self.t_f_cmb,
            Dim::G => self.t_g,
            Dim::N => 1,
        }
    }

    pub fn t_v_max(&self) -> u64 {
        self.t_v_agg.max(self.t_v_cmb)
    }

    pub fn t_f_max(&self) -> u64 {
        self.t_f_agg.max(self.t_f_cmb)
    }
}

/// Shape of one parallel-pipeline unit of the intermediate matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    Element,
    Row,
    Column,
}

impl std::str::FromStr for Granularity {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "element" => Ok(Self::Element),
            "row" => Ok(Self::Row),
            "column" => Ok(Self::Column),
            other => Err(crate::error::Error::Config(format!(
                "unknown granularity `{other}`"
            ))),
        }
    }
}

/// Strategy for moving intermediate data between the two phases.
///
/// The notation does not encode the pipeline granularity; it is carried
/// here as configuration, defaulting to `Row`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InterPhase {
    Seq,
    SpArbitrary,
    SpEngn,
    Pp(Granularity),
}

impl InterPhase {
    pub fn label(&self) -> &'static str {
        match self {
            InterPhase::Seq => "Seq",
            InterPhase::SpArbitrary | InterPhase::SpEngn => "SP",
            InterPhase::Pp(_) => "PP",
        }
    }
}

/// Phase computation order: aggregation-then-combination or the reverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseOrder {
    AC,
    CA,
}

impl PhaseOrder {
    pub fn label(&self) -> &'static str {
        match self {
            PhaseOrder::AC => "AC",
            PhaseOrder::CA => "CA",
        }
    }
}

/// A fully parsed taxonomy descriptor: inter-phase strategy, phase order,
/// both intra-phase loop specs, and the tile configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataflowSpec {
    pub inter: InterPhase,
    pub order: PhaseOrder,
    pub agg: LoopSpec,
    pub cmb: LoopSpec,
    pub tiles: TileConfig,
}

impl DataflowSpec {
    pub fn with_tiles(mut self, tiles: TileConfig) -> Self {
        self.tiles = tiles;
        self
    }

    pub fn with_granularity(mut self, granularity: Granularity) -> Self {
        if let InterPhase::Pp(_) = self.inter {
            self.inter = InterPhase::Pp(granularity);
        }
        self
    }

    /// Granularity for pipeline-unit partitioning (PP only).
    pub fn granularity(&self) -> Option<Granularity> {
        match self.inter {
            InterPhase::Pp(g) => Some(g),
            _ => None,
        }
    }
}

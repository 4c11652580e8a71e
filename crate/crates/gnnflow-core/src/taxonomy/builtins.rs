//! The nine named dataflow configurations used throughout the evaluation,
//! with per-configuration tile-growth preferences. Tile sizes stay free
//! parameters until derived or supplied explicitly.

use super::tiles::{derive_tiles_with_plan, GrowthMode, GrowthPlan};
use super::{parse_dataflow, DataflowSpec, Dim, PeBudget, ProblemDims, TileConfig};
use crate::error::Result;

#[derive(Debug, Clone)]
pub struct BuiltinConfig {
    pub name: &'static str,
    pub notation: &'static str,
    plan: GrowthPlan,
}

impl BuiltinConfig {
    /// The dataflow template (unit tiles; PP granularity row).
    pub fn spec(&self) -> DataflowSpec {
        parse_dataflow(self.notation).expect("builtin notation parses")
    }

    /// Derives tiles for this configuration using its growth preference.
    pub fn tiles_for(&self, dims: ProblemDims, budget: PeBudget) -> Result<TileConfig> {
        derive_tiles_with_plan(&self.spec(), dims, budget, &self.plan)
    }
}

fn plan(mode: GrowthMode, agg: &[Dim], cmb: &[Dim]) -> GrowthPlan {
    GrowthPlan {
        mode,
        agg_order: agg.to_vec(),
        cmb_order: cmb.to_vec(),
    }
}

/// The representative evaluation configurations, all with phase order AC.
/// PP entries use row-wise granularity.
pub fn builtin_configs() -> Vec<BuiltinConfig> {
    use Dim::{F, G, N, V};
    use GrowthMode::{Greedy, RoundRobin};
    vec![
        BuiltinConfig {
            name: "Seq-Nt",
            notation: "Seq_AC(V_x F_x N_t, V_x G_x F_x)",
            plan: plan(Greedy, &[F], &[V, G, F]),
        },
        BuiltinConfig {
            name: "Seq-Ns",
            notation: "Seq_AC(V_x F_x N_s, V_x G_x F_x)",
            plan: plan(Greedy, &[F, N], &[V, G, F]),
        },
        BuiltinConfig {
            name: "SP-FsNt-Fs",
            notation: "SP_AC(V_x F_s N_t, V_x F_s G_x)",
            plan: plan(RoundRobin, &[F, V], &[F, V, G]),
        },
        BuiltinConfig {
            name: "SP-VsNt-Vs",
            notation: "SP_AC(V_s F_x N_t, V_s F_x G_x)",
            plan: plan(RoundRobin, &[V, F], &[V, F, G]),
        },
        BuiltinConfig {
            name: "PP-Nt-Vt/sl",
            notation: "PP_AC(V_x F_x N_t, V_x G_x F_x)",
            plan: plan(Greedy, &[F], &[G, F]),
        },
        BuiltinConfig {
            name: "PP-Ns-Vt/sl",
            notation: "PP_AC(V_x F_x N_s, V_x G_x F_x)",
            plan: plan(Greedy, &[N, F], &[G, F]),
        },
        BuiltinConfig {
            name: "PP-Nt-Vsh",
            notation: "PP_AC(V_x F_x N_t, V_s G_x F_x)",
            plan: plan(Greedy, &[F], &[V, G, F]),
        },
        BuiltinConfig {
            name: "PP-Ns-Vsh",
            notation: "PP_AC(V_x F_x N_s, V_s G_x F_x)",
            plan: plan(Greedy, &[N, F], &[V, G, F]),
        },
        BuiltinConfig {
            name: "High-Vs-SP",
            notation: "SP_AC(V_s F_x N_t, V_s F_x G_x)",
            plan: plan(Greedy, &[V, F], &[V, F, G]),
        },
    ]
}

pub fn lookup_builtin(name: &str) -> Option<BuiltinConfig> {
    builtin_configs()
        .into_iter()
        .find(|c| c.name.eq_ignore_ascii_case(name))
}

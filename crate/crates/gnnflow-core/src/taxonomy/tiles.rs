//! Tile-size derivation heuristic: fill each phase's PE budget with
//! power-of-two tiles, preferring spatial mapping on the non-reduction
//! dimensions (V then F for aggregation, V then G for combination) and
//! keeping mapping efficiency close to 100%.

use super::{DataflowSpec, Dim, InterPhase, Mapping, TileConfig};
use crate::error::{Error, Result};

/// Problem dimensions a tile derivation works against. `avg_degree` caps
/// how far the reduction tile T_N is worth growing.
#[derive(Debug, Clone, Copy)]
pub struct ProblemDims {
    pub v: u64,
    pub f: u64,
    pub g: u64,
    pub avg_degree: f64,
}

/// Per-phase PE budgets. Seq and SP use one shared array (`agg == cmb`);
/// PP splits the array between the phases.
#[derive(Debug, Clone, Copy)]
pub struct PeBudget {
    pub agg: u64,
    pub cmb: u64,
}

impl PeBudget {
    pub fn shared(pes: u64) -> Self {
        Self { agg: pes, cmb: pes }
    }

    pub fn split(agg: u64, cmb: u64) -> Self {
        Self { agg, cmb }
    }
}

/// How a growth plan walks its dimension list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum GrowthMode {
    /// Max out each dimension in turn.
    Greedy,
    /// Double dimensions round-robin, keeping them balanced.
    RoundRobin,
}

#[derive(Debug, Clone)]
pub(crate) struct GrowthPlan {
    pub mode: GrowthMode,
    pub agg_order: Vec<Dim>,
    pub cmb_order: Vec<Dim>,
}

impl GrowthPlan {
    pub fn spec_default() -> Self {
        Self {
            mode: GrowthMode::Greedy,
            agg_order: vec![Dim::V, Dim::F, Dim::N],
            cmb_order: vec![Dim::V, Dim::G, Dim::F],
        }
    }
}

/// Derives a tile configuration making `spec` legal on the given budgets,
/// using the default growth preference. Errors if the mapping constraints
/// cannot be satisfied at all.
pub fn derive_tiles(spec: &DataflowSpec, dims: ProblemDims, budget: PeBudget) -> Result<TileConfig> {
    derive_tiles_with_plan(spec, dims, budget, &GrowthPlan::spec_default())
}

pub(crate) fn derive_tiles_with_plan(
    spec: &DataflowSpec,
    dims: ProblemDims,
    budget: PeBudget,
    plan: &GrowthPlan,
) -> Result<TileConfig> {
    match spec.inter {
        InterPhase::SpEngn => derive_sp_engn(spec, dims, budget, plan),
        _ => {
            let (t_v_agg, t_f_agg, t_n) = derive_phase(
                &[
                    (Dim::V, spec.agg.mapping(Dim::V), cap(dims.v)),
                    (Dim::F, spec.agg.mapping(Dim::F), cap(dims.f)),
                    (Dim::N, spec.agg.mapping(Dim::N), degree_cap(dims.avg_degree)),
                ],
                budget.agg,
                plan.mode,
                &plan.agg_order,
            )
            .map(|t| (t[0], t[1], t[2]))?;
            let (t_v_cmb, t_f_cmb, t_g) = derive_phase(
                &[
                    (Dim::V, spec.cmb.mapping(Dim::V), cap(dims.v)),
                    (Dim::F, spec.cmb.mapping(Dim::F), cap(dims.f)),
                    (Dim::G, spec.cmb.mapping(Dim::G), cap(dims.g)),
                ],
                budget.cmb,
                plan.mode,
                &plan.cmb_order,
            )
            .map(|t| (t[0], t[1], t[2]))?;
            Ok(TileConfig {
                t_v_agg,
                t_n,
                t_f_agg,
                t_v_cmb,
                t_g,
                t_f_cmb,
            })
        }
    }
}

/// SP-EnGN-like tiles are derived jointly: T_V and T_F are shared between
/// the phases, T_N = 1, and both phase budgets must hold.
fn derive_sp_engn(
    spec: &DataflowSpec,
    dims: ProblemDims,
    budget: PeBudget,
    plan: &GrowthPlan,
) -> Result<TileConfig> {
    let merge = |a: Option<Mapping>, b: Option<Mapping>, dim: Dim| -> Result<Mapping> {
        match (a.unwrap_or(Mapping::Either), b.unwrap_or(Mapping::Either)) {
            (Mapping::Spatial, Mapping::Temporal) | (Mapping::Temporal, Mapping::Spatial) => {
                Err(Error::Infeasible(format!(
                    "conflicting mappings for shared dimension {dim}"
                )))
            }
            (Mapping::Spatial, _) | (_, Mapping::Spatial) => Ok(Mapping::Spatial),
            (Mapping::Temporal, _) | (_, Mapping::Temporal) => Ok(Mapping::Temporal),
            _ => Ok(Mapping::Either),
        }
    };
    let m_v = merge(spec.agg.mapping(Dim::V), spec.cmb.mapping(Dim::V), Dim::V)?;
    let m_f = merge(spec.agg.mapping(Dim::F), spec.cmb.mapping(Dim::F), Dim::F)?;
    let m_g = spec.cmb.mapping(Dim::G).unwrap_or(Mapping::Either);

    let mut t = std::collections::HashMap::from([(Dim::V, 1u64), (Dim::F, 1), (Dim::G, 1)]);
    let caps =
        std::collections::HashMap::from([(Dim::V, cap(dims.v)), (Dim::F, cap(dims.f)), (Dim::G, cap(dims.g))]);
    let mappings = std::collections::HashMap::from([(Dim::V, m_v), (Dim::F, m_f), (Dim::G, m_g)]);
    let fits = |t: &std::collections::HashMap<Dim, u64>| {
        t[&Dim::V] * t[&Dim::F] <= budget.agg && t[&Dim::V] * t[&Dim::F] * t[&Dim::G] <= budget.cmb
    };

    // Seed forced-spatial dims at 2.
    for dim in [Dim::V, Dim::F, Dim::G] {
        if mappings[&dim] == Mapping::Spatial {
            *t.get_mut(&dim).unwrap() = 2;
        }
    }
    if !fits(&t) {
        return Err(Error::Infeasible(
            "spatial dims do not fit the PE budget".into(),
        ));
    }

    let order: Vec<Dim> = plan
        .agg_order
        .iter()
        .chain(plan.cmb_order.iter())
        .copied()
        .filter(|d| matches!(d, Dim::V | Dim::F | Dim::G))
        .collect();
    grow(
        &mut t,
        &order,
        &mappings,
        &caps,
        plan.mode,
        &fits,
    );
    Ok(TileConfig {
        t_v_agg: t[&Dim::V],
        t_n: 1,
        t_f_agg: t[&Dim::F],
        t_v_cmb: t[&Dim::V],
        t_g: t[&Dim::G],
        t_f_cmb: t[&Dim::F],
    })
}

fn derive_phase(
    dims: &[(Dim, Option<Mapping>, u64)],
    budget: u64,
    mode: GrowthMode,
    order: &[Dim],
) -> Result<[u64; 3]> {
    let mut t: std::collections::HashMap<Dim, u64> = dims.iter().map(|&(d, _, _)| (d, 1)).collect();
    let caps: std::collections::HashMap<Dim, u64> = dims.iter().map(|&(d, _, c)| (d, c)).collect();
    let mappings: std::collections::HashMap<Dim, Mapping> = dims
        .iter()
        .map(|&(d, m, _)| (d, m.unwrap_or(Mapping::Temporal)))
        .collect();
    for &(dim, mapping, _) in dims {
        if mapping == Some(Mapping::Spatial) {
            *t.get_mut(&dim).unwrap() = 2;
        }
    }
    let fits = |t: &std::collections::HashMap<Dim, u64>| t.values().product::<u64>() <= budget;
    if !fits(&t) {
        return Err(Error::Infeasible(
            "spatial dims do not fit the PE budget".into(),
        ));
    }
    let order: Vec<Dim> = order
        .iter()
        .copied()
        .filter(|d| t.contains_key(d))
        .collect();
    grow(&mut t, &order, &mappings, &caps, mode, &fits);
    Ok([
        t[&dims[0].0],
        t[&dims[1].0],
        t[&dims[2].0],
    ])
}

fn grow<F>(
    t: &mut std::collections::HashMap<Dim, u64>,
    order: &[Dim],
    mappings: &std::collections::HashMap<Dim, Mapping>,
    caps: &std::collections::HashMap<Dim, u64>,
    mode: GrowthMode,
    fits: &F,
) where
    F: Fn(&std::collections::HashMap<Dim, u64>) -> bool,
{
    let can_grow = |dim: Dim, t: &std::collections::HashMap<Dim, u64>| {
        mappings.get(&dim) != Some(&Mapping::Temporal) && t[&dim] * 2 <= caps[&dim]
    };
    let try_double = |dim: Dim, t: &mut std::collections::HashMap<Dim, u64>| -> bool {
        if !can_grow(dim, t) {
            return false;
        }
        *t.get_mut(&dim).unwrap() *= 2;
        if fits(t) {
            true
        } else {
            *t.get_mut(&dim).unwrap() /= 2;
            false
        }
    };
    match mode {
        GrowthMode::Greedy => {
            for &dim in order {
                while try_double(dim, t) {}
            }
        }
        GrowthMode::RoundRobin => loop {
            let mut progressed = false;
            for &dim in order {
                progressed |= try_double(dim, t);
            }
            if !progressed {
                break;
            }
        },
    }
}

fn cap(dim_size: u64) -> u64 {
    dim_size.max(1).next_power_of_two()
}

fn degree_cap(avg_degree: f64) -> u64 {
    (avg_degree.round().max(1.0) as u64).next_power_of_two()
}

#[cfg(test)]
mod tests {
    use super::super::{parse_dataflow, validate};
    use super::*;

    fn dims() -> ProblemDims {
        ProblemDims {
            v: 1024,
            f: 512,
            g: 16,
            avg_degree: 8.0,
        }
    }

    #[test]
    fn derived_tiles_validate() {
        let spec = parse_dataflow("Seq_AC(V_x F_x N_t, V_x G_x F_x)").unwrap();
        let tiles = derive_tiles(&spec, dims(), PeBudget::shared(512)).unwrap();
        let spec = spec.with_tiles(tiles);
        let report = validate(&spec, 512, 512);
        assert!(report.legal, "violations: {:?}", report.violations);
        assert_eq!(tiles.agg_product(), 512);
    }

    #[test]
    fn sp_engn_shares_tiles() {
        let spec = parse_dataflow("SP_AC(V_s F_x N_t, V_s F_x G_x)").unwrap();
        let tiles = derive_tiles(&spec, dims(), PeBudget::shared(512)).unwrap();
        assert_eq!(tiles.t_v_agg, tiles.t_v_cmb);
        assert_eq!(tiles.t_f_agg, tiles.t_f_cmb);
        assert_eq!(tiles.t_n, 1);
        assert!(validate(&spec.with_tiles(tiles), 512, 512).legal);
    }

    #[test]
    fn forced_spatial_over_budget_is_infeasible() {
        let spec = parse_dataflow("Seq_AC(V_s F_s N_s, V_x G_x F_x)").unwrap();
        let err = derive_tiles(&spec, dims(), PeBudget::split(4, 4)).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }
}

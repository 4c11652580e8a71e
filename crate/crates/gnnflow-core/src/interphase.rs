//! Composition of the two phase costs under an inter-phase strategy:
//! sequential, sequential pipeline (arbitrary-dataflow or EnGN-like
//! in-place), or parallel pipeline at element/row/column granularity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::phase::{
    aggregation_cost_impl, combination_cost_impl, div_ceil, partition_units, ppel, AccessMap,
    HardwareConfig, Operand, OperandRoles, PhaseCost, UnitRange,
};
use crate::taxonomy::{
    validate, DataflowSpec, Dim, Granularity, InterPhase, PhaseOrder, TileConfig,
};

/// PE arrays for the two phases. Sequential and sequential-pipeline
/// strategies time-share one array (`agg` and `cmb` describe the same
/// PEs); the parallel pipeline gives each phase its own array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerHardware {
    pub agg: HardwareConfig,
    pub cmb: HardwareConfig,
}

impl LayerHardware {
    pub fn shared(pe_count: u64) -> Self {
        let hw = HardwareConfig::new(pe_count);
        Self { agg: hw, cmb: hw }
    }

    pub fn split(agg_pes: u64, cmb_pes: u64) -> Self {
        Self {
            agg: HardwareConfig::new(agg_pes),
            cmb: HardwareConfig::new(cmb_pes),
        }
    }

    /// PEs that exist physically: shared arrays are counted once.
    pub fn total_pes(&self, inter: InterPhase) -> u64 {
        match inter {
            InterPhase::Pp(_) => self.agg.pe_count + self.cmb.pe_count,
            _ => self.agg.pe_count,
        }
    }
}

/// One pipeline slot: which producer/consumer units overlap and when.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineSlot {
    pub producer_unit: Option<usize>,
    pub consumer_unit: Option<usize>,
    pub start: u64,
    pub end: u64,
}

/// Synchronized double-buffered schedule: slot `i` runs producer unit `i`
/// against consumer unit `i - 1`, so slot length is their max.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineTimeline {
    pub slots: Vec<PipelineSlot>,
    pub producer_cycles: Vec<u64>,
    pub consumer_cycles: Vec<u64>,
    pub total_cycles: u64,
}

/// Builds the slot schedule for unit cycle counts `a` (producer) and `c`
/// (consumer); both slices must have the same length.
pub fn pipeline_timeline(a: &[u64], c: &[u64]) -> Result<PipelineTimeline> {
    if a.len() != c.len() {
        return Err(Error::Composition(format!(
            "producer has {} units, consumer has {}",
            a.len(),
            c.len()
        )));
    }
    let n = a.len();
    let mut slots = Vec::with_capacity(n + 1);
    let mut now = 0u64;
    for i in 0..=n {
        let producer_unit = (i < n).then_some(i);
        let consumer_unit = (i > 0).then(|| i - 1);
        let len = match (producer_unit, consumer_unit) {
            (Some(p), Some(q)) => a[p].max(c[q]),
            (Some(p), None) => a[p],
            (None, Some(q)) => c[q],
            (None, None) => 0,
        };
        if n == 0 {
            break;
        }
        slots.push(PipelineSlot {
            producer_unit,
            consumer_unit,
            start: now,
            end: now + len,
        });
        now += len;
    }
    Ok(PipelineTimeline {
        slots,
        producer_cycles: a.to_vec(),
        consumer_cycles: c.to_vec(),
        total_cycles: now,
    })
}

/// Cost of one GNN layer under a dataflow spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerCost {
    pub total_cycles: u64,
    /// Aggregation-phase cycles in isolation.
    pub t_agg: u64,
    /// Combination-phase cycles in isolation.
    pub t_cmb: u64,
    /// Cycles saved by the EnGN-like in-place hand-off (zero otherwise).
    pub t_load: u64,
    /// Inter-phase buffer requirement in intermediate-matrix elements.
    pub buffer_inter: u64,
    /// MACs per PE-cycle over the whole layer.
    pub utilization: f64,
    pub agg: PhaseCost,
    pub cmb: PhaseCost,
    pub gb_reads: AccessMap,
    pub gb_writes: AccessMap,
    pub l1_reads: AccessMap,
    pub l1_writes: AccessMap,
    pub timeline: Option<PipelineTimeline>,
}

impl LayerCost {
    pub fn mac_count(&self) -> u64 {
        self.agg.mac_count + self.cmb.mac_count
    }
}

/// Inter-phase buffer sizes in intermediate elements. `v` and `f` are the
/// intermediate matrix dimensions.
pub fn buffer_requirement(inter: InterPhase, tiles: &TileConfig, v: u64, f: u64) -> u64 {
    match inter {
        InterPhase::Seq => v * f,
        InterPhase::SpArbitrary => tiles.t_v_max() * tiles.t_f_max(),
        InterPhase::SpEngn => 0,
        InterPhase::Pp(g) => 2 * ppel(g, tiles.t_v_max(), tiles.t_f_max(), v, f),
    }
}

/// Evaluates one layer: `g` carries the input feature width F, `g_dim` is
/// the output feature width G. Validates the spec first and refuses
/// illegal dataflows.
pub fn run_layer(
    g: &CsrGraph,
    g_dim: u64,
    spec: &DataflowSpec,
    hw: &LayerHardware,
) -> Result<LayerCost> {
    let report = validate(spec, hw.agg.pe_count, hw.cmb.pe_count);
    if !report.legal {
        let msgs: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("[{}] {}", v.rule, v.message))
            .collect();
        return Err(Error::IllegalDataflow(msgs.join("; ")));
    }

    let degrees = g.degrees();
    let v = g.num_vertices() as u64;
    let f = g.num_features();
    let tiles = &spec.tiles;

    // Which phase produces the intermediate and which consumes it.
    let (agg_roles, cmb_roles, agg_features) = match spec.order {
        PhaseOrder::AC => (
            OperandRoles {
                input: Operand::Inp,
                output: Operand::Int,
            },
            OperandRoles {
                input: Operand::Int,
                output: Operand::Op,
            },
            f,
        ),
        PhaseOrder::CA => (
            OperandRoles {
                input: Operand::Int,
                output: Operand::Op,
            },
            OperandRoles {
                input: Operand::Inp,
                output: Operand::Int,
            },
            g_dim,
        ),
    };

    let mut agg_cost = aggregation_cost_impl(
        &degrees,
        agg_features,
        &spec.agg,
        tiles,
        &hw.agg,
        agg_roles,
        cfg!(feature = "parallel"),
    )?;
    let mut cmb_cost =
        combination_cost_impl(v, f, g_dim, &spec.cmb, tiles, &hw.cmb, cmb_roles)?;

    // Intermediate matrix dimensions.
    let (int_v, int_f) = match spec.order {
        PhaseOrder::AC => (v, f),
        PhaseOrder::CA => (v, g_dim),
    };
    let buffer_inter = buffer_requirement(spec.inter, tiles, int_v, int_f);
    let t_agg = agg_cost.cycles;
    let t_cmb = cmb_cost.cycles;

    let (total_cycles, t_load, timeline) = match spec.inter {
        InterPhase::Seq | InterPhase::SpArbitrary => (t_agg + t_cmb, 0, None),
        InterPhase::SpEngn => {
            // The consumer starts on tiles already resident in PE-local
            // buffers, saving the reload the arbitrary variant pays.
            let t_load = engn_load_cycles(int_v, int_f, tiles, &hw.agg);
            // In-place hand-off: the intermediate never leaves the PEs.
            for cost in [&mut agg_cost, &mut cmb_cost] {
                cost.gb_reads.set(Operand::Int, 0);
                cost.gb_writes.set(Operand::Int, 0);
            }
            let saved = t_load.min(t_agg.min(t_cmb));
            (t_agg + t_cmb - saved, saved, None)
        }
        InterPhase::Pp(gran) => {
            let timeline = pipeline_total(g, g_dim, spec, hw, gran, int_v, int_f)?;
            let total = timeline.total_cycles;
            (total, 0, Some(timeline))
        }
    };

    let (gb_reads, gb_writes, l1_reads, l1_writes) = agg_cost.merge_accesses(&cmb_cost);
    let macs = agg_cost.mac_count + cmb_cost.mac_count;
    let pe_total = hw.total_pes(spec.inter);
    let utilization = if total_cycles == 0 {
        1.0
    } else {
        macs as f64 / (total_cycles * pe_total) as f64
    };

    Ok(LayerCost {
        total_cycles,
        t_agg,
        t_cmb,
        t_load,
        buffer_inter,
        utilization,
        agg: agg_cost,
        cmb: cmb_cost,
        gb_reads,
        gb_writes,
        l1_reads,
        l1_writes,
        timeline,
    })
}

/// Cycles to stream the intermediate into PE-local buffers tile by tile;
/// this is what the EnGN-like hand-off avoids re-paying.
fn engn_load_cycles(int_v: u64, int_f: u64, tiles: &TileConfig, hw: &HardwareConfig) -> u64 {
    let t_v = tiles.t_v_agg.max(1);
    let t_f = tiles.t_f_agg.max(1);
    let bw = hw.fill_bandwidth.max(1);
    let mut cycles = 0;
    let mut v0 = 0;
    while v0 < int_v {
        let vh = t_v.min(int_v - v0);
        let mut f0 = 0;
        while f0 < int_f {
            let fh = t_f.min(int_f - f0);
            cycles += div_ceil(vh * fh, bw);
            f0 += fh;
        }
        v0 += vh;
    }
    cycles
}

/// Unit-level costs and the slot schedule for the parallel pipeline.
fn pipeline_total(
    g: &CsrGraph,
    g_dim: u64,
    spec: &DataflowSpec,
    hw: &LayerHardware,
    gran: Granularity,
    int_v: u64,
    int_f: u64,
) -> Result<PipelineTimeline> {
    let tiles = &spec.tiles;
    let degrees = g.degrees();
    let f = g.num_features();

    // Element-granularity unit order follows the producer's outer loops.
    let producer_loops = match spec.order {
        PhaseOrder::AC => &spec.agg,
        PhaseOrder::CA => &spec.cmb,
    };
    let minor_dim = match spec.order {
        PhaseOrder::AC => Dim::F,
        PhaseOrder::CA => Dim::G,
    };
    let v_major = match (
        producer_loops.position(Dim::V),
        producer_loops.position(minor_dim),
    ) {
        (Some(pv), Some(pm)) => pv < pm,
        _ => true,
    };
    let units = partition_units(
        int_v as usize,
        int_f,
        gran,
        tiles.t_v_max(),
        tiles.t_f_max(),
        v_major,
    );

    let unit_cycles = |unit: &UnitRange, producer: bool| -> Result<u64> {
        let v_sub = &degrees[unit.v_start..unit.v_end];
        let f_sub = unit.f_end - unit.f_start;
        let cost = match (spec.order, producer) {
            // AC: aggregation produces intermediate slices, combination
            // consumes them.
            (PhaseOrder::AC, true) => aggregation_cost_impl(
                v_sub,
                f_sub,
                &spec.agg,
                tiles,
                &hw.agg,
                OperandRoles {
                    input: Operand::Inp,
                    output: Operand::Int,
                },
                false,
            )?,
            (PhaseOrder::AC, false) => combination_cost_impl(
                (unit.v_end - unit.v_start) as u64,
                f_sub,
                g_dim,
                &spec.cmb,
                tiles,
                &hw.cmb,
                OperandRoles {
                    input: Operand::Int,
                    output: Operand::Op,
                },
            )?,
            // CA: combination produces V x G intermediate slices (full-F
            // reduction), aggregation consumes them.
            (PhaseOrder::CA, true) => combination_cost_impl(
                (unit.v_end - unit.v_start) as u64,
                f,
                f_sub,
                &spec.cmb,
                tiles,
                &hw.cmb,
                OperandRoles {
                    input: Operand::Inp,
                    output: Operand::Int,
                },
            )?,
            (PhaseOrder::CA, false) => aggregation_cost_impl(
                v_sub,
                f_sub,
                &spec.agg,
                tiles,
                &hw.agg,
                OperandRoles {
                    input: Operand::Int,
                    output: Operand::Op,
                },
                false,
            )?,
        };
        Ok(cost.cycles)
    };

    let mut a = Vec::with_capacity(units.len());
    let mut c = Vec::with_capacity(units.len());
    for unit in &units {
        a.push(unit_cycles(unit, true)?);
        c.push(unit_cycles(unit, false)?);
    }
    pipeline_timeline(&a, &c)
}

//! Closed-form cycle and buffer-access model for a single phase:
//! aggregation (SpMM over the CSR structure) or combination (dense GEMM).
//!
//! The model is deterministic: one MAC per PE per cycle, a one-cycle
//! distribution per outer tile, and a pipelined adder tree whose fill costs
//! `ceil(log2 T)` cycles per tile when the reduction dimension is spatial.
//! Memory never stalls; under-filled tiles leave PEs idle and the idle
//! cycles still count.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::taxonomy::{Dim, Granularity, LoopSpec, TileConfig};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Abstract PE-array parameters shared by both phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareConfig {
    pub pe_count: u64,
    /// Cycles to multicast a tile's operands onto the PEs.
    pub distribution_latency: u64,
    pub reduction_style: ReductionStyle,
    /// Elements per cycle streamed into PE-local buffers when reloading
    /// the intermediate (defaults to `pe_count`: one full tile per cycle).
    pub fill_bandwidth: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionStyle {
    Tree,
}

impl HardwareConfig {
    pub fn new(pe_count: u64) -> Self {
        Self {
            pe_count,
            distribution_latency: 1,
            reduction_style: ReductionStyle::Tree,
            fill_bandwidth: pe_count,
        }
    }
}

/// Operand categories used in the buffer-access tallies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Operand {
    /// Adjacency structure (CSR edge array touches).
    Adj,
    /// Input feature matrix.
    Inp,
    /// Intermediate matrix between the phases.
    Int,
    /// Weight matrix.
    Wt,
    /// Output matrix.
    Op,
    /// Partial-sum spills.
    Psum,
}

pub const OPERANDS: [Operand; 6] = [
    Operand::Adj,
    Operand::Inp,
    Operand::Int,
    Operand::Wt,
    Operand::Op,
    Operand::Psum,
];

/// Per-operand access counts for one buffer level and direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AccessMap([u64; 6]);

impl AccessMap {
    pub fn get(&self, op: Operand) -> u64 {
        self.0[op as usize]
    }

    pub fn add(&mut self, op: Operand, count: u64) {
        self.0[op as usize] += count;
    }

    pub fn set(&mut self, op: Operand, count: u64) {
        self.0[op as usize] = count;
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    pub fn merge(&mut self, other: &AccessMap) {
        for i in 0..6 {
            self.0[i] += other.0[i];
        }
    }
}

/// Cycle count, MAC count and buffer-access tallies for one phase (or one
/// pipeline unit of a phase).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseCost {
    pub cycles: u64,
    pub mac_count: u64,
    pub utilization: f64,
    pub gb_reads: AccessMap,
    pub gb_writes: AccessMap,
    pub l1_reads: AccessMap,
    pub l1_writes: AccessMap,
}

impl PhaseCost {
    fn finish(mut self, pe_count: u64) -> Self {
        self.utilization = if self.cycles == 0 {
            1.0
        } else {
            self.mac_count as f64 / (self.cycles * pe_count) as f64
        };
        self
    }

    pub fn merge_accesses(&self, other: &PhaseCost) -> (AccessMap, AccessMap, AccessMap, AccessMap) {
        let mut gr = self.gb_reads;
        let mut gw = self.gb_writes;
        let mut lr = self.l1_reads;
        let mut lw = self.l1_writes;
        gr.merge(&other.gb_reads);
        gw.merge(&other.gb_writes);
        lr.merge(&other.l1_reads);
        lw.merge(&other.l1_writes);
        (gr, gw, lr, lw)
    }
}

/// Per-unit costs for pipeline composition, plus the unit size in
/// intermediate-matrix elements (PPel).
#[derive(Debug, Clone, PartialEq)]
pub struct UnitCosts {
    pub units: Vec<PhaseCost>,
    pub ppel: u64,
}

impl UnitCosts {
    pub fn total_macs(&self) -> u64 {
        self.units.iter().map(|u| u.mac_count).sum()
    }

    pub fn cycles(&self) -> Vec<u64> {
        self.units.iter().map(|u| u.cycles).collect()
    }
}

pub(crate) fn log2_ceil(x: u64) -> u64 {
    debug_assert!(x >= 1);
    x.next_power_of_two().trailing_zeros() as u64
}

pub(crate) fn div_ceil(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}

/// Operand labels for a phase's streaming input and its output; phase
/// order decides them (AC: aggregation reads Inp and writes Int, the
/// combination reads Int and writes Op).
#[derive(Debug, Clone, Copy)]
pub struct OperandRoles {
    pub input: Operand,
    pub output: Operand,
}

/// Cycle and access model for aggregation over the whole graph.
pub fn aggregation_cost(
    g: &CsrGraph,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
) -> Result<PhaseCost> {
    let degrees = g.degrees();
    aggregation_cost_impl(
        &degrees,
        g.num_features(),
        loops,
        tiles,
        hw,
        OperandRoles {
            input: Operand::Inp,
            output: Operand::Int,
        },
        true,
    )
}

/// Sequential-only variant of [`aggregation_cost`], kept available so the
/// benchmark suite can compare both code paths in one build.
pub fn aggregation_cost_seq(
    g: &CsrGraph,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
) -> Result<PhaseCost> {
    let degrees = g.degrees();
    aggregation_cost_impl(
        &degrees,
        g.num_features(),
        loops,
        tiles,
        hw,
        OperandRoles {
            input: Operand::Inp,
            output: Operand::Int,
        },
        false,
    )
}

#[derive(Debug, Clone, Copy, Default)]
struct AggTally {
    cycles: u64,
    macs: u64,
    edges: u64,
    psum_spills: u64,
}

impl AggTally {
    fn merge(self, other: AggTally) -> AggTally {
        AggTally {
            cycles: self.cycles + other.cycles,
            macs: self.macs + other.macs,
            edges: self.edges + other.edges,
            psum_spills: self.psum_spills + other.psum_spills,
        }
    }
}

pub(crate) fn aggregation_cost_impl(
    degrees: &[usize],
    num_features: u64,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    roles: OperandRoles,
    parallel: bool,
) -> Result<PhaseCost> {
    let (t_v, t_n, t_f) = (tiles.t_v_agg, tiles.t_n, tiles.t_f_agg);
    if t_v * t_n * t_f > hw.pe_count {
        return Err(Error::Config(format!(
            "aggregation tile product {} exceeds {} PEs",
            t_v * t_n * t_f,
            hw.pe_count
        )));
    }
    let f = num_features;
    let f_passes = div_ceil(f, t_f).max(if f == 0 { 0 } else { 1 });
    // Partial sums spill only when the reduction dim is split across outer
    // temporal passes with another loop (F) nested inside it.
    let n_outside_f = match (loops.position(Dim::N), loops.position(Dim::F)) {
        (Some(n), Some(fp)) => n < fp,
        _ => false,
    };
    let tree_fill = if t_n > 1 { log2_ceil(t_n) } else { 0 };

    let tile_cost = |chunk: &[usize]| -> AggTally {
        let mut steps = 0u64;
        let mut macs = 0u64;
        let mut edges = 0u64;
        let mut psum_spills = 0u64;
        for &deg in chunk {
            let deg = deg as u64;
            let n_passes = div_ceil(deg, t_n);
            steps = steps.max(n_passes * f_passes);
            macs += deg * f;
            edges += deg;
            if n_outside_f && n_passes > 1 {
                psum_spills += f * (n_passes - 1);
            }
        }
        let cycles = if steps == 0 {
            0
        } else {
            steps + hw.distribution_latency + tree_fill
        };
        AggTally {
            cycles,
            macs,
            edges,
            psum_spills,
        }
    };

    let tally = run_chunks(degrees, t_v as usize, parallel, tile_cost);

    let num_vertices = degrees.len() as u64;
    let mut cost = PhaseCost {
        cycles: tally.cycles,
        mac_count: tally.macs,
        ..Default::default()
    };
    cost.gb_reads.add(Operand::Adj, tally.edges);
    cost.gb_reads.add(roles.input, tally.edges * f);
    cost.gb_writes.add(roles.output, num_vertices * f);
    cost.gb_reads.add(Operand::Psum, tally.psum_spills);
    cost.gb_writes.add(Operand::Psum, tally.psum_spills);
    cost.l1_reads.add(roles.input, tally.macs);
    cost.l1_reads.add(Operand::Psum, tally.macs);
    cost.l1_writes.add(Operand::Psum, tally.macs);
    Ok(cost.finish(hw.pe_count))
}

#[cfg(feature = "parallel")]
fn run_chunks(
    degrees: &[usize],
    chunk: usize,
    parallel: bool,
    tile_cost: impl Fn(&[usize]) -> AggTally + Sync,
) -> AggTally {
    if parallel {
        degrees
            .par_chunks(chunk.max(1))
            .map(&tile_cost)
            .reduce(AggTally::default, AggTally::merge)
    } else {
        degrees
            .chunks(chunk.max(1))
            .map(tile_cost)
            .fold(AggTally::default(), AggTally::merge)
    }
}

#[cfg(not(feature = "parallel"))]
fn run_chunks(
    degrees: &[usize],
    chunk: usize,
    _parallel: bool,
    tile_cost: impl Fn(&[usize]) -> AggTally + Sync,
) -> AggTally {
    degrees
        .chunks(chunk.max(1))
        .map(tile_cost)
        .fold(AggTally::default(), AggTally::merge)
}

/// Cycle and access model for a dense `V x F x G` combination.
pub fn combination_cost(
    v: u64,
    f: u64,
    g: u64,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
) -> Result<PhaseCost> {
    combination_cost_impl(
        v,
        f,
        g,
        loops,
        tiles,
        hw,
        OperandRoles {
            input: Operand::Int,
            output: Operand::Op,
        },
    )
}

pub(crate) fn combination_cost_impl(
    v: u64,
    f: u64,
    g: u64,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    roles: OperandRoles,
) -> Result<PhaseCost> {
    let (t_v, t_g, t_f) = (tiles.t_v_cmb, tiles.t_g, tiles.t_f_cmb);
    if t_v * t_g * t_f > hw.pe_count {
        return Err(Error::Config(format!(
            "combination tile product {} exceeds {} PEs",
            t_v * t_g * t_f,
            hw.pe_count
        )));
    }
    if v == 0 || f == 0 || g == 0 {
        return Ok(PhaseCost::default().finish(hw.pe_count));
    }
    let v_tiles = div_ceil(v, t_v);
    let g_tiles = div_ceil(g, t_g);
    let f_passes = div_ceil(f, t_f);
    let steps = v_tiles * g_tiles * f_passes;
    let tree_fill = if t_f > 1 { log2_ceil(t_f) } else { 0 };
    let overhead = v_tiles * g_tiles * (hw.distribution_latency + tree_fill);
    let macs = v * f * g;

    let mut cost = PhaseCost {
        cycles: steps + overhead,
        mac_count: macs,
        ..Default::default()
    };
    cost.gb_reads.add(roles.input, v * f);
    cost.gb_reads.add(Operand::Wt, v_tiles * f * g);
    cost.gb_writes.add(roles.output, v * g);
    // The reduction dim (F) split across outer temporal passes spills
    // partial outputs unless it is the innermost loop.
    let f_outside_g = match (loops.position(Dim::F), loops.position(Dim::G)) {
        (Some(fp), Some(gp)) => fp < gp,
        _ => false,
    };
    if f_outside_g && f_passes > 1 {
        cost.gb_reads.add(Operand::Psum, v * g * (f_passes - 1));
        cost.gb_writes.add(Operand::Psum, v * g * (f_passes - 1));
    }
    cost.l1_reads.add(roles.input, macs);
    cost.l1_reads.add(Operand::Wt, macs);
    cost.l1_writes.add(Operand::Psum, macs);
    Ok(cost.finish(hw.pe_count))
}

/// One pipeline unit: a vertex range and a feature range of the
/// intermediate matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnitRange {
    pub v_start: usize,
    pub v_end: usize,
    pub f_start: u64,
    pub f_end: u64,
}

/// Partitions the `V x F` intermediate matrix into pipeline units.
/// `v_major` orders element-granularity units with vertex chunks outermost.
pub fn partition_units(
    v: usize,
    f: u64,
    granularity: Granularity,
    t_v_max: u64,
    t_f_max: u64,
    v_major: bool,
) -> Vec<UnitRange> {
    let v_chunks: Vec<(usize, usize)> = chunk_ranges(v as u64, t_v_max)
        .into_iter()
        .map(|(a, b)| (a as usize, b as usize))
        .collect();
    let f_chunks = chunk_ranges(f, t_f_max);
    match granularity {
        Granularity::Row => v_chunks
            .into_iter()
            .map(|(a, b)| UnitRange {
                v_start: a,
                v_end: b,
                f_start: 0,
                f_end: f,
            })
            .collect(),
        Granularity::Column => f_chunks
            .into_iter()
            .map(|(a, b)| UnitRange {
                v_start: 0,
                v_end: v,
                f_start: a,
                f_end: b,
            })
            .collect(),
        Granularity::Element => {
            let mut units = Vec::with_capacity(v_chunks.len() * f_chunks.len());
            if v_major {
                for &(va, vb) in &v_chunks {
                    for &(fa, fb) in &f_chunks {
                        units.push(UnitRange {
                            v_start: va,
                            v_end: vb,
                            f_start: fa,
                            f_end: fb,
                        });
                    }
                }
            } else {
                for &(fa, fb) in &f_chunks {
                    for &(va, vb) in &v_chunks {
                        units.push(UnitRange {
                            v_start: va,
                            v_end: vb,
                            f_start: fa,
                            f_end: fb,
                        });
                    }
                }
            }
            units
        }
    }
}

fn chunk_ranges(total: u64, chunk: u64) -> Vec<(u64, u64)> {
    let chunk = chunk.max(1);
    let mut out = Vec::new();
    let mut start = 0;
    while start < total {
        let end = (start + chunk).min(total);
        out.push((start, end));
        start = end;
    }
    out
}

pub fn ppel(granularity: Granularity, t_v_max: u64, t_f_max: u64, v: u64, f: u64) -> u64 {
    match granularity {
        Granularity::Element => t_v_max * t_f_max,
        Granularity::Row => t_v_max * f,
        Granularity::Column => t_f_max * v,
    }
}

/// Costs each pipeline unit of the aggregation phase with the whole-phase
/// tile model restricted to the unit's vertices and features.
pub fn aggregation_unit_costs(
    g: &CsrGraph,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    units: &[UnitRange],
    unit_elems: u64,
) -> Result<UnitCosts> {
    let degrees = g.degrees();
    let roles = OperandRoles {
        input: Operand::Inp,
        output: Operand::Int,
    };
    let costs: Result<Vec<PhaseCost>> = units
        .iter()
        .map(|u| {
            let sub = &degrees[u.v_start..u.v_end];
            let f_sub = u.f_end - u.f_start;
            // Feature-sliced units only touch their slice of each
            // neighbor row.
            aggregation_cost_impl(sub, f_sub, loops, tiles, hw, roles, false)
        })
        .collect();
    Ok(UnitCosts {
        units: costs?,
        ppel: unit_elems,
    })
}

/// Costs each pipeline unit of the combination phase. A unit consumes its
/// slice of the intermediate matrix and produces (partial) output rows.
pub fn combination_unit_costs(
    g_dim: u64,
    loops: &LoopSpec,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    units: &[UnitRange],
    unit_elems: u64,
) -> Result<UnitCosts> {
    let roles = OperandRoles {
        input: Operand::Int,
        output: Operand::Op,
    };
    let costs: Result<Vec<PhaseCost>> = units
        .iter()
        .map(|u| {
            let v_sub = (u.v_end - u.v_start) as u64;
            let f_sub = u.f_end - u.f_start;
            combination_cost_impl(v_sub, f_sub, g_dim, loops, tiles, hw, roles)
        })
        .collect();
    Ok(UnitCosts {
        units: costs?,
        ppel: unit_elems,
    })
}

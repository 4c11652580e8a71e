//! Event-level oracle: replays small instances cycle by cycle with explicit
//! per-lane job queues instead of closed-form arithmetic, and checks the
//! scheduled computation functionally against a dense reference. Used to
//! cross-validate the analytical model on instances up to 64 vertices and
//! 32 features.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::CsrGraph;
use crate::interphase::LayerHardware;
use crate::phase::{log2_ceil, partition_units, HardwareConfig, UnitRange};
use crate::taxonomy::{DataflowSpec, Dim, InterPhase, PhaseOrder, TileConfig};

pub const MAX_ORACLE_VERTICES: usize = 64;
pub const MAX_ORACLE_FEATURES: u64 = 32;

/// A replayed interval of activity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEvent {
    pub kind: &'static str,
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub cycles: u64,
    pub mac_count: u64,
    pub events: Vec<OracleEvent>,
}

fn check_size(v: usize, f: u64, g: u64) -> Result<()> {
    if v > MAX_ORACLE_VERTICES || f > MAX_ORACLE_FEATURES || g > MAX_ORACLE_FEATURES {
        return Err(Error::TooLarge(format!(
            "oracle replay is bounded to V <= {MAX_ORACLE_VERTICES}, F/G <= \
             {MAX_ORACLE_FEATURES}; got V = {v}, F = {f}, G = {g}"
        )));
    }
    Ok(())
}

/// Replays the aggregation phase over a degree slice. Each vertex lane in
/// a tile holds a queue of (neighbor pass, feature pass) jobs; the tile
/// occupies the array until its slowest lane drains.
fn replay_agg(
    degrees: &[usize],
    f: u64,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    events: &mut Vec<OracleEvent>,
    clock: &mut u64,
) -> u64 {
    let (t_v, t_n, t_f) = (tiles.t_v_agg, tiles.t_n, tiles.t_f_agg);
    let f_passes = if f == 0 { 0 } else { f.div_ceil(t_f) };
    let mut macs = 0;
    for chunk in degrees.chunks(t_v.max(1) as usize) {
        let mut lanes: Vec<u64> = chunk
            .iter()
            .map(|&d| (d as u64).div_ceil(t_n) * f_passes)
            .collect();
        if lanes.iter().all(|&j| j == 0) {
            continue;
        }
        let start = *clock;
        // Distribute operands, then fill the adder tree if the reduction
        // is spatial.
        *clock += hw.distribution_latency;
        if t_n > 1 {
            *clock += log2_ceil(t_n);
        }
        while lanes.iter().any(|&j| j > 0) {
            *clock += 1;
            for job in lanes.iter_mut() {
                if *job > 0 {
                    *job -= 1;
                }
            }
        }
        events.push(OracleEvent {
            kind: "agg-tile",
            start,
            end: *clock,
        });
        macs += chunk.iter().map(|&d| d as u64 * f).sum::<u64>();
    }
    macs
}

/// Replays the combination phase: each outer (vertex, output) tile pays a
/// distribution plus tree fill, then counts down its feature passes.
fn replay_cmb(
    v: u64,
    f: u64,
    g: u64,
    tiles: &TileConfig,
    hw: &HardwareConfig,
    events: &mut Vec<OracleEvent>,
    clock: &mut u64,
) -> u64 {
    let (t_v, t_g, t_f) = (tiles.t_v_cmb, tiles.t_g, tiles.t_f_cmb);
    if v == 0 || f == 0 || g == 0 {
        return 0;
    }
    for _v_tile in 0..v.div_ceil(t_v) {
        for _g_tile in 0..g.div_ceil(t_g) {
            let start = *clock;
            *clock += hw.distribution_latency;
            if t_f > 1 {
                *clock += log2_ceil(t_f);
            }
            let mut passes = f.div_ceil(t_f);
            while passes > 0 {
                *clock += 1;
                passes -= 1;
            }
            events.push(OracleEvent {
                kind: "cmb-tile",
                start,
                end: *clock,
            });
        }
    }
    v * f * g
}

/// Streams the intermediate back through the fill port, cycle by cycle.
fn replay_engn_load(int_v: u64, int_f: u64, tiles: &TileConfig, hw: &HardwareConfig) -> u64 {
    let (t_v, t_f) = (tiles.t_v_agg.max(1), tiles.t_f_agg.max(1));
    let bw = hw.fill_bandwidth.max(1);
    let mut cycles = 0;
    let mut v0 = 0;
    while v0 < int_v {
        let vh = t_v.min(int_v - v0);
        let mut f0 = 0;
        while f0 < int_f {
            let fh = t_f.min(int_f - f0);
            let mut left = vh * fh;
            while left > 0 {
                cycles += 1;
                left = left.saturating_sub(bw);
            }
            f0 += fh;
        }
        v0 += vh;
    }
    cycles
}

/// Cycle-accurate replay of a whole layer. Independent of the analytical
/// model: it advances an explicit clock and drains per-lane job queues.
pub fn replay_layer(
    g: &CsrGraph,
    g_dim: u64,
    spec: &DataflowSpec,
    hw: &LayerHardware,
) -> Result<OracleResult> {
    check_size(g.num_vertices(), g.num_features(), g_dim)?;
    let degrees = g.degrees();
    let v = g.num_vertices() as u64;
    let f = g.num_features();
    let tiles = &spec.tiles;
    let agg_features = match spec.order {
        PhaseOrder::AC => f,
        PhaseOrder::CA => g_dim,
    };
    let (int_v, int_f) = match spec.order {
        PhaseOrder::AC => (v, f),
        PhaseOrder::CA => (v, g_dim),
    };

    let mut events = Vec::new();
    match spec.inter {
        InterPhase::Seq | InterPhase::SpArbitrary | InterPhase::SpEngn => {
            let mut clock = 0;
            let mut macs = 0;
            // Shared array: first phase runs to completion, then the second.
            let run_agg = |events: &mut Vec<OracleEvent>, clock: &mut u64| {
                replay_agg(&degrees, agg_features, tiles, &hw.agg, events, clock)
            };
            let run_cmb = |events: &mut Vec<OracleEvent>, clock: &mut u64| {
                replay_cmb(v, f, g_dim, tiles, &hw.cmb, events, clock)
            };
            let mid;
            match spec.order {
                PhaseOrder::AC => {
                    macs += run_agg(&mut events, &mut clock);
                    mid = clock;
                    macs += run_cmb(&mut events, &mut clock);
                }
                PhaseOrder::CA => {
                    macs += run_cmb(&mut events, &mut clock);
                    mid = clock;
                    macs += run_agg(&mut events, &mut clock);
                }
            }
            if spec.inter == InterPhase::SpEngn {
                // The hand-off can save at most the shorter phase.
                let load = replay_engn_load(int_v, int_f, tiles, &hw.agg);
                let shorter = mid.min(clock - mid);
                clock -= load.min(shorter);
            }
            Ok(OracleResult {
                cycles: clock,
                mac_count: macs,
                events,
            })
        }
        InterPhase::Pp(gran) => {
            let producer_loops = match spec.order {
                PhaseOrder::AC => &spec.agg,
                PhaseOrder::CA => &spec.cmb,
            };
            let minor = match spec.order {
                PhaseOrder::AC => Dim::F,
                PhaseOrder::CA => Dim::G,
            };
            let v_major = match (producer_loops.position(Dim::V), producer_loops.position(minor))
            {
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
            // Replay every unit in isolation to get its busy time.
            let mut macs = 0;
            let mut unit_a = Vec::with_capacity(units.len());
            let mut unit_c = Vec::with_capacity(units.len());
            for u in &units {
                let (a, c, m) = replay_unit(g, g_dim, spec, hw, u)?;
                unit_a.push(a);
                unit_c.push(c);
                macs += m;
            }
            // Two-stage machine with double buffering: each slot runs
            // producer unit i against consumer unit i - 1, swapping
            // buffers when both finish.
            let n = units.len();
            let mut clock = 0;
            for slot in 0..=n {
                if n == 0 {
                    break;
                }
                let start = clock;
                let mut p_left = if slot < n { unit_a[slot] } else { 0 };
                let mut c_left = if slot > 0 { unit_c[slot - 1] } else { 0 };
                while p_left > 0 || c_left > 0 {
                    clock += 1;
                    p_left = p_left.saturating_sub(1);
                    c_left = c_left.saturating_sub(1);
                }
                events.push(OracleEvent {
                    kind: "pipeline-slot",
                    start,
                    end: clock,
                });
            }
            Ok(OracleResult {
                cycles: clock,
                mac_count: macs,
                events,
            })
        }
    }
}

/// Busy time of one pipeline unit on each side, plus its MACs.
fn replay_unit(
    g: &CsrGraph,
    g_dim: u64,
    spec: &DataflowSpec,
    hw: &LayerHardware,
    unit: &UnitRange,
) -> Result<(u64, u64, u64)> {
    let degrees = g.degrees();
    let sub = &degrees[unit.v_start..unit.v_end];
    let f_sub = unit.f_end - unit.f_start;
    let v_sub = (unit.v_end - unit.v_start) as u64;
    let tiles = &spec.tiles;
    let mut scratch = Vec::new();
    match spec.order {
        PhaseOrder::AC => {
            let mut a_clock = 0;
            let agg_macs = replay_agg(sub, f_sub, tiles, &hw.agg, &mut scratch, &mut a_clock);
            let mut c_clock = 0;
            let cmb_macs = replay_cmb(
                v_sub,
                f_sub,
                g_dim,
                tiles,
                &hw.cmb,
                &mut scratch,
                &mut c_clock,
            );
            Ok((a_clock, c_clock, agg_macs + cmb_macs))
        }
        PhaseOrder::CA => {
            let mut p_clock = 0;
            let cmb_macs = replay_cmb(
                v_sub,
                g.num_features(),
                f_sub,
                tiles,
                &hw.cmb,
                &mut scratch,
                &mut p_clock,
            );
            let mut c_clock = 0;
            let agg_macs = replay_agg(sub, f_sub, tiles, &hw.agg, &mut scratch, &mut c_clock);
            Ok((p_clock, c_clock, cmb_macs + agg_macs))
        }
    }
}

/// Computes the layer through the scheduled tile order with integer data
/// and compares against a dense reference `(A . X) . W`. Returns whether
/// they agree; disagreement means the tiling drops or double-counts work.
pub fn functional_check(g: &CsrGraph, g_dim: u64, spec: &DataflowSpec, seed: u64) -> Result<bool> {
    check_size(g.num_vertices(), g.num_features(), g_dim)?;
    let v = g.num_vertices();
    let f = g.num_features() as usize;
    let gd = g_dim as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<Vec<i64>> = (0..v)
        .map(|_| (0..f).map(|_| rng.gen_range(-4..=4)).collect())
        .collect();
    let w: Vec<Vec<i64>> = (0..f)
        .map(|_| (0..gd).map(|_| rng.gen_range(-4..=4)).collect())
        .collect();

    // Dense reference.
    let mut agg_ref = vec![vec![0i64; f]; v];
    for (u, row) in agg_ref.iter_mut().enumerate() {
        for &nb in g.neighbors(u) {
            for j in 0..f {
                row[j] += x[nb as usize][j];
            }
        }
    }
    let mut out_ref = vec![vec![0i64; gd]; v];
    for u in 0..v {
        for k in 0..gd {
            for j in 0..f {
                out_ref[u][k] += agg_ref[u][j] * w[j][k];
            }
        }
    }

    let out = match spec.order {
        PhaseOrder::AC => {
            let inter = tiled_aggregate(g, &x, f, &spec.tiles);
            tiled_combine(&inter, &w, v, f, gd, &spec.tiles)
        }
        PhaseOrder::CA => {
            let xw = tiled_combine(&x, &w, v, f, gd, &spec.tiles);
            tiled_aggregate(g, &xw, gd, &spec.tiles)
        }
    };
    Ok(out == out_ref)
}

/// Aggregation walked in the tiled order: vertex tiles, neighbor passes of
/// `T_N`, feature passes of `T_F`.
fn tiled_aggregate(g: &CsrGraph, x: &[Vec<i64>], width: usize, tiles: &TileConfig) -> Vec<Vec<i64>> {
    let v = g.num_vertices();
    let t_v = tiles.t_v_agg.max(1) as usize;
    let t_n = tiles.t_n.max(1) as usize;
    let t_f = tiles.t_f_agg.max(1) as usize;
    let mut out = vec![vec![0i64; width]; v];
    let mut v0 = 0;
    while v0 < v {
        let v1 = (v0 + t_v).min(v);
        for (u, row) in out.iter_mut().enumerate().take(v1).skip(v0) {
            let nbrs = g.neighbors(u);
            for n_pass in nbrs.chunks(t_n) {
                let mut f0 = 0;
                while f0 < width {
                    let f1 = (f0 + t_f).min(width);
                    for &nb in n_pass {
                        for j in f0..f1 {
                            row[j] += x[nb as usize][j];
                        }
                    }
                    f0 = f1;
                }
            }
        }
        v0 = v1;
    }
    out
}

/// Combination walked in the tiled order: vertex x output tiles with
/// feature passes of `T_F` accumulating into the output.
fn tiled_combine(
    inter: &[Vec<i64>],
    w: &[Vec<i64>],
    v: usize,
    f: usize,
    gd: usize,
    tiles: &TileConfig,
) -> Vec<Vec<i64>> {
    let t_v = tiles.t_v_cmb.max(1) as usize;
    let t_g = tiles.t_g.max(1) as usize;
    let t_f = tiles.t_f_cmb.max(1) as usize;
    let mut out = vec![vec![0i64; gd]; v];
    let mut v0 = 0;
    while v0 < v {
        let v1 = (v0 + t_v).min(v);
        let mut g0 = 0;
        while g0 < gd {
            let g1 = (g0 + t_g).min(gd);
            let mut f0 = 0;
            while f0 < f {
                let f1 = (f0 + t_f).min(f);
                for u in v0..v1 {
                    for k in g0..g1 {
                        for j in f0..f1 {
                            out[u][k] += inter[u][j] * w[j][k];
                        }
                    }
                }
                f0 = f1;
            }
            g0 = g1;
        }
        v0 = v1;
    }
    out
}

//! Access-count energy model: every buffer access costs a fixed per-level
//! energy, uniform across reads and writes.

use serde::{Deserialize, Serialize};

use crate::interphase::LayerCost;
use crate::phase::{AccessMap, Operand, OPERANDS};

/// Per-access energies in picojoules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    pub gb_pj: f64,
    pub l1_pj: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        Self {
            gb_pj: 1.046,
            l1_pj: 0.053,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Gb,
    L1,
}

impl Level {
    pub fn label(self) -> &'static str {
        match self {
            Level::Gb => "gb",
            Level::L1 => "l1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Read,
    Write,
}

impl Direction {
    pub fn label(self) -> &'static str {
        match self {
            Direction::Read => "rd",
            Direction::Write => "wr",
        }
    }
}

/// One energy cell: a buffer level, an access direction and an operand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyCell {
    pub level: Level,
    pub direction: Direction,
    pub operand: Operand,
    pub accesses: u64,
    pub energy_pj: f64,
}

/// Full energy breakdown for one layer: 24 cells in a fixed order
/// (level, then direction, then operand).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub cells: Vec<EnergyCell>,
    pub total_pj: f64,
}

impl EnergyReport {
    pub fn total_for_level(&self, level: Level) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.level == level)
            .map(|c| c.energy_pj)
            .sum()
    }

    pub fn total_for_operand(&self, operand: Operand) -> f64 {
        self.cells
            .iter()
            .filter(|c| c.operand == operand)
            .map(|c| c.energy_pj)
            .sum()
    }

    pub fn gb_accesses(&self) -> u64 {
        self.cells
            .iter()
            .filter(|c| c.level == Level::Gb)
            .map(|c| c.accesses)
            .sum()
    }
}

pub fn operand_label(op: Operand) -> &'static str {
    match op {
        Operand::Adj => "adj",
        Operand::Inp => "inp",
        Operand::Int => "int",
        Operand::Wt => "wt",
        Operand::Op => "op",
        Operand::Psum => "psum",
    }
}

impl EnergyModel {
    pub fn cost_per_access(&self, level: Level) -> f64 {
        match level {
            Level::Gb => self.gb_pj,
            Level::L1 => self.l1_pj,
        }
    }

    /// Breaks a layer's access tallies down into per-cell energies.
    pub fn report(&self, cost: &LayerCost) -> EnergyReport {
        let maps: [(Level, Direction, &AccessMap); 4] = [
            (Level::Gb, Direction::Read, &cost.gb_reads),
            (Level::Gb, Direction::Write, &cost.gb_writes),
            (Level::L1, Direction::Read, &cost.l1_reads),
            (Level::L1, Direction::Write, &cost.l1_writes),
        ];
        let mut cells = Vec::with_capacity(24);
        let mut total = 0.0;
        for (level, direction, map) in maps {
            for op in OPERANDS {
                let accesses = map.get(op);
                let energy_pj = accesses as f64 * self.cost_per_access(level);
                total += energy_pj;
                cells.push(EnergyCell {
                    level,
                    direction,
                    operand: op,
                    accesses,
                    energy_pj,
                });
            }
        }
        EnergyReport {
            cells,
            total_pj: total,
        }
    }
}

//! Fixed-schema CSV emitter and reader for sweep rows. The column order is
//! part of the tool's contract; floats are formatted with fixed precision
//! so identical runs emit identical bytes.

use gnnflow_core::energy::{operand_label, EnergyReport};
use gnnflow_core::error::{Error, Result};
use gnnflow_core::sweep::SweepRow;

pub const FIXED_COLUMNS: [&str; 16] = [
    "dataset",
    "dataflow",
    "t_v_agg",
    "t_n",
    "t_f_agg",
    "t_v_cmb",
    "t_g",
    "t_f_cmb",
    "cycles",
    "t_agg",
    "t_cmb",
    "t_load",
    "buffer_inter",
    "utilization",
    "energy_pj",
    "norm_runtime",
];

/// The 24 energy-cell columns, in report order: level, direction, operand.
pub fn energy_columns() -> Vec<String> {
    let mut cols = Vec::with_capacity(24);
    for (level, dir) in [("gb", "rd"), ("gb", "wr"), ("l1", "rd"), ("l1", "wr")] {
        for op in ["adj", "inp", "int", "wt", "op", "psum"] {
            cols.push(format!("{level}_{dir}_{op}_pj"));
        }
    }
    cols
}

pub fn header() -> String {
    let mut cols: Vec<String> = FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    cols.extend(energy_columns());
    cols.join(",")
}

fn energy_cells_in_order(report: &EnergyReport) -> Vec<f64> {
    // The report already iterates level-major, direction, operand.
    report.cells.iter().map(|c| c.energy_pj).collect()
}

pub fn format_rows(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(&header());
    out.push('\n');
    for row in rows {
        let t = row.tiles.as_tuple();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.3},{:.6}",
            row.dataset,
            row.name,
            t[0],
            t[1],
            t[2],
            t[3],
            t[4],
            t[5],
            row.cost.total_cycles,
            row.cost.t_agg,
            row.cost.t_cmb,
            row.cost.t_load,
            row.cost.buffer_inter,
            row.cost.utilization,
            row.energy.total_pj,
            row.norm_runtime,
        ));
        for cell in energy_cells_in_order(&row.energy) {
            out.push_str(&format!(",{cell:.3}"));
        }
        out.push('\n');
    }
    out
}

/// A parsed CSV row, as consumed by the report renderer.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub dataset: String,
    pub dataflow: String,
    pub tiles: [u64; 6],
    pub cycles: u64,
    pub t_agg: u64,
    pub t_cmb: u64,
    pub t_load: u64,
    pub buffer_inter: u64,
    pub utilization: f64,
    pub energy_pj: f64,
    pub norm_runtime: f64,
    /// 24 energy cells in header order.
    pub energy_cells: Vec<f64>,
}

impl CsvRow {
    /// GB-level energy per operand (read + write), in operand order.
    pub fn gb_energy_by_operand(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, val) in out.iter_mut().enumerate() {
            *val = self.energy_cells[i] + self.energy_cells[6 + i];
        }
        out
    }

    /// Total energy per operand across both levels, in operand order.
    pub fn energy_by_operand(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        for (i, val) in out.iter_mut().enumerate() {
            for block in 0..4 {
                *val += self.energy_cells[block * 6 + i];
            }
        }
        out
    }
}

pub fn operand_labels() -> [&'static str; 6] {
    use gnnflow_core::phase::OPERANDS;
    let mut out = [""; 6];
    for (i, op) in OPERANDS.iter().enumerate() {
        out[i] = operand_label(*op);
    }
    out
}

pub fn parse_rows(text: &str) -> Result<Vec<CsvRow>> {
    let mut lines = text.lines();
    let head = lines
        .next()
        .ok_or_else(|| Error::Config("CSV is empty".into()))?;
    if head != header() {
        return Err(Error::Config(format!(
            "CSV header does not match the sweep schema (got `{}`)",
            head
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 16 + 24 {
            return Err(Error::Config(format!(
                "CSV row {} has {} fields, expected 40",
                lineno + 2,
                fields.len()
            )));
        }
        let int = |i: usize| -> Result<u64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad integer `{}` in row {}", fields[i], lineno + 2)))
        };
        let float = |i: usize| -> Result<f64> {
            fields[i]
                .parse()
                .map_err(|_| Error::Config(format!("bad number `{}` in row {}", fields[i], lineno + 2)))
        };
        let mut energy_cells = Vec::with_capacity(24);
        for i in 16..40 {
            energy_cells.push(float(i)?);
        }
        rows.push(CsvRow {
            dataset: fields[0].to_string(),
            dataflow: fields[1].to_string(),
            tiles: [int(2)?, int(3)?, int(4)?, int(5)?, int(6)?, int(7)?],
            cycles: int(8)?,
            t_agg: int(9)?,
            t_cmb: int(10)?,
            t_load: int(11)?,
            buffer_inter: int(12)?,
            utilization: float(13)?,
            energy_pj: float(14)?,
            norm_runtime: float(15)?,
            energy_cells,
        });
    }
    if rows.is_empty() {
        return Err(Error::Config("CSV has no data rows".into()));
    }
    Ok(rows)
}

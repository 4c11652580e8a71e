//! Minimal deterministic SVG bar charts: fixed viewport, fixed element
//! order and fixed-precision coordinates so identical inputs render
//! byte-identical files.

use gnnflow_core::error::{Error, Result};

use crate::csv::{operand_labels, CsvRow};

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 110.0;

const OPERAND_COLORS: [&str; 6] = [
    "#4c72b0", // adj
    "#dd8452", // inp
    "#55a868", // int
    "#c44e52", // wt
    "#8172b3", // op
    "#937860", // psum
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChartKind {
    RuntimeBars,
    EnergyStacked,
    GbBreakdown,
}

impl std::str::FromStr for ChartKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "runtime-bars" => Ok(Self::RuntimeBars),
            "energy-stacked" => Ok(Self::EnergyStacked),
            "gb-breakdown" => Ok(Self::GbBreakdown),
            other => Err(Error::Config(format!(
                "unknown report kind `{other}` (expected runtime-bars, energy-stacked or \
                 gb-breakdown)"
            ))),
        }
    }
}

pub fn render(kind: ChartKind, rows: &[CsvRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to chart".into()));
    }
    match kind {
        ChartKind::RuntimeBars => Ok(render_runtime_bars(rows)),
        ChartKind::EnergyStacked => Ok(render_stacked(rows, false, "Energy (pJ)")),
        ChartKind::GbBreakdown => Ok(render_stacked(rows, true, "Global Buffer energy (pJ)")),
    }
}

fn row_label(row: &CsvRow, single_dataset: bool) -> String {
    if single_dataset {
        row.dataflow.clone()
    } else {
        format!("{}/{}", row.dataset, row.dataflow)
    }
}

struct Canvas {
    out: String,
}

impl Canvas {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"15\" \
             text-anchor=\"middle\">{title}</text>\n",
            WIDTH / 2.0
        ));
        Canvas { out }
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, label: &str) {
        self.out.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" \
             fill=\"{fill}\"><title>{label}</title></rect>\n"
        ));
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, dash: bool) {
        let dash_attr = if dash {
            " stroke-dasharray=\"4 3\""
        } else {
            ""
        };
        self.out.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
             stroke=\"{stroke}\" stroke-width=\"1\"{dash_attr}/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, size: u32, anchor: &str, transform: &str, body: &str) {
        let t = if transform.is_empty() {
            String::new()
        } else {
            format!(" transform=\"{transform}\"")
        };
        self.out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"{size}\" \
             text-anchor=\"{anchor}\"{t}>{body}</text>\n"
        ));
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn plot_extents() -> (f64, f64, f64, f64) {
    (
        MARGIN_LEFT,
        MARGIN_TOP,
        WIDTH - MARGIN_RIGHT,
        HEIGHT - MARGIN_BOTTOM,
    )
}

fn axes(c: &mut Canvas, y_max: f64, y_label: &str) {
    let (x0, y0, x1, y1) = plot_extents();
    c.line(x0, y1, x1, y1, "#333333", false);
    c.line(x0, y0, x0, y1, "#333333", false);
    // Four horizontal gridlines with value labels.
    for i in 1..=4 {
        let frac = i as f64 / 4.0;
        let y = y1 - frac * (y1 - y0);
        c.line(x0, y, x1, y, "#dddddd", false);
        c.text(
            x0 - 6.0,
            y + 4.0,
            11,
            "end",
            "",
            &format_value(frac * y_max),
        );
    }
    c.text(
        16.0,
        (y0 + y1) / 2.0,
        12,
        "middle",
        &format!("rotate(-90 16 {:.2})", (y0 + y1) / 2.0),
        y_label,
    );
}

fn format_value(v: f64) -> String {
    if v >= 1000.0 {
        format!("{:.0}", v)
    } else {
        format!("{:.2}", v)
    }
}

fn bar_slots(n: usize) -> Vec<(f64, f64)> {
    let (x0, _, x1, _) = plot_extents();
    let span = x1 - x0;
    let slot = span / n as f64;
    let bar_w = (slot * 0.7).min(80.0);
    (0..n)
        .map(|i| (x0 + slot * (i as f64 + 0.5) - bar_w / 2.0, bar_w))
        .collect()
}

fn x_labels(c: &mut Canvas, rows: &[CsvRow], single_dataset: bool) {
    let (_, _, _, y1) = plot_extents();
    for (i, (bx, bw)) in bar_slots(rows.len()).iter().enumerate() {
        let cx = bx + bw / 2.0;
        let label = row_label(&rows[i], single_dataset);
        c.text(
            cx,
            y1 + 14.0,
            11,
            "end",
            &format!("rotate(-40 {:.2} {:.2})", cx, y1 + 14.0),
            &label,
        );
    }
}

fn render_runtime_bars(rows: &[CsvRow]) -> String {
    let single = rows.iter().all(|r| r.dataset == rows[0].dataset);
    let y_max = rows
        .iter()
        .map(|r| r.norm_runtime)
        .fold(1.0f64, f64::max)
        * 1.1;
    let (_, y0, x1, y1) = plot_extents();
    let mut c = Canvas::new("Normalized runtime");
    axes(&mut c, y_max, "Runtime (normalized to baseline)");
    for (i, (bx, bw)) in bar_slots(rows.len()).iter().enumerate() {
        let h = (rows[i].norm_runtime / y_max) * (y1 - y0);
        c.rect(
            *bx,
            y1 - h,
            *bw,
            h,
            "#4c72b0",
            &format!(
                "{} = {:.4}",
                row_label(&rows[i], single),
                rows[i].norm_runtime
            ),
        );
    }
    // Baseline gridline at 1.0.
    let y_base = y1 - (1.0 / y_max) * (y1 - y0);
    c.line(plot_extents().0, y_base, x1, y_base, "#c44e52", true);
    x_labels(&mut c, rows, single);
    c.finish()
}

fn render_stacked(rows: &[CsvRow], gb_only: bool, y_label: &str) -> String {
    let single = rows.iter().all(|r| r.dataset == rows[0].dataset);
    let totals: Vec<[f64; 6]> = rows
        .iter()
        .map(|r| {
            if gb_only {
                r.gb_energy_by_operand()
            } else {
                r.energy_by_operand()
            }
        })
        .collect();
    let y_max = totals
        .iter()
        .map(|t| t.iter().sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12)
        * 1.1;
    let (_, y0, _, y1) = plot_extents();
    let title = if gb_only {
        "Global Buffer access energy by operand"
    } else {
        "Buffer access energy by operand"
    };
    let mut c = Canvas::new(title);
    axes(&mut c, y_max, y_label);
    let labels = operand_labels();
    for (i, (bx, bw)) in bar_slots(rows.len()).iter().enumerate() {
        let mut y_cursor = y1;
        for (op, &val) in totals[i].iter().enumerate() {
            if val <= 0.0 {
                // Zero segments are omitted entirely (e.g. Int for
                // EnGN-like pipelines).
                continue;
            }
            let h = (val / y_max) * (y1 - y0);
            y_cursor -= h;
            c.rect(
                *bx,
                y_cursor,
                *bw,
                h,
                OPERAND_COLORS[op],
                &format!(
                    "{} {} = {:.1} pJ",
                    row_label(&rows[i], single),
                    labels[op],
                    val
                ),
            );
        }
    }
    x_labels(&mut c, rows, single);
    // Legend, fixed order.
    let (x0, y0, ..) = plot_extents();
    for (op, label) in labels.iter().enumerate() {
        let lx = x0 + 8.0 + op as f64 * 70.0;
        c.rect(lx, y0 + 4.0, 10.0, 10.0, OPERAND_COLORS[op], label);
        c.text(lx + 14.0, y0 + 13.0, 11, "start", "", label);
    }
    c.finish()
}

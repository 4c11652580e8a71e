//! Parser and canonical formatter for the dataflow notation.
//!
//! Grammar: `INTER '_' ORDER '(' LOOPS ',' LOOPS ')'` where `LOOPS` is a
//! sequence of `Dim '_' subscript` tokens with optional `{}` groups and
//! subscripts `s`, `t`, `x`. `SP` parses to the EnGN-like kind (the
//! arbitrary-interleaving variant is selected via configuration), and `PP`
//! defaults to row granularity.

use super::{DataflowSpec, Dim, Granularity, InterPhase, LoopSpec, Mapping, PhaseOrder, TileConfig};
use crate::error::{Error, Result};

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Self { text, pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self
            .text
            .as_bytes()
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.text.as_bytes().get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn expect(&mut self, byte: u8) -> Result<()> {
        self.skip_ws();
        match self.peek() {
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            other => Err(self.err(format!(
                "expected `{}`, found {}",
                byte as char,
                match other {
                    Some(b) => format!("`{}`", b as char),
                    None => "end of input".into(),
                }
            ))),
        }
    }

    fn err(&self, msg: String) -> Error {
        Error::Syntax {
            offset: self.pos,
            msg,
        }
    }

    fn take_ident(&mut self) -> String {
        let start = self.pos;
        while self
            .peek()
            .is_some_and(|b| b.is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        self.text[start..self.pos].to_string()
    }
}

/// Parses a dataflow string. Tile sizes are not part of the notation and
/// are left at 1; attach them with [`DataflowSpec::with_tiles`].
pub fn parse_dataflow(text: &str) -> Result<DataflowSpec> {
    let mut c = Cursor::new(text);
    c.skip_ws();
    let inter_name = c.take_ident();
    let inter = match inter_name.as_str() {
        "Seq" => InterPhase::Seq,
        "SP" => InterPhase::SpEngn,
        "PP" => InterPhase::Pp(Granularity::Row),
        other => {
            return Err(c.err(format!(
                "unknown inter-phase strategy `{other}` (expected Seq, SP or PP)"
            )))
        }
    };
    c.expect(b'_')?;
    let order_name = c.take_ident();
    let order = match order_name.as_str() {
        "AC" => PhaseOrder::AC,
        "CA" => PhaseOrder::CA,
        other => return Err(c.err(format!("unknown phase order `{other}` (expected AC or CA)"))),
    };
    c.expect(b'(')?;
    let agg = parse_loops(&mut c, Phase::Aggregation)?;
    c.expect(b',')?;
    let cmb = parse_loops(&mut c, Phase::Combination)?;
    c.expect(b')')?;
    c.skip_ws();
    if c.peek().is_some() {
        return Err(c.err("trailing input after dataflow".into()));
    }
    Ok(DataflowSpec {
        inter,
        order,
        agg,
        cmb,
        tiles: TileConfig::unit(),
    })
}

#[derive(Clone, Copy, PartialEq)]
enum Phase {
    Aggregation,
    Combination,
}

fn parse_loops(c: &mut Cursor, phase: Phase) -> Result<LoopSpec> {
    let mut loops: Vec<(Dim, Mapping)> = Vec::new();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    let mut open_group: Option<usize> = None;
    loop {
        c.skip_ws();
        match c.peek() {
            Some(b'{') => {
                if open_group.is_some() {
                    return Err(c.err("nested `{` groups are not allowed".into()));
                }
                c.bump();
                open_group = Some(loops.len());
            }
            Some(b'}') => {
                let start = open_group
                    .take()
                    .ok_or_else(|| c.err("`}` without matching `{`".into()))?;
                c.bump();
                if loops.len() - start < 2 {
                    return Err(c.err("interchangeable group needs at least two loops".into()));
                }
                groups.push((start, loops.len()));
            }
            Some(b) if b.is_ascii_alphabetic() => {
                loops.push(parse_loop_token(c, phase)?);
            }
            _ => break,
        }
    }
    if open_group.is_some() {
        return Err(c.err("unclosed `{` group".into()));
    }
    if loops.is_empty() {
        return Err(c.err("loop spec needs at least one loop".into()));
    }
    for (i, &(d, _)) in loops.iter().enumerate() {
        if loops[..i].iter().any(|&(prev, _)| prev == d) {
            return Err(Error::Semantic(format!(
                "dimension {d} appears more than once in a phase"
            )));
        }
    }
    Ok(LoopSpec { loops, groups })
}

fn parse_loop_token(c: &mut Cursor, phase: Phase) -> Result<(Dim, Mapping)> {
    let dim_pos = c.pos;
    let dim = match c.bump() {
        Some(b'V') => Dim::V,
        Some(b'F') => Dim::F,
        Some(b'N') => Dim::N,
        Some(b'G') => Dim::G,
        other => {
            return Err(Error::Syntax {
                offset: dim_pos,
                msg: format!(
                    "unknown dimension {}",
                    match other {
                        Some(b) => format!("`{}`", b as char),
                        None => "at end of input".into(),
                    }
                ),
            })
        }
    };
    match (phase, dim) {
        (Phase::Aggregation, Dim::G) => {
            return Err(Error::Semantic(
                "G is not a valid aggregation dimension (use V, F, N)".into(),
            ))
        }
        (Phase::Combination, Dim::N) => {
            return Err(Error::Semantic(
                "N is not a valid combination dimension (use V, F, G)".into(),
            ))
        }
        _ => {}
    }
    c.expect(b'_')?;
    let sub_pos = c.pos;
    let mapping = match c.bump() {
        Some(b's') => Mapping::Spatial,
        Some(b't') => Mapping::Temporal,
        Some(b'x') => Mapping::Either,
        other => {
            return Err(Error::Syntax {
                offset: sub_pos,
                msg: format!(
                    "unknown subscript {} (expected s, t or x)",
                    match other {
                        Some(b) => format!("`{}`", b as char),
                        None => "at end of input".into(),
                    }
                ),
            })
        }
    };
    Ok((dim, mapping))
}

/// Canonical single-space-separated rendering; `parse ∘ format` is the
/// identity. PP granularity is a separate config field and is not rendered.
pub fn format_dataflow(spec: &DataflowSpec) -> String {
    format!(
        "{}_{}({}, {})",
        spec.inter.label(),
        spec.order.label(),
        format_loops(&spec.agg),
        format_loops(&spec.cmb)
    )
}

fn format_loops(spec: &LoopSpec) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (i, &(dim, mapping)) in spec.loops.iter().enumerate() {
        if spec.groups.iter().any(|&(start, _)| start == i) {
            parts.push("{".into());
        }
        let mut tok = format!("{dim}_{}", mapping.subscript());
        if spec.groups.iter().any(|&(_, end)| end == i + 1) {
            tok.push('}');
        }
        parts.push(tok);
    }
    // Merge the `{` marker with the following token.
    let mut out = String::new();
    let mut glue_next = false;
    for p in parts {
        if p == "{" {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push('{');
            glue_next = true;
        } else {
            if !out.is_empty() && !glue_next {
                out.push(' ');
            }
            out.push_str(&p);
            glue_next = false;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_hygcn() {
        let spec = parse_dataflow("PP_AC(V_x F_s N_t, V_s G_s F_t)").unwrap();
        assert_eq!(spec.inter, InterPhase::Pp(Granularity::Row));
        assert_eq!(spec.order, PhaseOrder::AC);
        assert_eq!(
            spec.agg.loops,
            vec![
                (Dim::V, Mapping::Either),
                (Dim::F, Mapping::Spatial),
                (Dim::N, Mapping::Temporal)
            ]
        );
        assert_eq!(
            spec.cmb.loops,
            vec![
                (Dim::V, Mapping::Spatial),
                (Dim::G, Mapping::Spatial),
                (Dim::F, Mapping::Temporal)
            ]
        );
    }

    #[test]
    fn parses_awb_gcn() {
        let spec = parse_dataflow("PP_CA(F_s N_t V_s, G_t F_t V_s)").unwrap();
        assert_eq!(spec.order, PhaseOrder::CA);
        assert_eq!(spec.agg.dims(), vec![Dim::F, Dim::N, Dim::V]);
        assert_eq!(spec.cmb.dims(), vec![Dim::G, Dim::F, Dim::V]);
    }

    #[test]
    fn parses_groups() {
        let spec = parse_dataflow("Seq_AC(V_t {F_s N_t}, {V_s G_s F_t})").unwrap();
        assert_eq!(spec.agg.groups, vec![(1, 3)]);
        assert_eq!(spec.cmb.groups, vec![(0, 3)]);
    }

    #[test]
    fn round_trip_examples() {
        for text in [
            "PP_AC(V_x F_s N_t, V_s G_s F_t)",
            "PP_CA(F_s N_t V_s, G_t F_t V_s)",
            "Seq_AC(V_t {F_s N_t}, {V_s G_s F_t})",
            "SP_AC(V_s F_x N_t, V_s F_x G_x)",
        ] {
            let spec = parse_dataflow(text).unwrap();
            assert_eq!(format_dataflow(&spec), text);
            assert_eq!(parse_dataflow(&format_dataflow(&spec)).unwrap(), spec);
        }
    }

    #[test]
    fn either_renders_x() {
        let spec = parse_dataflow("Seq_AC(V_x F_x N_x, V_x G_x F_x)").unwrap();
        assert!(format_dataflow(&spec).contains("V_x"));
    }

    #[test]
    fn syntax_errors_carry_offsets() {
        match parse_dataflow("Seq_AC(V_q F_s N_t, V_s G_s F_t)") {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 9),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_dataflow("Zzz_AC(V_t, V_t)"),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn semantic_errors() {
        assert!(matches!(
            parse_dataflow("Seq_AC(V_t F_s F_t, V_s G_s F_t)"),
            Err(Error::Semantic(_))
        ));
        assert!(matches!(
            parse_dataflow("Seq_AC(V_t G_s N_t, V_s G_s F_t)"),
            Err(Error::Semantic(_))
        ));
        assert!(matches!(
            parse_dataflow("Seq_AC(V_t F_s N_t, V_s N_s F_t)"),
            Err(Error::Semantic(_))
        ));
    }
}

//! Legality rules for dataflow specs under a tile configuration and PE
//! budget. Violations are data, not failures: callers decide whether an
//! illegal spec is an error.

use super::{DataflowSpec, Dim, Granularity, InterPhase, Mapping, PhaseOrder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: &'static str,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub legal: bool,
    pub violations: Vec<Violation>,
    /// Combinations the design-space table leaves unspecified are flagged
    /// here instead of as hard violations.
    pub warnings: Vec<String>,
    pub mapping_efficiency_agg: f64,
    pub mapping_efficiency_cmb: f64,
}

pub fn validate(spec: &DataflowSpec, pe_budget_agg: u64, pe_budget_cmb: u64) -> ValidationReport {
    let mut violations: Vec<Violation> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let tiles = &spec.tiles;

    // Dimension-set sanity for programmatically built specs.
    for (dim, _) in &spec.agg.loops {
        if *dim == Dim::G {
            violations.push(Violation {
                rule: "dims",
                message: "G is not a valid aggregation dimension".into(),
            });
        }
    }
    for (dim, _) in &spec.cmb.loops {
        if *dim == Dim::N {
            violations.push(Violation {
                rule: "dims",
                message: "N is not a valid combination dimension".into(),
            });
        }
    }

    // (a) tile/mapping consistency: Spatial ⇔ tile > 1, Temporal ⇔ tile = 1.
    for (phase, loops) in [("aggregation", &spec.agg), ("combination", &spec.cmb)] {
        for &(dim, mapping) in &loops.loops {
            let tile = if phase == "aggregation" {
                tiles.agg_tile(dim)
            } else {
                tiles.cmb_tile(dim)
            };
            match mapping {
                Mapping::Spatial if tile <= 1 => violations.push(Violation {
                    rule: "a",
                    message: format!("{phase} {dim} is spatial but its tile size is {tile}"),
                }),
                Mapping::Temporal if tile != 1 => violations.push(Violation {
                    rule: "a",
                    message: format!("{phase} {dim} is temporal but its tile size is {tile}"),
                }),
                _ => {}
            }
        }
    }

    // (b) PE fit; efficiency is reported raw even when over budget.
    let eff_agg = tiles.agg_product() as f64 / pe_budget_agg.max(1) as f64;
    let eff_cmb = tiles.cmb_product() as f64 / pe_budget_cmb.max(1) as f64;
    if tiles.agg_product() > pe_budget_agg {
        violations.push(Violation {
            rule: "b",
            message: format!(
                "aggregation tile product {} exceeds PE budget {pe_budget_agg}",
                tiles.agg_product()
            ),
        });
    }
    if tiles.cmb_product() > pe_budget_cmb {
        violations.push(Violation {
            rule: "b",
            message: format!(
                "combination tile product {} exceeds PE budget {pe_budget_cmb}",
                tiles.cmb_product()
            ),
        });
    }

    match (spec.inter, spec.order) {
        (InterPhase::SpEngn, PhaseOrder::AC) => check_sp_engn(spec, &mut violations),
        (InterPhase::SpEngn, PhaseOrder::CA) => {
            // The design-space table marks SP rows "(any direction*)"
            // without spelling out the CA rules.
            check_sp_engn_tiles(spec, &mut violations);
            warnings.push("SP with phase order CA is unspecified-by-paper".into());
        }
        (InterPhase::Pp(gran), order) => {
            check_pp(spec, gran, order, &mut violations);
            check_pp_tile_multiples(spec, gran, &mut violations);
        }
        (InterPhase::Seq | InterPhase::SpArbitrary, _) => {}
    }

    violations.sort_by(|a, b| (a.rule, &a.message).cmp(&(b.rule, &b.message)));
    ValidationReport {
        legal: violations.is_empty(),
        violations,
        warnings,
        mapping_efficiency_agg: eff_agg,
        mapping_efficiency_cmb: eff_cmb,
    }
}

fn check_sp_engn_tiles(spec: &DataflowSpec, violations: &mut Vec<Violation>) {
    let t = &spec.tiles;
    if t.t_n != 1 {
        violations.push(Violation {
            rule: "c",
            message: format!(
                "SP-EnGN-like requires temporal reduction (T_N = 1), got T_N = {}",
                t.t_n
            ),
        });
    }
    if t.t_v_agg != t.t_v_cmb {
        violations.push(Violation {
            rule: "c",
            message: format!(
                "SP-EnGN-like requires T_V_agg = T_V_cmb, got {} vs {}",
                t.t_v_agg, t.t_v_cmb
            ),
        });
    }
    if t.t_f_agg != t.t_f_cmb {
        violations.push(Violation {
            rule: "c",
            message: format!(
                "SP-EnGN-like requires T_F_agg = T_F_cmb, got {} vs {}",
                t.t_f_agg, t.t_f_cmb
            ),
        });
    }
}

/// (c) SP-EnGN-like, order AC: in-place intermediate requires matching V/F
/// tiles, T_N = 1 and the loop-order pair ({VF}N, {VF}G).
fn check_sp_engn(spec: &DataflowSpec, violations: &mut Vec<Violation>) {
    check_sp_engn_tiles(spec, violations);
    let agg_ok = spec
        .agg
        .possible_orders()
        .iter()
        .any(|o| matches_pattern(o, &[set(&[Dim::V, Dim::F]), set(&[Dim::N])]));
    if !agg_ok {
        violations.push(Violation {
            rule: "c",
            message: "SP-EnGN-like aggregation loop order must be ({VF}N)".into(),
        });
    }
    let cmb_ok = spec
        .cmb
        .possible_orders()
        .iter()
        .any(|o| matches_pattern(o, &[set(&[Dim::V, Dim::F]), set(&[Dim::G])]));
    if !cmb_ok {
        violations.push(Violation {
            rule: "c",
            message: "SP-EnGN-like combination loop order must be ({VF}G)".into(),
        });
    }
}

/// (d)/(e)/(f) for order AC and the mirrored rules (g) for order CA.
fn check_pp(
    spec: &DataflowSpec,
    gran: Granularity,
    order: PhaseOrder,
    violations: &mut Vec<Violation>,
) {
    let agg_orders = spec.agg.possible_orders();
    let cmb_orders = spec.cmb.possible_orders();
    match order {
        PhaseOrder::AC => match gran {
            Granularity::Element => {
                // Two outer dims of both phases are {V, F} in the same order.
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    a.len() >= 2
                        && c.len() >= 2
                        && is_vf(&a[..2])
                        && a[..2] == c[..2]
                });
                if !ok {
                    violations.push(Violation {
                        rule: "f",
                        message:
                            "PP element granularity (AC) needs the pair (VFN, VFG) or (FVN, FVG)"
                                .into(),
                    });
                }
            }
            Granularity::Row => {
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    a.first() == Some(&Dim::V)
                        && c.first() == Some(&Dim::V)
                        && !(a == [Dim::V, Dim::F, Dim::N] && c == [Dim::V, Dim::F, Dim::G])
                });
                if !ok {
                    violations.push(Violation {
                        rule: "d",
                        message: "PP row granularity (AC) needs V outermost in both phases and a \
                                  pair other than (VFN, VFG)"
                            .into(),
                    });
                }
            }
            Granularity::Column => {
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    a.first() == Some(&Dim::F)
                        && c.first() == Some(&Dim::F)
                        && !(a == [Dim::F, Dim::V, Dim::N] && c == [Dim::F, Dim::V, Dim::G])
                });
                if !ok {
                    violations.push(Violation {
                        rule: "e",
                        message: "PP column granularity (AC) needs F outermost in both phases and \
                                  a pair other than (FVN, FVG)"
                            .into(),
                    });
                }
            }
        },
        PhaseOrder::CA => match gran {
            Granularity::Element => {
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    (a == [Dim::N, Dim::F, Dim::V] && c == [Dim::V, Dim::G, Dim::F])
                        || (a == [Dim::F, Dim::N, Dim::V] && c == [Dim::G, Dim::V, Dim::F])
                });
                if !ok {
                    violations.push(Violation {
                        rule: "g",
                        message:
                            "PP element granularity (CA) needs the pair (NFV, VGF) or (FNV, GVF)"
                                .into(),
                    });
                }
            }
            Granularity::Row => {
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    a.first() == Some(&Dim::N)
                        && c.first() == Some(&Dim::V)
                        && !(a == [Dim::N, Dim::F, Dim::V] && c == [Dim::V, Dim::G, Dim::F])
                });
                if !ok {
                    violations.push(Violation {
                        rule: "g",
                        message: "PP row granularity (CA) needs N outermost in aggregation, V \
                                  outermost in combination and a pair other than (NFV, VGF)"
                            .into(),
                    });
                }
            }
            Granularity::Column => {
                let ok = pairs(&agg_orders, &cmb_orders).any(|(a, c)| {
                    a.first() == Some(&Dim::F)
                        && c.first() == Some(&Dim::G)
                        && !(a == [Dim::F, Dim::N, Dim::V] && c == [Dim::G, Dim::V, Dim::F])
                });
                if !ok {
                    violations.push(Violation {
                        rule: "g",
                        message: "PP column granularity (CA) needs F outermost in aggregation, G \
                                  outermost in combination and a pair other than (FNV, GVF)"
                            .into(),
                    });
                }
            }
        },
    }
}

/// (h) Imbalanced pipeline tiles: the larger tile of a pipelined dimension
/// must be an integer multiple of the smaller one.
fn check_pp_tile_multiples(spec: &DataflowSpec, gran: Granularity, violations: &mut Vec<Violation>) {
    let t = &spec.tiles;
    let mut check = |name: &str, a: u64, b: u64| {
        let (lo, hi) = (a.min(b), a.max(b));
        if lo > 0 && hi % lo != 0 {
            violations.push(Violation {
                rule: "h",
                message: format!(
                    "pipelined tile sizes for {name} must divide evenly, got {a} and {b}"
                ),
            });
        }
    };
    match gran {
        Granularity::Row => check("V", t.t_v_agg, t.t_v_cmb),
        Granularity::Column => check("F", t.t_f_agg, t.t_f_cmb),
        Granularity::Element => {
            check("V", t.t_v_agg, t.t_v_cmb);
            check("F", t.t_f_agg, t.t_f_cmb);
        }
    }
}

fn set(dims: &[Dim]) -> Vec<Dim> {
    dims.to_vec()
}

/// True if `order` is a concatenation of the pattern's segments, each
/// segment matched as an unordered set.
fn matches_pattern(order: &[Dim], pattern: &[Vec<Dim>]) -> bool {
    let total: usize = pattern.iter().map(|s| s.len()).sum();
    if order.len() != total {
        return false;
    }
    let mut idx = 0;
    for segment in pattern {
        let slice = &order[idx..idx + segment.len()];
        let mut a: Vec<Dim> = slice.to_vec();
        let mut b = segment.clone();
        a.sort();
        b.sort();
        if a != b {
            return false;
        }
        idx += segment.len();
    }
    true
}

fn is_vf(dims: &[Dim]) -> bool {
    dims.len() == 2 && dims.contains(&Dim::V) && dims.contains(&Dim::F)
}

fn pairs<'a>(
    a: &'a [Vec<Dim>],
    b: &'a [Vec<Dim>],
) -> impl Iterator<Item = (&'a [Dim], &'a [Dim])> + 'a {
    a.iter()
        .flat_map(move |x| b.iter().map(move |y| (x.as_slice(), y.as_slice())))
}

#[cfg(test)]
mod tests {
    use super::super::{parse_dataflow, TileConfig};
    use super::*;

    fn tiles(t: [u64; 6]) -> TileConfig {
        TileConfig::from_tuple(t)
    }

    #[test]
    fn sp_engn_rejects_spatial_reduction() {
        let spec = parse_dataflow("SP_AC(V_s F_x N_t, V_s F_x G_x)")
            .unwrap()
            .with_tiles(tiles([4, 2, 8, 4, 1, 8]));
        let report = validate(&spec, 512, 512);
        assert!(!report.legal);
        assert!(report.violations.iter().any(|v| v.rule == "a")); // N_t with tile 2
        assert!(report.violations.iter().any(|v| v.rule == "c"));
    }

    #[test]
    fn hygcn_row_is_legal() {
        let spec = parse_dataflow("PP_AC(V_t F_s N_t, V_s G_s F_t)")
            .unwrap()
            .with_tiles(tiles([1, 1, 256, 16, 16, 1]));
        let report = validate(&spec, 256, 256);
        assert!(report.legal, "violations: {:?}", report.violations);
        assert_eq!(report.mapping_efficiency_agg, 1.0);
        assert_eq!(report.mapping_efficiency_cmb, 1.0);
    }

    #[test]
    fn over_budget_reports_raw_efficiency() {
        let spec = parse_dataflow("Seq_AC(V_s F_s N_s, V_t G_t F_t)")
            .unwrap()
            .with_tiles(tiles([4, 4, 8, 1, 1, 1]));
        let report = validate(&spec, 64, 64);
        assert!(report.violations.iter().any(|v| v.rule == "b"));
        assert_eq!(report.mapping_efficiency_agg, 2.0);
    }

    #[test]
    fn pp_row_rejects_elementwise_order() {
        let spec = parse_dataflow("PP_AC(V_t F_s N_t, V_t F_s G_t)")
            .unwrap()
            .with_tiles(tiles([1, 1, 16, 1, 1, 16]));
        let report = validate(&spec, 256, 256);
        assert!(report.violations.iter().any(|v| v.rule == "d"));
    }

    #[test]
    fn pp_element_accepts_matching_outer_pair() {
        let spec = parse_dataflow("PP_AC(V_t F_s N_t, V_t F_s G_t)")
            .unwrap()
            .with_granularity(Granularity::Element)
            .with_tiles(tiles([1, 1, 16, 1, 1, 16]));
        let report = validate(&spec, 256, 256);
        assert!(report.legal, "violations: {:?}", report.violations);
    }

    #[test]
    fn pp_tile_multiple_rule() {
        let spec = parse_dataflow("PP_AC(V_s F_x N_t, V_s G_x F_x)")
            .unwrap()
            .with_tiles(tiles([6, 1, 1, 4, 1, 1]));
        let report = validate(&spec, 256, 256);
        assert!(report.violations.iter().any(|v| v.rule == "h"));
    }

    #[test]
    fn braces_relax_rule_matching() {
        // Written order (F V N) but the group allows V-outermost: row-wise
        // granularity matches via the expansion.
        let spec = parse_dataflow("PP_AC({F_x V_x} N_t, V_x {G_x F_x})")
            .unwrap()
            .with_tiles(tiles([1, 1, 128, 1, 16, 16]));
        let report = validate(&spec, 256, 256);
        assert!(report.legal, "violations: {:?}", report.violations);
    }

    #[test]
    fn sp_ca_is_warned_not_rejected() {
        let spec = parse_dataflow("SP_CA(V_x F_x N_t, V_x F_x G_t)")
            .unwrap()
            .with_tiles(tiles([8, 1, 8, 8, 1, 8]));
        let report = validate(&spec, 512, 512);
        assert!(report.legal);
        assert!(!report.warnings.is_empty());
    }

    #[test]
    fn violation_order_is_deterministic() {
        let spec = parse_dataflow("SP_AC(V_s F_x N_s, V_s F_x G_x)")
            .unwrap()
            .with_tiles(tiles([4, 4, 64, 2, 1, 8]));
        let a = validate(&spec, 512, 512);
        let b = validate(&spec, 512, 512);
        assert_eq!(a.violations, b.violations);
    }
}

//! Text and JSON renderings of analysis results.
//!
//! JSON output is byte-stable: keys follow struct field order, numbers are
//! plain integers and PF sizes are sorted by `(h, w)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::arch::{Axes, Axis, Direction, LayerKind, NetworkSpec};
use crate::calc::{self, FieldLabels, RfProjection};
use crate::error::Result;
use crate::oracle::{EquivalenceReport, PfCheck};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LayerRow {
    pub index: usize,
    pub kind: LayerKind,
    pub filter: Axes<u64>,
    pub stride: Axes<u64>,
    pub cum_stride: Axes<u64>,
    pub increment: Axes<u64>,
    pub erf: Axes<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PfRow {
    pub boundary: usize,
    pub sizes: Vec<Axes<u64>>,
    pub uniform: bool,
    /// `channels_out` of layer `boundary + 1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnalysisReport {
    pub name: String,
    pub direction: Direction,
    pub layers: Vec<LayerRow>,
    pub pf: Vec<PfRow>,
}

impl AnalysisReport {
    pub fn build(network: &NetworkSpec) -> Result<Self> {
        let trace = calc::erf_bottom_up(network)?;
        let layers = network
            .layers
            .iter()
            .map(|l| LayerRow {
                index: l.index,
                kind: l.kind,
                filter: l.filter,
                stride: l.stride,
                cum_stride: trace.cumulative_strides[l.index - 1],
                increment: trace.increments[l.index - 1],
                erf: trace.values[l.index],
            })
            .collect();
        let pf = (0..network.len())
            .map(|k| {
                let set = calc::pf_size_set(network, k)?;
                Ok(PfRow {
                    boundary: k,
                    sizes: set.sizes.into_iter().collect(),
                    uniform: set.uniform,
                    depth: network.layers[k].channels_out,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            name: network.name.clone(),
            direction: network.direction,
            layers,
            pf,
        })
    }

    pub fn to_json(&self) -> String {
        json_document(&[
            ("name", compact(&self.name)),
            ("direction", compact(&self.direction)),
            ("layers", json_rows(&self.layers)),
            ("pf", json_rows(&self.pf)),
        ])
    }

    pub fn to_table(&self) -> String {
        let labels = FieldLabels::for_direction(self.direction);
        let mut out = String::new();
        let _ = writeln!(out, "network: {} ({})", self.name, self.direction.keyword());

        let header = ["layer", "kind", "filter", "stride", "cum_stride", "increment", "erf"];
        let header: Vec<String> = header
            .iter()
            .map(|h| if *h == "erf" { extent_column(self.direction) } else { h.to_string() })
            .collect();
        let rows: Vec<Vec<String>> = self
            .layers
            .iter()
            .map(|r| {
                vec![
                    r.index.to_string(),
                    r.kind.to_string(),
                    r.filter.to_string(),
                    r.stride.to_string(),
                    r.cum_stride.to_string(),
                    r.increment.to_string(),
                    r.erf.to_string(),
                ]
            })
            .collect();
        write_table(&mut out, &header, &rows, &[1]);
        let _ = writeln!(out);

        let _ = writeln!(out, "{} (layer k into layer k+1):", labels.sizes);
        let header = vec!["boundary".to_string(), "sizes".into(), "uniform".into()];
        let rows: Vec<Vec<String>> = self
            .pf
            .iter()
            .map(|r| {
                let sizes = r
                    .sizes
                    .iter()
                    .map(|s| match r.depth {
                        Some(c) => format!("{}×{}×{c}", s.h, s.w),
                        None => format!("{}×{}", s.h, s.w),
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                vec![
                    r.boundary.to_string(),
                    sizes,
                    if r.uniform { "yes" } else { "no" }.to_string(),
                ]
            })
            .collect();
        write_table(&mut out, &header, &rows, &[1, 2]);
        out
    }
}

fn compact<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("report values serialize")
}

/// A JSON array with one compact element per line.
fn json_rows<T: Serialize>(rows: &[T]) -> String {
    if rows.is_empty() {
        return "[]".into();
    }
    let body: Vec<String> = rows.iter().map(|r| format!("    {}", compact(r))).collect();
    format!("[\n{}\n  ]", body.join(",\n"))
}

/// Top-level object with one key per line, keys in the given order.
fn json_document(fields: &[(&str, String)]) -> String {
    let body: Vec<String> = fields
        .iter()
        .map(|(k, v)| format!("  {}: {v}", compact(*k)))
        .collect();
    format!("{{\n{}\n}}\n", body.join(",\n"))
}

fn extent_column(direction: Direction) -> String {
    match direction {
        Direction::Conv => "erf".into(),
        Direction::Deconv => "pf_extent".into(),
    }
}

/// Right-aligned columns except those listed in `left`.
fn write_table(out: &mut String, header: &[String], rows: &[Vec<String>], left: &[usize]) {
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut line = |cells: &[String]| {
        let mut text = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                text.push_str("  ");
            }
            let pad = widths[i] - cell.chars().count();
            if left.contains(&i) {
                text.push_str(cell);
                text.extend(std::iter::repeat_n(' ', pad));
            } else {
                text.extend(std::iter::repeat_n(' ', pad));
                text.push_str(cell);
            }
        }
        let _ = writeln!(out, "{}", text.trim_end());
    };
    line(header);
    for row in rows {
        line(row);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectionStep {
    pub j: usize,
    pub rf: Axes<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TopDownReport {
    pub name: String,
    pub layer: usize,
    pub projection: Vec<ProjectionStep>,
}

impl TopDownReport {
    pub fn new(network: &NetworkSpec, projection: &RfProjection) -> Self {
        Self {
            name: network.name.clone(),
            layer: projection.target_layer,
            projection: projection
                .iter()
                .map(|(j, rf)| ProjectionStep { j, rf })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        json_document(&[
            ("name", compact(&self.name)),
            ("layer", compact(&self.layer)),
            ("projection", json_rows(&self.projection)),
        ])
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "top-down projection of layer {} ({})",
            self.layer, self.name
        );
        let header = vec!["j".to_string(), "rf".to_string()];
        let rows: Vec<Vec<String>> = self
            .projection
            .iter()
            .map(|s| vec![s.j.to_string(), s.rf.to_string()])
            .collect();
        write_table(&mut out, &header, &rows, &[]);
        out
    }
}

fn pf_set_text(sizes: &std::collections::BTreeSet<Axes<u64>>) -> String {
    sizes
        .iter()
        .map(|s| format!("{}×{}", s.h, s.w))
        .collect::<Vec<_>>()
        .join(", ")
}

fn yes_no(b: bool) -> String {
    if b { "yes" } else { "NO" }.to_string()
}

pub fn render_equivalence(report: &EquivalenceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "verify: {}", report.name);
    let header: Vec<String> = ["layer", "bottom_up", "top_down", "oracle_span", "oracle_card", "match"]
        .map(String::from)
        .to_vec();
    let rows: Vec<Vec<String>> = report
        .erf
        .iter()
        .map(|c| {
            vec![
                c.layer.to_string(),
                c.bottom_up.to_string(),
                c.top_down.to_string(),
                c.oracle.span.to_string(),
                c.oracle.cardinality.to_string(),
                yes_no(c.matched),
            ]
        })
        .collect();
    write_table(&mut out, &header, &rows, &[5]);

    for c in report.erf.iter().filter(|c| c.oracle.has_gaps()) {
        let _ = writeln!(
            out,
            "note: layer {}: span {} equals the closed-form extent; only {} positions are read (coverage gaps)",
            c.layer, c.oracle.span, c.oracle.cardinality
        );
    }

    if !report.pf.is_empty() {
        let _ = writeln!(out);
        let header: Vec<String> = ["boundary", "closed_form", "oracle", "checked", "match"]
            .map(String::from)
            .to_vec();
        let rows: Vec<Vec<String>> = report.pf.iter().map(pf_row).collect();
        write_table(&mut out, &header, &rows, &[1, 2, 3, 4]);
    }
    let _ = writeln!(out, "result: {}", if report.pass { "PASS" } else { "FAIL" });
    out
}

fn pf_row(c: &PfCheck) -> Vec<String> {
    vec![
        c.boundary.to_string(),
        pf_set_text(&c.closed_form),
        pf_set_text(&c.oracle),
        if c.covered { "yes" } else { "no (s > f)" }.to_string(),
        yes_no(c.matched),
    ]
}

/// ASCII picture of one layer-`k` neuron's footprint on every layer below it.
/// Falls back to a numeric listing when the input-layer extent exceeds `max_width`.
pub fn render_footprint(network: &NetworkSpec, projection: &RfProjection, max_width: u64) -> String {
    let mut out = String::new();
    let erf = projection.erf();
    let square = projection.values.iter().all(Axes::is_square);
    let axes: &[Axis] = if square { &[Axis::H] } else { &Axis::BOTH };
    let j_width = projection.target_layer.to_string().len();
    for &axis in axes {
        let total = erf.get(axis);
        let r_width = total.to_string().len();
        let suffix = if square {
            String::new()
        } else {
            format!(", axis {}", axis.name())
        };
        let _ = writeln!(
            out,
            "footprint of layer {} ({}{suffix})",
            projection.target_layer, network.name
        );
        if total > max_width {
            let _ = writeln!(
                out,
                "notice: extent {total} exceeds max width {max_width}; printing values only"
            );
            for (j, v) in projection.iter() {
                let _ = writeln!(out, "j={j:<j_width$}  R={:>r_width$}", v.get(axis));
            }
            continue;
        }
        for (j, v) in projection.iter() {
            let r = v.get(axis);
            let pad = ((total - r) / 2) as usize;
            let _ = writeln!(
                out,
                "j={j:<j_width$}  R={r:>r_width$}  |{}{}{}|",
                " ".repeat(pad),
                "#".repeat(r as usize),
                " ".repeat(total as usize - r as usize - pad)
            );
        }
    }
    out
}

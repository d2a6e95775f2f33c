//! The `.net` line format.
//!
//! ```text
//! network case_study     # optional, must be the first statement
//! deconv                 # optional, before any layer
//! conv 9 s1              # <kind> <f> s<s>
//! pool 2x3 s2x1 c64      # per-axis filter/stride, optional channel count
//! ```
//!
//! `#` starts a comment. Blank lines are ignored. LF and CRLF line endings
//! are both accepted.

use std::fmt::Write as _;

use super::ParseDiagnostic;
use crate::arch::{Axes, Direction, LayerKind, LayerShape, NetworkSpec};

struct Token<'a> {
    column: usize,
    text: &'a str,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    for (col, (byte, ch)) in line.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col + 1)),
            (true, Some((b, c))) => {
                out.push(Token {
                    column: c,
                    text: &line[b..byte],
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((b, c)) = start {
        out.push(Token {
            column: c,
            text: &line[b..],
        });
    }
    out
}

fn parse_int(text: &str) -> Result<u64, String> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("integer expected, found `{text}`"));
    }
    text.parse::<u64>()
        .map_err(|_| format!("integer `{text}` out of range"))
}

/// `9` or `5x3`.
fn parse_dims(text: &str) -> Result<Axes<u64>, String> {
    match text.split_once('x') {
        Some((h, w)) => Ok(Axes::new(parse_int(h)?, parse_int(w)?)),
        None => parse_int(text).map(Axes::square),
    }
}

fn parse_layer(
    line_no: usize,
    kind: LayerKind,
    rest: &[Token<'_>],
    after: usize,
) -> Result<LayerShape, ParseDiagnostic> {
    let err = |col: usize, msg: String| ParseDiagnostic::error(line_no, col, msg);

    let filter_tok = rest
        .first()
        .ok_or_else(|| err(after, "missing filter size".into()))?;
    let filter = parse_dims(filter_tok.text).map_err(|m| err(filter_tok.column, m))?;

    let stride_tok = rest.get(1).ok_or_else(|| {
        err(
            filter_tok.column + filter_tok.text.chars().count(),
            "missing stride (expected s<stride>)".into(),
        )
    })?;
    let stride = match stride_tok.text.strip_prefix('s') {
        Some(body) => parse_dims(body).map_err(|m| err(stride_tok.column + 1, m))?,
        None => {
            return Err(err(
                stride_tok.column,
                format!("missing stride (expected s<stride>, found `{}`)", stride_tok.text),
            ))
        }
    };

    let mut channels_out = None;
    if let Some(tok) = rest.get(2) {
        match tok.text.strip_prefix('c') {
            Some(body) => {
                channels_out = Some(parse_int(body).map_err(|m| err(tok.column + 1, m))?)
            }
            None => return Err(err(tok.column, format!("unexpected token `{}`", tok.text))),
        }
    }
    if let Some(tok) = rest.get(3) {
        return Err(err(tok.column, format!("unexpected token `{}`", tok.text)));
    }
    Ok(LayerShape {
        kind,
        filter,
        stride,
        channels_out,
    })
}

/// Parses DSL text. Every malformed line yields its own diagnostic.
pub fn parse_dsl(text: &str) -> Result<NetworkSpec, Vec<ParseDiagnostic>> {
    let mut diags = Vec::new();
    let mut name = String::new();
    let mut direction = Direction::Conv;
    let mut saw_deconv = false;
    let mut shapes = Vec::new();
    let mut statements = 0usize;

    for (i, raw) in text.split('\n').enumerate() {
        let line_no = i + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let content = line.split_once('#').map_or(line, |(before, _)| before);
        let toks = tokens(content);
        let Some(head) = toks.first() else {
            continue;
        };
        statements += 1;

        match head.text {
            "network" => {
                if statements != 1 {
                    diags.push(ParseDiagnostic::error(
                        line_no,
                        head.column,
                        "network header must be the first statement",
                    ));
                    continue;
                }
                let header_end = content.find("network").unwrap() + "network".len();
                let value = content[header_end..].trim();
                if value.is_empty() {
                    diags.push(ParseDiagnostic::error(
                        line_no,
                        head.column,
                        "network header needs a name",
                    ));
                } else {
                    name = value.to_string();
                }
            }
            "deconv" => {
                if let Some(extra) = toks.get(1) {
                    diags.push(ParseDiagnostic::error(
                        line_no,
                        extra.column,
                        format!("unexpected token `{}` after deconv", extra.text),
                    ));
                } else if !shapes.is_empty() {
                    diags.push(ParseDiagnostic::error(
                        line_no,
                        head.column,
                        "deconv directive must precede layers",
                    ));
                } else if saw_deconv {
                    diags.push(ParseDiagnostic::error(
                        line_no,
                        head.column,
                        "duplicate deconv directive",
                    ));
                } else {
                    saw_deconv = true;
                    direction = Direction::Deconv;
                }
            }
            word => match LayerKind::from_keyword(word) {
                Some(kind) => {
                    let after = head.column + word.chars().count();
                    match parse_layer(line_no, kind, &toks[1..], after) {
                        Ok(shape) => shapes.push(shape),
                        Err(d) => diags.push(d),
                    }
                }
                None => diags.push(ParseDiagnostic::error(
                    line_no,
                    head.column,
                    format!("unknown layer kind `{word}`"),
                )),
            },
        }
    }

    if diags.is_empty() && shapes.is_empty() {
        diags.push(ParseDiagnostic::error(1, 1, "no layers"));
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(NetworkSpec::from_shapes(name, direction, shapes))
}

/// Canonical DSL text without a trailing newline. Square filters and strides
/// use the scalar form; the header is omitted for unnamed networks.
///
/// Names are written verbatim, so they only round-trip when they contain no
/// `#`, no line breaks and no surrounding whitespace.
pub fn serialize_dsl(network: &NetworkSpec) -> String {
    let mut lines = Vec::with_capacity(network.len() + 2);
    if !network.name.is_empty() {
        lines.push(format!("network {}", network.name));
    }
    if network.direction == Direction::Deconv {
        lines.push("deconv".to_string());
    }
    for layer in &network.layers {
        let mut line = format!("{} {} s{}", layer.kind, layer.filter, layer.stride);
        if let Some(c) = layer.channels_out {
            let _ = write!(line, " c{c}");
        }
        lines.push(line);
    }
    lines.join("\n")
}

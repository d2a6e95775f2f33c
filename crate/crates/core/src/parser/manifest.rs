//! TOML manifest format.
//!
//! ```toml
//! name = "case_study"        # optional, default ""
//! direction = "conv"         # optional, "conv" | "deconv"
//!
//! [[layer]]
//! kind = "conv"              # "conv" | "pool"
//! filter = 9                 # integer, or [h, w]
//! stride = 1                 # integer, or [h, w]
//! channels_out = 64          # optional
//! ```
//!
//! Layers appear in array order. Missing or ill-typed keys are errors; unknown
//! keys produce warnings and are otherwise ignored.

use toml::de::{DeTable, DeValue};
use toml::Spanned;

use super::{line_col, ParseDiagnostic, Parsed};
use crate::arch::{Axes, Direction, LayerKind, LayerShape, NetworkSpec};

struct Ctx<'t> {
    text: &'t str,
    errors: Vec<ParseDiagnostic>,
    warnings: Vec<ParseDiagnostic>,
}

impl Ctx<'_> {
    fn error(&mut self, offset: usize, message: impl Into<String>) {
        let (line, col) = line_col(self.text, offset);
        self.errors.push(ParseDiagnostic::error(line, col, message));
    }

    fn warning(&mut self, offset: usize, message: impl Into<String>) {
        let (line, col) = line_col(self.text, offset);
        self.warnings.push(ParseDiagnostic::warning(line, col, message));
    }

    fn string<'v>(&mut self, key: &str, value: &'v Spanned<DeValue<'_>>) -> Option<&'v str> {
        let s = value.get_ref().as_str();
        if s.is_none() {
            self.error(
                value.span().start,
                format!("`{key}` must be a string, found {}", value.get_ref().type_str()),
            );
        }
        s
    }

    fn positive_int(&mut self, key: &str, value: &Spanned<DeValue<'_>>) -> Option<u64> {
        let offset = value.span().start;
        let Some(int) = value.get_ref().as_integer() else {
            self.error(
                offset,
                format!("`{key}` must be an integer, found {}", value.get_ref().type_str()),
            );
            return None;
        };
        match i64::from_str_radix(int.as_str(), int.radix()) {
            Ok(v) if v >= 0 => Some(v as u64),
            Ok(v) => {
                self.error(offset, format!("`{key}` must be non-negative, found {v}"));
                None
            }
            Err(_) => {
                self.error(offset, format!("`{key}` integer out of range"));
                None
            }
        }
    }

    /// Integer or two-element integer list.
    fn dims(&mut self, key: &str, value: &Spanned<DeValue<'_>>) -> Option<Axes<u64>> {
        if let Some(items) = value.get_ref().as_array() {
            if items.len() != 2 {
                self.error(
                    value.span().start,
                    format!("`{key}` list must have exactly 2 elements, found {}", items.len()),
                );
                return None;
            }
            let h = self.positive_int(key, &items[0]);
            let w = self.positive_int(key, &items[1]);
            return Some(Axes::new(h?, w?));
        }
        if value.get_ref().is_integer() {
            return self.positive_int(key, value).map(Axes::square);
        }
        self.error(
            value.span().start,
            format!(
                "`{key}` must be an integer or a list of 2 integers, found {}",
                value.get_ref().type_str()
            ),
        );
        None
    }

    fn layer(&mut self, table: &DeTable<'_>, at: usize) -> Option<LayerShape> {
        let mut kind = None;
        let mut filter = None;
        let mut stride = None;
        let mut channels_out = None;
        let mut ok = true;
        for (key, value) in table.iter() {
            let name: &str = key.get_ref();
            match name {
                "kind" => match self.string(name, value) {
                    Some(word) => match LayerKind::from_keyword(word) {
                        Some(k) => kind = Some(k),
                        None => {
                            self.error(value.span().start, format!("unknown layer kind `{word}`"));
                            ok = false;
                        }
                    },
                    None => ok = false,
                },
                "filter" => {
                    filter = self.dims(name, value);
                    ok &= filter.is_some();
                }
                "stride" => {
                    stride = self.dims(name, value);
                    ok &= stride.is_some();
                }
                "channels_out" => {
                    channels_out = self.positive_int(name, value);
                    ok &= channels_out.is_some();
                }
                other => self.warning(key.span().start, format!("unknown layer key `{other}`")),
            }
        }
        if !ok {
            return None;
        }
        for (key, present) in [
            ("kind", kind.is_some()),
            ("filter", filter.is_some()),
            ("stride", stride.is_some()),
        ] {
            if !present {
                self.error(at, format!("layer is missing required key `{key}`"));
            }
        }
        Some(LayerShape {
            kind: kind?,
            filter: filter?,
            stride: stride?,
            channels_out,
        })
    }
}

/// Parses a manifest. Warnings are returned alongside the network on success
/// and mixed into the diagnostics on failure.
pub fn parse_manifest(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let root = match DeTable::parse(text) {
        Ok(root) => root,
        Err(e) => {
            let (line, column) = line_col(text, e.span().map_or(0, |s| s.start));
            return Err(vec![ParseDiagnostic::error(
                line,
                column,
                e.message().to_string(),
            )]);
        }
    };
    let mut ctx = Ctx {
        text,
        errors: Vec::new(),
        warnings: Vec::new(),
    };

    let mut name = String::new();
    let mut direction = Direction::Conv;
    let mut shapes = Vec::new();
    let mut saw_layers = false;

    for (key, value) in root.get_ref().iter() {
        let key_name: &str = key.get_ref();
        match key_name {
            "name" => {
                if let Some(s) = ctx.string("name", value) {
                    name = s.to_string();
                }
            }
            "direction" => match ctx.string("direction", value) {
                Some("conv") => direction = Direction::Conv,
                Some("deconv") => direction = Direction::Deconv,
                Some(other) => ctx.error(
                    value.span().start,
                    format!("`direction` must be \"conv\" or \"deconv\", found \"{other}\""),
                ),
                None => {}
            },
            "layer" => {
                saw_layers = true;
                let Some(items) = value.get_ref().as_array() else {
                    ctx.error(value.span().start, "`layer` must be an array of tables");
                    continue;
                };
                for item in items.iter() {
                    match item.get_ref().as_table() {
                        Some(table) => {
                            if let Some(shape) = ctx.layer(table, item.span().start) {
                                shapes.push(shape);
                            }
                        }
                        None => ctx.error(item.span().start, "each `layer` entry must be a table"),
                    }
                }
            }
            other => ctx.warning(key.span().start, format!("unknown key `{other}`")),
        }
    }

    if ctx.errors.is_empty() && shapes.is_empty() {
        let at = if saw_layers { 0 } else { text.len() };
        ctx.error(at.min(text.len().saturating_sub(1)), "no layers");
    }
    if !ctx.errors.is_empty() {
        let mut all = ctx.errors;
        all.extend(ctx.warnings);
        all.sort_by_key(|d| (d.line, d.column));
        return Err(all);
    }
    ctx.warnings.sort_by_key(|d| (d.line, d.column));
    Ok(Parsed {
        network: NetworkSpec::from_shapes(name, direction, shapes),
        warnings: ctx.warnings,
    })
}

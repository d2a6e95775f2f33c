//! Text formats for architectures.
//!
//! Two inputs are accepted: the line-oriented `.net` DSL ([`dsl`]) and a TOML
//! manifest ([`manifest`]). Both produce the same [`NetworkSpec`] for the same
//! content. Only the DSL has a serializer.

pub mod dsl;
pub mod manifest;

use std::fmt;
use std::path::Path;

use crate::arch::NetworkSpec;

pub use dsl::{parse_dsl, serialize_dsl};
pub use manifest::parse_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned parse message. `line` and `column` are 1-based; columns count characters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    pub fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            severity: Severity::Error,
            message: message.into(),
        }
    }

    pub fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            ..Self::error(line, column, message)
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.line, self.column, self.message)
    }
}

/// A successfully parsed network plus any non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parsed {
    pub network: NetworkSpec,
    pub warnings: Vec<ParseDiagnostic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Dsl,
    Manifest,
}

impl Format {
    /// `.toml` selects the manifest; anything else is read as DSL.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("toml") => Format::Manifest,
            _ => Format::Dsl,
        }
    }
}

pub fn parse(text: &str, format: Format) -> Result<Parsed, Vec<ParseDiagnostic>> {
    match format {
        Format::Dsl => parse_dsl(text).map(|network| Parsed {
            network,
            warnings: Vec::new(),
        }),
        Format::Manifest => parse_manifest(text),
    }
}

/// 1-based (line, column) of a byte offset, clamped to the text.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let mut offset = offset.min(text.len());
    while !text.is_char_boundary(offset) {
        offset -= 1;
    }
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

//! Reading numeric values from newline-delimited or delimited text.

use std::path::Path;

use crate::error::{CliError, CliResult};

/// How to find the numbers in an input file.
#[derive(Debug, Clone, Default)]
pub struct InputFormat {
    /// Header name or 1-based index; implies delimited parsing.
    pub column: Option<String>,
    pub delimiter: Option<u8>,
    pub skip_header: bool,
}

impl InputFormat {
    fn delimited(&self) -> bool {
        self.column.is_some() || self.delimiter.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedValues {
    pub values: Vec<f64>,
    /// Non-blank entries that were not numbers.
    pub unparsed: u64,
}

pub fn read_values(path: &Path, format: &InputFormat) -> CliResult<ParsedValues> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::read(path.display().to_string(), e))?;
    parse_values(&text, format)
}

fn parse_field(field: &str, out: &mut ParsedValues) {
    let field = field.trim();
    if field.is_empty() {
        return;
    }
    match field.parse::<f64>() {
        Ok(v) => out.values.push(v),
        Err(_) => out.unparsed += 1,
    }
}

pub fn parse_values(text: &str, format: &InputFormat) -> CliResult<ParsedValues> {
    let mut out = ParsedValues {
        values: Vec::new(),
        unparsed: 0,
    };
    if !format.delimited() {
        let skip = usize::from(format.skip_header);
        for line in text.lines().skip(skip) {
            parse_field(line, &mut out);
        }
        return Ok(out);
    }

    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter.unwrap_or(b','))
        .has_headers(format.skip_header)
        .flexible(true)
        .from_reader(text.as_bytes());
    let column = match format.column.as_deref() {
        None => 0,
        Some(c) => match c.parse::<usize>() {
            Ok(0) => return Err(CliError::Input("column indices start at 1".into())),
            Ok(i) => i - 1,
            Err(_) if !format.skip_header => {
                return Err(CliError::Input(format!(
                    "column name {c:?} needs --skip-header"
                )))
            }
            Err(_) => {
                let headers = reader
                    .headers()
                    .map_err(|e| CliError::Input(format!("cannot read header: {e}")))?;
                headers
                    .iter()
                    .position(|h| h.trim() == c)
                    .ok_or_else(|| CliError::Input(format!("no column named {c:?}")))?
            }
        },
    };
    for record in reader.records() {
        match record {
            Ok(r) => match r.get(column) {
                Some(field) => parse_field(field, &mut out),
                None => out.unparsed += 1,
            },
            Err(_) => out.unparsed += 1,
        }
    }
    Ok(out)
}

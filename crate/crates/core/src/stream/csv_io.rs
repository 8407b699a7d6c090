use std::io::Write;
use std::path::Path;

use super::{Example, Label};
use crate::error::{Error, Result};

/// A column referenced by header name or by 0-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    /// Parses `"3"` as an index and anything else as a name.
    pub fn parse(s: &str) -> Self {
        s.parse()
            .map(Column::Index)
            .unwrap_or_else(|_| Column::Name(s.to_string()))
    }

    fn resolve(&self, headers: Option<&csv::StringRecord>) -> Result<usize> {
        match self {
            Column::Index(i) => Ok(*i),
            Column::Name(name) => headers
                .and_then(|h| h.iter().position(|c| c.trim() == name))
                .ok_or_else(|| Error::Config(format!("no column named {name:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scaling {
    /// Features are used as read.
    None,
    /// Per-feature `(min, max)` ranges, one per feature column.
    Declared(Vec<(f64, f64)>),
    /// Ranges computed from the file itself before emitting examples.
    FirstPass,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub features: Vec<Column>,
    pub label: Column,
    pub positive_token: String,
    pub negative_token: String,
    pub delimiter: u8,
    pub has_header: bool,
    pub scaling: Scaling,
}

impl CsvSchema {
    /// Schema for files written by [`write_stream_csv`].
    pub fn stream_dump(n_features: usize) -> Self {
        CsvSchema {
            features: (1..=n_features)
                .map(|i| Column::Name(format!("f{i}")))
                .collect(),
            label: Column::Name("label".into()),
            positive_token: "1".into(),
            negative_token: "-1".into(),
            delimiter: b',',
            has_header: true,
            scaling: Scaling::None,
        }
    }
}

fn scale(v: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        ((v - lo) / (hi - lo)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Reads a labelled stream; `t` is the 1-based data row index.
pub fn load_csv_stream(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<Example<f64>>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(schema.delimiter)
        .has_headers(schema.has_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = if schema.has_header {
        Some(reader.headers().map_err(|e| Error::csv(path, e))?.clone())
    } else {
        None
    };
    let feature_idx = schema
        .features
        .iter()
        .map(|c| c.resolve(headers.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let label_idx = schema.label.resolve(headers.as_ref())?;
    let column_name = |i: usize| match &headers {
        Some(h) => h.get(i).unwrap_or("?").to_string(),
        None => i.to_string(),
    };

    let mut examples = Vec::new();
    for (row0, record) in reader.records().enumerate() {
        let row = row0 + 1;
        let record = record.map_err(|e| Error::Parse {
            row,
            column: "-".into(),
            message: e.to_string(),
        })?;
        let field = |i: usize| {
            record.get(i).ok_or_else(|| Error::Parse {
                row,
                column: column_name(i),
                message: "missing field".into(),
            })
        };
        let features = feature_idx
            .iter()
            .map(|&i| {
                let raw = field(i)?;
                raw.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        column: column_name(i),
                        message: format!("not a finite number: {raw:?}"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        let token = field(label_idx)?;
        let label = if token == schema.positive_token {
            Label::Pos
        } else if token == schema.negative_token {
            Label::Neg
        } else {
            return Err(Error::UnknownLabel {
                row,
                token: token.to_string(),
            });
        };
        examples.push(Example {
            t: row as u64,
            features,
            label,
        });
    }

    let ranges = match &schema.scaling {
        Scaling::None => None,
        Scaling::Declared(r) => {
            if r.len() != feature_idx.len() {
                return Err(Error::Config(format!(
                    "{} declared ranges for {} feature columns",
                    r.len(),
                    feature_idx.len()
                )));
            }
            Some(r.clone())
        }
        Scaling::FirstPass => {
            let mut r = vec![(f64::INFINITY, f64::NEG_INFINITY); feature_idx.len()];
            for ex in &examples {
                for (range, &v) in r.iter_mut().zip(&ex.features) {
                    range.0 = range.0.min(v);
                    range.1 = range.1.max(v);
                }
            }
            Some(r)
        }
    };
    if let Some(ranges) = ranges {
        for ex in &mut examples {
            for (v, &range) in ex.features.iter_mut().zip(&ranges) {
                *v = scale(*v, range);
            }
        }
    }
    Ok(examples)
}

/// Writes `t,f1,...,fn,label` with a header row.
pub fn write_stream_csv<W: Write>(mut out: W, examples: &[Example<f64>]) -> std::io::Result<()> {
    let n = examples.first().map_or(0, |e| e.features.len());
    write!(out, "t")?;
    for i in 1..=n {
        write!(out, ",f{i}")?;
    }
    writeln!(out, ",label")?;
    for ex in examples {
        write!(out, "{}", ex.t)?;
        for v in &ex.features {
            write!(out, ",{v}")?;
        }
        writeln!(out, ",{}", ex.label)?;
    }
    Ok(())
}

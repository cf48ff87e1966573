//! Feature tables: `flow_id[,label],f0,…,f{D-1}`.

use std::fmt::Write as _;

use ockjl_core::Matrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub ids: Vec<String>,
    pub labels: Option<Vec<String>>,
    pub x: Matrix,
}

impl FeatureTable {
    /// Rows numbered from zero, no labels.
    pub fn unlabeled(x: Matrix) -> Self {
        Self {
            ids: (0..x.rows()).map(|i| i.to_string()).collect(),
            labels: None,
            x,
        }
    }
}

pub fn parse_features_csv(text: &str) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Csv {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.get(0) != Some("flow_id") {
        return Err(Error::Csv {
            line: 1,
            msg: "first column must be flow_id".into(),
        });
    }
    let labeled = header.get(1) == Some("label");
    let first = if labeled { 2 } else { 1 };
    let dim = header.len() - first;
    for (j, name) in header.iter().skip(first).enumerate() {
        if name != format!("f{j}") {
            return Err(Error::Csv {
                line: 1,
                msg: format!("expected column f{j}, found {name:?}"),
            });
        }
    }
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut data = Vec::new();
    for row in reader.records() {
        let rec = row.map_err(|e| Error::Csv {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        ids.push(rec[0].to_string());
        if labeled {
            labels.push(rec[1].to_string());
        }
        for (j, raw) in rec.iter().skip(first).enumerate() {
            let v: f64 = raw.parse().map_err(|_| Error::Csv {
                line,
                msg: format!("bad value {raw:?} in column f{j}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line,
                    msg: format!("non-finite value in column f{j}"),
                });
            }
            data.push(v);
        }
    }
    let x = Matrix::from_vec(ids.len(), dim, data)?;
    Ok(FeatureTable {
        ids,
        labels: labeled.then_some(labels),
        x,
    })
}

/// Values use the shortest representation that parses back to the same `f64`.
pub fn write_features_csv(table: &FeatureTable) -> String {
    let mut s = String::from("flow_id");
    if table.labels.is_some() {
        s.push_str(",label");
    }
    for j in 0..table.x.cols() {
        write!(s, ",f{j}").unwrap();
    }
    s.push('\n');
    for (i, row) in table.x.iter_rows().enumerate() {
        s.push_str(&table.ids[i]);
        if let Some(labels) = &table.labels {
            s.push(',');
            s.push_str(&labels[i]);
        }
        for v in row {
            write!(s, ",{v}").unwrap();
        }
        s.push('\n');
    }
    s
}

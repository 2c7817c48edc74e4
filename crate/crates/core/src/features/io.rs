//! Feature matrix and dictionary files.

use std::io::{Read, Write};

use serde::Serialize;

use super::extract::FeatureVector;
use super::schema::{feature_defs, feature_names, FeatureGroup, Range};
use crate::error::{Error, Result};

/// A named numeric table keyed by account id; `None` is a missing cell.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn from_vectors(vectors: &[FeatureVector]) -> Table {
        Table {
            ids: vectors.iter().map(|v| v.account_id.clone()).collect(),
            columns: feature_names().map(str::to_string).collect(),
            rows: vectors.iter().map(|v| v.values().to_vec()).collect(),
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    /// Row index per account id.
    pub fn row_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_value(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

pub fn write_table<W: Write>(writer: W, table: &Table) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["account_id".to_string()];
    header.extend(table.columns.iter().cloned());
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (id, row) in table.ids.iter().zip(&table.rows) {
        record.clear();
        record.push(id.clone());
        record.extend(row.iter().map(|v| format_value(*v)));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("account_id") {
        return Err(Error::Header("first column must be account_id".into()));
    }
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut table = Table { columns, ..Default::default() };
    for rec in rdr.records() {
        let rec = rec?;
        table.ids.push(rec[0].to_string());
        let row = rec
            .iter()
            .skip(1)
            .map(|cell| {
                if cell.is_empty() {
                    Ok(None)
                } else {
                    cell.parse::<f64>().map(Some).map_err(|_| Error::Invalid(format!("bad number '{cell}'")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        table.rows.push(row);
    }
    Ok(table)
}

#[derive(Serialize)]
struct DictionaryEntry<'a> {
    name: &'a str,
    group: FeatureGroup,
    units: &'a str,
    range: Range,
    formula: &'a str,
}

/// JSON description of every feature column.
pub fn feature_dictionary_json() -> String {
    let entries: Vec<_> = feature_defs()
        .iter()
        .map(|d| DictionaryEntry {
            name: &d.name,
            group: d.group,
            units: d.units,
            range: d.range,
            formula: &d.formula,
        })
        .collect();
    serde_json::to_string_pretty(&entries).expect("dictionary serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_round_trips_exactly() {
        let t = Table {
            ids: vec!["A".into(), "B".into()],
            columns: vec!["x".into(), "y".into()],
            rows: vec![vec![Some(0.1 + 0.2), None], vec![Some(-1e-7), Some(12345.678)]],
        };
        let mut buf = Vec::new();
        write_table(&mut buf, &t).unwrap();
        assert_eq!(read_table(&buf[..]).unwrap(), t);
    }

    #[test]
    fn dictionary_lists_every_feature() {
        let v: serde_json::Value = serde_json::from_str(&feature_dictionary_json()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), feature_defs().len());
    }
}

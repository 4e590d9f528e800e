//! Column-typed in-memory tables.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::value::{parse_timestamp, Value};
use crate::error::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldType {
    Quantitative,
    Ordinal,
    Nominal,
    Temporal,
}

impl FieldType {
    pub fn parse(s: &str) -> Option<FieldType> {
        Some(match s {
            "quantitative" => FieldType::Quantitative,
            "ordinal" => FieldType::Ordinal,
            "nominal" => FieldType::Nominal,
            "temporal" => FieldType::Temporal,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FieldType::Quantitative => "quantitative",
            FieldType::Ordinal => "ordinal",
            FieldType::Nominal => "nominal",
            FieldType::Temporal => "temporal",
        }
    }

    /// Continuous types are interpolated during tweening.
    pub fn is_continuous(self) -> bool {
        matches!(self, FieldType::Quantitative | FieldType::Temporal)
    }

    pub fn is_discrete(self) -> bool {
        !self.is_continuous()
    }
}

impl fmt::Display for FieldType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(rename = "type")]
    pub field_type: FieldType,
}

impl Column {
    pub fn new(name: impl Into<String>, field_type: FieldType) -> Self {
        Column {
            name: name.into(),
            field_type,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DataTable {
    columns: Vec<Column>,
    rows: Vec<Vec<Value>>,
}

impl DataTable {
    pub fn new(columns: Vec<Column>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(DataError::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(DataTable {
            columns,
            rows: Vec::new(),
        })
    }

    /// Builds a table, checking row arity and per-column value kinds.
    pub fn from_rows(columns: Vec<Column>, rows: Vec<Vec<Value>>) -> Result<Self, DataError> {
        let mut table = DataTable::new(columns)?;
        for row in rows {
            table.push_row(row)?;
        }
        Ok(table)
    }

    pub fn push_row(&mut self, row: Vec<Value>) -> Result<(), DataError> {
        let index = self.rows.len();
        if row.len() != self.columns.len() {
            return Err(DataError::Row {
                row: index,
                message: format!("expected {} values, found {}", self.columns.len(), row.len()),
            });
        }
        for (col, v) in self.columns.iter().zip(&row) {
            if !conforms(col.field_type, v) {
                return Err(DataError::Row {
                    row: index,
                    message: format!("value {v} does not conform to {} column `{}`", col.field_type, col.name),
                });
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// Unchecked push for rows derived from rows already in a table with
    /// the same schema.
    pub(crate) fn push_row_unchecked(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn empty_like(&self) -> DataTable {
        DataTable {
            columns: self.columns.clone(),
            rows: Vec::new(),
        }
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn field_type(&self, name: &str) -> Option<FieldType> {
        self.column(name).map(|c| c.field_type)
    }

    pub fn value(&self, row: usize, name: &str) -> Option<&Value> {
        let idx = self.column_index(name)?;
        self.rows.get(row).map(|r| &r[idx])
    }

    pub fn values<'a>(&'a self, name: &str) -> impl Iterator<Item = &'a Value> + 'a {
        let idx = self.column_index(name);
        self.rows.iter().filter_map(move |r| idx.map(|i| &r[i]))
    }

    /// Distinct non-null values of a column in first-appearance order.
    pub fn distinct(&self, name: &str) -> Vec<Value> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for v in self.values(name) {
            if v.is_null() {
                continue;
            }
            if seen.insert(v.canonical_key()) {
                out.push(v.clone());
            }
        }
        out
    }

    /// Returns a copy with an extra column appended; `f` computes the value
    /// from the row index.
    pub fn with_column(&self, column: Column, mut f: impl FnMut(usize) -> Value) -> Result<DataTable, DataError> {
        let mut columns = self.columns.clone();
        columns.push(column);
        let mut out = DataTable::new(columns)?;
        for (i, row) in self.rows.iter().enumerate() {
            let mut r = row.clone();
            r.push(f(i));
            out.rows.push(r);
        }
        Ok(out)
    }

    /// Keeps rows for which `keep` returns true.
    pub fn filter(&self, mut keep: impl FnMut(&[Value]) -> bool) -> DataTable {
        DataTable {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| keep(r)).cloned().collect(),
        }
    }

    /// Builds a table from JSON objects. Column order is first-appearance
    /// order of keys; missing keys become null.
    pub fn from_json_rows(rows: &[serde_json::Value]) -> Result<Self, DataError> {
        let mut names: Vec<String> = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let obj = row.as_object().ok_or_else(|| DataError::Row {
                row: i,
                message: "expected an object".into(),
            })?;
            for k in obj.keys() {
                if !names.contains(k) {
                    names.push(k.clone());
                }
            }
        }
        let mut cells: Vec<Vec<Value>> = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let obj = row.as_object().expect("checked above");
            let mut r = Vec::with_capacity(names.len());
            for n in &names {
                let v = match obj.get(n) {
                    None => Value::Null,
                    Some(j) => Value::from_json(j).ok_or_else(|| DataError::Row {
                        row: i,
                        message: format!("field `{n}` is not a scalar"),
                    })?,
                };
                r.push(v);
            }
            cells.push(r);
        }
        Self::from_cells(names, cells)
    }

    /// Loads a CSV file with a header row.
    pub fn from_csv_path(path: &Path) -> Result<Self, DataError> {
        let file = std::fs::File::open(path).map_err(|source| DataError::Open {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_str(text: &str) -> Result<Self, DataError> {
        Self::from_csv_reader(text.as_bytes())
    }

    fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let names: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            raw.push(rec.iter().map(str::to_string).collect());
        }
        // Infer per column: numbers, then booleans, then dates, else strings.
        let ncols = names.len();
        let mut parsed: Vec<Vec<Value>> = vec![Vec::with_capacity(ncols); raw.len()];
        for c in 0..ncols {
            let cells: Vec<&str> = raw.iter().map(|r| r[c].as_str()).collect();
            let non_empty = || cells.iter().filter(|s| !s.trim().is_empty());
            let kind = if non_empty().all(|s| s.trim().parse::<f64>().is_ok()) {
                0
            } else if non_empty().all(|s| matches!(s.trim(), "true" | "false")) {
                1
            } else if non_empty().all(|s| parse_timestamp(s).is_some()) {
                2
            } else {
                3
            };
            for (r, s) in cells.iter().enumerate() {
                let t = s.trim();
                let v = if t.is_empty() && kind != 3 {
                    Value::Null
                } else {
                    match kind {
                        0 => Value::Number(t.parse().expect("checked")),
                        1 => Value::Bool(t == "true"),
                        2 => Value::Timestamp(parse_timestamp(t).expect("checked")),
                        _ => Value::String(s.to_string()),
                    }
                };
                parsed[r].push(v);
            }
        }
        Self::from_cells(names, parsed)
    }

    fn from_cells(names: Vec<String>, cells: Vec<Vec<Value>>) -> Result<Self, DataError> {
        let columns = names
            .iter()
            .enumerate()
            .map(|(i, n)| Column {
                name: n.clone(),
                field_type: infer_field_type(cells.iter().map(|r| &r[i])),
            })
            .collect();
        Self::from_rows(columns, cells)
    }

    pub fn to_json_rows(&self) -> Vec<serde_json::Value> {
        self.rows
            .iter()
            .map(|r| {
                let mut obj = serde_json::Map::new();
                for (c, v) in self.columns.iter().zip(r) {
                    obj.insert(c.name.clone(), v.to_json());
                }
                serde_json::Value::Object(obj)
            })
            .collect()
    }
}

/// quantitative for numeric columns, temporal for timestamp columns,
/// nominal otherwise.
pub fn infer_field_type<'a>(values: impl Iterator<Item = &'a Value>) -> FieldType {
    let mut numeric = true;
    let mut temporal = true;
    let mut any = false;
    for v in values {
        match v {
            Value::Null => continue,
            Value::Number(_) => temporal = false,
            Value::Timestamp(_) => numeric = false,
            _ => {
                numeric = false;
                temporal = false;
            }
        }
        any = true;
    }
    if !any {
        FieldType::Nominal
    } else if numeric {
        FieldType::Quantitative
    } else if temporal {
        FieldType::Temporal
    } else {
        FieldType::Nominal
    }
}

fn conforms(ft: FieldType, v: &Value) -> bool {
    match (ft, v) {
        (_, Value::Null) => true,
        (FieldType::Quantitative, Value::Number(_)) => true,
        (FieldType::Temporal, Value::Timestamp(_)) => true,
        (FieldType::Quantitative | FieldType::Temporal, _) => false,
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_inference_and_quoting() {
        let t = DataTable::from_csv_str("name,year,when,flag\n\"Smith, J\",1955,2020-01-01,true\nLee,1960,,false\n")
            .unwrap();
        assert_eq!(t.field_type("name"), Some(FieldType::Nominal));
        assert_eq!(t.field_type("year"), Some(FieldType::Quantitative));
        assert_eq!(t.field_type("when"), Some(FieldType::Temporal));
        assert_eq!(t.value(0, "name"), Some(&Value::from("Smith, J")));
        assert_eq!(t.value(1, "when"), Some(&Value::Null));
        assert_eq!(t.value(1, "flag"), Some(&Value::Bool(false)));
    }

    #[test]
    fn rejects_nonconforming_rows() {
        let cols = vec![Column {
            name: "x".into(),
            field_type: FieldType::Quantitative,
        }];
        let err = DataTable::from_rows(cols, vec![vec![Value::from("a")]]).unwrap_err();
        assert!(matches!(err, DataError::Row { row: 0, .. }));
    }

    #[test]
    fn rejects_duplicate_columns() {
        let c = Column {
            name: "x".into(),
            field_type: FieldType::Nominal,
        };
        assert!(matches!(
            DataTable::new(vec![c.clone(), c]),
            Err(DataError::DuplicateColumn(_))
        ));
    }

    #[test]
    fn json_rows_keep_key_order_and_fill_nulls() {
        let rows = serde_json::json!([{"b": 1, "a": "x"}, {"a": "y", "c": true}]);
        let t = DataTable::from_json_rows(rows.as_array().unwrap()).unwrap();
        let names: Vec<_> = t.columns().iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["b", "a", "c"]);
        assert_eq!(t.value(1, "b"), Some(&Value::Null));
    }

    #[test]
    fn distinct_is_first_appearance() {
        let rows = serde_json::json!([{"k": "b"}, {"k": "a"}, {"k": "b"}]);
        let t = DataTable::from_json_rows(rows.as_array().unwrap()).unwrap();
        assert_eq!(t.distinct("k"), vec![Value::from("b"), Value::from("a")]);
    }
}

//! Keyframe interpolation by key-matched rows.

use std::collections::HashMap;

use crate::error::TweenError;
use crate::model::table::{Column, DataTable, FieldType};
use crate::model::value::Value;

/// Hidden column tagging each tweened row.
pub const STATUS: &str = "_status";
pub const STATUS_UPDATE: &str = "update";
pub const STATUS_ENTER: &str = "enter";
pub const STATUS_EXIT: &str = "exit";

fn key_index(t: &DataTable, key: &str, side: &'static str) -> Result<HashMap<String, usize>, TweenError> {
    let k = t
        .column_index(key)
        .ok_or_else(|| TweenError::MissingKey(key.to_string()))?;
    let mut index = HashMap::with_capacity(t.len());
    for (i, row) in t.rows().iter().enumerate() {
        if index.insert(row[k].canonical_key(), i).is_some() {
            return Err(TweenError::DuplicateKey {
                key: row[k].label(),
                side,
            });
        }
    }
    Ok(index)
}

fn lerp(a: &Value, b: &Value, u: f64) -> Value {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => Value::Number(x + u * (y - x)),
        (Value::Timestamp(x), Value::Timestamp(y)) => Value::Timestamp(x + u * (y - x)),
        _ => a.clone(),
    }
}

/// Tags every row of `t` as an update.
pub fn with_status(t: &DataTable, status: &str) -> DataTable {
    if t.column_index(STATUS).is_some() {
        return t.clone();
    }
    t.with_column(Column::new(STATUS, FieldType::Nominal), |_| Value::from(status))
        .expect("status column is new")
}

/// Joins `current` and `next` on `key` at fraction `u`.
///
/// Rows of `current` keep their order. Shared keys interpolate the
/// `interpolate` fields; other fields hold the start value until `u = 1`,
/// where the next row is taken whole. Keys only in `current` are tagged
/// exiting. Keys only in `next` are appended as entering rows when
/// `include_enter` is set and `u > 0`.
pub fn tween_dataset(
    current: &DataTable,
    next: &DataTable,
    key: &str,
    u: f64,
    interpolate: &[String],
    include_enter: bool,
) -> Result<DataTable, TweenError> {
    if !(0.0..=1.0).contains(&u) {
        return Err(TweenError::Fraction(u));
    }
    let cur_keys = key_index(current, key, "current")?;
    let next_keys = key_index(next, key, "next")?;
    let k = current.column_index(key).expect("checked by key_index");
    let lerp_cols: Vec<usize> = interpolate.iter().filter_map(|f| current.column_index(f)).collect();
    // Column positions in `next` for each column of `current`.
    let map: Vec<Option<usize>> = current.columns().iter().map(|c| next.column_index(&c.name)).collect();

    let mut out = with_status(&current.empty_like(), STATUS_UPDATE);
    let mut rows = Vec::with_capacity(current.len());
    for row in current.rows() {
        let mut r = row.clone();
        let status = match next_keys.get(&row[k].canonical_key()) {
            Some(&j) => {
                let nrow = &next.rows()[j];
                if u >= 1.0 {
                    for (c, m) in map.iter().enumerate() {
                        if let Some(m) = m {
                            r[c] = nrow[*m].clone();
                        }
                    }
                } else if u > 0.0 {
                    for &c in &lerp_cols {
                        if let Some(m) = map[c] {
                            r[c] = lerp(&row[c], &nrow[m], u);
                        }
                    }
                }
                STATUS_UPDATE
            }
            None => STATUS_EXIT,
        };
        r.push(Value::from(status));
        rows.push(r);
    }
    if include_enter && u > 0.0 {
        let nk = next.column_index(key).expect("checked by key_index");
        for nrow in next.rows() {
            if cur_keys.contains_key(&nrow[nk].canonical_key()) {
                continue;
            }
            let mut r: Vec<Value> = map.iter().map(|m| m.map_or(Value::Null, |m| nrow[m].clone())).collect();
            r.push(Value::from(STATUS_ENTER));
            rows.push(r);
        }
    }
    for r in rows {
        out.push_row_unchecked(r);
    }
    Ok(out)
}

//! Scale domains resolved against materialized datasets.

use serde::Serialize;

use crate::compile::ir::{DomainSpec, RangeSpec, ScaleKind, ScaleNode};
use crate::model::table::DataTable;
use crate::model::value::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ResolvedDomain {
    Continuous { lo: f64, hi: f64 },
    Discrete { values: Vec<Value> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScale {
    pub scale: ScaleKind,
    pub domain: ResolvedDomain,
    pub range: RangeSpec,
}

impl ResolvedScale {
    pub fn extent(&self) -> Option<(f64, f64)> {
        match self.domain {
            ResolvedDomain::Continuous { lo, hi } => Some((lo, hi)),
            ResolvedDomain::Discrete { .. } => None,
        }
    }
}

fn is_continuous(kind: ScaleKind) -> bool {
    matches!(
        kind,
        ScaleKind::Linear | ScaleKind::Sqrt | ScaleKind::Time | ScaleKind::SequentialColor
    )
}

/// Widens a zero-width extent by 5% of the value, or by 1 at zero.
pub fn pad_degenerate(lo: f64, hi: f64) -> (f64, f64) {
    if lo != hi {
        return (lo, hi);
    }
    let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
    (lo - pad, hi + pad)
}

/// `[min, max]` of the numeric values of `fields` in `table`.
pub fn extent(table: &DataTable, fields: &[String]) -> Option<(f64, f64)> {
    let mut acc: Option<(f64, f64)> = None;
    for f in fields {
        for v in table.values(f) {
            let Some(x) = v.as_f64().filter(|x| x.is_finite()) else {
                continue;
            };
            acc = Some(match acc {
                None => (x, x),
                Some((lo, hi)) => (lo.min(x), hi.max(x)),
            });
        }
    }
    acc
}

/// Resolves `node` against the dataset it reads. An empty dataset keeps
/// `previous`.
pub fn resolve_scale(node: &ScaleNode, data: Option<&DataTable>, previous: Option<&ResolvedScale>) -> ResolvedScale {
    let domain = match &node.domain {
        DomainSpec::Static { values } => {
            if is_continuous(node.scale) {
                let nums: Vec<f64> = values.iter().filter_map(Value::as_f64).collect();
                match nums.as_slice() {
                    [lo, hi, ..] => ResolvedDomain::Continuous { lo: *lo, hi: *hi },
                    [v] => {
                        let (lo, hi) = pad_degenerate(*v, *v);
                        ResolvedDomain::Continuous { lo, hi }
                    }
                    [] => ResolvedDomain::Continuous { lo: 0.0, hi: 1.0 },
                }
            } else {
                ResolvedDomain::Discrete { values: values.clone() }
            }
        }
        DomainSpec::Extent { fields, zero, .. } => match data.and_then(|d| extent(d, fields)) {
            Some((lo, hi)) => {
                let (lo, hi) = if *zero { (lo.min(0.0), hi.max(0.0)) } else { (lo, hi) };
                let (lo, hi) = pad_degenerate(lo, hi);
                ResolvedDomain::Continuous { lo, hi }
            }
            None => match previous {
                Some(p) => p.domain.clone(),
                None => ResolvedDomain::Continuous { lo: 0.0, hi: 1.0 },
            },
        },
        DomainSpec::Distinct { field, sort, .. } => {
            let mut values = data.map(|d| d.distinct(field)).unwrap_or_default();
            if *sort {
                values.sort_by(Value::total_cmp);
            }
            ResolvedDomain::Discrete { values }
        }
    };
    ResolvedScale {
        scale: node.scale,
        domain,
        range: node.range.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn node(zero: bool) -> ScaleNode {
        ScaleNode {
            name: "x".into(),
            scale: ScaleKind::Linear,
            domain: DomainSpec::Extent {
                dataset: "data:rendered".into(),
                fields: vec!["v".into()],
                zero,
            },
            range: RangeSpec::Interval { lo: 0.0, hi: 100.0 },
        }
    }

    fn table(vals: &[f64]) -> DataTable {
        let rows: Vec<_> = vals.iter().map(|v| json!({"v": v})).collect();
        DataTable::from_json_rows(&rows).unwrap()
    }

    #[test]
    fn extent_with_zero() {
        let r = resolve_scale(&node(true), Some(&table(&[3.0, 37.1])), None);
        assert_eq!(r.extent(), Some((0.0, 37.1)));
        let r = resolve_scale(&node(false), Some(&table(&[3.0, 37.1])), None);
        assert_eq!(r.extent(), Some((3.0, 37.1)));
    }

    #[test]
    fn degenerate_padding() {
        let r = resolve_scale(&node(false), Some(&table(&[20.0])), None);
        assert_eq!(r.extent(), Some((19.0, 21.0)));
        let r = resolve_scale(&node(false), Some(&table(&[0.0])), None);
        assert_eq!(r.extent(), Some((-1.0, 1.0)));
    }

    #[test]
    fn empty_keeps_previous() {
        let prev = resolve_scale(&node(false), Some(&table(&[1.0, 2.0])), None);
        let empty = table(&[1.0]).empty_like();
        let r = resolve_scale(&node(false), Some(&empty), Some(&prev));
        assert_eq!(r.extent(), Some((1.0, 2.0)));
    }
}

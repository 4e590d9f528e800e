//! Loading a spec with its data and running it through normalize and
//! compile.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::compile::{compile, DataflowGraph};
use crate::error::{CompileError, DataError, RuntimeError, SpecError};
use crate::model::diagnostic::Diagnostic;
use crate::model::spec::{parse_spec, DataSource, Spec};
use crate::model::table::DataTable;
use crate::normalize::{normalize, NormalizedSpec};
use crate::runtime::RuntimeState;

#[derive(Debug, Error)]
pub enum ChartError {
    #[error("cannot open {}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("spec has {} error(s)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Runtime(#[from] RuntimeError),
}

impl ChartError {
    /// Diagnostics carried by the error, or one synthesized from its message.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        match self {
            ChartError::Invalid(d) => d.clone(),
            ChartError::Spec(SpecError::Schema { path, message }) => {
                vec![Diagnostic::error(path.clone(), message.clone())]
            }
            other => vec![Diagnostic::error("", other.to_string())],
        }
    }

    /// True for failures of the compiler or runtime's own invariants rather
    /// than of the inputs.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            ChartError::Compile(CompileError::Verify(_)) | ChartError::Runtime(RuntimeError::Graph(_))
        )
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self,
            ChartError::Io { .. }
                | ChartError::Data(DataError::Open { .. })
                | ChartError::Spec(SpecError::Data(DataError::Open { .. }))
        )
    }
}

/// Reads a data file: JSON arrays of row objects, anything else as CSV.
pub fn read_table(path: &Path) -> Result<DataTable, ChartError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        let text = std::fs::read_to_string(path).map_err(|e| ChartError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let json: serde_json::Value = serde_json::from_str(&text).map_err(|e| DataError::Row {
            row: 0,
            message: e.to_string(),
        })?;
        let rows = json.as_array().ok_or_else(|| DataError::Row {
            row: 0,
            message: "expected an array of row objects".into(),
        })?;
        Ok(DataTable::from_json_rows(rows)?)
    } else {
        Ok(DataTable::from_csv_path(path)?)
    }
}

/// Data for `spec`: inline rows, else `data_override`, else the spec's
/// url resolved against `spec_dir`.
pub fn resolve_data(
    spec: &Spec,
    spec_dir: Option<&Path>,
    data_override: Option<&Path>,
) -> Result<DataTable, ChartError> {
    match (&spec.data, data_override) {
        (DataSource::Inline(t), _) => Ok(t.clone()),
        (_, Some(p)) => read_table(p),
        (DataSource::Url(u), None) => {
            let p = match spec_dir {
                Some(d) => d.join(u),
                None => PathBuf::from(u),
            };
            read_table(&p)
        }
    }
}

/// A compiled chart ready to run.
#[derive(Debug, Clone)]
pub struct Chart {
    pub normalized: NormalizedSpec,
    pub graph: Arc<DataflowGraph>,
    pub data: DataTable,
    /// Non-fatal parse and validation diagnostics.
    pub warnings: Vec<Diagnostic>,
}

impl Chart {
    pub fn build(spec: &Spec, data: DataTable) -> Result<Chart, ChartError> {
        let normalized = normalize(spec, &data).map_err(ChartError::Invalid)?;
        let warnings = crate::model::validate::validate_spec(spec, &data)
            .into_iter()
            .filter(|d| !d.is_error())
            .collect();
        let graph = compile(&normalized, &data)?;
        Ok(Chart {
            normalized,
            graph: Arc::new(graph),
            data,
            warnings,
        })
    }

    pub fn from_text(text: &str, spec_dir: Option<&Path>, data_override: Option<&Path>) -> Result<Chart, ChartError> {
        let parsed = parse_spec(text)?;
        let data = resolve_data(&parsed.spec, spec_dir, data_override)?;
        let mut chart = Chart::build(&parsed.spec, data)?;
        let mut warnings = parsed.warnings;
        warnings.append(&mut chart.warnings);
        chart.warnings = warnings;
        Ok(chart)
    }

    pub fn load(spec_path: &Path, data_override: Option<&Path>) -> Result<Chart, ChartError> {
        let text = std::fs::read_to_string(spec_path).map_err(|e| ChartError::Io {
            path: spec_path.to_path_buf(),
            message: e.to_string(),
        })?;
        Chart::from_text(&text, spec_path.parent(), data_override)
    }

    pub fn start(&self) -> Result<RuntimeState, RuntimeError> {
        RuntimeState::init(Arc::clone(&self.graph), &self.data)
    }
}

//! Compiler and deterministic runtime for an animated, interactive
//! visualization grammar.

pub mod chart;
pub mod compile;
pub mod easing;
pub mod error;
pub mod model;
pub mod normalize;
pub mod runtime;
pub mod scene;
pub mod trace;

/// Reserved identifier bound to the current animation value.
pub const ANIM_VALUE: &str = "anim_value";

pub use chart::{Chart, ChartError};
pub use compile::{compile, verify_graph, DataflowGraph};
pub use easing::{apply_easing, Easing};
pub use error::{CompileError, DataError, ExprError, RuntimeError, SpecError, TweenError, TypeError};
pub use model::{parse_spec, validate_spec, DataTable, Diagnostic, Expr, FieldType, Spec, Value};
pub use normalize::{normalize, NormalizedSpec};
pub use runtime::{Event, RuntimeState};
pub use scene::{encode_frame, hit_test, render_svg, Scenegraph};

//! Document model: values, tables, expressions, specs and their validation.

pub mod diagnostic;
pub mod expr;
pub mod spec;
pub mod table;
pub mod validate;
pub mod value;

pub use diagnostic::{Diagnostic, Severity};
pub use expr::{eval_expression, parse_expression, Env, Expr};
pub use spec::{parse_spec, ParsedSpec, Spec};
pub use table::{Column, DataTable, FieldType};
pub use validate::validate_spec;
pub use value::Value;

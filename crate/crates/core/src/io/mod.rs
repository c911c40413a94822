//! Instance documents and trace output.

mod instance_file;
mod trace;

pub use instance_file::{
    emit_instance, parse_instance, parse_instance_unchecked, ContextDoc, ContextMode, ContextTableRow,
    DimensionDoc, EdgeDoc, FormatError, InstanceDoc, Num, RuleKind, RuleTableRow,
};
pub use trace::{csv_header, emit_trace, trace_csv, HStarColumn, TraceFormat};

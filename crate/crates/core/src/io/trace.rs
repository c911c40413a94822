//! Trace serialization: CSV with a fixed column order, or JSON lines.

use std::io::Write;

use serde::Serialize;

use crate::engine::SearchResult;
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    /// One JSON object per line, same fields as the CSV.
    Structured,
}

/// Per-step frontier potential floor; `None` is infinite.
pub type HStarColumn = [Option<u64>];

/// Header row for a `d`-dimensional trace.
pub fn csv_header(dims: usize, with_h_star: bool) -> Vec<String> {
    let mut cols = vec!["step".to_string(), "sig_node".into(), "sig_context".into()];
    cols.extend((1..=dims).map(|i| format!("cost_{i}")));
    cols.extend((1..=dims).map(|i| format!("bin_{i}")));
    cols.extend(
        [
            "skyline_size",
            "frontier_size",
            "covered_bins",
            "solutions",
            "certificate",
            "cost_updates",
            "dominance_comparisons",
        ]
        .map(String::from),
    );
    if with_h_star {
        cols.push("h_star".into());
    }
    cols
}

#[derive(Serialize)]
struct Row<'a> {
    step: u64,
    sig_node: &'a str,
    sig_context: &'a str,
    cost: Vec<String>,
    bin: &'a [u32],
    skyline_size: usize,
    frontier_size: usize,
    covered_bins: usize,
    solutions: usize,
    certificate: bool,
    cost_updates: u64,
    dominance_comparisons: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h_star: Option<String>,
}

fn h_star_text(v: Option<u64>) -> String {
    v.map_or_else(|| "inf".to_string(), |h| h.to_string())
}

/// Writes one row per trace event. `h_star`, when given, must have one value
/// per event and adds the `h_star` column.
pub fn emit_trace<W: Write>(
    result: &SearchResult,
    instance: &Instance,
    sink: W,
    format: TraceFormat,
    h_star: Option<&HStarColumn>,
) -> std::io::Result<()> {
    if let Some(h) = h_star {
        if h.len() != result.trace.len() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("h_star has {} values for {} trace rows", h.len(), result.trace.len()),
            ));
        }
    }
    let rows = result.trace.iter().enumerate().map(|(i, e)| Row {
        step: e.step,
        sig_node: instance.node_name(e.sig.node),
        sig_context: instance.context_name(e.sig.context),
        cost: instance
            .cost_values(&e.cost)
            .into_iter()
            .map(|v| v.normalize().to_string())
            .collect(),
        bin: &e.bin.0,
        skyline_size: e.skyline_size_before,
        frontier_size: e.frontier_size_after,
        covered_bins: e.covered_bins,
        solutions: e.solutions_count,
        certificate: e.certificate_held,
        cost_updates: e.ops.cost_updates,
        dominance_comparisons: e.ops.dominance_comparisons,
        h_star: h_star.map(|h| h_star_text(h[i])),
    });
    match format {
        TraceFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(sink);
            w.write_record(csv_header(instance.dims(), h_star.is_some()))?;
            for row in rows {
                let mut rec = vec![row.step.to_string(), row.sig_node.into(), row.sig_context.into()];
                rec.extend(row.cost);
                rec.extend(row.bin.iter().map(u32::to_string));
                rec.extend([
                    row.skyline_size.to_string(),
                    row.frontier_size.to_string(),
                    row.covered_bins.to_string(),
                    row.solutions.to_string(),
                    row.certificate.to_string(),
                    row.cost_updates.to_string(),
                    row.dominance_comparisons.to_string(),
                ]);
                rec.extend(row.h_star);
                w.write_record(&rec)?;
            }
            w.flush()
        }
        TraceFormat::Structured => {
            let mut sink = sink;
            for row in rows {
                serde_json::to_writer(&mut sink, &row)?;
                sink.write_all(b"\n")?;
            }
            sink.flush()
        }
    }
}

/// Convenience wrapper returning the CSV as a string.
pub fn trace_csv(result: &SearchResult, instance: &Instance, h_star: Option<&HStarColumn>) -> String {
    let mut buf = Vec::new();
    emit_trace(result, instance, &mut buf, TraceFormat::Csv, h_star).expect("writing to memory");
    String::from_utf8(buf).expect("trace is UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, RunConfig};
    use crate::fixtures::running_example;

    #[test]
    fn running_example_csv() {
        let inst = running_example();
        let res = run(&inst, &RunConfig::default()).unwrap();
        let text = trace_csv(&res, &inst, None);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "step,sig_node,sig_context,cost_1,cost_2,cost_3,bin_1,bin_2,bin_3,skyline_size,frontier_size,covered_bins,solutions,certificate,cost_updates,dominance_comparisons"
        );
        assert!(lines[1].starts_with("1,s,init,0,0,0,0,0,0,1,2,1,0,false,"), "{}", lines[1]);
        assert_eq!(lines.len(), 4);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn empty_trace_is_header_only() {
        let inst = running_example();
        let mut res = run(&inst, &RunConfig::default()).unwrap();
        res.trace.clear();
        let text = trace_csv(&res, &inst, None);
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn h_star_column_and_length_check() {
        let inst = running_example();
        let res = run(&inst, &RunConfig::default()).unwrap();
        let h = [Some(2), Some(1), None];
        let text = trace_csv(&res, &inst, Some(&h));
        assert!(text.lines().next().unwrap().ends_with(",h_star"));
        assert!(text.lines().nth(3).unwrap().ends_with(",inf"));
        let mut sink = Vec::new();
        assert!(emit_trace(&res, &inst, &mut sink, TraceFormat::Csv, Some(&h[..1])).is_err());
    }

    #[test]
    fn structured_rows_parse_back() {
        let inst = running_example();
        let res = run(&inst, &RunConfig::default()).unwrap();
        let mut buf = Vec::new();
        emit_trace(&res, &inst, &mut buf, TraceFormat::Structured, None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["sig_node"], "s");
        assert_eq!(first["cost"], serde_json::json!(["0", "0", "0"]));
        assert_eq!(text.lines().count(), res.trace.len());
    }
}

//! `skyline`: run, inspect and verify multi-criteria traversal instances.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use skyline_search::fixtures::RUNNING_EXAMPLE_TOML;
use skyline_search::instance::{validate_instance, Instance};
use skyline_search::io::{emit_instance, emit_trace, parse_instance, parse_instance_unchecked, TraceFormat};
use skyline_search::oracle::{enumerate_feasible, generate_random_instance, verify_descent, verify_instance, GenParams};
use skyline_search::{run, RunConfig, SearchResult, Termination};

/// Instance argument that names the bundled fixture when no such file exists.
const RUNNING_EXAMPLE: &str = "running_example";

#[derive(Parser)]
#[command(name = "skyline", version, about = "Skyline-First multi-criteria graph search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Search an instance and print the solutions.
    Run {
        instance: String,
        /// Write the per-step trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        trace_format: FormatArg,
        /// Add the oracle's frontier potential floor to the trace.
        #[arg(long)]
        h_star: bool,
        /// Check the certificate every N extractions.
        #[arg(long, default_value_t = 1)]
        cert_period: u64,
        #[arg(long)]
        step_limit: Option<u64>,
    },
    /// Enumerate every feasible path and print its Pareto layers.
    Layers { instance: String },
    /// Run the engine and every oracle check.
    Verify {
        instance: Option<String>,
        /// Also verify generated instances for seeds A..B (inclusive).
        #[arg(long, value_parser = parse_seed_range)]
        seeds: Option<RangeInclusive<u64>>,
        #[arg(long, default_value_t = 1)]
        cert_period: u64,
    },
    /// Write a random instance.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = GenParams::default().max_nodes)]
        nodes: usize,
        #[arg(long, default_value_t = GenParams::default().max_dims)]
        dims: usize,
        #[arg(long, default_value_t = GenParams::default().max_grid)]
        grid: usize,
        #[arg(long, default_value_t = GenParams::default().max_attributes)]
        attributes: usize,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Print the validation report.
    Validate { instance: String },
}

fn parse_seed_range(s: &str) -> Result<RangeInclusive<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let a: u64 = a.trim().parse().map_err(|e| format!("bad seed `{a}`: {e}"))?;
    let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|e| format!("bad seed `{b}`: {e}"))?;
    if a > b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok(a..=b)
}

fn read_source(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if arg == RUNNING_EXAMPLE && !path.exists() {
        return Ok(RUNNING_EXAMPLE_TOML.to_string());
    }
    fs::read_to_string(path).with_context(|| format!("reading {arg}"))
}

fn load(arg: &str) -> Result<Instance> {
    let text = read_source(arg)?;
    parse_instance(&text).with_context(|| format!("loading {arg}"))
}

fn path_text(instance: &Instance, edges: &[skyline_search::instance::EdgeId]) -> String {
    let mut nodes = vec![instance.node_name(instance.source())];
    nodes.extend(edges.iter().map(|&e| instance.node_name(instance.edge(e).dst)));
    nodes.join(" -> ")
}

fn print_solutions(out: &mut impl Write, instance: &Instance, result: &SearchResult) -> io::Result<()> {
    writeln!(out, "{:<4} {:<16} {:<20} {:<6} path", "#", "signature", "cost", "step")?;
    for (i, s) in result.solutions.iter().enumerate() {
        writeln!(
            out,
            "{:<4} {:<16} {:<20} {:<6} {}",
            i + 1,
            instance.format_signature(s.sig),
            instance.format_cost(&s.cost),
            s.discovered_at_step,
            path_text(instance, s.path.edges())
        )?;
    }
    writeln!(
        out,
        "termination: {} after {} steps ({} solutions)",
        result.termination,
        result.steps(),
        result.solutions.len()
    )
}

fn cmd_run(
    instance: &str,
    trace: Option<PathBuf>,
    format: FormatArg,
    h_star: bool,
    cert_period: u64,
    step_limit: Option<u64>,
) -> Result<ExitCode> {
    let inst = load(instance)?;
    let config = RunConfig {
        cert_period,
        step_limit,
        record_snapshots: h_star,
    };
    let result = run(&inst, &config)?;
    if let Some(path) = trace {
        let column = if h_star {
            Some(verify_descent(&result, &inst)?.h_star_column())
        } else {
            None
        };
        let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let format = match format {
            FormatArg::Csv => TraceFormat::Csv,
            FormatArg::Structured => TraceFormat::Structured,
        };
        emit_trace(&result, &inst, BufWriter::new(file), format, column.as_deref())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    print_solutions(&mut io::stdout().lock(), &inst, &result)?;
    let ok = match result.termination {
        Termination::CertificateHeld | Termination::FrontierExhausted => !result.solutions.is_empty(),
        Termination::StepLimit => false,
    };
    Ok(if ok {
        ExitCode::SUCCESS
    } else if result.solutions.is_empty() {
        ExitCode::from(2)
    } else {
        // Stopped by the step limit with some solutions: no guarantee holds.
        ExitCode::from(1)
    })
}

fn cmd_layers(instance: &str) -> Result<ExitCode> {
    let inst = load(instance)?;
    let oracle = enumerate_feasible(&inst)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{} feasible paths", oracle.feasible.len())?;
    for (i, p) in oracle.feasible.iter().enumerate() {
        writeln!(
            out,
            "p{} {} @ {}  {}",
            i + 1,
            inst.format_cost(&p.cost),
            inst.format_signature(p.sig),
            path_text(&inst, p.path.edges())
        )?;
    }
    let index = |p: &skyline_search::oracle::FeasiblePath| oracle.feasible.iter().position(|q| q == p).unwrap() + 1;
    for (k, layer) in oracle.layers().iter().enumerate() {
        let mut names: Vec<usize> = layer.iter().map(|p| index(p)).collect();
        names.sort();
        let names: Vec<String> = names.iter().map(|i| format!("p{i}")).collect();
        writeln!(out, "layer {}: {{{}}}", k + 1, names.join(", "))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(instance: Option<String>, seeds: Option<RangeInclusive<u64>>, cert_period: u64) -> Result<ExitCode> {
    if instance.is_none() && seeds.is_none() {
        bail!("give an instance, --seeds A..B, or both");
    }
    let config = RunConfig {
        cert_period,
        ..Default::default()
    };
    let mut out = io::stdout().lock();
    let mut all_passed = true;
    if let Some(arg) = instance {
        let inst = load(&arg)?;
        let summary = verify_instance(&inst, &config)?;
        writeln!(out, "{arg}:\n{summary}")?;
        all_passed &= summary.passed();
    }
    if let Some(range) = seeds {
        let params = GenParams::default();
        let (mut passed, mut total) = (0, 0);
        for seed in range {
            total += 1;
            let inst = generate_random_instance(seed, &params)?;
            let summary = verify_instance(&inst, &config)?;
            if summary.passed() {
                passed += 1;
            } else {
                writeln!(out, "seed {seed}: FAIL\n{summary}")?;
            }
        }
        writeln!(out, "seeds: {passed}/{total} passed")?;
        all_passed &= passed == total;
    }
    Ok(if all_passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_gen(seed: u64, params: GenParams, out: PathBuf) -> Result<ExitCode> {
    let inst = generate_random_instance(seed, &params)?;
    fs::write(&out, emit_instance(&inst)).with_context(|| format!("writing {}", out.display()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(instance: &str) -> Result<ExitCode> {
    let text = read_source(instance)?;
    let inst = parse_instance_unchecked(&text).with_context(|| format!("loading {instance}"))?;
    let report = validate_instance(&inst);
    print!("{report}");
    Ok(if report.is_valid() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            instance,
            trace,
            trace_format,
            h_star,
            cert_period,
            step_limit,
        } => cmd_run(&instance, trace, trace_format, h_star, cert_period, step_limit),
        Command::Layers { instance } => cmd_layers(&instance),
        Command::Verify {
            instance,
            seeds,
            cert_period,
        } => cmd_verify(instance, seeds, cert_period),
        Command::Gen {
            seed,
            nodes,
            dims,
            grid,
            attributes,
            out,
        } => {
            let params = GenParams {
                max_nodes: nodes,
                max_dims: dims,
                max_grid: grid,
                max_attributes: attributes,
                ..Default::default()
            };
            cmd_gen(seed, params, out)
        }
        Command::Validate { instance } => cmd_validate(&instance),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

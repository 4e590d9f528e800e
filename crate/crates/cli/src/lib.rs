//! Command-line surface: validate, compile, render, trace and serve.

pub mod render;
pub mod service;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use animflow::model::diagnostic::Diagnostic;
use animflow::model::spec::parse_spec;
use animflow::trace::{parse_trace, replay};
use animflow::{validate_spec, Chart, ChartError};
use clap::{Parser, Subcommand, ValueEnum};

use render::{render_frames, write_frames, Frame, FrameFormat, RenderConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SPEC: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "animflow",
    version,
    about = "Compile and run animated, interactive chart specs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiagnosticFormat {
    Text,
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a spec against its data.
    Validate {
        spec: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: DiagnosticFormat,
    },
    /// Print the compiled dataflow graph.
    Compile {
        spec: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Print the elaborated spec instead of the graph.
        #[arg(long)]
        normalized_only: bool,
    },
    /// Render a frame sequence driven by the timer.
    Render {
        spec: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 30.0, value_parser = positive_f64)]
        fps: f64,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        cycles: u32,
        #[arg(short, long, default_value = "frames")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "svg")]
        format: FrameFormat,
    },
    /// Replay a newline-delimited event trace.
    Trace {
        spec: PathBuf,
        trace: PathBuf,
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(short, long, default_value = "trace_frames")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "frame-doc")]
        format: FrameFormat,
    },
    /// Run the playground session service.
    Serve {
        /// Spec used for sessions created without one.
        spec: Option<PathBuf>,
        #[arg(long, env = "ANIMFLOW_PORT", default_value_t = service::DEFAULT_PORT)]
        port: u16,
        /// Auto-play tick in ms; 0 disables auto-play.
        #[arg(long, default_value_t = service::DEFAULT_TICK_MS)]
        tick_ms: u64,
        /// Directory that relative data urls resolve against.
        #[arg(long)]
        data_dir: Option<PathBuf>,
    },
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl Failure {
    fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
        Failure {
            code: EXIT_IO,
            message: format!("cannot open {}: {e}", path.display()),
            diagnostics: Vec::new(),
        }
    }

    fn internal(message: impl Into<String>) -> Failure {
        Failure {
            code: EXIT_INTERNAL,
            message: message.into(),
            diagnostics: Vec::new(),
        }
    }
}

impl From<ChartError> for Failure {
    fn from(e: ChartError) -> Self {
        let code = if e.is_io() {
            EXIT_IO
        } else if e.is_internal() {
            EXIT_INTERNAL
        } else {
            EXIT_SPEC
        };
        let diagnostics = if code == EXIT_SPEC { e.diagnostics() } else { Vec::new() };
        Failure {
            code,
            message: e.to_string(),
            diagnostics,
        }
    }
}

fn emit_diagnostics(diags: &[Diagnostic], format: DiagnosticFormat, err: &mut dyn Write) {
    for d in diags {
        let _ = match format {
            DiagnosticFormat::Text => writeln!(err, "{d}"),
            DiagnosticFormat::Structured => {
                writeln!(err, "{}", serde_json::to_string(d).expect("diagnostic serializes"))
            }
        };
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))
}

fn write_out(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::io(p, e)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::internal(e.to_string())),
    }
}

pub fn cmd_validate(
    spec: &Path,
    data: Option<&Path>,
    format: DiagnosticFormat,
    err: &mut dyn Write,
) -> Result<(), Failure> {
    let text = read(spec)?;
    let parsed = parse_spec(&text).map_err(|e| Failure::from(ChartError::from(e)))?;
    let table = animflow::chart::resolve_data(&parsed.spec, spec.parent(), data)?;
    let mut diags = parsed.warnings;
    diags.extend(validate_spec(&parsed.spec, &table));
    emit_diagnostics(&diags, format, err);
    if diags.iter().any(Diagnostic::is_error) {
        return Err(Failure {
            code: EXIT_SPEC,
            message: "spec has errors".into(),
            diagnostics: Vec::new(),
        });
    }
    Ok(())
}

pub fn cmd_compile(
    spec: &Path,
    data: Option<&Path>,
    out: Option<&Path>,
    normalized_only: bool,
    stdout: &mut dyn Write,
) -> Result<(), Failure> {
    let chart = Chart::load(spec, data)?;
    let text = if normalized_only {
        chart.normalized.spec().to_document()
    } else {
        chart.graph.to_document()
    };
    write_out(out, &text, stdout)
}

pub fn cmd_render(spec: &Path, data: Option<&Path>, cfg: &RenderConfig, out: &Path) -> Result<Vec<Frame>, Failure> {
    let chart = Chart::load(spec, data)?;
    let mut state = chart.start().map_err(|e| Failure::from(ChartError::from(e)))?;
    let frames = render_frames(&mut state, cfg).map_err(|e| Failure::internal(e.to_string()))?;
    write_frames(out, &frames, cfg.format).map_err(|e| Failure::io(out, e))?;
    Ok(frames)
}

pub fn cmd_trace(
    spec: &Path,
    trace: &Path,
    data: Option<&Path>,
    out: &Path,
    format: FrameFormat,
) -> Result<Vec<Frame>, Failure> {
    let chart = Chart::load(spec, data)?;
    let records = parse_trace(&read(trace)?).map_err(|e| Failure {
        code: EXIT_SPEC,
        message: e.to_string(),
        diagnostics: Vec::new(),
    })?;
    let mut state = chart.start().map_err(|e| Failure::from(ChartError::from(e)))?;
    let scenes = replay(&mut state, &records).map_err(|e| Failure {
        code: EXIT_SPEC,
        message: e.to_string(),
        diagnostics: Vec::new(),
    })?;
    let mut t = 0.0;
    let frames: Vec<Frame> = scenes
        .iter()
        .enumerate()
        .map(|(i, sg)| {
            if let Some(r) = records.get(i) {
                t = r.t_offset_ms;
            }
            Frame::new(i, t, format.serialize(sg))
        })
        .collect();
    write_frames(out, &frames, format).map_err(|e| Failure::io(out, e))?;
    Ok(frames)
}

fn cmd_serve(spec: Option<&Path>, port: u16, tick_ms: u64, data_dir: Option<&Path>) -> Result<(), Failure> {
    let default_spec = spec.map(read).transpose()?;
    let base_dir = data_dir
        .map(Path::to_path_buf)
        .or_else(|| spec.and_then(Path::parent).map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."));
    let config = service::ServiceConfig {
        base_dir,
        default_spec,
        tick_ms,
    };
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::internal(e.to_string()))?;
    rt.block_on(service::serve(port, config)).map_err(|e| Failure {
        code: EXIT_IO,
        message: format!("cannot serve on port {port}: {e}"),
        diagnostics: Vec::new(),
    })
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_SPEC } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Validate { spec, data, format } => cmd_validate(spec, data.as_deref(), *format, stderr),
        Command::Compile {
            spec,
            data,
            out,
            normalized_only,
        } => cmd_compile(spec, data.as_deref(), out.as_deref(), *normalized_only, stdout),
        Command::Render {
            spec,
            data,
            fps,
            cycles,
            out,
            format,
        } => {
            let cfg = RenderConfig {
                fps: *fps,
                cycles: *cycles,
                format: *format,
            };
            cmd_render(spec, data.as_deref(), &cfg, out).map(|frames| {
                let _ = writeln!(stdout, "wrote {} frames to {}", frames.len(), out.display());
            })
        }
        Command::Trace {
            spec,
            trace,
            data,
            out,
            format,
        } => cmd_trace(spec, trace, data.as_deref(), out, *format).map(|frames| {
            let _ = writeln!(stdout, "wrote {} frames to {}", frames.len(), out.display());
        }),
        Command::Serve {
            spec,
            port,
            tick_ms,
            data_dir,
        } => cmd_serve(spec.as_deref(), *port, *tick_ms, data_dir.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            emit_diagnostics(&f.diagnostics, DiagnosticFormat::Text, stderr);
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

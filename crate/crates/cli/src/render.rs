//! Frame sequences, hashes and output files.

use std::fmt::Write as _;
use std::path::Path;

use animflow::{encode_frame, render_svg, RuntimeError, RuntimeState, Scenegraph};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FrameFormat {
    Svg,
    FrameDoc,
}

impl FrameFormat {
    pub fn extension(self) -> &'static str {
        match self {
            FrameFormat::Svg => "svg",
            FrameFormat::FrameDoc => "json",
        }
    }

    pub fn serialize(self, sg: &Scenegraph) -> String {
        match self {
            FrameFormat::Svg => render_svg(sg),
            FrameFormat::FrameDoc => sg.to_document(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderConfig {
    pub fps: f64,
    pub cycles: u32,
    pub format: FrameFormat,
}

impl Default for RenderConfig {
    fn default() -> Self {
        RenderConfig {
            fps: 30.0,
            cycles: 1,
            format: FrameFormat::Svg,
        }
    }
}

/// `ceil(cycle · cycles · fps / 1000)`, or a single frame for charts
/// without a clock.
pub fn frame_count(cycle_ms: Option<f64>, cfg: &RenderConfig) -> usize {
    match cycle_ms {
        Some(t) if t > 0.0 => ((t * cfg.cycles as f64 * cfg.fps / 1000.0).ceil() as usize).max(1),
        _ => 1,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frame {
    pub index: usize,
    pub t_ms: f64,
    #[serde(skip)]
    pub body: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Frame {
    pub fn new(index: usize, t_ms: f64, body: String) -> Frame {
        let sha256 = sha256_hex(body.as_bytes());
        Frame {
            index,
            t_ms,
            body,
            sha256,
        }
    }

    pub fn file_name(&self, format: FrameFormat) -> String {
        format!("frame_{:04}.{}", self.index, format.extension())
    }
}

/// Renders frames at `1000 / fps` ms intervals starting from `state`.
pub fn render_frames(state: &mut RuntimeState, cfg: &RenderConfig) -> Result<Vec<Frame>, RuntimeError> {
    let n = frame_count(state.cycle_ms(), cfg);
    let dt = 1000.0 / cfg.fps;
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            state.advance(dt)?;
        }
        let body = cfg.format.serialize(&encode_frame(state));
        frames.push(Frame::new(i, i as f64 * dt, body));
    }
    Ok(frames)
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    format: &'static str,
    frames: Vec<ManifestEntry<'a>>,
}

#[derive(Debug, Serialize)]
struct ManifestEntry<'a> {
    file: String,
    #[serde(flatten)]
    frame: &'a Frame,
}

/// Writes frame files, `manifest.json` with their hashes and, for SVG, an
/// `index.html` contact sheet.
pub fn write_frames(dir: &Path, frames: &[Frame], format: FrameFormat) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in frames {
        std::fs::write(dir.join(f.file_name(format)), &f.body)?;
    }
    let manifest = Manifest {
        format: format.extension(),
        frames: frames
            .iter()
            .map(|f| ManifestEntry {
                file: f.file_name(format),
                frame: f,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(std::io::Error::other)?;
    text.push('\n');
    std::fs::write(dir.join("manifest.json"), text)?;
    if format == FrameFormat::Svg {
        std::fs::write(dir.join("index.html"), contact_sheet(frames))?;
    }
    Ok(())
}

fn contact_sheet(frames: &[Frame]) -> String {
    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>frames</title>\n\
         <style>body{font-family:sans-serif;display:flex;flex-wrap:wrap;gap:8px}\
         figure{margin:0}img{width:225px;border:1px solid #ddd}</style>\n</head>\n<body>\n",
    );
    for f in frames {
        let _ = writeln!(
            html,
            "<figure><img src=\"{}\"><figcaption>{} ms</figcaption></figure>",
            f.file_name(FrameFormat::Svg),
            animflow::model::value::fmt_number(f.t_ms)
        );
    }
    html.push_str("</body>\n</html>\n");
    html
}

//! Command-line front end.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::codec::{self, PlateLayout, DEFAULT_SEGMENT_HEIGHT, DEFAULT_SEGMENT_WIDTH};
use crate::detect::{self, DetectOptions, Fixed4};
use crate::matcher;
use crate::palette::{self, Palette, PALETTE_LEN};
use crate::radix;
use crate::raster::{self, Rgb};
use crate::scene::{self, SceneSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NOTHING_FOUND: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "colorplate",
    version,
    about = "Color-coded license plate encoder and recognizer"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Render a plate number as a color-coded plate image.
    Encode(EncodeArgs),
    /// Find and decode every color-coded plate in an image.
    Decode(DecodeArgs),
    /// Generate a synthetic test scene and its ground truth.
    Scene(SceneArgs),
    /// Report duplicate palette colors and the palette's minimum color distance.
    AuditPalette(AuditArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Plate number; spaces and hyphens are ignored
    #[arg(long)]
    pub plate: String,
    /// Output image (.png or .ppm)
    #[arg(long)]
    pub out: PathBuf,
    /// Integer upscaling factor
    #[arg(long, default_value_t = 1)]
    pub scale: usize,
    /// Refuse plates containing digits that would not decode back.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_WIDTH)]
    pub segment_width: usize,
    #[arg(long, default_value_t = DEFAULT_SEGMENT_HEIGHT)]
    pub segment_height: usize,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    /// Input image (.png or .ppm)
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Minimum pattern match score
    #[arg(long, default_value_t = matcher::DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Comma-separated template scales to search
    #[arg(long, value_delimiter = ',', default_values_t = matcher::DEFAULT_SCALES)]
    pub scales: Vec<usize>,
    /// Emit JSON instead of text
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SceneArgs {
    /// Scene description (JSON)
    #[arg(long)]
    pub spec: PathBuf,
    /// Output image (.png or .ppm)
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth output (JSON)
    #[arg(long)]
    pub truth: PathBuf,
    /// Use this image as the background instead of the spec's background.
    #[arg(long)]
    pub background: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// Emit JSON instead of text
    #[arg(long)]
    pub json: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() {
                EXIT_FAILURE
            } else {
                EXIT_OK
            };
        }
    };
    let result = match &cli.command {
        Command::Encode(a) => cmd_encode(a, out),
        Command::Decode(a) => cmd_decode(a, out, err),
        Command::Scene(a) => cmd_scene(a, out),
        Command::AuditPalette(a) => cmd_audit_palette(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

pub fn cmd_encode(args: &EncodeArgs, out: &mut dyn Write) -> Result<i32> {
    let plate = radix::parse_plate(&args.plate)?;
    let layout = PlateLayout::new(args.segment_width, args.segment_height)?;
    let digits = codec::plate_digits(&plate)?;
    let img = codec::encode_plate(&plate, &layout, args.strict)?.scale_nearest(args.scale)?;
    raster::write_image(&img, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    writeln!(out, "{}", serde_json::to_string(&digits)?)?;
    Ok(EXIT_OK)
}

pub fn cmd_decode(args: &DecodeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let img = raster::read_image(&args.input)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let opts = DetectOptions {
        threshold: args.threshold,
        scales: args.scales.clone(),
        ..DetectOptions::default()
    };
    let report = detect::recognize(&img, &opts)?;
    for w in &report.warnings {
        writeln!(err, "warning: {w}")?;
    }
    if args.json {
        writeln!(out, "{}", detect::detections_to_json(&report.detections))?;
    } else {
        for d in &report.detections {
            let b = d.bbox();
            writeln!(
                out,
                "{} x={} y={} w={} h={} scale={} confidence={:.4}",
                d.plate, b.x, b.y, b.width, b.height, d.scale, d.confidence
            )?;
        }
    }
    Ok(if report.detections.is_empty() {
        EXIT_NOTHING_FOUND
    } else {
        EXIT_OK
    })
}

pub fn cmd_scene(args: &SceneArgs, out: &mut dyn Write) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let spec: SceneSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    let (img, truth) = match &args.background {
        Some(path) => {
            let bg =
                raster::read_image(path).with_context(|| format!("reading {}", path.display()))?;
            scene::compose_on(&spec, bg)?
        }
        None => scene::compose_scene(&spec)?,
    };
    raster::write_image(&img, &args.out)
        .with_context(|| format!("writing {}", args.out.display()))?;
    std::fs::write(&args.truth, serde_json::to_string_pretty(&truth)? + "\n")
        .with_context(|| format!("writing {}", args.truth.display()))?;
    writeln!(
        out,
        "wrote {} ({}x{}, {} plates)",
        args.out.display(),
        img.width(),
        img.height(),
        truth.placements.len()
    )?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct DuplicateJson {
    pub color: Rgb,
    pub indices: [u8; 2],
}

#[derive(Debug, Serialize)]
pub struct AuditReport {
    pub duplicate_pairs: Vec<DuplicateJson>,
    pub entries: usize,
    pub min_distinct_distance: Fixed4,
    pub min_distinct_pairs: Vec<[u8; 2]>,
    pub shadowed: Vec<u8>,
}

pub fn audit_report(palette: &Palette) -> AuditReport {
    let entries = palette.entries();
    let min_sq = palette::MIN_DISTINCT_DISTANCE_SQ;
    let mut closest = Vec::new();
    for i in 0..PALETTE_LEN {
        for j in i + 1..PALETTE_LEN {
            if entries[i] != entries[j] && entries[i].distance_sq(entries[j]) == min_sq {
                closest.push([i as u8, j as u8]);
            }
        }
    }
    AuditReport {
        duplicate_pairs: palette
            .duplicate_pairs()
            .into_iter()
            .map(|p| DuplicateJson {
                color: p.color,
                indices: [p.canonical, p.shadowed],
            })
            .collect(),
        entries: PALETTE_LEN,
        min_distinct_distance: Fixed4(palette::min_distinct_distance()),
        min_distinct_pairs: closest,
        shadowed: palette.shadowed_indices().into_iter().collect(),
    }
}

pub fn cmd_audit_palette(args: &AuditArgs, out: &mut dyn Write) -> Result<i32> {
    let report = audit_report(Palette::standard());
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?;
        return Ok(EXIT_OK);
    }
    writeln!(
        out,
        "duplicate colors ({} pairs):",
        report.duplicate_pairs.len()
    )?;
    for d in &report.duplicate_pairs {
        writeln!(
            out,
            "  {} at {} and {}",
            d.color, d.indices[0], d.indices[1]
        )?;
    }
    let shadowed: Vec<String> = report.shadowed.iter().map(u8::to_string).collect();
    writeln!(out, "shadowed indices: {}", shadowed.join(", "))?;
    writeln!(
        out,
        "minimum distinct-color distance: {:.4}",
        report.min_distinct_distance.0
    )?;
    for [a, b] in &report.min_distinct_pairs {
        writeln!(
            out,
            "  {} ({}) vs {} ({})",
            a,
            entries_hex(*a),
            b,
            entries_hex(*b)
        )?;
    }
    Ok(EXIT_OK)
}

fn entries_hex(i: u8) -> Rgb {
    Palette::standard().entries()[i as usize]
}

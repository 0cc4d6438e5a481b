//! Full recognition pipeline: pattern matching, suppression, pairing, and
//! per-region decoding.

use serde::Serialize;

use crate::codec::{self, DecodeOptions, PlateLayout};
use crate::matcher::{self, CodeRegion, Match, MatchError};
use crate::raster::{Raster, Rect};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectOptions {
    pub threshold: f64,
    pub scales: Vec<usize>,
    pub layout: PlateLayout,
    pub decode: DecodeOptions,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            threshold: matcher::DEFAULT_THRESHOLD,
            scales: matcher::DEFAULT_SCALES.to_vec(),
            layout: PlateLayout::default(),
            decode: DecodeOptions::default(),
        }
    }
}

/// One decoded code.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub plate: String,
    /// Raw digits read from the six digit segments.
    pub digits: Vec<u8>,
    pub start_box: Rect,
    pub stop_box: Rect,
    pub scale: usize,
    /// Lower of the two pattern match scores.
    pub confidence: f64,
}

impl Detection {
    pub fn bbox(&self) -> Rect {
        self.start_box.union(&self.stop_box)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub detections: Vec<Detection>,
    pub warnings: Vec<String>,
}

/// Pattern matches after per-scale suppression. Scales whose template does
/// not fit in the image are skipped.
pub fn find_patterns(img: &Raster, opts: &DetectOptions) -> Result<Vec<Match>, MatchError> {
    let tpl = codec::render_pattern_segment(&opts.layout).expect("detection layout must be valid");
    let mut out = Vec::new();
    for &scale in &opts.scales {
        if scale == 0 {
            return Err(MatchError::BadScale(scale));
        }
        if tpl.width() * scale > img.width() || tpl.height() * scale > img.height() {
            continue;
        }
        let raw = matcher::match_template(img, &tpl, opts.threshold, &[scale])?;
        let radius = matcher::default_radius(tpl.width(), scale);
        out.extend(matcher::non_max_suppress(&raw, radius));
    }
    out.sort_by_key(|m| (m.y, m.x, m.scale));
    Ok(out)
}

/// Finds and decodes every code in `img`, ordered top to bottom, then left
/// to right. Regions that fail to decode become warnings.
pub fn recognize(img: &Raster, opts: &DetectOptions) -> Result<Report, MatchError> {
    let patterns = find_patterns(img, opts)?;
    let pairing = matcher::pair_patterns(&patterns, &opts.layout);
    let mut report = Report {
        detections: Vec::new(),
        warnings: pairing.warnings,
    };
    let regions = resolve_overlaps(pairing.regions, &mut report.warnings);
    for region in &regions {
        match decode_region(img, region, &opts.decode) {
            Ok(d) => report.detections.push(d),
            Err(e) => report.warnings.push(format!(
                "region at ({}, {}) scale {}: {e}",
                region.start_box.x, region.start_box.y, region.scale
            )),
        }
    }
    report
        .detections
        .sort_by_key(|d| (d.start_box.y, d.start_box.x, d.scale));
    Ok(report)
}

/// Drops regions whose footprint overlaps a better-scoring region. Codes never
/// overlap, but a window straddling two vertically stacked plates can pass the
/// threshold just outside the suppression radius of both.
fn resolve_overlaps(mut regions: Vec<CodeRegion>, warnings: &mut Vec<String>) -> Vec<CodeRegion> {
    let confidence = |r: &CodeRegion| r.start_score.min(r.stop_score);
    regions.sort_by(|a, b| {
        confidence(b)
            .total_cmp(&confidence(a))
            .then_with(|| (a.start_box.y, a.start_box.x).cmp(&(b.start_box.y, b.start_box.x)))
    });
    let mut kept: Vec<CodeRegion> = Vec::with_capacity(regions.len());
    for r in regions {
        let footprint = r.start_box.union(&r.stop_box);
        if kept
            .iter()
            .any(|k| k.start_box.union(&k.stop_box).intersects(&footprint))
        {
            warnings.push(format!(
                "region at ({}, {}) scale {} overlaps a stronger region, dropped",
                r.start_box.x, r.start_box.y, r.scale
            ));
        } else {
            kept.push(r);
        }
    }
    kept
}

fn decode_region(
    img: &Raster,
    region: &CodeRegion,
    opts: &DecodeOptions,
) -> Result<Detection, codec::CodecError> {
    let decoded = codec::decode_between(img, region.start_box, region.stop_box, opts)?;
    Ok(Detection {
        plate: decoded.plate.to_string(),
        digits: decoded.digits.to_vec(),
        start_box: region.start_box,
        stop_box: region.stop_box,
        scale: region.scale,
        confidence: region.start_score.min(region.stop_score),
    })
}

/// Float rendered with exactly four decimals in JSON output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixed4(pub f64);

impl Serialize for Fixed4 {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let raw = serde_json::value::RawValue::from_string(format!("{:.4}", self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(serializer)
    }
}

/// JSON shape of a detection. Fields are declared in key order.
#[derive(Debug, Serialize)]
pub struct DetectionJson<'a> {
    pub confidence: Fixed4,
    pub digits: &'a [u8],
    pub plate: &'a str,
    pub scale: usize,
    pub start_box: Rect,
    pub stop_box: Rect,
}

impl<'a> From<&'a Detection> for DetectionJson<'a> {
    fn from(d: &'a Detection) -> Self {
        Self {
            confidence: Fixed4(d.confidence),
            digits: &d.digits,
            plate: &d.plate,
            scale: d.scale,
            start_box: d.start_box,
            stop_box: d.stop_box,
        }
    }
}

pub fn detections_to_json(detections: &[Detection]) -> String {
    let rows: Vec<DetectionJson<'_>> = detections.iter().map(DetectionJson::from).collect();
    serde_json::to_string_pretty(&rows).expect("detections serialize")
}

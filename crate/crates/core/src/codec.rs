//! Plate number to plate raster and back.
//!
//! A plate is eight equal-width segments: a start pattern, six digit
//! segments and a stop pattern. The start and stop patterns are the same
//! red|blue|green tri-band raster. Digit segments hold the base-255 digits of
//! the plate value, least significant digit next to the start pattern, padded
//! with digit 0 (black).

use thiserror::Error;

use crate::palette::{self, Palette};
use crate::radix::{self, DigitVector, PlateNumber, RadixError};
use crate::raster::{Raster, Rect, Rgb};

pub const TOTAL_SEGMENTS: usize = 8;
pub const DIGIT_SEGMENTS: usize = 6;
pub const MIN_SEGMENT_WIDTH: usize = 6;

pub const DEFAULT_SEGMENT_WIDTH: usize = 28;
pub const DEFAULT_SEGMENT_HEIGHT: usize = 32;

/// Colors of the pattern bands, left to right.
pub const PATTERN_BANDS: [Rgb; 3] = [
    Rgb::from_hex(0xff0000),
    Rgb::from_hex(0x0000ff),
    Rgb::from_hex(0x00ff00),
];

/// Largest plate value that fits in the digit segments (`255^6 - 1`).
pub const MAX_ENCODABLE: u64 = 255u64.pow(DIGIT_SEGMENTS as u32) - 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodecError {
    #[error("segment width {width} is below the minimum of {MIN_SEGMENT_WIDTH} (height {height})")]
    LayoutTooSmall { width: usize, height: usize },
    #[error("plate value {0} needs more than {DIGIT_SEGMENTS} base-255 digits")]
    ValueTooLarge(u64),
    #[error("digit {digit} in segment {segment} shares its color with digit {canonical} and would decode as {canonical}")]
    AmbiguousDigit {
        segment: usize,
        digit: u8,
        canonical: u8,
    },
    #[error("sampling region {0:?} is empty or outside the image")]
    RegionOutOfBounds(Rect),
    #[error("inconsistent start/stop geometry: {0}")]
    GeometryMismatch(String),
    #[error("segment {segment} sampled {color}, {distance:.4} away from digit {digit} (limit {limit:.4})")]
    QuantizationSuspect {
        segment: usize,
        digit: u8,
        color: Rgb,
        distance: f64,
        limit: f64,
    },
    #[error(transparent)]
    Radix(#[from] RadixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlateLayout {
    pub segment_width: usize,
    pub segment_height: usize,
}

impl Default for PlateLayout {
    fn default() -> Self {
        Self {
            segment_width: DEFAULT_SEGMENT_WIDTH,
            segment_height: DEFAULT_SEGMENT_HEIGHT,
        }
    }
}

impl PlateLayout {
    pub fn new(segment_width: usize, segment_height: usize) -> Result<Self, CodecError> {
        let layout = Self {
            segment_width,
            segment_height,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// The default layout multiplied by `k` in both directions.
    pub fn scaled(&self, k: usize) -> Self {
        Self {
            segment_width: self.segment_width * k,
            segment_height: self.segment_height * k,
        }
    }

    pub fn validate(&self) -> Result<(), CodecError> {
        if self.segment_width < MIN_SEGMENT_WIDTH || self.segment_height == 0 {
            return Err(CodecError::LayoutTooSmall {
                width: self.segment_width,
                height: self.segment_height,
            });
        }
        Ok(())
    }

    pub fn plate_width(&self) -> usize {
        TOTAL_SEGMENTS * self.segment_width
    }

    pub fn plate_height(&self) -> usize {
        self.segment_height
    }

    /// Band widths: `w / 3` each, remainder added to the left band.
    pub fn band_widths(&self) -> [usize; 3] {
        let base = self.segment_width / 3;
        [base + self.segment_width % 3, base, base]
    }

    /// Rectangle of segment `index` (0 = start pattern) for a plate at `(x, y)`.
    pub fn segment_rect(&self, x: usize, y: usize, index: usize) -> Rect {
        Rect::new(
            x + index * self.segment_width,
            y,
            self.segment_width,
            self.segment_height,
        )
    }
}

pub fn render_pattern_segment(layout: &PlateLayout) -> Result<Raster, CodecError> {
    layout.validate()?;
    let mut img = Raster::filled(layout.segment_width, layout.segment_height, Rgb::BLACK);
    let mut x = 0;
    for (width, color) in layout.band_widths().into_iter().zip(PATTERN_BANDS) {
        img.fill_rect(Rect::new(x, 0, width, layout.segment_height), color)
            .expect("bands partition the segment");
        x += width;
    }
    Ok(img)
}

/// The six digits a plate is painted with, padded with zeros.
pub fn plate_digits(p: &PlateNumber) -> Result<[u8; DIGIT_SEGMENTS], CodecError> {
    let n = radix::plate_to_integer(p);
    if n > MAX_ENCODABLE {
        return Err(CodecError::ValueTooLarge(n));
    }
    let mut digits = [0u8; DIGIT_SEGMENTS];
    let v = radix::integer_to_base255(n);
    digits[..v.len()].copy_from_slice(v.digits());
    Ok(digits)
}

/// Paints a plate. In strict mode, digits that would not survive decoding
/// (shadowed palette entries) are rejected.
pub fn encode_plate(
    p: &PlateNumber,
    layout: &PlateLayout,
    strict: bool,
) -> Result<Raster, CodecError> {
    let digits = plate_digits(p)?;
    if strict {
        let palette = Palette::standard();
        if let Some((segment, &digit)) = digits
            .iter()
            .enumerate()
            .find(|(_, &d)| palette.is_shadowed(d))
        {
            return Err(CodecError::AmbiguousDigit {
                segment,
                digit,
                canonical: palette.canonical(digit),
            });
        }
    }
    encode_digits(&digits, layout)
}

/// Paints an explicit digit sequence between the start and stop patterns.
pub fn encode_digits(
    digits: &[u8; DIGIT_SEGMENTS],
    layout: &PlateLayout,
) -> Result<Raster, CodecError> {
    let pattern = render_pattern_segment(layout)?;
    let mut img = Raster::filled(layout.plate_width(), layout.plate_height(), Rgb::BLACK);
    img.blit(&pattern, 0, 0).expect("pattern fits");
    for (i, &d) in digits.iter().enumerate() {
        let color = palette::color_of(d as u32).expect("u8 below 255 is a palette digit");
        img.fill_rect(layout.segment_rect(0, 0, i + 1), color)
            .expect("segment inside plate");
    }
    img.blit(&pattern, (TOTAL_SEGMENTS - 1) * layout.segment_width, 0)
        .expect("pattern fits");
    Ok(img)
}

/// Rounded per-channel mean over the central half (in each direction) of
/// `region`.
pub fn sample_segment(img: &Raster, region: Rect) -> Result<Rgb, CodecError> {
    if region.area() == 0 || !img.contains(&region) {
        return Err(CodecError::RegionOutOfBounds(region));
    }
    let inner_w = region.width.div_ceil(2);
    let inner_h = region.height.div_ceil(2);
    let x0 = region.x + (region.width - inner_w) / 2;
    let y0 = region.y + (region.height - inner_h) / 2;
    let mut sum = [0u64; 3];
    for y in y0..y0 + inner_h {
        for p in &img.row(y)[x0..x0 + inner_w] {
            for (s, c) in sum.iter_mut().zip(p.channels()) {
                *s += c as u64;
            }
        }
    }
    let n = (inner_w * inner_h) as u64;
    let mean = |s: u64| ((s + n / 2) / n) as u8;
    Ok(Rgb::new(mean(sum[0]), mean(sum[1]), mean(sum[2])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecodeOptions {
    pub strict: bool,
    /// Largest accepted nearest-color distance in strict mode.
    pub max_distance: f64,
}

impl Default for DecodeOptions {
    fn default() -> Self {
        Self {
            strict: false,
            max_distance: palette::min_distinct_distance() / 2.0,
        }
    }
}

impl DecodeOptions {
    pub fn strict() -> Self {
        Self {
            strict: true,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodedPlate {
    pub plate: PlateNumber,
    /// Raw digits as read, one per digit segment, including zero padding.
    pub digits: [u8; DIGIT_SEGMENTS],
    /// Nearest-color distance for each digit segment.
    pub distances: [f64; DIGIT_SEGMENTS],
    pub segment_width: usize,
}

impl DecodedPlate {
    pub fn digit_vector(&self) -> DigitVector {
        DigitVector::new(self.digits.to_vec()).expect("palette digits are below 255")
    }
}

/// Reads the digit segments between a start and stop pattern box.
pub fn decode_between(
    img: &Raster,
    start_box: Rect,
    stop_box: Rect,
    opts: &DecodeOptions,
) -> Result<DecodedPlate, CodecError> {
    if stop_box.x <= start_box.x {
        return Err(CodecError::GeometryMismatch(format!(
            "stop box at x={} is not right of start box at x={}",
            stop_box.x, start_box.x
        )));
    }
    let overlap = start_box
        .bottom()
        .min(stop_box.bottom())
        .saturating_sub(start_box.y.max(stop_box.y));
    let tallest = start_box.height.max(stop_box.height);
    if tallest == 0 || overlap * 5 < tallest * 4 {
        return Err(CodecError::GeometryMismatch(format!(
            "boxes overlap vertically by {overlap} of {tallest} px"
        )));
    }

    let span = stop_box.x - start_box.x;
    let gaps = (TOTAL_SEGMENTS - 1) as f64;
    let w = (span as f64 / gaps).round() as usize;
    if w < MIN_SEGMENT_WIDTH {
        return Err(CodecError::GeometryMismatch(format!(
            "segment width {w} px is below {MIN_SEGMENT_WIDTH}"
        )));
    }

    let palette = Palette::standard();
    let mut digits = [0u8; DIGIT_SEGMENTS];
    let mut distances = [0f64; DIGIT_SEGMENTS];
    for i in 0..DIGIT_SEGMENTS {
        let region = Rect::new(start_box.x + (i + 1) * w, start_box.y, w, start_box.height);
        let color = sample_segment(img, region)?;
        let (digit, distance) = palette.nearest_index(color);
        if opts.strict && distance > opts.max_distance {
            return Err(CodecError::QuantizationSuspect {
                segment: i,
                digit,
                color,
                distance,
                limit: opts.max_distance,
            });
        }
        digits[i] = digit;
        distances[i] = distance;
    }

    let value = radix::base255_to_integer(&digits)?;
    let plate = radix::integer_to_plate(value)?;
    Ok(DecodedPlate {
        plate,
        digits,
        distances,
        segment_width: w,
    })
}

/// Start and stop pattern boxes of a plate painted at `(x, y)`.
pub fn pattern_boxes(layout: &PlateLayout, x: usize, y: usize) -> (Rect, Rect) {
    (
        layout.segment_rect(x, y, 0),
        layout.segment_rect(x, y, TOTAL_SEGMENTS - 1),
    )
}

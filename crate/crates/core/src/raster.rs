//! 8-bit RGB rasters with binary PPM (P6) and PNG file support.

use std::fmt;
use std::fs;
use std::io::{self, Cursor};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("corrupt image file: {0}")]
    CorruptFile(String),
    #[error("i/o failure: {0}")]
    IoFailure(#[from] io::Error),
    #[error("{what} at ({x}, {y}) does not fit in a {width}x{height} raster")]
    OutOfBounds {
        what: &'static str,
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
    #[error("scale factor must be at least 1, got {0}")]
    BadScale(usize),
    #[error("pixel buffer holds {got} pixels, expected {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    /// From `0xRRGGBB`. Bits above the low 24 are ignored.
    pub const fn from_hex(hex: u32) -> Self {
        Self::new((hex >> 16) as u8, (hex >> 8) as u8, hex as u8)
    }

    pub const fn to_hex(self) -> u32 {
        ((self.r as u32) << 16) | ((self.g as u32) << 8) | self.b as u32
    }

    pub const fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }

    pub const fn distance_sq(self, other: Rgb) -> u32 {
        let dr = self.r as i32 - other.r as i32;
        let dg = self.g as i32 - other.g as i32;
        let db = self.b as i32 - other.b as i32;
        (dr * dr + dg * dg + db * db) as u32
    }

    pub fn distance(self, other: Rgb) -> f64 {
        (self.distance_sq(other) as f64).sqrt()
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02x}{:02x}{:02x}", self.r, self.g, self.b)
    }
}

impl FromStr for Rgb {
    type Err = String;

    /// Accepts `#rrggbb`, `rrggbb` or `0xrrggbb`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let hex = s
            .strip_prefix('#')
            .or_else(|| s.strip_prefix("0x"))
            .unwrap_or(s);
        if hex.len() != 6 {
            return Err(format!("expected a #rrggbb color, got {s:?}"));
        }
        u32::from_str_radix(hex, 16)
            .map(Rgb::from_hex)
            .map_err(|_| format!("expected a #rrggbb color, got {s:?}"))
    }
}

impl Serialize for Rgb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rgb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub height: usize,
    pub width: usize,
    pub x: usize,
    pub y: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            height,
            width,
            x,
            y,
        }
    }

    pub const fn right(&self) -> usize {
        self.x + self.width
    }

    pub const fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub const fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.x < other.right()
            && other.x < self.right()
            && self.y < other.bottom()
            && other.y < self.bottom()
    }

    /// Smallest rectangle covering both.
    pub fn union(&self, other: &Rect) -> Rect {
        let x = self.x.min(other.x);
        let y = self.y.min(other.y);
        Rect::new(
            x,
            y,
            self.right().max(other.right()) - x,
            self.bottom().max(other.bottom()) - y,
        )
    }
}

/// Row-major RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct Raster {
    width: usize,
    height: usize,
    pixels: Vec<Rgb>,
}

impl fmt::Debug for Raster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Raster({}x{})", self.width, self.height)
    }
}

impl Raster {
    pub fn filled(width: usize, height: usize, color: Rgb) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; width * height],
        }
    }

    pub fn from_pixels(width: usize, height: usize, pixels: Vec<Rgb>) -> Result<Self, RasterError> {
        if pixels.len() != width * height {
            return Err(RasterError::SizeMismatch {
                expected: width * height,
                got: pixels.len(),
            });
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[Rgb] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [Rgb] {
        &mut self.pixels
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    pub fn contains(&self, r: &Rect) -> bool {
        r.right() <= self.width && r.bottom() <= self.height
    }

    pub fn get(&self, x: usize, y: usize) -> Rgb {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Rgb) {
        self.pixels[y * self.width + x] = c;
    }

    pub fn row(&self, y: usize) -> &[Rgb] {
        &self.pixels[y * self.width..(y + 1) * self.width]
    }

    pub fn fill_rect(&mut self, r: Rect, c: Rgb) -> Result<(), RasterError> {
        if !self.contains(&r) {
            return Err(self.out_of_bounds("rectangle", r.x, r.y));
        }
        for y in r.y..r.bottom() {
            let start = y * self.width;
            self.pixels[start + r.x..start + r.right()].fill(c);
        }
        Ok(())
    }

    /// Copies `src` verbatim with its top-left corner at `(x, y)`.
    pub fn blit(&mut self, src: &Raster, x: usize, y: usize) -> Result<(), RasterError> {
        if !self.contains(&Rect::new(x, y, src.width, src.height)) {
            return Err(self.out_of_bounds("source image", x, y));
        }
        for sy in 0..src.height {
            let start = (y + sy) * self.width + x;
            self.pixels[start..start + src.width].copy_from_slice(src.row(sy));
        }
        Ok(())
    }

    /// Replicates every pixel into a `k`x`k` block.
    pub fn scale_nearest(&self, k: usize) -> Result<Raster, RasterError> {
        if k == 0 {
            return Err(RasterError::BadScale(k));
        }
        let width = self.width * k;
        let mut pixels = Vec::with_capacity(width * self.height * k);
        for y in 0..self.height {
            let row_start = pixels.len();
            for &p in self.row(y) {
                pixels.extend(std::iter::repeat_n(p, k));
            }
            for _ in 1..k {
                pixels.extend_from_within(row_start..row_start + width);
            }
        }
        Ok(Raster {
            width,
            height: self.height * k,
            pixels,
        })
    }

    pub fn crop(&self, r: Rect) -> Result<Raster, RasterError> {
        if !self.contains(&r) {
            return Err(self.out_of_bounds("crop", r.x, r.y));
        }
        let mut pixels = Vec::with_capacity(r.area());
        for y in r.y..r.bottom() {
            pixels.extend_from_slice(&self.row(y)[r.x..r.right()]);
        }
        Ok(Raster {
            width: r.width,
            height: r.height,
            pixels,
        })
    }

    fn out_of_bounds(&self, what: &'static str, x: usize, y: usize) -> RasterError {
        RasterError::OutOfBounds {
            what,
            x,
            y,
            width: self.width,
            height: self.height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Ppm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self, RasterError> {
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        match ext.as_deref() {
            Some("ppm") | Some("pnm") => Ok(Self::Ppm),
            Some("png") => Ok(Self::Png),
            _ => Err(RasterError::UnsupportedFormat(format!(
                "cannot infer format from {}",
                path.display()
            ))),
        }
    }

    fn sniff(bytes: &[u8]) -> Result<Self, RasterError> {
        if bytes.starts_with(b"\x89PNG\r\n\x1a\n") {
            Ok(Self::Png)
        } else if bytes.starts_with(b"P6") {
            Ok(Self::Ppm)
        } else if bytes.starts_with(b"P") && bytes.len() > 1 && bytes[1].is_ascii_digit() {
            Err(RasterError::UnsupportedFormat(format!(
                "netpbm variant P{} (only binary P6 is supported)",
                bytes[1] as char
            )))
        } else {
            Err(RasterError::UnsupportedFormat(
                "unrecognized file signature".into(),
            ))
        }
    }
}

/// Reads a PPM or PNG file; the format is detected from the file contents.
pub fn read_image(path: impl AsRef<Path>) -> Result<Raster, RasterError> {
    let bytes = fs::read(path)?;
    decode_image(&bytes)
}

/// Writes a PPM or PNG file chosen by the path extension.
pub fn write_image(r: &Raster, path: impl AsRef<Path>) -> Result<(), RasterError> {
    let path = path.as_ref();
    let bytes = encode_image(r, ImageFormat::from_path(path)?)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn decode_image(bytes: &[u8]) -> Result<Raster, RasterError> {
    match ImageFormat::sniff(bytes)? {
        ImageFormat::Ppm => decode_ppm(bytes),
        ImageFormat::Png => decode_png(bytes),
    }
}

pub fn encode_image(r: &Raster, format: ImageFormat) -> Result<Vec<u8>, RasterError> {
    match format {
        ImageFormat::Ppm => Ok(encode_ppm(r)),
        ImageFormat::Png => encode_png(r),
    }
}

pub fn encode_ppm(r: &Raster) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", r.width, r.height).into_bytes();
    out.reserve(r.pixels.len() * 3);
    for p in &r.pixels {
        out.extend_from_slice(&p.channels());
    }
    out
}

pub fn decode_ppm(bytes: &[u8]) -> Result<Raster, RasterError> {
    let corrupt = |msg: &str| RasterError::CorruptFile(msg.to_string());
    let mut pos = 0;
    let mut fields = [0usize; 4];
    for (i, field) in fields.iter_mut().enumerate() {
        // Skip whitespace and comments between header tokens.
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(_) => break,
                None => return Err(corrupt("truncated header")),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(|b| !b.is_ascii_whitespace()) {
            pos += 1;
        }
        let token = std::str::from_utf8(&bytes[start..pos]).map_err(|_| corrupt("bad header"))?;
        if i == 0 {
            if token != "P6" {
                return Err(RasterError::UnsupportedFormat(format!(
                    "netpbm magic {token:?}"
                )));
            }
        } else {
            *field = token
                .parse()
                .map_err(|_| corrupt("non-numeric header field"))?;
        }
    }
    // Exactly one whitespace byte separates the header from the raster.
    if !bytes.get(pos).is_some_and(|b| b.is_ascii_whitespace()) {
        return Err(corrupt("missing separator after maxval"));
    }
    pos += 1;
    let [_, width, height, maxval] = fields;
    if maxval != 255 {
        return Err(RasterError::UnsupportedFormat(format!(
            "PPM maxval {maxval}"
        )));
    }
    let len = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(3))
        .ok_or_else(|| corrupt("dimensions overflow"))?;
    let data = bytes
        .get(pos..pos + len)
        .ok_or_else(|| corrupt("truncated pixel data"))?;
    let pixels = data
        .chunks_exact(3)
        .map(|c| Rgb::new(c[0], c[1], c[2]))
        .collect();
    Ok(Raster {
        width,
        height,
        pixels,
    })
}

pub fn encode_png(r: &Raster) -> Result<Vec<u8>, RasterError> {
    let corrupt = |e: png::EncodingError| RasterError::CorruptFile(e.to_string());
    let width =
        u32::try_from(r.width).map_err(|_| RasterError::UnsupportedFormat("width".into()))?;
    let height =
        u32::try_from(r.height).map_err(|_| RasterError::UnsupportedFormat("height".into()))?;
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, width, height);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().map_err(corrupt)?;
        let data: Vec<u8> = r.pixels.iter().flat_map(|p| p.channels()).collect();
        writer.write_image_data(&data).map_err(corrupt)?;
        writer.finish().map_err(corrupt)?;
    }
    Ok(out)
}

/// Decodes 8-bit PNG. Alpha is composited over white; palette and gray images
/// are expanded to RGB.
pub fn decode_png(bytes: &[u8]) -> Result<Raster, RasterError> {
    let corrupt = |e: png::DecodingError| RasterError::CorruptFile(e.to_string());
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::EXPAND);
    let mut reader = decoder.read_info().map_err(corrupt)?;
    let (color, depth) = reader.output_color_type();
    if depth != png::BitDepth::Eight {
        return Err(RasterError::UnsupportedFormat(format!(
            "{}-bit PNG",
            depth as u8
        )));
    }
    let size = reader
        .output_buffer_size()
        .ok_or_else(|| RasterError::CorruptFile("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(corrupt)?;
    let (width, height) = (info.width as usize, info.height as usize);
    let data = &buf[..info.buffer_size()];

    let over_white = |c: u8, a: u8| -> u8 {
        let (c, a) = (c as u32, a as u32);
        ((c * a + 255 * (255 - a) + 127) / 255) as u8
    };
    let pixels: Vec<Rgb> = match color {
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|c| Rgb::new(c[0], c[1], c[2]))
            .collect(),
        png::ColorType::Rgba => data
            .chunks_exact(4)
            .map(|c| {
                Rgb::new(
                    over_white(c[0], c[3]),
                    over_white(c[1], c[3]),
                    over_white(c[2], c[3]),
                )
            })
            .collect(),
        png::ColorType::Grayscale => data.iter().map(|&v| Rgb::new(v, v, v)).collect(),
        png::ColorType::GrayscaleAlpha => data
            .chunks_exact(2)
            .map(|c| {
                let v = over_white(c[0], c[1]);
                Rgb::new(v, v, v)
            })
            .collect(),
        png::ColorType::Indexed => {
            return Err(RasterError::UnsupportedFormat(
                "unexpanded indexed PNG".into(),
            ))
        }
    };
    Raster::from_pixels(width, height, pixels)
}

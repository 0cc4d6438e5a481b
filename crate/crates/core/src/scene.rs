//! Synthetic test scenes: encoded plates placed on a background, with the
//! ground truth needed to check recognition.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{self, CodecError, PlateLayout};
use crate::radix::{parse_plate, RadixError};
use crate::raster::{Raster, Rect, Rgb};

pub const MAX_PERTURB_AMPLITUDE: u8 = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("placement {index} ({rect:?}) is outside the {width}x{height} scene")]
    PlacementOutOfBounds {
        index: usize,
        rect: Rect,
        width: usize,
        height: usize,
    },
    #[error("placements {first} and {second} overlap")]
    OverlappingPlacements { first: usize, second: usize },
    #[error("placement {index} has scale 0")]
    BadScale { index: usize },
    #[error("background image is {got_width}x{got_height}, scene is {width}x{height}")]
    BackgroundSizeMismatch {
        width: usize,
        height: usize,
        got_width: usize,
        got_height: usize,
    },
    #[error("noise amplitude {0} is outside 0..={MAX_PERTURB_AMPLITUDE}")]
    BadAmplitude(u8),
    #[error("placement {index}: {source}")]
    Plate {
        index: usize,
        #[source]
        source: CodecError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    Solid(Rgb),
    UniformNoise { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Placement {
    pub plate: String,
    pub x: usize,
    pub y: usize,
    pub scale: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub background: Background,
    pub placements: Vec<Placement>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub plate: String,
    pub start_box: Rect,
    pub stop_box: Rect,
    pub scale: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroundTruth {
    pub placements: Vec<TruthEntry>,
}

impl SceneSpec {
    /// Footprint of each placement at the default plate layout.
    pub fn placement_rects(&self) -> Vec<Rect> {
        let layout = PlateLayout::default();
        self.placements
            .iter()
            .map(|p| {
                let l = layout.scaled(p.scale);
                Rect::new(p.x, p.y, l.plate_width(), l.plate_height())
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bounds = Rect::new(0, 0, self.width, self.height);
        let rects = self.placement_rects();
        for (index, (p, r)) in self.placements.iter().zip(&rects).enumerate() {
            if p.scale == 0 {
                return Err(SceneError::BadScale { index });
            }
            if r.right() > bounds.right() || r.bottom() > bounds.bottom() {
                return Err(SceneError::PlacementOutOfBounds {
                    index,
                    rect: *r,
                    width: self.width,
                    height: self.height,
                });
            }
        }
        // Footprints may not even share an edge: two x-aligned plates stacked
        // with no gap form one continuous pattern stripe.
        for (i, a) in rects.iter().enumerate() {
            if let Some(j) = rects[i + 1..]
                .iter()
                .position(|b| touches_or_overlaps(a, b))
            {
                return Err(SceneError::OverlappingPlacements {
                    first: i,
                    second: i + 1 + j,
                });
            }
        }
        Ok(())
    }
}

fn touches_or_overlaps(a: &Rect, b: &Rect) -> bool {
    a.x <= b.right() && b.x <= a.right() && a.y <= b.bottom() && b.y <= a.bottom()
}

pub fn render_background(spec: &SceneSpec) -> Raster {
    match spec.background {
        Background::Solid(c) => Raster::filled(spec.width, spec.height, c),
        Background::UniformNoise { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut img = Raster::filled(spec.width, spec.height, Rgb::BLACK);
            for p in img.pixels_mut() {
                let [r, g, b]: [u8; 3] = rng.random();
                *p = Rgb::new(r, g, b);
            }
            img
        }
    }
}

/// Renders the scene on its declared background.
pub fn compose_scene(spec: &SceneSpec) -> Result<(Raster, GroundTruth), SceneError> {
    spec.validate()?;
    compose_on(spec, render_background(spec))
}

/// Renders the scene's plates onto a caller-supplied background image of the
/// scene's size.
pub fn compose_on(spec: &SceneSpec, mut img: Raster) -> Result<(Raster, GroundTruth), SceneError> {
    spec.validate()?;
    if (img.width(), img.height()) != (spec.width, spec.height) {
        return Err(SceneError::BackgroundSizeMismatch {
            width: spec.width,
            height: spec.height,
            got_width: img.width(),
            got_height: img.height(),
        });
    }
    let layout = PlateLayout::default();
    let mut truth = GroundTruth::default();
    for (index, p) in spec.placements.iter().enumerate() {
        let plate_err = |source: CodecError| SceneError::Plate { index, source };
        let plate = parse_plate(&p.plate).map_err(|e: RadixError| plate_err(e.into()))?;
        let raster = codec::encode_plate(&plate, &layout, false)
            .map_err(plate_err)?
            .scale_nearest(p.scale)
            .expect("scale validated");
        img.blit(&raster, p.x, p.y).expect("placement validated");
        let (start_box, stop_box) = codec::pattern_boxes(&layout.scaled(p.scale), p.x, p.y);
        truth.placements.push(TruthEntry {
            plate: plate.to_string(),
            start_box,
            stop_box,
            scale: p.scale,
        });
    }
    Ok((img, truth))
}

/// Adds independent uniform integer noise in `[-amplitude, amplitude]` to
/// every channel, clamped to `0..=255`.
pub fn perturb(img: &Raster, amplitude: u8, seed: u64) -> Result<Raster, SceneError> {
    if amplitude > MAX_PERTURB_AMPLITUDE {
        return Err(SceneError::BadAmplitude(amplitude));
    }
    let mut out = img.clone();
    if amplitude == 0 {
        return Ok(out);
    }
    let a = amplitude as i16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jitter = |c: u8| (c as i16 + rng.random_range(-a..=a)).clamp(0, 255) as u8;
    for p in out.pixels_mut() {
        *p = Rgb::new(jitter(p.r), jitter(p.g), jitter(p.b));
    }
    Ok(out)
}

//! Color-coded license plates.
//!
//! A plate number is read as a little-endian base-36 integer, rewritten in
//! base 255, and painted as six colored segments between two identical
//! red|blue|green pattern segments. Recognition finds the patterns by
//! template matching, pairs them, samples the segments between, and maps
//! each sampled color back to its digit.
//!
//! ```
//! use colorplate::{codec, detect, radix};
//!
//! let plate = radix::parse_plate("KL-29 H5643").unwrap();
//! let img = codec::encode_plate(&plate, &codec::PlateLayout::default(), true).unwrap();
//! let report = detect::recognize(&img, &detect::DetectOptions::default()).unwrap();
//! assert_eq!(report.detections[0].plate, "KL29H5643");
//! ```

pub mod cli;
pub mod codec;
pub mod detect;
pub mod matcher;
pub mod palette;
pub mod radix;
pub mod raster;
pub mod scene;

pub use codec::{decode_between, encode_plate, PlateLayout};
pub use detect::{recognize, DetectOptions, Detection};
pub use palette::Palette;
pub use radix::{parse_plate, DigitVector, PlateNumber};
pub use raster::{Raster, Rect, Rgb};

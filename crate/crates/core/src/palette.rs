//! The 255-entry digit to color table, with exact and nearest-color lookup.
//!
//! Several colors appear twice in the table (for example `#ff0000` at 9 and
//! 196). Decoding always resolves to the lowest index, so the higher twin of
//! each pair is "shadowed" and cannot survive an encode/decode roundtrip.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use thiserror::Error;

use crate::raster::Rgb;

pub const PALETTE_LEN: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PaletteError {
    #[error("digit {0} has no palette color (valid digits are 0..=254)")]
    DigitOutOfRange(u32),
}

// Entry 15 is printed with an extra byte in the source table; it is read as
// 0xffffff, which makes it a twin of entry 231. Entry 74 is kept verbatim even
// though it breaks the 0x00/0x5f/0x87/0xaf/0xd7/0xff lattice.
const ENTRIES: [u32; PALETTE_LEN] = [
    0x000000, 0x800000, 0x008000, 0x808000, 0x000080, 0x800080, 0x008080, 0xc0c0c0, 0x808080,
    0xff0000, 0x00ff00, 0xffff00, 0x0000ff, 0xff00ff, 0x00ffff, 0xffffff, 0x0f0f0f, 0x00005f,
    0x000087, 0x0000af, 0x0000d7, 0x0000ff, 0x005f00, 0x005f5f, 0x005f87, 0x005faf, 0x005fd7,
    0x005fff, 0x008700, 0x00875f, 0x008787, 0x0087af, 0x0087d7, 0x0087ff, 0x00af00, 0x00af5f,
    0x00af87, 0x00afaf, 0x00afd7, 0x00afff, 0x00d700, 0x00d75f, 0x00d787, 0x00d7af, 0x00d7d7,
    0x00d7ff, 0x00ff00, 0x00ff5f, 0x00ff87, 0x00ffaf, 0x00ffd7, 0x00ffff, 0x5f0000, 0x5f005f,
    0x5f0087, 0x5f00af, 0x5f00d7, 0x5f00ff, 0x5f5f00, 0x5f5f5f, 0x5f5f87, 0x5f5faf, 0x5f5fd7,
    0x5f5fff, 0x5f8700, 0x5f875f, 0x5f8787, 0x5f87af, 0x5f87d7, 0x5f87ff, 0x5faf00, 0x5faf5f,
    0x5faf87, 0x5fafaf, 0x5fefd7, 0x5fafff, 0x5fd700, 0x5fd75f, 0x5fd787, 0x5fd7af, 0x5fd7d7,
    0x5fd7ff, 0x5fff00, 0x5fff5f, 0x5fff87, 0x5fffaf, 0x5fffd7, 0x5fffff, 0x870000, 0x87005f,
    0x870087, 0x8700af, 0x8700d7, 0x8700ff, 0x875f00, 0x875f5f, 0x875f87, 0x875faf, 0x875fd7,
    0x875fff, 0x878700, 0x87875f, 0x878787, 0x8787af, 0x8787d7, 0x8787ff, 0x87af00, 0x87af5f,
    0x87af87, 0x87afaf, 0x87afd7, 0x87afff, 0x87d700, 0x87d75f, 0x87d787, 0x87d7af, 0x87d7d7,
    0x87d7ff, 0x87ff00, 0x87ff5f, 0x87ff87, 0x87ffaf, 0x87ffd7, 0x87ffff, 0xaf0000, 0xaf005f,
    0xaf0087, 0xaf00af, 0xaf00d7, 0xaf00ff, 0xaf5f00, 0xaf5f5f, 0xaf5f87, 0xaf5faf, 0xaf5fd7,
    0xaf5fff, 0xaf8700, 0xaf875f, 0xaf8787, 0xaf87af, 0xaf87d7, 0xaf87ff, 0xafaf00, 0xafaf5f,
    0xafaf87, 0xafafaf, 0xafafd7, 0xafafff, 0xafd700, 0xafd75f, 0xafd787, 0xafd7af, 0xafd7d7,
    0xafd7ff, 0xafff00, 0xafff5f, 0xafff87, 0xafffaf, 0xafffd7, 0xafffff, 0xd70000, 0xd7005f,
    0xd70087, 0xd700af, 0xd700d7, 0xd700ff, 0xd75f00, 0xd75f5f, 0xd75f87, 0xd75faf, 0xd75fd7,
    0xd75fff, 0xd78700, 0xd7875f, 0xd78787, 0xd787af, 0xd787d7, 0xd787ff, 0xd7af00, 0xd7af5f,
    0xd7af87, 0xd7afaf, 0xd7afd7, 0xd7afff, 0xd7d700, 0xd7d75f, 0xd7d787, 0xd7d7af, 0xd7d7d7,
    0xd7d7ff, 0xd7ff00, 0xd7ff5f, 0xd7ff87, 0xd7ffaf, 0xd7ffd7, 0xd7ffff, 0xff0000, 0xff005f,
    0xff0087, 0xff00af, 0xff00d7, 0xff00ff, 0xff5f00, 0xff5f5f, 0xff5f87, 0xff5faf, 0xff5fd7,
    0xff5fff, 0xff8700, 0xff875f, 0xff8787, 0xff87af, 0xff87d7, 0xff87ff, 0xffaf00, 0xffaf5f,
    0xffaf87, 0xffafaf, 0xffafd7, 0xffafff, 0xffd700, 0xffd75f, 0xffd787, 0xffd7af, 0xffd7d7,
    0xffd7ff, 0xffff00, 0xffff5f, 0xffff87, 0xffffaf, 0xffffd7, 0xffffff, 0x080808, 0x121212,
    0x1c1c1c, 0x262626, 0x303030, 0x3a3a3a, 0x444444, 0x4e4e4e, 0x585858, 0x606060, 0x666666,
    0x767676, 0x808080, 0x8a8a8a, 0x949494, 0x9e9e9e, 0xa8a8a8, 0xb2b2b2, 0xbcbcbc, 0xc6c6c6,
    0xd0d0d0, 0xdadada, 0xe4e4e4,
];

const fn channel_dist_sq(a: u32, b: u32, shift: u32) -> u32 {
    let x = ((a >> shift) & 0xff) as i32;
    let y = ((b >> shift) & 0xff) as i32;
    ((x - y) * (x - y)) as u32
}

const fn min_distinct_distance_sq() -> u32 {
    let mut best = u32::MAX;
    let mut i = 0;
    while i < PALETTE_LEN {
        let mut j = i + 1;
        while j < PALETTE_LEN {
            let (a, b) = (ENTRIES[i], ENTRIES[j]);
            if a != b {
                let d =
                    channel_dist_sq(a, b, 16) + channel_dist_sq(a, b, 8) + channel_dist_sq(a, b, 0);
                if d < best {
                    best = d;
                }
            }
            j += 1;
        }
        i += 1;
    }
    best
}

/// Smallest squared Euclidean distance between two different palette colors,
/// found by an all-pairs scan at compile time.
pub const MIN_DISTINCT_DISTANCE_SQ: u32 = min_distinct_distance_sq();

/// Smallest Euclidean distance between two different palette colors.
pub fn min_distinct_distance() -> f64 {
    (MIN_DISTINCT_DISTANCE_SQ as f64).sqrt()
}

/// A palette index whose color also occurs at the lower index `canonical`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DuplicatePair {
    pub canonical: u8,
    pub shadowed: u8,
    pub color: Rgb,
}

#[derive(Debug, Clone)]
pub struct Palette {
    entries: [Rgb; PALETTE_LEN],
    // canonical[i] = lowest index with the same color as i
    canonical: [u8; PALETTE_LEN],
}

impl Palette {
    pub fn from_entries(entries: [Rgb; PALETTE_LEN]) -> Self {
        let mut canonical = [0u8; PALETTE_LEN];
        for i in 0..PALETTE_LEN {
            canonical[i] = (0..=i).find(|&j| entries[j] == entries[i]).unwrap_or(i) as u8;
        }
        Self { entries, canonical }
    }

    /// The built-in table.
    pub fn standard() -> &'static Palette {
        static STANDARD: OnceLock<Palette> = OnceLock::new();
        STANDARD.get_or_init(|| Palette::from_entries(ENTRIES.map(Rgb::from_hex)))
    }

    pub fn entries(&self) -> &[Rgb; PALETTE_LEN] {
        &self.entries
    }

    pub fn color_of(&self, digit: u32) -> Result<Rgb, PaletteError> {
        self.entries
            .get(digit as usize)
            .copied()
            .ok_or(PaletteError::DigitOutOfRange(digit))
    }

    /// Closest palette index by Euclidean RGB distance, lowest index on ties.
    pub fn nearest_index(&self, c: Rgb) -> (u8, f64) {
        let mut best = (0u8, u32::MAX);
        for (i, &e) in self.entries.iter().enumerate() {
            let d = e.distance_sq(c);
            if d < best.1 {
                best = (i as u8, d);
            }
        }
        (best.0, (best.1 as f64).sqrt())
    }

    /// Lowest index sharing the color of `digit`.
    pub fn canonical(&self, digit: u8) -> u8 {
        self.canonical[digit as usize]
    }

    pub fn is_shadowed(&self, digit: u8) -> bool {
        self.canonical
            .get(digit as usize)
            .is_some_and(|&c| c != digit)
    }

    pub fn shadowed_indices(&self) -> BTreeSet<u8> {
        (0..PALETTE_LEN as u8)
            .filter(|&i| self.is_shadowed(i))
            .collect()
    }

    /// Every shadowed index paired with its lowest-index twin, ordered by the
    /// shadowed index.
    pub fn duplicate_pairs(&self) -> Vec<DuplicatePair> {
        self.shadowed_indices()
            .into_iter()
            .map(|i| DuplicatePair {
                canonical: self.canonical(i),
                shadowed: i,
                color: self.entries[i as usize],
            })
            .collect()
    }
}

pub fn color_of(digit: u32) -> Result<Rgb, PaletteError> {
    Palette::standard().color_of(digit)
}

pub fn nearest_index(c: Rgb) -> (u8, f64) {
    Palette::standard().nearest_index(c)
}

pub fn shadowed_indices() -> BTreeSet<u8> {
    Palette::standard().shadowed_indices()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn color_examples() {
        assert_eq!(color_of(0), Ok(Rgb::from_hex(0x000000)));
        assert_eq!(color_of(10), Ok(Rgb::from_hex(0x00ff00)));
        assert_eq!(color_of(74), Ok(Rgb::from_hex(0x5fefd7)));
        assert_eq!(color_of(254), Ok(Rgb::from_hex(0xe4e4e4)));
        assert_eq!(color_of(255), Err(PaletteError::DigitOutOfRange(255)));
    }

    #[test]
    fn entry_15_reads_as_white() {
        assert_eq!(color_of(15), Ok(Rgb::WHITE));
        assert!(Palette::standard().is_shadowed(231));
        assert_eq!(Palette::standard().canonical(231), 15);
    }

    #[test]
    fn nearest_examples() {
        assert_eq!(nearest_index(Rgb::from_hex(0x800000)), (1, 0.0));
        assert_eq!(nearest_index(Rgb::from_hex(0x00ff00)), (10, 0.0));
        let (i, d) = nearest_index(Rgb::from_hex(0x010101));
        assert_eq!(i, 0);
        assert!((d - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn shadowed_membership() {
        let s = shadowed_indices();
        assert!(s.contains(&46));
        assert!(s.contains(&196));
        assert!(!s.contains(&0));
        assert!(!s.contains(&10));
    }

    #[test]
    fn nearest_inverts_color_of() {
        let p = Palette::standard();
        for d in 0..PALETTE_LEN as u8 {
            let (i, dist) = p.nearest_index(p.entries()[d as usize]);
            assert_eq!(dist, 0.0);
            assert_eq!(i, p.canonical(d), "digit {d}");
            if !p.is_shadowed(d) {
                assert_eq!(i, d);
            }
        }
    }

    #[test]
    fn min_distance_matches_pairwise_scan() {
        let e = Palette::standard().entries();
        let mut best = f64::INFINITY;
        for a in e.iter() {
            for b in e.iter() {
                if a != b {
                    let d = ((a.r as f64 - b.r as f64).powi(2)
                        + (a.g as f64 - b.g as f64).powi(2)
                        + (a.b as f64 - b.b as f64).powi(2))
                    .sqrt();
                    best = best.min(d);
                }
            }
        }
        assert_eq!(min_distinct_distance(), best);
        // #5f5f5f (59) against #606060 (241)
        assert_eq!(MIN_DISTINCT_DISTANCE_SQ, 3);
    }
}

//! Locating start/stop patterns: multi-scale template matching scored by
//! normalized SSD, greedy non-maximum suppression, and start/stop pairing.

use std::cmp::Ordering;

use thiserror::Error;

use crate::codec::{PlateLayout, TOTAL_SEGMENTS};
use crate::raster::{Raster, RasterError, Rect, Rgb};

pub const DEFAULT_THRESHOLD: f64 = 0.95;
pub const DEFAULT_SCALES: [usize; 4] = [1, 2, 3, 4];

/// Relative slack on the start-to-stop distance when pairing.
pub const PAIR_DISTANCE_TOLERANCE: f64 = 0.10;
/// Row grouping tolerance, multiplied by the scale.
pub const ROW_TOLERANCE_PER_SCALE: usize = 2;

const MAX_SSD_PER_CHANNEL: f64 = 255.0 * 255.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchError {
    #[error("template ({tpl_width}x{tpl_height}) at scale {scale} is larger than the {img_width}x{img_height} image")]
    TemplateLargerThanImage {
        scale: usize,
        tpl_width: usize,
        tpl_height: usize,
        img_width: usize,
        img_height: usize,
    },
    #[error("threshold {0} is outside [0, 1]")]
    BadThreshold(f64),
    #[error("scale {0} is not a positive integer")]
    BadScale(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    pub x: usize,
    pub y: usize,
    pub scale: usize,
    /// `1 - SSD / (3 * 255^2 * area)`; 1.0 only for a pixel-identical window.
    pub score: f64,
}

impl Match {
    fn chebyshev(&self, other: &Match) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }
}

/// Sort key for deterministic output: top to bottom, left to right, then scale.
fn position_order(a: &Match, b: &Match) -> Ordering {
    (a.y, a.x, a.scale).cmp(&(b.y, b.x, b.scale))
}

/// A template flattened into constant-color rectangles, so that the
/// image/template cross term can be read from integral images.
struct CompiledTemplate {
    width: usize,
    height: usize,
    rects: Vec<(Rect, Rgb)>,
    sum_sq: u64,
}

impl CompiledTemplate {
    fn new(tpl: &Raster) -> Self {
        // Horizontal runs per row, merged downwards while identical.
        let mut closed = Vec::new();
        let mut open: Vec<(Rect, Rgb)> = Vec::new();
        for y in 0..tpl.height() {
            let row = tpl.row(y);
            let mut runs = Vec::new();
            let mut x = 0;
            while x < row.len() {
                let start = x;
                while x < row.len() && row[x] == row[start] {
                    x += 1;
                }
                runs.push((start, x, row[start]));
            }
            let mut next = Vec::with_capacity(runs.len());
            for (x0, x1, c) in runs {
                if let Some(pos) = open
                    .iter()
                    .position(|(r, oc)| r.x == x0 && r.right() == x1 && *oc == c)
                {
                    let (mut r, c) = open.swap_remove(pos);
                    r.height += 1;
                    next.push((r, c));
                } else {
                    next.push((Rect::new(x0, y, x1 - x0, 1), c));
                }
            }
            closed.append(&mut open);
            open = next;
        }
        closed.append(&mut open);
        let sum_sq = tpl
            .pixels()
            .iter()
            .map(|p| p.channels().iter().map(|&c| (c as u64).pow(2)).sum::<u64>())
            .sum();
        Self {
            width: tpl.width(),
            height: tpl.height(),
            rects: closed,
            sum_sq,
        }
    }
}

/// Per-channel sums and the all-channel sum of squares.
struct IntegralImage {
    stride: usize,
    sums: Vec<[u64; 3]>,
    sum_sq: Vec<u64>,
}

impl IntegralImage {
    fn new(img: &Raster) -> Self {
        let stride = img.width() + 1;
        let mut sums = vec![[0u64; 3]; stride * (img.height() + 1)];
        let mut sum_sq = vec![0u64; stride * (img.height() + 1)];
        for y in 0..img.height() {
            let mut row_sum = [0u64; 3];
            let mut row_sq = 0u64;
            for (x, p) in img.row(y).iter().enumerate() {
                for (s, c) in row_sum.iter_mut().zip(p.channels()) {
                    *s += c as u64;
                    row_sq += (c as u64).pow(2);
                }
                let above = y * stride + x + 1;
                let here = above + stride;
                for ch in 0..3 {
                    sums[here][ch] = sums[above][ch] + row_sum[ch];
                }
                sum_sq[here] = sum_sq[above] + row_sq;
            }
        }
        Self {
            stride,
            sums,
            sum_sq,
        }
    }

    fn corners(&self, r: Rect) -> [usize; 4] {
        let s = self.stride;
        [
            r.y * s + r.x,
            r.y * s + r.right(),
            r.bottom() * s + r.x,
            r.bottom() * s + r.right(),
        ]
    }

    fn channel_sums(&self, r: Rect) -> [u64; 3] {
        let [a, b, c, d] = self.corners(r);
        std::array::from_fn(|ch| {
            self.sums[d][ch] + self.sums[a][ch] - self.sums[b][ch] - self.sums[c][ch]
        })
    }

    fn sq_sum(&self, r: Rect) -> u64 {
        let [a, b, c, d] = self.corners(r);
        self.sum_sq[d] + self.sum_sq[a] - self.sum_sq[b] - self.sum_sq[c]
    }
}

fn ssd_at(ii: &IntegralImage, tpl: &CompiledTemplate, x: usize, y: usize) -> u64 {
    let window = Rect::new(x, y, tpl.width, tpl.height);
    let cross: u64 = tpl
        .rects
        .iter()
        .map(|(r, c)| {
            let sums = ii.channel_sums(Rect::new(x + r.x, y + r.y, r.width, r.height));
            sums.iter()
                .zip(c.channels())
                .map(|(&s, c)| s * c as u64)
                .sum::<u64>()
        })
        .sum();
    ii.sq_sum(window) + tpl.sum_sq - 2 * cross
}

/// Normalized-SSD score of a window with sum of squared differences `ssd`.
pub fn ssd_score(ssd: u64, area: usize) -> f64 {
    1.0 - ssd as f64 / (3.0 * MAX_SSD_PER_CHANNEL * area as f64)
}

/// Slides `tpl`, nearest-neighbor upscaled by each of `scales`, over every
/// position of `img` and returns all windows scoring at least `threshold`.
pub fn match_template(
    img: &Raster,
    tpl: &Raster,
    threshold: f64,
    scales: &[usize],
) -> Result<Vec<Match>, MatchError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(MatchError::BadThreshold(threshold));
    }
    let mut compiled = Vec::with_capacity(scales.len());
    for &scale in scales {
        let scaled = tpl.scale_nearest(scale).map_err(|e| match e {
            RasterError::BadScale(s) => MatchError::BadScale(s),
            _ => unreachable!("scale_nearest only fails on the scale factor"),
        })?;
        if scaled.width() > img.width() || scaled.height() > img.height() || scaled.width() == 0 {
            return Err(MatchError::TemplateLargerThanImage {
                scale,
                tpl_width: scaled.width(),
                tpl_height: scaled.height(),
                img_width: img.width(),
                img_height: img.height(),
            });
        }
        compiled.push((scale, CompiledTemplate::new(&scaled)));
    }

    let ii = IntegralImage::new(img);
    let mut matches = Vec::new();
    for (scale, ct) in &compiled {
        let area = ct.width * ct.height;
        for y in 0..=img.height() - ct.height {
            for x in 0..=img.width() - ct.width {
                let score = ssd_score(ssd_at(&ii, ct, x, y), area);
                if score >= threshold {
                    matches.push(Match {
                        x,
                        y,
                        scale: *scale,
                        score,
                    });
                }
            }
        }
    }
    matches.sort_by(position_order);
    Ok(matches)
}

/// Greedy suppression: keep the best remaining match, drop everything within
/// Chebyshev distance `radius` of it, repeat. Output is in position order.
pub fn non_max_suppress(matches: &[Match], radius: usize) -> Vec<Match> {
    let mut order: Vec<&Match> = matches.iter().collect();
    order.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| position_order(a, b))
    });
    let mut kept: Vec<Match> = Vec::new();
    for m in order {
        if kept.iter().all(|k| k.chebyshev(m) > radius) {
            kept.push(*m);
        }
    }
    kept.sort_by(position_order);
    kept
}

/// Default suppression radius: half the scaled template width.
pub fn default_radius(template_width: usize, scale: usize) -> usize {
    template_width * scale / 2
}

/// A start/stop pair delimiting one code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeRegion {
    pub start_box: Rect,
    pub stop_box: Rect,
    pub scale: usize,
    pub segment_width: usize,
    pub start_score: f64,
    pub stop_score: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pairing {
    pub regions: Vec<CodeRegion>,
    pub warnings: Vec<String>,
}

/// Pairs suppressed pattern matches into code regions. Within each scale,
/// matches are grouped into rows and each match is paired with the nearest
/// match to its right at the expected start-to-stop distance.
pub fn pair_patterns(matches: &[Match], layout: &PlateLayout) -> Pairing {
    let mut out = Pairing::default();
    let mut scales: Vec<usize> = matches.iter().map(|m| m.scale).collect();
    scales.sort_unstable();
    scales.dedup();

    for scale in scales {
        let mut ms: Vec<Match> = matches
            .iter()
            .filter(|m| m.scale == scale)
            .copied()
            .collect();
        ms.sort_by(position_order);

        let row_tol = ROW_TOLERANCE_PER_SCALE * scale;
        let mut rows: Vec<Vec<Match>> = Vec::new();
        for m in ms {
            match rows.last_mut() {
                Some(row) if m.y - row[0].y <= row_tol => row.push(m),
                _ => rows.push(vec![m]),
            }
        }

        let seg_w = layout.segment_width * scale;
        let seg_h = layout.segment_height * scale;
        let expected = ((TOTAL_SEGMENTS - 1) * seg_w) as f64;
        let (lo, hi) = (
            expected * (1.0 - PAIR_DISTANCE_TOLERANCE),
            expected * (1.0 + PAIR_DISTANCE_TOLERANCE),
        );
        for mut row in rows {
            row.sort_by_key(|a| (a.x, a.y));
            let mut used = vec![false; row.len()];
            for k in 0..row.len() {
                if used[k] {
                    continue;
                }
                let start = row[k];
                let partner = (k + 1..row.len()).find(|&j| {
                    let dx = (row[j].x - start.x) as f64;
                    !used[j] && dx >= lo && dx <= hi
                });
                match partner {
                    Some(j) => {
                        used[k] = true;
                        used[j] = true;
                        let stop = row[j];
                        out.regions.push(CodeRegion {
                            start_box: Rect::new(start.x, start.y, seg_w, seg_h),
                            stop_box: Rect::new(stop.x, stop.y, seg_w, seg_h),
                            scale,
                            segment_width: seg_w,
                            start_score: start.score,
                            stop_score: stop.score,
                        });
                    }
                    None => {
                        used[k] = true;
                        out.warnings.push(format!(
                            "unpaired pattern at ({}, {}) scale {} score {:.4}",
                            start.x, start.y, scale, start.score
                        ));
                    }
                }
            }
        }
    }
    out.regions
        .sort_by_key(|r| (r.start_box.y, r.start_box.x, r.scale));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::render_pattern_segment;

    fn pattern() -> Raster {
        render_pattern_segment(&PlateLayout::default()).unwrap()
    }

    fn m(x: usize, y: usize, score: f64) -> Match {
        Match {
            x,
            y,
            scale: 1,
            score,
        }
    }

    #[test]
    fn identity_match() {
        let p = pattern();
        let found = match_template(&p, &p, 1.0, &[1]).unwrap();
        assert_eq!(found, vec![m(0, 0, 1.0)]);
    }

    #[test]
    fn pasted_pattern_on_white() {
        let mut img = Raster::filled(400, 120, Rgb::WHITE);
        img.blit(&pattern(), 37, 12).unwrap();
        let found = match_template(&img, &pattern(), 0.99, &[1]).unwrap();
        assert!(found.contains(&m(37, 12, 1.0)));
        assert!(found
            .iter()
            .all(|f| f.x.abs_diff(37) <= 1 && f.y.abs_diff(12) <= 1));
    }

    #[test]
    fn black_image_has_no_match() {
        let img = Raster::filled(100, 50, Rgb::BLACK);
        assert!(match_template(&img, &pattern(), 0.99, &[1])
            .unwrap()
            .is_empty());
        // Each template pixel has exactly one saturated channel.
        let all = match_template(&img, &pattern(), 0.0, &[1]).unwrap();
        assert!(all.iter().all(|f| (f.score - 2.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn bad_arguments() {
        let img = Raster::filled(50, 50, Rgb::BLACK);
        assert!(matches!(
            match_template(&img, &pattern(), 1.5, &[1]),
            Err(MatchError::BadThreshold(_))
        ));
        assert!(matches!(
            match_template(&img, &pattern(), f64::NAN, &[1]),
            Err(MatchError::BadThreshold(_))
        ));
        assert!(matches!(
            match_template(&img, &pattern(), 0.9, &[1, 2]),
            Err(MatchError::TemplateLargerThanImage { scale: 2, .. })
        ));
        assert!(matches!(
            match_template(&img, &pattern(), 0.9, &[0]),
            Err(MatchError::BadScale(0))
        ));
    }

    #[test]
    fn template_compiles_to_three_rects() {
        let ct = CompiledTemplate::new(&pattern());
        assert_eq!(ct.rects.len(), 3);
        let ct4 = CompiledTemplate::new(&pattern().scale_nearest(4).unwrap());
        assert_eq!(ct4.rects.len(), 3);
    }

    #[test]
    fn suppression_examples() {
        assert!(non_max_suppress(&[], 5).is_empty());
        let close = [m(10, 10, 0.98), m(11, 10, 0.99)];
        assert_eq!(non_max_suppress(&close, 5), vec![m(11, 10, 0.99)]);
        let far = [m(10, 10, 0.98), m(110, 10, 0.99)];
        assert_eq!(non_max_suppress(&far, 5), far.to_vec());
        // Equal scores: the upper-left match wins.
        let tie = [m(12, 10, 0.99), m(10, 10, 0.99)];
        assert_eq!(non_max_suppress(&tie, 5), vec![m(10, 10, 0.99)]);
    }

    #[test]
    fn pairing() {
        let layout = PlateLayout::default();
        let one = [m(5, 5, 1.0), m(5 + 196, 5, 1.0)];
        let p = pair_patterns(&one, &layout);
        assert_eq!(p.regions.len(), 1);
        assert_eq!(p.regions[0].start_box, Rect::new(5, 5, 28, 32));
        assert_eq!(p.regions[0].stop_box, Rect::new(201, 5, 28, 32));
        assert!(p.warnings.is_empty());

        let two = [
            m(0, 10, 1.0),
            m(196, 10, 1.0),
            m(250, 11, 1.0),
            m(446, 10, 1.0),
        ];
        let p = pair_patterns(&two, &layout);
        assert_eq!(p.regions.len(), 2);
        assert_eq!(p.regions[0].start_box.x, 0);
        assert_eq!(p.regions[1].start_box.x, 250);

        let lone = pair_patterns(&[m(40, 40, 1.0)], &layout);
        assert!(lone.regions.is_empty());
        assert_eq!(lone.warnings.len(), 1);
    }

    #[test]
    fn pairing_respects_rows_and_distance() {
        let layout = PlateLayout::default();
        // Right distance but a different row.
        let p = pair_patterns(&[m(0, 0, 1.0), m(196, 3, 1.0)], &layout);
        assert!(p.regions.is_empty());
        assert_eq!(p.warnings.len(), 2);
        // Same row, distance off by more than 10%.
        let p = pair_patterns(&[m(0, 0, 1.0), m(150, 0, 1.0)], &layout);
        assert!(p.regions.is_empty());
        // Scale 2 doubles the expected distance.
        let p = pair_patterns(
            &[
                Match {
                    x: 0,
                    y: 0,
                    scale: 2,
                    score: 1.0,
                },
                Match {
                    x: 392,
                    y: 4,
                    scale: 2,
                    score: 1.0,
                },
            ],
            &layout,
        );
        assert_eq!(p.regions.len(), 1);
        assert_eq!(p.regions[0].segment_width, 56);
    }
}

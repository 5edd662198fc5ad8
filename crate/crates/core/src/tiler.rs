//! Fixed-size patch layout over a slide, label assignment to patches and
//! merging of per-patch detections back into slide coordinates.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::det_eval::box_iou;
use crate::error::{Error, Result};
use crate::mask_ops::BBox;

pub const DEFAULT_TILE_SIZE: u32 = 4000;
/// Duplicate detections from overlapping tiles are merged at this IOU.
pub const MERGE_IOU: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TileSpec {
    pub tile_size: u32,
    pub overlap: u32,
    pub slide_width: u32,
    pub slide_height: u32,
}

impl TileSpec {
    pub fn new(tile_size: u32, overlap: u32, slide_width: u32, slide_height: u32) -> Result<Self> {
        if tile_size == 0 || overlap >= tile_size {
            return Err(Error::Parameter(format!(
                "need tile_size > overlap >= 0, got tile_size {tile_size}, overlap {overlap}"
            )));
        }
        if slide_width == 0 || slide_height == 0 {
            return Err(Error::Parameter("slide dimensions must be > 0".into()));
        }
        Ok(Self {
            tile_size,
            overlap,
            slide_width,
            slide_height,
        })
    }

    pub fn stride(&self) -> u32 {
        self.tile_size - self.overlap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TileId {
    pub row: usize,
    pub col: usize,
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}_c{}", self.row, self.col)
    }
}

impl std::str::FromStr for TileId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Validation(format!("bad tile id `{s}`"));
        let (r, c) = s
            .strip_prefix('r')
            .and_then(|s| s.split_once("_c"))
            .ok_or_else(bad)?;
        Ok(TileId {
            row: r.parse().map_err(|_| bad())?,
            col: c.parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Tile {
    pub id: TileId,
    pub x0: i64,
    pub y0: i64,
    pub size: i64,
}

impl Tile {
    pub fn bounds(&self) -> BBox {
        BBox {
            x_min: self.x0,
            y_min: self.y0,
            x_max: self.x0 + self.size,
            y_max: self.y0 + self.size,
        }
    }
}

/// Tile origins along one axis. The last tile is pulled inward so it ends at
/// the slide edge; a slide shorter than one tile gets a single tile at 0.
fn axis_origins(len: u32, tile: u32, stride: u32) -> Vec<i64> {
    if len <= tile {
        return vec![0];
    }
    let mut origins = Vec::new();
    let mut p = 0u32;
    while p + tile < len {
        origins.push(p as i64);
        p += stride;
    }
    origins.push((len - tile) as i64);
    origins
}

/// All tiles in row-major order.
pub fn tile_layout(spec: &TileSpec) -> Vec<Tile> {
    let xs = axis_origins(spec.slide_width, spec.tile_size, spec.stride());
    let ys = axis_origins(spec.slide_height, spec.tile_size, spec.stride());
    let mut tiles = Vec::with_capacity(xs.len() * ys.len());
    for (row, &y0) in ys.iter().enumerate() {
        for (col, &x0) in xs.iter().enumerate() {
            tiles.push(Tile {
                id: TileId { row, col },
                x0,
                y0,
                size: spec.tile_size as i64,
            });
        }
    }
    tiles
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TileLabel {
    /// Tile-local coordinates.
    pub bbox: BBox,
    /// Index of the slide-space box this label came from.
    pub source: usize,
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TiledLabels {
    pub tiles: Vec<Tile>,
    /// Every tile appears, possibly with no labels.
    pub labels: BTreeMap<TileId, Vec<TileLabel>>,
}

/// Assigns each box to every tile it intersects. A clipped box is kept only
/// when at least a quarter of its area lies inside the tile.
pub fn tile_labels(boxes: &[BBox], spec: &TileSpec) -> Result<TiledLabels> {
    let slide = BBox {
        x_min: 0,
        y_min: 0,
        x_max: spec.slide_width as i64,
        y_max: spec.slide_height as i64,
    };
    if let Some(b) = boxes.iter().find(|b| !slide.contains(b)) {
        return Err(Error::Validation(format!(
            "box {b:?} lies outside the slide"
        )));
    }
    let tiles = tile_layout(spec);
    let mut labels: BTreeMap<TileId, Vec<TileLabel>> =
        tiles.iter().map(|t| (t.id, Vec::new())).collect();
    for tile in &tiles {
        let bounds = tile.bounds();
        let entry = labels.get_mut(&tile.id).expect("tile registered");
        for (source, b) in boxes.iter().enumerate() {
            let Some(clip) = b.intersection(&bounds) else {
                continue;
            };
            let clipped = clip != *b;
            if clipped && 4 * clip.area() < b.area() {
                continue;
            }
            entry.push(TileLabel {
                bbox: clip.translate(-tile.x0, -tile.y0),
                source,
                clipped,
            });
        }
    }
    Ok(TiledLabels { tiles, labels })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoredBox {
    pub bbox: BBox,
    pub confidence: f64,
}

/// Shifts tile-local detections to slide coordinates and suppresses
/// duplicates: among boxes overlapping at IOU >= 0.5 the most confident wins.
pub fn merge_tile_detections(
    per_tile: &BTreeMap<TileId, Vec<ScoredBox>>,
    spec: &TileSpec,
) -> Result<Vec<ScoredBox>> {
    let origins: BTreeMap<TileId, (i64, i64)> = tile_layout(spec)
        .into_iter()
        .map(|t| (t.id, (t.x0, t.y0)))
        .collect();
    let mut all = Vec::new();
    for (id, dets) in per_tile {
        let &(x0, y0) = origins
            .get(id)
            .ok_or_else(|| Error::Validation(format!("unknown tile {id}")))?;
        all.extend(dets.iter().map(|d| ScoredBox {
            bbox: d.bbox.translate(x0, y0),
            confidence: d.confidence,
        }));
    }
    all.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.bbox.cmp(&b.bbox))
    });

    let mut kept: Vec<ScoredBox> = Vec::new();
    for d in all {
        if kept.iter().all(|k| box_iou(&k.bbox, &d.bbox) < MERGE_IOU) {
            kept.push(d);
        }
    }
    Ok(kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: i64, y0: i64, x1: i64, y1: i64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(TileSpec::new(100, 100, 1000, 1000).is_err());
        assert!(TileSpec::new(0, 0, 1000, 1000).is_err());
        assert!(TileSpec::new(100, 99, 1000, 1000).is_ok());
    }

    #[test]
    fn last_tile_is_shifted_inward() {
        assert_eq!(axis_origins(10000, 4000, 4000), vec![0, 4000, 6000]);
        assert_eq!(axis_origins(8000, 4000, 4000), vec![0, 4000]);
        assert_eq!(axis_origins(3000, 4000, 4000), vec![0]);
        assert_eq!(axis_origins(10000, 4000, 3000), vec![0, 3000, 6000]);
    }

    #[test]
    fn tile_id_round_trips_through_text() {
        let id = TileId { row: 3, col: 12 };
        assert_eq!(id.to_string(), "r3_c12");
        assert_eq!("r3_c12".parse::<TileId>().unwrap(), id);
        assert!("x3_c1".parse::<TileId>().is_err());
    }

    #[test]
    fn box_inside_one_tile_is_shifted() {
        let spec = TileSpec::new(4000, 0, 8000, 8000).unwrap();
        let tiled = tile_labels(&[bx(4100, 200, 4300, 500)], &spec).unwrap();
        let hits: Vec<_> = tiled.labels.iter().filter(|(_, v)| !v.is_empty()).collect();
        assert_eq!(hits.len(), 1);
        assert_eq!(*hits[0].0, TileId { row: 0, col: 1 });
        assert_eq!(hits[0].1[0].bbox, bx(100, 200, 300, 500));
        assert!(!hits[0].1[0].clipped);
    }

    #[test]
    fn straddling_box_kept_in_both_tiles_at_thirty_percent() {
        let spec = TileSpec::new(4000, 0, 8000, 4000).unwrap();
        // 30 px of 100 in the left tile, 70 in the right
        let tiled = tile_labels(&[bx(3970, 0, 4070, 100)], &spec).unwrap();
        let left = &tiled.labels[&TileId { row: 0, col: 0 }];
        let right = &tiled.labels[&TileId { row: 0, col: 1 }];
        assert_eq!(left[0].bbox, bx(3970, 0, 4000, 100));
        assert_eq!(right[0].bbox, bx(0, 0, 70, 100));
        assert!(left[0].clipped && right[0].clipped);
        // 20% is dropped
        let tiled = tile_labels(&[bx(3980, 0, 4080, 100)], &spec).unwrap();
        assert!(tiled.labels[&TileId { row: 0, col: 0 }].is_empty());
    }

    #[test]
    fn out_of_slide_box_is_rejected() {
        let spec = TileSpec::new(100, 0, 200, 200).unwrap();
        assert!(tile_labels(&[bx(150, 150, 250, 160)], &spec).is_err());
    }

    #[test]
    fn merge_examples() {
        let spec = TileSpec::new(4000, 500, 10000, 4000).unwrap();
        let t0 = TileId { row: 0, col: 0 };
        let t1 = TileId { row: 0, col: 1 };
        let single = BTreeMap::from([(
            t1,
            vec![ScoredBox {
                bbox: bx(10, 10, 20, 20),
                confidence: 0.5,
            }],
        )]);
        let merged = merge_tile_detections(&single, &spec).unwrap();
        assert_eq!(merged[0].bbox, bx(3510, 10, 3520, 20));

        // same object seen by both tiles, IOU 0.9 in slide coordinates
        let a = ScoredBox {
            bbox: bx(3600, 0, 3690, 100),
            confidence: 0.8,
        };
        let b = ScoredBox {
            bbox: bx(100, 0, 200, 100),
            confidence: 0.7,
        };
        assert_eq!(box_iou(&a.bbox, &b.bbox.translate(3500, 0)), 0.9);
        let dup = BTreeMap::from([(t0, vec![a]), (t1, vec![b])]);
        let merged = merge_tile_detections(&dup, &spec).unwrap();
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].confidence, 0.8);

        let c = ScoredBox {
            bbox: bx(0, 0, 10, 10),
            confidence: 0.3,
        };
        let disjoint = BTreeMap::from([(t0, vec![a, c])]);
        assert_eq!(merge_tile_detections(&disjoint, &spec).unwrap().len(), 2);

        let unknown = BTreeMap::from([(TileId { row: 9, col: 9 }, vec![c])]);
        assert!(merge_tile_detections(&unknown, &spec).is_err());
    }
}

//! Mask geometry: components, tight boxes, and mask overlap statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{label_components, BinaryMask};

/// Axis-aligned box in slide pixels, half-open: `[x_min, x_max) × [y_min, y_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BBox {
    pub x_min: i64,
    pub y_min: i64,
    pub x_max: i64,
    pub y_max: i64,
}

impl BBox {
    pub fn new(x_min: i64, y_min: i64, x_max: i64, y_max: i64) -> Result<Self> {
        if x_max <= x_min || y_max <= y_min {
            return Err(Error::Validation(format!(
                "degenerate box [{x_min}, {x_max}) x [{y_min}, {y_max})"
            )));
        }
        Ok(Self {
            x_min,
            y_min,
            x_max,
            y_max,
        })
    }

    pub fn width(&self) -> i64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> i64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn intersection(&self, other: &BBox) -> Option<BBox> {
        let b = BBox {
            x_min: self.x_min.max(other.x_min),
            y_min: self.y_min.max(other.y_min),
            x_max: self.x_max.min(other.x_max),
            y_max: self.y_max.min(other.y_max),
        };
        (b.x_max > b.x_min && b.y_max > b.y_min).then_some(b)
    }

    pub fn contains(&self, other: &BBox) -> bool {
        self.x_min <= other.x_min
            && self.y_min <= other.y_min
            && self.x_max >= other.x_max
            && self.y_max >= other.y_max
    }

    pub fn translate(&self, dx: i64, dy: i64) -> BBox {
        BBox {
            x_min: self.x_min + dx,
            y_min: self.y_min + dy,
            x_max: self.x_max + dx,
            y_max: self.y_max + dy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MiouSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std_dev: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskPairScore {
    pub hand_id: String,
    pub gaze_id: String,
    pub iou: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxExtraction {
    pub boxes: Vec<BBox>,
    /// Components whose box fell below the minimum area.
    pub discarded: usize,
}

pub fn connected_components(mask: &BinaryMask) -> Vec<Vec<usize>> {
    let bits = mask.bits();
    label_components(mask.spec(), |i| bits[i])
}

/// One tight box per component, in slide pixels and clipped to the slide.
/// `min_area_px` defaults to the area of one grid cell.
pub fn mask_to_bboxes(mask: &BinaryMask, min_area_px: Option<i64>) -> BoxExtraction {
    let spec = mask.spec();
    let ds = spec.downsample as i64;
    let min_area = min_area_px.unwrap_or(ds * ds);
    let mut boxes = Vec::new();
    let mut discarded = 0;
    for cells in connected_components(mask) {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for &i in &cells {
            let (cx, cy) = spec.coords(i);
            x0 = x0.min(cx);
            y0 = y0.min(cy);
            x1 = x1.max(cx + 1);
            y1 = y1.max(cy + 1);
        }
        let b = BBox {
            x_min: x0 as i64 * ds,
            y_min: y0 as i64 * ds,
            x_max: (x1 as i64 * ds).min(spec.slide_width as i64),
            y_max: (y1 as i64 * ds).min(spec.slide_height as i64),
        };
        if b.area() < min_area {
            discarded += 1;
        } else {
            boxes.push(b);
        }
    }
    BoxExtraction { boxes, discarded }
}

/// Intersection over union of the set cells. Two empty masks agree perfectly.
pub fn mask_iou(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.spec().ensure_same(b.spec())?;
    let (mut inter, mut union) = (0u64, 0u64);
    for (&x, &y) in a.bits().iter().zip(b.bits()) {
        inter += (x && y) as u64;
        union += (x || y) as u64;
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

pub fn summarize(ious: &[f64]) -> Result<MiouSummary> {
    if ious.is_empty() {
        return Err(Error::Validation("no IOU values to summarise".into()));
    }
    let count = ious.len();
    let mean = ious.iter().sum::<f64>() / count as f64;
    let var = ious.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
    Ok(MiouSummary {
        mean,
        std_dev: var.sqrt(),
        count,
    })
}

pub fn masks_miou<'a>(
    pairs: impl IntoIterator<Item = (&'a BinaryMask, &'a BinaryMask)>,
) -> Result<MiouSummary> {
    let ious = pairs
        .into_iter()
        .map(|(hand, gaze)| mask_iou(hand, gaze))
        .collect::<Result<Vec<_>>>()?;
    if ious.is_empty() {
        return Err(Error::Validation(
            "mIOU needs at least one mask pair".into(),
        ));
    }
    summarize(&ious)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::GridSpec;

    fn spec(w: usize, h: usize, ds: u32) -> GridSpec {
        GridSpec::from_cells(w, h, ds).unwrap()
    }

    fn square(s: GridSpec, x0: usize, y0: usize, side: usize) -> BinaryMask {
        BinaryMask::from_fn(s, |x, y| {
            (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y)
        })
    }

    #[test]
    fn component_examples() {
        let s = spec(8, 8, 1);
        assert!(connected_components(&BinaryMask::empty(s)).is_empty());
        let block = connected_components(&square(s, 2, 2, 3));
        assert_eq!(block.len(), 1);
        assert_eq!(block[0].len(), 9);
        let diag = BinaryMask::from_fn(s, |x, y| (x, y) == (1, 1) || (x, y) == (2, 2));
        assert_eq!(connected_components(&diag).len(), 1);
    }

    #[test]
    fn single_cell_box_scales_with_downsample() {
        let s = spec(4, 4, 16);
        let m = BinaryMask::from_fn(s, |x, y| (x, y) == (1, 2));
        let ex = mask_to_bboxes(&m, None);
        assert_eq!(ex.boxes, vec![BBox::new(16, 32, 32, 48).unwrap()]);
        assert!(mask_to_bboxes(&BinaryMask::empty(s), None).boxes.is_empty());
    }

    #[test]
    fn l_shape_box() {
        let s = spec(5, 5, 1);
        let m = BinaryMask::from_fn(s, |x, y| (y == 0 && x < 3) || (x, y) == (0, 1));
        assert_eq!(
            mask_to_bboxes(&m, None).boxes,
            vec![BBox::new(0, 0, 3, 2).unwrap()]
        );
    }

    #[test]
    fn small_boxes_are_discarded() {
        let s = spec(10, 10, 1);
        let m = BinaryMask::from_fn(s, |x, y| (x, y) == (0, 0) || (x >= 5 && y >= 5));
        let ex = mask_to_bboxes(&m, Some(2));
        assert_eq!(ex.boxes.len(), 1);
        assert_eq!(ex.discarded, 1);
    }

    #[test]
    fn iou_examples() {
        let s = spec(30, 12, 1);
        let a = square(s, 0, 0, 10);
        let b = square(s, 5, 0, 10);
        let c = square(s, 20, 0, 10);
        assert_eq!(mask_iou(&a, &a).unwrap(), 1.0);
        assert_eq!(mask_iou(&a, &c).unwrap(), 0.0);
        assert_eq!(mask_iou(&a, &b).unwrap(), 1.0 / 3.0);
        let empty = BinaryMask::empty(s);
        assert_eq!(mask_iou(&empty, &empty).unwrap(), 1.0);
        assert_eq!(mask_iou(&a, &empty).unwrap(), 0.0);
        assert!(mask_iou(&a, &BinaryMask::empty(spec(10, 10, 1))).is_err());
    }

    #[test]
    fn miou_statistics() {
        let s = summarize(&[0.2, 0.4, 0.6]).unwrap();
        assert!((s.mean - 0.4).abs() < 1e-15);
        assert!((s.std_dev - 0.163_299_316_185_545_2).abs() < 1e-12);
        assert_eq!(s.count, 3);
        let m = square(spec(4, 4, 1), 0, 0, 2);
        let same = masks_miou([(&m, &m), (&m, &m)]).unwrap();
        assert_eq!((same.mean, same.std_dev), (1.0, 0.0));
        assert!(masks_miou(std::iter::empty()).is_err());
    }
}

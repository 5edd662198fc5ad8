//! Single-class detection scoring against ground-truth boxes.
//!
//! Detections are ranked by confidence and greedily matched: each one takes
//! the unmatched ground truth in its image with the highest IOU, provided
//! that IOU is at least the overlap threshold (OT). Average precision uses
//! all-point interpolation of the precision envelope; the log-average miss
//! rate samples the miss-rate/FPPI curve at nine log-spaced FPPI values in
//! `[1e-2, 1]`. With one class, mAP equals AP.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mask_ops::BBox;

/// Miss rates are floored here before taking logs.
pub const MISS_RATE_FLOOR: f64 = 1e-10;
pub const LAMR_REFERENCE_POINTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Detection {
    pub image_id: usize,
    pub bbox: BBox,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RankedDetection {
    pub image_id: usize,
    pub confidence: f64,
    pub true_positive: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// In rank order (descending confidence).
    pub ranked: Vec<RankedDetection>,
    pub gt_count: usize,
    pub fp_per_image: Vec<usize>,
}

impl MatchResult {
    pub fn tp(&self) -> usize {
        self.ranked.iter().filter(|d| d.true_positive).count()
    }

    pub fn fp(&self) -> usize {
        self.ranked.len() - self.tp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub precision: f64,
    pub recall: f64,
}

/// Operating point at a confidence cutoff (detections with confidence >= cutoff).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub confidence: f64,
    pub precision: f64,
    pub recall: f64,
    pub fppi: f64,
    pub miss_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub ot: f64,
    /// Also the mAP for this single-class task.
    pub ap: f64,
    pub lamr: f64,
    pub tp: usize,
    pub fp: usize,
    pub gt: usize,
    pub pr_curve: Vec<PrPoint>,
    pub operating_points: Vec<CurvePoint>,
}

pub fn box_iou(a: &BBox, b: &BBox) -> f64 {
    let inter = a.intersection(b).map_or(0, |i| i.area());
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

fn check_ot(ot: f64) -> Result<()> {
    if ot > 0.0 && ot <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "overlap threshold must be in (0, 1], got {ot}"
        )))
    }
}

/// The default OT grid 0.10, 0.15, ..., 0.95.
pub fn default_ot_grid() -> Vec<f64> {
    (0..18).map(|i| (10 + 5 * i) as f64 / 100.0).collect()
}

/// Rank order: descending confidence, then ascending image id, then input order.
pub fn rank_order(dets: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .confidence
            .total_cmp(&dets[a].confidence)
            .then(dets[a].image_id.cmp(&dets[b].image_id))
    });
    order
}

pub fn match_detections(dets: &[Detection], gts: &[Vec<BBox>], ot: f64) -> Result<MatchResult> {
    check_ot(ot)?;
    for d in dets {
        if !(0.0..=1.0).contains(&d.confidence) {
            return Err(Error::Validation(format!(
                "confidence must be in [0, 1], got {}",
                d.confidence
            )));
        }
        if d.image_id >= gts.len() {
            return Err(Error::Validation(format!(
                "detection refers to image {} but only {} images have ground truth lists",
                d.image_id,
                gts.len()
            )));
        }
    }

    let mut consumed: Vec<Vec<bool>> = gts.iter().map(|g| vec![false; g.len()]).collect();
    let mut fp_per_image = vec![0; gts.len()];
    let mut ranked = Vec::with_capacity(dets.len());

    for i in rank_order(dets) {
        let det = &dets[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, gt) in gts[det.image_id].iter().enumerate() {
            if consumed[det.image_id][j] {
                continue;
            }
            let iou = box_iou(&det.bbox, gt);
            // first ground truth wins ties
            if best.is_none_or(|(_, b)| iou.total_cmp(&b) == Ordering::Greater) {
                best = Some((j, iou));
            }
        }
        let true_positive = match best {
            Some((j, iou)) if iou >= ot => {
                consumed[det.image_id][j] = true;
                true
            }
            _ => {
                fp_per_image[det.image_id] += 1;
                false
            }
        };
        ranked.push(RankedDetection {
            image_id: det.image_id,
            confidence: det.confidence,
            true_positive,
        });
    }

    Ok(MatchResult {
        ranked,
        gt_count: gts.iter().map(Vec::len).sum(),
        fp_per_image,
    })
}

pub fn pr_curve_and_ap(m: &MatchResult) -> Result<(Vec<PrPoint>, f64)> {
    if m.gt_count == 0 {
        return Err(Error::NoGroundTruth);
    }
    let gt = m.gt_count as f64;
    let mut tp = 0usize;
    let curve: Vec<PrPoint> = m
        .ranked
        .iter()
        .enumerate()
        .map(|(k, d)| {
            tp += d.true_positive as usize;
            PrPoint {
                confidence: d.confidence,
                precision: tp as f64 / (k + 1) as f64,
                recall: tp as f64 / gt,
            }
        })
        .collect();

    // sweep from the tail keeping the running max precision (the envelope)
    let mut ap = 0.0;
    let mut envelope = 0.0f64;
    for (k, p) in curve.iter().enumerate().rev() {
        let left_recall = if k == 0 { 0.0 } else { curve[k - 1].recall };
        envelope = envelope.max(p.precision);
        if p.recall > left_recall {
            ap += (p.recall - left_recall) * envelope;
        }
    }
    Ok((curve, ap))
}

/// Operating points at every distinct confidence, most confident first.
pub fn operating_points(m: &MatchResult, image_count: usize) -> Result<Vec<CurvePoint>> {
    if image_count == 0 {
        return Err(Error::Validation("image count must be > 0".into()));
    }
    if m.gt_count == 0 {
        return Err(Error::NoGroundTruth);
    }
    let gt = m.gt_count as f64;
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (k, d) in m.ranked.iter().enumerate() {
        if d.true_positive {
            tp += 1;
        } else {
            fp += 1;
        }
        let last_at_cutoff = m
            .ranked
            .get(k + 1)
            .is_none_or(|next| next.confidence != d.confidence);
        if last_at_cutoff {
            let recall = tp as f64 / gt;
            points.push(CurvePoint {
                confidence: d.confidence,
                precision: tp as f64 / (tp + fp) as f64,
                recall,
                fppi: fp as f64 / image_count as f64,
                miss_rate: 1.0 - recall,
            });
        }
    }
    Ok(points)
}

/// The nine FPPI reference values `10^(-2 + i/4)`, `i = 0..8`.
pub fn lamr_reference_fppi() -> [f64; LAMR_REFERENCE_POINTS] {
    std::array::from_fn(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 8.0))
}

pub fn lamr_from_points(points: &[CurvePoint]) -> f64 {
    let refs = lamr_reference_fppi();
    let log_sum: f64 = refs
        .iter()
        .map(|&r| {
            let mr = points
                .iter()
                .filter(|p| p.fppi <= r)
                .map(|p| p.miss_rate)
                .fold(1.0, f64::min);
            mr.max(MISS_RATE_FLOOR).ln()
        })
        .sum();
    (log_sum / refs.len() as f64).exp()
}

pub fn miss_rate_fppi_and_lamr(
    m: &MatchResult,
    image_count: usize,
) -> Result<(Vec<CurvePoint>, f64)> {
    let points = operating_points(m, image_count)?;
    let lamr = lamr_from_points(&points);
    Ok((points, lamr))
}

pub fn evaluate(
    dets: &[Detection],
    gts: &[Vec<BBox>],
    image_count: usize,
    ot: f64,
) -> Result<EvalReport> {
    let m = match_detections(dets, gts, ot)?;
    let (pr_curve, ap) = pr_curve_and_ap(&m)?;
    let (operating_points, lamr) = miss_rate_fppi_and_lamr(&m, image_count)?;
    Ok(EvalReport {
        ot,
        ap,
        lamr,
        tp: m.tp(),
        fp: m.fp(),
        gt: m.gt_count,
        pr_curve,
        operating_points,
    })
}

pub fn ot_sweep(
    dets: &[Detection],
    gts: &[Vec<BBox>],
    image_count: usize,
    ot_values: &[f64],
) -> Result<Vec<EvalReport>> {
    if ot_values.is_empty() {
        return Err(Error::Parameter(
            "at least one overlap threshold is required".into(),
        ));
    }
    ot_values
        .iter()
        .map(|&ot| evaluate(dets, gts, image_count, ot))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(x0: i64, y0: i64, x1: i64, y1: i64) -> BBox {
        BBox::new(x0, y0, x1, y1).unwrap()
    }

    fn det(image_id: usize, bbox: BBox, confidence: f64) -> Detection {
        Detection {
            image_id,
            bbox,
            confidence,
        }
    }

    fn flags(m: &MatchResult) -> Vec<bool> {
        m.ranked.iter().map(|d| d.true_positive).collect()
    }

    #[test]
    fn box_iou_examples() {
        let a = bx(0, 0, 10, 10);
        assert_eq!(box_iou(&a, &a), 1.0);
        assert_eq!(box_iou(&a, &bx(20, 20, 30, 30)), 0.0);
        assert_eq!(box_iou(&a, &bx(5, 0, 15, 10)), 1.0 / 3.0);
    }

    #[test]
    fn covering_detection_is_a_true_positive() {
        let gts = vec![vec![bx(10, 10, 20, 20)]];
        for ot in default_ot_grid() {
            let m = match_detections(&[det(0, bx(10, 10, 20, 20), 0.7)], &gts, ot).unwrap();
            assert_eq!((m.tp(), m.fp()), (1, 0));
        }
    }

    #[test]
    fn no_detections_means_all_misses() {
        let gts = vec![vec![bx(0, 0, 5, 5), bx(10, 10, 15, 15)]];
        let m = match_detections(&[], &gts, 0.5).unwrap();
        assert_eq!((m.tp(), m.fp(), m.gt_count), (0, 0, 2));
        let (_, ap) = pr_curve_and_ap(&m).unwrap();
        assert_eq!(ap, 0.0);
        let (_, lamr) = miss_rate_fppi_and_lamr(&m, 1).unwrap();
        assert_eq!(lamr, 1.0);
    }

    #[test]
    fn consumed_ground_truth_turns_later_detection_into_fp() {
        let gt = bx(0, 0, 100, 100);
        // IOU 0.6 and 0.55 against the same ground truth
        let d1 = det(0, bx(0, 0, 60, 100), 0.9);
        let d2 = det(0, bx(0, 0, 55, 100), 0.8);
        assert!((box_iou(&d1.bbox, &gt) - 0.6).abs() < 1e-12);
        assert!((box_iou(&d2.bbox, &gt) - 0.55).abs() < 1e-12);
        let m = match_detections(&[d2, d1], &[vec![gt]], 0.5).unwrap();
        assert_eq!(flags(&m), vec![true, false]);
        assert_eq!(m.ranked[0].confidence, 0.9);
    }

    #[test]
    fn fp_after_tp_keeps_ap_at_one() {
        let gt = bx(0, 0, 10, 10);
        let m = match_detections(
            &[det(0, gt, 0.9), det(0, bx(50, 50, 60, 60), 0.8)],
            &[vec![gt]],
            0.5,
        )
        .unwrap();
        let (curve, ap) = pr_curve_and_ap(&m).unwrap();
        assert_eq!(ap, 1.0);
        assert_eq!((curve[0].precision, curve[0].recall), (1.0, 1.0));
        assert_eq!(curve[1].precision, 0.5);
    }

    #[test]
    fn iou_boundary_uses_greater_or_equal() {
        let gt = bx(0, 0, 100, 100);
        let d = det(0, bx(0, 0, 40, 100), 0.5);
        assert_eq!(box_iou(&d.bbox, &gt), 0.4);
        let reports = ot_sweep(&[d], &[vec![gt]], 1, &default_ot_grid()).unwrap();
        for r in reports {
            assert_eq!(r.tp == 1, r.ot <= 0.40, "ot {}", r.ot);
        }
    }

    #[test]
    fn perfect_detector_lamr_hits_the_floor() {
        let gt = bx(0, 0, 10, 10);
        let m = match_detections(&[det(0, gt, 1.0)], &[vec![gt]], 0.5).unwrap();
        let (_, lamr) = miss_rate_fppi_and_lamr(&m, 1).unwrap();
        assert!((lamr - MISS_RATE_FLOOR).abs() < 1e-22);
    }

    #[test]
    fn constant_half_miss_rate() {
        let g1 = bx(0, 0, 10, 10);
        let g2 = bx(50, 50, 60, 60);
        let m = match_detections(&[det(0, g1, 0.9)], &[vec![g1, g2]], 0.5).unwrap();
        let (_, lamr) = miss_rate_fppi_and_lamr(&m, 1).unwrap();
        assert!((lamr - 0.5).abs() < 1e-12);
    }

    #[test]
    fn tied_confidences_collapse_to_one_operating_point() {
        let g = bx(0, 0, 10, 10);
        let m = match_detections(
            &[
                det(0, g, 0.5),
                det(0, bx(30, 30, 40, 40), 0.5),
                det(1, bx(0, 0, 5, 5), 0.2),
            ],
            &[vec![g], vec![]],
            0.5,
        )
        .unwrap();
        let pts = operating_points(&m, 2).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].fppi, pts[0].recall), (0.5, 1.0));
        assert_eq!((pts[1].fppi, pts[1].precision), (1.0, 1.0 / 3.0));
    }

    #[test]
    fn input_validation() {
        let gts = vec![vec![bx(0, 0, 1, 1)]];
        assert!(match_detections(&[det(0, bx(0, 0, 1, 1), 1.5)], &gts, 0.5).is_err());
        assert!(match_detections(&[det(3, bx(0, 0, 1, 1), 0.5)], &gts, 0.5).is_err());
        assert!(match_detections(&[], &gts, 0.0).is_err());
        assert!(match_detections(&[], &gts, 1.01).is_err());
        let empty = match_detections(&[], &[vec![]], 0.5).unwrap();
        assert!(matches!(pr_curve_and_ap(&empty), Err(Error::NoGroundTruth)));
        assert!(miss_rate_fppi_and_lamr(&empty, 1).is_err());
        let m = match_detections(&[], &gts, 0.5).unwrap();
        assert!(miss_rate_fppi_and_lamr(&m, 0).is_err());
        assert!(ot_sweep(&[], &gts, 1, &[]).is_err());
    }

    #[test]
    fn reference_points_are_log_spaced() {
        let r = lamr_reference_fppi();
        assert!((r[0] - 0.01).abs() < 1e-15);
        assert!((r[4] - 0.1).abs() < 1e-15);
        assert!((r[8] - 1.0).abs() < 1e-15);
    }
}

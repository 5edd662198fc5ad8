//! Parameter sweeps over kernel size and threshold scaling, and annotation
//! timing arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::GazeTrace;
use crate::kde::{build_density_grid, compute_threshold, extract_clusters, roi_mask};
use crate::mask_ops::{mask_iou, summarize, MiouSummary};
use crate::raster::BinaryMask;

pub struct SweepItem<'a> {
    pub trace: &'a GazeTrace,
    pub gt_mask: &'a BinaryMask,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub sigma: f64,
    pub n: f64,
    pub summary: MiouSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub sigmas: Vec<f64>,
    pub ns: Vec<f64>,
    /// Sigma-major: `cells[si * ns.len() + ni]`.
    pub cells: Vec<SweepCell>,
    /// Index of the cell with the highest mean IOU (first on ties).
    pub best: usize,
    /// `cluster_counts[item][si]`.
    pub cluster_counts: Vec<Vec<usize>>,
}

impl SweepResult {
    pub fn cell(&self, sigma_index: usize, n_index: usize) -> &SweepCell {
        &self.cells[sigma_index * self.ns.len() + n_index]
    }

    pub fn best_cell(&self) -> &SweepCell {
        &self.cells[self.best]
    }
}

/// Mean and spread of the gaze-mask IOU against ground truth for every
/// `(sigma, n)` pair. Each cell equals the single-sigma KDE pipeline run on
/// every item; the density grid for a `(trace, sigma)` is shared across `n`.
pub fn param_sweep(items: &[SweepItem<'_>], sigmas: &[f64], ns: &[f64]) -> Result<SweepResult> {
    if items.is_empty() || sigmas.is_empty() || ns.is_empty() {
        return Err(Error::Parameter(
            "sweep needs at least one item, sigma and scaling factor".into(),
        ));
    }
    for &n in ns {
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::Parameter(format!(
                "scaling factor must be > 0, got {n}"
            )));
        }
    }

    // Per item: ious[si][ni] and the cluster count for each sigma. Items run
    // in parallel; collect keeps item order.
    let per_item: Vec<(Vec<Vec<f64>>, Vec<usize>)> = items
        .par_iter()
        .map(|item| {
            let spec = *item.gt_mask.spec();
            let mut ious = Vec::with_capacity(sigmas.len());
            let mut counts = Vec::with_capacity(sigmas.len());
            for &sigma in sigmas {
                let grid = build_density_grid(item.trace, sigma, spec)?;
                let clusters = extract_clusters(&grid);
                counts.push(clusters.len());
                let row = ns
                    .iter()
                    .map(|&n| {
                        let mask = match compute_threshold(&clusters, &grid, n) {
                            Ok(stats) => roi_mask(&grid, &stats),
                            Err(Error::NoClusters) => BinaryMask::empty(spec),
                            Err(e) => return Err(e),
                        };
                        mask_iou(item.gt_mask, &mask)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                ious.push(row);
            }
            Ok((ious, counts))
        })
        .collect::<Result<_>>()?;
    let cluster_counts = per_item.iter().map(|(_, c)| c.clone()).collect();
    let column = |si: usize, ni: usize| -> Vec<f64> {
        per_item.iter().map(|(ious, _)| ious[si][ni]).collect()
    };

    let mut cells = Vec::with_capacity(sigmas.len() * ns.len());
    for (si, &sigma) in sigmas.iter().enumerate() {
        for (ni, &n) in ns.iter().enumerate() {
            cells.push(SweepCell {
                sigma,
                n,
                summary: summarize(&column(si, ni))?,
            });
        }
    }
    let best = cells.iter().enumerate().fold(0, |best, (i, c)| {
        if c.summary.mean > cells[best].summary.mean {
            i
        } else {
            best
        }
    });

    Ok(SweepResult {
        sigmas: sigmas.to_vec(),
        ns: ns.to_vec(),
        cells,
        best,
        cluster_counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Freehand,
    Bbox,
    Gaze,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Freehand => "freehand",
            Method::Bbox => "bbox",
            Method::Gaze => "gaze",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub annotator: String,
    pub method: Method,
    pub total_seconds: f64,
    pub label_count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodTiming {
    pub method: Method,
    /// Seconds per label for each annotator, by annotator id.
    pub per_annotator: BTreeMap<String, f64>,
    /// Mean of the per-annotator averages.
    pub mean_of_annotators: f64,
    /// Total seconds over total labels, all annotators pooled.
    pub pooled: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saving {
    pub versus: Method,
    /// `1 - gaze / other` on the mean-of-annotators averages.
    pub fraction: f64,
    /// The same ratio on pooled averages.
    pub pooled_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimingReport {
    pub methods: Vec<MethodTiming>,
    pub gaze_savings: Vec<Saving>,
}

pub fn timing_report(records: &[TimingRecord]) -> Result<TimingReport> {
    if records.is_empty() {
        return Err(Error::Validation("no timing records".into()));
    }
    // method -> annotator -> (seconds, labels)
    let mut totals: BTreeMap<Method, BTreeMap<&str, (f64, u64)>> = BTreeMap::new();
    for r in records {
        if r.label_count == 0 {
            return Err(Error::Validation(format!(
                "annotator {} / {}: label count must be > 0",
                r.annotator, r.method
            )));
        }
        if !(r.total_seconds >= 0.0 && r.total_seconds.is_finite()) {
            return Err(Error::Validation(format!(
                "annotator {} / {}: total seconds must be >= 0",
                r.annotator, r.method
            )));
        }
        let e = totals
            .entry(r.method)
            .or_default()
            .entry(&r.annotator)
            .or_insert((0.0, 0));
        e.0 += r.total_seconds;
        e.1 += r.label_count as u64;
    }

    let methods: Vec<MethodTiming> = totals
        .iter()
        .map(|(&method, by_annotator)| {
            let per_annotator: BTreeMap<String, f64> = by_annotator
                .iter()
                .map(|(&a, &(secs, labels))| (a.to_string(), secs / labels as f64))
                .collect();
            let mean_of_annotators =
                per_annotator.values().sum::<f64>() / per_annotator.len() as f64;
            let (secs, labels) = by_annotator
                .values()
                .fold((0.0, 0u64), |(s, l), &(s2, l2)| (s + s2, l + l2));
            MethodTiming {
                method,
                per_annotator,
                mean_of_annotators,
                pooled: secs / labels as f64,
            }
        })
        .collect();

    let gaze = methods.iter().find(|m| m.method == Method::Gaze);
    let gaze_savings = match gaze {
        None => Vec::new(),
        Some(g) => methods
            .iter()
            .filter(|m| m.method != Method::Gaze)
            .map(|m| Saving {
                versus: m.method,
                fraction: 1.0 - g.mean_of_annotators / m.mean_of_annotators,
                pooled_fraction: 1.0 - g.pooled / m.pooled,
            })
            .collect(),
    };

    Ok(TimingReport {
        methods,
        gaze_savings,
    })
}

/// Reads `annotator,method,total_seconds,label_count` CSV with a header row.
pub fn parse_timing_csv(text: &str) -> Result<Vec<TimingRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .enumerate()
        .map(|(i, r)| {
            r.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

//! Fixation-intensity density grids and adaptive ROI thresholding.
//!
//! Every gaze point contributes a unit-peak Gaussian `exp(-d² / 2σ²)`,
//! truncated at `d > 3σ`, to the cells of a downsampled slide grid. The
//! positive support of the grid splits into 8-connected clusters, and the
//! per-image threshold is `τ = n · θ̄ / m`, where `θ̄` is the mean over
//! clusters of each cluster's mean cell value and `m` is the largest cell
//! value in any cluster. `τ` lives on the peak-normalised scale, so ROI
//! masks keep cells with `value / m ≥ τ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ingest::GazeTrace;
use crate::raster::{label_components, BinaryMask, GridSpec};

/// Kernels are cut off beyond this many standard deviations.
pub const TRUNCATION_SIGMAS: f64 = 3.0;

pub const DEFAULT_SIGMA: f64 = 400.0;
pub const DEFAULT_SCALING: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub spec: GridSpec,
    /// Kernel standard deviation in slide pixels.
    pub sigma: f64,
    pub values: Vec<f64>,
}

impl DensityGrid {
    pub fn value(&self, cx: usize, cy: usize) -> f64 {
        self.values[self.spec.index(cx, cy)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Every value divided by `peak`.
    pub fn normalized(&self, peak: f64) -> DensityGrid {
        DensityGrid {
            spec: self.spec,
            sigma: self.sigma,
            values: self.values.iter().map(|v| v / peak).collect(),
        }
    }

    pub fn scaled(&self, k: f64) -> DensityGrid {
        DensityGrid {
            spec: self.spec,
            sigma: self.sigma,
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Sorted row-major cell indices.
    pub cells: Vec<usize>,
    /// Mean cell value over the cluster's bins.
    pub mean: f64,
}

impl Cluster {
    /// Number of bins (cells with nonzero density) in the cluster.
    pub fn bins(&self) -> usize {
        self.cells.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdStats {
    /// Mean of the per-cluster mean values.
    pub theta_bar: f64,
    /// Largest cell value over all clusters.
    pub max: f64,
    pub n: f64,
    pub tau: f64,
    pub clusters: usize,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sigma must be > 0, got {sigma}")))
    }
}

pub fn build_density_grid(trace: &GazeTrace, sigma: f64, spec: GridSpec) -> Result<DensityGrid> {
    check_sigma(sigma)?;
    let radius = TRUNCATION_SIGMAS * sigma;
    let radius2 = radius * radius;
    let two_var = 2.0 * sigma * sigma;
    let ds = spec.downsample as f64;
    let width = spec.width_cells;
    let mut values = vec![0.0; spec.len()];
    if trace.is_empty() || spec.is_empty() {
        return Ok(DensityGrid {
            spec,
            sigma,
            values,
        });
    }

    let height = spec.height_cells;
    let footprints: Vec<Footprint> = trace
        .points
        .iter()
        .filter_map(|p| {
            let cols = Axis::new(p.x, radius, two_var, ds, width)?;
            let rows = Axis::new(p.y, radius, two_var, ds, height)?;
            Some(Footprint { cols, rows })
        })
        .collect();

    // Rows are independent and each cell accumulates points in trace order,
    // so the result does not depend on how rows are scheduled.
    values
        .par_chunks_mut(width)
        .enumerate()
        .for_each(|(cy, row)| {
            for fp in &footprints {
                let Some(j) = cy.checked_sub(fp.rows.first).filter(|&j| j < fp.rows.len()) else {
                    continue;
                };
                let (dy2, ey) = (fp.rows.d2[j], fp.rows.weight[j]);
                let cells = &mut row[fp.cols.first..fp.cols.first + fp.cols.len()];
                for ((cell, &dx2), &ex) in cells.iter_mut().zip(&fp.cols.d2).zip(&fp.cols.weight) {
                    if dx2 + dy2 <= radius2 {
                        *cell += ex * ey;
                    }
                }
            }
        });

    Ok(DensityGrid {
        spec,
        sigma,
        values,
    })
}

/// Cells within the truncation radius of one coordinate along one axis, with
/// squared offsets and the matching 1-D Gaussian factors. The 2-D kernel is
/// the product of the two axis factors.
struct Axis {
    first: usize,
    d2: Vec<f64>,
    weight: Vec<f64>,
}

impl Axis {
    fn new(at: f64, radius: f64, two_var: f64, ds: f64, cells: usize) -> Option<Self> {
        // one cell of slack either side; the 2-D distance test is exact
        let lo = (((at - radius) / ds - 0.5).ceil() - 1.0).max(0.0);
        let hi = (((at + radius) / ds - 0.5).floor() + 1.0).min(cells as f64 - 1.0);
        if hi < lo {
            return None;
        }
        let (first, last) = (lo as usize, hi as usize);
        let d2: Vec<f64> = (first..=last)
            .map(|c| {
                let d = (c as f64 + 0.5) * ds - at;
                d * d
            })
            .collect();
        let weight = d2.iter().map(|v| (-v / two_var).exp()).collect();
        Some(Self { first, d2, weight })
    }

    fn len(&self) -> usize {
        self.d2.len()
    }
}

struct Footprint {
    cols: Axis,
    rows: Axis,
}

/// 8-connected components of the positive-density support.
pub fn extract_clusters(grid: &DensityGrid) -> Vec<Cluster> {
    label_components(&grid.spec, |i| grid.values[i] > 0.0)
        .into_iter()
        .map(|cells| {
            let sum: f64 = cells.iter().map(|&i| grid.values[i]).sum();
            let mean = sum / cells.len() as f64;
            Cluster { cells, mean }
        })
        .collect()
}

pub fn compute_threshold(
    clusters: &[Cluster],
    grid: &DensityGrid,
    n: f64,
) -> Result<ThresholdStats> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Parameter(format!(
            "scaling factor must be > 0, got {n}"
        )));
    }
    if clusters.is_empty() {
        return Err(Error::NoClusters);
    }
    let theta_bar = clusters.iter().map(|c| c.mean).sum::<f64>() / clusters.len() as f64;
    let max = clusters
        .iter()
        .flat_map(|c| c.cells.iter().map(|&i| grid.values[i]))
        .fold(0.0, f64::max);
    Ok(ThresholdStats {
        theta_bar,
        max,
        n,
        tau: n * theta_bar / max,
        clusters: clusters.len(),
    })
}

/// Sets every cell with positive density at or above `tau`.
pub fn threshold_to_mask(grid: &DensityGrid, tau: f64) -> Result<BinaryMask> {
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::Parameter(format!(
            "threshold must be >= 0, got {tau}"
        )));
    }
    let bits = grid.values.iter().map(|&v| v > 0.0 && v >= tau).collect();
    BinaryMask::from_bits(grid.spec, bits)
}

/// ROI mask for one kernel size: the peak-normalised grid thresholded at
/// `stats.tau`. Same result as `threshold_to_mask(&grid.normalized(stats.max),
/// stats.tau)` without materialising the normalised grid.
pub fn roi_mask(grid: &DensityGrid, stats: &ThresholdStats) -> BinaryMask {
    let bits = grid
        .values
        .iter()
        .map(|&v| v > 0.0 && v / stats.max >= stats.tau)
        .collect();
    BinaryMask::from_bits(grid.spec, bits).expect("grid and spec agree")
}

pub fn merge_masks(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.spec().ensure_same(b.spec())?;
    let bits = a
        .bits()
        .iter()
        .zip(b.bits())
        .map(|(&x, &y)| x || y)
        .collect();
    BinaryMask::from_bits(*a.spec(), bits)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SigmaOutcome {
    pub sigma: f64,
    pub clusters: usize,
    /// `None` when the grid has no clusters.
    pub threshold: Option<ThresholdStats>,
    pub mask_cells: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdeRun {
    pub mask: BinaryMask,
    pub per_sigma: Vec<SigmaOutcome>,
}

pub fn run_kde_pipeline(
    trace: &GazeTrace,
    sigmas: &[f64],
    n: f64,
    spec: GridSpec,
) -> Result<BinaryMask> {
    run_kde_pipeline_detailed(trace, sigmas, n, spec).map(|run| run.mask)
}

/// Thresholds each kernel size independently and ORs the masks together.
pub fn run_kde_pipeline_detailed(
    trace: &GazeTrace,
    sigmas: &[f64],
    n: f64,
    spec: GridSpec,
) -> Result<KdeRun> {
    if sigmas.is_empty() {
        return Err(Error::Parameter("at least one sigma is required".into()));
    }
    for &s in sigmas {
        check_sigma(s)?;
    }
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::Parameter(format!(
            "scaling factor must be > 0, got {n}"
        )));
    }

    let mut mask = BinaryMask::empty(spec);
    let mut per_sigma = Vec::with_capacity(sigmas.len());
    for &sigma in sigmas {
        let grid = build_density_grid(trace, sigma, spec)?;
        let clusters = extract_clusters(&grid);
        let (threshold, level) = match compute_threshold(&clusters, &grid, n) {
            Ok(stats) => (Some(stats), roi_mask(&grid, &stats)),
            Err(Error::NoClusters) => (None, BinaryMask::empty(spec)),
            Err(e) => return Err(e),
        };
        per_sigma.push(SigmaOutcome {
            sigma,
            clusters: clusters.len(),
            threshold,
            mask_cells: level.count(),
        });
        mask = merge_masks(&mask, &level)?;
    }
    Ok(KdeRun { mask, per_sigma })
}

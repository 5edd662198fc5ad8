//! Synthetic ground-truth scenes and gaze sessions over them.
//!
//! All randomness comes from a `ChaCha8Rng` seeded with the caller's 64-bit
//! seed, so a scene or session is a pure function of its inputs.
//!
//! A session visits every ROI once in random order, dwelling on its centroid
//! with isotropic Gaussian scatter, and also makes a few short fixations at
//! random slide locations (distractors). Consecutive stops are joined by
//! evenly spaced saccade samples on the straight line between them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{slide_to_screen, GazeSample, GazeSession, SlideGeometry, ViewportEvent};
use crate::mask_ops::BBox;
use crate::raster::{BinaryMask, GridSpec};

const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;
const ZOOM_LEVELS: [f64; 3] = [1.0, 2.0, 4.0];

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Axis-aligned ellipse in slide pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub cx: f64,
    pub cy: f64,
    pub rx: f64,
    pub ry: f64,
}

impl Ellipse {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let u = (x - self.cx) / self.rx;
        let v = (y - self.cy) / self.ry;
        u * u + v * v <= 1.0
    }

    /// Geometric-mean radius.
    pub fn radius(&self) -> f64 {
        (self.rx * self.ry).sqrt()
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            x_min: (self.cx - self.rx).floor() as i64,
            y_min: (self.cy - self.ry).floor() as i64,
            x_max: (self.cx + self.rx).ceil() as i64,
            y_max: (self.cy + self.ry).ceil() as i64,
        }
    }

    /// Same centre, semi-axes multiplied by `k`.
    pub fn dilated(&self, k: f64) -> Ellipse {
        Ellipse {
            rx: self.rx * k,
            ry: self.ry * k,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GtScene {
    pub geometry: SlideGeometry,
    pub rois: Vec<Ellipse>,
    pub gt_mask: BinaryMask,
    pub gt_boxes: Vec<BBox>,
}

impl GtScene {
    /// Rasterises the given ROIs: a cell is set when its centre is inside an ROI.
    pub fn from_rois(geometry: SlideGeometry, rois: Vec<Ellipse>, grid: GridSpec) -> Self {
        let gt_mask = rasterize(&rois, grid);
        let gt_boxes = rois.iter().map(Ellipse::bbox).collect();
        Self {
            geometry,
            rois,
            gt_mask,
            gt_boxes,
        }
    }
}

pub fn rasterize(rois: &[Ellipse], grid: GridSpec) -> BinaryMask {
    let mut mask = BinaryMask::empty(grid);
    let ds = grid.downsample as f64;
    for e in rois {
        let cx0 = ((e.cx - e.rx) / ds).floor().max(0.0) as usize;
        let cy0 = ((e.cy - e.ry) / ds).floor().max(0.0) as usize;
        let cx1 = (((e.cx + e.rx) / ds).ceil() as usize).min(grid.width_cells);
        let cy1 = (((e.cy + e.ry) / ds).ceil() as usize).min(grid.height_cells);
        for cy in cy0..cy1 {
            for cx in cx0..cx1 {
                let (x, y) = grid.cell_center(cx, cy);
                if e.contains(x, y) {
                    mask.set(cx, cy, true);
                }
            }
        }
    }
    mask
}

/// Places `roi_count` ellipses with semi-axes in `radius_range` so that their
/// bounding boxes are pairwise disjoint and inside the slide.
pub fn generate_scene(
    roi_count: usize,
    radius_range: (f64, f64),
    geometry: SlideGeometry,
    grid: GridSpec,
    seed: u64,
) -> Result<GtScene> {
    let (r_min, r_max) = radius_range;
    if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
        return Err(Error::Parameter(format!(
            "radius range must satisfy 0 < min <= max, got ({r_min}, {r_max})"
        )));
    }
    geometry.validate()?;
    let mut rng = rng_from_seed(seed);
    let (w, h) = (geometry.slide_width as f64, geometry.slide_height as f64);
    let mut rois: Vec<Ellipse> = Vec::with_capacity(roi_count);
    let mut boxes: Vec<BBox> = Vec::with_capacity(roi_count);

    for index in 0..roi_count {
        let mut placed = false;
        for _ in 0..MAX_PLACEMENT_ATTEMPTS {
            let rx = rng.random_range(r_min..=r_max);
            let ry = (rx * rng.random_range(0.75..=1.25)).clamp(r_min, r_max);
            if 2.0 * rx > w || 2.0 * ry > h {
                continue;
            }
            let cx = rng.random_range(rx..=w - rx);
            let cy = rng.random_range(ry..=h - ry);
            let e = Ellipse { cx, cy, rx, ry };
            let b = e.bbox();
            if boxes.iter().all(|o| o.intersection(&b).is_none()) {
                rois.push(e);
                boxes.push(b);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Placement {
                index,
                attempts: MAX_PLACEMENT_ATTEMPTS,
            });
        }
    }

    Ok(GtScene::from_rois(geometry, rois, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub sample_rate_hz: f64,
    /// Seconds spent on each ROI, drawn uniformly from this range.
    pub dwell_range_s: (f64, f64),
    /// Standard deviation of gaze scatter as a fraction of the ROI radius.
    pub fixation_jitter: f64,
    pub saccade_samples_per_transition: usize,
    pub distractor_fixations: usize,
    pub distractor_dwell_s: f64,
    pub seed: u64,
    /// Emit a pan/zoom viewport event at every stop instead of one identity
    /// viewport, with samples recorded in screen coordinates.
    pub pan_zoom: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            sample_rate_hz: 60.0,
            dwell_range_s: (1.0, 2.0),
            fixation_jitter: 0.35,
            saccade_samples_per_transition: 5,
            distractor_fixations: 2,
            distractor_dwell_s: 0.5,
            seed: 0,
            pan_zoom: false,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.dwell_range_s;
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::Parameter("sample rate must be > 0".into()));
        }
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
            return Err(Error::Parameter(
                "dwell range must satisfy 0 < min <= max".into(),
            ));
        }
        if !(self.fixation_jitter >= 0.0 && self.fixation_jitter.is_finite()) {
            return Err(Error::Parameter("jitter must be >= 0".into()));
        }
        if !(self.distractor_dwell_s >= 0.0 && self.distractor_dwell_s.is_finite()) {
            return Err(Error::Parameter("distractor dwell must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Stop {
    x: f64,
    y: f64,
    scatter: f64,
    samples: usize,
}

struct Recorder<'a> {
    params: &'a SimParams,
    geometry: SlideGeometry,
    samples: Vec<GazeSample>,
    viewports: Vec<ViewportEvent>,
}

impl Recorder<'_> {
    fn now(&self) -> f64 {
        self.samples.len() as f64 * 1000.0 / self.params.sample_rate_hz
    }

    fn look_at(&mut self, x: f64, y: f64, scale: f64) {
        let half_w = self.geometry.screen_width as f64 / 2.0;
        let half_h = self.geometry.screen_height as f64 / 2.0;
        self.viewports.push(ViewportEvent {
            t_ms: self.now(),
            offset_x: x - half_w * scale,
            offset_y: y - half_h * scale,
            scale,
        });
    }

    fn record(&mut self, x: f64, y: f64) {
        let t_ms = self.now();
        let (sx, sy) = match self.viewports.last() {
            Some(vp) if self.params.pan_zoom => slide_to_screen(x, y, vp),
            _ => (x, y),
        };
        self.samples.push(GazeSample {
            t_ms,
            x: sx,
            y: sy,
            valid: true,
        });
    }
}

pub fn simulate_trace(scene: &GtScene, params: &SimParams) -> Result<GazeSession> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let rate = params.sample_rate_hz;
    let (dwell_lo, dwell_hi) = params.dwell_range_s;

    let mut order: Vec<usize> = (0..scene.rois.len()).collect();
    order.shuffle(&mut rng);
    let mut stops: Vec<Stop> = order
        .iter()
        .map(|&i| {
            let roi = &scene.rois[i];
            let dwell = rng.random_range(dwell_lo..=dwell_hi);
            Stop {
                x: roi.cx,
                y: roi.cy,
                scatter: params.fixation_jitter * roi.radius(),
                samples: (dwell * rate).round() as usize,
            }
        })
        .collect();

    // distractors scatter like an average ROI of this scene
    let mean_radius = if scene.rois.is_empty() {
        0.0
    } else {
        scene.rois.iter().map(Ellipse::radius).sum::<f64>() / scene.rois.len() as f64
    };
    let (w, h) = (
        scene.geometry.slide_width as f64,
        scene.geometry.slide_height as f64,
    );
    for _ in 0..params.distractor_fixations {
        let stop = Stop {
            x: rng.random_range(0.0..w),
            y: rng.random_range(0.0..h),
            scatter: params.fixation_jitter * mean_radius,
            samples: (params.distractor_dwell_s * rate).round() as usize,
        };
        let at = rng.random_range(0..=stops.len());
        stops.insert(at, stop);
    }

    let mut rec = Recorder {
        params,
        geometry: scene.geometry,
        samples: Vec::new(),
        viewports: Vec::new(),
    };
    if !params.pan_zoom {
        rec.viewports.push(ViewportEvent::identity(0.0));
    }

    let mut prev: Option<Stop> = None;
    for stop in stops {
        if let Some(p) = prev {
            let k = params.saccade_samples_per_transition;
            for i in 1..=k {
                let f = i as f64 / (k + 1) as f64;
                rec.record(p.x + f * (stop.x - p.x), p.y + f * (stop.y - p.y));
            }
        }
        if params.pan_zoom {
            let scale = ZOOM_LEVELS[rng.random_range(0..ZOOM_LEVELS.len())];
            rec.look_at(stop.x, stop.y, scale);
        }
        let scatter =
            Normal::new(0.0, stop.scatter).map_err(|e| Error::Parameter(e.to_string()))?;
        for _ in 0..stop.samples {
            let dx = scatter.sample(&mut rng);
            let dy = scatter.sample(&mut rng);
            rec.record(stop.x + dx, stop.y + dy);
        }
        prev = Some(stop);
    }
    if rec.viewports.is_empty() {
        rec.viewports.push(ViewportEvent::identity(0.0));
    }

    Ok(GazeSession {
        geometry: scene.geometry,
        samples: rec.samples,
        viewport_events: rec.viewports,
    })
}

/// Session seeds are offset from scene seeds so the two streams differ.
pub const SESSION_SEED_OFFSET: u64 = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    pub scene: GtScene,
    pub session: GazeSession,
}

/// Scene from `seed` and a session over it from `seed + SESSION_SEED_OFFSET`;
/// `params.seed` is ignored.
pub fn synthetic_case(
    seed: u64,
    roi_count: usize,
    radius_range: (f64, f64),
    geometry: SlideGeometry,
    grid: GridSpec,
    params: &SimParams,
) -> Result<SyntheticCase> {
    let scene = generate_scene(roi_count, radius_range, geometry, grid, seed)?;
    let params = SimParams {
        seed: seed.wrapping_add(SESSION_SEED_OFFSET),
        ..*params
    };
    let session = simulate_trace(&scene, &params)?;
    Ok(SyntheticCase { scene, session })
}

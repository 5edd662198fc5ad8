//! Python bindings for `gazekde`.
//!
//! Boxes cross the boundary as `(x_min, y_min, x_max, y_max)` tuples in slide
//! pixels and gaze points as `(x, y)` or `(x, y, t_ms)` tuples.

use std::collections::{BTreeMap, HashMap};
use std::io::Cursor;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use gazekde::det_eval::{self, Detection};
use gazekde::formats;
use gazekde::ingest::{parse_session, project_trace, serialize_session};
use gazekde::kde;
use gazekde::mask_ops;
use gazekde::report::{self, Method, TimingRecord};
use gazekde::simulator::{self, SimParams};
use gazekde::tiler::{self, ScoredBox, TileId, TileSpec};
use gazekde::{
    BBox, BinaryMask, Error, GazeSession, GazeTrace, GridSpec, SlideGeometry, TracePoint,
};

type PyBox = (i64, i64, i64, i64);
type TimingSummary = (BTreeMap<String, (f64, f64)>, BTreeMap<String, f64>);

fn err(e: Error) -> PyErr {
    if e.is_io() {
        PyIOError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn to_bbox(b: PyBox) -> PyResult<BBox> {
    BBox::new(b.0, b.1, b.2, b.3).map_err(err)
}

fn from_bbox(b: &BBox) -> PyBox {
    (b.x_min, b.y_min, b.x_max, b.y_max)
}

fn trace_from(points: Vec<(f64, f64)>) -> GazeTrace {
    GazeTrace::new(
        points
            .into_iter()
            .enumerate()
            .map(|(i, (x, y))| TracePoint {
                x,
                y,
                t_ms: i as f64,
            })
            .collect(),
    )
}

#[pyclass(name = "GridSpec", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyGridSpec {
    inner: GridSpec,
}

#[pymethods]
impl PyGridSpec {
    #[new]
    #[pyo3(signature = (slide_width, slide_height, downsample = 16))]
    fn new(slide_width: u32, slide_height: u32, downsample: u32) -> PyResult<Self> {
        Ok(Self {
            inner: GridSpec::for_slide(slide_width, slide_height, downsample).map_err(err)?,
        })
    }

    #[getter]
    fn downsample(&self) -> u32 {
        self.inner.downsample
    }

    #[getter]
    fn width_cells(&self) -> usize {
        self.inner.width_cells
    }

    #[getter]
    fn height_cells(&self) -> usize {
        self.inner.height_cells
    }

    #[getter]
    fn slide_width(&self) -> u32 {
        self.inner.slide_width
    }

    #[getter]
    fn slide_height(&self) -> u32 {
        self.inner.slide_height
    }

    fn __repr__(&self) -> String {
        let g = &self.inner;
        format!(
            "GridSpec(slide={}x{}, downsample={}, cells={}x{})",
            g.slide_width, g.slide_height, g.downsample, g.width_cells, g.height_cells
        )
    }
}

#[pyclass(name = "BinaryMask", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBinaryMask {
    inner: BinaryMask,
}

#[pymethods]
impl PyBinaryMask {
    /// Mask from row-major cell flags.
    #[new]
    fn new(spec: PyRef<'_, PyGridSpec>, bits: Vec<bool>) -> PyResult<Self> {
        Ok(Self {
            inner: BinaryMask::from_bits(spec.inner, bits).map_err(err)?,
        })
    }

    #[getter]
    fn spec(&self) -> PyGridSpec {
        PyGridSpec {
            inner: *self.inner.spec(),
        }
    }

    fn bits(&self) -> Vec<bool> {
        self.inner.bits().to_vec()
    }

    fn get(&self, cx: usize, cy: usize) -> PyResult<bool> {
        let s = self.inner.spec();
        if cx >= s.width_cells || cy >= s.height_cells {
            return Err(PyValueError::new_err("cell outside the grid"));
        }
        Ok(self.inner.get(cx, cy))
    }

    fn count(&self) -> usize {
        self.inner.count()
    }

    fn iou(&self, other: PyRef<'_, PyBinaryMask>) -> PyResult<f64> {
        mask_ops::mask_iou(&self.inner, &other.inner).map_err(err)
    }

    /// Tight slide-pixel boxes of the 8-connected components.
    #[pyo3(signature = (min_area = None))]
    fn boxes(&self, min_area: Option<i64>) -> Vec<PyBox> {
        mask_ops::mask_to_bboxes(&self.inner, min_area)
            .boxes
            .iter()
            .map(from_bbox)
            .collect()
    }

    fn to_pgm(&self) -> Vec<u8> {
        formats::encode_pgm(&self.inner)
    }

    #[staticmethod]
    fn from_pgm(data: Vec<u8>, spec: PyRef<'_, PyGridSpec>) -> PyResult<Self> {
        Ok(Self {
            inner: formats::decode_pgm(&data, spec.inner).map_err(err)?,
        })
    }

    /// Run-length JSON `{"dims":[W,H],"runs":[[start,len],...]}`.
    fn to_rle_json(&self) -> String {
        serde_json::to_string(&formats::encode_rle(&self.inner)).expect("serialisable")
    }

    fn __repr__(&self) -> String {
        let s = self.inner.spec();
        format!(
            "BinaryMask({}x{}, {} set)",
            s.width_cells,
            s.height_cells,
            self.inner.count()
        )
    }
}

#[pyclass(name = "ThresholdStats", frozen, get_all)]
struct PyThresholdStats {
    theta_bar: f64,
    max: f64,
    n: f64,
    tau: f64,
    clusters: usize,
}

#[pyclass(name = "DensityGrid", frozen)]
struct PyDensityGrid {
    inner: kde::DensityGrid,
    clusters: Vec<kde::Cluster>,
}

#[pymethods]
impl PyDensityGrid {
    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn spec(&self) -> PyGridSpec {
        PyGridSpec {
            inner: self.inner.spec,
        }
    }

    /// Row-major cell values.
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn value(&self, cx: usize, cy: usize) -> PyResult<f64> {
        let s = &self.inner.spec;
        if cx >= s.width_cells || cy >= s.height_cells {
            return Err(PyValueError::new_err("cell outside the grid"));
        }
        Ok(self.inner.value(cx, cy))
    }

    fn max(&self) -> f64 {
        self.inner.max()
    }

    /// `(bin_count, mean)` per cluster, largest first.
    fn clusters(&self) -> Vec<(usize, f64)> {
        self.clusters.iter().map(|c| (c.bins(), c.mean)).collect()
    }

    fn threshold(&self, n: f64) -> PyResult<PyThresholdStats> {
        let t = kde::compute_threshold(&self.clusters, &self.inner, n).map_err(err)?;
        Ok(PyThresholdStats {
            theta_bar: t.theta_bar,
            max: t.max,
            n: t.n,
            tau: t.tau,
            clusters: t.clusters,
        })
    }

    /// Cells with positive density at or above `tau` on the raw scale.
    fn threshold_mask(&self, tau: f64) -> PyResult<PyBinaryMask> {
        Ok(PyBinaryMask {
            inner: kde::threshold_to_mask(&self.inner, tau).map_err(err)?,
        })
    }

    /// ROI mask for scaling factor `n`: `value / m >= n * theta_bar / m`.
    fn roi_mask(&self, n: f64) -> PyResult<PyBinaryMask> {
        let spec = self.inner.spec;
        let inner = match kde::compute_threshold(&self.clusters, &self.inner, n) {
            Ok(stats) => kde::roi_mask(&self.inner, &stats),
            Err(Error::NoClusters) => BinaryMask::empty(spec),
            Err(e) => return Err(err(e)),
        };
        Ok(PyBinaryMask { inner })
    }
}

#[pyfunction]
fn density_grid(
    py: Python<'_>,
    points: Vec<(f64, f64)>,
    sigma: f64,
    spec: PyRef<'_, PyGridSpec>,
) -> PyResult<PyDensityGrid> {
    let trace = trace_from(points);
    let spec = spec.inner;
    py.detach(|| {
        let inner = kde::build_density_grid(&trace, sigma, spec)?;
        let clusters = kde::extract_clusters(&inner);
        Ok(PyDensityGrid { inner, clusters })
    })
    .map_err(err)
}

/// Full pipeline: one mask per sigma, OR-merged.
#[pyfunction]
#[pyo3(signature = (points, spec, sigmas = vec![kde::DEFAULT_SIGMA], n = kde::DEFAULT_SCALING))]
fn kde_mask(
    py: Python<'_>,
    points: Vec<(f64, f64)>,
    spec: PyRef<'_, PyGridSpec>,
    sigmas: Vec<f64>,
    n: f64,
) -> PyResult<PyBinaryMask> {
    let trace = trace_from(points);
    let spec = spec.inner;
    let inner = py
        .detach(|| kde::run_kde_pipeline(&trace, &sigmas, n, spec))
        .map_err(err)?;
    Ok(PyBinaryMask { inner })
}

#[pyfunction]
fn merge_masks(a: PyRef<'_, PyBinaryMask>, b: PyRef<'_, PyBinaryMask>) -> PyResult<PyBinaryMask> {
    Ok(PyBinaryMask {
        inner: kde::merge_masks(&a.inner, &b.inner).map_err(err)?,
    })
}

#[pyfunction]
fn mask_iou(a: PyRef<'_, PyBinaryMask>, b: PyRef<'_, PyBinaryMask>) -> PyResult<f64> {
    mask_ops::mask_iou(&a.inner, &b.inner).map_err(err)
}

#[pyfunction]
fn box_iou(a: PyBox, b: PyBox) -> PyResult<f64> {
    Ok(det_eval::box_iou(&to_bbox(a)?, &to_bbox(b)?))
}

#[pyclass(name = "EvalReport", frozen, get_all)]
struct PyEvalReport {
    ot: f64,
    ap: f64,
    lamr: f64,
    tp: usize,
    fp: usize,
    gt: usize,
    /// `(confidence, precision, recall, fppi, miss_rate)` per distinct confidence.
    operating_points: Vec<(f64, f64, f64, f64, f64)>,
}

#[pymethods]
impl PyEvalReport {
    fn __repr__(&self) -> String {
        format!(
            "EvalReport(ot={}, ap={:.4}, lamr={:.4}, tp={}, fp={}, gt={})",
            self.ot, self.ap, self.lamr, self.tp, self.fp, self.gt
        )
    }
}

impl From<det_eval::EvalReport> for PyEvalReport {
    fn from(r: det_eval::EvalReport) -> Self {
        Self {
            ot: r.ot,
            ap: r.ap,
            lamr: r.lamr,
            tp: r.tp,
            fp: r.fp,
            gt: r.gt,
            operating_points: r
                .operating_points
                .iter()
                .map(|p| (p.confidence, p.precision, p.recall, p.fppi, p.miss_rate))
                .collect(),
        }
    }
}

fn eval_inputs(
    detections: Vec<(usize, PyBox, f64)>,
    ground_truth: Vec<Vec<PyBox>>,
) -> PyResult<(Vec<Detection>, Vec<Vec<BBox>>)> {
    let dets = detections
        .into_iter()
        .map(|(image_id, b, confidence)| {
            Ok(Detection {
                image_id,
                bbox: to_bbox(b)?,
                confidence,
            })
        })
        .collect::<PyResult<_>>()?;
    let gts = ground_truth
        .into_iter()
        .map(|boxes| boxes.into_iter().map(to_bbox).collect::<PyResult<_>>())
        .collect::<PyResult<_>>()?;
    Ok((dets, gts))
}

/// Scores `(image_id, box, confidence)` detections against per-image
/// ground-truth boxes at one overlap threshold.
#[pyfunction]
fn evaluate(
    detections: Vec<(usize, PyBox, f64)>,
    ground_truth: Vec<Vec<PyBox>>,
    ot: f64,
) -> PyResult<PyEvalReport> {
    let (dets, gts) = eval_inputs(detections, ground_truth)?;
    let images = gts.len();
    det_eval::evaluate(&dets, &gts, images, ot)
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (detections, ground_truth, ots = None))]
fn ot_sweep(
    detections: Vec<(usize, PyBox, f64)>,
    ground_truth: Vec<Vec<PyBox>>,
    ots: Option<Vec<f64>>,
) -> PyResult<Vec<PyEvalReport>> {
    let (dets, gts) = eval_inputs(detections, ground_truth)?;
    let ots = ots.unwrap_or_else(det_eval::default_ot_grid);
    let images = gts.len();
    let reports = det_eval::ot_sweep(&dets, &gts, images, &ots).map_err(err)?;
    Ok(reports.into_iter().map(Into::into).collect())
}

/// `(tile-local box, clipped)` pairs keyed by tile id (`r{row}_c{col}`);
/// every tile appears.
#[pyfunction]
#[pyo3(signature = (boxes, slide_width, slide_height, tile_size = 4000, overlap = 0))]
fn tile_labels(
    boxes: Vec<PyBox>,
    slide_width: u32,
    slide_height: u32,
    tile_size: u32,
    overlap: u32,
) -> PyResult<BTreeMap<String, Vec<(PyBox, bool)>>> {
    let spec = TileSpec::new(tile_size, overlap, slide_width, slide_height).map_err(err)?;
    let boxes = boxes
        .into_iter()
        .map(to_bbox)
        .collect::<PyResult<Vec<_>>>()?;
    let tiled = tiler::tile_labels(&boxes, &spec).map_err(err)?;
    Ok(tiled
        .labels
        .iter()
        .map(|(id, labels)| {
            (
                id.to_string(),
                labels
                    .iter()
                    .map(|l| (from_bbox(&l.bbox), l.clipped))
                    .collect(),
            )
        })
        .collect())
}

/// Shifts per-tile `(box, confidence)` detections to slide coordinates and
/// suppresses duplicates across tiles.
#[pyfunction]
#[pyo3(signature = (per_tile, slide_width, slide_height, tile_size = 4000, overlap = 0))]
fn merge_tile_detections(
    per_tile: HashMap<String, Vec<(PyBox, f64)>>,
    slide_width: u32,
    slide_height: u32,
    tile_size: u32,
    overlap: u32,
) -> PyResult<Vec<(PyBox, f64)>> {
    let spec = TileSpec::new(tile_size, overlap, slide_width, slide_height).map_err(err)?;
    let mut map = BTreeMap::new();
    for (id, dets) in per_tile {
        let id: TileId = id.parse().map_err(err)?;
        let dets = dets
            .into_iter()
            .map(|(b, confidence)| {
                Ok(ScoredBox {
                    bbox: to_bbox(b)?,
                    confidence,
                })
            })
            .collect::<PyResult<Vec<_>>>()?;
        map.insert(id, dets);
    }
    let merged = tiler::merge_tile_detections(&map, &spec).map_err(err)?;
    Ok(merged
        .iter()
        .map(|d| (from_bbox(&d.bbox), d.confidence))
        .collect())
}

#[pyclass(name = "Session", frozen)]
struct PySession {
    inner: GazeSession,
}

#[pymethods]
impl PySession {
    /// Parses JSON-Lines session text.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let parsed = parse_session(Cursor::new(text.as_bytes())).map_err(err)?;
        Ok(Self {
            inner: parsed.session,
        })
    }

    fn to_jsonl(&self) -> PyResult<String> {
        let mut out = Vec::new();
        serialize_session(&self.inner, &mut out).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(String::from_utf8(out).expect("serialised as UTF-8"))
    }

    #[getter]
    fn slide_size(&self) -> (u32, u32) {
        (
            self.inner.geometry.slide_width,
            self.inner.geometry.slide_height,
        )
    }

    fn sample_count(&self) -> usize {
        self.inner.samples.len()
    }

    /// Slide-space `(x, y, t_ms)` points after viewport projection.
    fn project(&self) -> PyResult<Vec<(f64, f64, f64)>> {
        let p = project_trace(&self.inner).map_err(err)?;
        Ok(p.trace.points.iter().map(|q| (q.x, q.y, q.t_ms)).collect())
    }
}

#[pyclass(name = "Scene", frozen, get_all)]
struct PyScene {
    /// `(cx, cy, rx, ry)` per ROI.
    rois: Vec<(f64, f64, f64, f64)>,
    gt_boxes: Vec<PyBox>,
    gt_mask: PyBinaryMask,
    session: Py<PySession>,
}

/// Synthetic scene plus a simulated gaze session over it, both determined by
/// `seed`.
#[pyfunction]
#[pyo3(signature = (seed, roi_count = 5, radius_range = (200.0, 600.0), slide_size = (40_000, 40_000), downsample = 16, pan_zoom = false))]
fn simulate(
    py: Python<'_>,
    seed: u64,
    roi_count: usize,
    radius_range: (f64, f64),
    slide_size: (u32, u32),
    downsample: u32,
    pan_zoom: bool,
) -> PyResult<PyScene> {
    let geometry = SlideGeometry {
        slide_width: slide_size.0,
        slide_height: slide_size.1,
        mpp: 0.4952,
        screen_width: 1920,
        screen_height: 1080,
    };
    let grid = GridSpec::for_slide(slide_size.0, slide_size.1, downsample).map_err(err)?;
    let params = SimParams {
        pan_zoom,
        ..SimParams::default()
    };
    let case = simulator::synthetic_case(seed, roi_count, radius_range, geometry, grid, &params)
        .map_err(err)?;
    Ok(PyScene {
        rois: case
            .scene
            .rois
            .iter()
            .map(|e| (e.cx, e.cy, e.rx, e.ry))
            .collect(),
        gt_boxes: case.scene.gt_boxes.iter().map(from_bbox).collect(),
        gt_mask: PyBinaryMask {
            inner: case.scene.gt_mask,
        },
        session: Py::new(
            py,
            PySession {
                inner: case.session,
            },
        )?,
    })
}

#[pyfunction]
fn format_labels(boxes: Vec<PyBox>, width: u32, height: u32) -> PyResult<String> {
    let boxes = boxes
        .into_iter()
        .map(to_bbox)
        .collect::<PyResult<Vec<_>>>()?;
    Ok(formats::format_labels(&boxes, width, height))
}

/// `(class_id, box, confidence or None)` per line.
#[pyfunction]
fn parse_labels(text: &str, width: u32, height: u32) -> PyResult<Vec<(u32, PyBox, Option<f64>)>> {
    let records = formats::parse_labels(text, width, height).map_err(err)?;
    Ok(records
        .iter()
        .map(|r| (r.class_id, from_bbox(&r.bbox), r.confidence))
        .collect())
}

/// Seconds per label by method from `(annotator, method, total_seconds,
/// label_count)` records: `{method: (mean_of_annotators, pooled)}` and
/// `{other_method: saving}` for gaze against each other method.
#[pyfunction]
fn timing_report(records: Vec<(String, String, f64, u32)>) -> PyResult<TimingSummary> {
    let records = records
        .into_iter()
        .map(|(annotator, method, total_seconds, label_count)| {
            let method: Method = serde_json::from_value(serde_json::Value::String(method.clone()))
                .map_err(|_| PyValueError::new_err(format!("unknown method `{method}`")))?;
            Ok(TimingRecord {
                annotator,
                method,
                total_seconds,
                label_count,
            })
        })
        .collect::<PyResult<Vec<_>>>()?;
    let r = report::timing_report(&records).map_err(err)?;
    let averages = r
        .methods
        .iter()
        .map(|m| (m.method.to_string(), (m.mean_of_annotators, m.pooled)))
        .collect();
    let savings = r
        .gaze_savings
        .iter()
        .map(|s| (s.versus.to_string(), s.fraction))
        .collect();
    Ok((averages, savings))
}

#[pymodule]
fn gazekde_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGridSpec>()?;
    m.add_class::<PyBinaryMask>()?;
    m.add_class::<PyDensityGrid>()?;
    m.add_class::<PyThresholdStats>()?;
    m.add_class::<PyEvalReport>()?;
    m.add_class::<PySession>()?;
    m.add_class::<PyScene>()?;
    m.add_function(wrap_pyfunction!(density_grid, m)?)?;
    m.add_function(wrap_pyfunction!(kde_mask, m)?)?;
    m.add_function(wrap_pyfunction!(merge_masks, m)?)?;
    m.add_function(wrap_pyfunction!(mask_iou, m)?)?;
    m.add_function(wrap_pyfunction!(box_iou, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(ot_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(tile_labels, m)?)?;
    m.add_function(wrap_pyfunction!(merge_tile_detections, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(format_labels, m)?)?;
    m.add_function(wrap_pyfunction!(parse_labels, m)?)?;
    m.add_function(wrap_pyfunction!(timing_report, m)?)?;
    Ok(())
}

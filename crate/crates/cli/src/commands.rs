use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use rayon::prelude::*;
use serde::Serialize;

use gazekde::det_eval::{ot_sweep, Detection};
use gazekde::formats::{
    export_labels, format_labels, load_mask, parse_labels, read_file, to_json_pretty, write_file,
    LabelExport,
};
use gazekde::ingest::{parse_session, project_trace, serialize_session, DropCounts, ParsedSession};
use gazekde::kde::{run_kde_pipeline_detailed, SigmaOutcome};
use gazekde::mask_ops::mask_to_bboxes;
use gazekde::report::{param_sweep, parse_timing_csv, timing_report, SweepItem};
use gazekde::simulator::{synthetic_case, Ellipse, SimParams, SyntheticCase};
use gazekde::tiler::{tile_labels, TileSpec};
use gazekde::{BBox, BinaryMask, Error, GazeTrace, GridSpec, SlideGeometry};

use crate::args::*;
use crate::output::{emit, to_csv};

fn required<'a>(value: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path> {
    match value {
        Some(p) => Ok(p),
        None => bail!(Error::Validation(format!("--{flag} is required"))),
    }
}

fn write_into(out: Option<&Path>, name: &str, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(dir) = out {
        write_file(&dir.join(name), contents)?;
    }
    Ok(())
}

fn read_session(path: &Path) -> Result<ParsedSession> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_session(BufReader::new(file)).map_err(|e| match e {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })?)
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read_file(path)?)
        .map_err(|_| Error::Format(format!("{}: not UTF-8", path.display())).into())
}

// ---------------------------------------------------------------- simulate

fn geometry(scene: &SceneFlags) -> SlideGeometry {
    SlideGeometry {
        slide_width: scene.slide_width,
        slide_height: scene.slide_height,
        mpp: scene.mpp,
        screen_width: scene.screen_width,
        screen_height: scene.screen_height,
    }
}

fn sim_params(gaze: &GazeFlags) -> SimParams {
    SimParams {
        sample_rate_hz: gaze.sample_rate,
        dwell_range_s: (gaze.dwell_min, gaze.dwell_max),
        fixation_jitter: gaze.jitter,
        saccade_samples_per_transition: gaze.saccade_samples,
        distractor_fixations: gaze.distractors,
        distractor_dwell_s: gaze.distractor_dwell,
        seed: 0,
        pan_zoom: gaze.pan_zoom,
    }
}

fn generate(
    seed: u64,
    count: usize,
    scene: &SceneFlags,
    gaze: &GazeFlags,
) -> Result<Vec<(u64, SyntheticCase)>> {
    let geometry = geometry(scene);
    geometry.validate()?;
    let grid = GridSpec::for_slide(scene.slide_width, scene.slide_height, scene.downsample)?;
    let params = sim_params(gaze);
    params.validate()?;
    let seeds: Vec<u64> = (0..count as u64).map(|i| seed.wrapping_add(i)).collect();
    let cases = seeds
        .par_iter()
        .map(|&s| {
            synthetic_case(
                s,
                scene.rois,
                (scene.radius_min, scene.radius_max),
                geometry,
                grid,
                &params,
            )
            .map(|c| (s, c))
        })
        .collect::<gazekde::Result<Vec<_>>>()?;
    Ok(cases)
}

#[derive(Serialize)]
struct SceneRecord<'a> {
    seed: u64,
    session_seed: u64,
    roi_count: usize,
    radius_range: (f64, f64),
    geometry: SlideGeometry,
    grid: GridSpec,
    params: SimParams,
    rois: &'a [Ellipse],
    gt_boxes: &'a [BBox],
}

#[derive(Serialize)]
struct SimulateRow {
    scene: String,
    seed: u64,
    rois: usize,
    samples: usize,
    viewport_events: usize,
}

pub fn simulate(a: &SimulateArgs) -> Result<()> {
    let out = required(&a.out, "out")?;
    let cases = generate(a.seed, a.count, &a.scene, &a.gaze)?;
    let mut rows = Vec::with_capacity(cases.len());
    for (i, (seed, case)) in cases.iter().enumerate() {
        let name = format!("scene_{i:03}");
        let dir = out.join(&name);
        let mut session = Vec::new();
        serialize_session(&case.session, &mut session).map_err(|e| Error::io(&dir, e))?;
        write_file(&dir.join("session.jsonl"), session)?;
        let grid = *case.scene.gt_mask.spec();
        let record = SceneRecord {
            seed: *seed,
            session_seed: seed.wrapping_add(gazekde::simulator::SESSION_SEED_OFFSET),
            roi_count: a.scene.rois,
            radius_range: (a.scene.radius_min, a.scene.radius_max),
            geometry: case.scene.geometry,
            grid,
            params: SimParams {
                seed: seed.wrapping_add(gazekde::simulator::SESSION_SEED_OFFSET),
                ..sim_params(&a.gaze)
            },
            rois: &case.scene.rois,
            gt_boxes: &case.scene.gt_boxes,
        };
        write_file(&dir.join("scene.json"), to_json_pretty(&record))?;
        export_labels(
            LabelExport::MaskPgm(&case.scene.gt_mask),
            &dir.join("gt_mask.pgm"),
        )?;
        export_labels(
            LabelExport::Boxes {
                boxes: &case.scene.gt_boxes,
                width: a.scene.slide_width,
                height: a.scene.slide_height,
            },
            &dir.join("gt_labels.txt"),
        )?;
        rows.push(SimulateRow {
            scene: name,
            seed: *seed,
            rois: case.scene.rois.len(),
            samples: case.session.samples.len(),
            viewport_events: case.session.viewport_events.len(),
        });
    }
    let text = || {
        let mut s = String::new();
        for r in &rows {
            let _ = writeln!(
                s,
                "{}  seed {}  {} ROIs  {} samples  {} viewport events",
                r.scene, r.seed, r.rois, r.samples, r.viewport_events
            );
        }
        s
    };
    emit(
        a.format,
        text,
        || to_json_pretty(&rows),
        || {
            to_csv(
                &["scene", "seed", "rois", "samples", "viewport_events"],
                &rows,
            )
        },
    )
}

// ---------------------------------------------------------------- ingest

#[derive(Serialize)]
struct IngestSummary {
    geometry: SlideGeometry,
    samples: usize,
    viewport_events: usize,
    unknown_records: usize,
    reordered: bool,
    kept: usize,
    dropped: DropCounts,
}

pub fn ingest(a: &IngestArgs) -> Result<()> {
    let parsed = read_session(required(&a.session, "session")?)?;
    let projection = project_trace(&parsed.session)?;
    let summary = IngestSummary {
        geometry: parsed.session.geometry,
        samples: parsed.session.samples.len(),
        viewport_events: parsed.session.viewport_events.len(),
        unknown_records: parsed.unknown_records,
        reordered: parsed.reordered,
        kept: projection.trace.len(),
        dropped: projection.dropped,
    };
    let trace_csv = to_csv(&["x", "y", "t_ms"], &projection.trace.points)?;
    let out = a.out.as_deref();
    write_into(out, "trace.csv", &trace_csv)?;
    write_into(out, "ingest.json", to_json_pretty(&summary))?;
    let text = || {
        let d = &summary.dropped;
        format!(
            "samples {}  viewport events {}  kept {}\ndropped: invalid {}  before first viewport {}  out of bounds {}\nunknown records {}{}\n",
            summary.samples,
            summary.viewport_events,
            summary.kept,
            d.invalid,
            d.before_viewport,
            d.out_of_bounds,
            summary.unknown_records,
            if summary.reordered { "  (records re-sorted by time)" } else { "" },
        )
    };
    emit(
        a.format,
        text,
        || to_json_pretty(&summary),
        || Ok(trace_csv.clone()),
    )
}

// ---------------------------------------------------------------- kde

#[derive(Serialize)]
struct KdeSummary<'a> {
    geometry: SlideGeometry,
    grid: GridSpec,
    n: f64,
    kept: usize,
    dropped: DropCounts,
    per_sigma: &'a [SigmaOutcome],
    mask_cells: usize,
}

#[derive(Serialize)]
struct KdeRow {
    sigma: f64,
    clusters: usize,
    theta_bar: Option<f64>,
    max: Option<f64>,
    tau: Option<f64>,
    mask_cells: usize,
}

pub fn kde(a: &KdeArgs) -> Result<()> {
    let parsed = read_session(required(&a.session, "session")?)?;
    let geometry = parsed.session.geometry;
    let projection = project_trace(&parsed.session)?;
    let grid = GridSpec::for_slide(geometry.slide_width, geometry.slide_height, a.downsample)?;
    let run = run_kde_pipeline_detailed(&projection.trace, &a.sigma, a.n, grid)?;

    let out = a.out.as_deref();
    if let Some(dir) = out {
        export_labels(LabelExport::MaskPgm(&run.mask), &dir.join("mask.pgm"))?;
        export_labels(LabelExport::MaskRle(&run.mask), &dir.join("mask.rle.json"))?;
    }
    let summary = KdeSummary {
        geometry,
        grid,
        n: a.n,
        kept: projection.trace.len(),
        dropped: projection.dropped,
        per_sigma: &run.per_sigma,
        mask_cells: run.mask.count(),
    };
    write_into(out, "kde.json", to_json_pretty(&summary))?;

    let rows: Vec<KdeRow> = run
        .per_sigma
        .iter()
        .map(|o| KdeRow {
            sigma: o.sigma,
            clusters: o.clusters,
            theta_bar: o.threshold.map(|t| t.theta_bar),
            max: o.threshold.map(|t| t.max),
            tau: o.threshold.map(|t| t.tau),
            mask_cells: o.mask_cells,
        })
        .collect();
    let text = || {
        let mut s = format!(
            "{} gaze points on a {}x{} grid ({} px cells), n = {}\n",
            summary.kept, grid.width_cells, grid.height_cells, grid.downsample, a.n
        );
        let _ = writeln!(
            s,
            "{:>10} {:>9} {:>12} {:>12} {:>10} {:>10}",
            "sigma", "clusters", "theta_bar", "max", "tau", "cells"
        );
        for r in &rows {
            let f = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                "{:>10} {:>9} {:>12} {:>12} {:>10} {:>10}",
                r.sigma,
                r.clusters,
                f(r.theta_bar),
                f(r.max),
                f(r.tau),
                r.mask_cells
            );
        }
        let _ = writeln!(s, "merged mask: {} cells", summary.mask_cells);
        s
    };
    emit(
        a.format,
        text,
        || to_json_pretty(&summary),
        || {
            to_csv(
                &["sigma", "clusters", "theta_bar", "max", "tau", "mask_cells"],
                &rows,
            )
        },
    )
}

// ---------------------------------------------------------------- boxes

#[derive(Serialize)]
struct BoxesSummary<'a> {
    slide_width: u32,
    slide_height: u32,
    boxes: &'a [BBox],
    discarded: usize,
}

pub fn boxes(a: &BoxesArgs) -> Result<()> {
    let mask = load_mask(required(&a.mask, "mask")?)?;
    let spec = *mask.spec();
    let extraction = mask_to_bboxes(&mask, a.min_area);
    let out = a.out.as_deref();
    if let Some(dir) = out {
        export_labels(
            LabelExport::Boxes {
                boxes: &extraction.boxes,
                width: spec.slide_width,
                height: spec.slide_height,
            },
            &dir.join("labels.txt"),
        )?;
    }
    let summary = BoxesSummary {
        slide_width: spec.slide_width,
        slide_height: spec.slide_height,
        boxes: &extraction.boxes,
        discarded: extraction.discarded,
    };
    write_into(out, "boxes.json", to_json_pretty(&summary))?;
    let text = || {
        let mut s = format!(
            "{} boxes, {} components below the minimum area\n",
            extraction.boxes.len(),
            extraction.discarded
        );
        for b in &extraction.boxes {
            let _ = writeln!(s, "{} {} {} {}", b.x_min, b.y_min, b.x_max, b.y_max);
        }
        s
    };
    emit(
        a.format,
        text,
        || to_json_pretty(&summary),
        || to_csv(&["x_min", "y_min", "x_max", "y_max"], &extraction.boxes),
    )
}

// ---------------------------------------------------------------- tile

#[derive(Serialize)]
struct TileEntry {
    x0: i64,
    y0: i64,
    labels: usize,
    clipped: usize,
}

#[derive(Serialize)]
struct TileManifest {
    spec: TileSpec,
    only_with_labels: bool,
    boxes: usize,
    tiles: BTreeMap<String, TileEntry>,
}

#[derive(Serialize)]
struct TileRow<'a> {
    tile: &'a str,
    x0: i64,
    y0: i64,
    labels: usize,
    clipped: usize,
}

pub fn tile(a: &TileArgs) -> Result<()> {
    let text_in = read_text(required(&a.labels, "labels")?)?;
    let out = required(&a.out, "out")?;
    let spec = TileSpec::new(a.tile_size, a.overlap, a.slide_width, a.slide_height)?;
    let boxes: Vec<BBox> = parse_labels(&text_in, a.slide_width, a.slide_height)?
        .into_iter()
        .map(|r| r.bbox)
        .collect();
    let tiled = tile_labels(&boxes, &spec)?;

    let mut tiles = BTreeMap::new();
    let mut rows = Vec::new();
    for t in &tiled.tiles {
        let labels = &tiled.labels[&t.id];
        if a.only_with_labels && labels.is_empty() {
            continue;
        }
        let id = t.id.to_string();
        let local: Vec<BBox> = labels.iter().map(|l| l.bbox).collect();
        write_file(
            &out.join("tiles").join(format!("{id}.txt")),
            format_labels(&local, a.tile_size, a.tile_size),
        )?;
        let clipped = labels.iter().filter(|l| l.clipped).count();
        rows.push((id.clone(), t.x0, t.y0, labels.len(), clipped));
        tiles.insert(
            id,
            TileEntry {
                x0: t.x0,
                y0: t.y0,
                labels: labels.len(),
                clipped,
            },
        );
    }
    let manifest = TileManifest {
        spec,
        only_with_labels: a.only_with_labels,
        boxes: boxes.len(),
        tiles,
    };
    let manifest_json = to_json_pretty(&manifest);
    write_file(&out.join("manifest.json"), &manifest_json)?;

    let csv_rows: Vec<TileRow> = rows
        .iter()
        .map(|(tile, x0, y0, labels, clipped)| TileRow {
            tile,
            x0: *x0,
            y0: *y0,
            labels: *labels,
            clipped: *clipped,
        })
        .collect();
    let text = || {
        let labelled = rows.iter().filter(|r| r.3 > 0).count();
        let labels: usize = rows.iter().map(|r| r.3).sum();
        format!(
            "{} boxes -> {} tiles written ({} with labels), {} tile labels\n",
            boxes.len(),
            rows.len(),
            labelled,
            labels
        )
    };
    emit(
        a.format,
        text,
        || manifest_json.clone(),
        || to_csv(&["tile", "x0", "y0", "labels", "clipped"], &csv_rows),
    )
}

// ---------------------------------------------------------------- eval

/// `start:stop:step` (inclusive) or a comma-separated list.
pub fn parse_ot(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Validation(format!("invalid overlap thresholds `{spec}`"));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<f64> = spec
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let [start, stop, step] = parts[..] else {
            bail!(bad());
        };
        if !(step > 0.0 && stop >= start) {
            bail!(bad());
        }
        let steps = ((stop - start) / step + 1e-9).floor() as usize;
        // snapped so 0.1 + 4 * 0.05 prints as 0.3
        (0..=steps)
            .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
            .collect()
    } else {
        spec.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?
    };
    if values.is_empty() || values.iter().any(|v| !(0.0..=1.0).contains(v)) {
        bail!(bad());
    }
    Ok(values)
}

/// Label files keyed by image name: a single file is one image, a directory
/// holds one `.txt` per image.
fn label_set(path: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let meta = std::fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let mut files = BTreeMap::new();
    if meta.is_dir() {
        for entry in std::fs::read_dir(path).map_err(|e| Error::io(path, e))? {
            let p = entry.map_err(|e| Error::io(path, e))?.path();
            if p.extension().is_some_and(|e| e == "txt") {
                let stem = p
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                files.insert(stem, p);
            }
        }
    } else {
        files.insert(String::new(), path.to_path_buf());
    }
    Ok(files)
}

#[derive(Serialize)]
struct EvalRow {
    ot: f64,
    ap: f64,
    lamr: f64,
    tp: usize,
    fp: usize,
    gt: usize,
}

fn ot_name(ot: f64) -> String {
    let hundredths = ot * 100.0;
    if (hundredths - hundredths.round()).abs() < 1e-9 {
        format!("{ot:.2}")
    } else {
        format!("{ot}")
    }
}

pub fn eval(a: &EvalArgs) -> Result<()> {
    let ots = parse_ot(&a.ot)?;
    let gt_files = label_set(required(&a.gt, "gt")?)?;
    let det_files = label_set(required(&a.detections, "detections")?)?;
    if gt_files.contains_key("") != det_files.contains_key("") {
        bail!(Error::Validation(
            "--gt and --detections must both be files or both be directories".into()
        ));
    }
    let images: Vec<&String> = {
        let mut names: Vec<&String> = gt_files.keys().chain(det_files.keys()).collect();
        names.sort();
        names.dedup();
        names
    };
    let (w, h) = (a.image_width, a.image_height);
    let mut gts = Vec::with_capacity(images.len());
    let mut dets = Vec::new();
    for (image_id, name) in images.iter().enumerate() {
        let boxes = match gt_files.get(*name) {
            Some(p) => parse_labels(&read_text(p)?, w, h)?
                .into_iter()
                .map(|r| r.bbox)
                .collect(),
            None => Vec::new(),
        };
        gts.push(boxes);
        if let Some(p) = det_files.get(*name) {
            for (i, r) in parse_labels(&read_text(p)?, w, h)?.into_iter().enumerate() {
                let Some(confidence) = r.confidence else {
                    bail!(Error::Validation(format!(
                        "{} line {}: detection without confidence",
                        p.display(),
                        i + 1
                    )));
                };
                dets.push(Detection {
                    image_id,
                    bbox: r.bbox,
                    confidence,
                });
            }
        }
    }

    let reports = ot_sweep(&dets, &gts, images.len(), &ots)?;
    let rows: Vec<EvalRow> = reports
        .iter()
        .map(|r| EvalRow {
            ot: r.ot,
            ap: r.ap,
            lamr: r.lamr,
            tp: r.tp,
            fp: r.fp,
            gt: r.gt,
        })
        .collect();
    let main_csv = to_csv(&["ot", "ap", "lamr", "tp", "fp", "gt"], &rows)?;
    if let Some(dir) = a.out.as_deref() {
        write_file(&dir.join("eval.csv"), &main_csv)?;
        write_file(&dir.join("eval.json"), to_json_pretty(&reports))?;
        for r in &reports {
            write_file(
                &dir.join("curves").join(format!("ot_{}.csv", ot_name(r.ot))),
                to_csv(
                    &["confidence", "precision", "recall", "fppi", "miss_rate"],
                    &r.operating_points,
                )?,
            )?;
        }
    }
    let text = || {
        let mut s = format!(
            "{} images, {} ground-truth boxes, {} detections\n",
            images.len(),
            gts.iter().map(Vec::len).sum::<usize>(),
            dets.len()
        );
        let _ = writeln!(
            s,
            "{:>6} {:>8} {:>8} {:>6} {:>6} {:>6}",
            "OT", "AP", "LAMR", "TP", "FP", "GT"
        );
        for r in &rows {
            let _ = writeln!(
                s,
                "{:>6} {:>8.4} {:>8.4} {:>6} {:>6} {:>6}",
                ot_name(r.ot),
                r.ap,
                r.lamr,
                r.tp,
                r.fp,
                r.gt
            );
        }
        s
    };
    emit(
        a.format,
        text,
        || to_json_pretty(&reports),
        || Ok(main_csv.clone()),
    )
}

// ---------------------------------------------------------------- sweep

fn load_scene_dir(dir: &Path) -> Result<Vec<(String, GazeTrace, BinaryMask)>> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let p = entry.map_err(|e| Error::io(dir, e))?.path();
        if p.join("session.jsonl").is_file() {
            names.push(p);
        }
    }
    names.sort();
    if names.is_empty() {
        bail!(Error::Validation(format!(
            "{}: no scene directories with session.jsonl",
            dir.display()
        )));
    }
    names
        .par_iter()
        .map(|p| -> Result<_> {
            let parsed = read_session(&p.join("session.jsonl"))?;
            let trace = project_trace(&parsed.session)?.trace;
            let gt = load_mask(&p.join("gt_mask.pgm"))?;
            let name = p
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            Ok((name, trace, gt))
        })
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    sigma: f64,
    n: f64,
    mean_iou: f64,
    std_dev: f64,
    count: usize,
}

#[derive(Serialize)]
struct ClusterRow<'a> {
    scene: &'a str,
    sigma: f64,
    clusters: usize,
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    scenes: &'a [String],
    result: &'a gazekde::report::SweepResult,
}

pub fn sweep(a: &SweepArgs) -> Result<()> {
    let data: Vec<(String, GazeTrace, BinaryMask)> = match &a.scenes {
        Some(dir) => load_scene_dir(dir)?,
        None => generate(a.seed, a.count, &a.scene, &a.gaze)?
            .into_iter()
            .map(|(seed, case)| -> Result<_> {
                let trace = project_trace(&case.session)?.trace;
                Ok((format!("seed_{seed}"), trace, case.scene.gt_mask))
            })
            .collect::<Result<_>>()?,
    };
    let items: Vec<SweepItem> = data
        .iter()
        .map(|(_, trace, gt_mask)| SweepItem { trace, gt_mask })
        .collect();
    let result = param_sweep(&items, &a.sigma, &a.n)?;
    let names: Vec<String> = data.iter().map(|(n, _, _)| n.clone()).collect();

    let rows: Vec<SweepRow> = result
        .cells
        .iter()
        .map(|c| SweepRow {
            sigma: c.sigma,
            n: c.n,
            mean_iou: c.summary.mean,
            std_dev: c.summary.std_dev,
            count: c.summary.count,
        })
        .collect();
    let cluster_rows: Vec<ClusterRow> = names
        .iter()
        .zip(&result.cluster_counts)
        .flat_map(|(scene, counts)| {
            result
                .sigmas
                .iter()
                .zip(counts)
                .map(move |(&sigma, &clusters)| ClusterRow {
                    scene,
                    sigma,
                    clusters,
                })
        })
        .collect();
    let main_csv = to_csv(&["sigma", "n", "mean_iou", "std_dev", "count"], &rows)?;
    let summary = SweepSummary {
        scenes: &names,
        result: &result,
    };
    let json = to_json_pretty(&summary);
    if let Some(dir) = a.out.as_deref() {
        write_file(&dir.join("sweep.csv"), &main_csv)?;
        write_file(
            &dir.join("clusters.csv"),
            to_csv(&["scene", "sigma", "clusters"], &cluster_rows)?,
        )?;
        write_file(&dir.join("sweep.json"), &json)?;
    }
    let text = || {
        let mut s = format!("mean mask IOU (std) over {} scenes\n", names.len());
        let _ = write!(s, "{:>8}", "sigma");
        for n in &result.ns {
            let _ = write!(s, " {:>16}", format!("n={n}"));
        }
        s.push('\n');
        for (si, sigma) in result.sigmas.iter().enumerate() {
            let _ = write!(s, "{sigma:>8}");
            for ni in 0..result.ns.len() {
                let c = result.cell(si, ni);
                let _ = write!(
                    s,
                    " {:>16}",
                    format!("{:.4} ({:.4})", c.summary.mean, c.summary.std_dev)
                );
            }
            s.push('\n');
        }
        let b = result.best_cell();
        let _ = writeln!(
            s,
            "best: sigma={} n={} mIOU={:.4}",
            b.sigma, b.n, b.summary.mean
        );
        s
    };
    emit(a.format, text, || json.clone(), || Ok(main_csv.clone()))
}

// ---------------------------------------------------------------- timing

#[derive(Serialize)]
struct TimingRow<'a> {
    method: String,
    scope: &'a str,
    seconds_per_label: f64,
}

pub fn timing(a: &TimingArgs) -> Result<()> {
    let records = parse_timing_csv(&read_text(required(&a.input, "input")?)?)?;
    let report = timing_report(&records)?;
    let mut rows = Vec::new();
    for m in &report.methods {
        for (annotator, v) in &m.per_annotator {
            rows.push(TimingRow {
                method: m.method.to_string(),
                scope: annotator,
                seconds_per_label: *v,
            });
        }
        rows.push(TimingRow {
            method: m.method.to_string(),
            scope: "mean_of_annotators",
            seconds_per_label: m.mean_of_annotators,
        });
        rows.push(TimingRow {
            method: m.method.to_string(),
            scope: "pooled",
            seconds_per_label: m.pooled,
        });
    }
    let main_csv = to_csv(&["method", "scope", "seconds_per_label"], &rows)?;
    let json = to_json_pretty(&report);
    write_into(a.out.as_deref(), "timing.csv", &main_csv)?;
    write_into(a.out.as_deref(), "timing.json", &json)?;
    let text = || {
        let mut s = String::from("seconds per label\n");
        for m in &report.methods {
            let _ = write!(s, "{:<9}", m.method.to_string());
            for (annotator, v) in &m.per_annotator {
                let _ = write!(s, "  {annotator} {v:.2}");
            }
            let _ = writeln!(
                s,
                "  mean {:.2}  pooled {:.2}",
                m.mean_of_annotators, m.pooled
            );
        }
        for sv in &report.gaze_savings {
            let _ = writeln!(
                s,
                "gaze vs {}: {:.1}% less time per label (pooled {:.1}%)",
                sv.versus,
                100.0 * sv.fraction,
                100.0 * sv.pooled_fraction
            );
        }
        s
    };
    emit(a.format, text, || json.clone(), || Ok(main_csv.clone()))
}

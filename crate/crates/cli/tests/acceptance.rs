//! Acceptance checks. Runs as a plain binary (`harness = false`) and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;

use gazekde::det_eval::{default_ot_grid, evaluate, match_detections, Detection};
use gazekde::ingest::project_trace;
use gazekde::kde::{
    build_density_grid, compute_threshold, threshold_to_mask, Cluster, DensityGrid,
};
use gazekde::mask_ops::mask_iou;
use gazekde::report::{param_sweep, parse_timing_csv, timing_report, Method, SweepItem};
use gazekde::simulator::{generate_scene, rng_from_seed, synthetic_case, SimParams};
use gazekde::tiler::{merge_tile_detections, tile_labels, ScoredBox, TileSpec};
use gazekde::{BBox, BinaryMask, GazeTrace, GridSpec, SlideGeometry, TracePoint};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn geometry(w: u32, h: u32) -> SlideGeometry {
    SlideGeometry {
        slide_width: w,
        slide_height: h,
        mpp: 0.4952,
        screen_width: 1920,
        screen_height: 1080,
    }
}

fn kde_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_from_seed(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let w = rng.random_range(1..=128usize);
        let h = rng.random_range(1..=128usize);
        let ds = [1u32, 4, 16][rng.random_range(0..3)];
        let spec = GridSpec::from_cells(w, h, ds).map_err(|e| e.to_string())?;
        let (sw, sh) = ((w as u32 * ds) as f64, (h as u32 * ds) as f64);
        let sigma = rng.random_range(0.25..0.2 * sw.max(sh));
        let pts: Vec<TracePoint> = (0..rng.random_range(0..=200))
            .map(|i| TracePoint {
                x: rng.random_range(0.0..sw),
                y: rng.random_range(0.0..sh),
                t_ms: i as f64,
            })
            .collect();
        let grid = build_density_grid(&GazeTrace::new(pts.clone()), sigma, spec)
            .map_err(|e| e.to_string())?;
        let r2 = 9.0 * sigma * sigma;
        for cy in 0..h {
            for cx in 0..w {
                let (x, y) = ((cx as f64 + 0.5) * ds as f64, (cy as f64 + 0.5) * ds as f64);
                let mut want = 0.0;
                for p in &pts {
                    let d2 = (x - p.x).powi(2) + (y - p.y).powi(2);
                    if d2 <= r2 {
                        want += (-d2 / (2.0 * sigma * sigma)).exp();
                    }
                }
                worst = worst.max((grid.value(cx, cy) - want).abs());
            }
        }
    }
    let took = start.elapsed();
    check(worst <= 1e-9, format!("max deviation {worst:e}"))?;
    check(took < Duration::from_secs(10), format!("took {took:?}"))?;
    Ok(format!(
        "100 traces, max deviation {worst:.1e}, {:.2} s",
        took.as_secs_f64()
    ))
}

fn level_set_radius() -> Outcome {
    let ds = 16u32;
    let spec = GridSpec::from_cells(101, 101, ds).map_err(|e| e.to_string())?;
    let (cx, cy) = spec.cell_center(50, 50);
    let trace = GazeTrace::new(vec![TracePoint {
        x: cx,
        y: cy,
        t_ms: 0.0,
    }]);
    let grid = build_density_grid(&trace, 25.0 * ds as f64, spec).map_err(|e| e.to_string())?;
    let mask = threshold_to_mask(&grid, 0.5).map_err(|e| e.to_string())?;
    let want = 25.0 * (2.0 * 2f64.ln()).sqrt();
    let reach = |dx: i64, dy: i64| {
        let mut k = 0i64;
        while mask.get((50 + (k + 1) * dx) as usize, (50 + (k + 1) * dy) as usize) {
            k += 1;
        }
        k as f64
    };
    let radii = [reach(1, 0), reach(-1, 0), reach(0, 1), reach(0, -1)];
    for r in radii {
        check((r - want).abs() <= 1.0, format!("radius {r} vs {want:.2}"))?;
    }
    Ok(format!("radii {radii:?} cells vs {want:.2}"))
}

fn threshold_fixtures() -> Outcome {
    let spec = GridSpec::from_cells(4, 1, 16).map_err(|e| e.to_string())?;
    let grid = |values: Vec<f64>| DensityGrid {
        spec,
        sigma: 1.0,
        values,
    };
    let uniform = grid(vec![4.0, 4.0, 4.0, 0.0]);
    let one = [Cluster {
        cells: vec![0, 1, 2],
        mean: 4.0,
    }];
    for n in [1.0, 2.5, 5.0, 9.0] {
        let s = compute_threshold(&one, &uniform, n).map_err(|e| e.to_string())?;
        check(
            s.tau == n,
            format!("uniform cluster: tau {} for n {n}", s.tau),
        )?;
    }
    let g = grid(vec![8.0, 2.0, 0.0, 1.0]);
    let two = [
        Cluster {
            cells: vec![0, 1],
            mean: 5.0,
        },
        Cluster {
            cells: vec![3],
            mean: 1.0,
        },
    ];
    let s = compute_threshold(&two, &g, 2.0).map_err(|e| e.to_string())?;
    check(
        s.theta_bar == 3.0 && s.max == 8.0 && s.tau == 0.75,
        format!("theta_bar {} m {} tau {}", s.theta_bar, s.max, s.tau),
    )?;
    Ok("uniform cluster gives tau = n; theta_bar 3, m 8, n 2 gives tau 0.75".into())
}

fn mask_iou_oracle() -> Outcome {
    let mut rng = rng_from_seed(4);
    for i in 0..1000 {
        let w = rng.random_range(1..=64usize);
        let h = rng.random_range(1..=64usize);
        let spec = GridSpec::from_cells(w, h, 16).map_err(|e| e.to_string())?;
        let pa = rng.random_range(0.0..1.0);
        let pb = rng.random_range(0.0..1.0);
        let a: Vec<bool> = (0..w * h).map(|_| rng.random_bool(pa)).collect();
        let b: Vec<bool> = (0..w * h).map(|_| rng.random_bool(pb)).collect();
        let inter = a.iter().zip(&b).filter(|(x, y)| **x && **y).count();
        let union = a.iter().zip(&b).filter(|(x, y)| **x || **y).count();
        let want = if union == 0 {
            1.0
        } else {
            inter as f64 / union as f64
        };
        let ma = BinaryMask::from_bits(spec, a).map_err(|e| e.to_string())?;
        let mb = BinaryMask::from_bits(spec, b).map_err(|e| e.to_string())?;
        let ab = mask_iou(&ma, &mb).map_err(|e| e.to_string())?;
        let ba = mask_iou(&mb, &ma).map_err(|e| e.to_string())?;
        check(ab == want, format!("pair {i}: {ab} vs {want}"))?;
        check(ab == ba, format!("pair {i}: asymmetric"))?;
    }

    // translating both masks inside a larger grid leaves the score alone
    let small = GridSpec::from_cells(8, 8, 16).map_err(|e| e.to_string())?;
    let big = GridSpec::from_cells(64, 64, 16).map_err(|e| e.to_string())?;
    let a = |x: usize, y: usize| (2..6).contains(&x) && (1..5).contains(&y);
    let b = |x: usize, y: usize| (3..8).contains(&x) && (2..7).contains(&y);
    let base = mask_iou(
        &BinaryMask::from_fn(small, a),
        &BinaryMask::from_fn(small, b),
    )
    .map_err(|e| e.to_string())?;
    check(base == 9.0 / 32.0, format!("fixture IOU {base}"))?;
    for (dx, dy) in [(0, 0), (1, 0), (0, 17), (40, 33), (56, 56)] {
        let shift = |f: fn(usize, usize) -> bool| {
            BinaryMask::from_fn(big, move |x, y| {
                x >= dx && y >= dy && x - dx < 8 && y - dy < 8 && f(x - dx, y - dy)
            })
        };
        let moved = mask_iou(&shift(a), &shift(b)).map_err(|e| e.to_string())?;
        check(moved == base, format!("shift ({dx}, {dy}): {moved}"))?;
    }
    Ok("1000 random pairs exact and symmetric; 5 translated fixtures equal".into())
}

fn bx(x0: i64, y0: i64, x1: i64, y1: i64) -> BBox {
    BBox::new(x0, y0, x1, y1).expect("valid fixture box")
}

fn det(image_id: usize, bbox: BBox, confidence: f64) -> Detection {
    Detection {
        image_id,
        bbox,
        confidence,
    }
}

struct Golden {
    name: &'static str,
    gts: Vec<Vec<BBox>>,
    dets: Vec<Detection>,
    ot: f64,
    flags: Vec<bool>,
    ap: f64,
    lamr: f64,
}

fn golden_fixtures() -> Vec<Golden> {
    let floor: f64 = 1e-10;
    vec![
        Golden {
            name: "duplicate then partial hit",
            gts: vec![vec![bx(0, 0, 10, 10), bx(20, 0, 30, 10)]],
            dets: vec![
                det(0, bx(0, 0, 10, 10), 0.9),
                det(0, bx(0, 0, 10, 10), 0.8),
                det(0, bx(20, 0, 30, 5), 0.7),
            ],
            ot: 0.5,
            flags: vec![true, false, true],
            ap: 0.5 + 0.5 * (2.0 / 3.0),
            // fppi 0 at miss rate 0.5 for the eight references below 1, then 0 (floored)
            lamr: ((8.0 * 0.5f64.ln() + floor.ln()) / 9.0).exp(),
        },
        Golden {
            name: "partial hit below threshold",
            gts: vec![vec![bx(0, 0, 10, 10), bx(20, 0, 30, 10)]],
            dets: vec![
                det(0, bx(0, 0, 10, 10), 0.9),
                det(0, bx(0, 0, 10, 10), 0.8),
                det(0, bx(20, 0, 30, 5), 0.7),
            ],
            ot: 0.6,
            flags: vec![true, false, false],
            ap: 0.5,
            lamr: 0.5,
        },
        Golden {
            name: "false positive on an empty image ranks first",
            gts: vec![vec![bx(0, 0, 10, 10)], vec![]],
            dets: vec![
                det(1, bx(0, 0, 10, 10), 0.95),
                det(0, bx(0, 0, 10, 10), 0.6),
            ],
            ot: 0.5,
            flags: vec![false, true],
            ap: 0.5,
            // nothing at fppi <= 0.316 (miss rate 1); miss rate 0 at fppi 0.5
            lamr: ((2.0 * floor.ln()) / 9.0).exp(),
        },
        Golden {
            name: "detection takes the better of two overlapping truths",
            gts: vec![vec![bx(0, 0, 10, 10), bx(5, 0, 15, 10)]],
            dets: vec![det(0, bx(4, 0, 14, 10), 0.9), det(0, bx(0, 0, 10, 10), 0.5)],
            ot: 0.75,
            flags: vec![true, true],
            ap: 1.0,
            lamr: floor,
        },
        Golden {
            name: "tied confidence ranks the lower image first",
            gts: vec![vec![bx(0, 0, 10, 10)], vec![bx(0, 0, 10, 10)]],
            dets: vec![
                det(1, bx(0, 0, 10, 10), 0.7),
                det(0, bx(50, 50, 60, 60), 0.7),
            ],
            ot: 0.5,
            flags: vec![false, true],
            ap: 0.5 * 0.5,
            // one operating point at fppi 0.5, miss rate 0.5
            lamr: (2.0 * 0.5f64.ln() / 9.0).exp(),
        },
    ]
}

fn detection_oracle() -> Outcome {
    for g in golden_fixtures() {
        let m = match_detections(&g.dets, &g.gts, g.ot).map_err(|e| e.to_string())?;
        let flags: Vec<bool> = m.ranked.iter().map(|r| r.true_positive).collect();
        check(
            flags == g.flags,
            format!("{}: assignments {flags:?}", g.name),
        )?;
        let r = evaluate(&g.dets, &g.gts, g.gts.len(), g.ot).map_err(|e| e.to_string())?;
        check(
            (r.ap - g.ap).abs() <= 1e-12,
            format!("{}: AP {} vs {}", g.name, r.ap, g.ap),
        )?;
        check(
            (r.lamr - g.lamr).abs() <= 1e-12,
            format!("{}: LAMR {} vs {}", g.name, r.lamr, g.lamr),
        )?;
    }

    let mut rng = rng_from_seed(5);
    let random_box = |rng: &mut rand_chacha::ChaCha8Rng| {
        let (x, y) = (rng.random_range(0..60), rng.random_range(0..60));
        bx(
            x,
            y,
            x + rng.random_range(5..30),
            y + rng.random_range(5..30),
        )
    };
    for i in 0..200 {
        let images = rng.random_range(1..=4usize);
        let gts: Vec<Vec<BBox>> = (0..images)
            .map(|_| {
                (0..rng.random_range(0..6))
                    .map(|_| random_box(&mut rng))
                    .collect()
            })
            .collect();
        if gts.iter().all(Vec::is_empty) {
            continue;
        }
        let dets: Vec<Detection> = (0..rng.random_range(0..12))
            .map(|_| {
                let image = rng.random_range(0..images);
                let b = random_box(&mut rng);
                det(image, b, (rng.random_range(0..=10) as f64) / 10.0)
            })
            .collect();
        let mut prev = f64::INFINITY;
        for ot in default_ot_grid() {
            let ap = evaluate(&dets, &gts, images, ot)
                .map_err(|e| e.to_string())?
                .ap;
            check(
                ap <= prev,
                format!("instance {i}: AP rose to {ap} at OT {ot}"),
            )?;
            prev = ap;
        }
    }
    Ok("5 golden fixtures to 1e-12; AP non-increasing in OT on 200 instances".into())
}

fn end_to_end_recovery() -> Outcome {
    let start = Instant::now();
    let g = geometry(40_000, 40_000);
    let grid = GridSpec::for_slide(40_000, 40_000, 16).map_err(|e| e.to_string())?;
    let mut cases = Vec::new();
    for seed in 0..20u64 {
        let c = synthetic_case(seed, 5, (200.0, 600.0), g, grid, &SimParams::default())
            .map_err(|e| e.to_string())?;
        let trace = project_trace(&c.session).map_err(|e| e.to_string())?.trace;
        cases.push((trace, c.scene.gt_mask));
    }
    let items: Vec<SweepItem> = cases
        .iter()
        .map(|(t, m)| SweepItem {
            trace: t,
            gt_mask: m,
        })
        .collect();
    let sweep = param_sweep(
        &items,
        &[100.0, 200.0, 400.0, 800.0],
        &[1.0, 3.0, 5.0, 7.0, 9.0],
    )
    .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let best = sweep.best_cell();
    check(
        best.summary.mean >= 0.60,
        format!(
            "best mIOU {:.4} at sigma {} n {}",
            best.summary.mean, best.sigma, best.n
        ),
    )?;
    for (i, counts) in sweep.cluster_counts.iter().enumerate() {
        check(
            counts.windows(2).all(|p| p[1] <= p[0]),
            format!("scene {i}: cluster counts {counts:?}"),
        )?;
    }
    check(took < Duration::from_secs(120), format!("took {took:?}"))?;
    Ok(format!(
        "best mIOU {:.4} (std {:.4}) at sigma {} n {}; cluster counts non-increasing; {:.1} s",
        best.summary.mean,
        best.summary.std_dev,
        best.sigma,
        best.n,
        took.as_secs_f64()
    ))
}

fn table_i() -> Outcome {
    let text = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/table_i.csv"),
    )
    .map_err(|e| e.to_string())?;
    let report = timing_report(&parse_timing_csv(&text).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let printed = [
        (Method::Freehand, ["13.84", "18.48", "16.16"]),
        (Method::Bbox, ["5.80", "5.62", "5.71"]),
        (Method::Gaze, ["2.18", "2.66", "2.42"]),
    ];
    for (method, want) in printed {
        let m = report
            .methods
            .iter()
            .find(|m| m.method == method)
            .ok_or(format!("{method} missing"))?;
        let got = [
            format!("{:.2}", m.per_annotator["A"]),
            format!("{:.2}", m.per_annotator["B"]),
            format!("{:.2}", m.mean_of_annotators),
        ];
        check(got == want, format!("{method}: {got:?} vs {want:?}"))?;
    }
    let saving = |versus: Method| {
        report
            .gaze_savings
            .iter()
            .find(|s| s.versus == versus)
            .map(|s| 100.0 * s.fraction)
            .ok_or(format!("no saving vs {versus}"))
    };
    let (bbox, freehand) = (saving(Method::Bbox)?, saving(Method::Freehand)?);
    check(
        format!("{bbox:.1}") == "57.6",
        format!("vs bbox {bbox:.3}%"),
    )?;
    check(
        format!("{freehand:.0}") == "85",
        format!("vs freehand {freehand:.3}%"),
    )?;
    Ok(format!(
        "16.16 / 5.71 / 2.42 s per label; savings {bbox:.1}% and {freehand:.0}%"
    ))
}

fn tiler_round_trip() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut total = 0;
    for seed in 0..100u64 {
        let w = rng.random_range(4000..=40_000u32);
        let h = rng.random_range(4000..=40_000u32);
        let count = rng.random_range(1..=12usize);
        let grid = GridSpec::for_slide(w, h, 16).map_err(|e| e.to_string())?;
        let scene = generate_scene(count, (200.0, 600.0), geometry(w, h), grid, seed)
            .map_err(|e| e.to_string())?;
        let diameter = scene
            .gt_boxes
            .iter()
            .map(|b| b.width().max(b.height()))
            .max()
            .unwrap_or(0);
        let spec = TileSpec::new(4000, diameter as u32, w, h).map_err(|e| e.to_string())?;
        let tiled = tile_labels(&scene.gt_boxes, &spec).map_err(|e| e.to_string())?;
        let per_tile: BTreeMap<_, Vec<ScoredBox>> = tiled
            .labels
            .iter()
            .map(|(id, labels)| {
                let whole = labels
                    .iter()
                    .filter(|l| !l.clipped)
                    .map(|l| ScoredBox {
                        bbox: l.bbox,
                        confidence: 1.0,
                    })
                    .collect();
                (*id, whole)
            })
            .collect();
        let mut merged: Vec<BBox> = merge_tile_detections(&per_tile, &spec)
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|d| d.bbox)
            .collect();
        let mut want = scene.gt_boxes.clone();
        merged.sort();
        want.sort();
        check(
            merged == want,
            format!(
                "scene {seed}: {} boxes back, {} expected",
                merged.len(),
                want.len()
            ),
        )?;
        total += want.len();
    }
    Ok(format!("100 scenes, {total} boxes recovered exactly"))
}

fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).expect("readable output dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).expect("under root").to_path_buf();
                out.insert(rel, std::fs::read(&path).expect("readable output file"));
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_gazekde");
    let work = tempfile::tempdir().map_err(|e| e.to_string())?;
    let w = work.path();
    let run = |args: &[&str], threads: usize, out: &Path| -> Result<Vec<u8>, String> {
        let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        full.push("--out".into());
        full.push(out.display().to_string());
        let res = Command::new(bin)
            .args(&full)
            .current_dir(w)
            .env("RAYON_NUM_THREADS", threads.to_string())
            .output()
            .map_err(|e| e.to_string())?;
        if !res.status.success() {
            return Err(format!(
                "{args:?}: {}",
                String::from_utf8_lossy(&res.stderr)
            ));
        }
        Ok(res.stdout)
    };

    // inputs shared by the later subcommands
    run(
        &[
            "simulate",
            "--seed",
            "7",
            "--count",
            "3",
            "--slide-width",
            "12000",
            "--slide-height",
            "9000",
        ],
        1,
        &w.join("sim"),
    )?;
    let dets = "0 0.5 0.5 0.2 0.2 0.9\n0 0.1 0.1 0.05 0.05 0.4\n";
    std::fs::write(w.join("dets.txt"), dets).map_err(|e| e.to_string())?;
    std::fs::write(w.join("gt.txt"), "0 0.5 0.5 0.2 0.25\n0 0.8 0.8 0.1 0.1\n")
        .map_err(|e| e.to_string())?;
    let timing = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/table_i.csv");
    let timing = timing.display().to_string();

    let session = "sim/scene_000/session.jsonl";
    let commands: Vec<Vec<&str>> = vec![
        vec![
            "simulate",
            "--seed",
            "11",
            "--count",
            "2",
            "--slide-width",
            "10000",
            "--slide-height",
            "8000",
            "--pan-zoom",
        ],
        vec!["ingest", "--session", session],
        vec![
            "kde",
            "--session",
            session,
            "--sigma",
            "100,400",
            "--n",
            "3",
        ],
        vec!["boxes", "--mask", "sim/scene_000/gt_mask.pgm"],
        vec![
            "tile",
            "--labels",
            "sim/scene_000/gt_labels.txt",
            "--slide-width",
            "12000",
            "--slide-height",
            "9000",
            "--overlap",
            "1200",
        ],
        vec!["eval", "--gt", "gt.txt", "--detections", "dets.txt"],
        vec![
            "sweep",
            "--count",
            "3",
            "--slide-width",
            "10000",
            "--slide-height",
            "8000",
            "--sigma",
            "100,400",
            "--n",
            "1,5",
        ],
        vec!["sweep", "--scenes", "sim", "--sigma", "100,400", "--n", "3"],
        vec!["timing", "--input", timing.as_str()],
    ];
    let many = std::thread::available_parallelism()
        .map_or(8, |n| n.get())
        .max(8);
    for (i, args) in commands.iter().enumerate() {
        for format in ["text", "json", "csv"] {
            let mut with_format = args.clone();
            with_format.extend(["--format", format]);
            let mut trees = Vec::new();
            for (run_no, threads) in [1, 1, many].into_iter().enumerate() {
                let out = w.join(format!("out_{i}_{format}_{run_no}"));
                let stdout = run(&with_format, threads, &out)?;
                trees.push((stdout, snapshot(&out)));
            }
            check(
                trees.windows(2).all(|p| p[0] == p[1]),
                format!("{} --format {format}: outputs differ", args[0]),
            )?;
        }
    }
    Ok(format!(
        "{} invocations x 3 formats, each run twice on 1 thread and once on {many}: identical",
        commands.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("KDE matches brute-force summation", kde_oracle),
        ("level-set radius at tau 0.5", level_set_radius),
        ("threshold arithmetic fixtures", threshold_fixtures),
        ("mask IOU matches counting", mask_iou_oracle),
        (
            "detection metric fixtures and AP monotonicity",
            detection_oracle,
        ),
        (
            "end-to-end ROI recovery on simulated scenes",
            end_to_end_recovery,
        ),
        ("timing table reproduction", table_i),
        ("tiler round trip", tiler_round_trip),
        ("CLI output determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS  {:>2}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}. {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "N/A   10. detector benchmarks: training detectors and reproducing their mAP/LAMR curves is out of scope; \
         the metrics code is covered by criterion 5"
    );
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}

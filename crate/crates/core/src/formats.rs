//! On-disk label and mask formats.
//!
//! * Label text: one object per line, `class_id cx cy w h`, centre and size
//!   normalised to the image dimensions with 6 decimals. Detections carry a
//!   sixth `confidence` column.
//! * Masks: binary PGM (`P5`, maxval 255, set cells 255) plus a JSON sidecar
//!   holding the [`GridSpec`], or run-length JSON
//!   `{"dims":[W,H],"runs":[[start,len],...]}` over row-major cells.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_ops::BBox;
use crate::raster::{BinaryMask, GridSpec};
use crate::tiler::ScoredBox;

pub const KP_CLASS_ID: u32 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelRecord {
    pub class_id: u32,
    pub bbox: BBox,
    pub confidence: Option<f64>,
}

fn push_box(out: &mut String, b: &BBox, width: u32, height: u32) {
    let (w, h) = (width as f64, height as f64);
    let cx = (b.x_min + b.x_max) as f64 / 2.0 / w;
    let cy = (b.y_min + b.y_max) as f64 / 2.0 / h;
    let bw = b.width() as f64 / w;
    let bh = b.height() as f64 / h;
    let _ = write!(out, "{KP_CLASS_ID} {cx:.6} {cy:.6} {bw:.6} {bh:.6}");
}

pub fn format_labels(boxes: &[BBox], width: u32, height: u32) -> String {
    let mut out = String::new();
    for b in boxes {
        push_box(&mut out, b, width, height);
        out.push('\n');
    }
    out
}

pub fn format_detections(dets: &[ScoredBox], width: u32, height: u32) -> String {
    let mut out = String::new();
    for d in dets {
        push_box(&mut out, &d.bbox, width, height);
        let _ = writeln!(out, " {:.6}", d.confidence);
    }
    out
}

pub fn parse_labels(text: &str, width: u32, height: u32) -> Result<Vec<LabelRecord>> {
    let (w, h) = (width as f64, height as f64);
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 && fields.len() != 6 {
            return Err(err(format!("expected 5 or 6 fields, got {}", fields.len())));
        }
        let class_id: u32 = fields[0]
            .parse()
            .map_err(|_| err(format!("bad class id `{}`", fields[0])))?;
        let mut nums = [0.0; 5];
        for (slot, f) in nums.iter_mut().zip(&fields[1..]) {
            *slot = f.parse().map_err(|_| err(format!("bad number `{f}`")))?;
            if !(0.0..=1.0).contains(slot) {
                return Err(err(format!("value {f} outside [0, 1]")));
            }
        }
        let [cx, cy, bw, bh, conf] = nums;
        let bbox = BBox::new(
            ((cx - bw / 2.0) * w).round() as i64,
            ((cy - bh / 2.0) * h).round() as i64,
            ((cx + bw / 2.0) * w).round() as i64,
            ((cy + bh / 2.0) * h).round() as i64,
        )
        .map_err(|e| err(e.to_string()))?;
        records.push(LabelRecord {
            class_id,
            bbox,
            confidence: (fields.len() == 6).then_some(conf),
        });
    }
    Ok(records)
}

pub fn encode_pgm(mask: &BinaryMask) -> Vec<u8> {
    let spec = mask.spec();
    let mut out = format!("P5\n{} {}\n255\n", spec.width_cells, spec.height_cells).into_bytes();
    out.extend(mask.bits().iter().map(|&b| if b { 255u8 } else { 0 }));
    out
}

/// Reads a `P5` image; any nonzero pixel is a set cell.
pub fn decode_pgm(bytes: &[u8], spec: GridSpec) -> Result<BinaryMask> {
    let mut pos = 0;
    let mut header = Vec::with_capacity(4);
    while header.len() < 4 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Format("truncated PGM header".into()));
        }
        header.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    if header[0] != "P5" {
        return Err(Error::Format(format!(
            "expected P5 magic, got `{}`",
            header[0]
        )));
    }
    let dims: Vec<usize> = header[1..]
        .iter()
        .map(|t| {
            t.parse()
                .map_err(|_| Error::Format(format!("bad PGM field `{t}`")))
        })
        .collect::<Result<_>>()?;
    if dims[2] != 255 {
        return Err(Error::Format(format!(
            "expected maxval 255, got {}",
            dims[2]
        )));
    }
    if (dims[0], dims[1]) != (spec.width_cells, spec.height_cells) {
        return Err(Error::Dimension {
            left: format!("PGM {}x{}", dims[0], dims[1]),
            right: format!("grid {}x{}", spec.width_cells, spec.height_cells),
        });
    }
    let raster = bytes
        .get(pos..pos + spec.len())
        .ok_or_else(|| Error::Format("truncated PGM raster".into()))?;
    BinaryMask::from_bits(spec, raster.iter().map(|&v| v != 0).collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLengthMask {
    pub dims: [usize; 2],
    pub runs: Vec<[usize; 2]>,
}

pub fn encode_rle(mask: &BinaryMask) -> RunLengthMask {
    let spec = mask.spec();
    let mut runs = Vec::new();
    let mut start = None;
    for (i, &b) in mask.bits().iter().enumerate() {
        match (b, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push([s, i - s]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push([s, spec.len() - s]);
    }
    RunLengthMask {
        dims: [spec.width_cells, spec.height_cells],
        runs,
    }
}

pub fn decode_rle(rle: &RunLengthMask, spec: GridSpec) -> Result<BinaryMask> {
    if rle.dims != [spec.width_cells, spec.height_cells] {
        return Err(Error::Dimension {
            left: format!("RLE {:?}", rle.dims),
            right: format!("grid {}x{}", spec.width_cells, spec.height_cells),
        });
    }
    let mut bits = vec![false; spec.len()];
    for &[start, len] in &rle.runs {
        let run = bits
            .get_mut(start..start + len)
            .ok_or_else(|| Error::Format(format!("run [{start}, {len}] exceeds the grid")))?;
        run.fill(true);
    }
    BinaryMask::from_bits(spec, bits)
}

pub fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable value");
    s.push('\n');
    s
}

/// What [`export_labels`] writes.
pub enum LabelExport<'a> {
    /// Label text normalised to an image of the given size.
    Boxes {
        boxes: &'a [BBox],
        width: u32,
        height: u32,
    },
    Detections {
        dets: &'a [ScoredBox],
        width: u32,
        height: u32,
    },
    /// `<dest>` gets the PGM raster and `<dest>.json` the grid sidecar.
    MaskPgm(&'a BinaryMask),
    MaskRle(&'a BinaryMask),
}

pub fn export_labels(item: LabelExport<'_>, dest: &Path) -> Result<()> {
    match item {
        LabelExport::Boxes {
            boxes,
            width,
            height,
        } => write_file(dest, format_labels(boxes, width, height)),
        LabelExport::Detections {
            dets,
            width,
            height,
        } => write_file(dest, format_detections(dets, width, height)),
        LabelExport::MaskPgm(mask) => {
            write_file(dest, encode_pgm(mask))?;
            write_file(&sidecar_path(dest), to_json_pretty(mask.spec()))
        }
        LabelExport::MaskRle(mask) => {
            let mut json = serde_json::to_string(&encode_rle(mask)).expect("serialisable");
            json.push('\n');
            write_file(dest, json)
        }
    }
}

pub fn sidecar_path(pgm: &Path) -> std::path::PathBuf {
    let mut name = pgm.as_os_str().to_owned();
    name.push(".json");
    name.into()
}

/// Loads a PGM mask and its `.json` grid sidecar.
pub fn load_mask(pgm: &Path) -> Result<BinaryMask> {
    let sidecar = sidecar_path(pgm);
    let spec: GridSpec = serde_json::from_slice(&read_file(&sidecar)?)
        .map_err(|e| Error::Format(format!("{}: {e}", sidecar.display())))?;
    decode_pgm(&read_file(pgm)?, spec)
}

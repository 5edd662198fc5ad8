//! Gaze session files and projection of screen-space gaze into slide space.
//!
//! A session file is JSON Lines: a single `meta` record on the first line,
//! followed by `gaze` and `viewport` records in any order. Viewport events act
//! as a step function: each one governs every sample at or after its
//! timestamp until the next event.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlideGeometry {
    pub slide_width: u32,
    pub slide_height: u32,
    /// Microns per level-0 pixel.
    pub mpp: f64,
    pub screen_width: u32,
    pub screen_height: u32,
}

impl SlideGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.slide_width == 0
            || self.slide_height == 0
            || self.screen_width == 0
            || self.screen_height == 0
        {
            return Err(Error::Validation("geometry dimensions must be > 0".into()));
        }
        if !(self.mpp.is_finite() && self.mpp > 0.0) {
            return Err(Error::Validation(format!(
                "mpp must be > 0, got {}",
                self.mpp
            )));
        }
        Ok(())
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= 0.0 && y >= 0.0 && x < self.slide_width as f64 && y < self.slide_height as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GazeSample {
    pub t_ms: f64,
    pub x: f64,
    pub y: f64,
    pub valid: bool,
}

/// Pan/zoom state: slide px of the screen origin and slide px per screen px.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewportEvent {
    pub t_ms: f64,
    pub offset_x: f64,
    pub offset_y: f64,
    pub scale: f64,
}

impl ViewportEvent {
    pub fn identity(t_ms: f64) -> Self {
        Self {
            t_ms,
            offset_x: 0.0,
            offset_y: 0.0,
            scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GazeSession {
    pub geometry: SlideGeometry,
    pub samples: Vec<GazeSample>,
    pub viewport_events: Vec<ViewportEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub x: f64,
    pub y: f64,
    pub t_ms: f64,
}

/// Gaze points in level-0 slide pixels, all inside the slide.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GazeTrace {
    pub points: Vec<TracePoint>,
}

impl GazeTrace {
    pub fn new(points: Vec<TracePoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct DropCounts {
    pub invalid: usize,
    pub before_viewport: usize,
    pub out_of_bounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub trace: GazeTrace,
    pub dropped: DropCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSession {
    pub session: GazeSession,
    pub unknown_records: usize,
    /// Input records were not in timestamp order and had to be sorted.
    pub reordered: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Meta(SlideGeometry),
    Gaze(GazeSample),
    Viewport(ViewportEvent),
}

pub fn parse_session(reader: impl BufRead) -> Result<ParsedSession> {
    let mut geometry = None;
    let mut samples = Vec::new();
    let mut viewport_events = Vec::new();
    let mut unknown_records = 0;

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        let value: Value = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let kind = value
            .get("kind")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err("record has no string `kind`".into()))?;
        if !matches!(kind, "meta" | "gaze" | "viewport") {
            unknown_records += 1;
            continue;
        }
        let record: Record = serde_json::from_value(value).map_err(|e| parse_err(e.to_string()))?;
        match record {
            Record::Meta(meta) => {
                if geometry.is_some() || !samples.is_empty() || !viewport_events.is_empty() {
                    return Err(Error::Format(format!(
                        "line {line_no}: meta record must appear exactly once, first"
                    )));
                }
                meta.validate()?;
                geometry = Some(meta);
            }
            Record::Gaze(sample) => {
                if geometry.is_none() {
                    return Err(Error::Format("missing meta record".into()));
                }
                if sample.t_ms.is_nan() || sample.t_ms < 0.0 {
                    return Err(Error::Validation(format!(
                        "line {line_no}: negative timestamp {}",
                        sample.t_ms
                    )));
                }
                samples.push(sample);
            }
            Record::Viewport(vp) => {
                if geometry.is_none() {
                    return Err(Error::Format("missing meta record".into()));
                }
                if vp.scale.is_nan() || vp.scale <= 0.0 {
                    return Err(Error::Validation(format!(
                        "line {line_no}: viewport scale must be > 0, got {}",
                        vp.scale
                    )));
                }
                if vp.t_ms.is_nan() || vp.t_ms < 0.0 {
                    return Err(Error::Validation(format!(
                        "line {line_no}: negative timestamp {}",
                        vp.t_ms
                    )));
                }
                viewport_events.push(vp);
            }
        }
    }

    let geometry = geometry.ok_or_else(|| Error::Format("missing meta record".into()))?;
    let reordered = !samples.is_sorted_by(|a, b| a.t_ms <= b.t_ms)
        || !viewport_events.is_sorted_by(|a, b| a.t_ms <= b.t_ms);
    if reordered {
        log::warn!("session records out of timestamp order; re-sorted");
        samples.sort_by(|a, b| a.t_ms.total_cmp(&b.t_ms));
        viewport_events.sort_by(|a, b| a.t_ms.total_cmp(&b.t_ms));
    }
    if unknown_records > 0 {
        log::warn!("skipped {unknown_records} records of unknown kind");
    }

    Ok(ParsedSession {
        session: GazeSession {
            geometry,
            samples,
            viewport_events,
        },
        unknown_records,
        reordered,
    })
}

/// Writes the meta record, then all events merged by timestamp. A viewport
/// event sorts before a gaze sample with the same timestamp.
pub fn serialize_session(session: &GazeSession, mut out: impl Write) -> std::io::Result<()> {
    let mut line = |record: &Record| -> std::io::Result<()> {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")
    };
    line(&Record::Meta(session.geometry))?;
    let (mut si, mut vi) = (0, 0);
    let (samples, vps) = (&session.samples, &session.viewport_events);
    while si < samples.len() || vi < vps.len() {
        let take_vp = match (samples.get(si), vps.get(vi)) {
            (Some(s), Some(v)) => v.t_ms <= s.t_ms,
            (None, Some(_)) => true,
            _ => false,
        };
        if take_vp {
            line(&Record::Viewport(vps[vi]))?;
            vi += 1;
        } else {
            line(&Record::Gaze(samples[si]))?;
            si += 1;
        }
    }
    Ok(())
}

#[inline]
pub fn screen_to_slide(sample: &GazeSample, vp: &ViewportEvent) -> (f64, f64) {
    (
        vp.offset_x + sample.x * vp.scale,
        vp.offset_y + sample.y * vp.scale,
    )
}

/// Algebraic inverse of [`screen_to_slide`].
#[inline]
pub fn slide_to_screen(x: f64, y: f64, vp: &ViewportEvent) -> (f64, f64) {
    ((x - vp.offset_x) / vp.scale, (y - vp.offset_y) / vp.scale)
}

pub fn project_trace(session: &GazeSession) -> Result<Projection> {
    let vps = &session.viewport_events;
    if vps.is_empty() {
        return Err(Error::NoViewport);
    }
    let mut dropped = DropCounts::default();
    let mut points = Vec::with_capacity(session.samples.len());
    // index of the first viewport event strictly after the current sample
    let mut next_vp = 0;

    for sample in &session.samples {
        if !sample.valid {
            dropped.invalid += 1;
            continue;
        }
        while next_vp < vps.len() && vps[next_vp].t_ms <= sample.t_ms {
            next_vp += 1;
        }
        let Some(vp) = next_vp.checked_sub(1).map(|i| &vps[i]) else {
            dropped.before_viewport += 1;
            continue;
        };
        let (x, y) = screen_to_slide(sample, vp);
        if !session.geometry.contains(x, y) {
            dropped.out_of_bounds += 1;
            continue;
        }
        points.push(TracePoint {
            x,
            y,
            t_ms: sample.t_ms,
        });
    }

    Ok(Projection {
        trace: GazeTrace::new(points),
        dropped,
    })
}

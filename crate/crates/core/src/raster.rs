//! Grid geometry shared by density grids and binary masks, plus 8-connected
//! component labelling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DOWNSAMPLE: u32 = 16;

/// Downsampled raster laid over a slide. Cell `(cx, cy)` covers slide pixels
/// `[cx * downsample, (cx + 1) * downsample)` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub downsample: u32,
    pub width_cells: usize,
    pub height_cells: usize,
    pub slide_width: u32,
    pub slide_height: u32,
}

impl GridSpec {
    pub fn for_slide(slide_width: u32, slide_height: u32, downsample: u32) -> Result<Self> {
        if downsample == 0 {
            return Err(Error::Parameter("downsample must be >= 1".into()));
        }
        if slide_width == 0 || slide_height == 0 {
            return Err(Error::Parameter("slide dimensions must be > 0".into()));
        }
        Ok(Self {
            downsample,
            width_cells: slide_width.div_ceil(downsample) as usize,
            height_cells: slide_height.div_ceil(downsample) as usize,
            slide_width,
            slide_height,
        })
    }

    /// A grid whose slide extent is exactly `cells * downsample`.
    pub fn from_cells(width_cells: usize, height_cells: usize, downsample: u32) -> Result<Self> {
        let w = u32::try_from(width_cells * downsample as usize)
            .map_err(|_| Error::Parameter("grid too large".into()))?;
        let h = u32::try_from(height_cells * downsample as usize)
            .map_err(|_| Error::Parameter("grid too large".into()))?;
        Self::for_slide(w, h, downsample)
    }

    pub fn len(&self) -> usize {
        self.width_cells * self.height_cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, cx: usize, cy: usize) -> usize {
        cy * self.width_cells + cx
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width_cells, index / self.width_cells)
    }

    /// Centre of a cell in slide pixels.
    #[inline]
    pub fn cell_center(&self, cx: usize, cy: usize) -> (f64, f64) {
        let ds = self.downsample as f64;
        ((cx as f64 + 0.5) * ds, (cy as f64 + 0.5) * ds)
    }

    pub fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Dimension {
                left: self.describe(),
                right: other.describe(),
            })
        }
    }

    fn describe(&self) -> String {
        format!(
            "{}x{} cells @ {} px/cell",
            self.width_cells, self.height_cells, self.downsample
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    spec: GridSpec,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(spec: GridSpec) -> Self {
        Self {
            spec,
            bits: vec![false; spec.len()],
        }
    }

    pub fn from_bits(spec: GridSpec, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != spec.len() {
            return Err(Error::Dimension {
                left: format!("{} bits", bits.len()),
                right: format!("{} cells", spec.len()),
            });
        }
        Ok(Self { spec, bits })
    }

    pub fn from_fn(spec: GridSpec, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(spec.len());
        for cy in 0..spec.height_cells {
            for cx in 0..spec.width_cells {
                bits.push(f(cx, cy));
            }
        }
        Self { spec, bits }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, cx: usize, cy: usize) -> bool {
        self.bits[self.spec.index(cx, cy)]
    }

    pub fn set(&mut self, cx: usize, cy: usize, value: bool) {
        let i = self.spec.index(cx, cy);
        self.bits[i] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// `self` is a subset of `other` (same spec required).
    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.spec == other.spec && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

/// 8-connected components of the cells where `is_set` holds.
///
/// Each component is a sorted list of row-major cell indices. Components are
/// ordered by descending size, ties broken by the smallest cell index.
pub fn label_components(spec: &GridSpec, is_set: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let (w, h) = (spec.width_cells, spec.height_cells);
    let mut seen = vec![false; spec.len()];
    let mut components = Vec::new();
    let mut stack = Vec::new();

    for seed in 0..spec.len() {
        if seen[seed] || !is_set(seed) {
            continue;
        }
        seen[seed] = true;
        stack.push(seed);
        let mut cells = Vec::new();
        while let Some(i) = stack.pop() {
            cells.push(i);
            let (cx, cy) = (i % w, i / w);
            let x0 = cx.saturating_sub(1);
            let x1 = (cx + 1).min(w - 1);
            let y0 = cy.saturating_sub(1);
            let y1 = (cy + 1).min(h - 1);
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    let j = ny * w + nx;
                    if !seen[j] && is_set(j) {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
        }
        cells.sort_unstable();
        components.push(cells);
    }

    // seeds are visited in raster order, so cells[0] is each component's
    // smallest index and a stable sort on size keeps the tie order.
    components.sort_by_key(|c| std::cmp::Reverse(c.len()));
    components
}

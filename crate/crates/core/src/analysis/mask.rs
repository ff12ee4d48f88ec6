use crate::model::TrailField;

/// Offsets of the 8-neighbourhood, clockwise from north-west.
pub(crate) const N8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
];

/// A W×H binary image. Foreground is 8-connected, background 4-connected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Self {
        assert_eq!(bits.len(), width * height, "mask dimensions mismatch");
        Self { width, height, bits }
    }

    /// Parse rows of `#` (foreground) and anything else (background).
    pub fn from_ascii(rows: &[&str]) -> Self {
        let height = rows.len();
        let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
        let mut m = Self::new(width, height);
        for (y, row) in rows.iter().enumerate() {
            for (x, c) in row.bytes().enumerate() {
                m.set(x, y, c == b'#');
            }
        }
        m
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    /// Out-of-range coordinates read as background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.bits[y as usize * self.width + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.bits[y * self.width + x] = v;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn coverage(&self) -> f64 {
        if self.bits.is_empty() {
            0.0
        } else {
            self.count() as f64 / self.bits.len() as f64
        }
    }

    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| (i % self.width, i / self.width))
    }

    /// Number of 8-neighbours that are foreground.
    pub fn neighbours8(&self, x: usize, y: usize) -> usize {
        N8.iter()
            .filter(|(dx, dy)| self.get_signed(x as i64 + dx, y as i64 + dy))
            .count()
    }

    pub fn translated(&self, dx: usize, dy: usize, width: usize, height: usize) -> Self {
        let mut out = Self::new(width, height);
        for (x, y) in self.foreground() {
            out.set(x + dx, y + dy, true);
        }
        out
    }

    /// Rotate 90° counter-clockwise (as displayed with y down).
    pub fn rotated90(&self) -> Self {
        let mut out = Self::new(self.height, self.width);
        for (x, y) in self.foreground() {
            out.set(y, self.width - 1 - x, true);
        }
        out
    }
}

/// Foreground where `trail ≥ rel_threshold × max(trail)`. An all-zero
/// field gives an empty mask.
pub fn threshold_mask(trail: &TrailField, rel_threshold: f64) -> BinaryMask {
    assert!(
        rel_threshold > 0.0 && rel_threshold < 1.0,
        "relative threshold must lie in (0, 1)"
    );
    let max = trail.max();
    let (w, h) = (trail.width(), trail.height());
    if max <= 0.0 {
        return BinaryMask::new(w, h);
    }
    let cut = rel_threshold * max;
    BinaryMask::from_bits(w, h, trail.values().iter().map(|&v| v >= cut).collect())
}

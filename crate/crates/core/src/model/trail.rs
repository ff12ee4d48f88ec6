use serde::{Deserialize, Serialize};

use super::params::Boundary;

/// Scalar lattice of trail concentration, stored row-major (`y * width + x`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrailField {
    width: usize,
    height: usize,
    values: Vec<f64>,
    #[serde(skip)]
    scratch: Vec<f64>,
}

impl PartialEq for TrailField {
    fn eq(&self, other: &Self) -> bool {
        self.width == other.width && self.height == other.height && self.values == other.values
    }
}

impl TrailField {
    pub fn new(width: usize, height: usize) -> Self {
        Self::from_values(width, height, vec![0.0; width * height])
    }

    pub fn from_values(width: usize, height: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), width * height, "trail dimensions mismatch");
        Self {
            width,
            height,
            values,
            scratch: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    #[inline]
    pub fn add(&mut self, x: usize, y: usize, amount: f64) {
        self.values[y * self.width + x] += amount;
    }

    /// Sum of all cells in row-major order.
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// FNV-1a over the IEEE bit patterns of every cell; equal fields give
    /// equal checksums and any bit flip changes it.
    pub fn checksum(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in &self.values {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    pub fn clamp_max(&mut self, cap: f64) {
        for v in &mut self.values {
            if *v > cap {
                *v = cap;
            }
        }
    }

    /// One pseudo-parallel 3x3 mean-filter pass followed by damping:
    /// every output cell is `(1 - damp)` times the mean of the nine old
    /// values around it. Under a fixed boundary the missing neighbours
    /// count as zero and the divisor stays 9, so trail leaks off the edge.
    ///
    /// The kernel is evaluated as a horizontal 3-sum followed by a vertical
    /// 3-sum, in a fixed order, so results are reproducible bit for bit.
    pub fn diffuse(&mut self, damp: f64, boundary: Boundary) {
        let (w, h) = (self.width, self.height);
        let factor = (1.0 - damp) / 9.0;
        self.scratch.resize(w * h, 0.0);

        // Horizontal pass: scratch[c] = left + centre + right.
        for y in 0..h {
            let row = &self.values[y * w..(y + 1) * w];
            let out = &mut self.scratch[y * w..(y + 1) * w];
            let (wrap_l, wrap_r) = match boundary {
                Boundary::Periodic => (row[w - 1], row[0]),
                Boundary::Fixed => (0.0, 0.0),
            };
            if w == 1 {
                out[0] = wrap_l + row[0] + wrap_r;
                continue;
            }
            out[0] = wrap_l + row[0] + row[1];
            for x in 1..w - 1 {
                out[x] = row[x - 1] + row[x] + row[x + 1];
            }
            out[w - 1] = row[w - 2] + row[w - 1] + wrap_r;
        }

        // Vertical pass back into values.
        for y in 0..h {
            let up = match (y, boundary) {
                (0, Boundary::Periodic) => Some(h - 1),
                (0, Boundary::Fixed) => None,
                _ => Some(y - 1),
            };
            let down = match (y + 1 == h, boundary) {
                (true, Boundary::Periodic) => Some(0),
                (true, Boundary::Fixed) => None,
                _ => Some(y + 1),
            };
            for x in 0..w {
                let mut s = self.scratch[y * w + x];
                if let Some(u) = up {
                    s = self.scratch[u * w + x] + s;
                }
                if let Some(d) = down {
                    s += self.scratch[d * w + x];
                }
                self.values[y * w + x] = s * factor;
            }
        }
    }
}

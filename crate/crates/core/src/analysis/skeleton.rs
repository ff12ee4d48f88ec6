//! Topology-preserving thinning and measurements on the resulting skeleton.

use std::f64::consts::SQRT_2;

use super::mask::BinaryMask;

/// A unit-width skeleton with its junction cells (three or more skeletal
/// neighbours) and endpoints (exactly one).
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    pub mask: BinaryMask,
    pub junctions: Vec<(usize, usize)>,
    pub endpoints: Vec<(usize, usize)>,
}

impl Skeleton {
    pub fn from_mask(mask: BinaryMask) -> Self {
        let mut junctions = Vec::new();
        let mut endpoints = Vec::new();
        for (x, y) in mask.foreground() {
            match mask.neighbours8(x, y) {
                1 => endpoints.push((x, y)),
                n if n >= 3 => junctions.push((x, y)),
                _ => {}
            }
        }
        Self {
            mask,
            junctions,
            endpoints,
        }
    }

    pub fn length(&self) -> f64 {
        skeleton_length(&self.mask)
    }
}

/// Neighbour bits in counter-clockwise order starting east:
/// E, NE, N, NW, W, SW, S, SE (y grows downwards, so "north" is y − 1).
fn ring(mask: &BinaryMask, x: usize, y: usize) -> [bool; 8] {
    const OFFS: [(i64, i64); 8] = [
        (1, 0),
        (1, -1),
        (0, -1),
        (-1, -1),
        (-1, 0),
        (-1, 1),
        (0, 1),
        (1, 1),
    ];
    let (x, y) = (x as i64, y as i64);
    OFFS.map(|(dx, dy)| mask.get_signed(x + dx, y + dy))
}

/// Yokoi connectivity number for 8-connected foreground. A foreground
/// pixel is simple (deletable without changing topology) iff this is 1.
fn connectivity_number(n: &[bool; 8]) -> u32 {
    let c = |k: usize| u32::from(!n[k % 8]);
    [0, 2, 4, 6]
        .iter()
        .map(|&k| c(k) - c(k) * c(k + 1) * c(k + 2))
        .sum()
}

fn deletable(mask: &BinaryMask, x: usize, y: usize) -> bool {
    let n = ring(mask, x, y);
    let count = n.iter().filter(|&&b| b).count();
    count >= 2 && connectivity_number(&n) == 1
}

/// Iteratively peel simple, non-endpoint border pixels, one compass
/// direction per sub-pass, until nothing changes. Each deletion is checked
/// against the current image, so component and hole counts never change.
pub fn skeletonize(mask: &BinaryMask) -> Skeleton {
    let mut m = mask.clone();
    // Border directions: north, south, east, west neighbour is background.
    const DIRS: [(i64, i64); 4] = [(0, -1), (0, 1), (1, 0), (-1, 0)];
    let mut candidates = Vec::new();
    loop {
        let mut changed = false;
        for (dx, dy) in DIRS {
            candidates.clear();
            candidates.extend(m.foreground().filter(|&(x, y)| {
                !m.get_signed(x as i64 + dx, y as i64 + dy) && deletable(&m, x, y)
            }));
            for &(x, y) in &candidates {
                if deletable(&m, x, y) {
                    m.set(x, y, false);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Skeleton::from_mask(m)
}

/// Remove dangling branches of at most `max_len` pixels that end at a
/// junction, then re-thin what is left at the junction. Isolated segments
/// are left alone, so topology is unchanged.
pub fn prune_spurs(skeleton: &Skeleton, max_len: usize) -> Skeleton {
    let mut m = skeleton.mask.clone();
    for &(ex, ey) in &skeleton.endpoints {
        let mut path = vec![(ex, ey)];
        let mut prev: Option<(usize, usize)> = None;
        let mut cur = (ex, ey);
        let mut reached_junction = false;
        while path.len() <= max_len {
            let next: Vec<(usize, usize)> = neighbours(&m, cur)
                .filter(|&p| Some(p) != prev && !path.contains(&p))
                .collect();
            if next.is_empty() {
                break;
            }
            // A step into a cell with several onward options, or more than
            // one way forward from here, means we are at the junction.
            if next.len() > 1 || m.neighbours8(next[0].0, next[0].1) >= 3 {
                reached_junction = true;
                break;
            }
            prev = Some(cur);
            cur = next[0];
            path.push(cur);
        }
        if reached_junction && path.len() <= max_len {
            for (x, y) in path {
                m.set(x, y, false);
            }
        }
    }
    skeletonize(&m)
}

fn neighbours(m: &BinaryMask, (x, y): (usize, usize)) -> impl Iterator<Item = (usize, usize)> + '_ {
    super::mask::N8.iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        m.get_signed(nx, ny).then_some((nx as usize, ny as usize))
    })
}

/// Length of a skeleton in cells: 1 per orthogonal adjacency, √2 per
/// diagonal adjacency. A diagonal whose two pixels already share an
/// orthogonal neighbour is a corner shortcut and is not counted.
pub fn skeleton_length(mask: &BinaryMask) -> f64 {
    let mut total = 0.0;
    for (x, y) in mask.foreground() {
        let (x, y) = (x as i64, y as i64);
        // Each pair is counted from its left/upper member.
        if mask.get_signed(x + 1, y) {
            total += 1.0;
        }
        if mask.get_signed(x, y + 1) {
            total += 1.0;
        }
        if mask.get_signed(x + 1, y + 1) && !mask.get_signed(x + 1, y) && !mask.get_signed(x, y + 1) {
            total += SQRT_2;
        }
        if mask.get_signed(x - 1, y + 1) && !mask.get_signed(x - 1, y) && !mask.get_signed(x, y + 1) {
            total += SQRT_2;
        }
    }
    total
}

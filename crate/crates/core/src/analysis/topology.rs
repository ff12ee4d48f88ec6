use std::collections::VecDeque;

use super::mask::{BinaryMask, N8};
use crate::model::NodeSource;

/// Label 8-connected foreground components. Background cells get `None`.
/// Labels are assigned in row-major order of each component's first cell.
pub fn label_components(mask: &BinaryMask) -> (Vec<Option<u32>>, usize) {
    let (w, h) = (mask.width(), mask.height());
    let mut labels = vec![None; w * h];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.bits()[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for (dx, dy) in N8 {
                let (nx, ny) = (x + dx, y + dy);
                if mask.get_signed(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j].is_none() {
                        labels[j] = Some(next);
                        queue.push_back(j);
                    }
                }
            }
        }
        next += 1;
    }
    (labels, next as usize)
}

/// Euler characteristic of the foreground under 8-connectivity (background
/// 4-connected), from bit-quad counts over every 2x2 window including the
/// one-cell padding: `χ = (Q1 − Q3 − 2·QD) / 4`, where Q1/Q3 are windows
/// with one/three foreground pixels and QD windows holding a lone diagonal
/// pair. This equals vertices − edges + faces of the 8-connected complex.
pub fn euler_characteristic(mask: &BinaryMask) -> i64 {
    let (w, h) = (mask.width() as i64, mask.height() as i64);
    let mut q1 = 0i64;
    let mut q3 = 0i64;
    let mut qd = 0i64;
    for y in -1..h {
        for x in -1..w {
            let a = mask.get_signed(x, y);
            let b = mask.get_signed(x + 1, y);
            let c = mask.get_signed(x, y + 1);
            let d = mask.get_signed(x + 1, y + 1);
            match u8::from(a) + u8::from(b) + u8::from(c) + u8::from(d) {
                1 => q1 += 1,
                3 => q3 += 1,
                2 if (a && d) || (b && c) => qd += 1,
                _ => {}
            }
        }
    }
    (q1 - q3 - 2 * qd) / 4
}

/// `(component_count, cycle_count)` where the cycle count is the first
/// Betti number `components - χ`.
pub fn components_and_cycles(mask: &BinaryMask) -> (usize, usize) {
    let (_, components) = label_components(mask);
    let chi = euler_characteristic(mask);
    let cycles = components as i64 - chi;
    debug_assert!(cycles >= 0);
    (components, cycles.max(0) as usize)
}

/// True iff every enabled node's centre cell is foreground and all of them
/// share one 8-connected component. With no enabled nodes there is nothing
/// to connect and the answer is true.
pub fn nodes_connected(mask: &BinaryMask, nodes: &[NodeSource]) -> bool {
    let (labels, _) = label_components(mask);
    let mut common = None;
    for n in nodes.iter().filter(|n| n.enabled) {
        let (x, y) = n.centre();
        if x >= mask.width() || y >= mask.height() {
            return false;
        }
        match (labels[y * mask.width() + x], common) {
            (None, _) => return false,
            (Some(l), None) => common = Some(l),
            (Some(l), Some(c)) if l != c => return false,
            _ => {}
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(size: usize, r: f64) -> BinaryMask {
        let mut m = BinaryMask::new(size, size);
        let c = size as f64 / 2.0;
        for y in 0..size {
            for x in 0..size {
                let (dx, dy) = (x as f64 + 0.5 - c, y as f64 + 0.5 - c);
                m.set(x, y, dx * dx + dy * dy <= r * r);
            }
        }
        m
    }

    #[test]
    fn solid_disc() {
        assert_eq!(components_and_cycles(&disc(20, 7.0)), (1, 0));
    }

    #[test]
    fn thin_ring() {
        let m = BinaryMask::from_ascii(&[
            ".....", //
            ".###.", //
            ".#.#.", //
            ".###.", //
        ]);
        assert_eq!(components_and_cycles(&m), (1, 1));
    }

    #[test]
    fn diagonal_ring_encloses_a_hole() {
        // A diamond of diagonal steps is 8-connected and its centre is a
        // 4-connected background hole.
        let m = BinaryMask::from_ascii(&[
            "..#..", //
            ".#.#.", //
            "#...#", //
            ".#.#.", //
            "..#..", //
        ]);
        assert_eq!(components_and_cycles(&m), (1, 1));
    }

    #[test]
    fn two_disjoint_rings() {
        let m = BinaryMask::from_ascii(&[
            "###.###", //
            "#.#.#.#", //
            "###.###", //
        ]);
        assert_eq!(components_and_cycles(&m), (2, 2));
    }

    #[test]
    fn empty_and_single() {
        assert_eq!(components_and_cycles(&BinaryMask::new(4, 4)), (0, 0));
        assert_eq!(components_and_cycles(&BinaryMask::from_ascii(&["#"])), (1, 0));
    }

    #[test]
    fn node_connectivity() {
        let nodes = vec![NodeSource::new(0, 1, 1, 1, 0.1), NodeSource::new(1, 7, 1, 1, 0.1)];
        let full = BinaryMask::from_bits(9, 3, vec![true; 27]);
        assert!(nodes_connected(&full, &nodes));
        assert!(!nodes_connected(&BinaryMask::new(9, 3), &nodes));

        let mut path = BinaryMask::from_ascii(&[".........", ".#######.", "........."]);
        assert!(nodes_connected(&path, &nodes));
        path.set(4, 1, false);
        assert!(!nodes_connected(&path, &nodes));
    }
}

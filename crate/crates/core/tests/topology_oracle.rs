//! Cross-checks of the Euler-number topology against flood-fill counting.

use std::collections::VecDeque;

use proptest::prelude::*;
use trailnet::analysis::{components_and_cycles, prune_spurs, skeleton_length, skeletonize, BinaryMask};

/// Count components of cells satisfying `inside`, with the given offsets.
fn flood_count(w: i64, h: i64, inside: impl Fn(i64, i64) -> bool, offsets: &[(i64, i64)]) -> usize {
    let mut seen = vec![false; (w * h) as usize];
    let mut count = 0;
    for start in 0..w * h {
        let (sx, sy) = (start % w, start / w);
        if seen[start as usize] || !inside(sx, sy) {
            continue;
        }
        count += 1;
        seen[start as usize] = true;
        let mut queue = VecDeque::from([(sx, sy)]);
        while let Some((x, y)) = queue.pop_front() {
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w || ny >= h {
                    continue;
                }
                let i = (ny * w + nx) as usize;
                if !seen[i] && inside(nx, ny) {
                    seen[i] = true;
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    count
}

const EIGHT: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
const FOUR: [(i64, i64); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Components by 8-connected flood fill; holes as the 4-connected
/// background regions of the padded image, minus the outside.
fn brute_homology(m: &BinaryMask) -> (usize, usize) {
    let (w, h) = (m.width() as i64, m.height() as i64);
    let comps = flood_count(w, h, |x, y| m.get(x as usize, y as usize), &EIGHT);
    let padded_bg = |x: i64, y: i64| !m.get_signed(x - 1, y - 1);
    let bg = flood_count(w + 2, h + 2, padded_bg, &FOUR);
    (comps, bg - 1)
}

fn mask_strategy() -> impl Strategy<Value = BinaryMask> {
    (1usize..=32, 1usize..=32, 0.05f64..0.95).prop_flat_map(|(w, h, p)| {
        prop::collection::vec(prop::bool::weighted(p), w * h).prop_map(move |bits| BinaryMask::from_bits(w, h, bits))
    })
}

/// A deterministic corpus of structured masks: rings, nested rings,
/// figure-eights, grids and diagonal chains, all within 32x32.
fn corpus() -> Vec<BinaryMask> {
    let mut out = Vec::new();
    let draw = |w: usize, h: usize, f: &dyn Fn(i64, i64) -> bool| {
        let mut m = BinaryMask::new(w, h);
        for y in 0..h {
            for x in 0..w {
                m.set(x, y, f(x as i64, y as i64));
            }
        }
        m
    };
    for r in [3i64, 5, 9, 14] {
        out.push(draw(32, 32, &|x, y| {
            let d = (x - 16).pow(2) + (y - 16).pow(2);
            d <= r * r && d >= (r - 1).pow(2)
        }));
    }
    out.push(draw(32, 32, &|x, y| {
        let d = (x - 16).pow(2) + (y - 16).pow(2);
        (d <= 196 && d >= 144) || (d <= 64 && d >= 36)
    }));
    out.push(draw(32, 20, &|x, y| {
        let a = (x - 9).pow(2) + (y - 10).pow(2);
        let b = (x - 22).pow(2) + (y - 10).pow(2);
        (a <= 49 && a >= 25) || (b <= 49 && b >= 25)
    }));
    for step in [3i64, 4, 7] {
        out.push(draw(32, 32, &|x, y| x % step == 0 || y % step == 0));
    }
    out.push(draw(16, 16, &|x, y| (x + y) % 2 == 0));
    out.push(draw(16, 16, &|x, y| x == y || x + y == 15));
    out.push(draw(32, 32, &|x, y| (x / 4 + y / 4) % 2 == 0));
    out.push(draw(8, 8, &|_, _| true));
    out.push(draw(8, 8, &|_, _| false));
    out.push(draw(32, 32, &|x, y| x == 0 || y == 0 || x == 31 || y == 31));
    out
}

#[test]
fn corpus_matches_brute_force() {
    for (i, m) in corpus().iter().enumerate() {
        assert_eq!(components_and_cycles(m), brute_homology(m), "corpus mask {i}");
    }
}

#[test]
fn corpus_thinning_preserves_topology() {
    for (i, m) in corpus().iter().enumerate() {
        let s = skeletonize(m);
        assert_eq!(components_and_cycles(&s.mask), components_and_cycles(m), "corpus mask {i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn euler_count_matches_flood_fill(m in mask_strategy()) {
        prop_assert_eq!(components_and_cycles(&m), brute_homology(&m));
    }

    #[test]
    fn cycles_invariant_under_translation_and_rotation(m in mask_strategy(), dx in 0usize..5, dy in 0usize..5) {
        let base = components_and_cycles(&m);
        let moved = m.translated(dx, dy, m.width() + dx, m.height() + dy);
        prop_assert_eq!(components_and_cycles(&moved), base);
        let mut r = m.clone();
        for _ in 0..4 {
            r = r.rotated90();
            prop_assert_eq!(components_and_cycles(&r), base);
        }
        prop_assert_eq!(r, m);
    }

    #[test]
    fn thinning_preserves_topology(m in mask_strategy()) {
        let s = skeletonize(&m);
        prop_assert_eq!(components_and_cycles(&s.mask), components_and_cycles(&m));
        prop_assert!(s.mask.foreground().all(|(x, y)| m.get(x, y)));
        let pruned = prune_spurs(&s, 4);
        prop_assert_eq!(components_and_cycles(&pruned.mask), components_and_cycles(&m));
    }

    #[test]
    fn thinning_is_idempotent(m in mask_strategy()) {
        let once = skeletonize(&m);
        let twice = skeletonize(&once.mask);
        prop_assert_eq!(&twice.mask, &once.mask);
    }

    #[test]
    fn bar_skeleton_tracks_bar_length(len in 12usize..60, thick in 1usize..6) {
        let mut m = BinaryMask::new(len + 4, thick + 4);
        for y in 2..2 + thick {
            for x in 2..2 + len {
                m.set(x, y, true);
            }
        }
        let l = skeleton_length(&skeletonize(&m).mask);
        prop_assert!((l - len as f64).abs() <= thick as f64 + 1.0, "bar {len}x{thick}: {l}");
    }
}

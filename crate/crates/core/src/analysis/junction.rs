use std::collections::{HashSet, VecDeque};

use super::mask::N8;
use super::skeleton::Skeleton;

/// Default graph distance at which branch directions are measured.
pub const DEFAULT_WINDOW_RADIUS: usize = 8;

/// Angles (degrees) between angularly adjacent branches at every junction
/// of the skeleton.
///
/// Touching junction cells are merged into one junction centred on their
/// centroid. Each branch leaving it is followed for `window_radius` cells
/// and its direction taken from the centroid to the cell reached. The
/// branch directions are sorted by angle and the gaps between neighbours
/// reported, so the angles at one junction sum to 360°.
pub fn junction_angles(skeleton: &Skeleton, window_radius: usize) -> Vec<f64> {
    assert!(window_radius >= 3, "window radius must be at least 3 cells");
    let mask = &skeleton.mask;
    let junction_set: HashSet<(usize, usize)> = skeleton.junctions.iter().copied().collect();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    let mut angles = Vec::new();

    for &j in &skeleton.junctions {
        if !seen.insert(j) {
            continue;
        }
        // Cluster of touching junction cells.
        let mut cluster = vec![j];
        let mut queue = VecDeque::from([j]);
        while let Some(p) = queue.pop_front() {
            for q in neighbours(mask, p) {
                if junction_set.contains(&q) && seen.insert(q) {
                    cluster.push(q);
                    queue.push_back(q);
                }
            }
        }
        let n = cluster.len() as f64;
        let cx = cluster.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let cy = cluster.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        let in_cluster: HashSet<(usize, usize)> = cluster.iter().copied().collect();

        // Branch roots: skeletal cells touching the cluster, grouped by
        // adjacency so a branch entering diagonally is not counted twice.
        let mut roots: Vec<(usize, usize)> = Vec::new();
        for &p in &cluster {
            for q in neighbours(mask, p) {
                if !in_cluster.contains(&q) && !roots.contains(&q) {
                    roots.push(q);
                }
            }
        }
        let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
        for r in roots {
            let touching: Vec<usize> = groups
                .iter()
                .enumerate()
                .filter(|(_, g)| g.iter().any(|&s| adjacent(s, r)))
                .map(|(i, _)| i)
                .collect();
            match touching.as_slice() {
                [] => groups.push(vec![r]),
                [first, rest @ ..] => {
                    let first = *first;
                    for &i in rest.iter().rev() {
                        let g = groups.remove(i);
                        groups[first].extend(g);
                    }
                    groups[first].push(r);
                }
            }
        }

        let mut dirs: Vec<f64> = groups
            .iter()
            .filter_map(|g| follow_branch(mask, g, &in_cluster, (cx, cy), window_radius))
            .collect();
        if dirs.len() < 3 {
            continue;
        }
        dirs.sort_by(f64::total_cmp);
        for i in 0..dirs.len() {
            let next = if i + 1 < dirs.len() { dirs[i + 1] } else { dirs[0] + 360.0 };
            angles.push(next - dirs[i]);
        }
    }
    angles
}

fn adjacent(a: (usize, usize), b: (usize, usize)) -> bool {
    a != b && a.0.abs_diff(b.0) <= 1 && a.1.abs_diff(b.1) <= 1
}

fn neighbours(
    m: &super::mask::BinaryMask,
    (x, y): (usize, usize),
) -> impl Iterator<Item = (usize, usize)> + '_ {
    N8.iter().filter_map(move |(dx, dy)| {
        let (nx, ny) = (x as i64 + dx, y as i64 + dy);
        m.get_signed(nx, ny).then_some((nx as usize, ny as usize))
    })
}

/// Walk outward from a branch root, always stepping to the unvisited cell
/// farthest from the junction centre. Returns the branch direction in
/// degrees (0° = +x, counter-clockwise with y up) or `None` for stubs
/// shorter than two cells.
fn follow_branch(
    mask: &super::mask::BinaryMask,
    roots: &[(usize, usize)],
    cluster: &HashSet<(usize, usize)>,
    centre: (f64, f64),
    radius: usize,
) -> Option<f64> {
    let dist2 = |p: (usize, usize)| (p.0 as f64 - centre.0).powi(2) + (p.1 as f64 - centre.1).powi(2);
    let mut visited: HashSet<(usize, usize)> = cluster.iter().copied().collect();
    visited.extend(roots.iter().copied());
    let mut cur = *roots
        .iter()
        .max_by(|a, b| dist2(**a).total_cmp(&dist2(**b)))?;
    let mut steps = 1;
    while steps < radius {
        let options: Vec<(usize, usize)> = neighbours(mask, cur)
            .filter(|q| !visited.contains(q))
            .collect();
        let Some(&next) = options.iter().max_by(|a, b| dist2(**a).total_cmp(&dist2(**b))) else {
            break;
        };
        visited.extend(options);
        cur = next;
        steps += 1;
    }
    if steps < 2 {
        return None;
    }
    let dx = cur.0 as f64 - centre.0;
    let dy = centre.1 - cur.1 as f64;
    Some(dy.atan2(dx).to_degrees().rem_euclid(360.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::mask::BinaryMask;
    use crate::analysis::skeleton::skeletonize;

    /// Rasterise rays from the centre of a `size` square at the given angles.
    fn rays(size: usize, len: f64, angles: &[f64]) -> BinaryMask {
        let mut m = BinaryMask::new(size, size);
        let c = (size / 2) as f64;
        for &a in angles {
            let (s, co) = a.to_radians().sin_cos();
            let mut t = 0.0;
            while t <= len {
                let x = (c + t * co).round() as usize;
                let y = (c - t * s).round() as usize;
                m.set(x, y, true);
                t += 0.25;
            }
        }
        m
    }

    fn check(angles: &[f64], expected: f64) {
        let s = skeletonize(&rays(61, 25.0, angles));
        let got = junction_angles(&s, DEFAULT_WINDOW_RADIUS);
        assert_eq!(got.len(), angles.len(), "{got:?}");
        for a in got {
            assert!((a - expected).abs() <= 5.0, "{a}");
        }
    }

    #[test]
    fn three_way_junction() {
        check(&[0.0, 120.0, 240.0], 120.0);
        check(&[90.0, 210.0, 330.0], 120.0);
    }

    #[test]
    fn cross_junction() {
        check(&[0.0, 90.0, 180.0, 270.0], 90.0);
    }

    #[test]
    fn straight_line_has_no_junctions() {
        let s = skeletonize(&rays(61, 25.0, &[0.0, 180.0]));
        assert!(junction_angles(&s, 8).is_empty());
    }
}

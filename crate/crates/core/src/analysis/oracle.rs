//! Exact reference lengths for small node sets: the Euclidean minimum
//! spanning tree and the Steiner minimum tree.

use crate::model::NodeSource;

pub type Point = (f64, f64);

/// Largest node count the Steiner oracle solves exactly.
pub const STEINER_MAX_NODES: usize = 5;

fn dist(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

pub fn node_points(nodes: &[NodeSource]) -> Vec<Point> {
    nodes.iter().map(|n| (n.cx as f64, n.cy as f64)).collect()
}

/// Total length of the Euclidean minimum spanning tree (Prim, O(n²)).
pub fn mst_length(points: &[Point]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("some vertex remains");
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] {
                best[v] = best[v].min(dist(points[u], points[v]));
            }
        }
    }
    total
}

/// Result of the Steiner oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteinerEstimate {
    pub length: f64,
    /// False when the instance was too large and the MST length was
    /// reported instead.
    pub exact: bool,
}

/// Length of the Steiner minimum tree.
///
/// Up to three points use the Fermat-point construction directly. Four and
/// five points enumerate every tree topology in which the added Steiner
/// points have degree three, optimise the Steiner point positions for each
/// topology and keep the shortest. Larger inputs fall back to the MST
/// length with `exact = false`.
pub fn steiner_length_oracle(points: &[Point]) -> SteinerEstimate {
    match points.len() {
        0 | 1 => SteinerEstimate { length: 0.0, exact: true },
        2 => SteinerEstimate { length: dist(points[0], points[1]), exact: true },
        3 => SteinerEstimate {
            length: fermat_tree_length(points[0], points[1], points[2]),
            exact: true,
        },
        n if n <= STEINER_MAX_NODES => SteinerEstimate {
            length: topology_search(points),
            exact: true,
        },
        _ => SteinerEstimate {
            length: mst_length(points),
            exact: false,
        },
    }
}

/// Shortest network joining three points. If some angle of the triangle
/// is at least 120° the two sides meeting there are optimal; otherwise the
/// tree meets at the Fermat point and has length
/// `sqrt((a² + b² + c²)/2 + 2√3·area)`.
pub fn fermat_tree_length(p: Point, q: Point, r: Point) -> f64 {
    let a = dist(q, r);
    let b = dist(p, r);
    let c = dist(p, q);
    let angle_at = |opp: f64, s1: f64, s2: f64| {
        if s1 == 0.0 || s2 == 0.0 {
            return 0.0;
        }
        ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0).acos()
    };
    let limit = 2.0 * std::f64::consts::FRAC_PI_3;
    if angle_at(a, b, c) >= limit {
        return b + c;
    }
    if angle_at(b, a, c) >= limit {
        return a + c;
    }
    if angle_at(c, a, b) >= limit {
        return a + b;
    }
    let area = ((q.0 - p.0) * (r.1 - p.1) - (r.0 - p.0) * (q.1 - p.1)).abs() / 2.0;
    ((a * a + b * b + c * c) / 2.0 + 2.0 * 3f64.sqrt() * area).sqrt()
}

/// Tree on `terminals + steiner` vertices given as an edge list; vertex
/// indices `>= terminals` are Steiner points.
type Topology = Vec<(usize, usize)>;

/// Decode a Prüfer sequence into a tree on `n` vertices.
fn prufer_tree(seq: &[usize], n: usize) -> Topology {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// All topologies with `k` Steiner points of degree exactly three and
/// terminals of degree at most three.
fn steiner_topologies(terminals: usize, k: usize) -> Vec<Topology> {
    let n = terminals + k;
    let len = n - 2;
    let mut out = Vec::new();
    let mut seq = vec![0usize; len];
    loop {
        let mut counts = vec![0usize; n];
        for &s in &seq {
            counts[s] += 1;
        }
        let steiner_ok = (terminals..n).all(|i| counts[i] == 2);
        let terminals_ok = (0..terminals).all(|i| counts[i] <= 2);
        // Canonical labelling of Steiner points: first appearances ordered.
        let firsts: Vec<usize> = (terminals..n)
            .map(|i| seq.iter().position(|&s| s == i).unwrap_or(usize::MAX))
            .collect();
        let canonical = firsts.windows(2).all(|w| w[0] < w[1]);
        if steiner_ok && terminals_ok && canonical {
            out.push(prufer_tree(&seq, n));
        }
        // Next sequence in lexicographic order.
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            seq[i] += 1;
            if seq[i] < n {
                break;
            }
            seq[i] = 0;
        }
    }
}

fn tree_length(edges: &Topology, pos: &[Point]) -> f64 {
    edges.iter().map(|&(a, b)| dist(pos[a], pos[b])).sum()
}

/// Optimise the Steiner point positions of one topology. The objective is
/// convex, so Weiszfeld-style fixed-point sweeps followed by a shrinking
/// pattern search down to 1e-4 cells reach the optimum.
fn optimise_topology(points: &[Point], edges: &Topology, k: usize) -> f64 {
    let t = points.len();
    let centroid = (
        points.iter().map(|p| p.0).sum::<f64>() / t as f64,
        points.iter().map(|p| p.1).sum::<f64>() / t as f64,
    );
    let mut pos: Vec<Point> = points.to_vec();
    pos.extend(std::iter::repeat(centroid).take(k));
    // Tiny offsets keep coincident Steiner points from sitting on each other.
    for i in 0..k {
        pos[t + i].0 += 1e-3 * (i as f64 + 1.0);
        pos[t + i].1 -= 1e-3 * (i as f64 + 1.0);
    }
    let adj: Vec<Vec<usize>> = (0..t + k)
        .map(|v| {
            edges
                .iter()
                .filter_map(|&(a, b)| {
                    if a == v {
                        Some(b)
                    } else if b == v {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for s in t..t + k {
            let (mut wx, mut wy, mut wsum) = (0.0, 0.0, 0.0);
            for &v in &adj[s] {
                let d = dist(pos[s], pos[v]).max(1e-12);
                wx += pos[v].0 / d;
                wy += pos[v].1 / d;
                wsum += 1.0 / d;
            }
            let np = (wx / wsum, wy / wsum);
            moved = moved.max(dist(np, pos[s]));
            pos[s] = np;
        }
        if moved < 1e-9 {
            break;
        }
    }

    let span = points
        .iter()
        .map(|p| dist(*p, centroid))
        .fold(1.0, f64::max);
    let mut step = span / 10.0;
    let mut best = tree_length(edges, &pos);
    while step > 1e-4 {
        let mut improved = false;
        for s in t..t + k {
            for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let old = pos[s];
                pos[s] = (old.0 + dx, old.1 + dy);
                let l = tree_length(edges, &pos);
                if l < best - 1e-12 {
                    best = l;
                    improved = true;
                } else {
                    pos[s] = old;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best
}

fn topology_search(points: &[Point]) -> f64 {
    let n = points.len();
    let mut best = mst_length(points);
    for k in 1..=n - 2 {
        for topo in steiner_topologies(n, k) {
            best = best.min(optimise_topology(points, &topo, k));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mst_examples() {
        let square = [(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)];
        assert!((mst_length(&square) - 300.0).abs() < 1e-9);
        assert!((mst_length(&[(0.0, 0.0), (30.0, 40.0)]) - 50.0).abs() < 1e-12);
        let line = [(0.0, 0.0), (100.0, 0.0), (50.0, 0.0)];
        assert!((mst_length(&line) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn full_topology_counts() {
        // Full Steiner topologies: 1 for four terminals, 15 for five.
        assert_eq!(steiner_topologies(4, 2).len(), 3);
        assert_eq!(steiner_topologies(5, 3).len(), 15);
    }

    #[test]
    fn fermat_obtuse_uses_two_sides() {
        let l = fermat_tree_length((0.0, 0.0), (100.0, 0.0), (50.0, 5.0));
        assert!((l - (2.0 * 50.0f64.hypot(5.0))).abs() < 1e-9);
    }

    #[test]
    fn large_inputs_fall_back_to_mst() {
        let pts: Vec<Point> = (0..6).map(|i| (i as f64 * 10.0, 0.0)).collect();
        let e = steiner_length_oracle(&pts);
        assert!(!e.exact);
        assert!((e.length - 50.0).abs() < 1e-9);
    }

    #[test]
    fn collinear_points_gain_nothing() {
        let pts = [(0.0, 0.0), (50.0, 0.0), (100.0, 0.0), (20.0, 0.0)];
        let e = steiner_length_oracle(&pts);
        assert!((e.length - 100.0).abs() < 1e-6);
    }
}

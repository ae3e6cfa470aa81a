//! Marching-squares contouring of `{f = 0}` with polyline assembly.

use std::collections::HashMap;

use crate::exec;
use crate::metric::Rect;

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

// Cell edges, counter-clockwise from the bottom.
const BOTTOM: usize = 0;
const RIGHT: usize = 1;
const TOP: usize = 2;
const LEFT: usize = 3;

const POLISH_STEPS: usize = 8;

/// Zero contour of `f` over `window` on an `nx × ny` cell grid. Saddle cells
/// are resolved by the sign of `f` at the cell centre; crossings are
/// interpolated linearly, then refined along the edge by regula falsi.
pub fn marching_squares<F>(f: F, window: &Rect, nx: usize, ny: usize) -> Vec<Polyline>
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    if nx == 0 || ny == 0 || window.x1 <= window.x0 || window.y1 <= window.y0 {
        return Vec::new();
    }
    let xs = Rect::axis(window.x0, window.x1, nx + 1);
    let ys = Rect::axis(window.y0, window.y1, ny + 1);
    let stride = nx + 1;
    let vals = exec::map_range(stride * (ny + 1), |k| f(xs[k % stride], ys[k / stride]));
    let val = |i: usize, j: usize| vals[j * stride + i];

    let crossing = |(xa, ya, fa): (f64, f64, f64), (xb, yb, fb): (f64, f64, f64)| -> (f64, f64) {
        if fa == 0.0 {
            return (xa, ya);
        }
        if fb == 0.0 {
            return (xb, yb);
        }
        let at = |t: f64| (xa + t * (xb - xa), ya + t * (yb - ya));
        let (mut lo, mut hi, mut flo, mut fhi) = (0.0, 1.0, fa, fb);
        let mut t = flo / (flo - fhi);
        for _ in 0..POLISH_STEPS {
            let (px, py) = at(t);
            let ft = f(px, py);
            if ft == 0.0 || !ft.is_finite() {
                break;
            }
            if (ft > 0.0) == (flo > 0.0) {
                lo = t;
                flo = ft;
            } else {
                hi = t;
                fhi = ft;
            }
            t = lo + (hi - lo) * flo / (flo - fhi);
        }
        at(t)
    };

    let per_cell: Vec<Vec<((f64, f64), (f64, f64))>> = exec::map_range(nx * ny, |c| {
        let (i, j) = (c % nx, c / nx);
        let corner = [
            (xs[i], ys[j], val(i, j)),
            (xs[i + 1], ys[j], val(i + 1, j)),
            (xs[i + 1], ys[j + 1], val(i + 1, j + 1)),
            (xs[i], ys[j + 1], val(i, j + 1)),
        ];
        if corner.iter().any(|c| !c.2.is_finite()) {
            return Vec::new();
        }
        let pos = corner.map(|c| c.2 >= 0.0);
        let code = pos.iter().enumerate().fold(0u8, |acc, (k, &p)| acc | ((p as u8) << k));
        let edge_point = |e: usize| match e {
            BOTTOM => crossing(corner[0], corner[1]),
            RIGHT => crossing(corner[1], corner[2]),
            TOP => crossing(corner[3], corner[2]),
            _ => crossing(corner[0], corner[3]),
        };
        let pairs: &[(usize, usize)] = match code {
            0 | 15 => &[],
            1 | 14 => &[(LEFT, BOTTOM)],
            2 | 13 => &[(BOTTOM, RIGHT)],
            3 | 12 => &[(LEFT, RIGHT)],
            4 | 11 => &[(RIGHT, TOP)],
            6 | 9 => &[(BOTTOM, TOP)],
            7 | 8 => &[(LEFT, TOP)],
            5 | 10 => {
                let centre = f(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]));
                // Corners 0 and 2 share a sign; if the centre agrees they connect.
                if (centre >= 0.0) == pos[0] {
                    &[(BOTTOM, RIGHT), (TOP, LEFT)]
                } else {
                    &[(LEFT, BOTTOM), (RIGHT, TOP)]
                }
            }
            _ => unreachable!(),
        };
        pairs
            .iter()
            .map(|&(a, b)| (edge_point(a), edge_point(b)))
            .filter(|(p, q)| p != q)
            .collect()
    });
    let segments: Vec<_> = per_cell.into_iter().flatten().collect();
    assemble(&segments)
}

fn key(p: (f64, f64)) -> (u64, u64) {
    // Normalise -0.0 so that shared crossings on the axes merge.
    ((p.0 + 0.0).to_bits(), (p.1 + 0.0).to_bits())
}

/// Joins segments sharing bit-identical endpoints into maximal chains.
/// Chains break at nodes of degree other than two.
pub fn assemble(segments: &[((f64, f64), (f64, f64))]) -> Vec<Polyline> {
    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    let mut node = |p: (f64, f64)| -> usize {
        *ids.entry(key(p)).or_insert_with(|| {
            nodes.push(p);
            nodes.len() - 1
        })
    };
    let edges: Vec<(usize, usize)> = segments.iter().map(|&(a, b)| (node(a), node(b))).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push(e);
        adj[b].push(e);
    }
    let mut used = vec![false; edges.len()];
    let mut out = Vec::new();

    let walk = |start: usize, used: &mut Vec<bool>| -> Option<Polyline> {
        let mut pts = vec![nodes[start]];
        let mut cur = start;
        loop {
            let next_edge = adj[cur].iter().copied().find(|&e| !used[e]);
            let Some(e) = next_edge else { break };
            used[e] = true;
            let (a, b) = edges[e];
            cur = if a == cur { b } else { a };
            pts.push(nodes[cur]);
            if adj[cur].len() != 2 || cur == start {
                break;
            }
        }
        if pts.len() < 2 {
            return None;
        }
        let closed = pts.len() > 2 && cur == start;
        Some(Polyline { points: pts, closed })
    };

    // Open chains start at endpoints and junctions, then what remains are loops.
    for n in 0..nodes.len() {
        if adj[n].len() != 2 {
            while adj[n].iter().any(|&e| !used[e]) {
                if let Some(p) = walk(n, &mut used) {
                    out.push(p);
                }
            }
        }
    }
    for n in 0..nodes.len() {
        while adj[n].iter().any(|&e| !used[e]) {
            if let Some(p) = walk(n, &mut used) {
                out.push(p);
            }
        }
    }
    out
}

/// Number of connected components formed by polylines that share endpoints
/// or vertices.
pub fn connected_components(lines: &[Polyline]) -> usize {
    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for line in lines {
        let mut prev: Option<usize> = None;
        for &p in &line.points {
            let id = *ids.entry(key(p)).or_insert_with(|| {
                parent.push(parent.len());
                parent.len() - 1
            });
            if let Some(q) = prev {
                let (a, b) = (find(&mut parent, q), find(&mut parent, id));
                if a != b {
                    parent[a] = b;
                }
            }
            prev = Some(id);
        }
    }
    (0..parent.len())
        .filter(|&i| find(&mut parent, i) == i)
        .count()
}

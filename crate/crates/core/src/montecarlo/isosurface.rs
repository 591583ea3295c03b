//! Area of the zero set of periodic grid data.
//!
//! Each cube of the grid is cut by linear interpolation along its edges.
//! On every face the crossing points are joined into segments; a face with
//! four crossings is disambiguated by the sign of the mean of its corner
//! values, and neighbouring cubes see the same face data, so the segments
//! agree across faces. The segments inside one cube close into loops, each
//! loop is fanned from its centroid and the triangle areas are summed.

/// Corner `c` of the unit cube sits at `(c & 1, c >> 1 & 1, c >> 2 & 1)`.
const fn corner(c: usize) -> [f64; 3] {
    [(c & 1) as f64, (c >> 1 & 1) as f64, (c >> 2 & 1) as f64]
}

/// The twelve edges as corner pairs.
const EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Faces as corner cycles.
const FACES: [[usize; 4]; 6] = [
    [0, 2, 6, 4],
    [1, 3, 7, 5],
    [0, 1, 5, 4],
    [2, 3, 7, 6],
    [0, 1, 3, 2],
    [4, 5, 7, 6],
];

fn edge_id(a: usize, b: usize) -> usize {
    EDGES.iter().position(|&(p, q)| (p, q) == (a, b) || (p, q) == (b, a)).expect("corners share an edge")
}

/// Area of one cube's surface patch in cell units.
fn cube_area(v: &[f64; 8], face_edges: &[[usize; 4]; 6]) -> f64 {
    let pos = |c: usize| v[c] > 0.0;
    let mut point = [[0.0; 3]; 12];
    for (e, &(a, b)) in EDGES.iter().enumerate() {
        if pos(a) != pos(b) {
            let t = v[a] / (v[a] - v[b]);
            let (pa, pb) = (corner(a), corner(b));
            point[e] = [0, 1, 2].map(|i| pa[i] + t * (pb[i] - pa[i]));
        }
    }
    // Up to two neighbours per crossing edge.
    let mut nbr = [[usize::MAX; 2]; 12];
    let mut link = |a: usize, b: usize| {
        for (x, y) in [(a, b), (b, a)] {
            let slot = if nbr[x][0] == usize::MAX { 0 } else { 1 };
            nbr[x][slot] = y;
        }
    };
    for (f, cyc) in FACES.iter().enumerate() {
        let edges = &face_edges[f];
        let cut: Vec<usize> = (0..4).filter(|&k| pos(cyc[k]) != pos(cyc[(k + 1) % 4])).collect();
        match cut.len() {
            2 => link(edges[cut[0]], edges[cut[1]]),
            4 => {
                let mean = cyc.iter().map(|&c| v[c]).sum::<f64>() / 4.0;
                // Cut off the corners whose sign differs from the mean.
                for k in 0..4 {
                    if pos(cyc[k]) != (mean > 0.0) {
                        link(edges[(k + 3) % 4], edges[k]);
                    }
                }
            }
            _ => {}
        }
    }
    let mut seen = [false; 12];
    let mut area = 0.0;
    for start in 0..12 {
        if seen[start] || nbr[start][0] == usize::MAX {
            continue;
        }
        let mut lp = vec![start];
        seen[start] = true;
        let (mut prev, mut cur) = (start, nbr[start][0]);
        while cur != start && cur != usize::MAX && !seen[cur] {
            seen[cur] = true;
            lp.push(cur);
            let next = if nbr[cur][0] == prev { nbr[cur][1] } else { nbr[cur][0] };
            prev = cur;
            cur = next;
        }
        area += fan_area(&lp.iter().map(|&e| point[e]).collect::<Vec<_>>());
    }
    area
}

fn fan_area(p: &[[f64; 3]]) -> f64 {
    if p.len() < 3 {
        return 0.0;
    }
    let k = p.len() as f64;
    let c = [0, 1, 2].map(|i| p.iter().map(|q| q[i]).sum::<f64>() / k);
    (0..p.len())
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % p.len()]);
            let u = [0, 1, 2].map(|j| a[j] - c[j]);
            let w = [0, 1, 2].map(|j| b[j] - c[j]);
            let x = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
            0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsosurfaceArea {
    pub area: f64,
    pub no_sign_change: bool,
}

/// Area of `{f = 0}` on the unit torus from values `f(i/n, j/n, k/n)`
/// stored at `(i * n + j) * n + k`.
pub fn isosurface_area(grid: &[f64], n: usize) -> IsosurfaceArea {
    assert_eq!(grid.len(), n * n * n, "grid size");
    let first = grid.first().is_some_and(|v| *v > 0.0);
    if grid.iter().all(|v| (*v > 0.0) == first) {
        return IsosurfaceArea { area: 0.0, no_sign_change: true };
    }
    let face_edges: [[usize; 4]; 6] = FACES.map(|cyc| [0, 1, 2, 3].map(|k| edge_id(cyc[k], cyc[(k + 1) % 4])));
    let at = |i: usize, j: usize, k: usize| grid[((i % n) * n + j % n) * n + k % n];
    let slabs = crate::par::map_range(0..n, |i| {
        let mut cells = Vec::new();
        for j in 0..n {
            for k in 0..n {
                let v: [f64; 8] = std::array::from_fn(|c| at(i + (c & 1), j + (c >> 1 & 1), k + (c >> 2 & 1)));
                let p = v[0] > 0.0;
                if v.iter().all(|x| (*x > 0.0) == p) {
                    continue;
                }
                cells.push(cube_area(&v, &face_edges));
            }
        }
        crate::par::ordered_sum(&cells)
    });
    let h = 1.0 / n as f64;
    IsosurfaceArea { area: crate::par::ordered_sum(&slabs) * h * h, no_sign_change: false }
}

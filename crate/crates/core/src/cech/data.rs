//! Builders for the shipped nerves.

use std::collections::{BTreeMap, BTreeSet};

use super::TwistedCechDatum;

fn edges_map(entries: &[((usize, usize), Vec<i64>)]) -> BTreeMap<String, Vec<i64>> {
    entries
        .iter()
        .map(|((j, k), v)| (format!("{j},{k}"), v.clone()))
        .collect()
}

/// Three arcs covering a circle; the twist sits on edge (0, 2).
pub fn circle3() -> TwistedCechDatum {
    TwistedCechDatum {
        cover_size: 3,
        simplices: vec![vec![0, 1], vec![0, 2], vec![1, 2]],
        free_rank: 1,
        torsion_orders: vec![],
        edge_exponents: edges_map(&[((0, 2), vec![1])]),
    }
}

/// Two circle3 loops glued at vertex 0.
pub fn wedge2() -> TwistedCechDatum {
    TwistedCechDatum {
        cover_size: 5,
        simplices: vec![
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![0, 4],
            vec![1, 2],
            vec![3, 4],
        ],
        free_rank: 2,
        torsion_orders: vec![],
        edge_exponents: edges_map(&[((0, 2), vec![1, 0]), ((0, 4), vec![0, 1])]),
    }
}

/// Product nerve of two circle3 data.
pub fn torus9() -> TwistedCechDatum {
    let c = circle3().validate().expect("circle3 is valid");
    c.product(&c)
}

/// Vertex, directed edge list and triangles of the 3x3 grid torus, with the
/// wrap-count cocycle of each directed edge.
fn grid_torus() -> (Vec<(usize, usize)>, Vec<[(usize, usize); 3]>, BTreeMap<((usize, usize), (usize, usize)), [i64; 2]>) {
    let verts: Vec<(usize, usize)> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
    let mut wraps = BTreeMap::new();
    let steps = [(1, 0), (0, 1), (1, 1)];
    for &(i, j) in &verts {
        for &(di, dj) in &steps {
            let to = ((i + di) % 3, (j + dj) % 3);
            let w = [((i + di) / 3) as i64, ((j + dj) / 3) as i64];
            wraps.insert(((i, j), to), w);
        }
    }
    let mut tris = Vec::new();
    for &(i, j) in &verts {
        let a = (i, j);
        let b = ((i + 1) % 3, j);
        let c = (i, (j + 1) % 3);
        let d = ((i + 1) % 3, (j + 1) % 3);
        tris.push([a, b, d]);
        tris.push([a, c, d]);
    }
    (verts, tris, wraps)
}

/// Connected sum of two 3x3 grid tori along the triangle {(0,0),(1,0),(1,1)}.
pub fn genus2() -> TwistedCechDatum {
    let (verts, tris, wraps) = grid_torus();
    let removed: BTreeSet<(usize, usize)> = [(0, 0), (1, 0), (1, 1)].into_iter().collect();
    // Copy A keeps labels 0..9; copy B reuses A's labels on the removed triangle.
    let label_a = |v: (usize, usize)| v.0 * 3 + v.1;
    let mut label_b = BTreeMap::new();
    let mut next = 9;
    for &v in &verts {
        if removed.contains(&v) {
            label_b.insert(v, label_a(v));
        } else {
            label_b.insert(v, next);
            next += 1;
        }
    }
    let mut simplices = BTreeSet::new();
    let mut exps: BTreeMap<(usize, usize), Vec<i64>> = BTreeMap::new();
    for copy in 0..2 {
        let lab = |v: (usize, usize)| if copy == 0 { label_a(v) } else { label_b[&v] };
        for t in &tris {
            let set: BTreeSet<(usize, usize)> = t.iter().copied().collect();
            if set == removed {
                continue;
            }
            let mut tri: Vec<usize> = t.iter().map(|&v| lab(v)).collect();
            tri.sort_unstable();
            for x in 0..3 {
                for y in x + 1..3 {
                    simplices.insert(vec![tri[x], tri[y]]);
                }
            }
            simplices.insert(tri);
        }
        for (&(from, to), w) in &wraps {
            let (p, q) = (lab(from), lab(to));
            let mut v = vec![0i64; 4];
            v[2 * copy] = w[0];
            v[2 * copy + 1] = w[1];
            if p > q {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            let key = (p.min(q), p.max(q));
            if v.iter().any(|&x| x != 0) {
                exps.insert(key, v);
            }
        }
    }
    let entries: Vec<_> = exps.into_iter().collect();
    TwistedCechDatum {
        cover_size: next,
        simplices: simplices.into_iter().collect(),
        free_rank: 4,
        torsion_orders: vec![],
        edge_exponents: edges_map(&entries),
    }
}

/// Six-vertex real projective plane with its nontrivial order-2 character.
pub fn rp2() -> TwistedCechDatum {
    let tris: [[usize; 3]; 10] = [
        [0, 1, 2],
        [0, 1, 3],
        [0, 2, 4],
        [0, 3, 5],
        [0, 4, 5],
        [1, 2, 5],
        [1, 3, 4],
        [1, 4, 5],
        [2, 3, 4],
        [2, 3, 5],
    ];
    let edges: Vec<(usize, usize)> = (0..6).flat_map(|j| (j + 1..6).map(move |k| (j, k))).collect();
    let pos = |j: usize, k: usize| edges.iter().position(|&e| e == (j, k)).expect("edge");
    let coboundaries: BTreeSet<u32> = (0u32..64)
        .map(|b| {
            edges.iter().enumerate().fold(0u32, |acc, (i, &(j, k))| {
                acc | ((((b >> j) ^ (b >> k)) & 1) << i)
            })
        })
        .collect();
    let bit = |a: u32, j: usize, k: usize| (a >> pos(j, k)) & 1;
    let cocycle = (0u32..1 << edges.len())
        .find(|&a| {
            !coboundaries.contains(&a)
                && tris
                    .iter()
                    .all(|t| (bit(a, t[0], t[1]) + bit(a, t[1], t[2]) + bit(a, t[0], t[2])) % 2 == 0)
        })
        .expect("RP^2 carries a nontrivial order-2 class");
    let mut simplices: Vec<Vec<usize>> = edges.iter().map(|&(j, k)| vec![j, k]).collect();
    simplices.extend(tris.iter().map(|t| t.to_vec()));
    let entries: Vec<_> = edges
        .iter()
        .filter(|&&(j, k)| bit(cocycle, j, k) == 1)
        .map(|&e| (e, vec![1]))
        .collect();
    TwistedCechDatum {
        cover_size: 6,
        simplices,
        free_rank: 0,
        torsion_orders: vec![2],
        edge_exponents: edges_map(&entries),
    }
}

/// Every shipped nerve, by name.
pub fn all_nerves() -> Vec<(&'static str, TwistedCechDatum)> {
    vec![
        ("circle3", circle3()),
        ("genus2", genus2()),
        ("rp2", rp2()),
        ("torus9", torus9()),
        ("wedge2", wedge2()),
    ]
}

pub fn nerve_by_name(name: &str) -> Option<TwistedCechDatum> {
    all_nerves().into_iter().find(|(n, _)| *n == name).map(|(_, d)| d)
}

//! Graph approximations `G_l` of the bubble-diamond fractal.
//!
//! Vertices are numbered breadth-first: `q1 = 0`, `q2 = 1`, then the two
//! junctions of every cell, depth by depth, cells in base-`(b+2)` word order.
//! Cell `w` has children `F_w F_1, ..., F_w F_{b+2}`; copies `1..=b` are the
//! bubbles joining the junctions `J1`, `J2`, copy `b+1` joins `q1` to `J1` and
//! copy `b+2` joins `J2` to `q2`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{to_fraction_string, Rational};

pub const MAX_B: usize = 64;

/// Checks `b >= 1`.
pub fn check_b(b: usize) -> Result<()> {
    if b == 0 {
        return Err(Error::InvalidArgument("branching parameter b must be at least 1".into()));
    }
    Ok(())
}

/// Number of vertices of `G_level`: `2 + 2((b+2)^l - 1)/(b+1)`.
pub fn vertex_count(b: usize, level: usize) -> u128 {
    let n = (b as u128 + 2).pow(level as u32);
    2 + 2 * (n - 1) / (b as u128 + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Anchor {
    Q1,
    Q2,
}

impl Anchor {
    pub fn index(self) -> usize {
        match self {
            Anchor::Q1 => 0,
            Anchor::Q2 => 1,
        }
    }

    pub fn flip(self) -> Anchor {
        match self {
            Anchor::Q1 => Anchor::Q2,
            Anchor::Q2 => Anchor::Q1,
        }
    }
}

/// A point `F_{w_1} ... F_{w_d}(q_anchor)`; copy indices run over `1..=b+2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexAddress {
    pub word: Vec<usize>,
    pub anchor: Anchor,
}

impl VertexAddress {
    pub fn new(word: Vec<usize>, anchor: Anchor) -> Self {
        VertexAddress { word, anchor }
    }

    pub fn q1() -> Self {
        Self::new(Vec::new(), Anchor::Q1)
    }

    pub fn q2() -> Self {
        Self::new(Vec::new(), Anchor::Q2)
    }

    /// Image under the left/right reflection of the fractal.
    pub fn mirror(&self, b: usize) -> Self {
        let word = self
            .word
            .iter()
            .map(|&i| {
                if i == b + 1 {
                    b + 2
                } else if i == b + 2 {
                    b + 1
                } else {
                    i
                }
            })
            .collect();
        Self::new(word, self.anchor.flip())
    }
}

impl fmt::Display for VertexAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word: Vec<String> = self.word.iter().map(|i| i.to_string()).collect();
        let anchor = match self.anchor {
            Anchor::Q1 => "q1",
            Anchor::Q2 => "q2",
        };
        write!(f, "{}:{}", word.join("."), anchor)
    }
}

impl FromStr for VertexAddress {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad vertex address {s:?}"));
        let (word, anchor) = s.rsplit_once(':').ok_or_else(bad)?;
        let anchor = match anchor {
            "q1" => Anchor::Q1,
            "q2" => Anchor::Q2,
            _ => return Err(bad()),
        };
        let word = if word.is_empty() {
            Vec::new()
        } else {
            word.split('.')
                .map(|t| t.parse::<usize>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(VertexAddress::new(word, anchor))
    }
}

/// Canonical name of the point `addr`.
///
/// Boundary points keep the empty word. Any other point is a junction of a
/// unique cell `w` and is written `w.(b+1):q2` (the junction next to `q1`) or
/// `w.(b+2):q1` (the junction next to `q2`).
pub fn canonicalize(addr: &VertexAddress, b: usize) -> Result<VertexAddress> {
    check_b(b)?;
    for &i in &addr.word {
        if i == 0 || i > b + 2 {
            return Err(Error::CopyIndex { index: i, max: b + 2 });
        }
    }
    let mut word = addr.word.clone();
    let anchor = addr.anchor;
    while let Some(&last) = word.last() {
        match (last, anchor) {
            (i, Anchor::Q1) if i == b + 1 => {
                word.pop();
            }
            (i, Anchor::Q2) if i == b + 2 => {
                word.pop();
            }
            (i, a) => {
                let near_q1 = if i == b + 1 {
                    true
                } else if i == b + 2 {
                    false
                } else {
                    a == Anchor::Q1
                };
                *word.last_mut().unwrap() = if near_q1 { b + 1 } else { b + 2 };
                let anchor = if near_q1 { Anchor::Q2 } else { Anchor::Q1 };
                return Ok(VertexAddress::new(word, anchor));
            }
        }
    }
    Ok(VertexAddress::new(word, anchor))
}

/// The graph `G_level` with its full cell hierarchy.
#[derive(Debug, Clone)]
pub struct GraphLevel {
    pub b: usize,
    pub level: usize,
    /// `cells[d][c]` = vertex ids of `F_w(q1)`, `F_w(q2)` for the `c`-th cell of depth `d`.
    cells: Vec<Vec<[usize; 2]>>,
    addresses: Vec<VertexAddress>,
    /// Neighbours with edge multiplicity, sorted by neighbour id.
    adjacency: Vec<Vec<(usize, usize)>>,
    coords: Vec<(f64, f64)>,
}

impl GraphLevel {
    pub fn n_vertices(&self) -> usize {
        self.addresses.len()
    }

    pub fn vertices(&self) -> &[VertexAddress] {
        &self.addresses
    }

    pub fn address(&self, v: usize) -> &VertexAddress {
        &self.addresses[v]
    }

    /// Number of cells of depth `d` (`(b+2)^d`).
    pub fn n_cells(&self, depth: usize) -> usize {
        self.cells[depth].len()
    }

    /// Boundary vertex ids `(F_w q1, F_w q2)` of cell `index` at `depth`.
    pub fn cell_boundary(&self, depth: usize, index: usize) -> [usize; 2] {
        self.cells[depth][index]
    }

    /// Junction ids `(J1, J2)` created inside cell `index` at `depth < level`.
    pub fn junctions(&self, depth: usize, index: usize) -> [usize; 2] {
        debug_assert!(depth < self.level);
        let before = (self.b + 2).pow(depth as u32);
        let base = 2 + 2 * (before - 1) / (self.b + 1);
        [base + 2 * index, base + 2 * index + 1]
    }

    /// Copy-index word of a cell.
    pub fn cell_word(&self, depth: usize, index: usize) -> Vec<usize> {
        cell_word_of(self.b + 2, depth, index)
    }

    /// Index of the cell with the given word.
    pub fn cell_index(&self, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &i| acc * (self.b + 2) + (i - 1))
    }

    /// Vertex id of an address (not necessarily canonical).
    pub fn vertex_id(&self, addr: &VertexAddress) -> Result<usize> {
        let canon = canonicalize(addr, self.b)?;
        if canon.word.is_empty() {
            return Ok(canon.anchor.index());
        }
        let depth = canon.word.len() - 1;
        if depth >= self.level {
            return Err(Error::UnknownVertex(addr.to_string()));
        }
        let cell = self.cell_index(&canon.word[..depth]);
        let k = if canon.anchor == Anchor::Q2 { 0 } else { 1 };
        Ok(self.junctions(depth, cell)[k])
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Degree counted with multiplicity; equals the number of finest cells containing `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].iter().map(|&(_, m)| m).sum()
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        v < 2
    }

    /// Unordered edges `(v, w, multiplicity)` with `v < w`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (v, nb) in self.adjacency.iter().enumerate() {
            for &(w, m) in nb {
                if v < w {
                    out.push((v, w, m));
                }
            }
        }
        out
    }

    /// Edge count with multiplicity.
    pub fn edge_count(&self) -> usize {
        self.edges().iter().map(|e| e.2).sum()
    }

    pub fn coords(&self, v: usize) -> (f64, f64) {
        self.coords[v]
    }

    /// Level at which `v` first appears (0 for `q1`, `q2`). Ids are stable
    /// under refinement: vertex `v` of `G_l` is vertex `v` of every finer graph.
    pub fn vertex_level(&self, v: usize) -> usize {
        if v < 2 {
            0
        } else {
            self.addresses[v].word.len()
        }
    }
}

/// Builds `G_level`.
pub fn build_graph(b: usize, level: usize) -> Result<GraphLevel> {
    check_b(b)?;
    let m = b + 2;
    let n = vertex_count(b, level);
    if n > usize::MAX as u128 / 4 || (m as u128).pow(level as u32) > (1u128 << 40) {
        return Err(Error::InvalidArgument(format!("G_{level} with b={b} is too large")));
    }
    let n = n as usize;

    let mut addresses = vec![VertexAddress::q1(), VertexAddress::q2()];
    addresses.reserve(n - 2);
    let mut cells: Vec<Vec<[usize; 2]>> = vec![vec![[0, 1]]];
    for depth in 0..level {
        let parent = &cells[depth];
        let mut next = Vec::with_capacity(parent.len() * m);
        for (c, &[x, y]) in parent.iter().enumerate() {
            let j1 = addresses.len();
            let j2 = j1 + 1;
            let mut word = cell_word_of(m, depth, c);
            word.push(b + 1);
            addresses.push(VertexAddress::new(word.clone(), Anchor::Q2));
            *word.last_mut().unwrap() = b + 2;
            addresses.push(VertexAddress::new(word, Anchor::Q1));
            for _ in 0..b {
                next.push([j1, j2]);
            }
            next.push([x, j1]);
            next.push([j2, y]);
        }
        cells.push(next);
    }
    debug_assert_eq!(addresses.len(), n);

    let mut edge_map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for &[x, y] in &cells[level] {
        *edge_map.entry((x.min(y), x.max(y))).or_insert(0) += 1;
    }
    let mut adjacency = vec![Vec::new(); n];
    for (&(x, y), &mult) in &edge_map {
        adjacency[x].push((y, mult));
        adjacency[y].push((x, mult));
    }
    for nb in &mut adjacency {
        nb.sort_unstable();
    }

    let coords = layout_coords(b, level, &cells, n);
    Ok(GraphLevel { b, level, cells, addresses, adjacency, coords })
}

fn cell_word_of(m: usize, depth: usize, index: usize) -> Vec<usize> {
    let mut word = vec![0; depth];
    let mut c = index;
    for slot in word.iter_mut().rev() {
        *slot = c % m + 1;
        c /= m;
    }
    word
}

/// Exact measure weights `c(x) / (2 (b+2)^l)` indexed by vertex id.
pub fn measure_weights(g: &GraphLevel) -> Vec<Rational> {
    let den = BigInt::from(2) * BigInt::from(g.b + 2).pow(g.level as u32);
    (0..g.n_vertices())
        .map(|v| Rational::new(BigInt::from(g.degree(v)), den.clone()))
        .collect()
}

/// Bubble fan-out relative to the chord length.
const BULGE: f64 = 0.6;

// Each cell with endpoints P, Q places its junctions at 1/3 and 2/3 of the
// chord, pushed along the normal by the bubble offset the cell inherited from
// its parent. Spine cells inherit zero offset.
fn layout_coords(b: usize, level: usize, cells: &[Vec<[usize; 2]>], n: usize) -> Vec<(f64, f64)> {
    let mut coords = vec![(0.0, 0.0); n];
    coords[0] = (0.0, 0.5);
    coords[1] = (1.0, 0.5);
    let m = b + 2;
    let mut offsets = vec![0.0f64];
    for depth in 0..level {
        let mut next = Vec::with_capacity(offsets.len() * m);
        for (c, &[x, y]) in cells[depth].iter().enumerate() {
            let (px, py) = coords[x];
            let (qx, qy) = coords[y];
            let (vx, vy) = (qx - px, qy - py);
            let o = offsets[c];
            let (nx, ny) = (-vy * o, vx * o);
            let base = 2 + 2 * (m.pow(depth as u32) - 1) / (b + 1) + 2 * c;
            coords[base] = (px + vx / 3.0 + nx, py + vy / 3.0 + ny);
            coords[base + 1] = (px + 2.0 * vx / 3.0 + nx, py + 2.0 * vy / 3.0 + ny);
            for i in 1..=b {
                next.push((i as f64 - (b as f64 + 1.0) / 2.0) * BULGE / b as f64);
            }
            next.push(0.0);
            next.push(0.0);
        }
        offsets = next;
    }
    coords
}

/// Layout coordinates indexed by vertex id.
pub fn layout(g: &GraphLevel) -> Vec<(f64, f64)> {
    g.coords.clone()
}

#[derive(Serialize)]
struct GraphJson {
    b: usize,
    level: usize,
    vertices: Vec<String>,
    edges: Vec<(String, String, usize)>,
    edge_count: usize,
    weights: BTreeMap<String, String>,
    coords: BTreeMap<String, [f64; 2]>,
}

/// JSON export `{b, level, vertices, edges, edge_count, weights, coords}`;
/// edges are `[v, w, multiplicity]` and `edge_count` counts multiplicity.
pub fn graph_json(g: &GraphLevel) -> serde_json::Value {
    let names: Vec<String> = g.vertices().iter().map(|a| a.to_string()).collect();
    let weights = measure_weights(g);
    let doc = GraphJson {
        b: g.b,
        level: g.level,
        vertices: names.clone(),
        edges: g
            .edges()
            .into_iter()
            .map(|(v, w, m)| (names[v].clone(), names[w].clone(), m))
            .collect(),
        edge_count: g.edge_count(),
        weights: names
            .iter()
            .zip(&weights)
            .map(|(n, w)| (n.clone(), to_fraction_string(w)))
            .collect(),
        coords: names
            .iter()
            .enumerate()
            .map(|(v, n)| {
                let (x, y) = g.coords(v);
                (n.clone(), [x, y])
            })
            .collect(),
    };
    serde_json::to_value(doc).expect("graph serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;
    use num_traits::Zero;

    fn addr(s: &str) -> VertexAddress {
        s.parse().unwrap()
    }

    #[test]
    fn level_one_b3() {
        let g = build_graph(3, 1).unwrap();
        assert_eq!(g.n_vertices(), 4);
        assert_eq!(g.edge_count(), 5);
        let edges = g.edges();
        assert_eq!(edges, vec![(0, 2, 1), (1, 3, 1), (2, 3, 3)]);
    }

    #[test]
    fn level_zero() {
        let g = build_graph(1, 0).unwrap();
        assert_eq!(g.n_vertices(), 2);
        assert_eq!(g.edges(), vec![(0, 1, 1)]);
    }

    #[test]
    fn level_two_b3() {
        let g = build_graph(3, 2).unwrap();
        assert_eq!(g.n_vertices(), 14);
        assert_eq!(g.edge_count(), 25);
    }

    #[test]
    fn rejects_zero_b() {
        assert!(build_graph(0, 2).is_err());
    }

    #[test]
    fn canonical_examples() {
        assert_eq!(canonicalize(&addr("1:q1"), 3).unwrap(), addr("4:q2"));
        assert_eq!(canonicalize(&addr("4:q1"), 3).unwrap(), addr(":q1"));
        assert_eq!(canonicalize(&addr("2:q2"), 3).unwrap(), addr("5:q1"));
        assert_eq!(canonicalize(&addr("5.5:q2"), 3).unwrap(), addr(":q2"));
        assert_eq!(canonicalize(&addr("2.4.4:q1"), 3).unwrap(), addr("4:q2"));
        assert!(canonicalize(&addr("6:q1"), 3).is_err());
        assert!(canonicalize(&addr("0:q1"), 3).is_err());
    }

    #[test]
    fn address_round_trip() {
        for s in [":q1", ":q2", "3.1.2:q1", "4:q2"] {
            assert_eq!(addr(s).to_string(), s);
        }
        assert!("3.x:q1".parse::<VertexAddress>().is_err());
        assert!("3:q3".parse::<VertexAddress>().is_err());
    }

    #[test]
    fn vertex_ids_match_addresses() {
        let g = build_graph(2, 3).unwrap();
        for v in 0..g.n_vertices() {
            assert_eq!(g.vertex_id(g.address(v)).unwrap(), v);
            assert_eq!(canonicalize(g.address(v), 2).unwrap(), *g.address(v));
        }
    }

    #[test]
    fn weights_b1_level1() {
        let g = build_graph(1, 1).unwrap();
        let w = measure_weights(&g);
        assert_eq!(w, vec![rat(1, 6), rat(1, 6), rat(1, 3), rat(1, 3)]);
    }

    #[test]
    fn weights_level0_and_sum() {
        let g = build_graph(2, 0).unwrap();
        assert_eq!(measure_weights(&g), vec![rat(1, 2), rat(1, 2)]);
        for b in 1..5 {
            for l in 0..4 {
                let g = build_graph(b, l).unwrap();
                let total = measure_weights(&g).into_iter().fold(Rational::zero(), |s, w| s + w);
                assert_eq!(total, rat(1, 1));
            }
        }
    }

    #[test]
    fn layout_b1_is_the_interval() {
        let g = build_graph(1, 2).unwrap();
        let v = g.vertex_id(&addr("2.2:q2")).unwrap();
        let (x, y) = g.coords(v);
        assert!((x - 1.0 / 9.0).abs() < 1e-15 && y == 0.5);
        let g = build_graph(1, 5).unwrap();
        for v in 0..g.n_vertices() {
            assert_eq!(g.coords(v).1, 0.5);
        }
    }

    #[test]
    fn layout_b2_junctions() {
        let g = build_graph(2, 1).unwrap();
        assert!((g.coords(2).0 - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.coords(3).0 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn layout_stays_in_unit_square() {
        for b in 1..7 {
            let g = build_graph(b, 4).unwrap();
            for v in 0..g.n_vertices() {
                let (x, y) = g.coords(v);
                assert!((0.0..=1.0).contains(&x) && (0.0..=1.0).contains(&y), "b={b} {x} {y}");
            }
        }
    }
}

//! Canonical and extremal point sets: Bose-Burton geometries, affine sets,
//! graphic matroids, direct sums, and a search for sets at the density
//! threshold that have no triangle-free flat of corank `n-2`.

use std::collections::BTreeSet;

use rand::seq::IteratorRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ambient::{dot, AmbientGeometry, Echelon, GfVector, MAX_RANK};
use crate::error::{Error, Result};
use crate::matroid::pg_free;
use crate::pointset::PointSet;
use crate::structure::{find_triangle_free_flat, Strategy};

/// A simple graph on vertices `0..vertex_count`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    vertex_count: u32,
    edges: Vec<(u32, u32)>,
}

impl GraphSpec {
    /// Graphs are limited to 32 vertices so that edge vectors fit a word.
    pub fn new(vertex_count: u32, edges: Vec<(u32, u32)>) -> Result<Self> {
        if vertex_count > 32 {
            return Err(Error::InvalidParameter(format!(
                "graphs are limited to 32 vertices, got {vertex_count}"
            )));
        }
        let mut seen = BTreeSet::new();
        for &(u, v) in &edges {
            if u == v {
                return Err(Error::InvalidParameter(format!("loop at vertex {u}")));
            }
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) leaves the vertex range 0..{vertex_count}"
                )));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidParameter(format!("repeated edge ({u}, {v})")));
            }
        }
        Ok(GraphSpec { vertex_count, edges })
    }

    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Parses an edge list: one `u v` pair per line (comma also separates),
    /// `#` starts a comment, and an optional `vertices N` line fixes the
    /// vertex count. Otherwise the count is one more than the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut declared = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let fields: Vec<(usize, &str)> = tokens(line);
            if fields.is_empty() {
                continue;
            }
            let at = |col: usize| format!("line {}, column {}", lineno + 1, col + 1);
            let number = |(col, tok): (usize, &str)| -> Result<u32> {
                tok.parse::<u32>()
                    .map_err(|_| Error::parse(at(col), format!("expected a vertex index, found {tok:?}")))
            };
            if fields[0].1 == "vertices" {
                if fields.len() != 2 {
                    return Err(Error::parse(at(fields[0].0), "expected `vertices N`"));
                }
                declared = Some(number(fields[1])?);
                continue;
            }
            if fields.len() != 2 {
                return Err(Error::parse(
                    at(fields[0].0),
                    format!("expected two vertex indices, found {} fields", fields.len()),
                ));
            }
            edges.push((number(fields[0])?, number(fields[1])?));
        }
        let inferred = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        GraphSpec::new(declared.unwrap_or(inferred), edges)
    }
}

/// Whitespace/comma separated tokens with their byte columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        let sep = ch.is_whitespace() || ch == ',';
        match (sep, start) {
            (true, Some(s)) => {
                out.push((s, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out
}

pub fn complete_graph(k: u32) -> Result<GraphSpec> {
    let edges = (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect();
    GraphSpec::new(k, edges)
}

/// The complement of `span(e_0, ..., e_{r-n})`, a flat of corank `n-1`.
/// It has `(1 - 2/2^n) 2^r` points and is `PG(n-1,2)`-free.
pub fn bose_burton(r: u32, n: u32) -> Result<PointSet> {
    if n < 2 || r < n {
        return Err(Error::InvalidParameter(format!("need r >= n >= 2, got r={r}, n={n}")));
    }
    let g = AmbientGeometry::new(r)?;
    let low = (1u32 << (r - n + 1)) - 1;
    PointSet::from_points(g, g.points().filter(|p| p.0 & !low != 0))
}

/// `{x : x . gamma = 1}`
pub fn affine_set(r: u32, gamma: GfVector) -> Result<PointSet> {
    let g = AmbientGeometry::new(r)?;
    g.check_point(gamma)?;
    PointSet::from_points(g, g.points().filter(|&x| dot(x, gamma) == 1))
}

/// Edge vectors `e_u + e_v`, written in coordinates of the canonical basis
/// of their span. The ambient rank is `vertex_count - components`.
pub fn graphic_representation(graph: &GraphSpec) -> Result<PointSet> {
    let vectors: Vec<u32> = graph.edges.iter().map(|&(u, v)| (1 << u) ^ (1 << v)).collect();
    let mut ech = Echelon::new();
    for &v in &vectors {
        ech.insert(v);
    }
    let rank = ech.rank();
    if rank == 0 {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    if rank > MAX_RANK {
        return Err(Error::RankOutOfRange(rank));
    }
    let pivots: Vec<u32> = ech.into_reduced().iter().map(|&row| 31 - row.leading_zeros()).collect();
    let g = AmbientGeometry::new(rank)?;
    let coords = vectors.iter().map(|&v| {
        pivots
            .iter()
            .enumerate()
            .fold(0u32, |c, (i, &piv)| c | (v >> piv & 1) << i)
    });
    PointSet::from_words(g, coords)
}

/// `M(K_5)` at rank 4: every vector of weight one or two.
pub fn k5() -> PointSet {
    graphic_representation(&complete_graph(5).expect("K5 is simple")).expect("K5 has rank 4")
}

/// `{(x, 0) : x in A} ∪ {(0, y) : y in B}` in rank `r_A + r_B`.
pub fn direct_sum(a: &PointSet, b: &PointSet) -> Result<PointSet> {
    let (ra, rb) = (a.rank(), b.rank());
    let g = AmbientGeometry::new(ra + rb)?;
    PointSet::from_words(g, a.iter().map(|x| x.0).chain(b.iter().map(|y| y.0 << ra)))
}

/// Preimage of `set` under the projection onto the low `set.rank()`
/// coordinates, in rank `r`.
pub fn blow_up(set: &PointSet, r: u32) -> Result<PointSet> {
    let low = set.rank();
    if r < low {
        return Err(Error::InvalidParameter(format!("cannot blow rank {low} up to {r}")));
    }
    let g = AmbientGeometry::new(r)?;
    let mask = (1u32 << low) - 1;
    PointSet::from_points(g, g.points().filter(|p| set.contains_word(p.0 & mask)))
}

/// `{(x, 0) : x in E} ∪ {(y, 1) : y arbitrary}` in rank `r + 1`. Raises the
/// freeness level and keeps a set at the `(1 - 3/2^n) 2^r` threshold on it.
pub fn stack(set: &PointSet) -> Result<PointSet> {
    let r = set.rank();
    let g = AmbientGeometry::new(r + 1)?;
    let top = 1u32 << r;
    PointSet::from_words(g, set.iter().map(|x| x.0).chain(top..2 * top))
}

/// Starting sets for the explorer, all exactly at the threshold size.
fn explorer_seeds(r: u32, n: u32) -> Result<Vec<PointSet>> {
    let base = k5();
    let mut seeds = Vec::new();
    // K5 blown up to rank r - (n - 3), then stacked up to level n.
    let mut e = blow_up(&base, r - (n - 3))?;
    for _ in 3..n {
        e = stack(&e)?;
    }
    seeds.push(e);
    // K5 stacked first, then blown up.
    let mut e = base.clone();
    for _ in 3..n {
        e = stack(&e)?;
    }
    seeds.push(blow_up(&e, r)?);
    // Direct sum with a Bose-Burton block, trimmed or padded to size.
    if r >= 6 {
        let tail = bose_burton(r - 4, 2)?;
        seeds.push(direct_sum(&base, &tail)?);
    }
    Ok(seeds)
}

fn threshold_size(r: u32, n: u32) -> usize {
    (((1u64 << n) - 3) << (r - n)) as usize
}

/// Whether the set is a certified tightness witness: exact threshold size,
/// `PG(n-1,2)`-free, and no triangle-free flat of corank `n-2`.
pub fn is_tightness_witness(set: &PointSet, n: u32) -> Result<bool> {
    let r = set.rank();
    if set.len() != threshold_size(r, n) || !pg_free(set, n) {
        return Ok(false);
    }
    let (res, _) = find_triangle_free_flat(set, n, Strategy::Exhaustive)?;
    Ok(!res.found)
}

/// Pads or trims a seed to the target size while staying `PG(n-1,2)`-free.
fn fit_to_size(mut e: PointSet, n: u32, target: usize, rng: &mut ChaCha8Rng) -> Option<PointSet> {
    while e.len() > target {
        let x = e.iter().choose(rng)?;
        e.remove(x);
    }
    let mut tries = 0;
    while e.len() < target && tries < 64 * target {
        tries += 1;
        let y = e.complement().iter().choose(rng)?;
        e.insert_unchecked(y);
        if !pg_free(&e, n) {
            e.remove(y);
        }
    }
    (e.len() == target && pg_free(&e, n)).then_some(e)
}

/// Seeded local search over single-point swaps for `PG(n-1,2)`-free sets of
/// size exactly `(1 - 3/2^n) 2^r` without a triangle-free flat of corank
/// `n-2`. Every returned set is re-certified by the exhaustive flat scan;
/// the result is sorted and deduplicated. `budget` bounds the number of
/// swap evaluations across all restarts.
pub fn tightness_explorer(r: u32, n: u32, budget: u64, seed: u64) -> Result<Vec<PointSet>> {
    if n < 3 || r < 4 || r < n {
        return Err(Error::InvalidParameter(format!(
            "need r >= 4, n >= 3, r >= n, got r={r}, n={n}"
        )));
    }
    AmbientGeometry::new(r)?;
    let target = threshold_size(r, n);
    let seeds = explorer_seeds(r, n)?;
    let restarts = budget.clamp(1, 8);
    let per_restart = budget / restarts;

    let runs: Vec<Result<Vec<PointSet>>> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let start = seeds[i as usize % seeds.len()].clone();
            let mut found = Vec::new();
            let Some(mut e) = fit_to_size(start, n, target, &mut rng) else {
                return Ok(found);
            };
            if is_tightness_witness(&e, n)? {
                found.push(e.clone());
            }
            for _ in 0..per_restart {
                let (Some(x), Some(y)) = (e.iter().choose(&mut rng), e.complement().iter().choose(&mut rng)) else {
                    break;
                };
                e.remove(x);
                e.insert_unchecked(y);
                if !pg_free(&e, n) {
                    e.remove(y);
                    e.insert_unchecked(x);
                    continue;
                }
                if is_tightness_witness(&e, n)? {
                    found.push(e.clone());
                }
            }
            Ok(found)
        })
        .collect();

    let mut all = BTreeSet::new();
    for run in runs {
        for e in run? {
            all.insert(e.to_vec());
        }
    }
    let g = AmbientGeometry::new(r)?;
    all.into_iter().map(|w| PointSet::from_words(g, w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{enumerate_flats, flat_points};
    use crate::matroid::{critical_number, is_pg_free, matroid_rank, triangle_count_naive};
    use crate::rational::Rational;
    use crate::spectral::uniformity;
    use rand::Rng;

    #[test]
    fn bose_burton_sizes_and_freeness() {
        for r in 2..=6 {
            for n in 2..=r {
                let e = bose_burton(r, n).unwrap();
                assert_eq!(e.len() as u64, (1u64 << r) - (1u64 << (r - n + 1)));
                assert!(!is_pg_free(&e, n).unwrap().found, "r={r} n={n}");
            }
        }
        let e = bose_burton(4, 2).unwrap();
        assert_eq!(e.len(), 8);
        assert_eq!(triangle_count_naive(&e), 0);
        let e = bose_burton(4, 3).unwrap();
        assert_eq!(e.len(), 12);
        assert!(triangle_count_naive(&e) > 0);
        assert_eq!(bose_burton(5, 5).unwrap().len(), 30);
        assert!(bose_burton(3, 4).is_err());
        assert!(bose_burton(4, 1).is_err());
    }

    #[test]
    fn affine_examples() {
        assert_eq!(affine_set(3, GfVector(1)).unwrap().to_vec(), vec![1, 3, 5, 7]);
        assert!(affine_set(3, GfVector::ZERO).is_err());
        for r in 1..=8 {
            let e = affine_set(r, GfVector((1 << r) - 1)).unwrap();
            assert_eq!(e.len(), 1 << (r - 1));
            assert_eq!(triangle_count_naive(&e), 0);
            assert_eq!(critical_number(&e), 1);
            assert_eq!(uniformity(&e).epsilon_min, Rational::new(1, 2));
        }
    }

    #[test]
    fn graphic_examples() {
        let e = k5();
        assert_eq!(e.rank(), 4);
        assert_eq!(e.to_vec(), vec![1, 2, 3, 4, 5, 6, 8, 9, 10, 12]);
        assert_eq!(matroid_rank(&e), 4);
        assert!(!is_pg_free(&e, 3).unwrap().found);
        assert_eq!(critical_number(&e), 3);

        let k3 = graphic_representation(&complete_graph(3).unwrap()).unwrap();
        assert_eq!(k3.rank(), 2);
        assert_eq!(k3.to_vec(), vec![1, 2, 3]);
        let k4 = graphic_representation(&complete_graph(4).unwrap()).unwrap();
        assert_eq!((k4.len(), k4.rank()), (6, 3));

        // two disjoint edges: rank = 4 vertices - 2 components
        let g = GraphSpec::new(4, vec![(0, 1), (2, 3)]).unwrap();
        assert_eq!(graphic_representation(&g).unwrap().rank(), 2);
    }

    #[test]
    fn k5_triangles_match_graph_triangles() {
        // each triangle of K5 is a 3-element circuit: C(5,3) = 10 of them
        assert_eq!(triangle_count_naive(&k5()), 60);
    }

    #[test]
    fn graph_spec_validation_and_parsing() {
        assert!(GraphSpec::new(3, vec![(0, 0)]).is_err());
        assert!(GraphSpec::new(3, vec![(0, 1), (1, 0)]).is_err());
        assert!(GraphSpec::new(3, vec![(0, 3)]).is_err());
        let g = GraphSpec::parse_edge_list("# triangle\n0 1\n1,2\n\n2 0 # closing edge\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges().len(), 3);
        let g = GraphSpec::parse_edge_list("vertices 6\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 6);
        let err = GraphSpec::parse_edge_list("0 1\n1 x\n").unwrap_err();
        assert_eq!(
            err.to_string(),
            "parse error at line 2, column 3: expected a vertex index, found \"x\""
        );
        assert!(GraphSpec::parse_edge_list("0 1 2\n").is_err());
    }

    #[test]
    fn direct_sum_adds_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..30 {
            let (ra, rb) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
            let mk = |rng: &mut ChaCha8Rng, r: u32| {
                let g = AmbientGeometry::new(r).unwrap();
                PointSet::from_points(g, g.points().filter(|_| rng.gen_bool(0.6))).unwrap()
            };
            let a = mk(&mut rng, ra);
            let b = mk(&mut rng, rb);
            let s = direct_sum(&a, &b).unwrap();
            assert_eq!(s.len(), a.len() + b.len());
            assert_eq!(
                triangle_count_naive(&s),
                triangle_count_naive(&a) + triangle_count_naive(&b)
            );
        }
        let a = PointSet::empty(AmbientGeometry::new(2).unwrap());
        let b = k5();
        let s = direct_sum(&a, &b).unwrap();
        assert_eq!(s.to_vec(), b.iter().map(|p| p.0 << 2).collect::<Vec<_>>());
        let huge = PointSet::empty(AmbientGeometry::new(21).unwrap());
        assert!(direct_sum(&huge, &b).is_err());
    }

    #[test]
    fn stacking_and_blow_up_stay_free_at_threshold() {
        let e = blow_up(&k5(), 6).unwrap();
        assert_eq!(e.len(), threshold_size(6, 3));
        assert!(pg_free(&e, 3));
        let s = stack(&k5()).unwrap();
        assert_eq!(s.len(), threshold_size(5, 4));
        assert!(pg_free(&s, 4));
    }

    #[test]
    fn explorer_finds_k5_at_rank_four() {
        let found = tightness_explorer(4, 3, 20, 1).unwrap();
        assert!(found.contains(&k5()));
        for e in &found {
            assert_eq!(e.len(), 10);
            assert!(pg_free(e, 3));
            for f in enumerate_flats(e.ambient(), 1).unwrap() {
                assert!(triangle_count_naive(&e.intersection(&flat_points(&f)).unwrap()) > 0);
            }
        }
        assert!(tightness_explorer(3, 3, 5, 1).is_err());
    }

    #[test]
    fn explorer_is_deterministic() {
        let a = tightness_explorer(5, 3, 40, 9).unwrap();
        let b = tightness_explorer(5, 3, 40, 9).unwrap();
        assert_eq!(a, b);
        for e in &a {
            assert_eq!(e.len(), 20);
            assert!(is_tightness_witness(e, 3).unwrap());
        }
    }
}

//! Depth-first search for subspaces whose nonzero points all lie in a set.
//!
//! A rank-`t` subspace `T` is reached through its greedy basis: `p_1` is the
//! least point of `T`, and `p_{i+1}` the least point of `T` outside
//! `span(p_1..p_i)`. Such a basis has strictly increasing leading bits, each
//! `p_{i+1}` has zeros at the leading bits of the earlier ones, and since
//! `T` meets the low `r - t + i` coordinates in rank at least `i`,
//! `p_i < 2^(r - t + i)`.
//!
//! At depth `k` the search keeps the candidates for the next basis vector:
//! points `x > p_k` with zeros at the current leading bits such that
//! `x + s` is in the set for every `s` in the current span. Adding `p`
//! keeps the candidates `x > p` with `x + p` still a candidate.

use std::time::Instant;

use crate::ambient::{AmbientGeometry, Flat, GfVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// Optional bound on search effort; exceeding it yields [`Error::ResourceCap`].
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchLimit {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

impl SearchLimit {
    pub const NONE: SearchLimit = SearchLimit {
        max_nodes: None,
        deadline: None,
    };

    pub fn deadline(deadline: Instant) -> Self {
        SearchLimit {
            max_nodes: None,
            deadline: Some(deadline),
        }
    }
}

struct Level {
    cands: Vec<u32>,
    member: Vec<u64>,
}

impl Level {
    fn new(words: usize) -> Self {
        Level {
            cands: Vec::new(),
            member: vec![0; words],
        }
    }

    fn clear(&mut self) {
        for &x in &self.cands {
            self.member[(x >> 6) as usize] &= !(1u64 << (x & 63));
        }
        self.cands.clear();
    }
}

struct Dfs<'a> {
    root: &'a [u64],
    r: u32,
    t: u32,
    levels: Vec<Level>,
    basis: Vec<u32>,
    filtered: Vec<Vec<u32>>,
    nodes: u64,
    limit: SearchLimit,
}

#[inline]
fn bit(words: &[u64], x: u32) -> bool {
    words[(x >> 6) as usize] >> (x & 63) & 1 == 1
}

impl Dfs<'_> {
    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes & 0xfff == 0 {
            if let Some(max) = self.limit.max_nodes {
                if self.nodes > max {
                    return Err(Error::ResourceCap(format!("subspace search exceeded {max} nodes")));
                }
            }
            if let Some(d) = self.limit.deadline {
                if Instant::now() >= d {
                    return Err(Error::ResourceCap("subspace search exceeded its deadline".into()));
                }
            }
        }
        Ok(())
    }

    /// Chooses basis vector `k` (0-based) from level `k`'s candidates.
    fn descend(&mut self, k: usize) -> Result<bool> {
        let t = self.t as usize;
        let bound = 1u64 << (self.r - self.t + k as u32 + 1);
        let need_here = (1usize << (t - k)) - 1;
        let need_next = (1usize << (t - k - 1)) - 1;
        let n = self.levels[k].cands.len();
        let mut filtered_lead = u32::MAX;
        for idx in 0..n {
            let p = self.levels[k].cands[idx];
            if p as u64 >= bound || n - idx < need_here {
                break;
            }
            self.tick()?;
            self.basis.push(p);
            if k + 1 == t {
                return Ok(true);
            }
            let lead = 31 - p.leading_zeros();
            if lead != filtered_lead {
                // candidates above p with bit `lead` clear; shared by every p with this leading bit
                filtered_lead = lead;
                let from = self.levels[k].cands.partition_point(|&x| x >> lead <= 1);
                let mut buf = std::mem::take(&mut self.filtered[k]);
                buf.clear();
                buf.extend(self.levels[k].cands[from..].iter().filter(|&&x| x >> lead & 1 == 0));
                self.filtered[k] = buf;
            }
            let (lo, hi) = self.levels.split_at_mut(k + 1);
            let cur = &lo[k];
            let next = &mut hi[0];
            let member_k: &[u64] = if k == 0 { self.root } else { &cur.member };
            for &x in &self.filtered[k] {
                if bit(member_k, x ^ p) {
                    next.cands.push(x);
                    next.member[(x >> 6) as usize] |= 1u64 << (x & 63);
                }
            }
            let viable = next.cands.len() >= need_next;
            if viable && self.descend(k + 1)? {
                return Ok(true);
            }
            self.levels[k + 1].clear();
            self.basis.pop();
        }
        Ok(false)
    }
}

/// Finds the greedy basis of the lexicographically least rank-`t` subspace
/// whose nonzero points lie in `set`.
pub fn find_subspace(set: &PointSet, t: u32, limit: SearchLimit) -> Result<Option<Vec<GfVector>>> {
    let r = set.rank();
    if t == 0 {
        return Ok(Some(Vec::new()));
    }
    if t > r || set.len() < (1usize << t) - 1 {
        return Ok(None);
    }
    let words = set.words().len();
    let mut levels: Vec<Level> = Vec::with_capacity(t as usize);
    levels.push(Level {
        cands: set.iter().map(|p| p.0).collect(),
        member: Vec::new(),
    });
    for _ in 1..t {
        levels.push(Level::new(words));
    }
    let mut dfs = Dfs {
        root: set.words(),
        r,
        t,
        levels,
        basis: Vec::with_capacity(t as usize),
        filtered: vec![Vec::new(); t as usize],
        nodes: 0,
        limit,
    };
    if dfs.descend(0)? {
        Ok(Some(dfs.basis.into_iter().map(GfVector).collect()))
    } else {
        Ok(None)
    }
}

/// Largest rank of a subspace whose nonzero points lie in `set`, with a
/// witness flat (the rank-0 flat when `set` is empty).
pub fn max_subspace(set: &PointSet, limit: SearchLimit) -> Result<Flat> {
    let ambient: AmbientGeometry = set.ambient();
    let mut best = Flat::empty(ambient);
    for t in 1..=ambient.rank() {
        match find_subspace(set, t, limit)? {
            Some(basis) => best = Flat::from_basis(ambient, &basis)?,
            None => break,
        }
    }
    Ok(best)
}

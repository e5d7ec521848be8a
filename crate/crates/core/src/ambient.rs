//! Vectors, flats and hyperplanes of the binary projective geometry PG(r-1, 2).
//!
//! A point is a nonzero word of `r` bits; coordinate `i` is bit `i`. A flat is
//! stored as the reduced row-echelon basis of its subspace: every basis vector
//! has a distinct leading (highest) bit, that bit is clear in every other
//! basis vector, and vectors are ordered by leading bit ascending.

use std::fmt;
use std::ops::BitXor;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pointset::PointSet;

/// Hard cap on the ambient rank. A spectrum at this rank holds 2^24 entries.
pub const MAX_RANK: u32 = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct AmbientGeometry {
    rank: u32,
}

impl AmbientGeometry {
    pub fn new(rank: u32) -> Result<Self> {
        if (1..=MAX_RANK).contains(&rank) {
            Ok(AmbientGeometry { rank })
        } else {
            Err(Error::RankOutOfRange(rank))
        }
    }

    #[inline]
    pub fn rank(self) -> u32 {
        self.rank
    }

    /// Number of points, `2^r - 1`.
    #[inline]
    pub fn point_count(self) -> u32 {
        (1u32 << self.rank) - 1
    }

    /// Size of the underlying vector space, `2^r`.
    #[inline]
    pub fn space_size(self) -> usize {
        1usize << self.rank
    }

    #[inline]
    pub fn contains(self, v: GfVector) -> bool {
        v.0 >> self.rank == 0
    }

    pub fn check(self, v: GfVector) -> Result<GfVector> {
        if self.contains(v) {
            Ok(v)
        } else {
            Err(Error::VectorOutOfRange {
                word: v.0 as u64,
                rank: self.rank,
            })
        }
    }

    pub fn check_point(self, v: GfVector) -> Result<GfVector> {
        if v.is_zero() {
            return Err(Error::ZeroVector);
        }
        self.check(v)
    }

    /// All points in ascending word order.
    pub fn points(self) -> impl Iterator<Item = GfVector> {
        (1..=self.point_count()).map(GfVector)
    }

    pub fn unit(self, i: u32) -> GfVector {
        debug_assert!(i < self.rank);
        GfVector(1 << i)
    }

    pub(crate) fn same(self, other: AmbientGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AmbientMismatch {
                left: self.rank,
                right: other.rank,
            })
        }
    }
}

impl TryFrom<u32> for AmbientGeometry {
    type Error = Error;
    fn try_from(rank: u32) -> Result<Self> {
        AmbientGeometry::new(rank)
    }
}

impl From<AmbientGeometry> for u32 {
    fn from(a: AmbientGeometry) -> u32 {
        a.rank
    }
}

/// An element of GF(2)^r packed into a word.
#[derive(Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GfVector(pub u32);

impl GfVector {
    pub const ZERO: GfVector = GfVector(0);

    #[inline]
    pub fn word(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// Index of the highest set bit.
    #[inline]
    pub fn leading_bit(self) -> Option<u32> {
        (self.0 != 0).then(|| 31 - self.0.leading_zeros())
    }

    #[inline]
    pub fn dot(self, other: GfVector) -> u8 {
        dot(self, other)
    }
}

/// Standard dot product over GF(2): parity of the bitwise AND.
#[inline]
pub fn dot(a: GfVector, b: GfVector) -> u8 {
    ((a.0 & b.0).count_ones() & 1) as u8
}

impl BitXor for GfVector {
    type Output = GfVector;
    #[inline]
    fn bitxor(self, rhs: GfVector) -> GfVector {
        GfVector(self.0 ^ rhs.0)
    }
}

impl From<u32> for GfVector {
    fn from(w: u32) -> Self {
        GfVector(w)
    }
}

impl fmt::Debug for GfVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#b}", self.0)
    }
}

impl fmt::Display for GfVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl FromStr for GfVector {
    type Err = Error;

    /// Decimal or `0x`-prefixed hexadecimal.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let parsed = match t.strip_prefix("0x").or_else(|| t.strip_prefix("0X")) {
            Some(hex) => u32::from_str_radix(hex, 16),
            None => t.parse::<u32>(),
        };
        parsed
            .map(GfVector)
            .map_err(|_| Error::parse(format!("'{s}'"), "expected a decimal or 0x-prefixed hex integer"))
    }
}

impl Serialize for GfVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_u32(self.0)
    }
}

impl<'de> Deserialize<'de> for GfVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(v) => u32::try_from(v)
                .map(GfVector)
                .map_err(|_| serde::de::Error::custom(format!("vector {v} exceeds 32 bits"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Incremental row-echelon form keyed by leading bit.
#[derive(Clone, Debug)]
pub(crate) struct Echelon {
    slots: [u32; 32],
    rank: u32,
}

impl Echelon {
    pub(crate) fn new() -> Self {
        Echelon {
            slots: [0; 32],
            rank: 0,
        }
    }

    /// Reduces `v` against the stored rows, highest leading bit first.
    #[inline]
    pub(crate) fn reduce(&self, mut v: u32) -> u32 {
        while v != 0 {
            let top = 31 - v.leading_zeros();
            let row = self.slots[top as usize];
            if row == 0 {
                return v;
            }
            v ^= row;
        }
        0
    }

    /// Returns `true` if `v` was independent of the stored rows.
    pub(crate) fn insert(&mut self, v: u32) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        self.slots[(31 - v.leading_zeros()) as usize] = v;
        self.rank += 1;
        true
    }

    pub(crate) fn rank(&self) -> u32 {
        self.rank
    }

    /// Reduced basis, ascending by leading bit.
    pub(crate) fn into_reduced(mut self) -> Vec<u32> {
        for b in (0..32).rev() {
            let row = self.slots[b];
            if row == 0 {
                continue;
            }
            for h in b + 1..32 {
                if self.slots[h] >> b & 1 == 1 {
                    self.slots[h] ^= row;
                }
            }
        }
        self.slots.iter().copied().filter(|&r| r != 0).collect()
    }
}

/// GF(2) rank of a collection of vectors; 0 for an empty collection.
pub fn rank_of<I: IntoIterator<Item = GfVector>>(vectors: I) -> u32 {
    let mut ech = Echelon::new();
    for v in vectors {
        ech.insert(v.0);
        if ech.rank() == 32 {
            break;
        }
    }
    ech.rank()
}

/// A flat of PG(r-1, 2): the nonzero points of a subspace of GF(2)^r.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Flat {
    ambient: AmbientGeometry,
    basis: Vec<GfVector>,
}

impl Flat {
    /// The flat spanned by `vectors`, which may be dependent or contain zero.
    pub fn span<I: IntoIterator<Item = GfVector>>(ambient: AmbientGeometry, vectors: I) -> Result<Flat> {
        let mut ech = Echelon::new();
        for v in vectors {
            ambient.check(v)?;
            ech.insert(v.0);
        }
        Ok(Flat::from_reduced(ambient, ech.into_reduced()))
    }

    /// Builds a flat from an independent list and canonicalizes it.
    pub fn from_basis(ambient: AmbientGeometry, vectors: &[GfVector]) -> Result<Flat> {
        let mut ech = Echelon::new();
        for &v in vectors {
            ambient.check(v)?;
            if !ech.insert(v.0) {
                return Err(Error::DependentBasis);
            }
        }
        Ok(Flat::from_reduced(ambient, ech.into_reduced()))
    }

    fn from_reduced(ambient: AmbientGeometry, rows: Vec<u32>) -> Flat {
        Flat {
            ambient,
            basis: rows.into_iter().map(GfVector).collect(),
        }
    }

    pub fn full(ambient: AmbientGeometry) -> Flat {
        Flat::from_reduced(ambient, (0..ambient.rank()).map(|i| 1 << i).collect())
    }

    pub fn empty(ambient: AmbientGeometry) -> Flat {
        Flat {
            ambient,
            basis: Vec::new(),
        }
    }

    /// The subspace orthogonal to every vector in `normals`.
    pub fn annihilator(ambient: AmbientGeometry, normals: &[GfVector]) -> Result<Flat> {
        let mut ech = Echelon::new();
        for &v in normals {
            ambient.check(v)?;
            ech.insert(v.0);
        }
        Ok(Flat::from_reduced(
            ambient,
            annihilator_rows(ambient.rank(), &ech.into_reduced()),
        ))
    }

    pub fn ambient(&self) -> AmbientGeometry {
        self.ambient
    }

    pub fn basis(&self) -> &[GfVector] {
        &self.basis
    }

    pub fn rank(&self) -> u32 {
        self.basis.len() as u32
    }

    pub fn corank(&self) -> u32 {
        self.ambient.rank() - self.rank()
    }

    pub fn point_count(&self) -> u32 {
        (1u32 << self.rank()) - 1
    }

    /// Canonical basis of the orthogonal complement (the normal vectors).
    pub fn normals(&self) -> Vec<GfVector> {
        let rows: Vec<u32> = self.basis.iter().map(|v| v.0).collect();
        annihilator_rows(self.ambient.rank(), &rows)
            .into_iter()
            .map(GfVector)
            .collect()
    }

    pub fn contains(&self, v: GfVector) -> bool {
        let mut w = v.0;
        for b in self.basis.iter().rev() {
            let lead = 31 - b.0.leading_zeros();
            if w >> lead & 1 == 1 {
                w ^= b.0;
            }
        }
        w == 0
    }

    /// Coordinates of `v` relative to the canonical basis, or `None` when
    /// `v` is outside the flat. Bit `i` is the coefficient of `basis[i]`.
    pub fn coordinates(&self, v: GfVector) -> Option<GfVector> {
        if !self.contains(v) {
            return None;
        }
        let mut c = 0u32;
        for (i, b) in self.basis.iter().enumerate() {
            let lead = 31 - b.0.leading_zeros();
            c |= (v.0 >> lead & 1) << i;
        }
        Some(GfVector(c))
    }

    /// Inverse of [`Flat::coordinates`].
    pub fn lift(&self, coords: GfVector) -> GfVector {
        let mut v = 0u32;
        let mut c = coords.0;
        while c != 0 {
            let i = c.trailing_zeros();
            v ^= self.basis[i as usize].0;
            c &= c - 1;
        }
        GfVector(v)
    }

    /// Nonzero points of the flat in Gray-code order.
    pub fn points(&self) -> impl Iterator<Item = GfVector> + '_ {
        let count = self.point_count();
        let mut acc = 0u32;
        (1..=count).map(move |i| {
            acc ^= self.basis[i.trailing_zeros() as usize].0;
            GfVector(acc)
        })
    }

    pub fn to_point_set(&self) -> PointSet {
        flat_points(self)
    }

    /// Whether `other` is contained in `self`.
    pub fn contains_flat(&self, other: &Flat) -> bool {
        other.basis.iter().all(|&b| self.contains(b))
    }
}

/// Kernel of the map `x -> (x . row)_rows` for rows in reduced echelon form.
fn annihilator_rows(rank: u32, rows: &[u32]) -> Vec<u32> {
    let pivots: u32 = rows.iter().fold(0, |m, r| m | 1 << (31 - r.leading_zeros()));
    let mut out = Vec::with_capacity((rank as usize).saturating_sub(rows.len()));
    for j in 0..rank {
        if pivots >> j & 1 == 1 {
            continue;
        }
        let mut v = 1u32 << j;
        for &row in rows {
            if row >> j & 1 == 1 {
                v |= 1 << (31 - row.leading_zeros());
            }
        }
        out.push(v);
    }
    let mut ech = Echelon::new();
    for v in out {
        ech.insert(v);
    }
    ech.into_reduced()
}

impl fmt::Debug for Flat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Flat")
            .field("ambient_rank", &self.ambient.rank())
            .field("basis", &self.basis.iter().map(|v| v.0).collect::<Vec<_>>())
            .finish()
    }
}

#[derive(Serialize, Deserialize)]
struct FlatRepr {
    ambient_rank: u32,
    basis: Vec<GfVector>,
}

impl Serialize for Flat {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        FlatRepr {
            ambient_rank: self.ambient.rank(),
            basis: self.basis.clone(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Flat {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = FlatRepr::deserialize(deserializer)?;
        let ambient = AmbientGeometry::new(raw.ambient_rank).map_err(serde::de::Error::custom)?;
        Flat::from_basis(ambient, &raw.basis).map_err(serde::de::Error::custom)
    }
}

/// The span of `points`; the empty set spans the rank-0 flat.
pub fn closure<I: IntoIterator<Item = GfVector>>(ambient: AmbientGeometry, points: I) -> Result<Flat> {
    Flat::span(ambient, points)
}

/// The hyperplane `{x != 0 : x . gamma = 0}`.
pub fn hyperplane_of(ambient: AmbientGeometry, gamma: GfVector) -> Result<Flat> {
    ambient.check_point(gamma)?;
    Flat::annihilator(ambient, &[gamma])
}

/// Bitset of the nonzero points of `flat`.
pub fn flat_points(flat: &Flat) -> PointSet {
    let mut set = PointSet::empty(flat.ambient());
    for p in flat.points() {
        set.insert_unchecked(p);
    }
    set
}

/// Every corank-`c` flat exactly once, ordered lexicographically by its
/// canonical normal basis.
pub fn enumerate_flats(ambient: AmbientGeometry, corank: u32) -> Result<FlatIter> {
    if corank > ambient.rank() {
        return Err(Error::InvalidParameter(format!(
            "corank {corank} exceeds ambient rank {}",
            ambient.rank()
        )));
    }
    Ok(FlatIter {
        ambient,
        normals: NormalBasisIter::new(ambient.rank(), corank),
    })
}

pub struct FlatIter {
    ambient: AmbientGeometry,
    normals: NormalBasisIter,
}

impl Iterator for FlatIter {
    type Item = Flat;

    fn next(&mut self) -> Option<Flat> {
        let rows = self.normals.next()?;
        Some(Flat::from_reduced(
            self.ambient,
            annihilator_rows(self.ambient.rank(), &rows),
        ))
    }
}

/// Reduced echelon bases of `c`-dimensional subspaces of GF(2)^r, in
/// lexicographic order of the row tuple.
///
/// A row tuple `w_0 < w_1 < ...` is canonical iff each `w_i` has zeros at the
/// leading bits of all earlier rows.
#[derive(Clone, Debug)]
pub(crate) struct NormalBasisIter {
    rank: u32,
    rows: Vec<u32>,
    started: bool,
    done: bool,
}

impl NormalBasisIter {
    pub(crate) fn new(rank: u32, c: u32) -> Self {
        NormalBasisIter {
            rank,
            rows: (0..c).map(|i| 1u32 << i).collect(),
            started: false,
            done: c > rank,
        }
    }

    fn forbidden(&self, upto: usize) -> u32 {
        self.rows[..upto]
            .iter()
            .fold(0, |m, &w| m | 1 << (31 - w.leading_zeros()))
    }

    /// Row `i` must leave room for the leading bits of rows after it.
    fn limit(&self, i: usize) -> u64 {
        let c = self.rows.len() as u32;
        1u64 << (self.rank - c + i as u32 + 1)
    }
}

/// Smallest word greater than `w` with every bit of `forbidden` clear.
#[inline]
pub(crate) fn next_clear_of(w: u32, forbidden: u32) -> u64 {
    (((w | forbidden) as u64) + 1) & !(forbidden as u64)
}

impl Iterator for NormalBasisIter {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.rows.clone());
        }
        let c = self.rows.len();
        for i in (0..c).rev() {
            let forbidden = self.forbidden(i);
            let cand = next_clear_of(self.rows[i], forbidden);
            if cand < self.limit(i) {
                self.rows[i] = cand as u32;
                // the least canonical continuation: each later row is the
                // single bit just above the previous leading bit
                for j in i + 1..c {
                    let lead = 31 - self.rows[j - 1].leading_zeros();
                    self.rows[j] = 1 << (lead + 1);
                }
                return Some(self.rows.clone());
            }
        }
        self.done = true;
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(r: u32) -> AmbientGeometry {
        AmbientGeometry::new(r).unwrap()
    }

    fn v(w: u32) -> GfVector {
        GfVector(w)
    }

    #[test]
    fn dot_examples() {
        assert_eq!(dot(v(0b101), v(0b001)), 1);
        assert_eq!(dot(v(0b110), v(0b011)), 1);
        for x in 0..16 {
            assert_eq!(dot(v(x), GfVector::ZERO), 0);
        }
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank_of([v(0b011), v(0b101), v(0b110)]), 2);
        assert_eq!(rank_of(std::iter::empty()), 0);
        assert_eq!(rank_of((0..7).map(|i| v(1 << i))), 7);
    }

    #[test]
    fn rank_limits() {
        assert!(AmbientGeometry::new(0).is_err());
        assert!(AmbientGeometry::new(25).is_err());
        assert_eq!(amb(24).point_count(), (1 << 24) - 1);
    }

    #[test]
    fn closure_examples() {
        let g = amb(4);
        let f = closure(g, [v(1), v(2)]).unwrap();
        let pts: Vec<u32> = flat_points(&f).iter().map(|p| p.0).collect();
        assert_eq!(pts, vec![1, 2, 3]);
        let e = closure(g, std::iter::empty()).unwrap();
        assert_eq!(e.rank(), 0);
        assert_eq!(flat_points(&e).len(), 0);
        let f3 = closure(g, [v(0b0011), v(0b0101), v(0b1000)]).unwrap();
        assert_eq!(flat_points(&f3).len(), 7);
    }

    #[test]
    fn canonical_form_is_reduced() {
        let g = amb(5);
        let f = Flat::span(g, [v(0b11111), v(0b10110), v(0b00111)]).unwrap();
        let leads: Vec<u32> = f.basis().iter().map(|b| b.leading_bit().unwrap()).collect();
        assert!(leads.windows(2).all(|w| w[0] < w[1]));
        for (i, b) in f.basis().iter().enumerate() {
            for (j, &l) in leads.iter().enumerate() {
                if i != j {
                    assert_eq!(b.0 >> l & 1, 0);
                }
            }
        }
        let g2 = Flat::span(g, [v(0b10110 ^ 0b11111), v(0b00111), v(0b11111)]).unwrap();
        assert_eq!(f, g2);
    }

    #[test]
    fn hyperplane_examples() {
        let h = hyperplane_of(amb(3), v(1)).unwrap();
        let pts: Vec<u32> = flat_points(&h).iter().map(|p| p.0).collect();
        assert_eq!(pts, vec![2, 4, 6]);
        let h2 = hyperplane_of(amb(2), v(1)).unwrap();
        assert_eq!(flat_points(&h2).iter().map(|p| p.0).collect::<Vec<_>>(), vec![2]);
        assert!(matches!(hyperplane_of(amb(3), GfVector::ZERO), Err(Error::ZeroVector)));
        assert_eq!(h.normals(), vec![v(1)]);
    }

    #[test]
    fn every_hyperplane_has_half_minus_one_points() {
        for r in 1..=7 {
            let g = amb(r);
            let mut seen = std::collections::HashSet::new();
            for gamma in g.points() {
                let h = hyperplane_of(g, gamma).unwrap();
                assert_eq!(flat_points(&h).len() as u32, (1 << (r - 1)) - 1);
                assert!(seen.insert(h));
            }
            assert_eq!(seen.len() as u32, g.point_count());
        }
    }

    #[test]
    fn enumerate_small_cases() {
        assert_eq!(enumerate_flats(amb(3), 1).unwrap().count(), 7);
        assert_eq!(enumerate_flats(amb(4), 2).unwrap().count(), 35);
        let full: Vec<Flat> = enumerate_flats(amb(5), 0).unwrap().collect();
        assert_eq!(full, vec![Flat::full(amb(5))]);
        let empty: Vec<Flat> = enumerate_flats(amb(3), 3).unwrap().collect();
        assert_eq!(empty.len(), 1);
        assert_eq!(empty[0].rank(), 0);
        assert!(enumerate_flats(amb(3), 4).is_err());
    }

    #[test]
    fn enumeration_order_is_lexicographic_on_normals() {
        let flats: Vec<Vec<GfVector>> = enumerate_flats(amb(5), 2).unwrap().map(|f| f.normals()).collect();
        assert!(flats.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn coordinates_round_trip() {
        let g = amb(6);
        let f = Flat::span(g, [v(0b100110), v(0b011001), v(0b000111)]).unwrap();
        for p in f.points() {
            let c = f.coordinates(p).unwrap();
            assert_eq!(f.lift(c), p);
        }
        assert!(f.coordinates(v(0b100000)).is_none() || f.contains(v(0b100000)));
    }

    #[test]
    fn vector_parsing() {
        assert_eq!("0x1f".parse::<GfVector>().unwrap(), v(31));
        assert_eq!(" 12 ".parse::<GfVector>().unwrap(), v(12));
        assert!("zz".parse::<GfVector>().is_err());
        let f: Flat = serde_json::from_str(r#"{"ambient_rank":4,"basis":[3,"0x5"]}"#).unwrap();
        assert_eq!(f, Flat::span(amb(4), [v(3), v(5)]).unwrap());
        assert!(serde_json::from_str::<Flat>(r#"{"ambient_rank":4,"basis":[3,5,6]}"#).is_err());
    }
}

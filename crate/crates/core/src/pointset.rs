//! Ground sets `E` of a binary representation `(E, G)`, stored as bitsets
//! over the vector space (bit `w` set means the point with word `w` is in `E`).
//!
//! Two text forms are accepted:
//! * JSON: `{"rank": r, "points": [..]}` with decimal or `0x` hex entries.
//! * compact: `r:HEX`, the whole bitset as one big-endian hex number.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};

use crate::ambient::{AmbientGeometry, GfVector};
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    ambient: AmbientGeometry,
    words: Vec<u64>,
}

#[inline]
fn word_count(ambient: AmbientGeometry) -> usize {
    ambient.space_size().div_ceil(64)
}

impl PointSet {
    pub fn empty(ambient: AmbientGeometry) -> Self {
        PointSet {
            ambient,
            words: vec![0; word_count(ambient)],
        }
    }

    /// Every point of the geometry.
    pub fn full(ambient: AmbientGeometry) -> Self {
        let mut s = PointSet::empty(ambient);
        let n = ambient.space_size();
        for (i, w) in s.words.iter_mut().enumerate() {
            let lo = i * 64;
            let bits = (n - lo).min(64);
            *w = if bits == 64 { !0 } else { (1u64 << bits) - 1 };
        }
        s.words[0] &= !1;
        s
    }

    pub fn from_points<I: IntoIterator<Item = GfVector>>(ambient: AmbientGeometry, points: I) -> Result<Self> {
        let mut s = PointSet::empty(ambient);
        for p in points {
            s.insert(p)?;
        }
        Ok(s)
    }

    pub fn from_words<I: IntoIterator<Item = u32>>(ambient: AmbientGeometry, words: I) -> Result<Self> {
        PointSet::from_points(ambient, words.into_iter().map(GfVector))
    }

    /// Builds a set from a raw membership mask over the vector space; bit 0
    /// must be clear. Only meaningful for `r <= 6`.
    pub fn from_mask(ambient: AmbientGeometry, mask: u64) -> Result<Self> {
        if ambient.rank() > 6 {
            return Err(Error::InvalidParameter("masks only cover rank <= 6".into()));
        }
        if mask & 1 == 1 {
            return Err(Error::ZeroVector);
        }
        let n = ambient.space_size();
        if n < 64 && mask >> n != 0 {
            return Err(Error::InvalidParameter(format!(
                "mask {mask:#x} exceeds rank {}",
                ambient.rank()
            )));
        }
        Ok(PointSet {
            ambient,
            words: vec![mask],
        })
    }

    #[inline]
    pub fn ambient(&self) -> AmbientGeometry {
        self.ambient
    }

    #[inline]
    pub fn rank(&self) -> u32 {
        self.ambient.rank()
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn contains(&self, p: GfVector) -> bool {
        self.contains_word(p.0)
    }

    #[inline]
    pub fn contains_word(&self, w: u32) -> bool {
        let w = w as usize;
        match self.words.get(w >> 6) {
            Some(x) => x >> (w & 63) & 1 == 1,
            None => false,
        }
    }

    pub fn insert(&mut self, p: GfVector) -> Result<bool> {
        self.ambient.check_point(p)?;
        let was = self.contains(p);
        self.insert_unchecked(p);
        Ok(!was)
    }

    #[inline]
    pub(crate) fn insert_unchecked(&mut self, p: GfVector) {
        let w = p.0 as usize;
        self.words[w >> 6] |= 1 << (w & 63);
    }

    pub fn remove(&mut self, p: GfVector) -> bool {
        if !self.ambient.contains(p) {
            return false;
        }
        let was = self.contains(p);
        let w = p.0 as usize;
        self.words[w >> 6] &= !(1 << (w & 63));
        was
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Points in ascending word order.
    pub fn iter(&self) -> impl Iterator<Item = GfVector> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let base = (i as u32) << 6;
            BitIter(w).map(move |b| GfVector(base | b))
        })
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().map(|p| p.0).collect()
    }

    /// Points of the geometry not in the set.
    pub fn complement(&self) -> PointSet {
        let full = PointSet::full(self.ambient);
        let words = full.words.iter().zip(&self.words).map(|(f, s)| f & !s).collect();
        PointSet {
            ambient: self.ambient,
            words,
        }
    }

    fn zip_with(&self, other: &PointSet, f: impl Fn(u64, u64) -> u64) -> Result<PointSet> {
        self.ambient.same(other.ambient)?;
        Ok(PointSet {
            ambient: self.ambient,
            words: self.words.iter().zip(&other.words).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn intersection(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn difference(&self, other: &PointSet) -> Result<PointSet> {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn intersection_len(&self, other: &PointSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.ambient == other.ambient && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.intersection_len(other) == 0
    }

    /// Compact form `r:HEX`.
    pub fn to_compact(&self) -> String {
        let digits = self.ambient.space_size().div_ceil(4);
        let mut s = String::with_capacity(digits + 4);
        s.push_str(&self.rank().to_string());
        s.push(':');
        for d in (0..digits).rev() {
            let bit = d * 4;
            let nib = (self.words[bit >> 6] >> (bit & 63)) & 0xf;
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    /// Parses the compact form. Leading zero digits may be omitted.
    pub fn from_compact(text: &str) -> Result<PointSet> {
        let text = text.trim();
        let (r, hex) = text
            .split_once(':')
            .ok_or_else(|| Error::parse("column 1", "compact point set must look like 'r:HEX'"))?;
        let rank: u32 = r
            .trim()
            .parse()
            .map_err(|_| Error::parse("column 1", format!("bad rank '{r}'")))?;
        let ambient = AmbientGeometry::new(rank)?;
        let offset = r.len() + 2;
        let hex = hex.trim_end();
        let digits = ambient.space_size().div_ceil(4);
        let mut set = PointSet::empty(ambient);
        if hex.is_empty() {
            return Err(Error::parse(format!("column {offset}"), "missing hex bitset"));
        }
        let n = hex.len();
        for (i, ch) in hex.char_indices() {
            let nib = ch
                .to_digit(16)
                .ok_or_else(|| Error::parse(format!("column {}", offset + i), format!("'{ch}' is not a hex digit")))?
                as u64;
            let d = n - 1 - i;
            if nib == 0 {
                continue;
            }
            if d >= digits {
                return Err(Error::parse(
                    format!("column {}", offset + i),
                    format!("bitset is longer than 2^{rank} bits"),
                ));
            }
            let bit = d * 4;
            set.words[bit >> 6] |= nib << (bit & 63);
        }
        let n_bits = ambient.space_size();
        if n_bits < 64 && set.words[0] >> n_bits != 0 {
            return Err(Error::parse(
                format!("column {offset}"),
                format!("bitset exceeds 2^{rank} bits"),
            ));
        }
        if set.words[0] & 1 == 1 {
            return Err(Error::parse(
                format!("column {}", offset + n - 1),
                "bit 0 is set but 0 is not a point",
            ));
        }
        Ok(set)
    }

    /// Parses either accepted text form, chosen by the first non-blank char.
    pub fn parse_any(text: &str) -> Result<PointSet> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text)
                .map_err(|e| Error::parse(format!("line {} column {}", e.line(), e.column()), e.to_string()))
        } else {
            PointSet::from_compact(text)
        }
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = u32;
    #[inline]
    fn next(&mut self) -> Option<u32> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros();
        self.0 &= self.0 - 1;
        Some(b)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PointSet(r={}, {:?})", self.rank(), self.to_vec())
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            rank: u32,
            points: Vec<u32>,
        }
        Repr {
            rank: self.rank(),
            points: self.to_vec(),
        }
        .serialize(serializer)
    }
}

/// A JSON point entry; zero is rejected while parsing so the error carries
/// the input position.
struct PointEntry(u32);

impl<'de> Deserialize<'de> for PointEntry {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = GfVector::deserialize(deserializer)?;
        if v.is_zero() {
            return Err(de::Error::custom("0 is not a point of the geometry"));
        }
        Ok(PointEntry(v.0))
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Raw {
            rank: u32,
            points: Vec<PointEntry>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let ambient = AmbientGeometry::new(raw.rank).map_err(de::Error::custom)?;
        let mut set = PointSet::empty(ambient);
        for (i, p) in raw.points.iter().enumerate() {
            set.insert(GfVector(p.0))
                .map_err(|e| de::Error::custom(format!("points[{i}]: {e}")))?;
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(r: u32) -> AmbientGeometry {
        AmbientGeometry::new(r).unwrap()
    }

    #[test]
    fn full_and_complement() {
        for r in 1..=9 {
            let g = amb(r);
            let full = PointSet::full(g);
            assert_eq!(full.len() as u32, g.point_count());
            assert!(!full.contains(GfVector::ZERO));
            assert!(full.complement().is_empty());
        }
    }

    #[test]
    fn compact_form() {
        let s = PointSet::from_words(amb(3), [1, 3, 5, 7]).unwrap();
        assert_eq!(s.to_compact(), "3:aa");
        assert_eq!(PointSet::from_compact("3:aa").unwrap(), s);
        assert_eq!(PointSet::from_compact("3:0aa").unwrap(), s);
        let e = PointSet::from_compact("3:ab").unwrap_err();
        assert!(e.to_string().contains("bit 0"), "{e}");
        let e = PointSet::from_compact("3:1aa").unwrap_err();
        assert!(e.to_string().contains("column 3"), "{e}");
        let e = PointSet::from_compact("2:x").unwrap_err();
        assert!(e.to_string().contains("column 3"), "{e}");
        let big = PointSet::full(amb(8));
        assert_eq!(PointSet::from_compact(&big.to_compact()).unwrap(), big);
    }

    #[test]
    fn json_form() {
        let s: PointSet = serde_json::from_str(r#"{"rank": 4, "points": [1, "0x3", 2]}"#).unwrap();
        assert_eq!(s.to_vec(), vec![1, 2, 3]);
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"rank":4,"points":[1,2,3]}"#);
        let e = PointSet::parse_any("{\"rank\": 4,\n \"points\": [1, 0]}").unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("0 is not a point"), "{msg}");
        let e = PointSet::parse_any(r#"{"rank": 2, "points": [4]}"#).unwrap_err();
        assert!(e.to_string().contains("points[0]"));
    }
}

//! Fourier analysis on GF(2)^r: the Walsh-Hadamard transform of a set's
//! indicator, uniformity with respect to hyperplanes, and triangle counting
//! through the cube sum of the spectrum.
//!
//! All arithmetic is exact. Coefficients fit an `i32` (|c| <= 2^24); the
//! cube sum is accumulated in `i128` (|sum| <= 2^96 at rank 24).

use serde::{Deserialize, Serialize};

use crate::ambient::{AmbientGeometry, GfVector};
use crate::error::{Error, Result};
use crate::pointset::PointSet;
use crate::rational::Rational;
use crate::structure::cone_size;

/// Fourier coefficients `c[g] = sum_y 1_E(y) (-1)^(y.g)` for every `g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    ambient: AmbientGeometry,
    coeffs: Vec<i32>,
    set_size: u32,
}

/// In-place unnormalized Walsh-Hadamard butterfly. `data.len()` must be a
/// power of two.
pub fn butterfly(data: &mut [i32]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

pub fn walsh_hadamard(set: &PointSet) -> Spectrum {
    let ambient = set.ambient();
    let mut coeffs = vec![0i32; ambient.space_size()];
    for p in set.iter() {
        coeffs[p.0 as usize] = 1;
    }
    butterfly(&mut coeffs);
    let spectrum = Spectrum {
        ambient,
        coeffs,
        set_size: set.len() as u32,
    };
    let energy = spectrum.energy();
    let expected = (set.len() as i128) << ambient.rank();
    assert_eq!(
        energy, expected,
        "Parseval identity failed: sum of squares {energy} != 2^r |E| = {expected}"
    );
    spectrum
}

impl Spectrum {
    pub fn ambient(&self) -> AmbientGeometry {
        self.ambient
    }

    pub fn coeffs(&self) -> &[i32] {
        &self.coeffs
    }

    pub fn coefficient(&self, gamma: GfVector) -> i32 {
        self.coeffs[gamma.0 as usize]
    }

    pub fn set_size(&self) -> u32 {
        self.set_size
    }

    /// `sum_g c[g]^2`, equal to `2^r |E|`.
    pub fn energy(&self) -> i128 {
        self.coeffs.iter().map(|&c| (c as i128) * (c as i128)).sum()
    }

    /// `sum_g c[g]^3`.
    pub fn cube_sum(&self) -> i128 {
        self.coeffs
            .iter()
            .map(|&c| {
                let c = c as i128;
                c * c * c
            })
            .sum()
    }

    /// Ordered triangle count `T_E = 2^-r sum_g c[g]^3`.
    pub fn triangle_count(&self) -> u64 {
        let s = self.cube_sum();
        let r = self.ambient.rank();
        assert!(
            s >= 0 && s & ((1i128 << r) - 1) == 0,
            "cube sum {s} is not a nonnegative multiple of 2^{r}"
        );
        (s >> r) as u64
    }

    /// Largest nontrivial coefficient magnitude and the least character
    /// attaining it.
    pub fn max_nontrivial(&self) -> (u32, GfVector) {
        let mut best = (0u32, GfVector(1));
        for (g, &c) in self.coeffs.iter().enumerate().skip(1) {
            let m = c.unsigned_abs();
            if m > best.0 {
                best = (m, GfVector(g as u32));
            }
        }
        best
    }

    /// Inverse transform; recovers the indicator exactly.
    pub fn inverse(&self) -> Vec<i32> {
        let mut v = self.coeffs.clone();
        butterfly(&mut v);
        let r = self.ambient.rank();
        for x in v.iter_mut() {
            debug_assert_eq!(*x & ((1 << r) - 1), 0);
            *x >>= r;
        }
        v
    }

    pub fn uniformity(&self) -> UniformityReport {
        let (m, worst_gamma) = self.max_nontrivial();
        let denom = Rational::pow2(self.ambient.rank());
        UniformityReport {
            alpha: Rational::from(self.set_size as u64) / denom.clone(),
            epsilon_min: Rational::from(m as u64) / denom,
            worst_gamma,
            max_abs_coefficient: m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformityReport {
    /// `|E| / 2^r`
    pub alpha: Rational,
    /// The least `eps` for which the set is `eps`-uniform.
    pub epsilon_min: Rational,
    pub worst_gamma: GfVector,
    pub max_abs_coefficient: u32,
}

impl UniformityReport {
    pub fn is_uniform(&self, epsilon: &Rational) -> bool {
        &self.epsilon_min <= epsilon
    }
}

pub fn uniformity(set: &PointSet) -> UniformityReport {
    walsh_hadamard(set).uniformity()
}

pub fn triangle_count_spectral(set: &PointSet) -> u64 {
    walsh_hadamard(set).triangle_count()
}

/// Both sides of `|T_E - a^3 2^{2r}| <= eps (a - a^2) 2^{2r}`, `a = |E|/2^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountingBound {
    pub triangle_count: u64,
    pub alpha: Rational,
    pub epsilon: Rational,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

impl CountingBound {
    /// Evaluates both sides from raw quantities; no uniformity check.
    pub fn evaluate(rank: u32, set_size: u64, triangle_count: u64, epsilon: &Rational) -> CountingBound {
        let space = Rational::pow2(rank);
        let space2 = Rational::pow2(2 * rank);
        let alpha = Rational::from(set_size) / space;
        let main = &(&(&alpha * &alpha) * &alpha) * &space2;
        let lhs = (Rational::from(triangle_count) - main).abs();
        let rhs = &(epsilon * &(&alpha - &(&alpha * &alpha))) * &space2;
        CountingBound {
            triangle_count,
            holds: lhs <= rhs,
            alpha,
            epsilon: epsilon.clone(),
            lhs,
            rhs,
        }
    }

    pub fn slack(&self) -> Rational {
        &self.rhs - &self.lhs
    }
}

/// Checks the triangle counting bound for an `eps`-uniform set. Rejects sets
/// that are not `eps`-uniform; a failing bound is reported as an internal
/// inconsistency.
pub fn counting_bound_check(set: &PointSet, epsilon: &Rational) -> Result<CountingBound> {
    let spectrum = walsh_hadamard(set);
    counting_bound_from_spectrum(&spectrum, epsilon)
}

pub fn counting_bound_from_spectrum(spectrum: &Spectrum, epsilon: &Rational) -> Result<CountingBound> {
    let u = spectrum.uniformity();
    if !u.is_uniform(epsilon) {
        return Err(Error::NotUniform {
            epsilon: epsilon.to_string(),
            worst_gamma: u.worst_gamma,
            magnitude: u.max_abs_coefficient as u64,
        });
    }
    let b = CountingBound::evaluate(
        spectrum.ambient().rank(),
        spectrum.set_size() as u64,
        spectrum.triangle_count(),
        epsilon,
    );
    if !b.holds {
        return Err(Error::InternalInconsistency(format!(
            "triangle counting bound fails: lhs {} > rhs {}",
            b.lhs, b.rhs
        )));
    }
    Ok(b)
}

/// Quantities behind the fano-free hyperplane argument: `T_E`, every cone
/// size `|E_p|`, and the two threshold claims `T_E > (55/256) 2^{2r}` and
/// `max_p |E_p| <= (5/16) 2^r`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimQuantities {
    pub triangle_count: u64,
    pub cone_sizes: Vec<(GfVector, u64)>,
    pub cone_sum: u64,
    pub max_cone: u64,
    pub triangle_claim_holds: bool,
    pub cone_claim_holds: bool,
}

pub fn claim_quantities(set: &PointSet) -> Result<ClaimQuantities> {
    let r = set.rank();
    let t = triangle_count_spectral(set);
    let cone_sizes: Vec<(GfVector, u64)> = set.iter().map(|p| (p, cone_size(set, p) as u64)).collect();
    let cone_sum: u64 = cone_sizes.iter().map(|&(_, s)| s).sum();
    if cone_sum != t {
        return Err(Error::InternalInconsistency(format!(
            "cone sizes sum to {cone_sum} but T_E = {t}"
        )));
    }
    let max_cone = cone_sizes.iter().map(|&(_, s)| s).max().unwrap_or(0);
    // T > 55/256 2^{2r}  <=>  256 T > 55 2^{2r};  |E_p| <= 5/16 2^r  <=>  16 |E_p| <= 5 2^r
    let triangle_claim_holds = 256 * (t as u128) > 55u128 << (2 * r);
    let cone_claim_holds = 16 * (max_cone as u128) <= 5u128 << r;
    Ok(ClaimQuantities {
        triangle_count: t,
        cone_sizes,
        cone_sum,
        max_cone,
        triangle_claim_holds,
        cone_claim_holds,
    })
}

//! Finitely supported probability measures on a group.
//!
//! A [`Distribution`] is a sparse map from group elements to masses, tagged
//! with the group it lives on. Elements are kept in a `BTreeMap`, so every
//! iteration (and therefore every floating-point summation) happens in a
//! fixed order.

use std::collections::BTreeMap;
use std::fmt::Debug;

use thiserror::Error;

use crate::free_words::{Letter, ReducedWord};

/// Absolute tolerance on the total mass of a distribution.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("distributions live on different groups")]
    ContextMismatch,
    #[error("total mass {0} differs from 1 by more than 1e-12")]
    NotNormalized(f64),
    #[error("mass {0} is not a probability")]
    BadMass(f64),
    #[error("element {element} not reached within {n_max} convolution steps")]
    NotReached { element: String, n_max: usize },
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(u16),
}

/// The group operations a distribution needs.
pub trait Group: Clone + Debug + PartialEq + Send + Sync {
    type Element: Clone + Ord + Debug + Send + Sync;

    fn identity(&self) -> Self::Element;
    fn multiply(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;
    fn invert(&self, a: &Self::Element) -> Self::Element;
    /// Printable label, used by serializers.
    fn label(&self, a: &Self::Element) -> String;
}

/// The free group of a fixed rank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeGroup {
    pub rank: u16,
}

impl Group for FreeGroup {
    type Element = ReducedWord;

    fn identity(&self) -> ReducedWord {
        ReducedWord::identity(self.rank)
    }

    fn multiply(&self, a: &ReducedWord, b: &ReducedWord) -> ReducedWord {
        debug_assert_eq!(a.rank(), self.rank);
        a.mul_unchecked(b)
    }

    fn invert(&self, a: &ReducedWord) -> ReducedWord {
        a.invert()
    }

    fn label(&self, a: &ReducedWord) -> String {
        a.literal()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<G: Group> {
    group: G,
    masses: BTreeMap<G::Element, f64>,
}

/// Neumaier-compensated sum, accumulated in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `-Σ p log p` in nats over the given masses.
pub fn entropy_of<I: IntoIterator<Item = f64>>(masses: I) -> f64 {
    compensated_sum(masses.into_iter().filter(|&p| p > 0.0).map(|p| -p * p.ln()))
}

impl<G: Group> Distribution<G> {
    /// Build from (element, mass) pairs. Repeated elements are merged, zero
    /// masses dropped; the total must be 1 within [`MASS_TOLERANCE`].
    pub fn new<I>(group: G, entries: I) -> Result<Self, MeasureError>
    where
        I: IntoIterator<Item = (G::Element, f64)>,
    {
        let mut masses = BTreeMap::new();
        for (g, p) in entries {
            if !(p.is_finite() && (0.0..=1.0 + MASS_TOLERANCE).contains(&p)) {
                return Err(MeasureError::BadMass(p));
            }
            if p > 0.0 {
                *masses.entry(g).or_insert(0.0) += p;
            }
        }
        let d = Distribution { group, masses };
        let total = d.total_mass();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(MeasureError::NotNormalized(total));
        }
        Ok(d)
    }

    pub fn dirac(group: G, g: G::Element) -> Self {
        let mut masses = BTreeMap::new();
        masses.insert(g, 1.0);
        Distribution { group, masses }
    }

    pub fn delta_identity(group: G) -> Self {
        let e = group.identity();
        Self::dirac(group, e)
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn support_size(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, g: &G::Element) -> f64 {
        self.masses.get(g).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&G::Element, f64)> {
        self.masses.iter().map(|(g, &p)| (g, p))
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses.values().copied())
    }

    /// `(self * other)(x) = Σ_{g h = x} self(g) other(h)`.
    ///
    /// Contributions to each output element are added in the fixed order of
    /// the (g, h) double loop, so the result does not depend on scheduling.
    pub fn convolve(&self, other: &Self) -> Result<Self, MeasureError> {
        if self.group != other.group {
            return Err(MeasureError::ContextMismatch);
        }
        let mut out: BTreeMap<G::Element, f64> = BTreeMap::new();
        if self.masses.len() <= other.masses.len() {
            for (g, &p) in &self.masses {
                for (h, &q) in &other.masses {
                    *out.entry(self.group.multiply(g, h)).or_insert(0.0) += p * q;
                }
            }
        } else {
            // outer loop over the smaller support; per-output order is then
            // h-major, which is still fixed
            for (h, &q) in &other.masses {
                for (g, &p) in &self.masses {
                    *out.entry(self.group.multiply(g, h)).or_insert(0.0) += p * q;
                }
            }
        }
        out.retain(|_, p| *p > 0.0);
        Ok(Distribution {
            group: self.group.clone(),
            masses: out,
        })
    }

    /// `μ^0 = δ_e, μ^1, ..., μ^n`, each obtained by right convolution with μ.
    pub fn powers(&self, n: usize) -> Vec<Self> {
        let mut out = Vec::with_capacity(n + 1);
        out.push(Self::delta_identity(self.group.clone()));
        for k in 1..=n {
            let next = out[k - 1].convolve(self).expect("same group");
            out.push(next);
        }
        out
    }

    pub fn shannon_entropy(&self) -> f64 {
        entropy_of(self.masses.values().copied())
    }

    /// Push forward along a map into another group.
    pub fn map_to<H: Group, F>(&self, target: H, f: F) -> Distribution<H>
    where
        F: Fn(&G::Element) -> H::Element,
    {
        let mut masses: BTreeMap<H::Element, f64> = BTreeMap::new();
        for (g, &p) in &self.masses {
            *masses.entry(f(g)).or_insert(0.0) += p;
        }
        Distribution { group: target, masses }
    }

    /// `(label, mass)` pairs sorted by label; the JSON form of a distribution.
    pub fn labelled(&self) -> Vec<(String, f64)> {
        let mut v: Vec<_> = self.masses.iter().map(|(g, &p)| (self.group.label(g), p)).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        v
    }

    /// Smallest `k ≤ n_max` with `μ^k(g) > 0`, together with that mass.
    pub fn first_hit(&self, g: &G::Element, n_max: usize) -> Option<(usize, f64)> {
        let mut power = Self::delta_identity(self.group.clone());
        for k in 0..=n_max {
            let p = power.mass(g);
            if p > 0.0 {
                return Some((k, p));
            }
            if k < n_max {
                power = power.convolve(self).expect("same group");
            }
        }
        None
    }

    /// The bound `M(g) = max{1/μ^k(g⁻¹), 1/μ^n(g)}` on Radon–Nikodym
    /// derivatives of stationary measures, using the smallest `k` and `n`
    /// at which the convolution powers charge `g⁻¹` and `g`.
    pub fn rn_bound(&self, g: &G::Element, n_max: usize) -> Result<f64, MeasureError> {
        let not_reached = || MeasureError::NotReached {
            element: self.group.label(g),
            n_max,
        };
        let (_, forward) = self.first_hit(g, n_max).ok_or_else(not_reached)?;
        let ginv = self.group.invert(g);
        let (_, backward) = self.first_hit(&ginv, n_max).ok_or_else(not_reached)?;
        Ok((1.0 / backward).max(1.0 / forward))
    }
}

/// Simple random walk step: mass `1/(2d)` on each generator and inverse.
pub fn srw(rank: u16) -> Result<Distribution<FreeGroup>, MeasureError> {
    if rank < 2 {
        return Err(MeasureError::RankTooSmall(rank));
    }
    let p = 1.0 / (2.0 * rank as f64);
    Distribution::new(
        FreeGroup { rank },
        Letter::all(rank).map(|l| (ReducedWord::from_letter(l), p)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 2).unwrap()
    }

    #[test]
    fn srw_masses() {
        let mu = srw(2).unwrap();
        for s in ["a", "A", "b", "B"] {
            assert_eq!(mu.mass(&w(s)), 0.25);
        }
        let mu3 = srw(3).unwrap();
        assert!(mu3.iter().all(|(_, p)| close(p, 1.0 / 6.0, 1e-15)));
        assert_eq!(srw(5).unwrap().support_size(), 10);
        assert!(srw(1).is_err());
    }

    #[test]
    fn convolution_examples() {
        let mu = srw(2).unwrap();
        let delta = Distribution::delta_identity(FreeGroup { rank: 2 });
        assert_eq!(mu.convolve(&delta).unwrap(), mu);
        let mu2 = mu.convolve(&mu).unwrap();
        assert!(close(mu2.mass(&w("")), 0.25, 1e-15));
        assert!(close(mu2.mass(&w("aa")), 0.0625, 1e-15));
        assert!(close(mu2.total_mass(), 1.0, 1e-15));
    }

    #[test]
    fn convolution_rejects_other_groups() {
        assert_eq!(
            srw(2).unwrap().convolve(&srw(3).unwrap()),
            Err(MeasureError::ContextMismatch)
        );
    }

    #[test]
    fn entropy_examples() {
        let delta = Distribution::delta_identity(FreeGroup { rank: 2 });
        assert_eq!(delta.shannon_entropy(), 0.0);
        let mu = srw(2).unwrap();
        assert!(close(mu.shannon_entropy(), 4f64.ln(), 1e-15));
        let h2 = mu.convolve(&mu).unwrap().shannon_entropy();
        let expected = 0.25 * 4f64.ln() + 0.75 * 16f64.ln();
        assert!(close(h2, expected, 1e-14));
        assert!(close(h2, 2.426015, 1e-6));
    }

    #[test]
    fn rn_bound_examples() {
        let mu = srw(2).unwrap();
        assert_eq!(mu.rn_bound(&w(""), 4).unwrap(), 1.0);
        assert!(close(mu.rn_bound(&w("a"), 4).unwrap(), 4.0, 1e-12));
        assert!(close(mu.rn_bound(&w("aa"), 4).unwrap(), 16.0, 1e-12));
        assert!(matches!(
            mu.rn_bound(&w("aaa"), 2),
            Err(MeasureError::NotReached { .. })
        ));
    }

    #[test]
    fn construction_rejects_bad_total() {
        let g = FreeGroup { rank: 2 };
        assert!(matches!(
            Distribution::new(g, [(w("a"), 0.5)]),
            Err(MeasureError::NotNormalized(_))
        ));
        assert!(matches!(
            Distribution::new(g, [(w("a"), -0.5), (w("b"), 1.5)]),
            Err(MeasureError::BadMass(_))
        ));
    }

    #[test]
    fn labels_sorted() {
        let l = srw(2).unwrap().labelled();
        let names: Vec<_> = l.iter().map(|x| x.0.as_str()).collect();
        assert_eq!(names, ["A", "B", "a", "b"]);
    }
}

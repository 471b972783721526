//! Exact calculus on the boundary of `F_d` with the hitting measure of the
//! simple random walk.
//!
//! The hitting measure gives the cylinder `C_w` of rays starting with `w`
//! mass `(1/(2d)) (2d-1)^-(|w|-1)`. The Radon–Nikodym derivative
//! `d(gν)/dν` is constant on every cylinder deeper than `|g|` and equals
//! `(2d-1)^(|w| - |g⁻¹w|)` there. Exponents stay integers until the final
//! logarithm, and every integral is a finite sum over cylinders.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::free_words::{sphere, ReducedWord, WordError};
use crate::group_measures::{Distribution, FreeGroup};
use crate::growth_cogrowth::free_growth;
use crate::rng;

/// Largest number of cylinders a single boundary integral may enumerate.
pub const CYLINDER_LIMIT: usize = 20_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundaryError {
    #[error("cylinders are indexed by nonempty words")]
    EmptyCylinder,
    #[error("cylinder of depth {depth} is too shallow for |g| = {needed_over}")]
    Shallow { depth: usize, needed_over: usize },
    #[error("integral needs {0} cylinders, above the enumeration limit")]
    TooManyCylinders(usize),
    #[error("prefix depth must be at least 1")]
    ZeroDepth,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// The cylinder of boundary rays beginning with a nonempty reduced word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cylinder {
    prefix: ReducedWord,
}

impl Cylinder {
    pub fn new(prefix: ReducedWord) -> Result<Self, BoundaryError> {
        if prefix.is_identity() {
            return Err(BoundaryError::EmptyCylinder);
        }
        Ok(Cylinder { prefix })
    }

    pub fn prefix(&self) -> &ReducedWord {
        &self.prefix
    }

    pub fn depth(&self) -> usize {
        self.prefix.len()
    }
}

/// Hitting measure of the simple random walk on `∂F_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HittingMeasure {
    pub rank: u16,
}

impl HittingMeasure {
    pub fn new(rank: u16) -> Self {
        HittingMeasure { rank }
    }

    fn q(&self) -> i64 {
        2 * self.rank as i64 - 1
    }

    /// `ν(C_w)` as an exact rational.
    pub fn mass_exact(&self, c: &Cylinder) -> BigRational {
        let denom = BigInt::from(2 * self.rank as i64) * BigInt::from(self.q()).pow(c.depth() as u32 - 1);
        BigRational::new(BigInt::one(), denom)
    }

    pub fn mass(&self, c: &Cylinder) -> f64 {
        let d = self.rank as f64;
        1.0 / (2.0 * d) * (2.0 * d - 1.0).powi(-(c.depth() as i32 - 1))
    }

    /// All cylinders of the given depth, in lexicographic order.
    pub fn cylinders(&self, depth: usize) -> Result<Vec<Cylinder>, BoundaryError> {
        if depth == 0 {
            return Err(BoundaryError::EmptyCylinder);
        }
        let count = 2.0 * self.rank as f64 * (self.q() as f64).powi(depth as i32 - 1);
        if count > CYLINDER_LIMIT as f64 {
            return Err(BoundaryError::TooManyCylinders(count as usize));
        }
        Ok(sphere(self.rank, depth)?.map(|prefix| Cylinder { prefix }).collect())
    }
}

/// `ν(C_w) = (1/(2d)) (2d-1)^-(|w|-1)`.
pub fn cylinder_mass(rank: u16, w: &ReducedWord) -> Result<f64, BoundaryError> {
    Ok(HittingMeasure::new(rank).mass(&Cylinder::new(w.clone())?))
}

/// Integer exponent `e` with `d(gν)/dν = (2d-1)^e` on `C_w`; requires
/// `|w| ≥ |g| + 1`.
pub fn rn_exponent(g: &ReducedWord, w: &ReducedWord) -> Result<i64, BoundaryError> {
    if w.len() < g.len() + 1 {
        return Err(BoundaryError::Shallow {
            depth: w.len(),
            needed_over: g.len(),
        });
    }
    let moved = g.invert().multiply(w)?;
    Ok(w.len() as i64 - moved.len() as i64)
}

/// `d(gν)/dν` on `C_w`, i.e. `ν(g⁻¹ C_w) / ν(C_w)`.
pub fn rn_derivative(rank: u16, g: &ReducedWord, w: &ReducedWord) -> Result<f64, BoundaryError> {
    let e = rn_exponent(g, w)?;
    Ok((2.0 * rank as f64 - 1.0).powi(e as i32))
}

/// Chain rule `rn(gh, w) = rn(g, w) · rn(h, g⁻¹w)`, compared on exponents.
/// Requires `|w| ≥ |g| + |h| + 1`.
pub fn cocycle_check(g: &ReducedWord, h: &ReducedWord, w: &ReducedWord) -> Result<bool, BoundaryError> {
    if w.len() < g.len() + h.len() + 1 {
        return Err(BoundaryError::Shallow {
            depth: w.len(),
            needed_over: g.len() + h.len(),
        });
    }
    let gh = g.multiply(h)?;
    let moved = g.invert().multiply(w)?;
    Ok(rn_exponent(&gh, w)? == rn_exponent(g, w)? + rn_exponent(h, &moved)?)
}

fn q_power(rank: u16, e: i64) -> BigRational {
    let q = BigInt::from(2 * rank as i64 - 1);
    let p = q.pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// `∫ d(gν)/dν dν` summed exactly over cylinders of depth `|g| + 1`.
pub fn rn_integral(rank: u16, g: &ReducedWord) -> Result<BigRational, BoundaryError> {
    let nu = HittingMeasure::new(rank);
    let mut total = BigRational::zero();
    for c in nu.cylinders(g.len() + 1)? {
        total += nu.mass_exact(&c) * q_power(rank, rn_exponent(g, c.prefix())?);
    }
    Ok(total)
}

/// `sup_ξ d(gν)/dν(ξ)` over cylinders of depth `|g| + 1`.
pub fn rn_sup(rank: u16, g: &ReducedWord) -> Result<f64, BoundaryError> {
    let nu = HittingMeasure::new(rank);
    let mut best = i64::MIN;
    for c in nu.cylinders(g.len() + 1)? {
        best = best.max(rn_exponent(g, c.prefix())?);
    }
    Ok((2.0 * rank as f64 - 1.0).powi(best as i32))
}

/// `∫ -log(d(g⁻¹ν)/dν) dν / log(2d-1)` exactly, summing over cylinders of
/// the given depth (at least `|g| + 1`).
pub fn kl_coefficient(rank: u16, g: &ReducedWord, depth: usize) -> Result<BigRational, BoundaryError> {
    let nu = HittingMeasure::new(rank);
    let ginv = g.invert();
    let cylinders = nu.cylinders(depth)?;
    let terms: Vec<Result<BigRational, BoundaryError>> = cylinders
        .par_iter()
        .map(|c| Ok(nu.mass_exact(c) * BigRational::from_integer(BigInt::from(-rn_exponent(&ginv, c.prefix())?))))
        .collect();
    let mut total = BigRational::zero();
    for t in terms {
        total += t?;
    }
    Ok(total)
}

/// Furstenberg entropy of `(∂F_d, ν)` for a finitely supported `μ`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEntropy {
    pub rank: u16,
    /// Cylinder depth used for every integral.
    pub depth: usize,
    /// `(element, μ(g), exact KL coefficient)`.
    pub terms: Vec<(ReducedWord, f64, BigRational)>,
    /// `h / log(2d-1)`, exact when `μ`'s masses were given as rationals.
    pub coefficient: Option<BigRational>,
    pub value: f64,
}

/// `h = Σ_g μ(g) ∫ -log(d(g⁻¹ν)/dν) dν`, evaluated on cylinders of depth
/// `max |g| + 1`.
pub fn boundary_entropy(mu: &Distribution<FreeGroup>) -> Result<BoundaryEntropy, BoundaryError> {
    let rank = mu.group().rank;
    let depth = mu.iter().map(|(g, _)| g.len()).max().unwrap_or(0) + 1;
    let mut terms = Vec::with_capacity(mu.support_size());
    for (g, p) in mu.iter() {
        terms.push((g.clone(), p, kl_coefficient(rank, g, depth)?));
    }
    let value =
        crate::group_measures::compensated_sum(terms.iter().map(|(_, p, c)| p * c.to_f64().unwrap_or(f64::NAN)))
            * free_growth(rank);
    Ok(BoundaryEntropy {
        rank,
        depth,
        terms,
        coefficient: None,
        value,
    })
}

/// [`boundary_entropy`] for a measure with exact rational masses; the
/// coefficient of `log(2d-1)` is returned exactly.
pub fn boundary_entropy_exact(
    rank: u16,
    weights: &[(ReducedWord, BigRational)],
) -> Result<BoundaryEntropy, BoundaryError> {
    let depth = weights.iter().map(|(g, _)| g.len()).max().unwrap_or(0) + 1;
    let mut terms = Vec::with_capacity(weights.len());
    let mut coefficient = BigRational::zero();
    for (g, p) in weights {
        if g.rank() != rank {
            return Err(WordError::RankMismatch {
                expected: rank,
                found: g.rank(),
            }
            .into());
        }
        let c = kl_coefficient(rank, g, depth)?;
        coefficient += p * &c;
        terms.push((g.clone(), p.to_f64().unwrap_or(f64::NAN), c));
    }
    let value = coefficient.to_f64().unwrap_or(f64::NAN) * free_growth(rank);
    Ok(BoundaryEntropy {
        rank,
        depth,
        terms,
        coefficient: Some(coefficient),
        value,
    })
}

/// The simple random walk with exact masses `1/(2d)`.
pub fn srw_exact(rank: u16) -> Vec<(ReducedWord, BigRational)> {
    let p = BigRational::new(BigInt::one(), BigInt::from(2 * rank as i64));
    crate::free_words::Letter::all(rank)
        .map(|l| (ReducedWord::from_letter(l), p.clone()))
        .collect()
}

/// `(w ν)(C_v)` for `v` the depth-`k` prefix of `w`, with `|w| ≥ k ≥ 1`.
///
/// `w = v u` and `w ξ` leaves `C_v` only when `ξ` starts with `u⁻¹` followed
/// by the inverse of the last letter of `v`, a cylinder of depth
/// `|w| - k + 1`.
pub fn pushed_prefix_mass_exact(rank: u16, w: &ReducedWord, k: usize) -> Result<BigRational, BoundaryError> {
    if k == 0 {
        return Err(BoundaryError::ZeroDepth);
    }
    if w.len() < k {
        return Err(BoundaryError::Shallow {
            depth: w.len(),
            needed_over: k,
        });
    }
    let escape = BigRational::new(
        BigInt::one(),
        BigInt::from(2 * rank as i64) * BigInt::from(2 * rank as i64 - 1).pow((w.len() - k) as u32),
    );
    Ok(BigRational::one() - escape)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalityRow {
    pub walk: u64,
    /// `|w_n|`.
    pub length: usize,
    /// `(w_n ν)(C_v)`; `None` when the walk is shorter than `k`.
    pub pushed_mass: Option<f64>,
    /// `1 - (1/(2d)) (2d-1)^-(L-k-1)`.
    pub lower_bound: Option<f64>,
    /// `L = k`: the mass is reported but carries no concentration claim.
    pub shallow: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProximalityReport {
    pub rank: u16,
    pub steps: usize,
    pub depth: usize,
    pub seed: u64,
    pub rows: Vec<ProximalityRow>,
}

impl ProximalityReport {
    /// Smallest pushed mass among non-skipped walks.
    pub fn min_mass(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter_map(|r| r.pushed_mass)
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn skipped(&self) -> usize {
        self.rows.iter().filter(|r| r.pushed_mass.is_none()).count()
    }
}

/// Run `walks` seeded simple random walks of `n` steps and report how much
/// of `ν` each final position pushes into the cylinder of its own depth-`k`
/// prefix.
pub fn proximality_sim(
    rank: u16,
    n: usize,
    k: usize,
    seed: u64,
    walks: u64,
) -> Result<ProximalityReport, BoundaryError> {
    if k == 0 {
        return Err(BoundaryError::ZeroDepth);
    }
    let rows = (0..walks)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            let w = crate::entropy_lab::sample_walk(rank, n, &mut r);
            let length = w.len();
            if length < k {
                return Ok(ProximalityRow {
                    walk: i,
                    length,
                    pushed_mass: None,
                    lower_bound: None,
                    shallow: true,
                });
            }
            let exact = pushed_prefix_mass_exact(rank, &w, k)?;
            let d = rank as f64;
            let lower = 1.0 - 1.0 / (2.0 * d) * (2.0 * d - 1.0).powi(-(length as i32 - k as i32 - 1));
            Ok(ProximalityRow {
                walk: i,
                length,
                pushed_mass: exact.to_f64(),
                lower_bound: Some(lower),
                shallow: length == k,
            })
        })
        .collect::<Result<Vec<_>, BoundaryError>>()?;
    Ok(ProximalityReport {
        rank,
        steps: n,
        depth: k,
        seed,
        rows,
    })
}

/// Exact rational as `(numerator, denominator)` strings.
pub fn rational_parts(r: &BigRational) -> (String, String) {
    let r = if r.denom().is_negative() { -r.clone() } else { r.clone() };
    (r.numer().to_string(), r.denom().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy_lab::exact_free_entropy;
    use crate::group_measures::srw;

    fn w(s: &str) -> ReducedWord {
        ReducedWord::parse(s, 2).unwrap()
    }

    #[test]
    fn cylinder_mass_examples() {
        assert_eq!(cylinder_mass(2, &w("a")).unwrap(), 0.25);
        assert!((cylinder_mass(2, &w("ab")).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        let nu = HittingMeasure::new(2);
        let total: BigRational = nu.cylinders(2).unwrap().iter().map(|c| nu.mass_exact(c)).sum();
        assert!(total.is_one());
        assert_eq!(cylinder_mass(2, &w("")), Err(BoundaryError::EmptyCylinder));
    }

    #[test]
    fn rn_examples() {
        for c in ["a", "Ab", "bba"] {
            assert_eq!(rn_derivative(2, &w(""), &w(c)).unwrap(), 1.0);
        }
        assert_eq!(rn_derivative(2, &w("a"), &w("ab")).unwrap(), 3.0);
        assert!((rn_derivative(2, &w("a"), &w("ba")).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!(matches!(
            rn_derivative(2, &w("ab"), &w("ab")),
            Err(BoundaryError::Shallow { .. })
        ));
    }

    #[test]
    fn cocycle_examples() {
        assert!(cocycle_check(&w(""), &w(""), &w("a")).unwrap());
        assert!(cocycle_check(&w("a"), &w("b"), &w("abab")).unwrap());
        assert!(cocycle_check(&w("a"), &w("b"), &w("ab")).is_err());
    }

    #[test]
    fn boundary_entropy_examples() {
        let delta = Distribution::delta_identity(FreeGroup { rank: 2 });
        assert_eq!(boundary_entropy(&delta).unwrap().value, 0.0);
        for d in 2..=3 {
            let b = boundary_entropy(&srw(d).unwrap()).unwrap();
            assert!((b.value - exact_free_entropy(d)).abs() < 1e-12);
            let exact = boundary_entropy_exact(d, &srw_exact(d)).unwrap();
            let expected = BigRational::new(BigInt::from(d as i64 - 1), BigInt::from(d as i64));
            assert_eq!(exact.coefficient.unwrap(), expected);
        }
    }

    #[test]
    fn pushed_mass_formula() {
        let m = pushed_prefix_mass_exact(2, &w("abababab"), 8).unwrap();
        assert_eq!(m, BigRational::new(3.into(), 4.into()));
        assert!(pushed_prefix_mass_exact(2, &w("ab"), 3).is_err());
        assert!(pushed_prefix_mass_exact(2, &w("ab"), 0).is_err());
    }

    #[test]
    fn proximality_rows() {
        let r = proximality_sim(2, 20, 2, 11, 8).unwrap();
        assert_eq!(r.rows.len(), 8);
        for row in &r.rows {
            if let (Some(m), Some(lb)) = (row.pushed_mass, row.lower_bound) {
                assert!(m >= lb);
            }
        }
    }
}

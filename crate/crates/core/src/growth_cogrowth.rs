//! Growth of `F_d`, kernel sphere counts and critical exponents.
//!
//! Kernel counts are computed two ways: by brute-force enumeration of reduced
//! words, and by the non-backtracking transfer matrix over states
//! `(coset, last letter)`. The critical exponent is the log of the Perron
//! root of that matrix, restricted to the states that lie on some path from
//! the identity back to the identity.

use std::collections::VecDeque;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::free_words::{sphere_size, Letter};
use crate::quotients::{PermRep, QuotientRep};

/// Largest `(2d-1)^n` the brute-force counter accepts.
pub const BRUTE_LIMIT: f64 = 1e8;

pub const DEFAULT_MAX_ITERATIONS: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GrowthError {
    #[error("quotient has no finite-state evaluator")]
    InfiniteQuotient,
    #[error("brute-force enumeration of radius {radius} exceeds (2d-1)^n <= 1e8")]
    RadiusTooLarge { radius: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NonConvergence(usize),
    #[error("no reduced word returns to the identity")]
    EmptyKernel,
    #[error("spectral radius {rho} outside [{lo}, 1]")]
    RhoOutOfRange { rho: f64, lo: f64 },
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(u16),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Sphere,
    Ball,
    KernelSphere,
    KernelBall,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Sphere => "sphere",
            SeriesKind::Ball => "ball",
            SeriesKind::KernelSphere => "kernel_sphere",
            SeriesKind::KernelBall => "kernel_ball",
        }
    }
}

/// Exact counts `c_0, ..., c_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrowthSeries {
    pub kind: SeriesKind,
    pub counts: Vec<BigUint>,
}

fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    match x.to_f64() {
        Some(v) if v.is_finite() => v.ln(),
        _ => {
            let bits = x.bits();
            let shift = bits.saturating_sub(64);
            (x >> shift).to_f64().unwrap_or(f64::MAX).ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
}

impl GrowthSeries {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn ln_count(&self, n: usize) -> f64 {
        big_ln(&self.counts[n])
    }

    /// `log(c_n) / n`; `None` at `n = 0` or when `c_n = 0`.
    pub fn log_count_over_n(&self, n: usize) -> Option<f64> {
        if n == 0 || self.counts[n].is_zero() {
            return None;
        }
        Some(self.ln_count(n) / n as f64)
    }

    /// `(log c_n - log c_m) / (n - m)` for the largest `m < n` with `c_m > 0`.
    pub fn log_ratio(&self, n: usize) -> Option<f64> {
        if self.counts[n].is_zero() {
            return None;
        }
        let m = (1..n).rev().find(|&m| !self.counts[m].is_zero())?;
        Some((self.ln_count(n) - self.ln_count(m)) / (n - m) as f64)
    }

    /// Running sums: a sphere series becomes a ball series.
    pub fn cumulative(&self) -> GrowthSeries {
        let mut acc = BigUint::zero();
        let counts = self
            .counts
            .iter()
            .map(|c| {
                acc += c;
                acc.clone()
            })
            .collect();
        let kind = match self.kind {
            SeriesKind::Sphere | SeriesKind::Ball => SeriesKind::Ball,
            SeriesKind::KernelSphere | SeriesKind::KernelBall => SeriesKind::KernelBall,
        };
        GrowthSeries { kind, counts }
    }

    /// CSV with header `n,count,log_count_over_n`; the last column is empty
    /// where undefined.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,count,log_count_over_n\n");
        for (n, c) in self.counts.iter().enumerate() {
            let r = self
                .log_count_over_n(n)
                .map(|x| format!("{x:.12e}"))
                .unwrap_or_default();
            writeln!(out, "{n},{c},{r}").expect("write to string");
        }
        out
    }
}

/// `|S(k)|` for `k ≤ n`.
pub fn sphere_counts(rank: u16, n: usize) -> GrowthSeries {
    GrowthSeries {
        kind: SeriesKind::Sphere,
        counts: (0..=n).map(|k| sphere_size(rank, k)).collect(),
    }
}

/// `|B(k)|` for `k ≤ n`.
pub fn ball_counts(rank: u16, n: usize) -> GrowthSeries {
    sphere_counts(rank, n).cumulative()
}

/// Growth rate `v(F_d) = log(2d - 1)`.
pub fn free_growth(rank: u16) -> f64 {
    (2.0 * rank as f64 - 1.0).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Brute,
    Transfer,
}

/// Non-backtracking transfer matrix on states `(coset, last letter)`.
///
/// State `q * 2d + key(s)` steps to `(q·t, t)` for every `t ≠ s⁻¹`.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    rep: PermRep,
    width: usize,
}

impl TransferMatrix {
    pub fn new(rep: PermRep) -> Self {
        let width = 2 * rep.rank() as usize;
        TransferMatrix { rep, width }
    }

    pub fn dimension(&self) -> usize {
        self.rep.order() * self.width
    }

    pub fn state(&self, coset: u32, last: Letter) -> usize {
        coset as usize * self.width + last.key()
    }

    fn successors(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        let q = (state / self.width) as u32;
        let s = state % self.width;
        let rank = self.rep.rank();
        (0..self.width).filter(move |&t| t != (s ^ 1)).map(move |t| {
            let next = self.rep.act_letter(q, Letter::from_key(t, rank));
            next as usize * self.width + t
        })
    }

    /// Entry `(i, j)`: number of one-letter transitions from `i` to `j`.
    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.successors(i).filter(|&k| k == j).count() as u32
    }

    /// Row sum of state `i`.
    pub fn row_sum(&self, i: usize) -> usize {
        self.successors(i).count()
    }

    /// States reached by the one-letter words.
    fn start_states(&self) -> Vec<usize> {
        let rank = self.rep.rank();
        Letter::all(rank)
            .map(|t| self.state(self.rep.act_letter(0, t), t))
            .collect()
    }

    fn is_identity_state(&self, state: usize) -> bool {
        state / self.width == 0
    }

    /// Exact counts of reduced words of length `k ≤ n` in the kernel.
    pub fn kernel_sphere_counts(&self, n: usize) -> GrowthSeries {
        let dim = self.dimension();
        let mut counts = vec![BigUint::from(1u32)];
        let mut v = vec![BigUint::zero(); dim];
        for s in self.start_states() {
            v[s] += 1u32;
        }
        for k in 1..=n {
            if k > 1 {
                let mut next = vec![BigUint::zero(); dim];
                for (i, c) in v.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    for j in self.successors(i) {
                        next[j] += c;
                    }
                }
                v = next;
            }
            let mut total = BigUint::zero();
            for (i, c) in v.iter().enumerate().take(self.width) {
                debug_assert!(self.is_identity_state(i));
                total += c;
            }
            counts.push(total);
        }
        GrowthSeries {
            kind: SeriesKind::KernelSphere,
            counts,
        }
    }

    /// `|qN ∩ B(k)|` for every coset `q` and `k ≤ n` (saturating).
    pub fn coset_ball_counts(&self, n: usize) -> Vec<Vec<u64>> {
        let order = self.rep.order();
        let dim = self.dimension();
        let mut v = vec![0u64; dim];
        for s in self.start_states() {
            v[s] += 1;
        }
        let mut ball = vec![0u64; order];
        ball[0] = 1;
        let mut out = vec![ball.clone()];
        for k in 1..=n {
            if k > 1 {
                let mut next = vec![0u64; dim];
                for (i, &c) in v.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    for j in self.successors(i) {
                        next[j] = next[j].saturating_add(c);
                    }
                }
                v = next;
            }
            for (i, &c) in v.iter().enumerate() {
                let q = i / self.width;
                ball[q] = ball[q].saturating_add(c);
            }
            out.push(ball.clone());
        }
        out
    }

    /// States reachable from a start state and from which an identity state
    /// is reachable, in increasing order.
    pub fn core_states(&self) -> Vec<usize> {
        let dim = self.dimension();
        let mut forward = vec![false; dim];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for s in self.start_states() {
            if !forward[s] {
                forward[s] = true;
                queue.push_back(s);
            }
        }
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); dim];
        for i in 0..dim {
            for j in self.successors(i) {
                preds[j].push(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            for j in self.successors(i) {
                if !forward[j] {
                    forward[j] = true;
                    queue.push_back(j);
                }
            }
        }
        let mut backward = vec![false; dim];
        for (i, b) in backward.iter_mut().enumerate().take(self.width) {
            *b = true;
            queue.push_back(i);
        }
        while let Some(j) = queue.pop_front() {
            for &i in &preds[j] {
                if !backward[i] {
                    backward[i] = true;
                    queue.push_back(i);
                }
            }
        }
        (0..dim).filter(|&i| forward[i] && backward[i]).collect()
    }
}

/// Brute-force kernel sphere counts: walk every reduced word of length `≤ n`
/// depth-first, tracking its coset.
pub fn brute_kernel_sphere_counts(rep: &PermRep, n: usize) -> Result<GrowthSeries, GrowthError> {
    let rank = rep.rank();
    if (2.0 * rank as f64 - 1.0).powi(n as i32) > BRUTE_LIMIT {
        return Err(GrowthError::RadiusTooLarge { radius: n });
    }
    let width = 2 * rank as usize;
    let mut counts = vec![0u64; n + 1];
    counts[0] = 1;
    // stack of (coset, last key, depth)
    let mut stack: Vec<(u32, usize, usize)> = Vec::new();
    if n >= 1 {
        for t in 0..width {
            stack.push((rep.act_letter(0, Letter::from_key(t, rank)), t, 1));
        }
    }
    while let Some((q, last, depth)) = stack.pop() {
        if q == 0 {
            counts[depth] += 1;
        }
        if depth < n {
            for t in (0..width).filter(|&t| t != last ^ 1) {
                stack.push((rep.act_letter(q, Letter::from_key(t, rank)), t, depth + 1));
            }
        }
    }
    Ok(GrowthSeries {
        kind: SeriesKind::KernelSphere,
        counts: counts.into_iter().map(BigUint::from).collect(),
    })
}

/// Exact `|N ∩ S(k)|` for `k ≤ n`, for a finite quotient with kernel `N`.
pub fn kernel_sphere_counts(rep: &QuotientRep, n: usize, method: CountMethod) -> Result<GrowthSeries, GrowthError> {
    let perm = rep.as_perm().ok_or(GrowthError::InfiniteQuotient)?;
    match method {
        CountMethod::Brute => brute_kernel_sphere_counts(&perm, n),
        CountMethod::Transfer => Ok(TransferMatrix::new(perm).kernel_sphere_counts(n)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalExponent {
    /// `δ(N)`, natural log of the Perron root.
    pub delta: f64,
    pub perron_root: f64,
    pub iterations: usize,
    /// Number of states kept after the reachability restriction.
    pub core_states: usize,
}

/// `δ(N)` for the kernel of a finite quotient.
///
/// Power iteration runs on `A + I` restricted to the core states, from the
/// all-ones vector. The shift makes the restricted matrix aperiodic without
/// moving the Perron root (it becomes `λ + 1`), so periodic quotients
/// converge. The estimate is the L1 growth ratio of the normalized iterate;
/// it is accepted once its relative change stays below `tol` for 10
/// consecutive iterations.
pub fn critical_exponent(rep: &QuotientRep, tol: f64, max_iterations: usize) -> Result<CriticalExponent, GrowthError> {
    let perm = rep.as_perm().ok_or(GrowthError::InfiniteQuotient)?;
    let tm = TransferMatrix::new(perm);
    let core = tm.core_states();
    if core.is_empty() {
        return Err(GrowthError::EmptyKernel);
    }
    let mut local = vec![usize::MAX; tm.dimension()];
    for (k, &s) in core.iter().enumerate() {
        local[s] = k;
    }
    let rows: Vec<Vec<usize>> = core
        .iter()
        .map(|&s| {
            tm.successors(s)
                .filter_map(|j| (local[j] != usize::MAX).then_some(local[j]))
                .collect()
        })
        .collect();

    let m = core.len();
    let mut x = vec![1.0 / m as f64; m];
    let mut previous = f64::NAN;
    let mut stable = 0;
    for it in 1..=max_iterations {
        let y: Vec<f64> = rows
            .par_iter()
            .enumerate()
            .map(|(i, succ)| x[i] + succ.iter().map(|&j| x[j]).sum::<f64>())
            .collect();
        let norm: f64 = y.iter().sum();
        let estimate = norm / x.iter().sum::<f64>();
        x = y.into_iter().map(|v| v / norm).collect();
        if (estimate - previous).abs() <= tol * estimate {
            stable += 1;
            if stable >= 10 {
                let perron_root = estimate - 1.0;
                return Ok(CriticalExponent {
                    delta: perron_root.ln(),
                    perron_root,
                    iterations: it,
                    core_states: m,
                });
            }
        } else {
            stable = 0;
        }
        previous = estimate;
    }
    Err(GrowthError::NonConvergence(max_iterations))
}

/// Cogrowth predicted from the spectral radius `rho` of the quotient walk:
/// `log α` for the root `α ∈ [√(2d-1), 2d-1]` of
/// `rho = (√(2d-1)/d) · (α/√(2d-1) + √(2d-1)/α) / 2`.
pub fn grigorchuk_delta(rho: f64, rank: u16) -> Result<f64, GrowthError> {
    if rank < 2 {
        return Err(GrowthError::RankTooSmall(rank));
    }
    let d = rank as f64;
    let s = (2.0 * d - 1.0).sqrt();
    let lo = s / d;
    // one ulp of slack at each end of the admissible interval
    if !(rho >= lo * (1.0 - f64::EPSILON) && rho <= 1.0 + f64::EPSILON) {
        return Err(GrowthError::RhoOutOfRange { rho, lo });
    }
    // with x = α/s: x + 1/x = 2c, c = rho d / s >= 1
    let c = (rho * d / s).max(1.0);
    let x = c + (c * c - 1.0).max(0.0).sqrt();
    Ok((s * x).ln())
}

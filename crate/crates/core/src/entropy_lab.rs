//! Avez entropy, drift, the Guivarc'h identity and the quotient entropy gap.
//!
//! Free-group entropies come from the radial birth–death chain of the simple
//! random walk: `μ^n` is uniform on each sphere, so
//! `H(μ^n) = H(radius) + Σ_r P(|w_n| = r) log |S(r)|`. Quotient entropies come
//! from exact dynamic programming on the quotient.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::free_words::{log_sphere_size, sphere_size_f64, Letter, ReducedWord};
use crate::group_measures::{compensated_sum, entropy_of, srw, Distribution, FreeGroup, MeasureError};
use crate::growth_cogrowth::{
    critical_exponent, free_growth, grigorchuk_delta, GrowthError, TransferMatrix, DEFAULT_MAX_ITERATIONS,
};
use crate::quotients::{QuotientElement, QuotientRep};
use crate::rng;

/// Default cap on dense DP cells and on exact convolution supports.
pub const DEFAULT_MEMORY_GUARD: usize = 50_000_000;

/// Slack used when checking monotonicity of floating-point series.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EntropyError {
    #[error("rank must be at least 2, got {0}")]
    RankTooSmall(u16),
    #[error("memory guard exceeded: {needed} cells > {limit}")]
    MemoryGuard { needed: usize, limit: usize },
    #[error("support of size {size} too large to group (limit {limit})")]
    SupportTooLarge { size: usize, limit: usize },
    #[error("need at least 2 trials, got {0}")]
    TooFewTrials(usize),
    #[error("rank mismatch between quotient ({quotient}) and walk ({walk})")]
    RankMismatch { quotient: u16, walk: u16 },
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

fn check_rank(rank: u16) -> Result<(), EntropyError> {
    if rank < 2 {
        return Err(EntropyError::RankTooSmall(rank));
    }
    Ok(())
}

/// `H(μ^k)` for `k = 0..=n`, in nats.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySeries {
    pub entropies: Vec<f64>,
}

impl EntropySeries {
    pub fn steps(&self) -> usize {
        self.entropies.len().saturating_sub(1)
    }

    pub fn entropy(&self, k: usize) -> f64 {
        self.entropies[k]
    }

    /// `H(μ^k) / k`, for `k ≥ 1`.
    pub fn per_step(&self, k: usize) -> f64 {
        self.entropies[k] / k as f64
    }

    /// `H(μ^k) - H(μ^(k-1))`, for `k ≥ 1`.
    pub fn increment(&self, k: usize) -> f64 {
        self.entropies[k] - self.entropies[k - 1]
    }

    /// The last `count` increments, oldest first.
    pub fn last_increments(&self, count: usize) -> Vec<f64> {
        let n = self.steps();
        (n.saturating_sub(count) + 1..=n).map(|k| self.increment(k)).collect()
    }

    /// `H/k` non-increasing for `k ≥ 1`.
    pub fn per_step_non_increasing(&self) -> bool {
        (2..=self.steps()).all(|k| self.per_step(k) <= self.per_step(k - 1) + MONOTONE_SLACK)
    }

    pub fn increments_non_negative(&self) -> bool {
        (1..=self.steps()).all(|k| self.increment(k) >= -MONOTONE_SLACK)
    }
}

/// Law of `|w_k|` for the simple random walk, `k = 0..=n`.
///
/// From radius 0 the walk moves to 1; from `r ≥ 1` it moves up with
/// probability `(2d-1)/(2d)` and down otherwise.
pub fn radial_laws(rank: u16, n: usize) -> Result<Vec<Vec<f64>>, EntropyError> {
    check_rank(rank)?;
    let up = (2.0 * rank as f64 - 1.0) / (2.0 * rank as f64);
    let down = 1.0 / (2.0 * rank as f64);
    let mut laws = Vec::with_capacity(n + 1);
    let mut p = vec![1.0];
    laws.push(p.clone());
    for _ in 0..n {
        let mut next = vec![0.0; p.len() + 1];
        for (r, &m) in p.iter().enumerate() {
            if m == 0.0 {
                continue;
            }
            if r == 0 {
                next[1] += m;
            } else {
                next[r + 1] += m * up;
                next[r - 1] += m * down;
            }
        }
        laws.push(next.clone());
        p = next;
    }
    Ok(laws)
}

/// Exact `H(μ^k)`, `k ≤ n`, for the simple random walk on `F_d`, in
/// `O(n²)` time.
pub fn radial_entropy_exact(rank: u16, n: usize) -> Result<EntropySeries, EntropyError> {
    let laws = radial_laws(rank, n)?;
    let log_sphere: Vec<f64> = (0..=n).map(|r| log_sphere_size(rank, r)).collect();
    let entropies = laws
        .iter()
        .map(|law| {
            let radial = entropy_of(law.iter().copied());
            let spread = compensated_sum(law.iter().enumerate().map(|(r, &p)| p * log_sphere[r]));
            radial + spread
        })
        .collect();
    Ok(EntropySeries { entropies })
}

/// Brute-force `H(μ^k)` by exact convolution in `F_d`, `k ≤ n`.
pub fn convolution_entropy(mu: &Distribution<FreeGroup>, n: usize) -> EntropySeries {
    EntropySeries {
        entropies: mu.powers(n).iter().map(|p| p.shannon_entropy()).collect(),
    }
}

/// Largest relative spread of `μ^n` across a single sphere, over `n ≤ max_n`,
/// computed from exact convolution powers of the simple random walk. Zero
/// means `μ^n` is uniform on every sphere.
pub fn sphere_uniformity_defect(rank: u16, max_n: usize) -> Result<f64, EntropyError> {
    let mu = srw(rank)?;
    let mut worst = 0.0f64;
    for power in mu.powers(max_n) {
        let mut by_radius: BTreeMap<usize, (f64, f64, usize)> = BTreeMap::new();
        for (w, p) in power.iter() {
            let e = by_radius.entry(w.len()).or_insert((f64::INFINITY, 0.0, 0));
            e.0 = e.0.min(p);
            e.1 = e.1.max(p);
            e.2 += 1;
        }
        for (r, (lo, hi, count)) in by_radius {
            // every point of the sphere must be charged
            if (count as f64) < sphere_size_f64(rank, r) {
                return Ok(f64::INFINITY);
            }
            worst = worst.max((hi - lo) / hi);
        }
    }
    Ok(worst)
}

/// Exact `H(μ'^k)` for `k ≤ n`, where `μ'` is the image of `step` in the
/// quotient.
///
/// Finite quotients use a dense vector over elements; `Z^d` uses a dense
/// grid of side `2·n·m + 1` where `m` bounds the step's coordinates; both are
/// limited by `guard` cells.
pub fn quotient_entropy_dp(
    rep: &Arc<QuotientRep>,
    step: &Distribution<FreeGroup>,
    n: usize,
    guard: usize,
) -> Result<EntropySeries, EntropyError> {
    if step.group().rank != rep.rank() {
        return Err(EntropyError::RankMismatch {
            quotient: rep.rank(),
            walk: step.group().rank,
        });
    }
    match rep.as_ref() {
        QuotientRep::Trivial { .. } => Ok(EntropySeries {
            entropies: vec![0.0; n + 1],
        }),
        QuotientRep::Perm(perm) => {
            let order = perm.order();
            if order > guard {
                return Err(EntropyError::MemoryGuard {
                    needed: order,
                    limit: guard,
                });
            }
            // per step word: its permutation of the elements
            let moves: Vec<(Vec<u32>, f64)> = step
                .iter()
                .map(|(w, p)| ((0..order as u32).map(|q| perm.act(q, w)).collect(), p))
                .collect();
            let mut v = vec![0.0; order];
            v[0] = 1.0;
            let mut entropies = vec![0.0];
            for _ in 0..n {
                let mut next = vec![0.0; order];
                for (q, &m) in v.iter().enumerate() {
                    if m == 0.0 {
                        continue;
                    }
                    for (image, p) in &moves {
                        next[image[q] as usize] += m * p;
                    }
                }
                entropies.push(entropy_of(next.iter().copied()));
                v = next;
            }
            Ok(EntropySeries { entropies })
        }
        QuotientRep::Abelian { rank } => abelian_entropy_dp(*rank as usize, rep, step, n, guard),
    }
}

fn abelian_entropy_dp(
    dim: usize,
    rep: &Arc<QuotientRep>,
    step: &Distribution<FreeGroup>,
    n: usize,
    guard: usize,
) -> Result<EntropySeries, EntropyError> {
    let pushed = rep.pushforward(step).expect("ranks checked");
    let moves: Vec<(Vec<i64>, f64)> = pushed
        .iter()
        .map(|(e, p)| match e {
            QuotientElement::Vector(v) => (v.clone(), p),
            _ => unreachable!("abelian quotient"),
        })
        .collect();
    let reach = moves
        .iter()
        .flat_map(|(v, _)| v.iter().map(|x| x.unsigned_abs() as usize))
        .max()
        .unwrap_or(0)
        * n;
    let side = 2 * reach + 1;
    let cells = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side));
    let cells = match cells {
        Some(c) if c <= guard => c,
        other => {
            return Err(EntropyError::MemoryGuard {
                needed: other.unwrap_or(usize::MAX),
                limit: guard,
            })
        }
    };
    // flat offset of each move; row-major with the last coordinate fastest
    let strides: Vec<i64> = (0..dim).map(|i| (side as i64).pow((dim - 1 - i) as u32)).collect();
    let offsets: Vec<(i64, f64)> = moves
        .iter()
        .map(|(v, p)| (v.iter().zip(&strides).map(|(x, s)| x * s).sum(), *p))
        .collect();
    let origin = (0..dim).map(|i| reach as i64 * strides[i]).sum::<i64>() as usize;
    let mut v = vec![0.0; cells];
    v[origin] = 1.0;
    let mut entropies = vec![0.0];
    for _ in 0..n {
        // gather: next[x] = Σ_s v[x - s] p_s, each cell summed in move order
        let next: Vec<f64> = (0..cells)
            .into_par_iter()
            .map(|x| {
                let mut acc = 0.0;
                for &(off, p) in &offsets {
                    let src = x as i64 - off;
                    if src >= 0 && (src as usize) < cells {
                        acc += v[src as usize] * p;
                    }
                }
                acc
            })
            .collect();
        entropies.push(entropy_of(next.iter().copied()));
        v = next;
    }
    Ok(EntropySeries { entropies })
}

/// Monte Carlo escape rate of the simple random walk.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftEstimate {
    pub estimate: f64,
    pub standard_error: f64,
    pub trials: usize,
    pub steps: usize,
    pub seed: u64,
}

/// Sample `|w_n|` for one simple-random-walk trajectory.
pub fn walk_length<R: Rng>(rank: u16, n: usize, rng: &mut R) -> usize {
    sample_walk(rank, n, rng).len()
}

/// One simple-random-walk trajectory of `n` steps, reduced.
pub fn sample_walk<R: Rng>(rank: u16, n: usize, rng: &mut R) -> ReducedWord {
    let mut w = ReducedWord::identity(rank);
    let width = 2 * rank as usize;
    for _ in 0..n {
        let l = Letter::from_key(rng.gen_range(0..width), rank);
        w.push(l).expect("same rank");
    }
    w
}

/// Mean of `|w_n|/n` over `trials` walks; trial `i` uses stream `i` of
/// `seed`.
pub fn drift_mc(rank: u16, n: usize, trials: usize, seed: u64) -> Result<DriftEstimate, EntropyError> {
    check_rank(rank)?;
    if trials < 2 {
        return Err(EntropyError::TooFewTrials(trials));
    }
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, i);
            walk_length(rank, n, &mut r) as f64 / n.max(1) as f64
        })
        .collect();
    let mean = compensated_sum(samples.iter().copied()) / trials as f64;
    let var = compensated_sum(samples.iter().map(|x| (x - mean) * (x - mean))) / (trials - 1) as f64;
    Ok(DriftEstimate {
        estimate: mean,
        standard_error: (var / trials as f64).sqrt(),
        trials,
        steps: n,
        seed,
    })
}

/// `(d-1)/d`, the drift of the simple random walk on `F_d`.
pub fn exact_drift(rank: u16) -> f64 {
    (rank as f64 - 1.0) / rank as f64
}

/// `h_RW = (d-1)/d · log(2d-1)` for the simple random walk on `F_d`.
pub fn exact_free_entropy(rank: u16) -> f64 {
    exact_drift(rank) * free_growth(rank)
}

/// `(d-2)/(2d-2) · h_RW`, the entropy level reached by the family of
/// quotient boundaries.
pub fn theorem_a_bound(rank: u16) -> f64 {
    let d = rank as f64;
    (d - 2.0) / (2.0 * d - 2.0) * exact_free_entropy(rank)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GuivarchReport {
    pub entropy: f64,
    pub drift: f64,
    pub growth: f64,
    /// `drift · growth`.
    pub bound: f64,
    /// `|h - drift · growth|`.
    pub residual: f64,
    /// `h ≤ drift · growth` up to `1e-9`.
    pub holds: bool,
}

impl GuivarchReport {
    pub fn equality_within(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// Check the fundamental inequality `h ≤ ℓ · v`.
pub fn guivarch_check(entropy: f64, drift: f64, growth: f64) -> GuivarchReport {
    let bound = drift * growth;
    GuivarchReport {
        entropy,
        drift,
        growth,
        bound,
        residual: (entropy - bound).abs(),
        holds: entropy <= bound + 1e-9,
    }
}

/// One row of the entropy-gap report.
#[derive(Debug, Clone, PartialEq)]
pub struct GapRow {
    pub k: usize,
    pub h_free: f64,
    pub h_quotient: f64,
    /// `H(μ^k) - H(μ'^k)`.
    pub gap: f64,
    /// `Σ_C μ^k(C) log |C ∩ supp μ^k|` over cosets `C`, when the support was
    /// grouped exactly.
    pub coset_bound: Option<f64>,
    /// `log |N ∩ B(k)|`, for finite quotients.
    pub log_kernel_ball: Option<f64>,
    /// `log |N ∩ B(2k)|`, for finite quotients.
    pub log_kernel_ball_double: Option<f64>,
    /// `max_C |C ∩ B(k)|` over cosets, for finite quotients.
    pub max_coset_ball: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub rank: u16,
    pub rows: Vec<GapRow>,
    /// `h_RW` of the free walk.
    pub h_free: f64,
    /// `H(μ'^n)/n`, an upper bound for the quotient's Avez entropy.
    pub h_quotient_upper: f64,
    /// `δ(N)`.
    pub delta: f64,
    /// How `delta` was obtained.
    pub delta_source: &'static str,
    /// `h_RW - h'` is at most `h_RW` (as `h' ≥ 0`); this flags `h_RW ≤ δ(N)`.
    pub lemma_holds: bool,
    /// `δ(N) ≥ ½ log(2d-1)`.
    pub jm_bound_holds: bool,
    /// Every grouped row has `gap ≤ coset_bound + 1e-9`.
    pub jensen_holds: bool,
    pub warnings: Vec<String>,
}

/// Options for [`entropy_gap_check`].
#[derive(Debug, Clone, Copy)]
pub struct GapOptions {
    /// Rows up to this `k` group the exact support of `μ^k` by coset.
    pub exact_steps: usize,
    /// Rows up to this `k` report kernel ball counts.
    pub ball_steps: usize,
    pub guard: usize,
    pub tol: f64,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions {
            exact_steps: 6,
            ball_steps: 12,
            guard: DEFAULT_MEMORY_GUARD,
            tol: 1e-13,
        }
    }
}

/// Compare `H(μ^k) - H(μ'^k)` for the simple random walk on `F_d` and its
/// image in a quotient with the coset-decomposition bound and with kernel
/// ball counts, for `k ≤ n`.
pub fn entropy_gap_check(
    rank: u16,
    rep: &Arc<QuotientRep>,
    n: usize,
    opts: GapOptions,
) -> Result<GapReport, EntropyError> {
    check_rank(rank)?;
    let mu = srw(rank)?;
    let free = radial_entropy_exact(rank, n)?;
    let quotient = quotient_entropy_dp(rep, &mu, n, opts.guard)?;

    let exact_steps = opts.exact_steps.min(n);
    let mut coset_bounds = vec![None; n + 1];
    let mut power = Distribution::delta_identity(*mu.group());
    for bound in coset_bounds.iter_mut().take(exact_steps + 1).skip(1) {
        power = power.convolve(&mu)?;
        if power.support_size() > opts.guard {
            return Err(EntropyError::SupportTooLarge {
                size: power.support_size(),
                limit: opts.guard,
            });
        }
        *bound = Some(coset_bound(&power, rep));
    }

    let ball_steps = opts.ball_steps.min(n);
    let mut kernel_balls = None;
    let mut coset_balls = None;
    if let Some(perm) = rep.as_perm() {
        let tm = TransferMatrix::new(perm);
        kernel_balls = Some(tm.kernel_sphere_counts(2 * ball_steps).cumulative());
        coset_balls = Some(tm.coset_ball_counts(ball_steps));
    }

    let (delta, delta_source) = match rep.as_ref() {
        QuotientRep::Abelian { .. } => (grigorchuk_delta(1.0, rank)?, "grigorchuk(rho=1)"),
        _ => (
            critical_exponent(rep, opts.tol, DEFAULT_MAX_ITERATIONS)?.delta,
            "transfer-matrix",
        ),
    };

    let mut rows = Vec::with_capacity(n);
    let mut warnings = Vec::new();
    let mut jensen_holds = true;
    for k in 1..=n {
        let h_free = free.entropy(k);
        let h_quotient = quotient.entropy(k);
        let gap = h_free - h_quotient;
        let coset_bound = coset_bounds[k];
        if let Some(b) = coset_bound {
            jensen_holds &= gap <= b + 1e-9;
        }
        let (mut log_kernel_ball, mut log_kernel_ball_double, mut max_coset_ball) = (None, None, None);
        if k <= ball_steps {
            if let (Some(kb), Some(cb)) = (&kernel_balls, &coset_balls) {
                log_kernel_ball = Some(kb.ln_count(k));
                log_kernel_ball_double = Some(kb.ln_count(2 * k));
                let worst = cb[k].iter().copied().max().unwrap_or(0);
                max_coset_ball = Some(worst);
                let same_radius = kb.ln_count(k);
                if gap > same_radius + 1e-12 {
                    warnings.push(format!(
                        "k={k}: H(mu^k)-H(mu'^k) = {gap:.6} exceeds log|N∩B(k)| = {same_radius:.6}; \
                         the finite-radius step |gN∩B(k)| <= |N∩B(k)| fails (max coset ball {worst})"
                    ));
                }
            }
        }
        rows.push(GapRow {
            k,
            h_free,
            h_quotient,
            gap,
            coset_bound,
            log_kernel_ball,
            log_kernel_ball_double,
            max_coset_ball,
        });
    }

    let h_free = exact_free_entropy(rank);
    let h_quotient_upper = if n > 0 { quotient.per_step(n) } else { 0.0 };
    Ok(GapReport {
        rank,
        rows,
        h_free,
        h_quotient_upper,
        delta,
        delta_source,
        lemma_holds: h_free <= delta,
        jm_bound_holds: delta >= 0.5 * free_growth(rank) - 1e-12,
        jensen_holds,
        warnings,
    })
}

/// `Σ_C μ(C) log |C ∩ supp μ|` over the cosets `C` of the kernel.
pub fn coset_bound(mu: &Distribution<FreeGroup>, rep: &QuotientRep) -> f64 {
    let mut cosets: BTreeMap<QuotientElement, (f64, usize)> = BTreeMap::new();
    for (w, p) in mu.iter() {
        let e = cosets.entry(rep.project(w).expect("ranks checked")).or_insert((0.0, 0));
        e.0 += p;
        e.1 += 1;
    }
    compensated_sum(cosets.values().map(|&(m, c)| m * (c as f64).ln()))
}

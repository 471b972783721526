//! Sub-σ-algebras of a finite probability space, modelled as partitions.
//!
//! A partition is stored as a block label per point, relabelled so that
//! blocks are numbered in order of first appearance; two partitions are
//! equal exactly when their label vectors are. Refinement is the lattice
//! order: the join is the common refinement, the meet the finest common
//! coarsening.

use thiserror::Error;

use crate::group_measures::compensated_sum;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("weights must be positive and sum to 1 (sum = {0})")]
    BadWeights(f64),
    #[error("space has {expected} points, got {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("block {0} is empty")]
    EmptyBlock(usize),
    #[error("point {0} assigned to more than one block or to none")]
    BadCover(usize),
    #[error("generator {0} is not a bijection")]
    NotBijection(usize),
    #[error("step probabilities must be nonnegative and sum to 1")]
    BadStepMeasure,
    #[error("partition is not invariant under the action")]
    NotInvariant,
    #[error("partitions are not nested")]
    NotNested,
    #[error("chain is not monotone at step {0}")]
    NotMonotone(usize),
    #[error("empty chain")]
    EmptyChain,
    #[error("stationary solve did not converge in {0} iterations")]
    NonConvergence(usize),
    #[error("operators act on different spaces")]
    SpaceMismatch,
}

/// A finite probability space with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    weights: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self, LatticeError> {
        let total = compensated_sum(weights.iter().copied());
        if weights.is_empty() || weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) || (total - 1.0).abs() > 1e-12 {
            return Err(LatticeError::BadWeights(total));
        }
        Ok(FiniteSpace { weights })
    }

    pub fn uniform(m: usize) -> Self {
        FiniteSpace {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `‖f‖_p` with respect to the weights.
    pub fn norm(&self, f: &[f64], p: f64) -> f64 {
        compensated_sum(self.weights.iter().zip(f).map(|(w, x)| w * x.abs().powf(p))).powf(1.0 / p)
    }

    /// `⟨f, g⟩` with respect to the weights.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        compensated_sum(self.weights.iter().zip(f.iter().zip(g)).map(|(w, (a, b))| w * a * b))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    labels: Vec<usize>,
    blocks: usize,
}

impl Partition {
    /// From arbitrary labels; relabels canonically.
    pub fn from_labels<T: Eq + Clone>(labels: &[T]) -> Self {
        let mut seen: Vec<T> = Vec::new();
        let canon = labels
            .iter()
            .map(|l| match seen.iter().position(|s| s == l) {
                Some(i) => i,
                None => {
                    seen.push(l.clone());
                    seen.len() - 1
                }
            })
            .collect();
        Partition {
            labels: canon,
            blocks: seen.len(),
        }
    }

    /// From explicit 0-based blocks covering `0..m` exactly once.
    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self, LatticeError> {
        let mut labels = vec![usize::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(LatticeError::EmptyBlock(b));
            }
            for &x in block {
                match labels.get_mut(x) {
                    Some(l) if *l == usize::MAX => *l = b,
                    _ => return Err(LatticeError::BadCover(x)),
                }
            }
        }
        if let Some(x) = labels.iter().position(|&l| l == usize::MAX) {
            return Err(LatticeError::BadCover(x));
        }
        Ok(Self::from_labels(&labels))
    }

    pub fn trivial(m: usize) -> Self {
        Self::from_labels(&vec![0; m])
    }

    pub fn discrete(m: usize) -> Self {
        Self::from_labels(&(0..m).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn block_count(&self) -> usize {
        self.blocks
    }

    pub fn block_of(&self, x: usize) -> usize {
        self.labels[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Blocks as sorted point lists, in label order.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (x, &b) in self.labels.iter().enumerate() {
            out[b].push(x);
        }
        out
    }

    /// Every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        let mut image = vec![usize::MAX; self.blocks];
        self.labels.iter().zip(&coarser.labels).all(|(&b, &c)| {
            if image[b] == usize::MAX {
                image[b] = c;
            }
            image[b] == c
        })
    }

    fn check_len(&self, other: &Partition) -> Result<(), LatticeError> {
        if self.len() != other.len() {
            return Err(LatticeError::SizeMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(())
    }

    /// Common refinement.
    pub fn join(&self, other: &Partition) -> Result<Partition, LatticeError> {
        self.check_len(other)?;
        let pairs: Vec<(usize, usize)> = self.labels.iter().copied().zip(other.labels.iter().copied()).collect();
        Ok(Self::from_labels(&pairs))
    }

    /// Finest common coarsening: connected components of the graph linking
    /// points that share a block in either partition.
    pub fn meet(&self, other: &Partition) -> Result<Partition, LatticeError> {
        self.check_len(other)?;
        let mut uf = UnionFind::new(self.len());
        let mut first_p = vec![usize::MAX; self.blocks];
        let mut first_q = vec![usize::MAX; other.blocks];
        for x in 0..self.len() {
            for (first, b) in [(&mut first_p, self.labels[x]), (&mut first_q, other.labels[x])] {
                if first[b] == usize::MAX {
                    first[b] = x;
                } else {
                    uf.union(first[b], x);
                }
            }
        }
        let roots: Vec<usize> = (0..self.len()).map(|x| uf.find(x)).collect();
        Ok(Self::from_labels(&roots))
    }

    /// The partition `{g·b}`.
    pub fn translate(&self, perm: &[usize]) -> Partition {
        let mut labels = vec![0; self.len()];
        for (x, &b) in self.labels.iter().enumerate() {
            labels[perm[x]] = b;
        }
        Self::from_labels(&labels)
    }
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut y = x;
        while self.parent[y] != root {
            let next = self.parent[y];
            self.parent[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Conditional expectation onto the σ-algebra generated by a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CondExpectation {
    weights: Vec<f64>,
    partition: Partition,
    block_mass: Vec<f64>,
}

/// `E[f | P]`: block-wise weighted means.
pub fn cond_expect(space: &FiniteSpace, p: &Partition) -> Result<CondExpectation, LatticeError> {
    if p.len() != space.len() {
        return Err(LatticeError::SizeMismatch {
            expected: space.len(),
            found: p.len(),
        });
    }
    Ok(CondExpectation {
        weights: space.weights.clone(),
        partition: p.clone(),
        block_mass: block_masses(&space.weights, p),
    })
}

fn block_masses(weights: &[f64], p: &Partition) -> Vec<f64> {
    p.blocks()
        .iter()
        .map(|b| compensated_sum(b.iter().map(|&x| weights[x])))
        .collect()
}

impl CondExpectation {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut sums = vec![0.0; self.partition.block_count()];
        for (x, &b) in self.partition.labels.iter().enumerate() {
            sums[b] += self.weights[x] * f[x];
        }
        let means: Vec<f64> = sums.iter().zip(&self.block_mass).map(|(s, m)| s / m).collect();
        self.partition.labels.iter().map(|&b| means[b]).collect()
    }

    /// Dense matrix: `(Ef)(x) = Σ_y M[x][y] f(y)`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let m = self.weights.len();
        (0..m)
            .map(|x| {
                let b = self.partition.labels[x];
                (0..m)
                    .map(|y| {
                        if self.partition.labels[y] == b {
                            self.weights[y] / self.block_mass[b]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// Hilbert–Schmidt norm of `E1 - E2` on `L²(λ)`:
/// `Σ_{x,y} λ(x) (E1 - E2)[x][y]² / λ(y)`, square-rooted.
pub fn l2_distance(e1: &CondExpectation, e2: &CondExpectation) -> Result<f64, LatticeError> {
    if e1.weights != e2.weights {
        return Err(LatticeError::SpaceMismatch);
    }
    let (a, b) = (e1.matrix(), e2.matrix());
    let w = &e1.weights;
    let mut terms = Vec::with_capacity(w.len() * w.len());
    for x in 0..w.len() {
        for y in 0..w.len() {
            let d = a[x][y] - b[x][y];
            terms.push(w[x] * d * d / w[y]);
        }
    }
    Ok(compensated_sum(terms).max(0.0).sqrt())
}

/// Permutations of the points with a step distribution over them.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteAction {
    points: usize,
    steps: Vec<(Vec<usize>, f64)>,
}

impl FiniteAction {
    /// `perm[x]` is the image of `x`.
    pub fn new(points: usize, steps: Vec<(Vec<usize>, f64)>) -> Result<Self, LatticeError> {
        for (i, (perm, p)) in steps.iter().enumerate() {
            if perm.len() != points || !is_bijection(perm) {
                return Err(LatticeError::NotBijection(i));
            }
            if p.is_nan() || *p < 0.0 {
                return Err(LatticeError::BadStepMeasure);
            }
        }
        let total = compensated_sum(steps.iter().map(|(_, p)| *p));
        if steps.is_empty() || (total - 1.0).abs() > 1e-12 {
            return Err(LatticeError::BadStepMeasure);
        }
        Ok(FiniteAction { points, steps })
    }

    /// Uniform step measure on the generators and their inverses.
    pub fn symmetric(points: usize, generators: &[Vec<usize>]) -> Result<Self, LatticeError> {
        let mut steps = Vec::with_capacity(2 * generators.len());
        let p = 1.0 / (2 * generators.len().max(1)) as f64;
        for (i, g) in generators.iter().enumerate() {
            if g.len() != points || !is_bijection(g) {
                return Err(LatticeError::NotBijection(i));
            }
            let mut inv = vec![0; points];
            for (x, &y) in g.iter().enumerate() {
                inv[y] = x;
            }
            steps.push((g.clone(), p));
            steps.push((inv, p));
        }
        Self::new(points, steps)
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn steps(&self) -> &[(Vec<usize>, f64)] {
        &self.steps
    }

    pub fn is_invariant(&self, p: &Partition) -> bool {
        self.steps.iter().all(|(g, _)| p.translate(g) == *p)
    }
}

fn is_bijection(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    perm.iter().all(|&y| match seen.get_mut(y) {
        Some(s) if !*s => {
            *s = true;
            true
        }
        _ => false,
    })
}

/// Finest coarsening of `p` that every step permutes blockwise: meet with
/// generator translates until nothing changes.
pub fn invariant_closure(action: &FiniteAction, p: &Partition) -> Result<Partition, LatticeError> {
    if p.len() != action.points {
        return Err(LatticeError::SizeMismatch {
            expected: action.points,
            found: p.len(),
        });
    }
    let mut current = p.clone();
    loop {
        let mut next = current.clone();
        for (g, _) in &action.steps {
            next = next.meet(&current.translate(g))?;
        }
        if next == current {
            return Ok(current);
        }
        current = next;
    }
}

/// `Σ_g μ(g) Σ_b -log(λ̄(g·b)/λ̄(b)) λ̄(b)` for an invariant partition, where
/// `λ̄` is the pushforward of `λ` to blocks.
pub fn entropy_functional(action: &FiniteAction, space: &FiniteSpace, p: &Partition) -> Result<f64, LatticeError> {
    if p.len() != space.len() || action.points != space.len() {
        return Err(LatticeError::SizeMismatch {
            expected: space.len(),
            found: p.len(),
        });
    }
    if !action.is_invariant(p) {
        return Err(LatticeError::NotInvariant);
    }
    let bar = block_masses(&space.weights, p);
    let mut terms = Vec::new();
    for (g, mu) in &action.steps {
        for (b, block) in p.blocks().iter().enumerate() {
            let image = p.block_of(g[block[0]]);
            terms.push(-mu * (bar[image] / bar[b]).ln() * bar[b]);
        }
    }
    Ok(compensated_sum(terms))
}

/// Check `λ_Q(g·B_Q)/λ_Q(B_Q) = [cond. ratio inside P-blocks] × λ_P(g·B_P)/λ_P(B_P)`
/// at every point, for `Q` refining `P`, both invariant, and step `g`.
pub fn chain_rule_check(
    action: &FiniteAction,
    space: &FiniteSpace,
    coarse: &Partition,
    fine: &Partition,
    step: usize,
) -> Result<bool, LatticeError> {
    if !fine.refines(coarse) {
        return Err(LatticeError::NotNested);
    }
    if !action.is_invariant(coarse) || !action.is_invariant(fine) {
        return Err(LatticeError::NotInvariant);
    }
    let g = &action.steps[step].0;
    let w = &space.weights;
    let fine_mass = block_masses(w, fine);
    let coarse_mass = block_masses(w, coarse);
    for (x, &gx) in g.iter().enumerate() {
        let (q, gq) = (fine.block_of(x), fine.block_of(gx));
        let (p, gp) = (coarse.block_of(x), coarse.block_of(gx));
        let direct = fine_mass[gq] / fine_mass[q];
        let fiber = (fine_mass[gq] / coarse_mass[gp]) / (fine_mass[q] / coarse_mass[p]);
        let base = coarse_mass[gp] / coarse_mass[p];
        if (direct - fiber * base).abs() > 1e-12 * direct.abs().max(1.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainDirection {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub direction: ChainDirection,
    pub limit: Partition,
    /// First index at which the chain equals its limit.
    pub stabilizes_at: usize,
    /// `‖E_n - E_limit‖_HS` per step.
    pub distances: Vec<f64>,
    /// Entropy functional per step, when an action was supplied.
    pub functional: Option<Vec<f64>>,
    pub limit_functional: Option<f64>,
}

impl ChainReport {
    pub fn distances_non_increasing(&self) -> bool {
        self.distances.windows(2).all(|p| p[1] <= p[0] + 1e-12)
    }

    pub fn converges(&self) -> bool {
        self.distances.last().is_some_and(|&d| d.abs() < 1e-12)
    }

    /// Monotone in the chain's direction and ending at the limit's value.
    pub fn functional_consistent(&self) -> bool {
        let (Some(f), Some(lim)) = (&self.functional, self.limit_functional) else {
            return true;
        };
        let monotone = f.windows(2).all(|p| match self.direction {
            ChainDirection::Increasing => p[1] >= p[0] - 1e-12,
            ChainDirection::Decreasing => p[1] <= p[0] + 1e-12,
        });
        monotone && f.last().is_some_and(|&x| (x - lim).abs() < 1e-12)
    }
}

/// Limit of a monotone chain of partitions (join of an increasing chain,
/// meet of a decreasing one) with distances and functional values per step.
pub fn monotone_chain_limit(
    space: &FiniteSpace,
    chain: &[Partition],
    direction: ChainDirection,
    action: Option<&FiniteAction>,
) -> Result<ChainReport, LatticeError> {
    let first = chain.first().ok_or(LatticeError::EmptyChain)?;
    for (i, pair) in chain.windows(2).enumerate() {
        let ok = match direction {
            ChainDirection::Increasing => pair[1].refines(&pair[0]),
            ChainDirection::Decreasing => pair[0].refines(&pair[1]),
        };
        if !ok {
            return Err(LatticeError::NotMonotone(i + 1));
        }
    }
    let mut limit = first.clone();
    for p in &chain[1..] {
        limit = match direction {
            ChainDirection::Increasing => limit.join(p)?,
            ChainDirection::Decreasing => limit.meet(p)?,
        };
    }
    let stabilizes_at = chain.iter().position(|p| *p == limit).unwrap_or(chain.len());
    let e_limit = cond_expect(space, &limit)?;
    let distances = chain
        .iter()
        .map(|p| l2_distance(&cond_expect(space, p)?, &e_limit))
        .collect::<Result<Vec<_>, _>>()?;
    let (functional, limit_functional) = match action {
        Some(a) => (
            Some(
                chain
                    .iter()
                    .map(|p| entropy_functional(a, space, p))
                    .collect::<Result<Vec<_>, _>>()?,
            ),
            Some(entropy_functional(a, space, &limit)?),
        ),
        None => (None, None),
    };
    Ok(ChainReport {
        direction,
        limit,
        stabilizes_at,
        distances,
        functional,
        limit_functional,
    })
}

/// A weight vector with `Σ_g μ(g) g_*λ = λ`, by averaging from the uniform
/// vector.
pub fn solve_stationary(action: &FiniteAction, tol: f64, max_iterations: usize) -> Result<Vec<f64>, LatticeError> {
    let m = action.points;
    let mut lambda = vec![1.0 / m as f64; m];
    for _ in 0..max_iterations {
        let mut next = vec![0.0; m];
        for (g, p) in &action.steps {
            // (g_*λ)(g x) = λ(x)
            for x in 0..m {
                next[g[x]] += p * lambda[x];
            }
        }
        let change: f64 = next.iter().zip(&lambda).map(|(a, b)| (a - b).abs()).sum();
        lambda = next;
        if change <= tol {
            return Ok(lambda);
        }
    }
    Err(LatticeError::NonConvergence(max_iterations))
}

/// Random instances for experiments and property checks.
pub mod sample {
    use rand::seq::SliceRandom;
    use rand::Rng;

    use super::{FiniteAction, FiniteSpace, Partition};

    /// Weights drawn uniformly from `[0.05, 1]`, then normalized.
    pub fn space<R: Rng>(rng: &mut R, m: usize) -> FiniteSpace {
        let raw: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..=1.0)).collect();
        let total: f64 = raw.iter().sum();
        FiniteSpace {
            weights: raw.into_iter().map(|w| w / total).collect(),
        }
    }

    /// Each point gets a label from a random number of labels.
    pub fn partition<R: Rng>(rng: &mut R, m: usize) -> Partition {
        let k = rng.gen_range(1..=m.max(1));
        let labels: Vec<usize> = (0..m).map(|_| rng.gen_range(0..k)).collect();
        Partition::from_labels(&labels)
    }

    pub fn permutation<R: Rng>(rng: &mut R, m: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..m).collect();
        p.shuffle(rng);
        p
    }

    /// Symmetric action of `generators` random permutations.
    pub fn action<R: Rng>(rng: &mut R, m: usize, generators: usize) -> FiniteAction {
        let gens: Vec<Vec<usize>> = (0..generators).map(|_| permutation(rng, m)).collect();
        FiniteAction::symmetric(m, &gens).expect("random permutations are bijections")
    }
}

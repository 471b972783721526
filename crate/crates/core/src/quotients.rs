//! Quotients of `F_d` that can be evaluated exactly.
//!
//! Three kinds of target are supported: finite groups given by their regular
//! permutation action (from Todd–Coxeter coset enumeration, or from the
//! closure of explicit permutations), the abelianization `Z^d`, and the
//! trivial group.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::free_words::{Letter, ReducedWord, WordError};
use crate::group_measures::{Distribution, FreeGroup, Group};

pub const DEFAULT_MAX_COSETS: usize = 1_000_000;

const UNDEFINED: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuotientError {
    #[error("coset limit exceeded: more than {0} cosets")]
    CosetLimitExceeded(usize),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("relator {0} is empty after reduction")]
    EmptyRelator(usize),
    #[error("generator images must be permutations of 0..{points}")]
    NotPermutation { points: usize },
    #[error("expected {expected} generator images, got {found}")]
    GeneratorCount { expected: usize, found: usize },
    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
}

/// An element of a quotient.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuotientElement {
    /// Index of an element of a finite quotient (a coset of the kernel).
    Coset(u32),
    /// Exponent-sum vector in `Z^d`.
    Vector(Vec<i64>),
    Identity,
}

impl fmt::Display for QuotientElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuotientElement::Coset(i) => write!(f, "q{i}"),
            QuotientElement::Vector(v) => {
                let parts: Vec<_> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(","))
            }
            QuotientElement::Identity => f.write_str("e"),
        }
    }
}

/// The regular right action of a finite quotient on itself.
///
/// Element `i` is the coset reached from the base coset `0` by the word
/// `representatives[i]`; the table has one column per letter in key order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermRep {
    rank: u16,
    order: usize,
    table: Vec<u32>,
    representatives: Vec<ReducedWord>,
}

impl PermRep {
    /// Build from a complete coset table whose rows are already in
    /// breadth-first order from coset 0.
    fn from_table(rank: u16, order: usize, table: Vec<u32>) -> Self {
        let width = 2 * rank as usize;
        let mut representatives = vec![None; order];
        representatives[0] = Some(ReducedWord::identity(rank));
        let mut queue = VecDeque::from([0usize]);
        while let Some(q) = queue.pop_front() {
            for key in 0..width {
                let t = table[q * width + key] as usize;
                if representatives[t].is_none() {
                    let mut w = representatives[q].clone().expect("visited");
                    w.push(Letter::from_key(key, rank)).expect("same rank");
                    representatives[t] = Some(w);
                    queue.push_back(t);
                }
            }
        }
        PermRep {
            rank,
            order,
            table,
            representatives: representatives
                .into_iter()
                .map(|w| w.expect("transitive action"))
                .collect(),
        }
    }

    pub fn rank(&self) -> u16 {
        self.rank
    }

    /// Number of elements of the quotient.
    pub fn order(&self) -> usize {
        self.order
    }

    fn width(&self) -> usize {
        2 * self.rank as usize
    }

    /// Image of coset `q` under a single letter.
    pub fn act_letter(&self, q: u32, l: Letter) -> u32 {
        self.table[q as usize * self.width() + l.key()]
    }

    /// Image of coset `q` under a word.
    pub fn act(&self, q: u32, w: &ReducedWord) -> u32 {
        w.letters().iter().fold(q, |c, &l| self.act_letter(c, l))
    }

    /// Shortest word representing element `q`.
    pub fn representative(&self, q: u32) -> &ReducedWord {
        &self.representatives[q as usize]
    }

    /// Permutation of the cosets induced by the given letter.
    pub fn letter_permutation(&self, l: Letter) -> Vec<u32> {
        (0..self.order as u32).map(|q| self.act_letter(q, l)).collect()
    }

    /// Cycle type (sorted cycle lengths) of each generator's permutation.
    pub fn cycle_types(&self) -> Vec<Vec<usize>> {
        (1..=self.rank)
            .map(|g| {
                let perm = self.letter_permutation(Letter::generator(g, self.rank).unwrap());
                cycle_type(&perm)
            })
            .collect()
    }

    fn multiply(&self, a: u32, b: u32) -> u32 {
        self.act(a, self.representative(b))
    }

    fn invert(&self, a: u32) -> u32 {
        self.act(0, &self.representative(a).invert())
    }
}

fn cycle_type(perm: &[u32]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        while !seen[x] {
            seen[x] = true;
            x = perm[x] as usize;
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable();
    lengths
}

/// A homomorphism target for `F_d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuotientRep {
    Perm(PermRep),
    Abelian { rank: u16 },
    Trivial { rank: u16 },
}

impl QuotientRep {
    pub fn rank(&self) -> u16 {
        match self {
            QuotientRep::Perm(p) => p.rank,
            QuotientRep::Abelian { rank } | QuotientRep::Trivial { rank } => *rank,
        }
    }

    pub fn identity(&self) -> QuotientElement {
        match self {
            QuotientRep::Perm(_) => QuotientElement::Coset(0),
            QuotientRep::Abelian { rank } => QuotientElement::Vector(vec![0; *rank as usize]),
            QuotientRep::Trivial { .. } => QuotientElement::Identity,
        }
    }

    /// Order of the quotient, when finite.
    pub fn order(&self) -> Option<usize> {
        match self {
            QuotientRep::Perm(p) => Some(p.order),
            QuotientRep::Abelian { .. } => None,
            QuotientRep::Trivial { .. } => Some(1),
        }
    }

    /// Whether the quotient has a finite-state evaluator.
    pub fn is_finite(&self) -> bool {
        self.order().is_some()
    }

    /// Finite quotients as a coset table; the trivial group is the one-coset
    /// table. `None` for `Z^d`.
    pub fn as_perm(&self) -> Option<PermRep> {
        match self {
            QuotientRep::Perm(p) => Some(p.clone()),
            QuotientRep::Trivial { rank } => {
                let width = 2 * *rank as usize;
                Some(PermRep::from_table(*rank, 1, vec![0; width]))
            }
            QuotientRep::Abelian { .. } => None,
        }
    }

    fn check_rank(&self, rank: u16) -> Result<(), QuotientError> {
        if rank != self.rank() {
            return Err(WordError::RankMismatch {
                expected: self.rank(),
                found: rank,
            }
            .into());
        }
        Ok(())
    }

    /// Image of a word under the quotient map.
    pub fn project(&self, w: &ReducedWord) -> Result<QuotientElement, QuotientError> {
        self.check_rank(w.rank())?;
        Ok(self.project_unchecked(w))
    }

    fn project_unchecked(&self, w: &ReducedWord) -> QuotientElement {
        match self {
            QuotientRep::Perm(p) => QuotientElement::Coset(p.act(0, w)),
            QuotientRep::Abelian { rank } => {
                let mut v = vec![0i64; *rank as usize];
                for l in w.letters() {
                    let i = l.index();
                    v[i.unsigned_abs() as usize - 1] += i.signum() as i64;
                }
                QuotientElement::Vector(v)
            }
            QuotientRep::Trivial { .. } => QuotientElement::Identity,
        }
    }

    pub fn in_kernel(&self, w: &ReducedWord) -> Result<bool, QuotientError> {
        Ok(self.project(w)? == self.identity())
    }

    pub fn multiply(&self, a: &QuotientElement, b: &QuotientElement) -> QuotientElement {
        match (self, a, b) {
            (QuotientRep::Perm(p), QuotientElement::Coset(x), QuotientElement::Coset(y)) => {
                QuotientElement::Coset(p.multiply(*x, *y))
            }
            (QuotientRep::Abelian { .. }, QuotientElement::Vector(x), QuotientElement::Vector(y)) => {
                QuotientElement::Vector(x.iter().zip(y).map(|(s, t)| s + t).collect())
            }
            (QuotientRep::Trivial { .. }, _, _) => QuotientElement::Identity,
            _ => panic!("element does not belong to this quotient"),
        }
    }

    pub fn invert(&self, a: &QuotientElement) -> QuotientElement {
        match (self, a) {
            (QuotientRep::Perm(p), QuotientElement::Coset(x)) => QuotientElement::Coset(p.invert(*x)),
            (QuotientRep::Abelian { .. }, QuotientElement::Vector(x)) => {
                QuotientElement::Vector(x.iter().map(|s| -s).collect())
            }
            (QuotientRep::Trivial { .. }, _) => QuotientElement::Identity,
            _ => panic!("element does not belong to this quotient"),
        }
    }

    /// Push a measure on `F_d` forward to the quotient.
    pub fn pushforward(
        self: &Arc<Self>,
        mu: &Distribution<FreeGroup>,
    ) -> Result<Distribution<Quotient>, QuotientError> {
        self.check_rank(mu.group().rank)?;
        Ok(mu.map_to(Quotient(Arc::clone(self)), |w| self.project_unchecked(w)))
    }
}

/// A quotient viewed as a [`Group`], for distributions on it.
#[derive(Debug, Clone)]
pub struct Quotient(pub Arc<QuotientRep>);

impl PartialEq for Quotient {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Group for Quotient {
    type Element = QuotientElement;

    fn identity(&self) -> QuotientElement {
        self.0.identity()
    }

    fn multiply(&self, a: &QuotientElement, b: &QuotientElement) -> QuotientElement {
        self.0.multiply(a, b)
    }

    fn invert(&self, a: &QuotientElement) -> QuotientElement {
        self.0.invert(a)
    }

    fn label(&self, a: &QuotientElement) -> String {
        a.to_string()
    }
}

/// Nonempty, cyclically reduced relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorList {
    rank: u16,
    relators: Vec<ReducedWord>,
}

impl RelatorList {
    pub fn new(rank: u16, words: Vec<ReducedWord>) -> Result<Self, QuotientError> {
        let mut relators = Vec::with_capacity(words.len());
        for (i, w) in words.into_iter().enumerate() {
            if w.rank() != rank {
                return Err(WordError::RankMismatch {
                    expected: rank,
                    found: w.rank(),
                }
                .into());
            }
            let r = w.cyclically_reduce();
            if r.is_identity() {
                return Err(QuotientError::EmptyRelator(i + 1));
            }
            relators.push(r);
        }
        Ok(RelatorList { rank, relators })
    }

    pub fn parse(rank: u16, literals: &[&str]) -> Result<Self, QuotientError> {
        let words = literals
            .iter()
            .map(|s| ReducedWord::parse(s, rank))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(rank, words)
    }

    pub fn words(&self) -> &[ReducedWord] {
        &self.relators
    }
}

/// HLT coset table with coincidence handling.
struct CosetTable {
    width: usize,
    max_cosets: usize,
    table: Vec<u32>,
    forward: Vec<u32>,
    queue: Vec<u32>,
}

impl CosetTable {
    fn new(rank: u16, max_cosets: usize) -> Self {
        let width = 2 * rank as usize;
        CosetTable {
            width,
            max_cosets,
            table: vec![UNDEFINED; width],
            forward: vec![0],
            queue: Vec::new(),
        }
    }

    fn allocated(&self) -> usize {
        self.forward.len()
    }

    fn get(&self, c: u32, col: usize) -> u32 {
        self.table[c as usize * self.width + col]
    }

    fn set(&mut self, c: u32, col: usize, v: u32) {
        self.table[c as usize * self.width + col] = v;
    }

    fn alive(&self, c: u32) -> bool {
        self.forward[c as usize] == c
    }

    fn define(&mut self, c: u32, col: usize) -> Result<(), QuotientError> {
        if self.allocated() >= self.max_cosets {
            return Err(QuotientError::CosetLimitExceeded(self.max_cosets));
        }
        let new = self.allocated() as u32;
        self.forward.push(new);
        self.table.extend(std::iter::repeat_n(UNDEFINED, self.width));
        self.set(c, col, new);
        self.set(new, col ^ 1, c);
        Ok(())
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut root = c;
        while self.forward[root as usize] != root {
            root = self.forward[root as usize];
        }
        let mut x = c;
        while self.forward[x as usize] != root {
            let next = self.forward[x as usize];
            self.forward[x as usize] = root;
            x = next;
        }
        root
    }

    fn merge(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.rep(a), self.rep(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.forward[hi as usize] = lo;
            self.queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: u32, b: u32) {
        self.queue.clear();
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let dead = self.queue[i];
            i += 1;
            for col in 0..self.width {
                let target = self.get(dead, col);
                if target == UNDEFINED {
                    continue;
                }
                self.set(target, col ^ 1, UNDEFINED);
                let mu = self.rep(dead);
                let nu = self.rep(target);
                let mu_x = self.get(mu, col);
                let nu_xi = self.get(nu, col ^ 1);
                if mu_x != UNDEFINED {
                    self.merge(nu, mu_x);
                } else if nu_xi != UNDEFINED {
                    self.merge(mu, nu_xi);
                } else {
                    self.set(mu, col, nu);
                    self.set(nu, col ^ 1, mu);
                }
            }
        }
    }

    fn scan_and_fill(&mut self, c: u32, word: &[usize]) -> Result<(), QuotientError> {
        let mut f = c;
        let mut b = c;
        let mut i = 0usize;
        let mut j = word.len() as isize - 1;
        loop {
            while (i as isize) <= j && self.get(f, word[i]) != UNDEFINED {
                f = self.get(f, word[i]);
                i += 1;
            }
            if (i as isize) > j {
                if f != b {
                    self.coincidence(f, b);
                }
                return Ok(());
            }
            while j >= i as isize && self.get(b, word[j as usize] ^ 1) != UNDEFINED {
                b = self.get(b, word[j as usize] ^ 1);
                j -= 1;
            }
            if j < i as isize {
                self.coincidence(f, b);
                return Ok(());
            } else if j == i as isize {
                self.set(f, word[i], b);
                self.set(b, word[i] ^ 1, f);
                return Ok(());
            } else {
                self.define(f, word[i])?;
            }
        }
    }

    /// Renumber live cosets breadth-first from coset 0 and drop dead rows.
    fn standardize(&mut self) -> (usize, Vec<u32>) {
        let n = self.allocated();
        let mut label = vec![UNDEFINED; n];
        let mut order = Vec::new();
        label[0] = 0;
        order.push(0u32);
        let mut head = 0;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for col in 0..self.width {
                let t = self.rep(self.get(c, col));
                if label[t as usize] == UNDEFINED {
                    label[t as usize] = order.len() as u32;
                    order.push(t);
                }
            }
        }
        let mut table = Vec::with_capacity(order.len() * self.width);
        for &c in &order {
            for col in 0..self.width {
                let t = self.rep(self.get(c, col));
                table.push(label[t as usize]);
            }
        }
        (order.len(), table)
    }
}

/// Todd–Coxeter enumeration of the cosets of the normal closure of the
/// relators, i.e. the regular action of `F_d / <<R>>`.
///
/// Cosets are processed in creation order and relators in input order; the
/// finished table is renumbered breadth-first, so the output is canonical.
pub fn coset_enumerate(rank: u16, relators: &RelatorList, max_cosets: usize) -> Result<PermRep, QuotientError> {
    if rank < 2 {
        return Err(WordError::RankTooSmall { rank, min: 2 }.into());
    }
    if relators.rank != rank {
        return Err(WordError::RankMismatch {
            expected: rank,
            found: relators.rank,
        }
        .into());
    }
    let words: Vec<Vec<usize>> = relators
        .relators
        .iter()
        .map(|r| r.letters().iter().map(|l| l.key()).collect())
        .collect();
    let mut t = CosetTable::new(rank, max_cosets.max(1));
    let mut c = 0u32;
    while (c as usize) < t.allocated() {
        if t.alive(c) {
            for w in &words {
                t.scan_and_fill(c, w)?;
                if !t.alive(c) {
                    break;
                }
            }
            if t.alive(c) {
                for col in 0..t.width {
                    if t.get(c, col) == UNDEFINED {
                        t.define(c, col)?;
                    }
                }
            }
        }
        c += 1;
    }
    let (order, table) = t.standardize();
    Ok(PermRep::from_table(rank, order, table))
}

/// The regular action of the group generated by explicit permutations of
/// `0..points`, one per generator. `max_order` bounds the closure.
pub fn perm_closure(rank: u16, generators: &[Vec<u32>], max_order: usize) -> Result<PermRep, QuotientError> {
    if generators.len() != rank as usize {
        return Err(QuotientError::GeneratorCount {
            expected: rank as usize,
            found: generators.len(),
        });
    }
    let points = generators.first().map_or(0, |g| g.len());
    let mut letter_perms: Vec<Vec<u32>> = Vec::with_capacity(2 * rank as usize);
    for g in generators {
        if g.len() != points || !is_permutation(g) {
            return Err(QuotientError::NotPermutation { points });
        }
        let mut inv = vec![0u32; points];
        for (x, &y) in g.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        letter_perms.push(g.clone());
        letter_perms.push(inv);
    }
    let width = 2 * rank as usize;
    let identity: Vec<u32> = (0..points as u32).collect();
    let mut index: BTreeMap<Vec<u32>, u32> = BTreeMap::new();
    let mut elements = vec![identity.clone()];
    index.insert(identity, 0);
    let mut table = Vec::new();
    let mut head = 0;
    while head < elements.len() {
        for perm in letter_perms.iter().take(width) {
            // right action: apply the element, then the letter
            let next: Vec<u32> = elements[head].iter().map(|&x| perm[x as usize]).collect();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    if elements.len() >= max_order {
                        return Err(QuotientError::CosetLimitExceeded(max_order));
                    }
                    let id = elements.len() as u32;
                    index.insert(next.clone(), id);
                    elements.push(next);
                    id
                }
            };
            table.push(id);
        }
        head += 1;
    }
    Ok(PermRep::from_table(rank, elements.len(), table))
}

fn is_permutation(p: &[u32]) -> bool {
    let mut seen = vec![false; p.len()];
    for &x in p {
        match seen.get_mut(x as usize) {
            Some(s) if !*s => *s = true,
            _ => return false,
        }
    }
    true
}

/// Parsed form of a quotient description.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuotientSpec {
    Trivial,
    Abelian,
    Relators(RelatorList),
    /// Images of each generator on `points` points (0-based).
    Perm {
        points: usize,
        images: Vec<Vec<u32>>,
    },
}

impl QuotientSpec {
    /// Realize the description; relator lists run coset enumeration.
    pub fn build(&self, rank: u16, max_cosets: usize) -> Result<QuotientRep, QuotientError> {
        match self {
            QuotientSpec::Trivial => Ok(QuotientRep::Trivial { rank }),
            QuotientSpec::Abelian => Ok(QuotientRep::Abelian { rank }),
            QuotientSpec::Relators(r) => Ok(QuotientRep::Perm(coset_enumerate(rank, r, max_cosets)?)),
            QuotientSpec::Perm { images, .. } => Ok(QuotientRep::Perm(perm_closure(rank, images, max_cosets)?)),
        }
    }
}

fn parse_error(position: usize, message: impl Into<String>) -> QuotientError {
    QuotientError::Parse {
        position,
        message: message.into(),
    }
}

/// Parse `trivial`, `abelian`, `relators: w1, w2, ...` or
/// `perm: a=(1 2)(3 4); b=(1 3)`. Error positions are 1-based character
/// offsets into `text`.
pub fn parse_quotient_spec(text: &str, rank: u16) -> Result<QuotientSpec, QuotientError> {
    let trimmed = text.trim();
    let lead = text.len() - text.trim_start().len();
    match trimmed {
        "trivial" => return Ok(QuotientSpec::Trivial),
        "abelian" => return Ok(QuotientSpec::Abelian),
        _ => {}
    }
    let Some(colon) = trimmed.find(':') else {
        return Err(parse_error(lead + 1, format!("unknown directive '{trimmed}'")));
    };
    let directive = trimmed[..colon].trim();
    let body_offset = lead + colon + 1;
    let body = &trimmed[colon + 1..];
    match directive {
        "relators" => parse_relators(body, body_offset, rank).map(QuotientSpec::Relators),
        "perm" => parse_perm(body, body_offset, rank),
        _ => Err(parse_error(lead + 1, format!("unknown directive '{directive}'"))),
    }
}

fn parse_relators(body: &str, offset: usize, rank: u16) -> Result<RelatorList, QuotientError> {
    let mut words = Vec::new();
    if body.trim().is_empty() {
        return RelatorList::new(rank, words);
    }
    let mut start = 0;
    for piece in body.split(',') {
        let lit = piece.trim();
        let lit_pos = offset + start + (piece.len() - piece.trim_start().len());
        if lit.is_empty() {
            return Err(parse_error(offset + start + 1, "empty relator"));
        }
        let w = ReducedWord::parse(lit, rank).map_err(|e| match e {
            WordError::UnknownLetter { ch, position } => {
                parse_error(lit_pos + position, format!("unknown letter '{ch}'"))
            }
            WordError::LetterBeyondRank { ch, position, rank } => {
                parse_error(lit_pos + position, format!("letter '{ch}' exceeds rank {rank}"))
            }
            other => other.into(),
        })?;
        if w.cyclically_reduce().is_identity() {
            return Err(parse_error(
                lit_pos + 1,
                format!("relator '{lit}' reduces to the identity"),
            ));
        }
        words.push(w);
        start += piece.len() + 1;
    }
    RelatorList::new(rank, words)
}

fn parse_perm(body: &str, offset: usize, rank: u16) -> Result<QuotientSpec, QuotientError> {
    // generator -> list of cycles (1-based points), with positions
    let mut cycles: Vec<Option<Vec<Vec<usize>>>> = vec![None; rank as usize];
    let mut max_point = 0usize;
    let mut start = 0;
    for clause in body.split(';') {
        let clause_pos = offset + start;
        start += clause.len() + 1;
        if clause.trim().is_empty() {
            continue;
        }
        let Some(eq) = clause.find('=') else {
            return Err(parse_error(clause_pos + 1, "expected '<letter>=<cycles>'"));
        };
        let name = clause[..eq].trim();
        let name_pos = clause_pos + clause[..eq].find(name).unwrap_or(0) + 1;
        let mut chars = name.chars();
        let (Some(ch), None) = (chars.next(), chars.next()) else {
            return Err(parse_error(
                name_pos,
                format!("expected a single generator letter, got '{name}'"),
            ));
        };
        if !ch.is_ascii_lowercase() {
            return Err(parse_error(name_pos, format!("unknown letter '{ch}'")));
        }
        let g = (ch as u8 - b'a') as usize;
        if g >= rank as usize {
            return Err(parse_error(name_pos, format!("letter '{ch}' exceeds rank {rank}")));
        }
        if cycles[g].is_some() {
            return Err(parse_error(name_pos, format!("generator '{ch}' given twice")));
        }
        let parsed = parse_cycles(&clause[eq + 1..], clause_pos + eq + 1)?;
        for c in &parsed {
            max_point = max_point.max(c.iter().copied().max().unwrap_or(0));
        }
        cycles[g] = Some(parsed);
    }
    if max_point == 0 {
        return Err(parse_error(offset + 1, "no points given"));
    }
    let mut images = Vec::with_capacity(rank as usize);
    for c in cycles {
        let mut perm: Vec<u32> = (0..max_point as u32).collect();
        for cycle in c.unwrap_or_default() {
            for (i, &p) in cycle.iter().enumerate() {
                let next = cycle[(i + 1) % cycle.len()];
                perm[p - 1] = (next - 1) as u32;
            }
        }
        images.push(perm);
    }
    Ok(QuotientSpec::Perm {
        points: max_point,
        images,
    })
}

/// The permutation of `0..points` written in 1-based disjoint-cycle
/// notation, e.g. `(1 2)(3 4)`; `()` or an empty string is the identity.
pub fn parse_permutation(text: &str, points: usize) -> Result<Vec<usize>, QuotientError> {
    let mut perm: Vec<usize> = (0..points).collect();
    if text.trim().is_empty() || text.trim() == "()" {
        return Ok(perm);
    }
    for cycle in parse_cycles(text, 0)? {
        for (i, &p) in cycle.iter().enumerate() {
            if p > points {
                return Err(QuotientError::NotPermutation { points });
            }
            perm[p - 1] = cycle[(i + 1) % cycle.len()] - 1;
        }
    }
    Ok(perm)
}

/// Disjoint-cycle notation such as `(1 2)(3 4)`; returns 1-based cycles.
fn parse_cycles(text: &str, offset: usize) -> Result<Vec<Vec<usize>>, QuotientError> {
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut used = std::collections::BTreeSet::new();
    let mut current: Option<Vec<usize>> = None;
    let mut number: Option<(usize, usize)> = None;
    let chars: Vec<char> = text.chars().collect();
    let flush = |number: &mut Option<(usize, usize)>,
                 current: &mut Option<Vec<usize>>,
                 used: &mut std::collections::BTreeSet<usize>|
     -> Result<(), QuotientError> {
        if let Some((value, pos)) = number.take() {
            if value == 0 {
                return Err(parse_error(pos, "points are numbered from 1"));
            }
            if !used.insert(value) {
                return Err(parse_error(pos, format!("point {value} repeated")));
            }
            current.as_mut().expect("inside cycle").push(value);
        }
        Ok(())
    };
    for (i, &ch) in chars.iter().enumerate() {
        let pos = offset + i + 1;
        match ch {
            '(' => {
                if current.is_some() {
                    return Err(parse_error(pos, "nested '('"));
                }
                current = Some(Vec::new());
            }
            ')' => {
                if current.is_none() {
                    return Err(parse_error(pos, "unmatched ')'"));
                }
                flush(&mut number, &mut current, &mut used)?;
                let c = current.take().expect("checked");
                if c.is_empty() {
                    return Err(parse_error(pos, "empty cycle"));
                }
                cycles.push(c);
            }
            '0'..='9' => {
                if current.is_none() {
                    return Err(parse_error(pos, "point outside of a cycle"));
                }
                let digit = ch as usize - '0' as usize;
                number = Some(match number {
                    Some((v, p)) => (v * 10 + digit, p),
                    None => (digit, pos),
                });
            }
            c if c.is_whitespace() || c == ',' => {
                if current.is_some() {
                    flush(&mut number, &mut current, &mut used)?;
                }
            }
            other => return Err(parse_error(pos, format!("unexpected character '{other}'"))),
        }
    }
    if current.is_some() {
        return Err(parse_error(offset + chars.len(), "unclosed '('"));
    }
    Ok(cycles)
}

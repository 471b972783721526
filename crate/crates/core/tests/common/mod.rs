#![allow(dead_code)]

use gwel::{Letter, ReducedWord};
use rand::Rng;

pub fn random_letters<R: Rng>(rng: &mut R, rank: u16, len: usize) -> Vec<Letter> {
    (0..len)
        .map(|_| Letter::from_key(rng.gen_range(0..2 * rank as usize), rank))
        .collect()
}

/// A uniformly chosen reduced word of exactly `len` letters.
pub fn random_word<R: Rng>(rng: &mut R, rank: u16, len: usize) -> ReducedWord {
    let mut w = ReducedWord::identity(rank);
    while w.len() < len {
        let l = Letter::from_key(rng.gen_range(0..2 * rank as usize), rank);
        if w.last() != Some(l.inverse()) {
            w.push(l).unwrap();
        }
    }
    w
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

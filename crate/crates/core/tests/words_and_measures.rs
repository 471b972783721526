mod common;

use common::{close, random_letters, random_word};
use gwel::free_words::{reduce, sphere, sphere_size};
use gwel::rng::stream;
use gwel::{srw, Letter, ReducedWord};
use proptest::prelude::*;

/// Pass-based cancellation, independent of the stack implementation.
fn naive_reduce(letters: &[Letter]) -> Vec<Letter> {
    let mut v = letters.to_vec();
    loop {
        let hit = v.windows(2).position(|p| p[0].index() == -p[1].index());
        match hit {
            Some(i) => {
                v.drain(i..i + 2);
            }
            None => return v,
        }
    }
}

fn all_sequences(rank: u16, len: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|s| {
                Letter::all(rank).map(move |l| {
                    let mut t = s.clone();
                    t.push(l);
                    t
                })
            })
            .collect();
    }
    out
}

#[test]
fn reduce_matches_naive_exhaustively() {
    for rank in 1..=2u16 {
        for len in 0..=6 {
            for seq in all_sequences(rank, len) {
                let w = reduce(rank, &seq).unwrap();
                assert_eq!(w.letters(), naive_reduce(&seq).as_slice());
                assert_eq!(reduce(rank, w.letters()).unwrap(), w);
            }
        }
    }
}

proptest! {
    #[test]
    fn reduce_is_idempotent(rank in 1u16..=3, seed in any::<u64>(), len in 0usize..=10) {
        let seq = random_letters(&mut stream(seed, 0), rank, len);
        let w = reduce(rank, &seq).unwrap();
        prop_assert_eq!(reduce(rank, w.letters()).unwrap(), w.clone());
        prop_assert_eq!(w.letters().to_vec(), naive_reduce(&seq));
    }

    #[test]
    fn inverse_cancels(rank in 1u16..=3, seed in any::<u64>(), len in 0usize..=12) {
        let w = random_word(&mut stream(seed, 1), rank, len);
        prop_assert!(w.multiply(&w.invert()).unwrap().is_identity());
        prop_assert_eq!(w.invert().len(), w.len());
        prop_assert_eq!(w.invert().invert(), w);
    }

    #[test]
    fn literal_round_trips(rank in 1u16..=3, seed in any::<u64>(), len in 0usize..=8) {
        let w = random_word(&mut stream(seed, 2), rank, len);
        prop_assert_eq!(ReducedWord::parse(&w.literal(), rank).unwrap(), w);
    }
}

#[test]
fn multiplication_is_associative() {
    let mut rng = stream(11, 0);
    for i in 0..10_000 {
        let rank = 2 + (i % 2) as u16;
        let lens: Vec<usize> = (0..3).map(|_| rand::Rng::gen_range(&mut rng, 0..=8)).collect();
        let a = random_word(&mut rng, rank, lens[0]);
        let b = random_word(&mut rng, rank, lens[1]);
        let c = random_word(&mut rng, rank, lens[2]);
        let left = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let right = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        assert_eq!(left, right);
        let ab = a.multiply(&b).unwrap();
        assert!(ab.len() >= a.len().abs_diff(b.len()) && ab.len() <= a.len() + b.len());
    }
}

#[test]
fn sphere_cardinalities() {
    for rank in [2u16, 3] {
        for n in 0..=8usize {
            let closed: u64 = if n == 0 {
                1
            } else {
                2 * rank as u64 * (2 * rank as u64 - 1).pow(n as u32 - 1)
            };
            let s = sphere(rank, n).unwrap();
            assert_eq!(s.cardinality(), closed.into());
            assert_eq!(sphere_size(rank, n), closed.into());
            let mut seen = 0u64;
            let mut prev: Option<ReducedWord> = None;
            for w in s {
                assert_eq!(w.len(), n);
                if let Some(p) = &prev {
                    assert!(p < &w);
                }
                prev = Some(w);
                seen += 1;
            }
            assert_eq!(seen, closed);
        }
    }
}

#[test]
fn entropy_is_subadditive() {
    let powers = srw(2).unwrap().powers(8);
    let h: Vec<f64> = powers.iter().map(|p| p.shannon_entropy()).collect();
    for n in 0..=8 {
        for m in 0..=8 - n {
            assert!(h[n + m] <= h[n] + h[m] + 1e-12, "n={n} m={m}");
        }
    }
}

#[test]
fn convolution_conserves_mass() {
    for rank in 2..=3u16 {
        for p in srw(rank).unwrap().powers(8) {
            assert!(close(p.total_mass(), 1.0, 1e-12));
        }
    }
}

#[test]
fn symmetric_walk_is_symmetric() {
    for p in srw(2).unwrap().powers(5) {
        for (w, m) in p.iter() {
            assert!(close(p.mass(&w.invert()), m, 1e-15 * m.max(1.0)), "{w}");
        }
    }
}

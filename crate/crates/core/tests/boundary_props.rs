mod common;

use common::{close, random_word};
use gwel::boundary_calc::{
    boundary_entropy, boundary_entropy_exact, cocycle_check, cylinder_mass, kl_coefficient, proximality_sim,
    pushed_prefix_mass_exact, rn_exponent, rn_integral, rn_sup, srw_exact,
};
use gwel::entropy_lab::exact_free_entropy;
use gwel::free_words::sphere;
use gwel::rng::stream;
use gwel::{srw, Letter, ReducedWord};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use rand::Rng;

fn words_up_to(rank: u16, n: usize) -> Vec<ReducedWord> {
    (0..=n).flat_map(|k| sphere(rank, k).unwrap()).collect()
}

/// `(gν)(C_v)` by counting depth-`|g|+|v|` cylinders `C_u` with `g u`
/// starting with `v`; the hitting measure is uniform on each sphere.
fn brute_pushed_mass(rank: u16, g: &ReducedWord, v: &ReducedWord) -> BigRational {
    let depth = g.len() + v.len();
    let mut hits = 0u64;
    let mut total = 0u64;
    for u in sphere(rank, depth).unwrap() {
        total += 1;
        if g.multiply(&u).unwrap().starts_with(v) {
            hits += 1;
        }
    }
    BigRational::new(BigInt::from(hits), BigInt::from(total))
}

fn nu_exact(rank: u16, w: &ReducedWord) -> BigRational {
    let q = BigInt::from(2 * rank as i64 - 1);
    BigRational::new(BigInt::one(), BigInt::from(2 * rank as i64) * q.pow(w.len() as u32 - 1))
}

#[test]
fn rn_derivative_matches_brute_cylinder_masses() {
    for rank in 2..=3u16 {
        let q = BigRational::from_integer(BigInt::from(2 * rank as i64 - 1));
        for g in words_up_to(rank, 2) {
            for w in sphere(rank, g.len() + 1).unwrap() {
                let e = rn_exponent(&g, &w).unwrap();
                let rn = q.pow(e as i32);
                assert_eq!(&rn * nu_exact(rank, &w), brute_pushed_mass(rank, &g, &w), "{g} {w}");
            }
        }
    }
}

#[test]
fn rn_sup_is_below_m_bound() {
    let mu = srw(2).unwrap();
    for g in words_up_to(2, 6) {
        let sup = rn_sup(2, &g).unwrap();
        assert_eq!(sup, 3f64.powi(g.len() as i32));
        let m = mu.rn_bound(&g, 6).unwrap();
        assert!(sup <= m, "{g}: {sup} > {m}");
    }
}

#[test]
fn rn_integrates_to_one() {
    for g in words_up_to(2, 5) {
        assert!(rn_integral(2, &g).unwrap().is_one(), "{g}");
    }
    for g in words_up_to(3, 3) {
        assert!(rn_integral(3, &g).unwrap().is_one(), "{g}");
    }
}

#[test]
fn cocycle_identity_on_random_triples() {
    let mut rng = stream(31, 0);
    for _ in 0..10_000 {
        let rank = rng.gen_range(2..=4u16);
        let (lg, lh) = (rng.gen_range(0..=5), rng.gen_range(0..=5));
        let g = random_word(&mut rng, rank, lg);
        let h = random_word(&mut rng, rank, lh);
        let extra = rng.gen_range(1..=4);
        let w = random_word(&mut rng, rank, g.len() + h.len() + extra);
        assert!(cocycle_check(&g, &h, &w).unwrap(), "{g} {h} {w}");
    }
}

#[test]
fn per_generator_kl_coefficient() {
    for rank in 2..=5u16 {
        let expected = BigRational::new(BigInt::from(rank - 1), BigInt::from(rank));
        for l in Letter::all(rank) {
            let s = ReducedWord::from_letter(l);
            for depth in [2, 3] {
                assert_eq!(kl_coefficient(rank, &s, depth).unwrap(), expected);
            }
        }
    }
}

#[test]
fn boundary_entropy_matches_closed_form() {
    for rank in 2..=5u16 {
        let h = boundary_entropy(&srw(rank).unwrap()).unwrap();
        assert!(close(h.value, exact_free_entropy(rank), 1e-12));
        let exact = boundary_entropy_exact(rank, &srw_exact(rank)).unwrap();
        assert_eq!(
            exact.coefficient.unwrap(),
            BigRational::new(BigInt::from(rank - 1), BigInt::from(rank))
        );
    }
}

/// The same entropy from brute cylinder counts only.
#[test]
fn boundary_entropy_matches_brute_kl() {
    let rank = 2;
    let mut h = 0.0;
    for l in Letter::all(rank) {
        let ginv = ReducedWord::from_letter(l.inverse());
        for w in sphere(rank, 2).unwrap() {
            let pushed = brute_pushed_mass(rank, &ginv, &w).to_f64().unwrap();
            let nu = cylinder_mass(rank, &w).unwrap();
            h += 0.25 * nu * -(pushed / nu).ln();
        }
    }
    assert!(close(h, exact_free_entropy(2), 1e-12));
}

#[test]
fn pushed_prefix_mass_matches_brute() {
    let mut rng = stream(32, 0);
    for _ in 0..60 {
        let rank = rng.gen_range(2..=3u16);
        let len = rng.gen_range(1..=5);
        let w = random_word(&mut rng, rank, len);
        let k = rng.gen_range(1..=len);
        let exact = pushed_prefix_mass_exact(rank, &w, k).unwrap();
        assert_eq!(exact, brute_pushed_mass(rank, &w, &w.prefix(k)), "{w} k={k}");
    }
}

#[test]
fn proximality_rows_respect_lower_bound() {
    let report = proximality_sim(2, 30, 2, 5, 200).unwrap();
    for row in &report.rows {
        if let (Some(m), Some(lb)) = (row.pushed_mass, row.lower_bound) {
            assert!(m >= lb);
        }
    }
    assert_eq!(report, proximality_sim(2, 30, 2, 5, 200).unwrap());
}

mod common;

use std::sync::Arc;

use common::{close, random_word};
use gwel::quotients::{coset_enumerate, parse_quotient_spec, RelatorList, DEFAULT_MAX_COSETS};
use gwel::rng::stream;
use gwel::{srw, Distribution, Group, QuotientRep, ReducedWord};
use rand::seq::SliceRandom;
use rand::Rng;

const SPECS: &[&str] = &[
    "trivial",
    "abelian",
    "relators: aa, bb, abAB",
    "relators: aa, bbb, abab",
    "relators: aaaaa, bbb, abAB",
    "perm: a=(1 2); b=(1 2 3)",
    "perm: a=(1 2 3 4 5); b=(1 2)",
];

fn build(spec: &str) -> Arc<QuotientRep> {
    Arc::new(
        parse_quotient_spec(spec, 2)
            .unwrap()
            .build(2, DEFAULT_MAX_COSETS)
            .unwrap(),
    )
}

#[test]
fn shipped_orders() {
    let orders: Vec<Option<usize>> = SPECS.iter().map(|s| build(s).order()).collect();
    assert_eq!(
        orders,
        vec![Some(1), None, Some(4), Some(6), Some(15), Some(6), Some(120)]
    );
}

#[test]
fn projection_is_a_homomorphism() {
    for (k, spec) in SPECS.iter().enumerate() {
        let rep = build(spec);
        let mut rng = stream(21, k as u64);
        for _ in 0..10_000 {
            let (lu, lv) = (rng.gen_range(0..=10), rng.gen_range(0..=10));
            let u = random_word(&mut rng, 2, lu);
            let v = random_word(&mut rng, 2, lv);
            let uv = rep.project(&u.multiply(&v).unwrap()).unwrap();
            let (pu, pv) = (rep.project(&u).unwrap(), rep.project(&v).unwrap());
            assert_eq!(uv, rep.multiply(&pu, &pv), "{spec}: {u} {v}");
            assert_eq!(rep.project(&u.invert()).unwrap(), rep.invert(&pu));
        }
    }
}

/// Apply explicit point images letter by letter.
fn act_points(images: &[Vec<usize>], w: &ReducedWord, x: usize) -> usize {
    w.letters().iter().fold(x, |x, l| {
        let perm = &images[l.index().unsigned_abs() as usize - 1];
        if l.index() > 0 {
            perm[x]
        } else {
            perm.iter().position(|&y| y == x).unwrap()
        }
    })
}

#[test]
fn kernel_matches_explicit_permutations() {
    let images = vec![vec![1, 2, 3, 4, 0], vec![1, 0, 2, 3, 4]];
    let rep = build("perm: a=(1 2 3 4 5); b=(1 2)");
    let mut rng = stream(22, 0);
    let mut hits = 0;
    for _ in 0..10_000 {
        let len = 2 * rng.gen_range(0..=6);
        let w = random_word(&mut rng, 2, len);
        let trivial = (0..5).all(|x| act_points(&images, &w, x) == x);
        assert_eq!(rep.in_kernel(&w).unwrap(), trivial, "{w}");
        hits += trivial as usize;
    }
    for r in ["aaaaa", "bb", "abababab", "abbA"] {
        let w = ReducedWord::parse(r, 2).unwrap();
        assert!((0..5).all(|x| act_points(&images, &w, x) == x));
        assert!(rep.in_kernel(&w).unwrap(), "{r}");
    }
    assert!(hits > 0);
}

#[test]
fn enumeration_ignores_relator_order() {
    let cases: &[&[&str]] = &[
        &["aa", "bb", "abAB"],
        &["aa", "bbb", "abab"],
        &["aaaaa", "bbb", "abAB"],
        &["aaa", "bbb", "abab"],
    ];
    let mut rng = stream(23, 0);
    for rels in cases {
        let base = coset_enumerate(2, &RelatorList::parse(2, rels).unwrap(), DEFAULT_MAX_COSETS).unwrap();
        let mut types = base.cycle_types();
        types.sort();
        for _ in 0..6 {
            let mut shuffled = rels.to_vec();
            shuffled.shuffle(&mut rng);
            let rep = coset_enumerate(2, &RelatorList::parse(2, &shuffled).unwrap(), DEFAULT_MAX_COSETS).unwrap();
            assert_eq!(rep.order(), base.order(), "{shuffled:?}");
            let mut t = rep.cycle_types();
            t.sort();
            assert_eq!(t, types);
        }
    }
}

#[test]
fn relators_act_trivially_on_every_coset() {
    for spec in &SPECS[2..5] {
        let rep = build(spec);
        let perm = rep.as_perm().unwrap();
        let text = spec.trim_start_matches("relators:");
        for r in text.split(',') {
            let w = ReducedWord::parse(r.trim(), 2).unwrap();
            for q in 0..perm.order() as u32 {
                assert_eq!(perm.act(q, &w), q);
            }
        }
    }
}

#[test]
fn pushforward_commutes_with_convolution() {
    let mu = srw(2).unwrap();
    let mu2 = mu.convolve(&mu).unwrap();
    let skew = Distribution::new(
        *mu.group(),
        [("a", 0.5), ("B", 0.25), ("ab", 0.125), ("", 0.125)]
            .iter()
            .map(|(w, p)| (ReducedWord::parse(w, 2).unwrap(), *p)),
    )
    .unwrap();
    for spec in SPECS {
        let rep = build(spec);
        for (a, b) in [(&mu, &mu2), (&skew, &mu), (&mu2, &skew)] {
            let lhs = rep.pushforward(&a.convolve(b).unwrap()).unwrap();
            let rhs = rep
                .pushforward(a)
                .unwrap()
                .convolve(&rep.pushforward(b).unwrap())
                .unwrap();
            assert!(close(lhs.total_mass(), 1.0, 1e-12));
            let lk: Vec<_> = lhs.iter().map(|(g, _)| g.clone()).collect();
            let rk: Vec<_> = rhs.iter().map(|(g, _)| g.clone()).collect();
            assert_eq!(lk, rk, "{spec}");
            for (g, m) in lhs.iter() {
                assert!(close(m, rhs.mass(g), 1e-12), "{spec} {}", lhs.group().label(g));
            }
        }
    }
}

mod common;

use common::close;
use gwel::rng::stream;
use gwel::sigma_lattice::{
    chain_rule_check, cond_expect, entropy_functional, invariant_closure, l2_distance, monotone_chain_limit, sample,
    solve_stationary, ChainDirection, FiniteAction, FiniteSpace, Partition,
};
use rand::Rng;

/// Every set partition of `0..m`, as restricted-growth label strings.
fn all_partitions(m: usize) -> Vec<Partition> {
    fn grow(prefix: &mut Vec<usize>, m: usize, out: &mut Vec<Partition>) {
        if prefix.len() == m {
            out.push(Partition::from_labels(prefix));
            return;
        }
        let next = prefix.iter().max().map_or(0, |&x| x + 1);
        for label in 0..=next {
            prefix.push(label);
            grow(prefix, m, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), m, &mut out);
    out
}

/// `x` and `y` share a block of `p`.
fn together(p: &Partition, x: usize, y: usize) -> bool {
    p.block_of(x) == p.block_of(y)
}

/// Refinement by pairwise co-membership, independent of `Partition::refines`.
fn finer(fine: &Partition, coarse: &Partition) -> bool {
    (0..fine.len()).all(|x| (0..fine.len()).all(|y| !together(fine, x, y) || together(coarse, x, y)))
}

#[test]
fn join_and_meet_match_brute_force_lattice() {
    let bell = [1, 1, 2, 5, 15, 52];
    for (m, &count) in bell.iter().enumerate().skip(1) {
        let all = all_partitions(m);
        assert_eq!(all.len(), count);
        for p in &all {
            for q in &all {
                let lower: Vec<&Partition> = all.iter().filter(|r| finer(r, p) && finer(r, q)).collect();
                let join = lower.iter().find(|r| lower.iter().all(|s| finer(s, r))).unwrap();
                let upper: Vec<&Partition> = all.iter().filter(|r| finer(p, r) && finer(q, r)).collect();
                let meet = upper.iter().find(|r| upper.iter().all(|s| finer(r, s))).unwrap();
                assert_eq!(&p.join(q).unwrap(), *join);
                assert_eq!(&p.meet(q).unwrap(), *meet);
                assert_eq!(p.refines(q), finer(p, q));
            }
        }
    }
}

fn random_function<R: Rng>(rng: &mut R, m: usize) -> Vec<f64> {
    (0..m).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

#[test]
fn conditional_expectations_are_contractive_projections() {
    let mut rng = stream(41, 0);
    for _ in 0..1000 {
        let m = rng.gen_range(1..=8);
        let space = sample::space(&mut rng, m);
        let p = sample::partition(&mut rng, m);
        let e = cond_expect(&space, &p).unwrap();
        let f = random_function(&mut rng, m);
        let g = random_function(&mut rng, m);
        let ef = e.apply(&f);
        for (a, b) in e.apply(&ef).iter().zip(&ef) {
            assert!(close(*a, *b, 1e-12));
        }
        assert!(close(space.inner(&ef, &g), space.inner(&f, &e.apply(&g)), 1e-12));
        assert!(space.norm(&ef, 2.0) <= space.norm(&f, 2.0) + 1e-12);
        assert!(space.norm(&ef, 1.0) <= space.norm(&f, 1.0) + 1e-12);
        assert!(space.norm(&f, 1.0) <= space.norm(&f, 2.0) + 1e-12);
        assert!(e.apply(&vec![1.0; m]).iter().all(|&x| close(x, 1.0, 1e-12)));
    }
}

#[test]
fn l2_distance_is_a_metric() {
    let mut rng = stream(42, 0);
    for _ in 0..1000 {
        let m = rng.gen_range(1..=7);
        let space = sample::space(&mut rng, m);
        let ps: Vec<Partition> = (0..3).map(|_| sample::partition(&mut rng, m)).collect();
        let es: Vec<_> = ps.iter().map(|p| cond_expect(&space, p).unwrap()).collect();
        let d = |i: usize, j: usize| l2_distance(&es[i], &es[j]).unwrap();
        assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-12);
        assert!(close(d(0, 1), d(1, 0), 1e-12));
        assert_eq!(d(0, 1) < 1e-9, ps[0] == ps[1]);
        if ps[0].refines(&ps[1]) {
            let blocks = (ps[0].block_count() - ps[1].block_count()) as f64;
            assert!(close(d(0, 1), blocks.sqrt(), 1e-9));
        }
    }
}

/// A random nested pair of invariant partitions, coarse first.
fn nested_invariant_pair<R: Rng>(rng: &mut R, action: &FiniteAction) -> (Partition, Partition) {
    let m = action.points();
    let fine = if rng.gen_bool(0.3) {
        Partition::discrete(m)
    } else {
        invariant_closure(action, &sample::partition(rng, m)).unwrap()
    };
    let other = sample::partition(rng, m);
    let coarse = invariant_closure(action, &fine.meet(&other).unwrap()).unwrap();
    (coarse, fine)
}

#[test]
fn entropy_functional_satisfies_data_processing() {
    let mut rng = stream(43, 0);
    let mut strict = 0;
    for _ in 0..1000 {
        let m = rng.gen_range(2..=7);
        let gens = rng.gen_range(1..=2);
        let action = sample::action(&mut rng, m, gens);
        let space = sample::space(&mut rng, m);
        let (coarse, fine) = nested_invariant_pair(&mut rng, &action);
        assert!(action.is_invariant(&coarse) && action.is_invariant(&fine) && fine.refines(&coarse));
        let hc = entropy_functional(&action, &space, &coarse).unwrap();
        let hf = entropy_functional(&action, &space, &fine).unwrap();
        assert!(hc >= -1e-12 && hc <= hf + 1e-12, "{hc} > {hf}");
        strict += (hf > hc + 1e-9) as usize;
        for step in 0..action.steps().len() {
            assert!(chain_rule_check(&action, &space, &coarse, &fine, step).unwrap());
        }
    }
    assert!(strict > 100);
}

/// Per-step KL against the independent form `Σ_g μ(g) KL(λ̄ ‖ g⁻¹λ̄)`.
#[test]
fn entropy_functional_is_averaged_kl() {
    let mut rng = stream(44, 0);
    for _ in 0..200 {
        let m = rng.gen_range(2..=6);
        let action = sample::action(&mut rng, m, 1);
        let space = sample::space(&mut rng, m);
        let p = Partition::discrete(m);
        let mut expected = 0.0;
        for (g, mu) in action.steps() {
            // (g⁻¹λ)(x) = λ(g x)
            let pulled: Vec<f64> = (0..m).map(|x| space.weights()[g[x]]).collect();
            let kl: f64 = (0..m)
                .map(|x| space.weights()[x] * (space.weights()[x] / pulled[x]).ln())
                .sum();
            expected += mu * kl;
        }
        assert!(close(entropy_functional(&action, &space, &p).unwrap(), expected, 1e-12));
    }
}

#[test]
fn monotone_chains_converge() {
    let mut rng = stream(45, 0);
    for _ in 0..300 {
        let m = rng.gen_range(2..=7);
        let gens = rng.gen_range(1..=2);
        let action = sample::action(&mut rng, m, gens);
        let space = sample::space(&mut rng, m);
        let len = rng.gen_range(1..=6);
        let mut up = vec![invariant_closure(&action, &sample::partition(&mut rng, m)).unwrap()];
        let mut down = up.clone();
        for _ in 1..len {
            let r = invariant_closure(&action, &sample::partition(&mut rng, m)).unwrap();
            up.push(up.last().unwrap().join(&r).unwrap());
            let s = invariant_closure(&action, &sample::partition(&mut rng, m)).unwrap();
            down.push(down.last().unwrap().meet(&s).unwrap());
        }
        for (chain, dir) in [(&up, ChainDirection::Increasing), (&down, ChainDirection::Decreasing)] {
            let r = monotone_chain_limit(&space, chain, dir, Some(&action)).unwrap();
            assert!(r.distances_non_increasing() && r.converges());
            assert!(r.functional_consistent());
            assert_eq!(&r.limit, chain.last().unwrap());
        }
    }
}

#[test]
fn stationary_weights_kill_the_functional() {
    let mut rng = stream(46, 0);
    for _ in 0..200 {
        let m = rng.gen_range(2..=7);
        let gens = rng.gen_range(1..=2);
        let action = sample::action(&mut rng, m, gens);
        let lambda = solve_stationary(&action, 1e-14, 10_000).unwrap();
        let space = FiniteSpace::new(lambda).unwrap();
        let p = invariant_closure(&action, &sample::partition(&mut rng, m)).unwrap();
        assert!(entropy_functional(&action, &space, &p).unwrap().abs() < 1e-12);
    }
}

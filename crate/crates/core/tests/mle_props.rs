use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zkspeed_core::fp::{Fe, Field, OpCounter};
use zkspeed_core::mle::{
    build_eq, evaluate, evaluate_via_eq, fix_variable, product_tree, stream_dfs, MleTable, TreePattern,
};

fn f() -> Field {
    Field::bls12_381_scalar()
}

fn random_vec(f: &Field, rng: &mut ChaCha8Rng, n: usize) -> Vec<Fe> {
    (0..n).map(|_| f.random(rng)).collect()
}

fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// Checks every pattern of `stream_dfs` against its layer-by-layer oracle.
fn check_stream(f: &Field, rng: &mut ChaCha8Rng, n: usize, p: usize) {
    let leaves = random_vec(f, rng, n);
    let tree = product_tree(f, &leaves).unwrap();

    let out = stream_dfs(f, TreePattern::Reduce, leaves.clone(), n, p).unwrap();
    assert_eq!(out.items.len(), 1);
    assert_eq!(out.items[0].value, tree.last().unwrap()[0]);
    assert_eq!(out.stats.modmuls, n as u64 - 1);
    assert!(out.stats.max_working_set <= p + 2 * log2(n), "n={n} p={p}");

    let out = stream_dfs(f, TreePattern::Product, leaves, n, p).unwrap();
    let mut got: Vec<(usize, usize, Fe)> = out.items.iter().map(|l| (l.layer, l.index, l.value)).collect();
    got.sort_by_key(|x| (x.0, x.1));
    let want: Vec<(usize, usize, Fe)> = tree
        .iter()
        .enumerate()
        .flat_map(|(k, layer)| layer.iter().enumerate().map(move |(i, v)| (k + 1, i, *v)))
        .collect();
    assert_eq!(got, want);
    assert!(out.stats.max_working_set <= p + 2 * log2(n));

    let mu = log2(n);
    let r = random_vec(f, rng, mu);
    let out = stream_dfs(f, TreePattern::Forward, r.clone(), mu, p).unwrap();
    let vals: Vec<Fe> = out.items.iter().map(|l| l.value).collect();
    assert_eq!(vals, build_eq(f, &r).unwrap().into_entries());
    assert!(out.stats.max_working_set <= p + 2 * mu);
}

#[test]
fn stream_matches_bfs_exhaustive_small() {
    let f = f();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for mu in 1..=6 {
        let n = 1usize << mu;
        let mut p = 1;
        while p <= n {
            check_stream(&f, &mut rng, n, p);
            p *= 2;
        }
    }
}

#[test]
fn stream_matches_bfs_large() {
    let f = f();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (mu, p) in [(10, 4), (12, 16), (16, 8)] {
        check_stream(&f, &mut rng, 1 << mu, p);
    }
}

#[test]
fn build_eq_count_is_exact() {
    let f = f();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for mu in 2..=16usize {
        let c = OpCounter::new();
        let r = random_vec(&f, &mut rng, mu);
        build_eq(&f.with_counter(&c), &r).unwrap();
        assert_eq!(c.get(), (1u64 << (mu + 1)) - 4, "mu={mu}");
    }
}

#[test]
fn evaluate_at_corners_is_lookup() {
    let f = f();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for mu in 1..=6usize {
        let t = MleTable::new(random_vec(&f, &mut rng, 1 << mu)).unwrap();
        for i in 0..1usize << mu {
            let x: Vec<Fe> = (0..mu)
                .map(|j| if (i >> j) & 1 == 1 { f.one() } else { f.zero() })
                .collect();
            assert_eq!(evaluate(&f, &t, &x).unwrap(), t.get(i));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eq_entries_sum_to_one(seed in any::<u64>(), mu in 1usize..=12) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eq = build_eq(&f, &random_vec(&f, &mut rng, mu)).unwrap();
        let s = eq.entries().iter().fold(f.zero(), |a, b| f.add(&a, b));
        prop_assert_eq!(s, f.one());
    }

    #[test]
    fn eq_is_symmetric(seed in any::<u64>(), mu in 1usize..=8) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_vec(&f, &mut rng, mu);
        let s = random_vec(&f, &mut rng, mu);
        let a = evaluate(&f, &build_eq(&f, &r).unwrap(), &s).unwrap();
        let b = evaluate(&f, &build_eq(&f, &s).unwrap(), &r).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn fix_variable_commutes_with_evaluate(seed in any::<u64>(), mu in 1usize..=8) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = MleTable::new(random_vec(&f, &mut rng, 1 << mu)).unwrap();
        let point = random_vec(&f, &mut rng, mu);
        let folded = fix_variable(&f, &t, &point[0]).unwrap();
        prop_assert_eq!(
            evaluate(&f, &folded, &point[1..]).unwrap(),
            evaluate(&f, &t, &point).unwrap()
        );
        prop_assert_eq!(
            evaluate_via_eq(&f, &t, &point).unwrap(),
            evaluate(&f, &t, &point).unwrap()
        );
    }

    #[test]
    fn table_codec_round_trip(seed in any::<u64>(), mu in 0usize..=6) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = MleTable::new(random_vec(&f, &mut rng, 1 << mu)).unwrap();
        let back = MleTable::decode(&f, &t.encode(&f)).unwrap();
        prop_assert_eq!(back.entries(), t.entries());
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zkspeed_core::fp::{Fe, Field};
use zkspeed_core::mle::SparsityProfile;
use zkspeed_core::permwire::{build_product, construct_nd, frac_mle, NdTables, WiringInputs};
use zkspeed_core::prover::{gen_mock_circuit, MockCircuit};

fn f() -> Field {
    Field::bls12_381_scalar()
}

fn nd(f: &Field, c: &MockCircuit, beta: Fe, gamma: Fe) -> NdTables {
    construct_nd(
        f,
        &WiringInputs {
            w: [&c.w[0], &c.w[1], &c.w[2]],
            sigma: [&c.sigma[0], &c.sigma[1], &c.sigma[2]],
            id: [&c.id[0], &c.id[1], &c.id[2]],
            beta,
            gamma,
        },
    )
    .unwrap()
}

fn root(f: &Field, c: &MockCircuit, beta: Fe, gamma: Fe) -> Fe {
    let t = nd(f, c, beta, gamma);
    let phi = frac_mle(f, &t.n, &t.d, 64).unwrap();
    build_product(f, &phi).unwrap().root()
}

#[test]
fn corrupted_sigma_moves_root_in_99_percent_of_trials() {
    let f = f();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut caught = 0;
    for trial in 0..100 {
        let mut c = gen_mock_circuit(&f, 4, &SparsityProfile::typical(), trial, 0.5).unwrap();
        let n = 3 * c.num_gates();
        let (a, b) = loop {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if c.slot_value(a) != c.slot_value(b) {
                break (a, b);
            }
        };
        c.transpose_sigma(a, b);
        if root(&f, &c, f.random(&mut rng), f.random(&mut rng)) != f.one() {
            caught += 1;
        }
    }
    assert!(caught >= 99, "caught {caught}/100");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn honest_wiring_has_unit_root(seed in any::<u64>(), mu in 2usize..=6) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = gen_mock_circuit(&f, mu, &SparsityProfile::typical(), seed, 0.6).unwrap();
        let (beta, gamma) = (f.random(&mut rng), f.random(&mut rng));
        let t = nd(&f, &c, beta, gamma);
        let phi = frac_mle(&f, &t.n, &t.d, 8).unwrap();
        for i in 0..phi.len() {
            prop_assert_eq!(f.mul(&phi[i], &t.d[i]), t.n[i]);
        }
        let prod = build_product(&f, &phi).unwrap();
        prop_assert_eq!(prod.root(), f.one());
        for i in 0..phi.len() {
            prop_assert_eq!(prod.pi[i], f.mul(&prod.p1[i], &prod.p2[i]));
        }
    }

    #[test]
    fn batch_size_does_not_change_phi(seed in any::<u64>(), batch in 1usize..=128) {
        let f = f();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let num: Vec<Fe> = (0..100).map(|_| f.random(&mut rng)).collect();
        let den: Vec<Fe> = (0..100).map(|_| f.random_nonzero(&mut rng)).collect();
        prop_assert_eq!(
            frac_mle(&f, &num, &den, batch).unwrap(),
            frac_mle(&f, &num, &den, 1).unwrap()
        );
    }
}

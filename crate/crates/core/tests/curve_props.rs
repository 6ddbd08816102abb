use num_bigint::BigUint;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use zkspeed_core::ec::{Affine, Curve, Point};

fn toy_points(c: &Curve) -> Vec<Point> {
    c.enumerate_points().iter().map(|a| c.point_from(a)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn toy_padd_commutes_and_associates(i in 0usize..18, j in 0usize..18, k in 0usize..18) {
        let c = Curve::toy17();
        let pts = toy_points(&c);
        let (p, q, r) = (pts[i], pts[j], pts[k]);
        prop_assert!(c.eq_points(&c.padd(&p, &q), &c.padd(&q, &p)));
        let left = c.padd(&c.padd(&p, &q), &r);
        let right = c.padd(&p, &c.padd(&q, &r));
        prop_assert!(c.eq_points(&left, &right));
        prop_assert!(c.is_on_curve(&left));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn bls_scalar_mul_is_additive(k1 in any::<u64>(), k2 in any::<u64>()) {
        let c = Curve::bls12_381_g1();
        let g = c.generator();
        let (a, b) = (BigUint::from(k1), BigUint::from(k2));
        let sum = c.scalar_mul_int(&(&a + &b), &g);
        let split = c.padd(&c.scalar_mul_int(&a, &g), &c.scalar_mul_int(&b, &g));
        prop_assert!(c.eq_points(&sum, &split));
        prop_assert!(c.is_on_curve(&split));
    }

    #[test]
    fn bls_padd_matches_affine(seed in any::<u64>()) {
        let c = Curve::bls12_381_g1();
        let sf = c.scalar_field().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = c.scalar_mul(&sf.random(&mut rng), &c.generator());
        let q = c.scalar_mul(&sf.random(&mut rng), &c.generator());
        let want = c.affine_add(&c.to_affine(&p), &c.to_affine(&q));
        prop_assert_eq!(c.to_affine(&c.padd(&p, &q)), want);
    }
}

#[test]
fn toy_scalar_mul_by_order_is_identity() {
    let c = Curve::toy17();
    for p in toy_points(&c) {
        assert!(c.is_identity(&c.scalar_mul_int(&BigUint::from(18u32), &p)));
    }
    assert_eq!(c.to_affine(&c.identity()), Affine::Identity);
}

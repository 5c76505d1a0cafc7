use nonarch::algebra::{IntervalValuation, ProductEngine};
use nonarch::field::q_pow;
use nonarch::linalg::rat;
use nonarch::ring::ChainRing;
use nonarch::transforms::DepthPolicy;
use nonarch::valuation::spherical;
use nonarch::{FieldModel, Rational};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn engine() -> ProductEngine {
    let ring = ChainRing::new(FieldModel::equi(2).unwrap(), 1).unwrap();
    ProductEngine::new(ring, 3, DepthPolicy::standard(2))
}

fn random_val(e: &ProductEngine, k: usize, rng: &mut ChaCha8Rng) -> IntervalValuation {
    let len = e.index(e.n() - k).unwrap().len();
    let fhat: Vec<Rational> = (0..len).map(|_| rat(rng.gen_range(-3..4), 1)).collect();
    IntervalValuation::exact(&e.from_section(k, &fhat).unwrap())
}

#[test]
fn associativity_on_random_triples() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let tol = q_pow(2, -6);
    for _ in 0..10 {
        let (a, b, c) = (random_val(&e, 1, &mut rng), random_val(&e, 1, &mut rng), random_val(&e, 1, &mut rng));
        let ab = e.product(&a, &b).unwrap();
        let left = e.product(&ab.value, &c).unwrap();
        let bc = e.product(&b, &c).unwrap();
        let right = e.product(&a, &bc.value).unwrap();
        assert!(left.value.overlaps(&right.value), "{} vs {}", left.value, right.value);
        assert!(left.value.widest() <= tol && right.value.widest() <= tol);
    }
}

#[test]
fn unit_and_commutativity_on_random_pairs() {
    let e = engine();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let chi = IntervalValuation::exact(&spherical(&e.index(0).unwrap()));
    let tol = q_pow(2, -6);
    for t in 0..10 {
        let (i, j) = [(1, 1), (1, 2), (2, 1), (0, 2), (1, 0)][t % 5];
        let a = random_val(&e, i, &mut rng);
        let b = random_val(&e, j, &mut rng);
        assert_eq!(e.product(&chi, &a).unwrap().value, a);
        let ab = e.product(&a, &b).unwrap();
        let ba = e.product(&b, &a).unwrap();
        assert!(ab.value.overlaps(&ba.value));
        assert!(ab.value.widest() <= tol && ba.value.widest() <= tol);
    }
}

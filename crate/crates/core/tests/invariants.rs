use nonarch::field::{det_valuation, smith_form};
use nonarch::grassmann::{annihilator, fiber, lift_subspace, reduce, reduce_subspace, sample_haar};
use nonarch::ring::ChainRing;
use nonarch::transforms::fourier_matrix;
use nonarch::{EquiScalar, FieldModel, LocalScalar, Matrix, MixedScalar, RatMatrix, Valuation};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scalar<S: LocalScalar>(model: FieldModel, shift: i64, digits: &[u32]) -> S {
    let q = model.q() as u32;
    let d: Vec<u32> = digits.iter().map(|x| x % q).collect();
    S::from_digits(model, &d).mul(&S::pow_uniformizer(model, shift))
}

fn models() -> impl Strategy<Value = FieldModel> {
    prop_oneof![
        Just(FieldModel::equi(2).unwrap()),
        Just(FieldModel::equi(3).unwrap()),
        Just(FieldModel::equi(4).unwrap()),
        Just(FieldModel::mixed(2).unwrap()),
        Just(FieldModel::mixed(3).unwrap()),
    ]
}

fn valuation_is_additive<S: LocalScalar>(model: FieldModel, a: (i64, Vec<u32>), b: (i64, Vec<u32>)) {
    let x: S = scalar(model, a.0, &a.1);
    let y: S = scalar(model, b.0, &b.1);
    assert_eq!(x.mul(&y).val(), x.val() + y.val());
    if !x.is_zero() {
        assert_eq!(x.inv().unwrap().mul(&x), S::one(model));
    }
}

fn smith_matches_determinant<S: LocalScalar>(model: FieldModel, n: usize, entries: &[(i64, Vec<u32>)]) {
    let m: Matrix<S> = Matrix::from_fn(n, n, |i, j| {
        let (s, d) = &entries[i * n + j];
        scalar(model, *s, d)
    });
    let sf = smith_form(model, &m);
    match det_valuation(&m) {
        Valuation::Infinite => assert!(sf.rank() < n),
        Valuation::Finite(v) => {
            assert_eq!(sf.rank(), n);
            assert_eq!(sf.index_valuation(), v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuations_add_under_products(
        model in models(),
        a in (-3i64..4, prop::collection::vec(0u32..5, 0..5)),
        b in (-3i64..4, prop::collection::vec(0u32..5, 0..5)),
    ) {
        match model {
            FieldModel::EquiChar { .. } => valuation_is_additive::<EquiScalar>(model, a, b),
            FieldModel::MixedChar { .. } => valuation_is_additive::<MixedScalar>(model, a, b),
        }
    }

    #[test]
    fn elementary_divisors_sum_to_the_determinant_valuation(
        model in models(),
        n in 1usize..4,
        entries in prop::collection::vec((0i64..3, prop::collection::vec(0u32..5, 1..4)), 9),
    ) {
        match model {
            FieldModel::EquiChar { .. } => smith_matches_determinant::<EquiScalar>(model, n, &entries),
            FieldModel::MixedChar { .. } => smith_matches_determinant::<MixedScalar>(model, n, &entries),
        }
    }

    #[test]
    fn annihilator_is_an_involution_and_commutes_with_reduction(
        model in models(),
        n in 1usize..5,
        k in 0usize..5,
        depth in 1u32..4,
        seed in any::<u64>(),
    ) {
        prop_assume!(k <= n);
        let deep = ChainRing::new(model, depth + 1).unwrap();
        let shallow = ChainRing::new(model, depth).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sample_haar(&deep, n, k, &mut rng);
        prop_assert_eq!(annihilator(&deep, &annihilator(&deep, &x)), x.clone());
        prop_assert_eq!(reduce(&shallow, &annihilator(&deep, &x)), annihilator(&shallow, &reduce(&shallow, &x)));
        let lifts = fiber(&shallow, &deep, &reduce(&shallow, &x));
        prop_assert!(lifts.contains(&x));
    }

    #[test]
    fn lifts_reduce_to_themselves(model in models(), n in 1usize..4, k in 0usize..4, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let ring = ChainRing::new(model, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = sample_haar(&ring, n, k, &mut rng);
        let back = match model {
            FieldModel::EquiChar { .. } => reduce_subspace(&ring, &lift_subspace::<EquiScalar>(&ring, &x)).unwrap(),
            FieldModel::MixedChar { .. } => reduce_subspace(&ring, &lift_subspace::<MixedScalar>(&ring, &x)).unwrap(),
        };
        prop_assert_eq!(back, x);
    }
}

#[test]
fn fourier_squares_to_the_identity_on_small_grassmannians() {
    for q in [2u64, 3] {
        let ring = ChainRing::new(FieldModel::equi(q).unwrap(), 2).unwrap();
        for n in 1..=3 {
            for k in 0..=n {
                let f = fourier_matrix(&ring, n, k, false).unwrap();
                let g = fourier_matrix(&ring, n, n - k, true).unwrap();
                assert_eq!(g.entries.mul(&f.entries), RatMatrix::identity(f.cols()));
            }
        }
    }
}

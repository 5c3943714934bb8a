use cdma_sig::criteria::{ed, md, qd};
use cdma_sig::enlarge::{kronecker, tensor_decode, EnlargementPlan, Generator};
use cdma_sig::system::{constellation, ChannelParams, InputVector};
use cdma_sig::{Alphabet, SignatureMatrix};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(max_m: usize, max_n: usize) -> impl Strategy<Value = SignatureMatrix> {
    (1..=max_m, 1..=max_n).prop_flat_map(|(m, n)| {
        prop::collection::vec(-1.0f64..=1.0, m * n)
            .prop_map(move |e| SignatureMatrix::new(m, n, e, Alphabet::Real).unwrap())
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constellation_is_linear(a in matrix(4, 6)) {
        let c = constellation(&a).unwrap();
        for i in 0..c.len() {
            let x = c.input(i);
            let direct = a.mul_vec(&x.to_f64()).unwrap();
            for (p, d) in c.point(i).iter().zip(&direct) {
                prop_assert!((p - d).abs() < 1e-12);
            }
            let neg = c.point(c.negation_of(i));
            for (p, q) in c.point(i).iter().zip(neg) {
                prop_assert_eq!(*p, -q);
            }
        }
    }

    #[test]
    fn distances_ignore_column_relabeling(
        a in matrix(3, 5),
        sigma in 0.2f64..2.0,
        seed in any::<u64>(),
    ) {
        let n = a.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = a.permute_columns(&perm).unwrap().negate_column((seed as usize) % n);
        let ch = ChannelParams::from_sigma(sigma).unwrap();
        prop_assert!(close(md(&a).unwrap().value, md(&b).unwrap().value));
        prop_assert!(close(qd(&a, &ch).unwrap().value, qd(&b, &ch).unwrap().value));
        prop_assert!(close(ed(&a, &ch).unwrap().value, ed(&b, &ch).unwrap().value));
    }

    #[test]
    fn scaling_moves_distances_monotonically(a in matrix(3, 4), c in 1.01f64..3.0) {
        let ch = ChannelParams::from_sigma(0.5).unwrap();
        let b = a.scaled(c);
        prop_assert!(close(md(&b).unwrap().value, c * md(&a).unwrap().value));
        prop_assert!(qd(&b, &ch).unwrap().value <= qd(&a, &ch).unwrap().value + 1e-12);
        prop_assert!(ed(&b, &ch).unwrap().value <= ed(&a, &ch).unwrap().value + 1e-12);
    }

    #[test]
    fn kronecker_matches_nalgebra(
        (k, g) in (1usize..4).prop_flat_map(|k| (Just(k), prop::collection::vec(-2.0f64..2.0, k * k))),
        a in matrix(3, 4),
    ) {
        let g = DMatrix::from_row_slice(k, k, &g);
        let a = a.to_dmatrix();
        prop_assert_eq!(kronecker(&g, &a), g.kronecker(&a));
    }

    #[test]
    fn unitary_enlargement_is_an_isometry(
        log_k in 0u32..4,
        m in 1usize..5,
        seed in any::<u64>(),
    ) {
        let k = 1usize << log_k;
        let g = Generator::hadamard(k).unwrap();
        let t = kronecker(g.matrix(), &DMatrix::identity(m, m));
        let v = DVector::from_fn(k * m, |i, _| ((seed >> (i % 64)) as f64 % 7.0) - 3.0 + i as f64 * 0.1);
        prop_assert!(((&t * &v).norm() - v.norm()).abs() < 1e-10 * (1.0 + v.norm()));
    }

    #[test]
    fn noiseless_tensor_round_trip(
        a in matrix(3, 4),
        log_k in 0u32..3,
        index in any::<u64>(),
    ) {
        prop_assume!(constellation(&a).unwrap().is_injective());
        let k = 1usize << log_k;
        let plan = EnlargementPlan::new(a.clone(), Generator::hadamard(k).unwrap()).unwrap();
        let n = k * a.n();
        let x = InputVector::from_index(index & ((1u64 << n) - 1), n);
        let y = plan.enlarged().mul_vec(&x.to_f64()).unwrap();
        prop_assert_eq!(tensor_decode(&plan, &y).unwrap(), x);
    }
}

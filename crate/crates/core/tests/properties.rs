use hillcrack::attack::candidate_periods;
use hillcrack::cipher::schedule_matrix;
use hillcrack::io::eqkey::{format_equivalent_key, parse_equivalent_key};
use hillcrack::io::keyfile::{format_key, parse_key};
use hillcrack::keystats::{column_period, matrix_period};
use hillcrack::{
    decrypt, encrypt, inverse_mod, validate_key, ByteMatrix, ByteVector, EquivalentKey, GrayImage,
    SecretKey,
};
use proptest::prelude::*;

fn matrix(max_m: usize) -> impl Strategy<Value = ByteMatrix> {
    (1..=max_m).prop_flat_map(|m| {
        prop::collection::vec(any::<u8>(), m * m).prop_map(move |e| ByteMatrix::new(m, e).unwrap())
    })
}

fn valid_key(max_m: usize) -> impl Strategy<Value = SecretKey> {
    matrix(max_m)
        .prop_filter("odd determinant", |k| k.is_invertible())
        .prop_flat_map(|k1| {
            let m = k1.size();
            prop::collection::vec(any::<u8>().prop_map(|b| b | 1), m).prop_map(move |iv| {
                SecretKey::new(k1.clone(), ByteVector::new(iv).unwrap()).unwrap()
            })
        })
}

fn image() -> impl Strategy<Value = GrayImage> {
    (1usize..24, 1usize..24).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), w * h)
            .prop_map(move |p| GrayImage::new(w, h, p).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn round_trip(key in valid_key(6), plain in image()) {
        let cipher = encrypt(&plain, &key).unwrap();
        prop_assert_eq!(decrypt(&cipher, &key).unwrap(), plain);
    }

    #[test]
    fn encryption_is_additive(key in valid_key(5), (a, b) in (1usize..20, 1usize..20).prop_flat_map(|(w, h)| {
        let img = move || prop::collection::vec(any::<u8>(), w * h).prop_map(move |p| GrayImage::new(w, h, p).unwrap());
        (img(), img())
    })) {
        let lhs = encrypt(&a.wrapping_add(&b).unwrap(), &key).unwrap();
        let rhs = encrypt(&a, &key).unwrap().wrapping_add(&encrypt(&b, &key).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn inverse_exists_iff_odd_determinant(a in matrix(6)) {
        let odd = a.det_mod() % 2 == 1;
        prop_assert_eq!(a.is_invertible(), odd);
        match inverse_mod(&a) {
            Ok(inv) => {
                prop_assert!(odd);
                let id = ByteMatrix::identity(a.size()).unwrap();
                prop_assert_eq!(a.mul(&inv).unwrap(), id.clone());
                prop_assert_eq!(inv.mul(&a).unwrap(), id);
            }
            Err(_) => prop_assert!(!odd),
        }
    }

    #[test]
    fn determinant_is_multiplicative(a in matrix(5), seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let b = ByteMatrix::random(a.size(), &mut rng).unwrap();
        prop_assert_eq!(a.mul(&b).unwrap().det_mod(), a.det_mod().wrapping_mul(b.det_mod()));
    }

    #[test]
    fn schedule_is_left_multiplication(k1 in matrix(6), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let m = k1.size();
        let iv = ByteVector::new((0..m).map(|_| rng.gen()).collect()).unwrap();
        let t = schedule_matrix(&iv).unwrap();
        let key = SecretKey::new(k1.clone(), iv).unwrap();
        let mut expected = k1;
        for k in key.key_stream().take(20) {
            prop_assert_eq!(&k, &expected);
            expected = t.mul(&expected).unwrap();
        }
    }

    #[test]
    fn valid_keys_have_periods_dividing_the_bound(key in valid_key(4)) {
        let bound = 128 * (key.m() + 1);
        let c = matrix_period(key.k1(), key.iv(), 4 * bound).unwrap().cycle().unwrap();
        prop_assert_eq!(c.preperiod, 0);
        prop_assert_eq!(bound % c.period, 0);
        prop_assert!(candidate_periods(key.m()).contains(&c.period));
        for j in 1..=key.m() {
            let col = column_period(key.k1(), key.iv(), j, 4 * bound).unwrap().cycle().unwrap();
            prop_assert_eq!(c.period % col.period, 0);
        }
    }

    #[test]
    fn validity_matches_stream_invertibility(k1 in matrix(3), seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let iv = ByteVector::new((0..k1.size()).map(|_| rng.gen()).collect()).unwrap();
        let key = SecretKey::new(k1, iv).unwrap();
        let stream_ok = key.key_stream().take(16).all(|k| k.is_invertible());
        prop_assert_eq!(validate_key(&key).is_valid(), stream_ok);
    }

    #[test]
    fn key_file_round_trip(key in valid_key(16)) {
        prop_assert_eq!(parse_key(&format_key(&key)).unwrap(), key);
    }

    #[test]
    fn equivalent_key_file_round_trip(key in valid_key(4), period in 1usize..6) {
        let eq = EquivalentKey::periodic(key.m(), key.key_stream().take(period).collect()).unwrap();
        prop_assert_eq!(parse_equivalent_key(&format_equivalent_key(&eq)).unwrap(), eq);
    }
}

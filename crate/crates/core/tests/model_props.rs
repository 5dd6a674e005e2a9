use proptest::prelude::*;

use vlock_core::model::{generation, locked_map, Boundary, Params, RationalSpeed};

/// Parameters with `r c ≤ 1`, so the reproduction rule is monotone.
fn params() -> impl Strategy<Value = Params> {
    (1.01f64..1.99, 0.0f64..=1.0, 0.05f64..=1.0).prop_map(|(r, mf, cf)| {
        let m = mf * (2.0 / r).min(1.0);
        let c = cf / r;
        Params::new(r, m, c).unwrap()
    })
}

fn state(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generation_stays_in_unit_interval(p in params(), u in state(30)) {
        let out = generation(&u, Boundary::front(), &p).unwrap();
        prop_assert!(out.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn generation_is_order_preserving(p in params(), u in state(30), bump in state(30)) {
        let v: Vec<f64> = u.iter().zip(&bump).map(|(&a, &d)| a + d * (1.0 - a)).collect();
        let gu = generation(&u, Boundary::front(), &p).unwrap();
        let gv = generation(&v, Boundary::front(), &p).unwrap();
        for (a, b) in gu.iter().zip(&gv) {
            prop_assert!(a <= b, "{a} > {b}");
        }
    }

    #[test]
    fn generation_commutes_with_shift(p in params(), u in state(25)) {
        let zero = Boundary::new(0.0, 0.0);
        let mut padded = vec![0.0];
        padded.extend_from_slice(&u);
        let plain = generation(&u, zero, &p).unwrap();
        let shifted = generation(&padded, zero, &p).unwrap();
        prop_assert_eq!(&shifted[1..], &plain[..]);
    }

    #[test]
    fn generation_is_deterministic(p in params(), u in state(40)) {
        let a = generation(&u, Boundary::front(), &p).unwrap();
        let b = generation(&u, Boundary::front(), &p).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn locked_map_matches_iterated_generations(p in params(), u in state(40), q in 2u32..6, p_num in 1u32..5) {
        let Ok(speed) = RationalSpeed::new(p_num, q) else { return Ok(()) };
        let mapped = locked_map(&u, Boundary::front(), &p, speed).unwrap();
        let mut cur = u.clone();
        for _ in 0..q {
            cur = generation(&cur, Boundary::front(), &p).unwrap();
        }
        let shift = speed.p() as usize;
        for j in mapped.exact.clone() {
            prop_assert_eq!(mapped.values[j], cur[j + shift]);
        }
    }
}

#[test]
fn rejects_invalid_parameters() {
    assert!(Params::new(0.9, 0.5, 0.5).is_err());
    assert!(Params::new(1.5, 1.2, 0.5).is_err());
    assert!(Params::new(1.5, 0.5, 0.0).is_err());
    assert!(Params::new(1.5, 0.5, 0.9).is_err());
    assert!(RationalSpeed::new(2, 4).is_err());
    assert!(RationalSpeed::new(3, 2).is_err());
    let p = Params::new(1.5, 0.5, 0.5).unwrap();
    assert!(generation(&[0.2, 1.5], Boundary::front(), &p).is_err());
    assert!(generation(&[0.2, f64::NAN], Boundary::front(), &p).is_err());
}

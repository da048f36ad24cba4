use cubevar::cube::{fourier, inverse_fourier, CubeDim, CubeFunction, Side};
use cubevar::variation::{dyadic_partition, vr_bruteforce, vr_exact, vr_value, VariationQuery};
use num_complex::Complex64;
use proptest::prelude::*;

fn complex_vec(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b)), len)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), 1.0f64..6.0]
}

proptest! {
    #[test]
    fn fourier_round_trip(n in 1usize..=8, seed in any::<u64>()) {
        let dim = CubeDim::new(n).unwrap();
        let mut rng = cubevar::rng::seeded_rng(seed);
        let f = cubevar::rng::random_function(dim, &mut rng);
        let back = inverse_fourier(&fourier(&f).unwrap()).unwrap();
        prop_assert_eq!(back.side(), Side::Physical);
        prop_assert!(back.max_abs_diff(&f).unwrap() < 1e-12);
        prop_assert!((fourier(&f).unwrap().norm_l2() - f.norm_l2()).abs() < 1e-10);
    }

    #[test]
    fn vr_chain_attains_value(values in complex_vec(1..=40), r in exponent()) {
        let q = VariationQuery::new(r, values.clone()).unwrap();
        let res = vr_exact(&q);
        let sum: f64 = res.chain.windows(2).map(|w| (values[w[1] as usize] - values[w[0] as usize]).norm().powf(r)).sum();
        prop_assert!((sum.powf(r.recip()) - res.value).abs() <= 1e-9 * res.value.max(1.0));
        prop_assert!(res.chain.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn vr_matches_bruteforce(values in complex_vec(1..=10), r in exponent()) {
        let q = VariationQuery::new(r, values).unwrap();
        prop_assert!((vr_exact(&q).value - vr_bruteforce(&q).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn vr_seminorm(a in complex_vec(8..=8), b in complex_vec(8..=8), r in exponent(), c in -5.0f64..5.0) {
        let va = vr_value(&a, r).unwrap();
        let vb = vr_value(&b, r).unwrap();
        let sum: Vec<Complex64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(vr_value(&sum, r).unwrap() <= (va + vb) * (1.0 + 1e-12) + 1e-12);
        let scaled: Vec<Complex64> = a.iter().map(|x| x * c).collect();
        prop_assert!((vr_value(&scaled, r).unwrap() - c.abs() * va).abs() <= 1e-9 * va.max(1.0));
        let shifted: Vec<Complex64> = a.iter().map(|x| x + Complex64::new(c, -c)).collect();
        prop_assert!((vr_value(&shifted, r).unwrap() - va).abs() <= 1e-9 * va.max(1.0));
    }

    #[test]
    fn dyadic_partition_large_scales(l in 0u32..=40, x in any::<u64>(), y in any::<u64>()) {
        let top = 1u64 << l;
        let (a, b) = { let (p, q) = (x % (top + 1), y % (top + 1)); (p.min(q), p.max(q)) };
        prop_assume!(a < b);
        let p = dyadic_partition(a, b, l).unwrap();
        prop_assert!(p.check(a, b, l).ok());
        let covered: u64 = p.intervals.iter().map(|iv| iv.end - iv.start).sum();
        prop_assert_eq!(covered, b - a);
    }
}

#[test]
fn constant_function_has_one_coefficient() {
    let dim = CubeDim::new(5).unwrap();
    let f = CubeFunction::constant(dim, Complex64::new(2.0, 0.0));
    let spec = fourier(&f).unwrap();
    let nonzero = spec.values().iter().filter(|v| v.norm() > 1e-12).count();
    assert_eq!(nonzero, 1);
}

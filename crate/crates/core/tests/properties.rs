mod common;

use krop::cleanup::{krop_cleanup, krop_transform, sign_cleanup};
use krop::codebook::{krop_row, KropParams};
use krop::hrr::{circular_convolve, circular_correlate, fft, HyperVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn vectors(count: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=9).prop_flat_map(move |k| {
        prop::collection::vec(prop::collection::vec(-10.0..10.0f64, 1 << k), count)
    })
}

fn hv(v: &[f64]) -> HyperVector {
    HyperVector::new(v.to_vec()).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn params() -> impl Strategy<Value = KropParams> {
    prop::collection::vec(0.01..6.27f64, 1..=10).prop_map(|t| KropParams::from_thetas(t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes(v in vectors(2)) {
        let ab = circular_convolve(&hv(&v[0]), &hv(&v[1])).unwrap();
        let ba = circular_convolve(&hv(&v[1]), &hv(&v[0])).unwrap();
        let scale = 1.0 + ab.norm();
        prop_assert!(ab.max_abs_diff(&ba).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn correlation_is_adjoint_of_convolution(v in vectors(3)) {
        let (a, b, c) = (&v[0], &v[1], &v[2]);
        let lhs = dot(circular_convolve(&hv(a), &hv(b)).unwrap().as_slice(), c);
        let rhs = dot(b, circular_correlate(&hv(a), &hv(c)).unwrap().as_slice());
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn convolution_matches_definition(v in vectors(2)) {
        let got = circular_convolve(&hv(&v[0]), &hv(&v[1])).unwrap();
        let want = common::naive_convolve(&v[0], &v[1]);
        prop_assert!(common::max_abs_diff(got.as_slice(), &want) <= 1e-9);
    }

    #[test]
    fn fft_round_trips(v in vectors(1)) {
        let x: Vec<Complex64> = v[0].iter().map(|&r| Complex64::new(r, -r / 3.0)).collect();
        let back = fft(&fft(&x, false).unwrap(), true).unwrap();
        for (a, b) in x.iter().zip(&back) {
            prop_assert!((a - b).norm() <= 1e-10);
        }
    }

    #[test]
    fn krop_transform_is_an_isometric_involution(p in params(), seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let u = hv(&common::uniform_vec(&mut rng, p.dim()));
        let once = krop_transform(&p, &u).unwrap();
        prop_assert!((once.norm() - u.norm()).abs() <= 1e-10 * (1.0 + u.norm()));
        let twice = krop_transform(&p, &once).unwrap();
        prop_assert!(twice.max_abs_diff(&u).unwrap() <= 1e-10);
    }

    #[test]
    fn clean_rows_are_their_own_cleanup(p in params(), i in any::<prop::sample::Index>()) {
        let index = i.index(p.dim());
        let row = krop_row(&p, index).unwrap();
        prop_assert!((row.norm() - 1.0).abs() <= 1e-12);
        let found = krop_cleanup(&p, &row).unwrap();
        prop_assert_eq!(found.index, Some(index));
        prop_assert!(found.vector.max_abs_diff(&row).unwrap() <= 1e-12);
    }

    /// Adding `d` to `u` can only flip signs where `|d_i| >= |u_i|`.
    #[test]
    fn sign_cleanup_flips_only_where_perturbation_dominates(v in vectors(2)) {
        let (u, d) = (&v[0], &v[1]);
        let moved: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + b).collect();
        let s0 = sign_cleanup(&hv(u)).unwrap().vector;
        let s1 = sign_cleanup(&hv(&moved)).unwrap().vector;
        let flips = s0.as_slice().iter().zip(s1.as_slice()).filter(|(a, b)| a != b).count();
        let bound = u.iter().zip(d).filter(|(a, b)| b.abs() >= a.abs()).count();
        prop_assert!(flips <= bound);
    }

    #[test]
    fn unbinding_is_linear_in_the_trace(v in vectors(3)) {
        let (a, x, y) = (hv(&v[0]), &v[1], &v[2]);
        let sum: Vec<f64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
        let whole = circular_correlate(&a, &hv(&sum)).unwrap();
        let parts: Vec<f64> = circular_correlate(&a, &hv(x))
            .unwrap()
            .as_slice()
            .iter()
            .zip(circular_correlate(&a, &hv(y)).unwrap().as_slice())
            .map(|(p, q)| p + q)
            .collect();
        prop_assert!(common::max_abs_diff(whole.as_slice(), &parts) <= 1e-9);
    }
}

use freqlab::loca::{coeff_gradient, location_gradient, materialize, round_locations, upstream_to_z, LocaParam};
use freqlab::transforms::{
    dct2, dft2, fast_dct2, fast_idct2, half_matrices, idct2_dense, idct2_sparse, reference_matrix,
    scatter, DctBasis, SparseSpectrum,
};
use freqlab::DenseMatrix;
use proptest::prelude::*;

fn matrix(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (1..=max, 1..=max).prop_flat_map(|(p, q)| {
        prop::collection::vec(-10.0..10.0f64, p * q)
            .prop_map(move |v| DenseMatrix::from_vec(p, q, v).unwrap())
    })
}

fn square(max: usize) -> impl Strategy<Value = DenseMatrix> {
    (2..=max).prop_flat_map(|k| {
        prop::collection::vec(-10.0..10.0f64, k * k)
            .prop_map(move |v| DenseMatrix::from_vec(k, k, v).unwrap())
    })
}

/// A spectrum with distinct locations on a random grid.
fn spectrum(max: usize) -> impl Strategy<Value = SparseSpectrum> {
    (1..=max, 1..=max)
        .prop_flat_map(|(p, q)| {
            let cells = prop::sample::subsequence((0..p * q).collect::<Vec<_>>(), 1..=(p * q).min(12));
            (Just((p, q)), cells).prop_flat_map(|(dims, cells)| {
                let n = cells.len();
                (Just(dims), Just(cells), prop::collection::vec(-5.0..5.0f64, n))
            })
        })
        .prop_map(|((p, q), cells, coeffs)| {
            let locs = cells.iter().map(|&c| (c / q, c % q)).collect();
            SparseSpectrum::new((p, q), coeffs, locs).unwrap()
        })
}

fn param(max: usize) -> impl Strategy<Value = (LocaParam, DenseMatrix)> {
    (2..=max, 2..=max, 1..6usize)
        .prop_flat_map(|(p, q, b)| {
            (
                Just((p, q)),
                -2.0..2.0f64,
                prop::collection::vec(-3.0..3.0f64, b),
                prop::collection::vec((0.0..(p - 1) as f64, 0.0..(q - 1) as f64), b),
                prop::collection::vec(-1.0..1.0f64, p * q),
            )
        })
        .prop_map(|((p, q), alpha, a, l, g)| {
            (
                LocaParam::new((p, q), alpha, a, l).unwrap(),
                DenseMatrix::from_vec(p, q, g).unwrap(),
            )
        })
}

fn inner(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dct_round_trip_and_parseval(w in matrix(24)) {
        let basis = DctBasis::new(w.rows(), w.cols()).unwrap();
        let f = dct2(&w, &basis).unwrap();
        prop_assert!(idct2_dense(&f, &basis).unwrap().max_abs_diff(&w).unwrap() < 1e-10);
        let e = w.frobenius_sq();
        prop_assert!((f.frobenius_sq() - e).abs() <= 1e-10 * (1.0 + e));
    }

    #[test]
    fn fast_paths_match_matrix_products(w in matrix(40)) {
        let basis = DctBasis::new(w.rows(), w.cols()).unwrap();
        let f = dct2(&w, &basis).unwrap();
        prop_assert!(fast_dct2(&w).max_abs_diff(&f).unwrap() < 1e-8);
        prop_assert!(fast_idct2(&f).max_abs_diff(&w).unwrap() < 1e-8);
    }

    #[test]
    fn sparse_inverse_matches_dense(s in spectrum(20)) {
        let basis = DctBasis::new(s.dims.0, s.dims.1).unwrap();
        let dense_spec = scatter(&s.coefficients, &s.locations, s.dims).unwrap();
        let dense = idct2_dense(&dense_spec, &basis).unwrap();
        prop_assert!(idct2_sparse(&s, &basis).unwrap().max_abs_diff(&dense).unwrap() < 1e-10);
    }

    #[test]
    fn dft_of_real_input_is_conjugate_symmetric(w in matrix(20)) {
        let f = dft2(&w);
        prop_assert!(f.conjugate_symmetry_residual() < 1e-9);
        let e = w.frobenius_sq();
        prop_assert!((f.norm_sq() - e).abs() <= 1e-10 * (1.0 + e));
    }

    #[test]
    fn half_matrices_partition_energy(w in square(16)) {
        let k = w.rows();
        let r = reference_matrix(k).unwrap();
        let h = half_matrices(&dft2(&w), &r).unwrap();
        let e = w.frobenius_sq();
        prop_assert!((h.h.sum() - e).abs() <= 1e-10 * (1.0 + e));
        prop_assert!((h.re.sum() + h.im.sum() - h.h.sum()).abs() <= 1e-10 * (1.0 + e));
        prop_assert_eq!(r.count(1), r.count(-1));
        for i in 0..k {
            for j in 0..k {
                if r.get(i, j) == -1 {
                    prop_assert_eq!(h.h[(i, j)], 0.0);
                }
            }
        }
    }

    /// Coefficient gradients read off `Z` equal the directional derivative
    /// `⟨G, α·cᵢdⱼᵀ⟩` computed from a materialized basis function.
    #[test]
    fn z_reuse_matches_direct_inner_products((p, g) in param(12)) {
        let basis = p.basis().unwrap();
        let z = upstream_to_z(&g, &basis).unwrap();
        let grads = coeff_gradient(&p, &z).unwrap();
        for (n, &cell) in p.rounded().iter().enumerate() {
            let unit = SparseSpectrum::new(p.dims, vec![1.0], vec![cell]).unwrap();
            let atom = idct2_sparse(&unit, &basis).unwrap().scale(p.alpha);
            prop_assert!((grads[n] - inner(&g, &atom)).abs() < 1e-10);
        }
    }

    #[test]
    fn dead_coefficients_have_frozen_locations((mut p, g) in param(12), dead in 0..6usize) {
        let dead = dead % p.budget();
        p.a[dead] = 0.0;
        let z = upstream_to_z(&g, &p.basis().unwrap()).unwrap();
        let lg = location_gradient(&p, &z).unwrap();
        prop_assert_eq!(lg[dead], (0.0, 0.0));
    }

    #[test]
    fn materialize_is_linear_in_alpha((p, _g) in param(10)) {
        let mut doubled = p.clone();
        doubled.alpha *= 2.0;
        let once = materialize(&p).unwrap();
        prop_assert!(materialize(&doubled).unwrap().max_abs_diff(&once.scale(2.0)).unwrap() < 1e-12);
    }

    #[test]
    fn rounding_stays_in_grid(
        p in 1..50usize,
        q in 1..50usize,
        l in prop::collection::vec((-1e6..1e6f64, -1e6..1e6f64), 0..20),
    ) {
        for (i, j) in round_locations(&l, (p, q)) {
            prop_assert!(i < p && j < q);
        }
    }

    #[test]
    fn rounding_is_half_away_from_zero(i in 0..40usize, frac in 0.0..1.0f64) {
        let x = i as f64 + frac;
        let (r, _) = round_locations(&[(x, 0.0)], (41, 1))[0];
        let expected = if frac >= 0.5 { i + 1 } else { i };
        prop_assert_eq!(r, expected.min(40));
    }
}

mod common;

use common::{planted, rel_diff, spectrum_error};
use num_complex::Complex64;
use proptest::prelude::*;
use sketchydmd::dmd::{
    dmd_deterministic, reduced_operator, split_snapshots, truncate_svd, DmdModel, ModeKind,
};
use sketchydmd::linalg::{svd_thin, ComplexMatrix, DenseMatrix};

#[test]
fn planted_spectrum_is_recovered() {
    let p = planted(200, 51, 1);
    let model = dmd_deterministic(&p.x, 10, ModeKind::Projected, 900.0).unwrap();
    assert_eq!(model.q(), 10);
    let err = spectrum_error(&p.lambda, &model.lambda);
    assert!(err <= 1e-8, "eigenvalue error {err:e}");
}

#[test]
fn planted_reconstruction_follows_forward_multiplication() {
    let p = planted(200, 51, 2);
    let model = dmd_deterministic(&p.x, 10, ModeKind::Projected, 900.0).unwrap();
    for k in 1..=50 {
        let want = p.basis.matvec(&p.states[k - 1]).unwrap();
        let got = model.reconstruct((k - 1) as f64 * 900.0);
        assert!(rel_diff(&got.values, &want) <= 1e-6, "snapshot {k}");
        assert!(got.imag_norm <= 1e-8 * norm(&want));
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn real_data_gives_conjugate_closed_spectrum() {
    let p = planted(120, 40, 3);
    let model = dmd_deterministic(&p.x, 10, ModeKind::Projected, 1.0).unwrap();
    for i in 0..model.q() {
        if model.lambda[i].im != 0.0 {
            let j = model.conjugate_partner(i).expect("partner present");
            assert_eq!(model.lambda[j], model.lambda[i].conj());
        }
    }
    for t in [0.0, 3.5, 17.0] {
        let r = model.reconstruct(t);
        assert!(r.imag_norm <= 1e-8 * norm(&r.values));
    }
}

#[test]
fn exact_and_projected_modes_share_the_spectrum() {
    let p = planted(150, 30, 4);
    let a = dmd_deterministic(&p.x, 10, ModeKind::Projected, 1.0).unwrap();
    let b = dmd_deterministic(&p.x, 10, ModeKind::Exact, 1.0).unwrap();
    assert!(spectrum_error(&a.lambda, &b.lambda) < 1e-12);
    // With noiseless data both fits reproduce the first snapshot.
    let x1 = p.x.column(0);
    assert!(rel_diff(&b.reconstruct(0.0).values, &x1) < 1e-8);
}

#[test]
fn appending_a_consistent_snapshot_keeps_the_operator() {
    let p = planted(100, 31, 5);
    let short = p.x.columns(0..30);
    let operator_of = |x: &DenseMatrix| {
        let (x1, x2) = split_snapshots(x).unwrap();
        let svd = truncate_svd(&svd_thin(&x1).unwrap(), 10).unwrap();
        let a = reduced_operator(&x2, &svd).unwrap();
        (svd.u, a)
    };
    let (u0, a0) = operator_of(&short);
    let (u1, a1) = operator_of(&p.x);
    // Express the second operator in the first basis.
    let t = u0.matmul_transa(&u1).unwrap();
    let moved = t.matmul(&a1).unwrap().matmul_transb(&t).unwrap();
    let diff = moved.sub(&a0).unwrap().max_abs();
    assert!(diff <= 1e-8, "{diff:e}");
}

#[test]
fn full_rank_fit_reproduces_first_snapshot() {
    let p = planted(80, 11, 6);
    let model = dmd_deterministic(&p.x, 10, ModeKind::Projected, 2.0).unwrap();
    let r = model.reconstruct(0.0);
    assert!(rel_diff(&r.values, &p.x.column(0)) <= 1e-8);
}

#[test]
fn single_neutral_mode_is_constant() {
    let modes = ComplexMatrix::from_fn(4, 1, |i, _| Complex64::new(i as f64 - 1.5, 0.0));
    let model = DmdModel::new(modes, vec![Complex64::new(1.0, 0.0)], vec![Complex64::new(2.0, 0.0)], 60.0, ModeKind::Projected, 5).unwrap();
    let a = model.reconstruct(0.0).values;
    for t in [60.0, 123.4, 1e5] {
        assert_eq!(model.reconstruct(t).values, a);
    }
}

#[test]
fn window_matches_pointwise_reconstruction() {
    let p = planted(60, 20, 7);
    let model = dmd_deterministic(&p.x, 10, ModeKind::Projected, 3.0).unwrap();
    let w = model.reconstruct_window(20);
    for k in [0, 7, 19] {
        let r = model.reconstruct(k as f64 * 3.0);
        assert!(rel_diff(&w.column(k), &r.values) < 1e-12);
    }
}

fn random_model(seed: u64, q: usize, n: usize) -> DmdModel {
    use sketchydmd::linalg::RngStream;
    let mut rng = RngStream::named(seed, "random-model");
    let modes = ComplexMatrix::from_fn(n, q, |_, _| Complex64::new(rng.normal(), rng.normal()));
    let lambda: Vec<Complex64> = (0..q)
        .map(|_| Complex64::from_polar(0.5 + 0.55 * rng.uniform(), std::f64::consts::PI * (2.0 * rng.uniform() - 1.0)))
        .collect();
    let b = (0..q).map(|_| Complex64::new(rng.normal(), rng.normal())).collect();
    DmdModel::new(modes, lambda, b, 0.5 + rng.uniform(), ModeKind::Projected, 30).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn discrete_and_continuous_forms_agree(seed in any::<u64>(), q in 1usize..12, k in 1usize..40) {
        let model = random_model(seed, q, 15);
        let d = model.discrete_reconstruct(k);
        let c = model.reconstruct((k - 1) as f64 * model.dt);
        let scale = norm(&d.values) + d.imag_norm;
        prop_assert!(rel_diff(&c.values, &d.values) <= 1e-9);
        prop_assert!((c.imag_norm - d.imag_norm).abs() <= 1e-9 * scale);
    }

    #[test]
    fn split_overlaps_by_one(n in 1usize..6, m in 2usize..9, seed in any::<u64>()) {
        let x = DenseMatrix::from_fn(n, m, |i, j| ((seed as f64) * 1e-19 + i as f64 * 7.0 + j as f64).sin());
        let (x1, x2) = split_snapshots(&x).unwrap();
        prop_assert_eq!(x1.shape(), (n, m - 1));
        prop_assert_eq!(x2.shape(), (n, m - 1));
        for j in 0..m - 2 {
            prop_assert_eq!(x2.column(j), x1.column(j + 1));
        }
        prop_assert_eq!(x1.column(0), x.column(0));
        prop_assert_eq!(x2.column(m - 2), x.column(m - 1));
    }
}

use num_complex::Complex64;
use proptest::prelude::*;
use sketchydmd::dmd::{DmdModel, ModeKind};
use sketchydmd::linalg::{ComplexMatrix, RngStream};
use sketchydmd::select::{importance, importance_integral, select_modes, Criterion, SelectOptions};

const SCORED: [Criterion; 4] = [Criterion::Amplitude, Criterion::Growth, Criterion::Kou, Criterion::Integral];

/// A model whose spectrum and modes are closed under conjugation, with
/// orthonormal modes.
fn conjugate_model(seed: u64, pairs: usize, reals: usize) -> DmdModel {
    let mut rng = RngStream::named(seed, "select-model");
    let mut lambda = Vec::new();
    let mut b = Vec::new();
    for _ in 0..pairs {
        let l = Complex64::from_polar(0.6 + 0.5 * rng.uniform(), 0.05 + 3.0 * rng.uniform());
        let a = Complex64::new(rng.normal(), rng.normal());
        lambda.push(l);
        lambda.push(l.conj());
        b.push(a);
        b.push(a.conj());
    }
    for _ in 0..reals {
        lambda.push(Complex64::new(0.3 + 0.8 * rng.uniform(), 0.0));
        b.push(Complex64::new(rng.normal(), 0.0));
    }
    let q = lambda.len();
    // Pair columns are (e_a ± i e_b)/√2; real modes are coordinate vectors.
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let modes = ComplexMatrix::from_fn(q, q, |i, j| {
        if j < 2 * pairs {
            let base = j - j % 2;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            match i {
                _ if i == base => Complex64::new(h, 0.0),
                _ if i == base + 1 => Complex64::new(0.0, sign * h),
                _ => Complex64::new(0.0, 0.0),
            }
        } else if i == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    DmdModel::new(modes, lambda, b, 1.0 + rng.uniform(), ModeKind::Projected, 20).unwrap()
}

/// Ranking by a plain full sort on (importance desc, |λ| desc, index asc).
fn brute_force_top(values: &[f64], model: &DmdModel, r: usize) -> Vec<usize> {
    let mut keyed: Vec<(f64, f64, usize)> = values.iter().enumerate().map(|(i, &v)| (v, model.lambda[i].norm(), i)).collect();
    // Bubble sort keeps this oracle independent of the library's comparator.
    for a in 0..keyed.len() {
        for b in 0..keyed.len() - 1 - a {
            let (x, y) = (keyed[b], keyed[b + 1]);
            let swap = x.0 < y.0 || (x.0 == y.0 && (x.1 < y.1 || (x.1 == y.1 && x.2 > y.2)));
            if swap {
                keyed.swap(b, b + 1);
            }
        }
    }
    let mut out: Vec<usize> = keyed[..r].iter().map(|k| k.2).collect();
    out.sort_unstable();
    out
}

/// Integral score of a single mode with `σ T = x`, `T = 3 s`.
fn integral_at(x: f64, amp: f64) -> f64 {
    let t = 3.0;
    let modes = ComplexMatrix::from_fn(1, 1, |_, _| Complex64::new(1.0, 0.0));
    let lambda = Complex64::new((x / t).exp(), 0.0);
    let m = DmdModel::new(modes, vec![lambda], vec![Complex64::new(amp, 0.0)], 1.0, ModeKind::Projected, 4).unwrap();
    importance_integral(&m, t).values[0]
}

/// The real first snapshot `Ψ b` the model was built around.
fn coordinate_x1(model: &DmdModel) -> Vec<f64> {
    model.modes.matvec(&model.b).unwrap().iter().map(|z| z.re).collect()
}

#[test]
fn repeated_selection_is_identical() {
    let m = conjugate_model(3, 4, 3);
    let x1 = coordinate_x1(&m);
    for c in Criterion::ALL {
        let a = select_modes(&m, c, 5, &x1, SelectOptions::default()).unwrap();
        let b = select_modes(&m, c, 5, &x1, SelectOptions::default()).unwrap();
        assert_eq!(a.selected, b.selected);
        assert_eq!(a.model, b.model);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn selection_matches_full_sort_for_real_spectra(seed in any::<u64>(), reals in 2usize..10, r in 1usize..10) {
        let m = conjugate_model(seed, 0, reals);
        let r = r.min(reals);
        let x1 = coordinate_x1(&m);
        for c in SCORED {
            let imp = importance(&m, c, SelectOptions::default());
            let sel = select_modes(&m, c, r, &x1, SelectOptions::default()).unwrap();
            prop_assert_eq!(sel.selected, brute_force_top(&imp.values, &m, r));
        }
    }

    #[test]
    fn positive_scaling_keeps_the_ranking(seed in any::<u64>(), scale in 1e-3f64..1e3, r in 1usize..8) {
        let m = conjugate_model(seed, 3, 3);
        let mut scaled = m.clone();
        for b in scaled.b.iter_mut() {
            *b *= scale;
        }
        let x1 = coordinate_x1(&m);
        let xs: Vec<f64> = x1.iter().map(|v| v * scale).collect();
        for c in SCORED {
            let i0 = importance(&m, c, SelectOptions::default());
            let i1 = importance(&scaled, c, SelectOptions::default());
            for (a, b) in i0.values.iter().zip(&i1.values) {
                prop_assert!((b - scale * a).abs() <= 1e-12 * (scale * a).max(1e-300));
            }
            let s0 = select_modes(&m, c, r, &x1, SelectOptions::default()).unwrap();
            let s1 = select_modes(&scaled, c, r, &xs, SelectOptions::default()).unwrap();
            prop_assert_eq!(s0.selected, s1.selected);
        }
    }

    #[test]
    fn selection_is_closed_under_conjugation(seed in any::<u64>(), pairs in 1usize..5, reals in 0usize..4, r in 1usize..12) {
        let m = conjugate_model(seed, pairs, reals);
        let r = r.min(m.q());
        let x1 = coordinate_x1(&m);
        for c in Criterion::ALL {
            let sel = select_modes(&m, c, r, &x1, SelectOptions::default()).unwrap();
            prop_assert!(sel.selected.len() >= r && sel.selected.len() <= r + 1);
            for &i in &sel.selected {
                if let Some(j) = m.conjugate_partner(i) {
                    prop_assert!(sel.selected.contains(&j));
                }
            }
            let rec = sel.model.reconstruct(2.5);
            let norm = rec.values.iter().map(|v| v * v).sum::<f64>().sqrt();
            prop_assert!(rec.imag_norm <= 1e-8 * norm.max(1e-300));
        }
    }

    #[test]
    fn integral_criterion_follows_its_series_near_zero(x in -1e-4f64..1e-4, amp in 0.1f64..10.0) {
        let i = integral_at(x, amp);
        // (e^x − 1)/x = 1 + x/2 + x²/6 + O(x³); the series limit branch
        // below |x| = 1e-8 contributes at most 5e-9 relative.
        let series = amp * (1.0 + x / 2.0 + x * x / 6.0);
        prop_assert!((i - series).abs() <= 6e-9 * amp);
    }

    #[test]
    fn integral_criterion_is_continuous_at_zero(x in -2e-6f64..2e-6, amp in 0.1f64..10.0) {
        let i = integral_at(x, amp);
        prop_assert!((i - amp).abs() <= 1e-6 * amp);
    }
}

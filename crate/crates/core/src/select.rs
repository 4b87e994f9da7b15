//! Mode ranking and truncation.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::dmd::{DmdError, DmdModel, Result};
use crate::linalg::pinv_apply_real;

/// Largest exponent fed to `exp` before the value is clamped.
const EXP_CLAMP: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Criterion {
    /// Keep the first `r` modes in model order.
    Early,
    /// Initial amplitude `|bᵢ|`.
    Amplitude,
    /// `|bᵢ| (e^{σᵢ} + e^{−σᵢ})`.
    Growth,
    /// Window-summed mode energy.
    Kou,
    /// Time-averaged amplitude over the window.
    Integral,
}

impl Criterion {
    pub const ALL: [Criterion; 5] = [
        Criterion::Early,
        Criterion::Amplitude,
        Criterion::Growth,
        Criterion::Kou,
        Criterion::Integral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Early => "early",
            Criterion::Amplitude => "amp",
            Criterion::Growth => "growth",
            Criterion::Kou => "kou",
            Criterion::Integral => "integral",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Criterion::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown criterion '{s}' (expected early, amp, growth, kou or integral)"))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelectOptions {
    /// Use `σᵢ ΔT` instead of `σᵢ` (1/s) in the growth criterion.
    pub normalized_growth: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    pub criterion: Criterion,
    /// Set where an exponential hit the overflow clamp.
    pub saturated: Vec<bool>,
}

impl ImportanceVector {
    fn plain(values: Vec<f64>, criterion: Criterion) -> Self {
        let saturated = vec![false; values.len()];
        ImportanceVector {
            values,
            criterion,
            saturated,
        }
    }

    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }
}

fn clamped_exp(x: f64) -> (f64, bool) {
    if x > EXP_CLAMP {
        (EXP_CLAMP.exp(), true)
    } else {
        (x.exp(), false)
    }
}

/// Rank-based scores `q − i`, preserving model order.
pub fn importance_early(model: &DmdModel) -> ImportanceVector {
    let q = model.q();
    ImportanceVector::plain((0..q).map(|i| (q - i) as f64).collect(), Criterion::Early)
}

pub fn importance_amplitude(model: &DmdModel) -> ImportanceVector {
    ImportanceVector::plain(model.b.iter().map(|b| b.norm()).collect(), Criterion::Amplitude)
}

/// `2 |bᵢ| cosh(σᵢ)`, with `σᵢ = Re αᵢ` in 1/s unless `normalized`.
pub fn importance_growth(model: &DmdModel, normalized: bool) -> ImportanceVector {
    let mut values = Vec::with_capacity(model.q());
    let mut saturated = Vec::with_capacity(model.q());
    for (a, b) in model.alpha.iter().zip(&model.b) {
        let sigma = if normalized { a.re * model.dt } else { a.re };
        let (c, sat) = if sigma.abs() > EXP_CLAMP {
            (EXP_CLAMP.exp(), true)
        } else {
            (sigma.cosh(), false)
        };
        values.push(2.0 * b.norm() * c);
        saturated.push(sat);
    }
    ImportanceVector {
        values,
        criterion: Criterion::Growth,
        saturated,
    }
}

/// `|bᵢ| ‖ψᵢ‖² ΔT Σ_{j=1..m} |λᵢ|^{j−1}`, summed in closed form.
pub fn importance_kou(model: &DmdModel, m: usize) -> ImportanceVector {
    let mut values = Vec::with_capacity(model.q());
    let mut saturated = Vec::with_capacity(model.q());
    for (i, (l, b)) in model.lambda.iter().zip(&model.b).enumerate() {
        let a = l.norm();
        let psi2 = model.modes.column_norm(i).powi(2);
        let (sum, sat) = if a == 0.0 {
            (1.0, false)
        } else if a == 1.0 {
            (m as f64, false)
        } else {
            let d = a - 1.0;
            let x = m as f64 * d.ln_1p();
            if x > EXP_CLAMP {
                ((EXP_CLAMP.exp() - 1.0) / d, true)
            } else {
                (x.exp_m1() / d, false)
            }
        };
        values.push(b.norm() * psi2 * model.dt * sum);
        saturated.push(sat);
    }
    ImportanceVector {
        values,
        criterion: Criterion::Kou,
        saturated,
    }
}

/// `|bᵢ| (e^{σᵢT} − 1)/(σᵢT)`, equal to `|bᵢ|` when `|σᵢT| < 1e-8`.
pub fn importance_integral(model: &DmdModel, t_window: f64) -> ImportanceVector {
    let mut values = Vec::with_capacity(model.q());
    let mut saturated = Vec::with_capacity(model.q());
    for (a, b) in model.alpha.iter().zip(&model.b) {
        let x = a.re * t_window;
        let (factor, sat) = if x.abs() < 1e-8 {
            (1.0, false)
        } else if x > EXP_CLAMP {
            let (e, _) = clamped_exp(x);
            ((e - 1.0) / x, true)
        } else {
            (x.exp_m1() / x, false)
        };
        values.push(b.norm() * factor);
        saturated.push(sat);
    }
    ImportanceVector {
        values,
        criterion: Criterion::Integral,
        saturated,
    }
}

/// Scores for `criterion` using the model's snapshot count and window.
pub fn importance(model: &DmdModel, criterion: Criterion, opts: SelectOptions) -> ImportanceVector {
    match criterion {
        Criterion::Early => importance_early(model),
        Criterion::Amplitude => importance_amplitude(model),
        Criterion::Growth => importance_growth(model, opts.normalized_growth),
        Criterion::Kou => importance_kou(model, model.n_snapshots),
        Criterion::Integral => {
            let t = model.n_snapshots.saturating_sub(1) as f64 * model.dt;
            importance_integral(model, t)
        }
    }
}

/// Indices sorted by descending importance, then descending `|λ|`, then index.
pub fn ranking(model: &DmdModel, imp: &ImportanceVector) -> Vec<usize> {
    let mut order: Vec<usize> = (0..model.q()).collect();
    if imp.criterion == Criterion::Early {
        return order;
    }
    order.sort_by(|&i, &j| {
        imp.values[j]
            .total_cmp(&imp.values[i])
            .then(model.lambda[j].norm().total_cmp(&model.lambda[i].norm()))
            .then(i.cmp(&j))
    });
    order
}

#[derive(Debug, Clone)]
pub struct Selection {
    /// Retained modes in original index order, with amplitudes refitted.
    pub model: DmdModel,
    /// Original indices of the retained modes, ascending.
    pub selected: Vec<usize>,
    pub importance: ImportanceVector,
    /// The model the selection was taken from.
    pub source: DmdModel,
}

impl Selection {
    /// Report with one line per source mode.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mode_index,re_lambda,im_lambda,re_alpha,im_alpha,abs_b,importance,selected\n");
        for i in 0..self.source.q() {
            let l = self.source.lambda[i];
            let a = self.source.alpha[i];
            let _ = writeln!(
                out,
                "{i},{:e},{:e},{:e},{:e},{:e},{:e},{}",
                l.re,
                l.im,
                a.re,
                a.im,
                self.source.b[i].norm(),
                self.importance.values[i],
                self.selected.binary_search(&i).is_ok()
            );
        }
        out
    }
}

/// Keeps the `r` most important modes plus any missing conjugate partners
/// and refits `b` against the first snapshot `x1`.
pub fn select_modes(
    model: &DmdModel,
    criterion: Criterion,
    r: usize,
    x1: &[f64],
    opts: SelectOptions,
) -> Result<Selection> {
    let q = model.q();
    if r == 0 || r > q {
        return Err(DmdError::InvalidRank { rank: r, max: q });
    }
    if x1.len() != model.n() {
        return Err(DmdError::InvalidParameter(format!(
            "first snapshot has {} entries, modes have {}",
            x1.len(),
            model.n()
        )));
    }
    let imp = importance(model, criterion, opts);
    if imp.any_saturated() {
        log::warn!("{criterion} importance saturated for some modes");
    }
    let mut taken = vec![false; q];
    let mut count = 0;
    for i in ranking(model, &imp) {
        if count >= r {
            break;
        }
        if !taken[i] {
            taken[i] = true;
            count += 1;
        }
        if let Some(j) = model.conjugate_partner(i) {
            if !taken[j] {
                taken[j] = true;
                count += 1;
            }
        }
    }
    let selected: Vec<usize> = (0..q).filter(|&i| taken[i]).collect();
    let mut sub = model.subset(&selected);
    sub.b = pinv_apply_real(&sub.modes, x1)?.x;
    Ok(Selection {
        model: sub,
        selected,
        importance: imp,
        source: model.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmd::ModeKind;
    use crate::linalg::ComplexMatrix;
    use num_complex::Complex64;

    fn model(lambda: &[Complex64], b: &[Complex64], dt: f64, m: usize) -> DmdModel {
        let q = lambda.len();
        let modes = ComplexMatrix::from_fn(q, q, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
        DmdModel::new(modes, lambda.to_vec(), b.to_vec(), dt, ModeKind::Projected, m).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn names_round_trip() {
        for c in Criterion::ALL {
            assert_eq!(c.name().parse::<Criterion>().unwrap(), c);
        }
        assert!("energy".parse::<Criterion>().is_err());
    }

    #[test]
    fn amplitude_is_modulus() {
        let m = model(&[c(0.5, 0.0), c(0.2, 0.0)], &[c(1.0, 0.0), c(0.0, 0.0)], 1.0, 3);
        assert_eq!(importance_amplitude(&m).values, vec![1.0, 0.0]);
        let m = model(&[c(0.5, 0.0)], &[c(3.0, 4.0)], 1.0, 3);
        assert_eq!(importance_amplitude(&m).values, vec![5.0]);
    }

    #[test]
    fn growth_examples() {
        let e = std::f64::consts::E;
        let m = model(&[c(e, 0.0), c(1.0 / e, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0); 3], 1.0, 3);
        let g = importance_growth(&m, false);
        let want = e + 1.0 / e;
        assert!((g.values[0] - want).abs() <= 1e-12 * want);
        assert!((g.values[1] - want).abs() <= 1e-12 * want);
        assert_eq!(g.values[2], 2.0);
    }

    #[test]
    fn growth_units_and_saturation() {
        // σ = ln(2)/dt with dt = 1e-3 gives σ ≈ 693 1/s, σ ΔT = ln 2.
        let m = model(&[c(2.0, 0.0)], &[c(1.0, 0.0)], 1e-3, 3);
        let raw = importance_growth(&m, false);
        let norm = importance_growth(&m, true);
        assert!(!raw.saturated[0]);
        assert!((norm.values[0] - 2.5).abs() < 1e-12);
        let m = model(&[c(2.0, 0.0)], &[c(1.0, 0.0)], 1e-4, 3);
        let g = importance_growth(&m, false);
        assert!(g.saturated[0] && g.values[0].is_finite());
    }

    #[test]
    fn kou_examples() {
        // ‖ψ‖² = 3 via a scaled mode column.
        let s = 3f64.sqrt();
        let modes = ComplexMatrix::from_fn(2, 1, |i, _| if i == 0 { c(s, 0.0) } else { c(0.0, 0.0) });
        let m = DmdModel::new(modes, vec![c(0.5, 0.0)], vec![c(2.0, 0.0)], 1.0, ModeKind::Projected, 4).unwrap();
        let direct = 2.0 * s * s * (1.0 + 0.5 + 0.25 + 0.125);
        assert!((importance_kou(&m, 4).values[0] - 11.25).abs() < 1e-12);
        assert!((direct - 11.25).abs() < 1e-12);

        let m = model(&[c(0.0, 1.0)], &[c(2.0, 0.0)], 0.5, 7);
        assert!((importance_kou(&m, 7).values[0] - 7.0 * 2.0 * 0.5).abs() < 1e-12);
    }

    #[test]
    fn kou_matches_summation_near_unit_modulus() {
        for &a in &[0.3, 0.999_999, 1.000_001, 1.02] {
            let m = model(&[c(a, 0.0)], &[c(1.0, 0.0)], 1.0, 50);
            let direct: f64 = (0..50).map(|j| a.powi(j)).sum();
            let got = importance_kou(&m, 50).values[0];
            assert!((got - direct).abs() <= 1e-9 * direct, "{a}: {got} vs {direct}");
        }
    }

    #[test]
    fn integral_examples() {
        let m = model(&[c(1.0, 0.0)], &[c(3.0, 0.0)], 1.0, 3);
        assert_eq!(importance_integral(&m, 2.0).values[0], 3.0);
        let m = model(&[c(2.0, 0.0)], &[c(1.0, 0.0)], 1.0, 3);
        let got = importance_integral(&m, 1.0).values[0];
        assert!((got - 1.0 / 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn integral_matches_trapezoid_quadrature() {
        let sigma: f64 = -2.0;
        let m = model(&[c(sigma.exp(), 0.0)], &[c(1.0, 0.0)], 1.0, 2);
        let got = importance_integral(&m, 1.0).values[0];
        let n = 1_000_000;
        let h = 1.0 / n as f64;
        let mut s = 0.5 * (1.0 + sigma.exp());
        for k in 1..n {
            s += (sigma * k as f64 * h).exp();
        }
        let quad = s * h;
        assert!((got - quad).abs() < 1e-10, "{got} vs {quad}");
        assert!((got - (1.0 - (-2f64).exp()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn early_keeps_model_order() {
        let m = model(&[c(0.9, 0.0), c(0.8, 0.0), c(0.7, 0.0)], &[c(0.1, 0.0), c(5.0, 0.0), c(9.0, 0.0)], 1.0, 4);
        let x1 = vec![0.1, 5.0, 9.0];
        let s = select_modes(&m, Criterion::Early, 2, &x1, SelectOptions::default()).unwrap();
        assert_eq!(s.selected, vec![0, 1]);
        let s = select_modes(&m, Criterion::Amplitude, 2, &x1, SelectOptions::default()).unwrap();
        assert_eq!(s.selected, vec![1, 2]);
    }

    #[test]
    fn ties_break_on_modulus_then_index() {
        let m = model(&[c(0.5, 0.0), c(0.9, 0.0), c(0.9, 0.0)], &[c(1.0, 0.0); 3], 1.0, 4);
        let imp = importance_amplitude(&m);
        assert_eq!(ranking(&m, &imp), vec![1, 2, 0]);
    }

    #[test]
    fn partner_is_forced_in() {
        let m = model(&[c(0.9, 0.0), c(0.5, 0.4), c(0.5, -0.4)], &[c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)], 1.0, 4);
        let x1 = vec![2.0, 1.0, 1.0];
        let s = select_modes(&m, Criterion::Amplitude, 2, &x1, SelectOptions::default()).unwrap();
        assert_eq!(s.selected, vec![0, 1, 2]);
    }

    #[test]
    fn full_selection_keeps_everything_and_reports() {
        let m = model(&[c(0.9, 0.0), c(0.5, 0.0)], &[c(2.0, 0.0), c(1.0, 0.0)], 1.0, 4);
        let s = select_modes(&m, Criterion::Kou, 2, &[2.0, 1.0], SelectOptions::default()).unwrap();
        assert_eq!(s.selected, vec![0, 1]);
        assert_eq!(s.model, m);
        let csv = s.to_csv();
        assert!(csv.starts_with("mode_index,re_lambda,im_lambda,re_alpha,im_alpha,abs_b,importance,selected\n"));
        assert_eq!(csv.lines().count(), 3);
        assert!(select_modes(&m, Criterion::Kou, 3, &[2.0, 1.0], SelectOptions::default()).is_err());
    }
}

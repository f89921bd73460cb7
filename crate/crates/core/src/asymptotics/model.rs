//! Catalogue of the terms in the large-`x` expansion of a ground state and a
//! fixed-exponent joint fit over them.
//!
//! Writing `Q = k ⋆ f(Q)` and expanding `|x - y|^{-(nα+1)}` in `y / x` gives
//! kernel-moment terms `k_n (nα+1)_{2m}/(2m)! M_{2m} x^{-(nα+1+2m)}` with
//! `M_{2m} = ∫ y^{2m} f(Q)`, as long as the moment converges. The
//! nonlinearity contributes `(∫k) f(Q(x))`, whose leading order is
//! `a₁^p x^{-p(α+1)}`; the interaction of the two algebraic tails adds
//! terms at `nα + p(α+1)` (with a logarithm when a moment is borderline).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ProblemParams;
use crate::special::{gamma, rising_factorial};
use crate::specfun::kernel_coefficient;
use crate::spectral::Profile;

use super::fit::{eval_basis, joint_fit_columns, window_samples, Basis, Period, Window};

/// Highest kernel index and moment order used by the catalogue.
const MAX_KERNEL_TERMS: usize = 6;
const MAX_MOMENT: usize = 3;
/// A moment `∫ y^{2m} f(Q)` is treated as borderline when the decay
/// exponent of `f(Q)` lies within this distance of `2m + 1`.
const BORDERLINE: f64 = 0.25;
const SAME_EXPONENT: f64 = 1e-9;

/// Functional form of a term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    /// `x^{-s}`
    Power { s: f64 },
    /// `x^{-s} ln x`
    PowerLog { s: f64 },
    /// `f(Q(x))` sampled from the profile itself.
    Nonlinear,
}

/// One term with its decay exponent and, when the theory fixes it, the
/// predicted coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub shape: Shape,
    pub exponent: f64,
    pub predicted: Option<f64>,
}

impl Term {
    fn power(s: f64, predicted: Option<f64>) -> Self {
        Self { shape: Shape::Power { s }, exponent: s, predicted }
    }

    pub fn is_power(&self, s: f64) -> bool {
        matches!(self.shape, Shape::Power { s: t } if (t - s).abs() < SAME_EXPONENT)
    }
}

/// Even moments `M_{2m} = ∫ x^{2m} f(Q)`, `None` where divergent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub even: Vec<Option<f64>>,
}

impl Moments {
    /// Trapezoid sums over the box plus the continuation of the leading tail
    /// `a₁^p |x|^{-p(α+1)}` beyond `±L`.
    pub fn from_profile(q: &Profile, params: &ProblemParams, a1: f64) -> Self {
        let grid = q.grid;
        let dx = grid.spacing();
        let l = grid.half_length;
        let decay = params.p * (params.alpha + 1.0);
        let tail_amp = a1.abs().powf(params.p) * a1.signum();
        let even = (0..=MAX_MOMENT)
            .map(|m| {
                let order = 2 * m as i32;
                if decay <= order as f64 + 1.0 {
                    return None;
                }
                let box_sum: f64 = q
                    .values
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| grid.x(j).powi(order) * params.f(v))
                    .sum::<f64>()
                    * dx;
                let e = decay - order as f64 - 1.0;
                Some(box_sum + 2.0 * tail_amp * l.powf(-e) / e)
            })
            .collect();
        Self { even }
    }

    fn get(&self, m: usize) -> Option<f64> {
        self.even.get(m).copied().flatten()
    }
}

/// Terms with decay exponent at most `cap`, sorted by exponent; terms with
/// equal shape are merged (predictions add).
pub fn catalogue(params: &ProblemParams, moments: &Moments, integral_k: f64, cap: f64) -> Result<Vec<Term>> {
    let alpha = params.alpha;
    let decay = params.p * (alpha + 1.0);
    let borderline = (1..=MAX_MOMENT).find(|&m| (decay - (2 * m) as f64 - 1.0).abs() < BORDERLINE);
    let mut terms = Vec::new();
    for n in 1..=MAX_KERNEL_TERMS {
        let kn = kernel_coefficient(n, alpha)?;
        let base = n as f64 * alpha + 1.0;
        for m in 0..=MAX_MOMENT {
            let s = base + 2.0 * m as f64;
            if s > cap {
                break;
            }
            if m > 0 && borderline.is_some_and(|b| b <= m) {
                break;
            }
            let Some(mm) = moments.get(m) else { break };
            let weight = rising_factorial(base, 2 * m as u32) / gamma(2.0 * m as f64 + 1.0);
            terms.push(Term::power(s, Some(kn * weight * mm)));
        }
        let cross = base + decay - 1.0;
        if n <= 2 && cross <= cap {
            terms.push(Term::power(cross, None));
            if n == 1 && borderline.is_some() {
                terms.push(Term { shape: Shape::PowerLog { s: cross }, exponent: cross, predicted: None });
            }
        }
    }
    if decay <= cap {
        terms.push(Term { shape: Shape::Nonlinear, exponent: decay, predicted: Some(integral_k) });
    }
    terms.sort_by(|a, b| a.exponent.total_cmp(&b.exponent));
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    for t in terms {
        match merged.iter_mut().find(|m| same_shape(&m.shape, &t.shape)) {
            Some(m) => {
                m.predicted = match (m.predicted, t.predicted) {
                    (Some(a), Some(b)) => Some(a + b),
                    _ => None,
                }
            }
            None => merged.push(t),
        }
    }
    Ok(merged)
}

fn same_shape(a: &Shape, b: &Shape) -> bool {
    match (a, b) {
        (Shape::Power { s }, Shape::Power { s: t }) | (Shape::PowerLog { s }, Shape::PowerLog { s: t }) => {
            (s - t).abs() < SAME_EXPONENT
        }
        (Shape::Nonlinear, Shape::Nonlinear) => true,
        _ => false,
    }
}

/// Data for a model fit: the `j`-th derivative of the profile and, when the
/// model has a [`Shape::Nonlinear`] term, the `j`-th derivative of `f(Q)`.
pub struct FitData<'a> {
    pub values: &'a Profile,
    pub nonlinear: Option<&'a Profile>,
    pub j: u32,
    pub period: Period,
}

/// Coefficients of every term; pinned terms carry their prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFit {
    pub terms: Vec<Term>,
    pub coefficients: Vec<f64>,
    pub pinned: Vec<bool>,
    pub window: Window,
    /// Window samples `(x, value)` of the fitted data.
    pub samples: Vec<(f64, f64)>,
}

impl ModelFit {
    pub fn index_of(&self, pred: impl Fn(&Term) -> bool) -> Option<usize> {
        self.terms.iter().position(pred)
    }

    /// Data minus every term except those in `keep`.
    pub fn residual(&self, data: &FitData<'_>, keep: &[usize]) -> Vec<(f64, f64)> {
        self.samples
            .iter()
            .map(|&(x, v)| {
                let removed: f64 = self
                    .terms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !keep.contains(i))
                    .map(|(i, t)| self.coefficients[i] * eval_term(t, x, data))
                    .sum();
                (x, v - removed)
            })
            .collect()
    }
}

/// Value of the `j`-th derivative of a term at `x`.
pub fn eval_term(t: &Term, x: f64, data: &FitData<'_>) -> f64 {
    match t.shape {
        Shape::Power { s } => eval_basis(&Basis::Power { s }, x, data.j, data.period),
        Shape::PowerLog { s } => eval_basis(&Basis::PowerLog { s }, x, data.j, data.period),
        Shape::Nonlinear => match data.nonlinear {
            Some(g) => sample_at(g, x),
            None => f64::NAN,
        },
    }
}

fn sample_at(u: &Profile, x: f64) -> f64 {
    let grid = u.grid;
    let j = ((x + grid.half_length) / grid.spacing()).round() as usize;
    u.values[j.min(grid.n_points - 1)]
}

/// Joint weighted least squares over the free terms after subtracting the
/// pinned ones (`pin(term)` true and a prediction available).
pub fn fit_model(data: &FitData<'_>, terms: &[Term], window: Window, pin: impl Fn(&Term) -> bool) -> Result<ModelFit> {
    if terms.iter().any(|t| t.shape == Shape::Nonlinear) && data.nonlinear.is_none() {
        return Err(Error::Precondition("nonlinear term requires samples of f(Q)".into()));
    }
    let samples = window_samples(data.values, &window)?;
    let pinned: Vec<bool> = terms.iter().map(|t| pin(t) && t.predicted.is_some()).collect();
    let free: Vec<usize> = (0..terms.len()).filter(|&i| !pinned[i]).collect();
    if free.is_empty() {
        return Err(Error::FitDomain("every term is pinned".into()));
    }
    let target: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, v)| {
            let fixed: f64 = terms
                .iter()
                .zip(&pinned)
                .filter(|(_, &p)| p)
                .map(|(t, _)| t.predicted.unwrap_or(0.0) * eval_term(t, x, data))
                .sum();
            (x, v - fixed)
        })
        .collect();
    let columns: Vec<_> = free.iter().map(|&i| move |x: f64| eval_term(&terms[i], x, data)).collect();
    let lin = joint_fit_columns(&target, &columns)?;
    let mut coefficients: Vec<f64> = terms.iter().map(|t| t.predicted.unwrap_or(0.0)).collect();
    for (k, &i) in free.iter().enumerate() {
        coefficients[i] = lin.coefficients[k];
    }
    Ok(ModelFit { terms: terms.to_vec(), coefficients, pinned, window, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NonlinearityKind;
    use crate::spectral::Grid;

    fn moments(values: &[Option<f64>]) -> Moments {
        Moments { even: values.to_vec() }
    }

    #[test]
    fn catalogue_dispersion_case() {
        let params = ProblemParams::new(1.5, 3.0, NonlinearityKind::IntegerPower).unwrap();
        let m = moments(&[Some(2.0), Some(0.5), Some(0.3), None]);
        let terms = catalogue(&params, &m, 1.0, 6.0).unwrap();
        let exps: Vec<f64> = terms.iter().map(|t| t.exponent).collect();
        assert_eq!(exps, vec![2.5, 4.0, 4.5, 5.5, 6.0]);
        let k1 = kernel_coefficient(1, 1.5).unwrap();
        let a3 = terms[2].predicted.unwrap();
        assert!((a3 - 2.5 * 3.5 / 2.0 * k1 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn catalogue_borderline_moment_brings_logarithm() {
        // p(α+1) = 3: ∫x² f(Q) diverges logarithmically.
        let params = ProblemParams::new(1.5, 1.2, NonlinearityKind::SignedPower).unwrap();
        let m = moments(&[Some(2.0), None, None, None]);
        let terms = catalogue(&params, &m, 1.0, 5.0).unwrap();
        assert_eq!(terms[0].exponent, 2.5);
        assert_eq!(terms[1].shape, Shape::Nonlinear);
        assert!(terms.iter().any(|t| matches!(t.shape, Shape::PowerLog { s } if (s - 4.5).abs() < 1e-12)));
        assert!(terms.iter().any(|t| t.is_power(4.0)));
    }

    #[test]
    fn coincident_terms_merge() {
        // α = 1: 3α+1 = α+3 = 4.
        let params = ProblemParams::new(1.0, 2.0, NonlinearityKind::IntegerPower).unwrap();
        let m = moments(&[Some(1.0), Some(1.0), None, None]);
        let terms = catalogue(&params, &m, 1.0, 4.5).unwrap();
        let fours: Vec<&Term> = terms.iter().filter(|t| t.is_power(4.0)).collect();
        assert_eq!(fours.len(), 1);
    }

    #[test]
    fn pinned_terms_are_subtracted() {
        let l = 400.0;
        let grid = Grid::new(l, 1 << 13).unwrap();
        let per = Some(l);
        let q = Profile::from_fn(grid, |x| {
            let x = x.abs().max(1.0);
            1.5 * eval_basis(&Basis::Power { s: 2.0 }, x, 0, per) + 0.7 * eval_basis(&Basis::Power { s: 3.0 }, x, 0, per)
        })
        .unwrap();
        let terms = vec![Term::power(2.0, None), Term::power(3.0, Some(0.7))];
        let data = FitData { values: &q, nonlinear: None, j: 0, period: per };
        let fit = fit_model(&data, &terms, Window::new(20.0, 200.0).unwrap(), |t| t.exponent > 2.5).unwrap();
        assert!((fit.coefficients[0] - 1.5).abs() < 1e-9);
        assert_eq!(fit.pinned, vec![false, true]);
        let r = fit.residual(&data, &[]);
        assert!(r.iter().all(|(_, v)| v.abs() < 1e-12));
    }
}

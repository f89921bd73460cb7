//! Real quadrature primitives used by the kernel evaluators.
//!
//! * [`gauss_kronrod`]: globally adaptive 21-point Gauss–Kronrod on a finite
//!   interval, QUADPACK-style error estimate.
//! * [`exp_sinh`]: double-exponential rule on `[0, inf)`, robust to algebraic
//!   endpoint singularities and (sub-)exponential decay.
//! * [`tanh_sinh`]: double-exponential rule on a finite interval.
//! * [`EpsilonTable`]: Wynn's epsilon algorithm for accelerating partial sums.
//! * [`oscillatory`]: integrates between consecutive zeros of an oscillating
//!   factor and extrapolates the alternating partial sums.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Weights of the embedded 10-point Gauss rule on XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One application of the 21-point Kronrod rule with its Gauss companion.
pub fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Estimate {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let res_asc = res_asc * half.abs();
    let value = res_k * half;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    let round = 50.0 * f64::EPSILON * (res_k * half).abs();
    Estimate { value, abs_err: err.max(round) }
}

struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.abs_err == other.est.abs_err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.abs_err.total_cmp(&other.est.abs_err)
    }
}

/// Tolerances for the adaptive rules. Convergence means
/// `err <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Tolerance {
    pub fn relative(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, max_segments: 4000 }
    }

    pub fn with_abs(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
pub fn gauss_kronrod<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<Estimate> {
    if a == b {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    let first = gk21(&mut f, a, b);
    let mut total = first.value;
    let mut total_err = first.abs_err;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, est: first });
    while total_err > tol.target(total) {
        if heap.len() >= tol.max_segments {
            return Err(Error::Accuracy { achieved: total_err, requested: tol.target(total) });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            return Err(Error::Accuracy { achieved: total_err, requested: tol.target(total) });
        }
        let left = gk21(&mut f, worst.a, mid);
        let right = gk21(&mut f, mid, worst.b);
        total += left.value + right.value - worst.est.value;
        total_err += left.abs_err + right.abs_err - worst.est.abs_err;
        heap.push(Segment { a: worst.a, b: mid, est: left });
        heap.push(Segment { a: mid, b: worst.b, est: right });
        // Re-sum periodically to avoid drift from incremental updates.
        if heap.len() % 64 == 0 {
            total = heap.iter().map(|s| s.est.value).sum();
            total_err = heap.iter().map(|s| s.est.abs_err).sum();
        }
    }
    Ok(Estimate { value: total, abs_err: total_err })
}

/// Double-exponential (exp-sinh) quadrature of `f` over `[0, inf)`.
///
/// The substitution `x = exp(pi/2 sinh t)` is applied and the trapezoid rule
/// refined by step halving until two successive levels agree to `rel_tol`.
pub fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, rel_tol: f64, abs_tol: f64) -> Result<Estimate> {
    const T_MAX: f64 = 4.5;
    const MAX_LEVEL: usize = 9;
    let half_pi = 0.5 * std::f64::consts::PI;
    let mut eval = |t: f64| -> f64 {
        let s = half_pi * t.sinh();
        let x = s.exp();
        let w = half_pi * t.cosh() * x;
        if x == 0.0 || !x.is_finite() || !w.is_finite() {
            return 0.0;
        }
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * w
        }
    };
    let mut h = 0.5;
    // Level 0: integer multiples of h.
    let mut sum = eval(0.0);
    let mut steps_pos = 0usize;
    let mut steps_neg = 0usize;
    for dir in [1.0, -1.0] {
        let mut k = 1usize;
        let mut small = 0;
        loop {
            let t = dir * k as f64 * h;
            if t.abs() > T_MAX {
                break;
            }
            let term = eval(t);
            sum += term;
            if term.abs() <= 1e-18 * sum.abs() {
                small += 1;
                if small >= 3 {
                    break;
                }
            } else {
                small = 0;
            }
            k += 1;
        }
        if dir > 0.0 {
            steps_pos = k;
        } else {
            steps_neg = k;
        }
    }
    let mut estimate = sum * h;
    let mut t_hi = steps_pos as f64 * h;
    let mut t_lo = -(steps_neg as f64) * h;
    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = t_lo + h;
        let mut add = 0.0;
        while t < t_hi {
            add += eval(t);
            t += 2.0 * h;
        }
        // Extend the range if the new tail points are still significant.
        let mut ext = 0.0;
        for dir in [1.0, -1.0] {
            let mut edge = if dir > 0.0 { t_hi } else { t_lo };
            let mut small = 0;
            loop {
                let next = edge + dir * h;
                if next.abs() > T_MAX {
                    break;
                }
                let term = eval(next);
                ext += term;
                edge = next;
                if term.abs() <= 1e-18 * (sum + add).abs() {
                    small += 1;
                    if small >= 4 {
                        break;
                    }
                } else {
                    small = 0;
                }
            }
            if dir > 0.0 {
                t_hi = edge;
            } else {
                t_lo = edge;
            }
        }
        sum += add + ext;
        let next = sum * h;
        let err = (next - estimate).abs();
        estimate = next;
        if err <= abs_tol.max(rel_tol * estimate.abs()) && _level >= 2 {
            return Ok(Estimate { value: estimate, abs_err: err });
        }
        if _level == MAX_LEVEL {
            return Err(Error::Accuracy { achieved: err, requested: abs_tol.max(rel_tol * estimate.abs()) });
        }
    }
    unreachable!()
}

/// Double-exponential (tanh-sinh) quadrature of `f` over a finite `[a, b]`.
///
/// Abscissae near the endpoints are formed from their distance to the
/// endpoint, so algebraic endpoint singularities are resolved.
pub fn tanh_sinh<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Estimate> {
    const T_MAX: f64 = 4.0;
    const MAX_LEVEL: usize = 9;
    if a == b {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    let half_pi = 0.5 * std::f64::consts::PI;
    let half = 0.5 * (b - a);
    let mut eval = |t: f64| -> f64 {
        let u = half_pi * t.abs().sinh();
        let e = (-2.0 * u).exp();
        // Distance from the nearer endpoint and the Jacobian.
        let d = half * 2.0 * e / (1.0 + e);
        let w = half * half_pi * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        if d == 0.0 || w == 0.0 {
            return 0.0;
        }
        let x = if t < 0.0 { a + d } else if t > 0.0 { b - d } else { a + half };
        // Abscissae that round onto an endpoint are dropped.
        if x == a || x == b {
            return 0.0;
        }
        let fx = f(x);
        if fx == 0.0 {
            0.0
        } else {
            fx * w
        }
    };
    let mut h = 0.5;
    let n0 = (T_MAX / h) as i64;
    let mut sum: f64 = (-n0..=n0).map(|k| eval(k as f64 * h)).sum();
    let mut estimate = sum * h;
    for level in 1..=MAX_LEVEL {
        h *= 0.5;
        let n = (T_MAX / h) as i64;
        let mut add = 0.0;
        let mut k = -n + if n % 2 == 0 { 1 } else { 0 };
        while k <= n {
            add += eval(k as f64 * h);
            k += 2;
        }
        sum += add;
        let next = sum * h;
        let err = (next - estimate).abs();
        estimate = next;
        let target = abs_tol.max(rel_tol * estimate.abs());
        if level >= 2 && err <= target {
            return Ok(Estimate { value: estimate, abs_err: err });
        }
        if level == MAX_LEVEL {
            return Err(Error::Accuracy { achieved: err, requested: target });
        }
    }
    unreachable!()
}

/// Wynn epsilon extrapolation of a sequence of partial sums.
///
/// Keeps the full triangular table; sequences here are short (< 200 terms).
#[derive(Debug, Default, Clone)]
pub struct EpsilonTable {
    sums: Vec<f64>,
    history: Vec<f64>,
}

impl EpsilonTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    /// Appends a partial sum and returns the current extrapolated limit with an
    /// error estimate taken from the spread of the last three limits.
    pub fn push(&mut self, s: f64) -> Estimate {
        self.sums.push(s);
        let limit = Self::extrapolate(&self.sums);
        self.history.push(limit);
        let n = self.history.len();
        let err = if n >= 3 {
            let a = self.history[n - 1];
            (a - self.history[n - 2]).abs() + (a - self.history[n - 3]).abs()
        } else {
            f64::INFINITY
        };
        Estimate { value: limit, abs_err: err }
    }

    fn extrapolate(s: &[f64]) -> f64 {
        let n = s.len();
        if n < 3 {
            return s[n - 1];
        }
        // Use at most the last 2m+1 entries, m <= 25.
        let start = n.saturating_sub(51);
        let mut prev: Vec<f64> = vec![0.0; n - start + 1]; // eps_{-1}
        let mut cur: Vec<f64> = s[start..].to_vec(); // eps_0
        let mut best = cur[cur.len() - 1];
        let mut col = 0;
        while cur.len() > 1 {
            let mut next = Vec::with_capacity(cur.len() - 1);
            let mut broken = false;
            for i in 0..cur.len() - 1 {
                let diff = cur[i + 1] - cur[i];
                if diff == 0.0 || !diff.is_finite() {
                    broken = true;
                    break;
                }
                next.push(prev[i + 1] + 1.0 / diff);
            }
            if broken {
                break;
            }
            col += 1;
            prev = cur;
            cur = next;
            if col % 2 == 0 && !cur.is_empty() {
                let candidate = cur[cur.len() - 1];
                if candidate.is_finite() {
                    best = candidate;
                }
            }
        }
        best
    }
}

/// Integrates `f` over `[0, inf)` when `f` changes sign at
/// `first_break + k * step` (k >= 0): the first piece is `[0, first_break]`,
/// later pieces are consecutive half-periods. Partial sums are accelerated
/// with the epsilon algorithm.
pub fn oscillatory<F: FnMut(f64) -> f64>(
    mut f: F,
    first_break: f64,
    step: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_pieces: usize,
) -> Result<Estimate> {
    let piece_tol = Tolerance { abs_tol: 0.0, rel_tol: 0.1 * rel_tol, max_segments: 400 };
    // The first piece may carry an endpoint singularity at the origin.
    let mut head = match tanh_sinh(&mut f, 0.0, first_break, 0.1 * rel_tol, 0.1 * abs_tol) {
        Ok(est) => est,
        Err(_) => gauss_kronrod(&mut f, 0.0, first_break, piece_tol.with_abs(0.1 * abs_tol))?,
    };
    let mut sum = head.value;
    let mut table = EpsilonTable::new();
    table.push(sum);
    let mut agree = 0;
    let mut last_piece = f64::INFINITY;
    let mut a = first_break;
    for k in 0..max_pieces {
        let b = first_break + (k + 1) as f64 * step;
        let piece = gauss_kronrod(&mut f, a, b, piece_tol.with_abs(1e-3 * abs_tol))?;
        head.abs_err += piece.abs_err;
        sum += piece.value;
        a = b;
        // Plain summation has converged: the remaining pieces are negligible.
        let target = abs_tol.max(rel_tol * sum.abs());
        if piece.value.abs() <= 1e-3 * target && last_piece.abs() <= 1e-3 * target {
            return Ok(Estimate { value: sum, abs_err: head.abs_err + piece.value.abs() });
        }
        last_piece = piece.value;
        let ext = table.push(sum);
        if k >= 6 && ext.abs_err <= abs_tol.max(rel_tol * ext.value.abs()) {
            agree += 1;
            if agree >= 2 {
                return Ok(Estimate { value: ext.value, abs_err: ext.abs_err + head.abs_err });
            }
        } else {
            agree = 0;
        }
    }
    Err(Error::Accuracy { achieved: last_piece.abs(), requested: abs_tol.max(rel_tol * sum.abs()) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gk_polynomial_exact() {
        let est = gauss_kronrod(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, Tolerance::relative(1e-12)).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((est.value - exact).abs() < 1e-12);
    }

    #[test]
    fn gk_endpoint_singularity() {
        // int_0^1 x^(-1/2) dx = 2
        let est = gauss_kronrod(|x| x.powf(-0.5), 0.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        assert!((est.value - 2.0).abs() < 1e-10, "{}", est.value);
        // int_0^1 ln x dx = -1
        let est = gauss_kronrod(|x| x.ln(), 0.0, 1.0, Tolerance::relative(1e-12)).unwrap();
        assert!((est.value + 1.0).abs() < 1e-11);
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        let est = tanh_sinh(|x| x.powf(-1.0 / 3.0) * (1.0 - x).sqrt(), 0.0, 1.0, 1e-13, 0.0).unwrap();
        // B(2/3, 3/2)
        let want = crate::special::gamma(2.0 / 3.0) * crate::special::gamma(1.5) / crate::special::gamma(13.0 / 6.0);
        assert!((est.value - want).abs() < 1e-12 * want, "{} vs {want}", est.value);
        let est = tanh_sinh(|x| x.exp(), -1.0, 3.0, 1e-14, 0.0).unwrap();
        assert!((est.value - (3f64.exp() - (-1f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn gk_reports_failure() {
        let tol = Tolerance { abs_tol: 0.0, rel_tol: 1e-15, max_segments: 4 };
        assert!(matches!(
            gauss_kronrod(|x| (1.0 / x).sin(), 1e-3, 1.0, tol),
            Err(Error::Accuracy { .. })
        ));
    }

    #[test]
    fn exp_sinh_gamma_integrals() {
        // int_0^inf x^(s-1) e^-x dx = Gamma(s)
        for s in [0.3, 1.0, 2.5, 6.0] {
            let est = exp_sinh(|x| x.powf(s - 1.0) * (-x).exp(), 1e-13, 0.0).unwrap();
            let want = crate::special::gamma(s);
            assert!(((est.value - want) / want).abs() < 1e-12, "s = {s}: {} vs {want}", est.value);
        }
        // Stretched exponential: int e^{-x^0.6} = Gamma(1/0.6)/0.6
        let est = exp_sinh(|x| (-x.powf(0.6)).exp(), 1e-13, 0.0).unwrap();
        let want = crate::special::gamma(1.0 / 0.6) / 0.6;
        assert!(((est.value - want) / want).abs() < 1e-12);
    }

    #[test]
    fn epsilon_accelerates_alternating_series() {
        // sum (-1)^k / (k+1) = ln 2
        let mut table = EpsilonTable::new();
        let mut s = 0.0;
        let mut last = Estimate { value: 0.0, abs_err: 1.0 };
        for k in 0..30 {
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0);
            last = table.push(s);
        }
        assert!((last.value - 2f64.ln()).abs() < 1e-13, "{}", last.value);
        // Slowly decaying: sum (-1)^k / sqrt(k+1) = (1 - sqrt 2) zeta(1/2)
        let mut table = EpsilonTable::new();
        let mut s = 0.0;
        for k in 0..40 {
            s += if k % 2 == 0 { 1.0 } else { -1.0 } / (k as f64 + 1.0).sqrt();
            last = table.push(s);
        }
        let want = 0.604_898_643_421_630_4;
        assert!((last.value - want).abs() < 1e-12, "{}", last.value);
    }

    #[test]
    fn oscillatory_dirichlet_type_integral() {
        // int_0^inf sin(x) / (1 + x) ... compare with int_0^inf cos(x)/(1+x^2) = pi/(2e)
        let est = oscillatory(|x| x.cos() / (1.0 + x * x), 0.5 * PI, PI, 1e-12, 1e-15, 5000).unwrap();
        let want = PI / (2.0 * std::f64::consts::E);
        assert!((est.value - want).abs() < 1e-11, "{} vs {want}", est.value);
        // int_0^inf sin x / x = pi / 2 (slow algebraic decay)
        let est = oscillatory(|x| if x == 0.0 { 1.0 } else { x.sin() / x }, PI, PI, 1e-12, 1e-15, 5000).unwrap();
        assert!((est.value - 0.5 * PI).abs() < 1e-11, "{}", est.value);
    }
}
